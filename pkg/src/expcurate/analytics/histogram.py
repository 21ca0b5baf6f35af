"""Confidence histograms for algorithmic tags, with a manual-review flag list."""

from __future__ import annotations

from dataclasses import dataclass

from expcurate.errors import CurationError, NoConfidences

DEFAULT_EDGES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
REVIEW_THRESHOLD = 0.6  # below this, a classification needs a manual check


@dataclass(frozen=True)
class ConfidenceHistogram:
    edges: tuple
    counts: tuple
    flagged: tuple  # targets with any confidence < REVIEW_THRESHOLD, first-seen order

    def to_record(self):
        return {
            "edges": list(self.edges),
            "counts": list(self.counts),
            "flagged": list(self.flagged),
        }

    @property
    def max_bin(self):
        best = max(range(len(self.counts)), key=lambda i: self.counts[i])
        return (self.edges[best], self.edges[best + 1])


def confidence_histogram(tags, edges=None) -> ConfidenceHistogram:
    """Bin algorithmic-tag confidences; bins are right-open except the last."""
    edges = tuple(edges) if edges is not None else DEFAULT_EDGES
    if len(edges) < 2 or any(edges[i] >= edges[i + 1] for i in range(len(edges) - 1)):
        raise CurationError("histogram edges must be strictly ascending")
    scored = [t for t in tags if t.confidence is not None]
    if not scored:
        raise NoConfidences("no algorithmic tags with confidences")
    counts = [0] * (len(edges) - 1)
    flagged = []
    seen = set()
    for tag in scored:
        c = tag.confidence
        if c < edges[0] or c > edges[-1]:
            continue
        if c == edges[-1]:
            idx = len(counts) - 1
        else:
            idx = 0
            while c >= edges[idx + 1]:
                idx += 1
        counts[idx] += 1
        if c < REVIEW_THRESHOLD and tag.target not in seen:
            seen.add(tag.target)
            flagged.append(tag.target)
    return ConfidenceHistogram(edges=edges, counts=tuple(counts), flagged=tuple(flagged))
