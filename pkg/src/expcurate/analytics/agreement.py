"""Human-vs-machine label comparison: percent agreement and Cohen's kappa."""

from __future__ import annotations

from dataclasses import dataclass

from expcurate.errors import Empty, LengthMismatch
from expcurate.store import Store


@dataclass(frozen=True)
class AgreementResult:
    n: int
    percent_agreement: float
    kappa: float
    labels: tuple
    confusion: tuple  # confusion[i][j]: count of (a == labels[i], b == labels[j])

    def to_record(self):
        return {
            "n": self.n,
            "percent_agreement": self.percent_agreement,
            "kappa": self.kappa,
            "labels": list(self.labels),
            "confusion": [list(row) for row in self.confusion],
        }


def agreement(labels_a, labels_b) -> AgreementResult:
    """Observed agreement and chance-corrected kappa over two label vectors.

    kappa = (p_o - p_e) / (1 - p_e) with p_e from the marginals. When
    p_e == 1 (both annotators constant) kappa is defined as 1 if the
    vectors agree everywhere, else 0.
    """
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} vs {len(b)}")
    n = len(a)
    if n == 0:
        raise Empty("label vectors are empty")
    labels = tuple(sorted(set(a) | set(b)))
    index = {label: i for i, label in enumerate(labels)}
    confusion = [[0] * len(labels) for _ in labels]
    for la, lb in zip(a, b):
        confusion[index[la]][index[lb]] += 1
    observed = sum(confusion[i][i] for i in range(len(labels))) / n
    expected = 0.0
    for i in range(len(labels)):
        row = sum(confusion[i])
        col = sum(confusion[j][i] for j in range(len(labels)))
        expected += (row / n) * (col / n)
    if expected == 1.0:
        kappa = 1.0 if observed == 1.0 else 0.0
    else:
        kappa = (observed - expected) / (1.0 - expected)
    return AgreementResult(
        n=n,
        percent_agreement=observed,
        kappa=kappa,
        labels=labels,
        confusion=tuple(tuple(row) for row in confusion),
    )


def pair_label_vectors(store: Store, experiment_id, author_a, author_b):
    """Latest label per (item, author) within an experiment, over shared items.

    Items come back in stable order (release first-seen, then ordinal), so
    the vectors line up deterministically.
    """
    latest_a = {}
    latest_b = {}
    for tag in store.tags():
        if tag.experiment_id != experiment_id:
            continue
        if tag.author == author_a:
            prev = latest_a.get(tag.target)
            if prev is None or tag.created_at > prev.created_at:
                latest_a[tag.target] = tag
        elif tag.author == author_b:
            prev = latest_b.get(tag.target)
            if prev is None or tag.created_at > prev.created_at:
                latest_b[tag.target] = tag
    common = set(latest_a) & set(latest_b)

    def order_key(target):
        item = store.get_any(target)
        ordinal = getattr(item, "ordinal", 0)
        release_id = getattr(item, "release_id", "")
        return (release_id, ordinal, target)

    ordered = sorted(common, key=order_key)
    return (
        [latest_a[t].label for t in ordered],
        [latest_b[t].label for t in ordered],
        ordered,
    )
