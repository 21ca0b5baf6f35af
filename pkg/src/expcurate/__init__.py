"""expcurate: a lakehouse-style engine for curating data-driven experiments.

Content-addressed storage with append-only metadata ledgers, a three-level
metadata model (raw content, recorded actions, team context), registered
tagging/transformation pipelines with deterministic replay, and exploration
analytics, exposed over a CLI (`xv`) and an HTTP service.
"""

__version__ = "0.1.0"
