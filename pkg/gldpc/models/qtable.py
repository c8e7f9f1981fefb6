from typing import Optional

import numpy as np

from gldpc.models.tanner_graph import GeneralizedTannerGraph
from gldpc.schemas.scheduler_schema import Hyperparams, PolicyMode
from gldpc.utils.exceptions import ShapeMismatchError


class QTable:
    """
    Action-value table G(s_a, a) of one scheduling policy.

    `q[a, s]` holds the value of scheduling CN a while its state index is s; entries start
    at zero. `visit_counts` has the same shape and is diagnostic only.
    """

    def __init__(self, m: int, p: int, mode: PolicyMode = PolicyMode.MIXED,
                 hyper: Optional[Hyperparams] = None, snr_tag: Optional[float] = None,
                 q: Optional[np.ndarray] = None):
        self.m = m
        self.p = p
        self.mode = PolicyMode(mode)
        self.hyper = hyper or Hyperparams()
        self.snr_tag = snr_tag
        shape = (m, 1 << p)
        if q is None:
            q = np.zeros(shape, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        if q.shape != shape:
            raise ShapeMismatchError(f"Q values have shape {q.shape}, expected {shape}")
        self.q = q
        self.visit_counts = np.zeros(shape, dtype=np.int64)

    @classmethod
    def for_graph(cls, graph: GeneralizedTannerGraph, **kwargs) -> "QTable":
        return cls(graph.m, graph.p, **kwargs)

    @property
    def state_count(self) -> int:
        return 1 << self.p

    def check_compatible(self, graph: GeneralizedTannerGraph) -> None:
        if (self.m, self.p) != (graph.m, graph.p):
            raise ShapeMismatchError(
                f"Q-table for m={self.m}, p={self.p} does not fit graph m={graph.m}, p={graph.p}")

    def copy(self) -> "QTable":
        clone = QTable(self.m, self.p, self.mode, self.hyper, self.snr_tag, self.q.copy())
        clone.visit_counts = self.visit_counts.copy()
        return clone

    def __repr__(self):
        tag = f", snr_tag={self.snr_tag}" if self.snr_tag is not None else ""
        return f"QTable(mode={self.mode.value}, m={self.m}, p={self.p}{tag})"
