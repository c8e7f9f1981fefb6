from fractions import Fraction
from functools import cached_property
from typing import List, Tuple

import numpy as np

from gldpc.schemas.code_schema import BaseGraph, ComponentCode, GeneralizationPlan
from gldpc.utils.gf2_utils import gf2_rank

GCN = "GCN"
SPCN = "SPCN"


class CnRecord:
    """One constraint node C_i: its p neighbor VNs and its z SPCN rows."""

    __slots__ = ("index", "kind", "neighbors", "spcn_rows")

    def __init__(self, index: int, kind: str, neighbors: Tuple[int, ...],
                 spcn_rows: Tuple[Tuple[Tuple[int, bool], ...], ...]):
        self.index = index
        self.kind = kind
        self.neighbors = neighbors
        self.spcn_rows = spcn_rows

    @property
    def z(self) -> int:
        return len(self.spcn_rows)

    def row_support(self, j: int) -> List[int]:
        return [vn for vn, participates in self.spcn_rows[j] if participates]

    def __repr__(self):
        return f"CnRecord(index={self.index}, kind={self.kind}, z={self.z})"


class GeneralizedTannerGraph:
    """
    Generalized Tanner graph G plus the dense index arrays the decoder runs on.

    Messages live in flat "slot" arrays of length m*zmax*p + 1: slot
    a*zmax*p + j*p + t is the edge between row j of CN a and its t-th neighbor VN.
    Slots of inactive positions are masked out; the final slot is a sentinel that
    always reads as zero. Instances are read-only after construction.
    """

    def __init__(self, base: BaseGraph, component: ComponentCode,
                 plan: GeneralizationPlan, cns: List[CnRecord]):
        self.base = base
        self.component = component
        self.plan = plan
        self.cns = cns
        self.n = base.n
        self.m = base.m
        self.p = base.p
        self.zmax = max(cn.z for cn in cns)

        self.neighbors = np.array([cn.neighbors for cn in cns], dtype=np.int64)
        self.row_mask = np.zeros((self.m, self.zmax, self.p), dtype=bool)
        for cn in cns:
            for j, row in enumerate(cn.spcn_rows):
                self.row_mask[cn.index, j] = [participates for _, participates in row]
        self.row_count = np.array([cn.z for cn in cns], dtype=np.int64)
        self.cn_edge_count = self.row_mask.sum(axis=(1, 2)).astype(np.int64)
        self.total_edges = int(self.cn_edge_count.sum())

        self.slot_count = self.m * self.zmax * self.p
        self.sentinel = self.slot_count
        slot_vn = np.broadcast_to(self.neighbors[:, None, :], self.row_mask.shape)
        self.slot_vn = np.where(self.row_mask, slot_vn, -1).reshape(-1)
        self.edge_slots = np.flatnonzero(self.slot_vn >= 0)
        self.edge_vn = self.slot_vn[self.edge_slots]

        vn_slot_lists = [[] for _ in range(self.n)]
        for slot, vn in zip(self.edge_slots.tolist(), self.edge_vn.tolist()):
            vn_slot_lists[vn].append(slot)
        dmax = max(len(slots) for slots in vn_slot_lists)
        self.vn_slots = np.full((self.n, dmax), self.sentinel, dtype=np.int64)
        for vn, slots in enumerate(vn_slot_lists):
            self.vn_slots[vn, :len(slots)] = slots
        self.vn_edge_count = np.array([len(s) for s in vn_slot_lists], dtype=np.int64)
        self.cn_vn_slots = self.vn_slots[self.neighbors]

        self.state_weights = (1 << np.arange(self.p - 1, -1, -1)).astype(np.int64)
        for array in (self.neighbors, self.row_mask, self.row_count, self.cn_edge_count,
                      self.slot_vn, self.edge_slots, self.edge_vn, self.vn_slots,
                      self.cn_vn_slots, self.state_weights):
            array.flags.writeable = False

    @property
    def g(self) -> int:
        return self.plan.g

    @cached_property
    def vn_adjacency(self) -> List[List[Tuple[int, int]]]:
        """For each VN the (cn index, row index) pairs of its incident SPCN rows."""
        adjacency = [[] for _ in range(self.n)]
        for cn in self.cns:
            for j, row in enumerate(cn.spcn_rows):
                for vn, participates in row:
                    if participates:
                        adjacency[vn].append((cn.index, j))
        return adjacency

    @cached_property
    def vn_cn_count(self) -> np.ndarray:
        """Number of distinct CNs incident to each VN."""
        counts = np.zeros(self.n, dtype=np.int64)
        for row in self.neighbors:
            counts[row] += 1
        return counts

    def __repr__(self):
        return (f"GeneralizedTannerGraph(n={self.n}, m={self.m}, p={self.p}, g={self.g}, "
                f"component={self.component.name})")


class ExpandedParityMatrix:
    """Expanded parity-check matrix H: one row per SPCN row of every CN."""

    def __init__(self, rows: np.ndarray):
        self.rows = rows
        self.rows.flags.writeable = False

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    @property
    def row_count(self) -> int:
        return self.rows.shape[0]

    @cached_property
    def rank(self) -> int:
        return gf2_rank(self.rows)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.n - self.rank, self.n)
