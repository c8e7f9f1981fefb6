import logging
from typing import Callable, Iterable, Sequence

import numpy as np

from gldpc.models.message_state import MessageState
from gldpc.models.tanner_graph import GeneralizedTannerGraph
from gldpc.schemas.decoder_schema import DecodeResult
from gldpc.services.channel_service import clamp_llr
from gldpc.utils.exceptions import InvalidParameterError, ShapeMismatchError
from gldpc.utils.random_utils import STREAM_ORDER, derive_rng

logger = logging.getLogger(__name__)

# Largest float below 1; atanh of it exceeds L_MAX / 2, so saturated products clamp to L_MAX.
_TANH_LIMIT = np.nextafter(1.0, 0.0)


def _extrinsic_products(t: np.ndarray) -> np.ndarray:
    """Leave-one-out products along the last axis (prefix times suffix)."""
    ones = np.ones(t.shape[:-1] + (1,), dtype=t.dtype)
    prefix = np.cumprod(np.concatenate([ones, t[..., :-1]], axis=-1), axis=-1)
    suffix = np.cumprod(np.concatenate([ones, t[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return prefix * suffix


def _box_plus(products: np.ndarray) -> np.ndarray:
    return clamp_llr(2.0 * np.arctanh(np.clip(products, -_TANH_LIMIT, _TANH_LIMIT)))


def check_to_var(incoming: Sequence[float]) -> float:
    """
    SPCN -> VN message 2*atanh(prod tanh(m/2)) over the extrinsic incoming messages.

    Args:
        incoming (Sequence[float]): m_{v'->c} for v' in N(c) minus the target VN. Infinite
            values are accepted and saturate.

    Returns:
        float: The message, clamped to +-L_MAX.

    Examples:
        >>> round(check_to_var([1.0, 2.0]), 4)
        0.7353
    """
    values = np.asarray(incoming, dtype=np.float64)
    if values.size == 0:
        raise InvalidParameterError("check_to_var needs at least one incoming message")
    return float(_box_plus(np.prod(np.tanh(values / 2.0))))


def var_to_check(channel_llr: float, incoming: Iterable[float]) -> float:
    """VN -> SPCN message L_v + sum of the extrinsic check messages, clamped."""
    return float(clamp_llr(channel_llr + float(np.sum(np.asarray(list(incoming), dtype=float)))))


def posterior(channel_llr: float, incoming: Iterable[float]) -> float:
    """Posterior L_v + sum over all neighbor check messages, clamped."""
    return var_to_check(channel_llr, incoming)


def hard_decision(llr):
    """0 where the LLR is >= 0, else 1. Works on scalars and arrays."""
    if np.ndim(llr) == 0:
        return 0 if llr >= 0 else 1
    return (np.asarray(llr) < 0).astype(np.uint8)


def syndrome_ok(bits, graph: GeneralizedTannerGraph) -> bool:
    """True iff every SPCN row of every CN has even parity over `bits`."""
    bits = np.asarray(bits, dtype=np.uint8)
    local = bits[graph.neighbors][:, None, :]
    parity = (local & graph.row_mask).sum(axis=-1) & 1
    return not parity.any()


def cn_states(graph: GeneralizedTannerGraph, llr: np.ndarray) -> np.ndarray:
    """State index of every CN from the hard decisions on its neighbors (MSB = smallest VN)."""
    bits = (np.asarray(llr) < 0).astype(np.int64)
    return bits[graph.neighbors] @ graph.state_weights


def _check_block(graph: GeneralizedTannerGraph, m_vc_block: np.ndarray,
                 mask: np.ndarray) -> np.ndarray:
    t = np.where(mask, np.tanh(m_vc_block / 2.0), 1.0)
    return np.where(mask, _box_plus(_extrinsic_products(t)), 0.0)


def cn_update(state: MessageState, graph: GeneralizedTannerGraph, a: int) -> np.ndarray:
    """
    Schedule CN a: one flooding pass on its subgraph.

    First every SPCN row of C_a computes m_{c->v} for its neighbors from the current
    m_{v->c}; then every VN in N(C_a) refreshes its posterior and sends m_{v->c} to all
    its SPCN rows, including rows of border CNs (which do not recompute until they are
    scheduled themselves). This is the replaceable component-decoder unit.

    Args:
        state (MessageState): Decoder state, updated in place.
        graph (GeneralizedTannerGraph): The decoding graph.
        a (int): CN index.

    Returns:
        np.ndarray: The CN output, i.e. the hard decisions of N(C_a) in ascending VN order.

    Raises:
        InvalidParameterError: If a is not a CN index.
    """
    if not 0 <= a < graph.m:
        raise InvalidParameterError(f"CN index {a} outside [0, {graph.m})")
    width = graph.zmax * graph.p
    start = a * width
    block = state.m_vc[start:start + width].reshape(graph.zmax, graph.p)
    state.m_cv[start:start + width] = _check_block(graph, block, graph.row_mask[a]).reshape(-1)

    vns = graph.neighbors[a]
    slots = graph.cn_vn_slots[a]
    incoming = state.m_cv[slots]
    total = state.channel[vns] + incoming.sum(axis=1)
    state.posterior[vns] = clamp_llr(total)
    state.m_vc[slots] = clamp_llr(total[:, None] - incoming)
    state.m_vc[graph.sentinel] = 0.0

    state.spcn_to_vn_messages += int(graph.cn_edge_count[a])
    state.vn_update_counts[vns] += 1
    return hard_decision(state.posterior[vns])


def flood_iteration(state: MessageState, graph: GeneralizedTannerGraph) -> None:
    """All SPCN rows compute from the previous m_{v->c}, then all VNs update at once."""
    blocks = state.m_vc[:graph.slot_count].reshape(graph.m, graph.zmax, graph.p)
    state.m_cv[:graph.slot_count] = _check_block(graph, blocks, graph.row_mask).reshape(-1)

    incoming = state.m_cv[graph.edge_slots]
    total = state.channel + np.bincount(graph.edge_vn, weights=incoming, minlength=graph.n)
    state.posterior[:] = clamp_llr(total)
    state.m_vc[graph.edge_slots] = clamp_llr(total[graph.edge_vn] - incoming)

    state.spcn_to_vn_messages += graph.total_edges
    state.vn_update_counts += 1


class Schedule:
    """A CN scheduling rule. Sequential schedules pick one CN per position of a sweep."""
    flooding = False
    name = "schedule"

    def reset(self, graph: GeneralizedTannerGraph) -> None:
        """Called once at the start of every decode."""

    def start_iteration(self, iteration: int, graph: GeneralizedTannerGraph) -> None:
        """Called before each sweep."""

    def next_cn(self, position: int, state: MessageState, graph: GeneralizedTannerGraph,
                scheduled: np.ndarray) -> int:
        raise NotImplementedError


class FloodingSchedule(Schedule):
    flooding = True
    name = "flooding"


class FixedOrderSchedule(Schedule):
    name = "fixed"

    def __init__(self, order: Sequence[int]):
        self.order = [int(a) for a in order]

    def reset(self, graph):
        if sorted(self.order) != list(range(graph.m)):
            raise InvalidParameterError(f"fixed order is not a permutation of 0..{graph.m - 1}")

    def next_cn(self, position, state, graph, scheduled):
        return self.order[position]


class RandomSequentialSchedule(Schedule):
    """A fresh uniformly random CN order every iteration, reproducible per seed."""
    name = "random"

    def __init__(self, seed: int, *indices: int):
        self.seed = seed
        self.indices = indices
        self._rng = None
        self._order = None

    def reset(self, graph):
        self._rng = derive_rng(self.seed, STREAM_ORDER, *self.indices)

    def start_iteration(self, iteration, graph):
        self._order = self._rng.permutation(graph.m)

    def next_cn(self, position, state, graph, scheduled):
        return int(self._order[position])


class PolicySchedule(Schedule):
    """
    Policy-driven order: the callback receives the current state index of every CN and
    the mask of CNs already scheduled in this sweep, and returns the next CN.
    """
    name = "policy"

    def __init__(self, policy: Callable[[np.ndarray, np.ndarray], int], name: str = "policy"):
        self.policy = policy
        self.name = name

    def next_cn(self, position, state, graph, scheduled):
        a = int(self.policy(cn_states(graph, state.posterior), scheduled))
        if not 0 <= a < graph.m or scheduled[a]:
            raise InvalidParameterError(f"policy returned CN {a}, which is not unscheduled")
        return a


def decode(llr, graph: GeneralizedTannerGraph, schedule: Schedule, i_max: int,
           update: Callable = cn_update, trace: bool = True) -> DecodeResult:
    """
    Decode one frame of channel LLRs on the generalized Tanner graph.

    Sequential schedules run up to i_max sweeps, each scheduling every CN exactly once
    through `update`, and check the syndrome after every CN update. Flooding checks the
    syndrome after each full iteration. `iterations_used` counts iterations started, so a
    sequential decode that converges inside its first sweep reports 1.

    Args:
        llr: Channel LLRs, length n.
        graph (GeneralizedTannerGraph): The decoding graph.
        schedule (Schedule): Flooding, fixed, random or policy-driven schedule.
        i_max (int): Maximum number of iterations.
        update (Callable, optional): Component CN update. Defaults to `cn_update`.
        trace (bool, optional): Record the scheduled CN indices. Defaults to True.

    Returns:
        DecodeResult: Hard decisions, convergence flag, iterations and message counter.
            Non-convergence is a regular result with converged=False.

    Raises:
        ShapeMismatchError: If the LLR vector does not have length n.
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (graph.n,):
        raise ShapeMismatchError(f"LLR vector has shape {llr.shape}, graph has n={graph.n}")
    state = MessageState(graph, llr)
    schedule.reset(graph)
    schedule_trace = []
    converged = False
    iterations = 0

    for iteration in range(1, i_max + 1):
        iterations = iteration
        state.iteration = iteration
        if schedule.flooding:
            flood_iteration(state, graph)
            if syndrome_ok(hard_decision(state.posterior), graph):
                converged = True
                break
            continue

        schedule.start_iteration(iteration, graph)
        scheduled = np.zeros(graph.m, dtype=bool)
        for position in range(graph.m):
            a = schedule.next_cn(position, state, graph, scheduled)
            update(state, graph, a)
            scheduled[a] = True
            if trace:
                schedule_trace.append(a)
            if syndrome_ok(hard_decision(state.posterior), graph):
                converged = True
                break
        if converged:
            break

    logger.debug("decode (%s): converged=%s after %d iterations, %d messages",
                 schedule.name, converged, iterations, state.spcn_to_vn_messages)
    return DecodeResult(
        bits=hard_decision(state.posterior),
        converged=converged,
        iterations_used=iterations,
        spcn_to_vn_messages=state.spcn_to_vn_messages,
        schedule_trace=schedule_trace,
    )
