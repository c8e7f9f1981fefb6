import logging
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from gldpc.models.message_state import MessageState
from gldpc.models.qtable import QTable
from gldpc.models.tanner_graph import GeneralizedTannerGraph
from gldpc.schemas.scheduler_schema import Hyperparams, PolicyMode, TrainingSet
from gldpc.services.decoder_service import cn_states, cn_update
from gldpc.utils.exceptions import (
    EmptyTrainingSetError, InvalidParameterError, MissingPolicyError, ShapeMismatchError
)
from gldpc.utils.random_utils import STREAM_EGREEDY, derive_rng

logger = logging.getLogger(__name__)

EpisodeCallback = Callable[[int, float, QTable], None]


def state_index(hard_bits: Sequence[int]) -> int:
    """
    Big-endian index of a CN's hard decisions: the j-th smallest VN carries 2^(l-1-j).

    Examples:
        >>> state_index([1, 0, 0, 0, 0, 0, 1])
        65
    """
    value = 0
    for bit in hard_bits:
        if bit not in (0, 1):
            raise InvalidParameterError(f"hard decision must be 0 or 1, got {bit}")
        value = (value << 1) | int(bit)
    return value


def reward(x_true: Sequence[int], x_hat: Sequence[int]) -> float:
    """Fraction of the CN's bits that were reconstructed correctly."""
    x_true = np.asarray(x_true)
    x_hat = np.asarray(x_hat)
    if x_true.shape != x_hat.shape:
        raise ShapeMismatchError(
            f"reward needs equal lengths, got {x_true.shape[0]} and {x_hat.shape[0]}")
    return float(np.mean(x_true == x_hat))


def q_update(q: QTable, s: int, a: int, r: float, s_next: int, hyper: Hyperparams) -> float:
    """
    One Q-learning step: G(s, a) <- (1 - alpha) G(s, a) + alpha (r + beta max_a' G(s_next, a')).

    The max scans every action a' at the numeric state index s_next.

    Returns:
        float: The updated entry.
    """
    target = r + hyper.beta * float(q.q[:, s_next].max())
    value = (1.0 - hyper.alpha) * q.q[a, s] + hyper.alpha * target
    q.q[a, s] = value
    q.visit_counts[a, s] += 1
    return float(value)


def select_action_egreedy(q: QTable, states: np.ndarray, epsilon: float,
                          rng: np.random.Generator) -> int:
    """
    Explore a uniform CN with probability epsilon, otherwise exploit argmax_a G(s_a, a).

    Ties go to the lowest CN index. Exactly one uniform draw is consumed per call, plus one
    integer draw when exploring.
    """
    if rng.random() < epsilon:
        return int(rng.integers(q.m))
    return int(np.argmax(q.q[np.arange(q.m), states]))


def policy_next_cn(q: QTable, states: np.ndarray, scheduled) -> int:
    """
    Greedy policy restricted to CNs not yet scheduled in the current sweep.

    Args:
        q (QTable): Trained table (read only).
        states (np.ndarray): Current state index of every CN.
        scheduled: Boolean mask of length m, or an iterable of scheduled CN indices.

    Returns:
        int: The unscheduled CN with the largest G(s_a, a); ties go to the lowest index.

    Raises:
        InvalidParameterError: If every CN is already scheduled.
    """
    mask = np.zeros(q.m, dtype=bool)
    scheduled = np.asarray(list(scheduled) if not isinstance(scheduled, np.ndarray)
                           else scheduled)
    if scheduled.dtype == bool:
        mask[:] = scheduled
    elif scheduled.size:
        mask[scheduled.astype(np.int64)] = True
    if mask.all():
        raise InvalidParameterError("every CN is already scheduled in this iteration")
    values = np.where(mask, -np.inf, q.q[np.arange(q.m), np.asarray(states)])
    return int(np.argmax(values))


class QPolicy:
    """Callable inference policy over one Q-table, usable with PolicySchedule."""

    def __init__(self, table: QTable):
        self.table = table

    def __call__(self, states: np.ndarray, scheduled: np.ndarray) -> int:
        return policy_next_cn(self.table, states, scheduled)


class PolicySet:
    """
    Either one mixed-SNR table used at every SNR, or per-SNR tables looked up by the
    frame's Eb/N0.
    """

    def __init__(self, tables: Iterable[QTable]):
        tables = list(tables)
        if not tables:
            raise MissingPolicyError("no Q-tables supplied")
        modes = {t.mode for t in tables}
        if len(modes) != 1:
            raise InvalidParameterError("cannot mix mixed-SNR and per-SNR tables in one set")
        self.mode = modes.pop()
        if self.mode == PolicyMode.MIXED and len(tables) != 1:
            raise InvalidParameterError("a mixed policy set holds exactly one table")
        self.tables = tables
        self._by_snr: Dict[float, QTable] = {
            round(t.snr_tag, 6): t for t in tables if t.snr_tag is not None}

    def check_compatible(self, graph: GeneralizedTannerGraph) -> None:
        for table in self.tables:
            table.check_compatible(graph)

    def for_snr(self, ebn0_db: float) -> QPolicy:
        if self.mode == PolicyMode.MIXED:
            return QPolicy(self.tables[0])
        table = self._by_snr.get(round(ebn0_db, 6))
        if table is None:
            raise MissingPolicyError(f"no per-SNR Q-table for Eb/N0 = {ebn0_db} dB")
        return QPolicy(table)


def run_episode(graph: GeneralizedTannerGraph, table: QTable, llr: np.ndarray,
                hyper: Hyperparams, rng: np.random.Generator,
                update: Callable = cn_update) -> float:
    """One training episode on a single all-zero-codeword frame; returns the mean reward."""
    state = MessageState(graph, llr)
    states = cn_states(graph, state.posterior)
    x_true = np.zeros(graph.p, dtype=np.uint8)
    total = 0.0
    for _ in range(hyper.ell_max):
        a = select_action_egreedy(table, states, hyper.epsilon, rng)
        s = int(states[a])
        x_hat = update(state, graph, a)
        r = reward(x_true, x_hat)
        states = cn_states(graph, state.posterior)
        q_update(table, s, a, r, int(states[a]), hyper)
        total += r
    return total / hyper.ell_max


def train(graph: GeneralizedTannerGraph, ts: TrainingSet, hyper: Hyperparams,
          frames: Iterable[Tuple[float, np.ndarray]], update: Callable = cn_update,
          on_episode: Optional[EpisodeCallback] = None, table: Optional[QTable] = None,
          start_episode: int = 0) -> QTable:
    """
    Learn a CN scheduling policy by tabular Q-learning.

    Every episode starts a fresh decoder state from one training frame, then schedules
    ell_max CNs chosen epsilon-greedily. After each scheduling the CN output is scored
    against the all-zero codeword, every CN state is refreshed from the posterior, and
    the table is updated. The exploration stream of episode e is derived from
    (hyper.seed, e), so a run resumed at `start_episode` with the checkpointed table
    continues bit-identically.

    Args:
        graph (GeneralizedTannerGraph): The decoding graph.
        ts (TrainingSet): Mode, SNR grid and size; size is the total episode count.
        hyper (Hyperparams): alpha, beta, epsilon, ell_max and the exploration seed.
        frames (Iterable[Tuple[float, np.ndarray]]): (Eb/N0 label, LLR vector) pairs
            for episodes start_episode, start_episode + 1, ... in order.
        update (Callable, optional): Component CN update. Defaults to `cn_update`.
        on_episode (Callable, optional): Called as on_episode(episode, mean_reward, table)
            after every episode.
        table (QTable, optional): Table to continue from (checkpoint resume).
        start_episode (int, optional): Index of the first episode to run.

    Returns:
        QTable: The trained table.

    Raises:
        EmptyTrainingSetError: If the training set holds no episodes.
        ShapeMismatchError: If `table` does not fit the graph.
    """
    if ts.size == 0:
        raise EmptyTrainingSetError("training set is empty")
    if table is None:
        table = QTable.for_graph(graph, mode=ts.mode, hyper=hyper, snr_tag=ts.snr_tag)
    table.check_compatible(graph)

    episode = start_episode
    for _, llr in frames:
        if episode >= ts.size:
            break
        rng = derive_rng(hyper.seed, STREAM_EGREEDY, episode)
        mean_reward = run_episode(graph, table, llr, hyper, rng, update)
        if on_episode is not None:
            on_episode(episode, mean_reward, table)
        episode += 1

    if episode < ts.size:
        logger.warning("training stream ended after %d of %d episodes", episode, ts.size)
    bound = 1.0 / (1.0 - hyper.beta)
    if table.q.min() < 0.0 or table.q.max() > bound + 1e-9:
        logger.warning("Q-values left [0, %.3f]: min %.4f, max %.4f",
                       bound, table.q.min(), table.q.max())
    logger.info("trained %s Q-table over %d episodes (%d visited entries)",
                table.mode.value, episode - start_episode, int((table.visit_counts > 0).sum()))
    return table
