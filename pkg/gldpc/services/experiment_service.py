import json
import logging
import math
import struct
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from cachetools import LRUCache, cached
from scipy.stats import norm

import gldpc
from gldpc.models.qtable import QTable
from gldpc.models.tanner_graph import ExpandedParityMatrix, GeneralizedTannerGraph
from gldpc.schemas.channel_schema import SnrPoint
from gldpc.schemas.code_schema import CodeSpec, RateReport
from gldpc.schemas.decoder_schema import ScheduleSpec
from gldpc.schemas.experiment_schema import (
    TRAINING_KEYS, ComplexityTable, ExperimentConfig, FerCurve, FerPoint, PairedPoint,
    RunRecord
)
from gldpc.schemas.scheduler_schema import PolicyMode, TrainingSet
from gldpc.services.channel_service import all_zero_frame, frame_rng, noise_digest, snr_point
from gldpc.services.code_service import builtin_component, construct_code
from gldpc.services.decoder_service import (
    FixedOrderSchedule, FloodingSchedule, PolicySchedule, RandomSequentialSchedule, Schedule,
    decode
)
from gldpc.services.scheduler_service import PolicySet, train
from gldpc.storage.csv_store import (
    write_complexity_csv, write_fer_csv, write_pairs_csv, write_runs_json
)
from gldpc.storage.files import atomic_write_text, read_alist, read_component, read_text
from gldpc.storage.qtable_store import load_qtable, save_qtable
from gldpc.utils.exceptions import GridMismatchError, InvalidParameterError, MissingPolicyError
from gldpc.utils.random_utils import STREAM_TRAINING

logger = logging.getLogger(__name__)

RL_KINDS = ("rl-mixed", "rl-per-snr")
MIXED_TABLE = "qtable-mixed.gqt"


class BuiltCode(NamedTuple):
    graph: GeneralizedTannerGraph
    h: ExpandedParityMatrix
    report: RateReport


class FrameOutcome(NamedTuple):
    digest: int
    errors: Tuple[bool, ...]
    iterations: Tuple[int, ...]
    messages: Tuple[int, ...]


@cached(cache=LRUCache(maxsize=16), key=lambda spec: spec.cache_key())
def build_code(spec: CodeSpec) -> BuiltCode:
    """
    Construct (or load) the code described by a spec. Results are cached per spec, so the
    returned objects are shared and must be treated as read only.
    """
    component = builtin_component(spec.component)
    if component is None:
        component = read_component(spec.component)
    base = read_alist(spec.alist_path) if spec.alist_path else None
    graph, h, report = construct_code(spec, component, base=base)
    return BuiltCode(graph, h, report)


def code_id(report: RateReport, spec: CodeSpec) -> str:
    return f"n{report.n}-m{report.m}-g{report.g}-{report.component}-s{spec.base_seed}"


def wilson_interval(errors: int, frames: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion.

    Examples:
        >>> wilson_interval(0, 0)
        (0.0, 1.0)
    """
    if frames == 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2.0)
    phat = errors / frames
    denom = 1.0 + z * z / frames
    center = (phat + z * z / (2 * frames)) / denom
    half = z * math.sqrt(phat * (1 - phat) / frames + z * z / (4 * frames * frames)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def paired_difference_interval(only_a: int, only_b: int, frames: int,
                               confidence: float = 0.95) -> Tuple[float, float]:
    """
    Normal interval for FER_a - FER_b from per-frame differences d in {-1, 0, 1}. Only the
    discordant frames (errors under one schedule only) contribute.
    """
    if frames < 2:
        return -1.0, 1.0
    z = norm.ppf(0.5 + confidence / 2.0)
    mean = (only_a - only_b) / frames
    variance = ((only_a + only_b) / frames - mean * mean) * frames / (frames - 1)
    half = z * math.sqrt(max(variance, 0.0) / frames)
    return mean - half, mean + half


def unpaired_difference_interval(errors_a: int, errors_b: int, frames: int,
                                 confidence: float = 0.95) -> Tuple[float, float]:
    """Normal interval for FER_a - FER_b treating the two runs as independent."""
    if frames == 0:
        return -1.0, 1.0
    z = norm.ppf(0.5 + confidence / 2.0)
    pa, pb = errors_a / frames, errors_b / frames
    half = z * math.sqrt(pa * (1 - pa) / frames + pb * (1 - pb) / frames)
    return (pa - pb) - half, (pa - pb) + half


def frame_llr(n: int, s: SnrPoint, seed: int, snr_index: int, frame_index: int) -> np.ndarray:
    """LLRs of frame `frame_index` at grid point `snr_index`; shared by every schedule."""
    return all_zero_frame(n, s, frame_rng(seed, snr_index, frame_index))


def generate_training_set(ts: TrainingSet, rate: float, n: int, seed: int,
                          start: int = 0) -> Iterator[Tuple[float, np.ndarray]]:
    """
    Stream (Eb/N0 label, LLR vector) pairs of all-zero codewords, one per episode.

    Mixed sets visit the grid round-robin, so every SNR receives exactly size/K frames;
    per-SNR sets use their single grid point. Frame e is drawn from its own stream, so
    the stream can be restarted at any episode.

    Args:
        ts (TrainingSet): Mode, grid and size.
        rate (float): Code rate used for the Eb/N0 to sigma conversion.
        n (int): Code length.
        seed (int): User seed.
        start (int, optional): First episode to emit.

    Yields:
        Tuple[float, np.ndarray]: The SNR label and the frame's channel LLRs.
    """
    if ts.mode == PolicyMode.MIXED and ts.size % ts.K:
        raise InvalidParameterError(f"training size {ts.size} not divisible by K={ts.K}")
    points = [snr_point(ebn0, rate) for ebn0 in ts.snr_grid]
    for episode in range(start, ts.size):
        k = ts.snr_index if ts.mode == PolicyMode.PER_SNR else episode % ts.K
        rng = frame_rng(seed, k, episode, stream=STREAM_TRAINING)
        yield ts.snr_grid[k], all_zero_frame(n, points[k], rng)


def table_path(directory, ts: TrainingSet) -> Path:
    if ts.mode == PolicyMode.MIXED:
        return Path(directory) / MIXED_TABLE
    return Path(directory) / f"qtable-snr-{ts.snr_tag:g}.gqt"


def load_policies(cfg: ExperimentConfig, graph: GeneralizedTannerGraph,
                  kind: str) -> PolicySet:
    """
    Load the Q-tables an RL schedule kind needs from `cfg.policy_dir` (default: the output
    directory).

    Raises:
        MissingPolicyError: If a table file is absent.
        ShapeMismatchError: If a table does not fit the graph.
    """
    directory = Path(cfg.policy_dir or cfg.output_dir)
    if kind == "rl-mixed":
        paths = [directory / MIXED_TABLE]
    else:
        paths = [table_path(directory, TrainingSet(mode=PolicyMode.PER_SNR,
                                                   snr_grid=cfg.snr_grid, size=0,
                                                   snr_index=k))
                 for k in range(len(cfg.snr_grid))]
    missing = [str(path) for path in paths if not path.exists()]
    if missing:
        raise MissingPolicyError(f"{kind} needs Q-table(s) {', '.join(missing)}")
    return PolicySet(load_qtable(path, graph) for path in paths)


def resolve_schedule(spec: ScheduleSpec, policies: Optional[PolicySet], ebn0_db: float,
                     snr_index: int, frame_index: int) -> Schedule:
    if spec.kind == "flooding":
        return FloodingSchedule()
    if spec.kind == "fixed":
        if spec.order is None:
            raise InvalidParameterError("fixed schedule needs an order")
        return FixedOrderSchedule(spec.order)
    if spec.kind == "random":
        return RandomSequentialSchedule(spec.seed, snr_index, frame_index)
    if policies is None:
        raise MissingPolicyError(f"schedule {spec.kind} needs a policy")
    return PolicySchedule(policies.for_snr(ebn0_db), name=spec.kind)


class ChunkJob(NamedTuple):
    graph: GeneralizedTannerGraph
    schedules: Tuple[ScheduleSpec, ...]
    policies: Tuple[Optional[PolicySet], ...]
    point: SnrPoint
    snr_index: int
    seed: int
    i_max: int
    start: int
    stop: int


def decode_chunk(job: ChunkJob) -> List[FrameOutcome]:
    """Decode frames [start, stop) of one SNR point with every schedule."""
    outcomes = []
    for frame_index in range(job.start, job.stop):
        llr = frame_llr(job.graph.n, job.point, job.seed, job.snr_index, frame_index)
        errors, iterations, messages = [], [], []
        for spec, policies in zip(job.schedules, job.policies):
            schedule = resolve_schedule(spec, policies, job.point.ebn0_db, job.snr_index,
                                        frame_index)
            result = decode(llr, job.graph, schedule, job.i_max, trace=False)
            errors.append(not result.converged or bool(result.bits.any()))
            iterations.append(result.iterations_used)
            messages.append(result.spcn_to_vn_messages)
        outcomes.append(FrameOutcome(noise_digest(llr), tuple(errors), tuple(iterations),
                                     tuple(messages)))
    return outcomes


class PointTally:
    """Exact per-schedule counters of one SNR point, accumulated in frame order."""

    def __init__(self, schedules: int):
        self.frames = 0
        self.errors = [0] * schedules
        self.iterations = [0] * schedules
        self.messages = [0] * schedules
        self.discordant: Dict[Tuple[int, int], int] = {}
        self.digest = 0

    def add(self, outcome: FrameOutcome) -> None:
        self.frames += 1
        for i, error in enumerate(outcome.errors):
            self.errors[i] += error
            self.iterations[i] += outcome.iterations[i]
            self.messages[i] += outcome.messages[i]
        for i, j in combinations(range(len(outcome.errors)), 2):
            if outcome.errors[i] != outcome.errors[j]:
                key = (i, j) if outcome.errors[i] else (j, i)
                self.discordant[key] = self.discordant.get(key, 0) + 1
        self.digest = zlib.crc32(struct.pack("<I", outcome.digest), self.digest)

    def done(self, min_frame_errors: int, max_frames: int) -> bool:
        return self.frames >= max_frames or min(self.errors) >= min_frame_errors

    def point(self, i: int, s: SnrPoint) -> FerPoint:
        lo, hi = wilson_interval(self.errors[i], self.frames)
        frames = max(self.frames, 1)
        return FerPoint(
            ebn0_db=s.ebn0_db, esn0_db=s.esn0_db, frames=self.frames,
            frame_errors=self.errors[i], fer=self.errors[i] / frames, ci_lo=lo, ci_hi=hi,
            mean_iters=self.iterations[i] / frames, mean_msgs=self.messages[i] / frames,
            noise_digest=self.digest,
        )


def run_point(cfg: ExperimentConfig, graph: GeneralizedTannerGraph,
              schedules: Sequence[ScheduleSpec], policies: Sequence[Optional[PolicySet]],
              s: SnrPoint, snr_index: int, executor: Optional[ProcessPoolExecutor] = None
              ) -> PointTally:
    """
    Simulate one SNR point until every schedule has min_frame_errors errors or
    max_frames frames were decoded.

    Frames are decoded in chunks; with an executor, `cfg.workers` chunks run at once.
    Outcomes are folded in frame-index order and the stopping rule is checked after
    every frame, so the counters do not depend on the worker count.
    """
    tally = PointTally(len(schedules))
    start = 0
    batch = cfg.workers if executor is not None else 1
    while not tally.done(cfg.min_frame_errors, cfg.max_frames):
        jobs = []
        for _ in range(batch):
            if start >= cfg.max_frames:
                break
            stop = min(start + cfg.chunk_size, cfg.max_frames)
            jobs.append(ChunkJob(graph, tuple(schedules), tuple(policies), s, snr_index,
                                 cfg.seed, cfg.i_max, start, stop))
            start = stop
        results = executor.map(decode_chunk, jobs) if executor is not None else map(
            decode_chunk, jobs)
        for outcomes in results:
            for outcome in outcomes:
                if tally.done(cfg.min_frame_errors, cfg.max_frames):
                    break
                tally.add(outcome)
    logger.info("Eb/N0 %.2f dB: %d frames, errors %s", s.ebn0_db, tally.frames, tally.errors)
    return tally


def _simulate(cfg: ExperimentConfig, built: BuiltCode, schedules: Sequence[ScheduleSpec],
              policies: Sequence[Optional[PolicySet]]) -> List[Tuple[SnrPoint, PointTally]]:
    points = [snr_point(ebn0, built.report.rate) for ebn0 in cfg.snr_grid]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            return [(s, run_point(cfg, built.graph, schedules, policies, s, k, executor))
                    for k, s in enumerate(points)]
    return [(s, run_point(cfg, built.graph, schedules, policies, s, k))
            for k, s in enumerate(points)]


def fer_sweep(cfg: ExperimentConfig, built: BuiltCode, schedule: ScheduleSpec,
              policies: Optional[PolicySet] = None) -> FerCurve:
    """
    FER curve of one schedule over the config's Eb/N0 grid.

    A frame counts as an error when the decoder did not converge or any bit is nonzero
    (the transmitted codeword is all-zero). Every frame enters the averages, converged
    or not.

    Args:
        cfg (ExperimentConfig): Grid, stopping rule, I_max, seed and workers.
        built (BuiltCode): The code to simulate.
        schedule (ScheduleSpec): Schedule to run.
        policies (PolicySet, optional): Policies for RL schedules; loaded from the policy
            directory when omitted.

    Returns:
        FerCurve: One point per grid entry.

    Raises:
        MissingPolicyError: If an RL schedule has no table on disk.
        ShapeMismatchError: If a table does not fit the graph.
    """
    if schedule.kind in RL_KINDS and policies is None:
        policies = load_policies(cfg, built.graph, schedule.kind)
    tallies = _simulate(cfg, built, [schedule], [policies])
    return FerCurve(code_id=code_id(built.report, cfg.code_spec()), schedule=schedule.label,
                    points=[tally.point(0, s) for s, tally in tallies])


def complexity_report(curves: Sequence[FerCurve]) -> ComplexityTable:
    """
    Mean SPCN-to-VN messages per decoded frame, one row per schedule.

    Raises:
        GridMismatchError: If the curves do not share one Es/N0 grid.
    """
    if not curves:
        raise GridMismatchError("no curves to tabulate")
    grid = curves[0].esn0_grid
    for curve in curves[1:]:
        if len(curve.esn0_grid) != len(grid) or not np.allclose(curve.esn0_grid, grid):
            raise GridMismatchError(
                f"schedule {curve.schedule} was simulated on a different SNR grid")
    return ComplexityTable(
        schedules=[curve.schedule for curve in curves],
        esn0_grid=list(grid),
        rows={curve.schedule: [point.mean_msgs for point in curve.points] for curve in curves},
    )


def paired_points(labels: Sequence[str], tallies: Sequence[Tuple[SnrPoint, PointTally]]
                  ) -> List[PairedPoint]:
    pairs = []
    for s, tally in tallies:
        for i, j in combinations(range(len(labels)), 2):
            only_a = tally.discordant.get((i, j), 0)
            only_b = tally.discordant.get((j, i), 0)
            frames = tally.frames
            paired = paired_difference_interval(only_a, only_b, frames)
            unpaired = unpaired_difference_interval(tally.errors[i], tally.errors[j], frames)
            pairs.append(PairedPoint(
                schedule_a=labels[i], schedule_b=labels[j], ebn0_db=s.ebn0_db,
                esn0_db=s.esn0_db, frames=frames, errors_a=tally.errors[i],
                errors_b=tally.errors[j], only_a=only_a, only_b=only_b,
                fer_diff=(tally.errors[i] - tally.errors[j]) / max(frames, 1),
                paired_lo=paired[0], paired_hi=paired[1],
                unpaired_lo=unpaired[0], unpaired_hi=unpaired[1],
            ))
    return pairs


class Comparison(NamedTuple):
    curves: List[FerCurve]
    complexity: ComplexityTable
    pairs: List[PairedPoint]
    records: List[RunRecord]


def compare_schedulers(cfg: ExperimentConfig, built: Optional[BuiltCode] = None,
                       output_dir: Optional[str] = None,
                       policies: Optional[Dict[str, PolicySet]] = None) -> Comparison:
    """
    Run every configured schedule on the same frames and write the result files.

    Each frame's noise is drawn once from (seed, SNR index, frame index) and decoded by
    every schedule, so FER differences can be compared pairwise. A point stops when every
    schedule has min_frame_errors errors or max_frames frames were decoded.

    Args:
        cfg (ExperimentConfig): The experiment.
        built (BuiltCode, optional): Code to use; built from the config when omitted.
        output_dir (str, optional): Where fer.csv, complexity.csv, pairs.csv and runs.json
            go. Nothing is written when None.
        policies (Dict[str, PolicySet], optional): Policies per RL kind; loaded from the
            policy directory when omitted.

    Returns:
        Comparison: Curves, complexity table, paired statistics and run records.
    """
    started = time.perf_counter()
    spec = cfg.code_spec()
    built = built or build_code(spec)
    schedules = cfg.schedule_specs()
    policies = policies or {}
    schedule_policies = [
        policies.get(s.kind) or (load_policies(cfg, built.graph, s.kind)
                                 if s.kind in RL_KINDS else None)
        for s in schedules
    ]
    tallies = _simulate(cfg, built, schedules, schedule_policies)
    wall_clock = time.perf_counter() - started

    identity = code_id(built.report, spec)
    labels = [s.label for s in schedules]
    curves = [FerCurve(code_id=identity, schedule=label,
                       points=[tally.point(i, s) for s, tally in tallies])
              for i, label in enumerate(labels)]
    comparison = Comparison(
        curves=curves,
        complexity=complexity_report(curves),
        pairs=paired_points(labels, tallies),
        records=[RunRecord(
            config_hash=cfg.config_hash(), code_id=identity, rate=built.report.rate,
            design_rate=built.report.design_rate, rank=built.report.rank,
            mu=built.report.mu, base_seed=built.report.base_seed, plan_seed=cfg.plan_seed,
            seed=cfg.seed, schedule=curve.schedule, wall_clock_s=wall_clock,
            points=curve.points, version=gldpc.__version__,
        ) for curve in curves],
    )
    if output_dir is not None:
        write_comparison(output_dir, comparison)
    return comparison


def write_comparison(output_dir, comparison: Comparison) -> None:
    directory = Path(output_dir)
    write_fer_csv(directory / "fer.csv", comparison.curves)
    write_complexity_csv(directory / "complexity.csv", comparison.complexity)
    write_pairs_csv(directory / "pairs.csv", comparison.pairs)
    write_runs_json(directory / "runs.json", comparison.records)
    logger.info("wrote results for %d schedules to %s", len(comparison.curves), directory)


class ProgressLogger:
    """on_episode callback: moving-average reward logging plus periodic checkpoints."""

    def __init__(self, ts: TrainingSet, checkpoint: Path, config_hash: str,
                 log_every: int, checkpoint_every: int):
        self.ts = ts
        self.checkpoint = checkpoint
        self.config_hash = config_hash
        self.log_every = log_every
        self.checkpoint_every = checkpoint_every
        self.window: List[float] = []

    def __call__(self, episode: int, mean_reward: float, table: QTable) -> None:
        self.window.append(mean_reward)
        done = episode + 1
        if done % self.log_every == 0 or done == self.ts.size:
            logger.info("episode %d/%d: mean reward %.4f over the last %d episodes",
                        done, self.ts.size, sum(self.window) / len(self.window),
                        len(self.window))
            self.window.clear()
        if done % self.checkpoint_every == 0 and done < self.ts.size:
            save_checkpoint(self.checkpoint, table, done, self.config_hash)


def checkpoint_paths(path: Path) -> Tuple[Path, Path]:
    return path.with_name(path.name + ".ckpt"), path.with_name(path.name + ".ckpt.json")


def save_checkpoint(path: Path, table: QTable, episodes_done: int, config_hash: str) -> None:
    table_file, meta_file = checkpoint_paths(path)
    save_qtable(table, table_file)
    atomic_write_text(meta_file, json.dumps(
        {"episodes_done": episodes_done, "config_hash": config_hash}, sort_keys=True) + "\n")


def load_checkpoint(path: Path, graph: GeneralizedTannerGraph,
                    config_hash: str) -> Tuple[Optional[QTable], int]:
    """Checkpointed table and episode count, or (None, 0) when absent or stale."""
    table_file, meta_file = checkpoint_paths(path)
    if not (table_file.exists() and meta_file.exists()):
        return None, 0
    meta = json.loads(read_text(meta_file))
    if meta.get("config_hash") != config_hash:
        logger.warning("ignoring checkpoint %s: config changed", table_file)
        return None, 0
    logger.info("resuming %s from episode %d", path.name, meta["episodes_done"])
    return load_qtable(table_file, graph), int(meta["episodes_done"])


def run_training(cfg: ExperimentConfig, built: Optional[BuiltCode] = None,
                 output_dir: Optional[str] = None) -> List[Path]:
    """
    Train the configured policies and save them as Q-table files.

    Mixed mode trains one table over train_size episodes; per-SNR mode trains one table of
    train_size episodes per grid point. Interrupted runs resume from `<table>.ckpt` when
    its recorded config hash matches.

    Returns:
        List[Path]: The saved table files.

    Raises:
        EmptyTrainingSetError: If train_size is 0.
    """
    built = built or build_code(cfg.code_spec())
    directory = Path(output_dir or cfg.output_dir)
    hyper = cfg.hyperparams()
    paths = []
    for ts in cfg.training_sets():
        path = table_path(directory, ts)
        config_hash = cfg.config_hash(TRAINING_KEYS)
        table, start = load_checkpoint(path, built.graph, config_hash)
        logger.info("training %s: %d episodes, %d per SNR point", path.name, ts.size,
                    ts.per_snr_quota)
        progress = ProgressLogger(ts, path, config_hash, cfg.log_every, cfg.checkpoint_every)
        frames = generate_training_set(ts, built.report.rate, built.graph.n, cfg.seed, start)
        table = train(built.graph, ts, hyper, frames, on_episode=progress, table=table,
                      start_episode=start)
        save_qtable(table, path)
        for leftover in checkpoint_paths(path):
            if leftover.exists():
                leftover.unlink()
        paths.append(path)
    return paths
