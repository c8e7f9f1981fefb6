import hashlib
import json
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Extra, Field, root_validator, validator

from gldpc.schemas.code_schema import CodeSpec
from gldpc.schemas.decoder_schema import ScheduleKind, ScheduleSpec
from gldpc.schemas.scheduler_schema import Hyperparams, PolicyMode, TrainingSet

TRAINING_KEYS = (
    "gamma", "p", "n", "base_seed", "alist", "component", "mu", "zeta", "plan_seed",
    "snr_grid", "train_mode", "train_size", "alpha", "beta", "epsilon", "ell_max", "seed",
)


class ExperimentConfig(BaseModel):
    """Every key accepted by config files and flags; unknown keys are rejected."""

    # code
    gamma: int = Field(2, ge=1)
    p: int = Field(7, ge=2)
    n: int = Field(49, ge=1)
    base_seed: int = Field(1, ge=0)
    alist: Optional[str] = None
    component: str = "hamming74"
    mu: float = Field(1.0, ge=0.0, le=1.0)
    zeta: Optional[Tuple[int, ...]] = None
    plan_seed: int = Field(3, ge=0)
    # sweep
    snr_grid: Tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 4.5, 5.0)
    axis: Literal["ebn0", "esn0"] = "esn0"
    schedules: Tuple[ScheduleKind, ...] = ("flooding", "random")
    i_max: int = Field(50, ge=1)
    min_frame_errors: int = Field(100, ge=1)
    max_frames: int = Field(1_000_000, ge=1)
    # training
    train_mode: PolicyMode = PolicyMode.MIXED
    train_size: int = Field(180_000, ge=0)
    alpha: float = Field(0.1, gt=0.0, lt=1.0)
    beta: float = Field(0.9, gt=0.0, lt=1.0)
    epsilon: float = Field(0.6, ge=0.0, le=1.0)
    ell_max: int = Field(50, ge=1)
    checkpoint_every: int = Field(5000, ge=1)
    log_every: int = Field(1000, ge=1)
    # run
    policy_dir: Optional[str] = None
    output_dir: str = "runs"
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    chunk_size: int = Field(64, ge=1)

    class Config:
        extra = Extra.forbid
        allow_mutation = False

    @validator("snr_grid")
    def check_grid(cls, grid):
        if not grid:
            raise ValueError("snr_grid must not be empty")
        if len(set(grid)) != len(grid):
            raise ValueError("snr_grid holds duplicate points")
        return grid

    @root_validator(skip_on_failure=True)
    def check_stopping_rule(cls, values):
        if values["max_frames"] < values["min_frame_errors"]:
            raise ValueError("max_frames must be >= min_frame_errors")
        return values

    def code_spec(self) -> CodeSpec:
        return CodeSpec(
            alist_path=self.alist, gamma=self.gamma, p=self.p, n=self.n,
            base_seed=self.base_seed, component=self.component, mu=self.mu,
            zeta=self.zeta, plan_seed=self.plan_seed,
        )

    def hyperparams(self) -> Hyperparams:
        return Hyperparams(alpha=self.alpha, beta=self.beta, epsilon=self.epsilon,
                           ell_max=self.ell_max, seed=self.seed)

    def training_sets(self) -> List[TrainingSet]:
        """One mixed set, or one per-SNR set per grid point."""
        if self.train_mode == PolicyMode.MIXED:
            return [TrainingSet(mode=self.train_mode, snr_grid=self.snr_grid,
                                size=self.train_size, seed=self.seed)]
        return [TrainingSet(mode=self.train_mode, snr_grid=self.snr_grid, size=self.train_size,
                            seed=self.seed, snr_index=k) for k in range(len(self.snr_grid))]

    def schedule_specs(self) -> List[ScheduleSpec]:
        return [ScheduleSpec(kind=kind, seed=self.seed) for kind in self.schedules]

    def config_hash(self, keys: Optional[Tuple[str, ...]] = None) -> str:
        """SHA-256 of the canonical JSON of the config (or of the given keys)."""
        data = json.loads(self.json())
        if keys is not None:
            data = {key: data[key] for key in keys}
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class FerPoint(BaseModel):
    ebn0_db: float
    esn0_db: float
    frames: int = Field(..., ge=0)
    frame_errors: int = Field(..., ge=0)
    fer: float
    ci_lo: float
    ci_hi: float
    mean_iters: float
    mean_msgs: float
    noise_digest: Optional[int] = None


class FerCurve(BaseModel):
    code_id: str
    schedule: str
    points: List[FerPoint] = []

    @property
    def esn0_grid(self) -> List[float]:
        return [point.esn0_db for point in self.points]


class ComplexityTable(BaseModel):
    schedules: List[str]
    esn0_grid: List[float]
    rows: Dict[str, List[float]]


class PairedPoint(BaseModel):
    schedule_a: str
    schedule_b: str
    ebn0_db: float
    esn0_db: float
    frames: int
    errors_a: int
    errors_b: int
    only_a: int
    only_b: int
    fer_diff: float
    paired_lo: float
    paired_hi: float
    unpaired_lo: float
    unpaired_hi: float


class RunRecord(BaseModel):
    config_hash: str
    code_id: str
    rate: float
    design_rate: float
    rank: int
    mu: float
    base_seed: Optional[int]
    plan_seed: int
    seed: int
    schedule: str
    wall_clock_s: float
    points: List[FerPoint]
    version: str
