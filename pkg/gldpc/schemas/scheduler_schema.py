from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, root_validator, validator


class PolicyMode(str, Enum):
    MIXED = "mixed"
    PER_SNR = "per-snr"


class Hyperparams(BaseModel):
    alpha: float = Field(0.1, gt=0.0, lt=1.0, description="learning rate")
    beta: float = Field(0.9, gt=0.0, lt=1.0, description="reward discount rate")
    epsilon: float = Field(0.6, ge=0.0, le=1.0, description="probability of exploration")
    ell_max: int = Field(50, ge=1, description="scheduling steps per episode")
    seed: int = Field(0, ge=0)

    class Config:
        allow_mutation = False


class TrainingSet(BaseModel):
    mode: PolicyMode = PolicyMode.MIXED
    snr_grid: Tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 4.5, 5.0)
    size: int = Field(..., ge=0)
    seed: int = Field(0, ge=0)
    snr_index: Optional[int] = None

    class Config:
        allow_mutation = False

    @validator("snr_grid")
    def check_grid(cls, grid):
        if not grid:
            raise ValueError("snr_grid must not be empty")
        return grid

    @root_validator(skip_on_failure=True)
    def check_mode(cls, values):
        mode, grid, size = values["mode"], values["snr_grid"], values["size"]
        if mode == PolicyMode.MIXED and size % len(grid) != 0:
            raise ValueError(
                f"mixed training set size {size} is not divisible by K={len(grid)}")
        if mode == PolicyMode.PER_SNR:
            index = values.get("snr_index")
            if index is None or not 0 <= index < len(grid):
                raise ValueError(f"per-snr training needs snr_index in [0, {len(grid)})")
        return values

    @property
    def K(self) -> int:
        return len(self.snr_grid)

    @property
    def per_snr_quota(self) -> int:
        return self.size // self.K if self.mode == PolicyMode.MIXED else self.size

    @property
    def snr_tag(self) -> Optional[float]:
        return self.snr_grid[self.snr_index] if self.mode == PolicyMode.PER_SNR else None

    def labels(self) -> List[float]:
        """SNR label of every episode, in episode order (round-robin in mixed mode)."""
        if self.mode == PolicyMode.PER_SNR:
            return [self.snr_grid[self.snr_index]] * self.size
        return [self.snr_grid[i % self.K] for i in range(self.size)]
