from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field


class DecodeResult(BaseModel):
    bits: np.ndarray
    converged: bool
    iterations_used: int = Field(..., ge=0)
    spcn_to_vn_messages: int = Field(..., ge=0)
    schedule_trace: List[int] = []

    class Config:
        arbitrary_types_allowed = True


ScheduleKind = Literal["flooding", "fixed", "random", "rl-mixed", "rl-per-snr"]


class ScheduleSpec(BaseModel):
    """Picklable description of a schedule; resolved to a Schedule per frame."""
    kind: ScheduleKind
    order: Optional[List[int]] = None
    seed: int = 0

    class Config:
        allow_mutation = False

    @property
    def label(self) -> str:
        return self.kind
