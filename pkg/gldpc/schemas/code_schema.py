from fractions import Fraction
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, root_validator, validator

from gldpc.utils.gf2_utils import gf2_rank


class BaseGraph(BaseModel):
    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    gamma: int = Field(..., ge=1)
    p: int = Field(..., ge=2)
    rows: Tuple[Tuple[int, ...], ...]

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def check_regular(cls, values):
        n, m, gamma, p, rows = (values[key] for key in ("n", "m", "gamma", "p", "rows"))
        if m * p != n * gamma:
            raise ValueError(f"m*p ({m * p}) != n*gamma ({n * gamma})")
        if len(rows) != m:
            raise ValueError(f"expected {m} rows, got {len(rows)}")
        vn_degree = [0] * n
        for i, row in enumerate(rows):
            if len(row) != p or len(set(row)) != p:
                raise ValueError(f"row {i} must hold {p} distinct VNs, got {list(row)}")
            if list(row) != sorted(row):
                raise ValueError(f"row {i} is not in ascending order")
            for v in row:
                if not 0 <= v < n:
                    raise ValueError(f"row {i} references VN {v} outside [0, {n})")
                vn_degree[v] += 1
        irregular = [v for v, degree in enumerate(vn_degree) if degree != gamma]
        if irregular:
            v = irregular[0]
            raise ValueError(
                f"irregular graph: VN {v} has degree {vn_degree[v]}, expected gamma={gamma}")
        return values


class ComponentCode(BaseModel):
    p: int = Field(..., ge=2)
    k: int = Field(..., ge=0)
    hc_rows: Tuple[Tuple[int, ...], ...]
    name: str

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def check_parity_matrix(cls, values):
        p, k, rows = values["p"], values["k"], values["hc_rows"]
        if not k < p:
            raise ValueError(f"need k < p, got [{p},{k}]")
        if len(rows) != p - k:
            raise ValueError(f"H_C needs p-k={p - k} rows, got {len(rows)}")
        for row in rows:
            if len(row) != p or any(bit not in (0, 1) for bit in row):
                raise ValueError(f"H_C row {list(row)} is not a {p}-bit row")
        if gf2_rank(rows) != p - k:
            raise ValueError("H_C does not have full GF(2) row rank")
        for t in range(p):
            if not any(row[t] for row in rows):
                raise ValueError(f"column {t} of H_C is all-zero")
        return values

    @property
    def row_weights(self) -> List[int]:
        return [sum(row) for row in self.hc_rows]


class GeneralizationPlan(BaseModel):
    m: int = Field(..., ge=1)
    zeta: Tuple[int, ...] = ()

    class Config:
        allow_mutation = False

    @validator("zeta")
    def check_zeta(cls, zeta, values):
        m = values.get("m")
        if list(zeta) != sorted(set(zeta)):
            raise ValueError("zeta must be sorted and free of duplicates")
        if m is not None and any(not 0 <= i < m for i in zeta):
            raise ValueError(f"zeta holds indices outside [0, {m})")
        return zeta

    @property
    def g(self) -> int:
        return len(self.zeta)

    @property
    def mu(self) -> Fraction:
        return Fraction(self.g, self.m)

    @property
    def zeta_prime(self) -> Tuple[int, ...]:
        replaced = set(self.zeta)
        return tuple(i for i in range(self.m) if i not in replaced)


class RateReport(BaseModel):
    n: int
    m: int
    g: int
    mu: float
    rows: int
    rank: int
    rate_exact: str
    rate: float
    design_rate: float
    rank_deficiency: int
    structural: bool = False
    base_seed: Optional[int] = None
    component: str


class CodeSpec(BaseModel):
    alist_path: Optional[str] = None
    gamma: int = Field(2, ge=1)
    p: int = Field(7, ge=2)
    n: int = Field(49, ge=1)
    base_seed: int = Field(1, ge=0)
    component: str = "hamming74"
    mu: float = Field(1.0, ge=0.0, le=1.0)
    zeta: Optional[Tuple[int, ...]] = None
    plan_seed: int = Field(3, ge=0)

    class Config:
        allow_mutation = False

    def cache_key(self) -> str:
        return self.json(sort_keys=True)
