import logging
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from gldpc.models.tanner_graph import (
    GCN, SPCN, CnRecord, ExpandedParityMatrix, GeneralizedTannerGraph
)
from gldpc.schemas.code_schema import (
    BaseGraph, CodeSpec, ComponentCode, GeneralizationPlan, RateReport
)
from gldpc.utils.exceptions import (
    AlistFormatError, ConstructionError, InfeasibleParametersError, InvalidParameterError,
    ShapeMismatchError
)
from gldpc.utils.gf2_utils import gf2_rank as _gf2_rank
from gldpc.utils.random_utils import STREAM_BASE_GRAPH, STREAM_PLAN, derive_rng

logger = logging.getLogger(__name__)

MULTI_EDGE_PENALTY = 1000

HAMMING74_ROWS = (
    (1, 0, 1, 1, 1, 0, 0),
    (1, 1, 0, 1, 0, 1, 0),
    (0, 1, 1, 1, 0, 0, 1),
)


def load_alist(text: Iterable[str]) -> BaseGraph:
    """
    Parse a (gamma, p)-regular base graph from the 1-based alist layout.

    The layout is: "n m", "max_vn_degree max_cn_degree", the n VN degrees, the m CN
    degrees, n lines of VN->CN adjacency and m lines of CN->VN adjacency. Trailing
    zeros on a line are padding and ignored; a zero inside the declared degree is an
    error.

    Args:
        text (Iterable[str]): The alist content, either a string or any iterable of lines
            (an open file works).

    Returns:
        BaseGraph: The base graph with rows exactly as listed (sorted ascending).

    Raises:
        AlistFormatError: On a malformed header, degree mismatch, index out of range or
            an irregular graph.

    Examples:
        >>> load_alist("3 1\\n1 3\\n1 1 1\\n3\\n1\\n1\\n1\\n1 2 3\\n").p
        3
    """
    if isinstance(text, str):
        text = text.splitlines()
    lines = []
    for raw in text:
        tokens = raw.split()
        if tokens:
            try:
                lines.append([int(token) for token in tokens])
            except ValueError:
                raise AlistFormatError(f"non-integer token in alist line: {raw.strip()!r}")

    if len(lines) < 4 or len(lines[0]) != 2 or len(lines[1]) != 2:
        raise AlistFormatError("malformed alist header")
    n, m = lines[0]
    if n < 1 or m < 1:
        raise AlistFormatError(f"malformed alist header: n={n}, m={m}")
    vn_degrees, cn_degrees = lines[2], lines[3]
    if len(vn_degrees) != n or len(cn_degrees) != m:
        raise AlistFormatError(
            f"degree lists have {len(vn_degrees)}/{len(cn_degrees)} entries, expected {n}/{m}")
    if len(lines) < 4 + n + m:
        raise AlistFormatError(f"expected {n + m} adjacency lines, got {len(lines) - 4}")

    def _entries(line: List[int], degree: int, bound: int, what: str) -> List[int]:
        if any(value != 0 for value in line[degree:]):
            raise AlistFormatError(f"{what} lists more than its degree {degree}: {line}")
        entries = line[:degree]
        if len(entries) != degree:
            raise AlistFormatError(f"{what} has {len(entries)} entries, degree says {degree}")
        for value in entries:
            if not 1 <= value <= bound:
                raise AlistFormatError(
                    f"{what} lists index {value} outside [1, {bound}] (alist is 1-based)")
        return [value - 1 for value in entries]

    vn_rows = [_entries(lines[4 + v], vn_degrees[v], m, f"VN {v + 1}") for v in range(n)]
    cn_rows = [_entries(lines[4 + n + c], cn_degrees[c], n, f"CN {c + 1}") for c in range(m)]

    edges_from_vn = {(c, v) for v, row in enumerate(vn_rows) for c in row}
    edges_from_cn = {(c, v) for c, row in enumerate(cn_rows) for v in row}
    if edges_from_vn != edges_from_cn:
        raise AlistFormatError("VN and CN adjacency lists disagree")

    if len(set(vn_degrees)) != 1 or len(set(cn_degrees)) != 1:
        raise AlistFormatError(
            f"irregular graph: VN degrees {sorted(set(vn_degrees))}, "
            f"CN degrees {sorted(set(cn_degrees))}")

    try:
        return BaseGraph(n=n, m=m, gamma=vn_degrees[0], p=cn_degrees[0],
                         rows=tuple(tuple(sorted(row)) for row in cn_rows))
    except ValidationError as err:
        raise AlistFormatError(f"invalid base graph: {err}")


def dump_alist(base: BaseGraph) -> str:
    """Serialize a base graph to the alist layout (1-based, no padding)."""
    vn_rows = [[] for _ in range(base.n)]
    for c, row in enumerate(base.rows):
        for v in row:
            vn_rows[v].append(c)
    lines = [
        f"{base.n} {base.m}",
        f"{base.gamma} {base.p}",
        " ".join([str(base.gamma)] * base.n),
        " ".join([str(base.p)] * base.m),
    ]
    lines += [" ".join(str(c + 1) for c in sorted(row)) for row in vn_rows]
    lines += [" ".join(str(v + 1) for v in row) for row in base.rows]
    return "\n".join(lines) + "\n"


def count_four_cycles(base: BaseGraph) -> int:
    """Number of length-4 cycles: sum over CN pairs of C(shared VNs, 2)."""
    incidence = np.zeros((base.m, base.n), dtype=np.float64)
    for c, row in enumerate(base.rows):
        incidence[c, list(row)] = 1.0
    overlap = np.rint(incidence @ incidence.T).astype(np.int64)
    upper = overlap[np.triu_indices(base.m, k=1)]
    return int((upper * (upper - 1) // 2).sum())


def _rows_cost(incidence: np.ndarray, overlap: np.ndarray, rows: Sequence[int]) -> int:
    cost = 0
    seen = set()
    for c in rows:
        cost += MULTI_EDGE_PENALTY * int(np.maximum(incidence[c] - 1, 0).sum())
        shared = overlap[c].copy()
        shared[c] = 0
        for other in seen:
            shared[other] = 0
        cost += int((shared * (shared - 1) // 2).sum())
        seen.add(c)
    return cost


def _total_cost(incidence: np.ndarray, overlap: np.ndarray) -> int:
    multi = int(np.maximum(incidence - 1, 0).sum())
    upper = overlap[np.triu_indices(overlap.shape[0], k=1)]
    return MULTI_EDGE_PENALTY * multi + int((upper * (upper - 1) // 2).sum())


def _refresh_overlap(incidence: np.ndarray, overlap: np.ndarray, rows: Sequence[int]) -> None:
    rows = list(rows)
    fresh = np.rint(incidence[rows].astype(np.float64) @ incidence.T.astype(np.float64))
    fresh = fresh.astype(np.int64)
    overlap[rows, :] = fresh
    overlap[:, rows] = fresh.T


def _conflict_edges(edges_cn: np.ndarray, edges_vn: np.ndarray, incidence: np.ndarray,
                    overlap: np.ndarray, c: int) -> np.ndarray:
    own = np.flatnonzero(edges_cn == c)
    partners = np.flatnonzero(overlap[c] >= 2)
    partners = partners[partners != c]
    shared = np.zeros(incidence.shape[1], dtype=bool)
    if partners.size:
        shared = (incidence[partners] > 0).any(axis=0)
    vns = edges_vn[own]
    bad = (incidence[c, vns] > 1) | shared[vns]
    return own[bad]


def generate_regular_base(gamma: int, p: int, n: int, seed: int,
                          max_attempts: int = 20, max_swaps: Optional[int] = None) -> BaseGraph:
    """
    Seeded random (gamma, p)-regular base graph with 4-cycle avoidance.

    Sockets are paired by a random permutation (configuration model), then conflicting
    edges (repeated VN-CN pairs first, then 4-cycles) are repaired by edge swaps
    (v1,c1),(v2,c2) -> (v1,c2),(v2,c1) that never increase the local conflict cost.
    Each attempt draws from its own derived stream, so the result is a pure function of
    the arguments.

    Args:
        gamma (int): VN degree (column weight).
        p (int): CN degree (row weight).
        n (int): Number of VNs.
        seed (int): Construction seed.
        max_attempts (int, optional): Fresh pairings tried before giving up. Defaults to 20.
        max_swaps (int, optional): Swap budget per attempt. Defaults to 40 * n * gamma.

    Returns:
        BaseGraph: A simple regular graph; free of 4-cycles whenever the budget allowed it.

    Raises:
        InfeasibleParametersError: If n*gamma is not divisible by p or the degrees cannot fit.
        ConstructionError: If no attempt produced a graph without repeated edges.
    """
    if gamma < 1 or p < 2 or n < 1:
        raise InfeasibleParametersError(f"invalid degrees gamma={gamma}, p={p}, n={n}")
    if (n * gamma) % p != 0:
        raise InfeasibleParametersError(f"n*gamma = {n * gamma} is not divisible by p = {p}")
    m = n * gamma // p
    if p > n or gamma > m:
        raise InfeasibleParametersError(
            f"cannot build a simple ({gamma},{p})-regular graph with n={n}, m={m}")

    n_edges = n * gamma
    max_swaps = max_swaps if max_swaps is not None else 40 * n_edges
    edges_vn = np.repeat(np.arange(n), gamma)
    best = None

    for attempt in range(max_attempts):
        rng = derive_rng(seed, STREAM_BASE_GRAPH, attempt)
        edges_cn = rng.permutation(np.repeat(np.arange(m), p))
        incidence = np.zeros((m, n), dtype=np.int64)
        np.add.at(incidence, (edges_cn, edges_vn), 1)
        overlap = np.rint(incidence.astype(np.float64) @ incidence.T.astype(np.float64))
        overlap = overlap.astype(np.int64)
        cost = _total_cost(incidence, overlap)

        for _ in range(max_swaps):
            if cost == 0:
                break
            multi_rows = np.flatnonzero((incidence > 1).any(axis=1))
            if multi_rows.size:
                bad_rows = multi_rows
            else:
                off_diag = overlap - np.diag(np.diag(overlap))
                bad_rows = np.flatnonzero((off_diag >= 2).any(axis=1))
            if bad_rows.size == 0:
                cost = _total_cost(incidence, overlap)
                continue
            c1 = int(rng.choice(bad_rows))
            candidates = _conflict_edges(edges_cn, edges_vn, incidence, overlap, c1)
            if candidates.size == 0:
                continue
            e1 = int(rng.choice(candidates))
            e2 = int(rng.integers(n_edges))
            c2 = int(edges_cn[e2])
            if c2 == c1:
                continue
            v1, v2 = edges_vn[e1], edges_vn[e2]
            before = _rows_cost(incidence, overlap, (c1, c2))
            incidence[c1, v1] -= 1
            incidence[c2, v2] -= 1
            incidence[c2, v1] += 1
            incidence[c1, v2] += 1
            _refresh_overlap(incidence, overlap, (c1, c2))
            after = _rows_cost(incidence, overlap, (c1, c2))
            if after <= before:
                edges_cn[e1], edges_cn[e2] = c2, c1
                cost += after - before
            else:
                incidence[c1, v1] += 1
                incidence[c2, v2] += 1
                incidence[c2, v1] -= 1
                incidence[c1, v2] -= 1
                _refresh_overlap(incidence, overlap, (c1, c2))

        simple = not (incidence > 1).any()
        logger.debug("base graph attempt %d: residual cost %d (simple=%s)", attempt, cost, simple)
        if simple and (best is None or cost < best[0]):
            best = (cost, incidence.copy())
        if cost == 0:
            break

    if best is None:
        raise ConstructionError(
            f"retry budget exhausted: no simple ({gamma},{p})-regular graph for n={n}, seed={seed}")
    if best[0] > 0:
        logger.warning("base graph for n=%d seed=%d keeps %d four-cycles", n, seed, best[0])

    rows = tuple(tuple(int(v) for v in np.flatnonzero(row)) for row in best[1])
    return BaseGraph(n=n, m=m, gamma=gamma, p=p, rows=rows)


def select_gcn_set(m: int, mu: float = 0.0, seed: int = 0,
                   zeta: Optional[Sequence[int]] = None) -> GeneralizationPlan:
    """
    Choose the SPCN indices to replace by GCNs.

    g = round(mu * m) with ties to even, drawn uniformly without replacement from a
    stream derived from `seed`. An explicit `zeta` bypasses the draw.

    Args:
        m (int): Number of SPCNs in the base graph.
        mu (float): Fraction of SPCNs to replace, in [0, 1].
        seed (int): Selection seed.
        zeta (Sequence[int], optional): Explicit index list.

    Returns:
        GeneralizationPlan: The sorted replacement set.

    Raises:
        InvalidParameterError: If mu lies outside [0, 1] or zeta is invalid for m.
    """
    if zeta is not None:
        try:
            return GeneralizationPlan(m=m, zeta=tuple(sorted(int(i) for i in zeta)))
        except ValidationError as err:
            raise InvalidParameterError(f"invalid explicit GCN set: {err}")
    if not 0.0 <= mu <= 1.0:
        raise InvalidParameterError(f"mu must lie in [0, 1], got {mu}")
    g = round(mu * m)
    rng = derive_rng(seed, STREAM_PLAN)
    chosen = rng.choice(m, size=g, replace=False) if g else []
    return GeneralizationPlan(m=m, zeta=tuple(sorted(int(i) for i in chosen)))


def generalize(base: BaseGraph, component: ComponentCode,
               plan: GeneralizationPlan) -> GeneralizedTannerGraph:
    """
    Build the generalized Tanner graph G.

    CNs in zeta become GCNs whose rows are the rows of H_C, column t mapped onto the t-th
    smallest VN of the CN's neighborhood; all other CNs keep a single all-ones row.

    Args:
        base (BaseGraph): The base graph G_B.
        component (ComponentCode): The [p, k] component code.
        plan (GeneralizationPlan): Which CNs to generalize.

    Returns:
        GeneralizedTannerGraph: The decoding structure.

    Raises:
        ShapeMismatchError: If component.p != base.p or the plan was made for another m.
    """
    if component.p != base.p:
        raise ShapeMismatchError(
            f"component length p={component.p} does not match base row weight p={base.p}")
    if plan.m != base.m:
        raise ShapeMismatchError(f"plan covers m={plan.m} CNs, base graph has m={base.m}")

    replaced = set(plan.zeta)
    cns = []
    for i, row in enumerate(base.rows):
        neighbors = tuple(sorted(row))
        if i in replaced:
            spcn_rows = tuple(
                tuple((vn, bool(hc_row[t])) for t, vn in enumerate(neighbors))
                for hc_row in component.hc_rows
            )
            cns.append(CnRecord(i, GCN, neighbors, spcn_rows))
        else:
            cns.append(CnRecord(i, SPCN, neighbors, (tuple((vn, True) for vn in neighbors),)))
    return GeneralizedTannerGraph(base, component, plan, cns)


def expand_parity_matrix(graph: GeneralizedTannerGraph) -> ExpandedParityMatrix:
    """
    Expanded parity-check matrix H, one row per SPCN row of every CN (in CN order).

    Args:
        graph (GeneralizedTannerGraph): The generalized graph.

    Returns:
        ExpandedParityMatrix: m + g*(p-k-1) rows of length n.
    """
    rows = []
    for cn in graph.cns:
        for j in range(cn.z):
            bits = np.zeros(graph.n, dtype=np.uint8)
            bits[cn.row_support(j)] = 1
            rows.append(bits)
    return ExpandedParityMatrix(np.array(rows, dtype=np.uint8))


def gf2_rank(rows) -> int:
    """GF(2) row rank of a bit matrix; the input is left untouched."""
    return _gf2_rank(rows)


def code_rate(h: ExpandedParityMatrix, n: int) -> Fraction:
    """
    Exact code rate (n - rank(H)) / n.

    Args:
        h (ExpandedParityMatrix): The expanded parity-check matrix.
        n (int): Code length; must equal the row length of h.

    Returns:
        Fraction: The exact rate. Use `round(float(rate), 3)` for the decimal report.
    """
    if h.n != n:
        raise ShapeMismatchError(f"H rows have length {h.n}, expected n={n}")
    return Fraction(n - h.rank, n)


def hamming_component(r: int) -> ComponentCode:
    """[2^r - 1, 2^r - 1 - r] Hamming code with H = [A | I_r], columns in increasing value."""
    if r < 2:
        raise InvalidParameterError(f"Hamming family needs r >= 2, got {r}")
    p = 2 ** r - 1
    units = [1 << (r - 1 - j) for j in range(r)]
    columns = [value for value in range(1, p + 1) if value not in units] + units
    rows = tuple(
        tuple((column >> (r - 1 - j)) & 1 for column in columns) for j in range(r)
    )
    return ComponentCode(p=p, k=p - r, hc_rows=rows, name=f"hamming-{r}")


def single_parity_component(p: int) -> ComponentCode:
    return ComponentCode(p=p, k=p - 1, hc_rows=((1,) * p,), name=f"spc-{p}")


def builtin_component(name: str) -> Optional[ComponentCode]:
    """
    Resolve a built-in component code by name: "hamming74", "hamming-<r>" or "spc-<p>".

    Returns:
        ComponentCode or None: None when the name is not a built-in.
    """
    if name == "hamming74":
        return ComponentCode(p=7, k=4, hc_rows=HAMMING74_ROWS, name="hamming74")
    prefix, _, suffix = name.partition("-")
    if suffix.isdigit():
        if prefix == "hamming":
            return hamming_component(int(suffix))
        if prefix == "spc":
            return single_parity_component(int(suffix))
    return None


def rate_report(graph: GeneralizedTannerGraph, h: ExpandedParityMatrix,
                base_seed: Optional[int] = None) -> RateReport:
    """
    Summarize n, m, g, mu, rank and rates of a constructed code.

    A rank deficiency is `structural` when g = 0 and gamma is even: every column of H_B
    then has even weight, the rows sum to zero and rank(H) <= m - 1 for every seed.
    """
    rate = code_rate(h, graph.n)
    rows = h.row_count
    return RateReport(
        n=graph.n,
        m=graph.m,
        g=graph.g,
        mu=float(graph.plan.mu),
        rows=rows,
        rank=h.rank,
        rate_exact=f"{rate.numerator}/{rate.denominator}",
        rate=round(float(rate), 3),
        design_rate=round((graph.n - rows) / graph.n, 3),
        rank_deficiency=rows - h.rank,
        structural=graph.g == 0 and graph.base.gamma % 2 == 0,
        base_seed=base_seed,
        component=graph.component.name,
    )


def construct_code(spec: CodeSpec, component: ComponentCode, base: Optional[BaseGraph] = None,
                   max_reseeds: int = 10
                   ) -> Tuple[GeneralizedTannerGraph, ExpandedParityMatrix, RateReport]:
    """
    Build base graph, plan, generalized graph and rate report for a code spec.

    When the base graph is generated (not supplied) and H is rank deficient beyond the
    structural bound, the base seed is advanced up to `max_reseeds` times; the report of
    the final attempt flags whatever deficiency remains.

    Args:
        spec (CodeSpec): Base-graph parameters, mu / explicit zeta and seeds.
        component (ComponentCode): Resolved component code.
        base (BaseGraph, optional): A base graph loaded from an alist file.
        max_reseeds (int, optional): Reseed budget for rank-deficient constructions.

    Returns:
        tuple: (GeneralizedTannerGraph, ExpandedParityMatrix, RateReport).
    """
    generated = base is None
    base_seed = spec.base_seed
    for attempt in range(max_reseeds + 1):
        if generated:
            base = generate_regular_base(spec.gamma, spec.p, spec.n, base_seed)
        plan = select_gcn_set(base.m, spec.mu, spec.plan_seed, zeta=spec.zeta)
        graph = generalize(base, component, plan)
        h = expand_parity_matrix(graph)
        report = rate_report(graph, h, base_seed if generated else None)
        allowed = 1 if report.structural else 0
        if report.rank_deficiency <= allowed or not generated:
            break
        if attempt < max_reseeds:
            logger.warning("rank deficiency %d with base seed %d, reseeding",
                           report.rank_deficiency, base_seed)
            base_seed += 1

    if report.rank_deficiency:
        logger.warning("H has rank %d < %d rows (%s); rate %s vs design rate %.3f",
                       report.rank, report.rows,
                       "structural" if report.structural else "after reseeding",
                       report.rate_exact, report.design_rate)
    logger.info("constructed code n=%d m=%d g=%d rate=%.3f", report.n, report.m, report.g,
                report.rate)
    return graph, h, report
