"""GF(2) linear algebra on bit-packed rows (Python ints as bitsets)."""

from typing import Iterable, List, Sequence

import numpy as np


def pack_rows(rows: Iterable[Sequence[int]]) -> List[int]:
    """
    Pack 0/1 rows into integer bitsets; bit t of the result is column t.

    Args:
        rows (Iterable[Sequence[int]]): Rows of a binary matrix (lists, tuples or numpy rows).

    Returns:
        list[int]: One bitset per row.
    """
    packed = []
    for row in rows:
        bits = np.asarray(row, dtype=np.uint8) & 1
        value = 0
        for col in np.flatnonzero(bits):
            value |= 1 << int(col)
        packed.append(value)
    return packed


def gf2_rank(rows) -> int:
    """
    Row rank over GF(2) by elimination into a pivot basis. The input is not modified.

    Args:
        rows: A 2-D 0/1 array-like, or a list of already packed integer rows.

    Returns:
        int: The GF(2) rank.

    Examples:
        >>> gf2_rank([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
        3
    """
    if len(rows) and isinstance(rows[0], (int, np.integer)) and not isinstance(rows[0], bool):
        packed = [int(r) for r in rows]
    else:
        packed = pack_rows(rows)

    basis = {}  # leading bit -> reduced row
    for row in packed:
        while row:
            lead = row.bit_length() - 1
            pivot = basis.get(lead)
            if pivot is None:
                basis[lead] = row
                break
            row ^= pivot
    return len(basis)


def gf2_row_reduce(matrix: np.ndarray):
    """Reduced row echelon form over GF(2). Returns (reduced, pivot_columns)."""
    mat = np.array(matrix, dtype=np.uint8) % 2
    n_rows, n_cols = mat.shape
    pivots = []
    row = 0
    for col in range(n_cols):
        if row == n_rows:
            break
        candidates = np.flatnonzero(mat[row:, col])
        if candidates.size == 0:
            continue
        pivot = row + candidates[0]
        if pivot != row:
            mat[[row, pivot]] = mat[[pivot, row]]
        others = np.flatnonzero(mat[:, col])
        others = others[others != row]
        mat[others] ^= mat[row]
        pivots.append(col)
        row += 1
    return mat, pivots


def gf2_nullspace(matrix: np.ndarray) -> np.ndarray:
    """
    Basis of the right nullspace {x : H x = 0} over GF(2).

    Args:
        matrix (np.ndarray): Binary matrix H with n columns.

    Returns:
        np.ndarray: uint8 array of shape (n - rank, n), one basis vector per row.
    """
    reduced, pivots = gf2_row_reduce(matrix)
    n_cols = reduced.shape[1]
    free_cols = [c for c in range(n_cols) if c not in set(pivots)]
    basis = np.zeros((len(free_cols), n_cols), dtype=np.uint8)
    for i, free in enumerate(free_cols):
        basis[i, free] = 1
        for r, pivot_col in enumerate(pivots):
            basis[i, pivot_col] = reduced[r, free]
    return basis


def gf2_span(basis: np.ndarray) -> np.ndarray:
    """All 2^k combinations of the basis rows (small k only)."""
    basis = np.asarray(basis, dtype=np.uint8)
    k = basis.shape[0]
    coeffs = (np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1
    return (coeffs.astype(np.int64) @ basis.astype(np.int64) % 2).astype(np.uint8)
