"""
Q-table binary format, little-endian throughout:

    magic "GQT1"
    header  mode (u8: 1 mixed, 0 per-SNR), m (u32), p (u8), state-bit convention (u8),
            has SNR tag (u8), SNR tag (f64), alpha, beta, epsilon (f64), ell_max (u32),
            seed (u64)
    values  m * 2^p action-values as f64, row-major in (CN, state)
    crc32   (u32) over everything before it
"""

import logging
import math
import struct
import zlib
from pathlib import Path
from typing import Optional

import numpy as np

from gldpc.models.qtable import QTable
from gldpc.models.tanner_graph import GeneralizedTannerGraph
from gldpc.schemas.scheduler_schema import Hyperparams, PolicyMode
from gldpc.storage.files import PathLike, atomic_write_bytes, read_bytes
from gldpc.utils.exceptions import ChecksumError, StorageError, VersionMismatchError

logger = logging.getLogger(__name__)

MAGIC = b"GQT1"
# The j-th smallest VN of a CN carries weight 2^(p-1-j).
STATE_BITS_BIG_ENDIAN = 1

_HEADER = struct.Struct("<4sBIBBBddddIQ")
_CRC = struct.Struct("<I")


def dump_qtable(table: QTable) -> bytes:
    hyper = table.hyper
    has_tag = table.snr_tag is not None
    header = _HEADER.pack(
        MAGIC,
        1 if table.mode == PolicyMode.MIXED else 0,
        table.m,
        table.p,
        STATE_BITS_BIG_ENDIAN,
        int(has_tag),
        float(table.snr_tag) if has_tag else math.nan,
        hyper.alpha,
        hyper.beta,
        hyper.epsilon,
        hyper.ell_max,
        hyper.seed,
    )
    body = header + np.ascontiguousarray(table.q, dtype="<f8").tobytes()
    return body + _CRC.pack(zlib.crc32(body))


def load_qtable_bytes(data: bytes, graph: Optional[GeneralizedTannerGraph] = None) -> QTable:
    """
    Parse a Q-table file image.

    Raises:
        VersionMismatchError: Unknown magic or state-bit convention.
        ChecksumError: Truncated or corrupted payload.
        ShapeMismatchError: If `graph` is given and the table does not fit it.
    """
    if len(data) < len(MAGIC):
        raise ChecksumError(f"Q-table file is truncated to {len(data)} bytes")
    if data[:4] != MAGIC:
        raise VersionMismatchError(f"not a {MAGIC.decode()} Q-table (magic {data[:4]!r})")
    if len(data) < _HEADER.size + _CRC.size:
        raise ChecksumError("Q-table file is truncated")
    (_, mode, m, p, convention, has_tag, snr_tag, alpha, beta, epsilon, ell_max,
     seed) = _HEADER.unpack_from(data)
    expected = _HEADER.size + 8 * m * (1 << p) + _CRC.size
    if len(data) != expected:
        raise ChecksumError(f"Q-table file has {len(data)} bytes, expected {expected}")
    (crc,) = _CRC.unpack_from(data, len(data) - _CRC.size)
    if zlib.crc32(data[:-_CRC.size]) != crc:
        raise ChecksumError("Q-table checksum mismatch")
    if convention != STATE_BITS_BIG_ENDIAN:
        raise VersionMismatchError(f"unknown state-bit convention {convention}")

    values = np.frombuffer(data, dtype="<f8", count=m * (1 << p), offset=_HEADER.size)
    table = QTable(
        m, p,
        mode=PolicyMode.MIXED if mode == 1 else PolicyMode.PER_SNR,
        hyper=Hyperparams(alpha=alpha, beta=beta, epsilon=epsilon, ell_max=ell_max, seed=seed),
        snr_tag=snr_tag if has_tag else None,
        q=values.reshape(m, 1 << p).astype(np.float64),
    )
    if graph is not None:
        table.check_compatible(graph)
    return table


def save_qtable(table: QTable, path: PathLike) -> Path:
    if not np.isfinite(table.q).all():
        raise StorageError("refusing to save a Q-table with non-finite entries")
    path = atomic_write_bytes(path, dump_qtable(table))
    logger.info("saved %r to %s", table, path)
    return path


def load_qtable(path: PathLike, graph: Optional[GeneralizedTannerGraph] = None) -> QTable:
    return load_qtable_bytes(read_bytes(path), graph)
