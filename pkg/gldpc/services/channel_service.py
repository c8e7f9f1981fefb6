import logging
import math
import zlib
from typing import Union

import numpy as np

from gldpc.schemas.channel_schema import SnrPoint
from gldpc.utils.exceptions import InvalidParameterError
from gldpc.utils.random_utils import STREAM_CHANNEL, derive_rng

logger = logging.getLogger(__name__)

L_MAX = 30.0

SeedLike = Union[int, np.random.Generator]


def clamp_llr(values):
    """Clip LLRs (scalar or array) to [-L_MAX, L_MAX]."""
    return np.clip(values, -L_MAX, L_MAX)


def snr_point(ebn0_db: float, rate: float) -> SnrPoint:
    """
    Convert an Eb/N0 value into Es/N0 and the BPSK noise standard deviation.

    Es/N0 = Eb/N0 + 10*log10(rate) and sigma = sqrt(1 / (2 * 10^(Es/N0 / 10))) for unit
    symbol energy.

    Args:
        ebn0_db (float): Energy per information bit over N0, in dB.
        rate (float): Code rate in (0, 1].

    Returns:
        SnrPoint: The SNR point with all three representations.

    Raises:
        InvalidParameterError: If rate is not in (0, 1].

    Examples:
        >>> round(snr_point(1.0, 0.143).esn0_db, 2)
        -7.45
    """
    if not 0.0 < rate <= 1.0:
        raise InvalidParameterError(f"rate must lie in (0, 1], got {rate}")
    esn0_db = ebn0_db + 10.0 * math.log10(rate)
    sigma = math.sqrt(1.0 / (2.0 * 10.0 ** (esn0_db / 10.0)))
    return SnrPoint(ebn0_db=ebn0_db, esn0_db=esn0_db, sigma=sigma, rate=rate)


def _generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return derive_rng(seed, STREAM_CHANNEL)


def transmit(x, s: SnrPoint, seed: SeedLike) -> np.ndarray:
    """
    BPSK over AWGN: y_v = (-1)^{x_v} + z_v with z_v ~ N(0, sigma^2).

    Args:
        x: Codeword bits (0/1), length n.
        s (SnrPoint): Supplies sigma; sigma = 0 gives the noiseless channel.
        seed (int or np.random.Generator): Either a seed (drawn through the channel
            stream) or a ready generator. Noise is n Ziggurat normals in index order.

    Returns:
        np.ndarray: The received reals.

    Note:
        Sample v is applied as y_v = s_v * (1 + sigma * z_v) with s_v = (-1)^{x_v}. Since
        z_v is symmetric this is the same channel, and one seed yields received words that
        are exact sign images of each other across codewords.
    """
    bits = np.asarray(x, dtype=np.int64)
    symbols = 1.0 - 2.0 * bits
    noise = _generator(seed).standard_normal(bits.shape[0])
    return symbols * (1.0 + s.sigma * noise)


def channel_llr(y, s: SnrPoint) -> np.ndarray:
    """
    Channel LLRs L_v = 2 y_v / sigma^2, clamped to +-L_MAX.

    Raises:
        InvalidParameterError: If sigma is 0 (the LLR would be infinite).
    """
    if s.sigma <= 0.0:
        raise InvalidParameterError("channel LLR is infinite for sigma = 0; use a clamped LLR")
    return clamp_llr(2.0 * np.asarray(y, dtype=np.float64) / (s.sigma ** 2))


def all_zero_frame(n: int, s: SnrPoint, rng: np.random.Generator) -> np.ndarray:
    """LLRs of one transmitted all-zero codeword; sigma = 0 maps to +L_MAX everywhere."""
    y = transmit(np.zeros(n, dtype=np.int64), s, rng)
    if s.sigma == 0.0:
        return np.full(n, L_MAX)
    return channel_llr(y, s)


def noise_digest(llr: np.ndarray) -> int:
    """CRC32 of the little-endian float64 bytes of a frame."""
    return zlib.crc32(np.ascontiguousarray(llr, dtype="<f8").tobytes())


def frame_rng(seed: int, *indices: int, stream: int = STREAM_CHANNEL) -> np.random.Generator:
    """Noise generator of one frame, e.g. frame_rng(seed, snr_index, frame_index)."""
    return derive_rng(seed, stream, *indices)
