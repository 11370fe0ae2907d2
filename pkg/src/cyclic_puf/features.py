"""Challenge feature maps shared by the simulator and the modeling attack."""
import enum

import numpy as np

from .errors import UsageError


class FeatureMap(str, enum.Enum):
    PARITY = "parity"
    RAW_BITS = "raw"
    RAW_PLUS_PARITY = "raw+parity"

    def width(self, n_c: int) -> int:
        return {FeatureMap.PARITY: n_c + 1, FeatureMap.RAW_BITS: n_c, FeatureMap.RAW_PLUS_PARITY: 2 * n_c + 1}[self]


def parity_features(challenges: np.ndarray) -> np.ndarray:
    """Suffix-product transform of 0/1 challenges.

    Column ``i`` holds the product of ``1 - 2*c_j`` over ``j >= i``; a final
    constant column of ones is appended. Accepts a single challenge or a
    2-D batch.
    """
    ch = np.asarray(challenges)
    single = ch.ndim == 1
    ch = np.atleast_2d(ch)
    signs = 1.0 - 2.0 * ch.astype(np.float64)
    suffix = np.cumprod(signs[:, ::-1], axis=1)[:, ::-1]
    out = np.concatenate([suffix, np.ones((ch.shape[0], 1))], axis=1)
    return out[0] if single else out


def featurize(challenges: np.ndarray, fmap: FeatureMap) -> np.ndarray:
    fmap = FeatureMap(fmap)
    ch = np.asarray(challenges)
    if ch.ndim not in (1, 2):
        raise UsageError(f"challenges must be 1-D or 2-D, got shape {ch.shape}")
    if fmap is FeatureMap.PARITY:
        return parity_features(ch)
    raw = 2.0 * ch.astype(np.float64) - 1.0
    if fmap is FeatureMap.RAW_BITS:
        return raw
    return np.concatenate([raw, parity_features(ch)], axis=-1)
