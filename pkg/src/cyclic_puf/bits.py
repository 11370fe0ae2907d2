"""Bit-vector helpers.

Bit strings are written MSB-first: the leftmost character is index 0.
"""
from typing import Iterable, Union

import numpy as np

from .errors import UsageError

BitsLike = Union[str, Iterable[int], np.ndarray]


def to_bits(value: BitsLike, width: int = None) -> np.ndarray:
    """Coerce a bit string or integer sequence to a uint8 vector of 0/1."""
    if isinstance(value, str):
        if not value or set(value) - {"0", "1"}:
            raise UsageError(f"not a bit string: {value!r}")
        arr = np.frombuffer(value.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(value, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise UsageError("bit vectors may only hold 0 and 1")
        arr = arr.astype(np.uint8)
    if arr.ndim != 1:
        raise UsageError(f"expected a 1-D bit vector, got shape {arr.shape}")
    if width is not None and arr.size != width:
        raise UsageError(f"expected {width} bits, got {arr.size}")
    return arr.copy()


def to_str(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def rows_to_str(rows: np.ndarray) -> list:
    """Format every row of a 2-D bit array as a bit string."""
    rows = np.ascontiguousarray(np.asarray(rows, dtype=np.uint8) + ord("0"))
    width = rows.shape[1]
    blob = rows.tobytes().decode("ascii")
    return [blob[i:i + width] for i in range(0, len(blob), width)]


def rows_from_str(strings: list, width: int = None) -> np.ndarray:
    if not strings:
        return np.zeros((0, width or 0), dtype=np.uint8)
    width = width if width is not None else len(strings[0])
    blob = "".join(strings).encode("ascii")
    if len(blob) != width * len(strings):
        raise UsageError("bit strings of inconsistent width")
    arr = np.frombuffer(blob, dtype=np.uint8).reshape(len(strings), width) - ord("0")
    if arr.size and arr.max() > 1:
        raise UsageError("bit strings may only contain '0' and '1'")
    return arr.astype(np.uint8)


def int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def all_challenges(width: int) -> np.ndarray:
    """Every challenge of the given width, in counting order (row i encodes i)."""
    idx = np.arange(2 ** width, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def random_challenges(n: int, width: int, rng: np.random.Generator, distinct: bool = True) -> np.ndarray:
    """Draw ``n`` uniform challenges, distinct unless ``distinct=False``."""
    if not distinct:
        return rng.integers(0, 2, size=(n, width), dtype=np.uint8)
    if width < 63 and n > 2 ** width:
        raise UsageError(f"cannot draw {n} distinct challenges of width {width}")
    if width <= 20:
        picks = rng.choice(2 ** width, size=n, replace=False)
        shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
        return ((picks[:, None] >> shifts) & 1).astype(np.uint8)
    out = rng.integers(0, 2, size=(n, width), dtype=np.uint8)
    while True:
        _, first = np.unique(out, axis=0, return_index=True)
        if first.size == n:
            return out
        dup = np.setdiff1d(np.arange(n), first)
        out[dup] = rng.integers(0, 2, size=(dup.size, width), dtype=np.uint8)
