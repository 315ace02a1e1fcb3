"""Input validation helpers.

Small ``check_*`` functions in the spirit of scikit-learn's validation
utilities: they coerce to float ndarrays, enforce shape/finiteness
contracts, and raise :class:`DataFormatError` with structured details
instead of letting bad input propagate into the numerics.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DataFormatError

WEIGHT_SUM_TOL = 1e-12


def check_finite_array(a, name: str, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise DataFormatError(
            f"{name} must be {ndim}-dimensional, got shape {arr.shape}",
            name=name, shape=arr.shape,
        )
    if arr.size and not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise DataFormatError(
            f"{name} contains a non-finite entry at index {tuple(bad)}",
            name=name, index=tuple(int(i) for i in bad),
        )
    return arr


def check_weights(w, size: int | None = None, tol: float = WEIGHT_SUM_TOL) -> np.ndarray:
    """Probability weights: 1-D, nonnegative, summing to 1 within ``tol``."""
    arr = check_finite_array(w, "weights", ndim=1)
    if size is not None and arr.shape[0] != size:
        raise DataFormatError(
            f"weights have length {arr.shape[0]}, expected {size}",
            expected=size, got=int(arr.shape[0]),
        )
    if arr.size == 0:
        raise DataFormatError("weights must be nonempty")
    if np.any(arr < 0):
        i = int(np.argmin(arr))
        raise DataFormatError(
            f"weights[{i}] = {arr[i]} is negative", index=i, value=float(arr[i]),
        )
    total = float(arr.sum())
    if abs(total - 1.0) > tol:
        raise DataFormatError(
            f"weights sum to {total!r}, expected 1 within {tol}", total=total,
        )
    return arr


def check_square_matrix(d, name: str = "distance matrix") -> np.ndarray:
    arr = check_finite_array(d, name, ndim=2)
    if arr.shape[0] != arr.shape[1]:
        raise DataFormatError(
            f"{name} must be square, got shape {arr.shape}", shape=arr.shape,
        )
    return arr


def check_indices(idx, support_size: int) -> np.ndarray:
    arr = np.asarray(idx)
    if arr.ndim != 1 or arr.size == 0:
        raise DataFormatError("index list must be a nonempty 1-D sequence")
    if not np.issubdtype(arr.dtype, np.integer):
        cast = arr.astype(np.int64)
        if np.any(cast != arr):
            raise DataFormatError("index list contains non-integer entries")
        arr = cast
    if np.any(arr < 0) or np.any(arr >= support_size):
        bad = int(arr[(arr < 0) | (arr >= support_size)][0])
        raise DataFormatError(
            f"index {bad} out of range for support of size {support_size}",
            index=bad, support_size=support_size,
        )
    return arr.astype(np.intp)


def check_in_unit_interval(x: float, name: str) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0) or not np.isfinite(x):
        raise DataFormatError(f"{name} must lie in [0, 1], got {x}", value=x)
    return x


def check_positive(x: float, name: str) -> float:
    x = float(x)
    if not (x > 0.0) or not np.isfinite(x):
        raise DataFormatError(f"{name} must be positive, got {x}", value=x)
    return x
