"""Bounded continuous kernels with Gram-matrix computation.

Two kinds are provided: the Gaussian RBF (bounded by construction, with
sup-norm constant exactly 1) and a linear kernel restricted to a declared
bounding box, whose boundedness comes from the box.  The second exists to
exercise code paths where the Gram diagonal is not constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataFormatError

KERNEL_KINDS = ("gaussian_rbf", "linear_on_box")

DOMAIN_TOL = 1e-9


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    gamma: float = 1.0
    box_low: tuple | None = None
    box_high: tuple | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DataFormatError(f"unknown kernel kind {self.kind!r}", kind=self.kind)
        if self.kind == "gaussian_rbf" and not (self.gamma > 0):
            raise DataFormatError(f"gamma must be positive, got {self.gamma}")
        if self.kind == "linear_on_box":
            if self.box_low is None or self.box_high is None:
                raise DataFormatError("linear_on_box requires box_low and box_high")
            lo = np.asarray(self.box_low, dtype=float)
            hi = np.asarray(self.box_high, dtype=float)
            if lo.shape != hi.shape or lo.ndim != 1 or np.any(lo > hi):
                raise DataFormatError("invalid bounding box", low=self.box_low,
                                      high=self.box_high)
            object.__setattr__(self, "box_low", tuple(float(v) for v in lo))
            object.__setattr__(self, "box_high", tuple(float(v) for v in hi))

    @property
    def k_sup(self) -> float:
        """sup_x sqrt(k(x, x)) over the kernel's domain."""
        if self.kind == "gaussian_rbf":
            return 1.0
        lo = np.asarray(self.box_low)
        hi = np.asarray(self.box_high)
        return float(np.sqrt(np.sum(np.maximum(lo * lo, hi * hi))))

    def check_domain(self, X: np.ndarray) -> None:
        if self.kind != "linear_on_box":
            return
        lo = np.asarray(self.box_low)
        hi = np.asarray(self.box_high)
        if X.shape[1] != lo.shape[0]:
            raise DataFormatError(
                f"points have {X.shape[1]} features, box has {lo.shape[0]}",
            )
        if np.any(X < lo - DOMAIN_TOL) or np.any(X > hi + DOMAIN_TOL):
            i = int(np.argwhere((X < lo - DOMAIN_TOL) | (X > hi + DOMAIN_TOL))[0][0])
            raise DataFormatError(
                f"point {i} lies outside the kernel's declared box", index=i,
            )

    def cross(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        """k(x, x') for all pairs; rows index X1, columns X2."""
        X1 = np.asarray(X1, dtype=float)
        X2 = np.asarray(X2, dtype=float)
        if X1.ndim != 2 or X2.ndim != 2 or X1.shape[1] != X2.shape[1]:
            raise DataFormatError(
                "kernel inputs must be 2-D with matching feature dimension",
                shapes=(X1.shape, X2.shape),
            )
        self.check_domain(X1)
        self.check_domain(X2)
        if self.kind == "linear_on_box":
            return X1 @ X2.T
        sq = (
            np.sum(X1 * X1, axis=1)[:, None]
            + np.sum(X2 * X2, axis=1)[None, :]
            - 2.0 * (X1 @ X2.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-self.gamma * sq)

    def gram(self, X: np.ndarray) -> np.ndarray:
        """Symmetric PSD Gram matrix of the points."""
        G = self.cross(X, X)
        G = 0.5 * (G + G.T)
        if self.kind == "gaussian_rbf":
            np.fill_diagonal(G, 1.0)
        return G


def gaussian_rbf(gamma: float = 1.0) -> KernelSpec:
    return KernelSpec("gaussian_rbf", gamma=gamma)


def linear_on_box(box_low, box_high) -> KernelSpec:
    return KernelSpec("linear_on_box", box_low=tuple(box_low), box_high=tuple(box_high))


def kernel_from_name(kind: str, gamma: float = 1.0,
                     box_low=None, box_high=None) -> KernelSpec:
    if kind == "gaussian_rbf":
        return gaussian_rbf(gamma)
    return KernelSpec(kind, gamma=gamma,
                      box_low=tuple(box_low) if box_low is not None else None,
                      box_high=tuple(box_high) if box_high is not None else None)
