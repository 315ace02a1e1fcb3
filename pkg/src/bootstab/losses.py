"""Lipschitz convex losses and their shifted versions.

Each loss L(y, t) is convex and uniformly Lipschitz in the prediction t,
with known constant ``lip``.  The shifted loss L(y, t) - L(y, 0) is what
the kernel machine actually minimizes; it vanishes at t = 0 and inherits
the Lipschitz constant, which is what makes risks finite without any
moment condition on y.

For the dual solver each loss also exposes its convex conjugate in t,
which for every kind here is linear (s |-> s*y, plus eps*|s| for the
insensitive loss) on a closed interval.  The logistic conjugate is the
binary entropy on its interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataFormatError

LOSS_KINDS = ("hinge", "pinball", "absolute", "logistic", "eps_insensitive")
_BINARY_TARGET_KINDS = ("hinge", "logistic")


@dataclass(frozen=True)
class LossSpec:
    """A loss kind plus its parameters; ``lip`` is the analytic constant."""

    kind: str
    tau: float = 0.5          # pinball quantile level
    epsilon: float = 0.1      # eps_insensitive dead zone

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise DataFormatError(f"unknown loss kind {self.kind!r}", kind=self.kind)
        if self.kind == "pinball" and not (0.0 < self.tau < 1.0):
            raise DataFormatError(f"pinball tau must be in (0,1), got {self.tau}")
        if self.kind == "eps_insensitive" and not (self.epsilon >= 0.0):
            raise DataFormatError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def lip(self) -> float:
        if self.kind == "pinball":
            return max(self.tau, 1.0 - self.tau)
        return 1.0

    def check_targets(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind in _BINARY_TARGET_KINDS and not np.all(np.abs(y) == 1.0):
            raise DataFormatError(
                f"{self.kind} loss requires targets in {{-1, +1}}",
                kind=self.kind,
            )
        return y

    def value(self, y, t):
        """L(y, t), vectorized over matching shapes."""
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.kind == "hinge":
            return np.maximum(0.0, 1.0 - y * t)
        if self.kind == "absolute":
            return np.abs(y - t)
        if self.kind == "pinball":
            r = y - t
            return np.where(r >= 0, self.tau * r, (self.tau - 1.0) * r)
        if self.kind == "eps_insensitive":
            return np.maximum(0.0, np.abs(y - t) - self.epsilon)
        # logistic: log(1 + exp(-y t)); logaddexp keeps the linear tail exact
        return np.logaddexp(0.0, -y * t)

    def shifted(self, y, t):
        """L(y, t) - L(y, 0); zero at t = 0, may be negative."""
        return self.value(y, t) - self.value(y, np.zeros_like(np.asarray(t, dtype=float)))

    def subgradient(self, y, t):
        """A subgradient of t -> L(y, t); lower branch taken at kinks."""
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.kind == "hinge":
            return np.where(y * t <= 1.0, -y, 0.0)
        if self.kind == "absolute":
            return np.where(t <= y, -1.0, 1.0)
        if self.kind == "pinball":
            return np.where(t <= y, -self.tau, 1.0 - self.tau)
        if self.kind == "eps_insensitive":
            g = np.zeros(np.broadcast(y, t).shape)
            g = np.where(t - y > self.epsilon, 1.0, g)
            g = np.where(y - t >= self.epsilon, -1.0, g)
            return g
        return -y / (1.0 + np.exp(y * t))

    def conjugate_box(self, y) -> tuple[np.ndarray, np.ndarray]:
        """Domain [lo, hi] of the conjugate of t -> L(y, t), per target."""
        y = np.asarray(y, dtype=float)
        if self.kind == "pinball":
            lo = np.full_like(y, -self.tau)
            hi = np.full_like(y, 1.0 - self.tau)
        elif self.kind in ("absolute", "eps_insensitive"):
            lo = np.full_like(y, -1.0)
            hi = np.full_like(y, 1.0)
        else:  # hinge, logistic: s*y in [-1, 0]
            lo = np.where(y > 0, -1.0, 0.0)
            hi = np.where(y > 0, 0.0, 1.0)
        return lo, hi

    def conjugate_value(self, y, s):
        """L*(y, s) for s inside :meth:`conjugate_box`."""
        y = np.asarray(y, dtype=float)
        s = np.asarray(s, dtype=float)
        if self.kind == "eps_insensitive":
            return s * y + self.epsilon * np.abs(s)
        if self.kind == "logistic":
            v = np.clip(s * y, -1.0, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ent = np.where(v < 0, (-v) * np.log(np.maximum(-v, 1e-300)), 0.0)
                ent = ent + np.where(v > -1, (1 + v) * np.log(np.maximum(1 + v, 1e-300)), 0.0)
            return ent
        return s * y


def hinge() -> LossSpec:
    return LossSpec("hinge")


def pinball(tau: float) -> LossSpec:
    return LossSpec("pinball", tau=tau)


def absolute() -> LossSpec:
    return LossSpec("absolute")


def logistic() -> LossSpec:
    return LossSpec("logistic")


def eps_insensitive(epsilon: float) -> LossSpec:
    return LossSpec("eps_insensitive", epsilon=epsilon)


def loss_from_name(kind: str, tau: float = 0.5, epsilon: float = 0.1) -> LossSpec:
    return LossSpec(kind, tau=tau, epsilon=epsilon)
