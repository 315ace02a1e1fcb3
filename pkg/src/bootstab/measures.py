"""Discrete probability measures on a shared finite support.

All measures in one experiment live on a single global support; empirical
measures and contaminated mixtures only move weight between the indexed
support points.  That keeps every distribution comparison a finite LP on
one distance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataFormatError
from .rng import as_rng
from .validation import check_in_unit_interval, check_indices, check_weights


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability weights over an indexed support."""

    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", check_weights(self.w))
        self.w.setflags(write=False)

    @property
    def support_size(self) -> int:
        return self.w.shape[0]

    @classmethod
    def uniform(cls, n: int) -> "DiscreteMeasure":
        if n < 1:
            raise DataFormatError(f"support size must be >= 1, got {n}")
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, index: int, n: int) -> "DiscreteMeasure":
        w = np.zeros(n)
        try:
            w[index] = 1.0
        except IndexError:
            raise DataFormatError(
                f"point-mass index {index} out of range for support {n}",
                index=index, support_size=n,
            ) from None
        return cls(w)


def empirical(sample_indices, support_size: int) -> DiscreteMeasure:
    """Empirical measure of an index sample: w[i] = count(i) / n."""
    idx = check_indices(sample_indices, support_size)
    counts = np.bincount(idx, minlength=support_size).astype(float)
    return DiscreteMeasure(counts / idx.shape[0])


def contaminate(p: DiscreteMeasure, direction: DiscreteMeasure, eps: float) -> DiscreteMeasure:
    """Mixture contamination (1 - eps) * p + eps * direction."""
    eps = check_in_unit_interval(eps, "eps")
    if p.support_size != direction.support_size:
        raise DataFormatError(
            "contamination direction lives on a different support",
            p_size=p.support_size, direction_size=direction.support_size,
        )
    if eps == 0.0:
        return p
    if eps == 1.0:
        return direction
    return DiscreteMeasure((1.0 - eps) * p.w + eps * direction.w)


def sample(p: DiscreteMeasure, n: int, seed_or_rng) -> np.ndarray:
    """n i.i.d. index draws from p; deterministic given the seed."""
    if n < 1:
        raise DataFormatError(f"sample size must be >= 1, got {n}")
    rng = as_rng(seed_or_rng)
    return rng.choice(p.support_size, size=n, p=p.w)
