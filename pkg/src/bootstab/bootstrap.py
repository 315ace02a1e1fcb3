"""Resampling laws of kernel-machine estimators.

The law of an estimator under size-n resampling of a dataset is a
discrete probability measure over estimator outputs: fitted functions
(compared by RKHS distance) or scalar risk values (compared by absolute
difference).  Tiny datasets admit exact enumeration over resample
multisets with multinomial weights in rational arithmetic; otherwise the
law is approximated by B Monte-Carlo resamples with per-replicate derived
seeds.

A resample is represented by its count vector over the experiment's
global support, so identical resamples are recognized before any solver
runs and every fitted function shares one Gram matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bl import BLResult, bl_distance, bl_distance_line, BLProblem
from .exceptions import DataFormatError
from .kernels import KernelSpec
from .losses import LossSpec
from .measures import DiscreteMeasure
from .rng import derive_rng
from .space import DistanceMatrix, Points
from .svm import SvmProblem, SvmSolution, risk, rkhs_distance, solve

PREDICTOR = "predictor"   # law of the fitted function, metrized by RKHS distance
RISK = "risk"             # law of the training risk value, metrized by |.|
ESTIMATOR_KINDS = (PREDICTOR, RISK)

EXACT_MAX_N = 5
ATOM_MERGE_TOL = 1e-10
# pairwise-dedup matrices above this atom count are skipped (quadratic cost);
# identical resamples are already merged exactly by their count vectors
DEDUP_MAX_ATOMS = 2000


@dataclass(frozen=True)
class SolverConfig:
    """Loss/kernel/penalty bundle used for every replicate fit."""

    loss: LossSpec
    kernel: KernelSpec
    lam: float
    tol: float = 1e-8


@dataclass(frozen=True)
class BootstrapLaw:
    """Weighted atoms representing the distribution of an estimator."""

    kind: str
    atoms: tuple
    weights: DiscreteMeasure
    meta: dict = field(compare=False)

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise DataFormatError(f"unknown estimator kind {self.kind!r}")
        if len(self.atoms) != self.weights.support_size:
            raise DataFormatError("atom count and weight count differ",
                                  atoms=len(self.atoms),
                                  weights=self.weights.support_size)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def risk_values(self) -> np.ndarray:
        if self.kind != RISK:
            raise DataFormatError("law does not hold scalar risk atoms")
        return np.asarray(self.atoms, dtype=float)


def _fit_counts(counts: np.ndarray, base_points: Points, cfg: SolverConfig,
                gram: np.ndarray, cache: dict | None) -> SvmSolution:
    key = counts.tobytes()
    if cache is not None and key in cache:
        return cache[key]
    n = int(counts.sum())
    weights = DiscreteMeasure(counts / n)
    sol = solve(SvmProblem(base_points, weights, cfg.loss, cfg.kernel, cfg.lam,
                           gram=gram), tol=cfg.tol)
    if cache is not None:
        cache[key] = sol
    return sol


def _atoms_from_counts(count_vectors, weights, kind, base_points, cfg,
                       gram, cache):
    atoms = []
    for counts in count_vectors:
        sol = _fit_counts(counts, base_points, cfg, gram, cache)
        if kind == PREDICTOR:
            atoms.append(sol)
        else:
            n = int(counts.sum())
            atoms.append(risk(sol, DiscreteMeasure(counts / n)))
    return atoms, list(weights)


def _merge_close_atoms(atoms, weights, kind, tol=ATOM_MERGE_TOL):
    """Union atoms closer than ``tol`` in their native metric (lossy by <= 2 tol M)."""
    k = len(atoms)
    if k <= 1 or k > DEDUP_MAX_ATOMS:
        return atoms, weights
    dmat = _atom_distance_matrix(atoms, kind)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    close_i, close_j = np.nonzero(dmat < tol)
    for i, j in zip(close_i, close_j):
        if i < j:
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    roots = sorted({find(i) for i in range(k)})
    if len(roots) == k:
        return atoms, weights
    merged_atoms, merged_w = [], []
    for r in roots:
        members = [i for i in range(k) if find(i) == r]
        merged_atoms.append(atoms[members[0]])
        merged_w.append(sum(weights[i] for i in members))
    return merged_atoms, merged_w


def _atom_distance_matrix(atoms, kind) -> np.ndarray:
    if kind == RISK:
        v = np.asarray(atoms, dtype=float)
        return np.abs(v[:, None] - v[None, :])
    first = atoms[0]
    shared = all(a.points is first.points and a.kernel == first.kernel for a in atoms)
    if shared:
        A = np.stack([a.alpha for a in atoms])
        inner = A @ first.gram @ A.T
        diag = np.diagonal(inner)
        sq = diag[:, None] + diag[None, :] - 2.0 * inner
        np.maximum(sq, 0.0, out=sq)
        d = np.sqrt(sq)
    else:
        k = len(atoms)
        d = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                d[i, j] = d[j, i] = rkhs_distance(atoms[i], atoms[j])
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def bootstrap_law_mc(data_indices, base_points: Points, B: int, estimator: str,
                     cfg: SolverConfig, seed: int, n: int | None = None,
                     gram: np.ndarray | None = None,
                     solution_cache: dict | None = None) -> BootstrapLaw:
    """Monte-Carlo law from B size-n resamples of the observed dataset.

    Resamples draw with replacement from the empirical measure of
    ``data_indices``; replicate r uses the generator derived from
    ``(seed, "resample", r)`` so the law is independent of evaluation
    order.  ``seed`` may be an int or a derivation path tuple of ints and
    labels.  Identical resamples are merged before fitting, so weights
    are integer multiples of 1/B.
    """
    if estimator not in ESTIMATOR_KINDS:
        raise DataFormatError(f"unknown estimator kind {estimator!r}")
    data = np.asarray(data_indices, dtype=np.intp)
    if data.ndim != 1 or data.size == 0:
        raise DataFormatError("data_indices must be a nonempty 1-D sequence")
    if n is not None and n != data.size:
        raise DataFormatError(
            f"resample size n={n} must equal the dataset size {data.size}",
            n=n, dataset=int(data.size),
        )
    n = data.size
    if B < 1:
        raise DataFormatError(f"B must be >= 1, got {B}")
    support = len(base_points)
    if data.min() < 0 or data.max() >= support:
        raise DataFormatError("data index out of range", support=support)
    if gram is None:
        gram = cfg.kernel.gram(base_points.x)

    path = seed if isinstance(seed, tuple) else (seed,)
    tally: dict[bytes, int] = {}
    vectors: dict[bytes, np.ndarray] = {}
    for rep in range(B):
        rng = derive_rng(*path, "resample", rep)
        slots = rng.integers(0, n, size=n)
        counts = np.bincount(data[slots], minlength=support).astype(float)
        key = counts.tobytes()
        tally[key] = tally.get(key, 0) + 1
        vectors.setdefault(key, counts)
    keys = sorted(vectors, key=lambda k: tuple(vectors[k]))
    count_vectors = [vectors[k] for k in keys]
    weights = [tally[k] / B for k in keys]

    atoms, weights = _atoms_from_counts(count_vectors, weights, estimator,
                                        base_points, cfg, gram, solution_cache)
    atoms, weights = _merge_close_atoms(atoms, weights, estimator)
    return BootstrapLaw(
        kind=estimator, atoms=tuple(atoms),
        weights=DiscreteMeasure(np.asarray(weights)),
        meta={"n": n, "B": B, "seed": seed, "mode": "mc"},
    )


def bootstrap_law_exact(data_indices, base_points: Points, estimator: str,
                        cfg: SolverConfig, gram: np.ndarray | None = None,
                        solution_cache: dict | None = None) -> BootstrapLaw:
    """Exact resampling law for datasets of at most five points.

    Enumerates all multisets of dataset slots; each multiset's probability
    is the multinomial weight n!/(prod c_i!) * (1/n)^n, accumulated in
    exact rational arithmetic and summed over slot multisets that produce
    the same resample (relevant when the dataset has repeated values).
    """
    if estimator not in ESTIMATOR_KINDS:
        raise DataFormatError(f"unknown estimator kind {estimator!r}")
    data = np.asarray(data_indices, dtype=np.intp)
    n = data.size
    if n == 0:
        raise DataFormatError("data_indices must be nonempty")
    if n > EXACT_MAX_N:
        raise DataFormatError(
            f"exact enumeration supports n <= {EXACT_MAX_N}, got {n}", n=n,
        )
    support = len(base_points)
    if data.min() < 0 or data.max() >= support:
        raise DataFormatError("data index out of range", support=support)
    if gram is None:
        gram = cfg.kernel.gram(base_points.x)

    total = Fraction(n) ** n
    acc: dict[bytes, Fraction] = {}
    vectors: dict[bytes, np.ndarray] = {}
    for combo in itertools.combinations_with_replacement(range(n), n):
        slot_counts = np.bincount(combo, minlength=n)
        multi = math.factorial(n)
        for cnt in slot_counts:
            multi //= math.factorial(int(cnt))
        counts = np.bincount(data[list(combo)], minlength=support).astype(float)
        key = counts.tobytes()
        acc[key] = acc.get(key, Fraction(0)) + Fraction(multi) / total
        vectors.setdefault(key, counts)
    assert sum(acc.values()) == 1
    keys = sorted(vectors, key=lambda k: tuple(vectors[k]))
    count_vectors = [vectors[k] for k in keys]
    weights = [float(acc[k]) for k in keys]

    atoms, weights = _atoms_from_counts(count_vectors, weights, estimator,
                                        base_points, cfg, gram, solution_cache)
    atoms, weights = _merge_close_atoms(atoms, weights, estimator)
    return BootstrapLaw(
        kind=estimator, atoms=tuple(atoms),
        weights=DiscreteMeasure(np.asarray(weights)),
        meta={"n": n, "B": "exact", "mode": "exact"},
    )


def law_distance(a: BootstrapLaw, b: BootstrapLaw, radius: float = 1.0,
                 backend: str = "auto") -> BLResult:
    """Bounded-Lipschitz distance between two estimator laws.

    The joint atom set forms a finite metric space (RKHS distance for
    fitted functions, absolute difference for risks); the two laws become
    weight vectors on it and the distance is the usual LP.  Scalar laws
    route through the sorted-line LP, which is exact and linear-sized.
    """
    if a.kind != b.kind:
        raise DataFormatError("laws hold different estimator kinds",
                              a=a.kind, b=b.kind)
    na, nb = a.n_atoms, b.n_atoms
    p_w = np.concatenate([a.weights.w, np.zeros(nb)])
    q_w = np.concatenate([np.zeros(na), b.weights.w])

    if a.kind == RISK:
        values = np.concatenate([a.risk_values(), b.risk_values()])
        return bl_distance_line(values, DiscreteMeasure(p_w), DiscreteMeasure(q_w),
                                radius=radius, backend=backend)

    first = a.atoms[0]
    if any(atom.kernel != first.kernel for atom in a.atoms + b.atoms):
        raise DataFormatError("laws were fitted with different kernels")
    atoms = list(a.atoms) + list(b.atoms)
    dmat = _atom_distance_matrix(atoms, PREDICTOR)

    # merge exact-duplicate atoms across the two laws to shrink the LP
    if len(atoms) <= DEDUP_MAX_ATOMS:
        close = dmat < ATOM_MERGE_TOL
        keep, owner = [], {}
        for i in range(len(atoms)):
            hit = next((j for j in keep if close[i, j]), None)
            owner[i] = i if hit is None else hit
            if hit is None:
                keep.append(i)
        if len(keep) < len(atoms):
            p_m = np.zeros(len(keep))
            q_m = np.zeros(len(keep))
            pos = {j: r for r, j in enumerate(keep)}
            for i in range(len(atoms)):
                p_m[pos[owner[i]]] += p_w[i]
                q_m[pos[owner[i]]] += q_w[i]
            dmat = dmat[np.ix_(keep, keep)]
            p_w, q_w = p_m, q_m

    prob = BLProblem(DistanceMatrix(dmat), DiscreteMeasure(p_w),
                     DiscreteMeasure(q_w), radius=radius)
    return bl_distance(prob, backend=backend)
