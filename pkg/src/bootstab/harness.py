"""Desk-scale stability experiments.

Three probes turn the qualitative-robustness theory into falsifiable
finite-sample signatures:

* ``uqr_probe`` (inner): how far apart are the sampling laws of the
  estimator under the clean measure P and a contaminated neighbor Q, as a
  function of contamination size and sample size?  Equicontinuity predicts
  the distance shrinks with the contamination.
* ``bootstrap_qr_probe`` (outer): one level up. Each dataset drawn from P
  or Q yields a whole resampling law; the probe estimates the distance
  between the *distributions of those laws* from m datasets per side.
  Stability of the bootstrap predicts small contamination moves this
  law-of-laws distance only slightly, and the control (P vs an
  independent P) measures the pure Monte-Carlo noise floor.
* ``gc_decay_probe``: the empirical measure converges to its source in
  bounded-Lipschitz distance uniformly over sources; the probe tabulates
  exceedance fractions over a sample-size grid.

The suprema in the theory (over n, over the neighborhood) are replaced by
finite grids and a finite set of contamination directions: the probes
measure moduli whose existence the theory asserts, they do not prove
anything.  Fitted-function laws and risk laws are built from identical
resample streams (shared derived seeds and a shared solution cache), so
their trends are comparable replicate by replicate.

All randomness derives from the config's master seed; reruns are
bit-identical.  Cells of the (direction, eps, n) grid are independent.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bl import BLProblem, bl_distance
from .bootstrap import (PREDICTOR, RISK, BootstrapLaw, SolverConfig,
                        _atoms_from_counts, _merge_close_atoms,
                        bootstrap_law_mc, law_distance)
from .exceptions import DataFormatError
from .measures import DiscreteMeasure, contaminate, empirical, sample
from .rng import derive_rng
from .space import DistanceMatrix, Points, build_euclidean_space

GC_EPS_LEVELS = (0.05, 0.1, 0.2)   # fixed so reports are comparable across runs

_KIND_CHOICES = (PREDICTOR, RISK, "both")


@dataclass(frozen=True)
class RobustnessConfig:
    """Everything one probe run needs; immutable and fully seeded."""

    points: Points
    base_weights: DiscreteMeasure
    directions: tuple
    eps_grid: tuple
    n_grid: tuple
    solver: SolverConfig
    outer_reps: int = 10          # datasets per side of the outer comparison
    inner_B: int = 50             # resamples per bootstrap law
    estimator: str = "both"
    master_seed: int = 0
    y_weight: float = 1.0
    radius: float = 1.0
    backend: str = "auto"
    workers: int = 1
    include_control: bool = True

    def __post_init__(self):
        n_support = len(self.points)
        if self.base_weights.support_size != n_support:
            raise DataFormatError("base measure and points disagree on support size")
        for d in self.directions:
            if d.support_size != n_support:
                raise DataFormatError("contamination direction on wrong support")
        if not self.directions:
            raise DataFormatError("at least one contamination direction required")
        for name, grid in (("eps_grid", self.eps_grid), ("n_grid", self.n_grid)):
            if len(grid) == 0:
                raise DataFormatError(f"{name} must be nonempty")
            if list(grid) != sorted(grid):
                raise DataFormatError(f"{name} must be sorted ascending", grid=grid)
        if self.outer_reps < 2:
            raise DataFormatError("outer_reps must be >= 2")
        if self.inner_B < 1:
            raise DataFormatError("inner_B must be >= 1")
        if self.estimator not in _KIND_CHOICES:
            raise DataFormatError(f"estimator must be one of {_KIND_CHOICES}")

    def kinds(self) -> tuple:
        return (PREDICTOR, RISK) if self.estimator == "both" else (self.estimator,)


@dataclass(frozen=True)
class ProbeRow:
    """One (direction, eps, n) cell of a robustness report.

    ``runtime_s`` is measured wall time and deliberately excluded from
    serialized output so identical (config, seed) runs stay byte-identical.
    """

    probe: str          # "inner", "outer", "control"
    estimator: str
    direction: int      # index into cfg.directions; -1 for the control
    eps: float
    n: int
    data_dbl: float     # d_BL(Q, P) on the data space
    value: float
    runtime_s: float = field(compare=False)

    def to_dict(self) -> dict:
        return {
            "probe": self.probe,
            "estimator": self.estimator,
            "direction": self.direction,
            "eps": self.eps,
            "n": self.n,
            "data_dbl": self.data_dbl,
            "value": self.value,
        }


@dataclass(frozen=True)
class GcRow:
    """Exceedance fractions at one sample size and threshold."""

    n: int
    eps: float
    fractions: tuple    # one entry per measure
    max_fraction: float

    def to_dict(self) -> dict:
        out = {"n": self.n, "eps": self.eps, "max_fraction": self.max_fraction}
        for i, f in enumerate(self.fractions):
            out[f"fraction_m{i}"] = f
        return out


def _seed_path(cfg: RobustnessConfig, *parts) -> tuple:
    return (cfg.master_seed, *parts)


def _sampling_laws(measure, points, solver, kinds, n, B, path, gram, cache):
    """Estimator laws of the requested kinds from one stream of fresh samples."""
    support = len(points)
    tally: dict[bytes, int] = {}
    vectors: dict[bytes, np.ndarray] = {}
    for rep in range(B):
        idx = sample(measure, n, derive_rng(*path, "draw", rep))
        counts = np.bincount(idx, minlength=support).astype(float)
        key = counts.tobytes()
        tally[key] = tally.get(key, 0) + 1
        vectors.setdefault(key, counts)
    keys = sorted(vectors, key=lambda k: tuple(vectors[k]))
    count_vectors = [vectors[k] for k in keys]
    weights = [tally[k] / B for k in keys]
    laws = {}
    for kind in kinds:
        atoms, w = _atoms_from_counts(count_vectors, weights, kind, points,
                                      solver, gram, cache)
        atoms, w = _merge_close_atoms(atoms, w, kind)
        laws[kind] = BootstrapLaw(kind=kind, atoms=tuple(atoms),
                                  weights=DiscreteMeasure(np.asarray(w)),
                                  meta={"n": n, "B": B, "mode": "sampling"})
    return laws


def estimator_law(measure: DiscreteMeasure, points: Points, n: int, B: int,
                  estimator: str, solver: SolverConfig, seed,
                  gram: np.ndarray | None = None) -> BootstrapLaw:
    """Law of the estimator over B fresh size-n i.i.d. samples from ``measure``.

    Unlike :func:`bootstrap_law_mc` this draws from the given measure
    itself, not from resamples of a dataset: it estimates the sampling
    distribution of the estimator.
    """
    if estimator not in (PREDICTOR, RISK):
        raise DataFormatError(f"unknown estimator kind {estimator!r}")
    if gram is None:
        gram = solver.kernel.gram(points.x)
    path = seed if isinstance(seed, tuple) else (seed,)
    laws = _sampling_laws(measure, points, solver, (estimator,), n, B, path,
                          gram, cache={})
    return laws[estimator]


def _data_distance(cfg: RobustnessConfig, dmat: DistanceMatrix,
                   q: DiscreteMeasure) -> float:
    prob = BLProblem(dmat, q, cfg.base_weights, radius=cfg.radius)
    return bl_distance(prob, backend=cfg.backend).value


def uqr_probe(cfg: RobustnessConfig) -> list[ProbeRow]:
    """Inner probe: distance between sampling laws under P and under Q."""
    dmat = build_euclidean_space(cfg.points, cfg.y_weight)
    gram = cfg.solver.kernel.gram(cfg.points.x)
    rows = []
    for d_idx, direction in enumerate(cfg.directions):
        for e_idx, eps in enumerate(cfg.eps_grid):
            q = contaminate(cfg.base_weights, direction, eps)
            data_dbl = _data_distance(cfg, dmat, q)
            for n in cfg.n_grid:
                t0 = time.perf_counter()
                cache: dict = {}
                laws_q = _sampling_laws(
                    q, cfg.points, cfg.solver, cfg.kinds(), n, cfg.inner_B,
                    _seed_path(cfg, "uqr", d_idx, e_idx, n, "Q"), gram, cache)
                laws_p = _sampling_laws(
                    cfg.base_weights, cfg.points, cfg.solver, cfg.kinds(), n,
                    cfg.inner_B,
                    _seed_path(cfg, "uqr", d_idx, e_idx, n, "P"), gram, cache)
                elapsed = time.perf_counter() - t0
                for kind in cfg.kinds():
                    val = law_distance(laws_q[kind], laws_p[kind],
                                       radius=cfg.radius, backend=cfg.backend).value
                    rows.append(ProbeRow("inner", kind, d_idx, float(eps), int(n),
                                         data_dbl, val, elapsed))
    return rows


def _outer_cell(cfg: RobustnessConfig, measure_q, measure_p, n, path, gram):
    """Outer distance between the law-of-laws of the two measures."""
    cache: dict = {}
    m = cfg.outer_reps
    laws_by_kind: dict[str, list] = {kind: [] for kind in cfg.kinds()}
    for side, measure in (("A", measure_q), ("B", measure_p)):
        for r in range(m):
            data = sample(measure, n, derive_rng(*path, side, "data", r))
            for kind in cfg.kinds():
                law = bootstrap_law_mc(
                    data, cfg.points, B=cfg.inner_B, estimator=kind,
                    cfg=cfg.solver, seed=(*path, side, "boot", r),
                    gram=gram, solution_cache=cache)
                laws_by_kind[kind].append(law)

    out = {}
    for kind in cfg.kinds():
        laws = laws_by_kind[kind]
        k = len(laws)
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]

        def pair_dist(ij):
            i, j = ij
            return law_distance(laws[i], laws[j], radius=cfg.radius,
                                backend=cfg.backend).value

        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                vals = list(pool.map(pair_dist, pairs))
        else:
            vals = [pair_dist(ij) for ij in pairs]
        ground = np.zeros((k, k))
        for (i, j), v in zip(pairs, vals):
            ground[i, j] = ground[j, i] = v
        w_a = np.concatenate([np.full(m, 1.0 / m), np.zeros(m)])
        w_b = np.concatenate([np.zeros(m), np.full(m, 1.0 / m)])
        prob = BLProblem(DistanceMatrix(ground), DiscreteMeasure(w_a),
                         DiscreteMeasure(w_b), radius=cfg.radius)
        out[kind] = bl_distance(prob, backend=cfg.backend).value
    return out


def bootstrap_qr_probe(cfg: RobustnessConfig) -> list[ProbeRow]:
    """Outer probe: distance between distributions of bootstrap laws.

    For each cell, m datasets are drawn from the contaminated measure and
    m from the base measure; each dataset yields a Monte-Carlo bootstrap
    law, and the two sides become uniform outer measures over those laws.
    The reported value is the LP distance between the outer measures on
    the pairwise law-distance matrix.  Control rows compare two
    independent dataset groups drawn from the base measure.
    """
    dmat = build_euclidean_space(cfg.points, cfg.y_weight)
    gram = cfg.solver.kernel.gram(cfg.points.x)
    rows = []
    for d_idx, direction in enumerate(cfg.directions):
        for e_idx, eps in enumerate(cfg.eps_grid):
            q = contaminate(cfg.base_weights, direction, eps)
            data_dbl = _data_distance(cfg, dmat, q)
            for n in cfg.n_grid:
                t0 = time.perf_counter()
                vals = _outer_cell(cfg, q, cfg.base_weights, n,
                                   _seed_path(cfg, "bqr", d_idx, e_idx, n), gram)
                elapsed = time.perf_counter() - t0
                for kind in cfg.kinds():
                    rows.append(ProbeRow("outer", kind, d_idx, float(eps), int(n),
                                         data_dbl, vals[kind], elapsed))
    if cfg.include_control:
        for n in cfg.n_grid:
            t0 = time.perf_counter()
            vals = _outer_cell(cfg, cfg.base_weights, cfg.base_weights, n,
                               _seed_path(cfg, "bqr-control", n), gram)
            elapsed = time.perf_counter() - t0
            for kind in cfg.kinds():
                rows.append(ProbeRow("control", kind, -1, 0.0, int(n),
                                     0.0, vals[kind], elapsed))
    return rows


def gc_decay_probe(measures, points: Points, n_grid, reps: int, seed: int,
                   y_weight: float = 1.0, radius: float = 1.0,
                   backend: str = "auto") -> list[GcRow]:
    """Empirical-measure convergence table, uniform over the given measures.

    For each sample size n, draws ``reps`` empirical measures per source
    and reports the fraction whose distance to the source exceeds each
    fixed threshold, plus the maximum over sources (the finite
    stand-in for the supremum in the uniform statement).
    """
    measures = list(measures)
    if len(measures) < 2:
        raise DataFormatError("need >= 2 measures to emulate the sup over sources")
    if reps < 1:
        raise DataFormatError("reps must be >= 1")
    dmat = build_euclidean_space(points, y_weight)
    support = len(points)
    exceed = np.zeros((len(measures), len(n_grid), len(GC_EPS_LEVELS)))
    for mi, measure in enumerate(measures):
        for ni, n in enumerate(n_grid):
            for rep in range(reps):
                idx = sample(measure, int(n), derive_rng(seed, "gc", mi, int(n), rep))
                pn = empirical(idx, support)
                val = bl_distance(BLProblem(dmat, pn, measure, radius=radius),
                                  backend=backend).value
                for ei, lvl in enumerate(GC_EPS_LEVELS):
                    if val > lvl:
                        exceed[mi, ni, ei] += 1
    exceed /= reps
    rows = []
    for ni, n in enumerate(n_grid):
        for ei, lvl in enumerate(GC_EPS_LEVELS):
            fr = tuple(float(exceed[mi, ni, ei]) for mi in range(len(measures)))
            rows.append(GcRow(n=int(n), eps=float(lvl), fractions=fr,
                              max_fraction=float(max(fr))))
    return rows
