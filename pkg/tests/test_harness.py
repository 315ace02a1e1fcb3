import numpy as np
import pytest

from bootstab import (GC_EPS_LEVELS, PREDICTOR, RISK, DataFormatError,
                      DiscreteMeasure, Points, RobustnessConfig, SolverConfig,
                      bootstrap_qr_probe, estimator_law, gaussian_rbf,
                      gc_decay_probe, law_distance, loss_from_name, uqr_probe)
from instances import hinge_solver, two_cluster_instance, well_separated_square


@pytest.fixture(scope="module")
def small_instance():
    rng = np.random.default_rng(17)
    pts = Points(rng.normal(size=(6, 2)), rng.normal(size=6))
    base = DiscreteMeasure(np.array([0.25, 0.2, 0.2, 0.15, 0.1, 0.1]))
    direction = DiscreteMeasure.point_mass(5, 6)
    solver = SolverConfig(loss_from_name("absolute"), gaussian_rbf(1.0), lam=0.3)
    return pts, base, direction, solver


def make_cfg(pts, base, direction, solver, **kw):
    defaults = dict(points=pts, base_weights=base, directions=(direction,),
                    eps_grid=(0.05, 0.2), n_grid=(8,), solver=solver,
                    outer_reps=3, inner_B=8, estimator="both", master_seed=0)
    defaults.update(kw)
    return RobustnessConfig(**defaults)


def test_config_validation(small_instance):
    pts, base, direction, solver = small_instance
    with pytest.raises(DataFormatError):
        make_cfg(pts, base, direction, solver, eps_grid=())
    with pytest.raises(DataFormatError):
        make_cfg(pts, base, direction, solver, eps_grid=(0.2, 0.1))
    with pytest.raises(DataFormatError):
        make_cfg(pts, base, direction, solver, outer_reps=1)
    with pytest.raises(DataFormatError):
        make_cfg(pts, base, direction, solver, estimator="mean")
    with pytest.raises(DataFormatError):
        make_cfg(pts, base, direction, solver,
                 directions=(DiscreteMeasure.uniform(3),))


def test_estimator_law_point_mass(small_instance):
    pts, _, _, solver = small_instance
    law = estimator_law(DiscreteMeasure.point_mass(2, 6), pts, n=5, B=12,
                        estimator=PREDICTOR, solver=solver, seed=1)
    assert law.n_atoms == 1
    assert law.weights.w[0] == 1.0


def test_estimator_law_two_seed_self_consistency():
    # independent draws from the same measure give nearby risk laws
    pts = well_separated_square()
    base = DiscreteMeasure(np.array([0.3, 0.3, 0.2, 0.2]))
    solver = SolverConfig(loss_from_name("absolute"), gaussian_rbf(0.3), lam=0.5)
    laws = [estimator_law(base, pts, n=20, B=2000, estimator=RISK,
                          solver=solver, seed=s) for s in (0, 1)]
    val = law_distance(laws[0], laws[1]).value
    assert val <= 0.1


def test_estimator_law_duplicated_support_agrees():
    pts = well_separated_square()
    solver = SolverConfig(loss_from_name("absolute"), gaussian_rbf(0.3), lam=0.5)
    base = DiscreteMeasure(np.array([0.3, 0.3, 0.2, 0.2]))
    law = estimator_law(base, pts, n=12, B=400, estimator=RISK,
                        solver=solver, seed=5)
    dup_pts = Points(np.vstack([pts.x, pts.x[:1]]), np.concatenate([pts.y, pts.y[:1]]))
    dup_base = DiscreteMeasure(np.array([0.15, 0.3, 0.2, 0.2, 0.15]))
    dup_law = estimator_law(dup_base, dup_pts, n=12, B=400, estimator=RISK,
                            solver=solver, seed=6)
    assert law_distance(law, dup_law).value <= 0.1


def test_uqr_probe_rows_and_trivials(small_instance):
    pts, base, direction, solver = small_instance
    cfg = make_cfg(pts, base, direction, solver, eps_grid=(0.0, 0.2), inner_B=12)
    rows = uqr_probe(cfg)
    assert len(rows) == len(cfg.eps_grid) * len(cfg.n_grid) * len(cfg.kinds())
    for row in rows:
        assert row.probe == "inner"
        assert 0.0 <= row.value <= 2.0
        assert 0.0 <= row.data_dbl <= 2.0
    by = {(r.estimator, r.eps): r for r in rows}
    assert by[(PREDICTOR, 0.0)].data_dbl == 0.0
    # mixture distance is linear in eps on the data space
    assert by[(PREDICTOR, 0.2)].data_dbl == pytest.approx(
        0.2 * law_like_direction_distance(cfg), abs=1e-8)
    # at eps = 0 the inner value is pure Monte-Carlo noise: same size as the
    # distance between two independent estimator laws of the base measure
    noise = [
        law_distance(
            estimator_law(base, pts, n=8, B=12, estimator=PREDICTOR,
                          solver=solver, seed=(500 + t, "a")),
            estimator_law(base, pts, n=8, B=12, estimator=PREDICTOR,
                          solver=solver, seed=(500 + t, "b"))).value
        for t in range(3)
    ]
    assert by[(PREDICTOR, 0.0)].value <= 3.0 * max(noise)


def law_like_direction_distance(cfg):
    from bootstab import BLProblem, bl_distance, build_euclidean_space
    d = build_euclidean_space(cfg.points, cfg.y_weight)
    return bl_distance(BLProblem(d, cfg.directions[0], cfg.base_weights)).value


def test_uqr_probe_collapses_under_huge_penalty(small_instance):
    pts, base, direction, _ = small_instance
    solver = SolverConfig(loss_from_name("absolute"), gaussian_rbf(1.0), lam=1e6)
    cfg = make_cfg(pts, base, direction, solver, eps_grid=(0.05, 0.3), inner_B=10)
    for row in uqr_probe(cfg):
        assert row.value <= 1e-4


def test_uqr_probe_trend_in_eps():
    # median over 5 master seeds: inner distance mostly nondecreasing in eps
    pts, base, direction = two_cluster_instance()
    solver = hinge_solver(lam=0.1)
    eps_grid = (0.02, 0.05, 0.1, 0.2, 0.3)
    per_seed = []
    for seed in range(5):
        cfg = RobustnessConfig(points=pts, base_weights=base,
                               directions=(direction,), eps_grid=eps_grid,
                               n_grid=(20,), solver=solver, outer_reps=2,
                               inner_B=30, estimator=PREDICTOR, master_seed=seed)
        rows = uqr_probe(cfg)
        per_seed.append([r.value for r in rows])
    med = np.median(np.asarray(per_seed), axis=0)
    nondecreasing = sum(a <= b + 1e-12 for a, b in zip(med, med[1:]))
    assert nondecreasing >= 3


def test_outer_probe_rows_shapes_and_determinism(small_instance):
    pts, base, direction, solver = small_instance
    cfg = make_cfg(pts, base, direction, solver)
    rows = bootstrap_qr_probe(cfg)
    # 2 eps cells + 1 control per estimator kind
    assert len(rows) == (2 + 1) * 2
    kinds = {r.estimator for r in rows}
    assert kinds == {PREDICTOR, RISK}
    for row in rows:
        assert 0.0 <= row.value <= 2.0
    rows2 = bootstrap_qr_probe(cfg)
    assert rows == rows2          # runtime_s excluded from equality


def test_outer_probe_workers_match_serial(small_instance):
    pts, base, direction, solver = small_instance
    cfg1 = make_cfg(pts, base, direction, solver)
    cfg2 = make_cfg(pts, base, direction, solver, workers=3)
    assert bootstrap_qr_probe(cfg1) == bootstrap_qr_probe(cfg2)


def test_outer_probe_signal_single_seed():
    pts, base, direction = two_cluster_instance()
    cfg = RobustnessConfig(points=pts, base_weights=base, directions=(direction,),
                           eps_grid=(0.02, 0.3), n_grid=(20,),
                           solver=hinge_solver(lam=0.1), outer_reps=6,
                           inner_B=20, estimator=PREDICTOR, master_seed=0)
    rows = bootstrap_qr_probe(cfg)
    by = {(r.probe, r.eps): r.value for r in rows}
    assert by[("outer", 0.02)] < by[("outer", 0.3)]
    assert by[("control", 0.0)] < by[("outer", 0.3)]


def test_gc_decay_probe_table():
    pts = well_separated_square()
    uniform = DiscreteMeasure.uniform(4)
    skew = DiscreteMeasure(np.array([0.4, 0.3, 0.2, 0.1]))
    rows = gc_decay_probe([uniform, skew], pts, n_grid=(20, 320), reps=20, seed=3)
    assert len(rows) == 2 * len(GC_EPS_LEVELS)
    by = {(r.n, r.eps): r for r in rows}
    for n in (20, 320):
        fr = [by[(n, lvl)].max_fraction for lvl in GC_EPS_LEVELS]
        assert all(a >= b for a, b in zip(fr, fr[1:]))
        assert all(0.0 <= f <= 1.0 for f in fr)
    assert by[(320, 0.1)].max_fraction <= by[(20, 0.1)].max_fraction


def test_gc_decay_point_mass_measure_never_exceeds():
    pts = well_separated_square()
    rows = gc_decay_probe([DiscreteMeasure.point_mass(0, 4),
                           DiscreteMeasure.uniform(4)],
                          pts, n_grid=(10,), reps=10, seed=4)
    for row in rows:
        assert row.fractions[0] == 0.0    # point mass: P_n == P always


def test_gc_decay_probe_validation():
    pts = well_separated_square()
    with pytest.raises(DataFormatError):
        gc_decay_probe([DiscreteMeasure.uniform(4)], pts, (10,), 5, 0)
    with pytest.raises(DataFormatError):
        gc_decay_probe([DiscreteMeasure.uniform(4), DiscreteMeasure.uniform(4)],
                       pts, (10,), 0, 0)


def test_probe_row_serialization_excludes_runtime(small_instance):
    pts, base, direction, solver = small_instance
    cfg = make_cfg(pts, base, direction, solver, eps_grid=(0.1,), estimator=RISK)
    row = bootstrap_qr_probe(cfg)[0]
    d = row.to_dict()
    assert "runtime_s" not in d
    assert set(d) == {"probe", "estimator", "direction", "eps", "n",
                      "data_dbl", "value"}
