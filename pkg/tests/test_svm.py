import numpy as np
import pytest

from bootstab import (DataFormatError, DiscreteMeasure, Points, SolverError,
                      SvmProblem, SvmSolution, contaminate, gaussian_rbf,
                      linear_on_box, loss_from_name, risk,
                      risk_continuity_check, rkhs_distance, solve)
from bootstab.losses import LOSS_KINDS
from bootstab.svm import shifted_objective


def random_problem(rng, n, kind=None, lam=None, kernel=None):
    kind = kind or LOSS_KINDS[int(rng.integers(len(LOSS_KINDS)))]
    x = rng.normal(size=(n, 2))
    y = (rng.choice([-1.0, 1.0], n) if kind in ("hinge", "logistic")
         else rng.normal(size=n))
    kernel = kernel or (gaussian_rbf(1.0) if rng.random() < 0.5
                        else linear_on_box((-8, -8), (8, 8)))
    lam = lam or float(rng.uniform(0.1, 2.0))
    return SvmProblem(Points(x, y), DiscreteMeasure(rng.dirichlet(np.ones(n))),
                      loss_from_name(kind, tau=0.35, epsilon=0.15), kernel, lam)


def test_huge_penalty_collapses_to_zero():
    rng = np.random.default_rng(0)
    prob = SvmProblem(Points(rng.normal(size=(6, 2)), rng.normal(size=6)),
                      DiscreteMeasure.uniform(6), loss_from_name("absolute"),
                      gaussian_rbf(1.0), lam=1e6)
    sol = solve(prob)
    assert sol.rkhs_norm <= 1e-4
    assert np.max(np.abs(sol.f_values)) <= 1e-4


def test_single_point_absolute_matches_grid_oracle():
    pts = Points(np.array([[0.0]]), np.array([1.0]))
    prob = SvmProblem(pts, DiscreteMeasure(np.array([1.0])),
                      loss_from_name("absolute"), gaussian_rbf(1.0), 0.25)
    sol = solve(prob)
    grid = np.arange(-4.2, 4.2, 1e-4)
    objs = np.abs(1.0 - grid) - 1.0 + 0.25 * grid ** 2
    best = grid[np.argmin(objs)]
    assert sol.f_values[0] == pytest.approx(best, abs=1e-3)
    assert sol.objective == pytest.approx(float(objs.min()), abs=1e-3)
    assert sol.objective == pytest.approx(-0.75, abs=1e-6)
    assert risk(sol, prob.weights) == pytest.approx(-1.0, abs=1e-6)


def test_dual_gap_certificate():
    rng = np.random.default_rng(1)
    for _ in range(25):
        sol = solve(random_problem(rng, int(rng.integers(1, 9))), tol=1e-9)
        assert sol.gap >= -1e-12
        assert sol.gap <= 1e-9 * (1.0 + abs(sol.objective))


def test_objective_matches_reevaluation():
    rng = np.random.default_rng(2)
    for _ in range(10):
        prob = random_problem(rng, 6)
        sol = solve(prob)
        assert sol.objective == pytest.approx(shifted_objective(prob, sol.alpha),
                                              abs=1e-10)


def test_random_direction_line_search_certificate():
    # 200 exact-grid line searches never improve the objective materially
    rng = np.random.default_rng(3)
    tol = 1e-8
    for _ in range(3):
        prob = random_problem(rng, 5)
        sol = solve(prob, tol=tol)
        steps = np.linspace(-0.5, 0.5, 401)
        for _ in range(200):
            u = rng.normal(size=5)
            u /= np.linalg.norm(u)
            vals = [shifted_objective(prob, sol.alpha + t * u) for t in steps]
            assert min(vals) >= sol.objective - tol * (1.0 + abs(sol.objective))


def test_sup_norm_and_risk_bounds():
    rng = np.random.default_rng(4)
    for trial in range(40):
        kind = LOSS_KINDS[trial % len(LOSS_KINDS)]
        prob = random_problem(rng, 10, kind=kind)
        sol = solve(prob)
        bound = sol.sup_norm_bound()
        grid = rng.uniform(-5, 5, size=(100, 2))
        fmax = max(np.abs(sol.f_values).max(), np.abs(sol.predict(grid)).max())
        assert fmax <= bound + 1e-6
        r = risk(sol, prob.weights)
        assert abs(r) <= prob.loss.lip ** 2 * prob.kernel.k_sup ** 2 / prob.lam + 1e-6


def test_zero_function_has_zero_risk():
    rng = np.random.default_rng(5)
    pts = Points(rng.normal(size=(4, 2)), rng.normal(size=4))
    kern = gaussian_rbf(1.0)
    zero = SvmSolution(alpha=np.zeros(4), gram=kern.gram(pts.x), objective=0.0,
                       rkhs_norm=0.0, f_values=np.zeros(4), gap=0.0, sweeps=0,
                       points=pts, kernel=kern, loss=loss_from_name("absolute"),
                       lam=1.0)
    for _ in range(5):
        w = DiscreteMeasure(rng.dirichlet(np.ones(4)))
        assert risk(zero, w) == 0.0


def test_rkhs_distance_basics():
    rng = np.random.default_rng(6)
    pts = Points(rng.normal(size=(3, 2)), rng.normal(size=3))
    kern = gaussian_rbf(1.0)
    G = kern.gram(pts.x)

    def expansion(alpha):
        return SvmSolution(alpha=np.asarray(alpha, dtype=float), gram=G,
                           objective=0.0, rkhs_norm=0.0,
                           f_values=G @ np.asarray(alpha, dtype=float), gap=0.0,
                           sweeps=0, points=pts, kernel=kern,
                           loss=loss_from_name("absolute"), lam=1.0)

    a = expansion([1.0, 0.0, 0.0])       # f = k(x_0, .)
    zero = expansion([0.0, 0.0, 0.0])
    assert rkhs_distance(a, a) == 0.0
    assert rkhs_distance(a, zero) == pytest.approx(1.0, abs=1e-12)
    b = expansion(rng.normal(size=3))
    c = expansion(rng.normal(size=3))
    assert rkhs_distance(a, c) <= rkhs_distance(a, b) + rkhs_distance(b, c) + 1e-9


def test_rkhs_distance_across_supports():
    rng = np.random.default_rng(7)
    kern = gaussian_rbf(1.0)
    pts_a = Points(rng.normal(size=(3, 2)), rng.normal(size=3))
    pts_b = Points(rng.normal(size=(4, 2)), rng.normal(size=4))
    sol_a = solve(SvmProblem(pts_a, DiscreteMeasure.uniform(3),
                             loss_from_name("absolute"), kern, 0.5))
    sol_b = solve(SvmProblem(pts_b, DiscreteMeasure.uniform(4),
                             loss_from_name("absolute"), kern, 0.5))
    d = rkhs_distance(sol_a, sol_b)
    # same functions on the concatenated support must give the same distance
    joint = Points(np.vstack([pts_a.x, pts_b.x]),
                   np.concatenate([pts_a.y, pts_b.y]))
    G = kern.gram(joint.x)
    alpha_a = np.concatenate([sol_a.alpha, np.zeros(4)])
    alpha_b = np.concatenate([np.zeros(3), sol_b.alpha])
    diff = alpha_a - alpha_b
    assert d == pytest.approx(np.sqrt(diff @ G @ diff), abs=1e-9)
    with pytest.raises(DataFormatError):
        rkhs_distance(sol_a, solve(SvmProblem(pts_b, DiscreteMeasure.uniform(4),
                                              loss_from_name("absolute"),
                                              gaussian_rbf(2.0), 0.5)))


def test_risk_continuity_identical_measures():
    rng = np.random.default_rng(8)
    pts = Points(rng.normal(size=(5, 2)), rng.normal(size=5))
    w = DiscreteMeasure(rng.dirichlet(np.ones(5)))
    prob = SvmProblem(pts, w, loss_from_name("absolute"), gaussian_rbf(1.0), 0.5)
    rep = risk_continuity_check(prob, SvmProblem(pts, w, prob.loss, prob.kernel, 0.5))
    assert rep.risk_gap == pytest.approx(0.0, abs=1e-12)
    assert rep.sup_term == pytest.approx(0.0, abs=1e-12)
    assert rep.slack_sup >= 0.0 and rep.slack_rkhs >= 0.0


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
def test_risk_continuity_contaminated(eps):
    rng = np.random.default_rng(int(eps * 1000))
    for _ in range(10):
        n = 7
        pts = Points(rng.normal(size=(n, 2)), rng.normal(size=n))
        base = DiscreteMeasure(rng.dirichlet(np.ones(n)))
        q = contaminate(base, DiscreteMeasure.point_mass(int(rng.integers(n)), n), eps)
        loss = loss_from_name("pinball", tau=0.4)
        kern = gaussian_rbf(1.0)
        rep = risk_continuity_check(SvmProblem(pts, base, loss, kern, 0.3),
                                    SvmProblem(pts, q, loss, kern, 0.3))
        assert rep.slack_sup >= -1e-9
        assert rep.slack_rkhs >= -1e-9
        assert rep.rkhs_term >= rep.sup_term - 1e-9   # coarser bound dominates


def test_risk_continuity_large_penalty_collapses():
    rng = np.random.default_rng(9)
    pts = Points(rng.normal(size=(4, 2)), rng.normal(size=4))
    base = DiscreteMeasure.uniform(4)
    q = contaminate(base, DiscreteMeasure.point_mass(0, 4), 0.2)
    loss = loss_from_name("absolute")
    rep = risk_continuity_check(SvmProblem(pts, base, loss, gaussian_rbf(1.0), 1e7),
                                SvmProblem(pts, q, loss, gaussian_rbf(1.0), 1e7))
    assert rep.risk_gap <= 1e-5
    assert rep.sup_term + rep.integral_term <= 1e-5


def test_risk_continuity_requires_shared_setup():
    rng = np.random.default_rng(10)
    pts = Points(rng.normal(size=(4, 2)), rng.normal(size=4))
    w = DiscreteMeasure.uniform(4)
    a = SvmProblem(pts, w, loss_from_name("absolute"), gaussian_rbf(1.0), 0.5)
    other_pts = Points(rng.normal(size=(4, 2)), rng.normal(size=4))
    with pytest.raises(DataFormatError):
        risk_continuity_check(a, SvmProblem(other_pts, w, a.loss, a.kernel, 0.5))
    with pytest.raises(DataFormatError):
        risk_continuity_check(a, SvmProblem(pts, w, a.loss, a.kernel, 0.7))


def test_duplicated_support_representation_invariance():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(4, 2))
    y = rng.normal(size=4)
    w = rng.dirichlet(np.ones(4))
    kern = gaussian_rbf(1.0)
    loss = loss_from_name("absolute")
    merged = solve(SvmProblem(Points(x, y), DiscreteMeasure(w), loss, kern, 0.4))
    dup_x = np.vstack([x, x[1:2]])
    dup_y = np.concatenate([y, y[1:2]])
    dup_w = np.concatenate([w, [0.0]])
    dup_w[1] *= 0.5
    dup_w[4] = dup_w[1]
    split = solve(SvmProblem(Points(dup_x, dup_y), DiscreteMeasure(dup_w),
                             loss, kern, 0.4))
    grid = rng.uniform(-3, 3, size=(50, 2))
    assert np.max(np.abs(merged.predict(grid) - split.predict(grid))) <= 1e-7


def test_estimator_map_is_continuous_under_contamination():
    # median RKHS distance to the clean fit shrinks as contamination shrinks
    rng = np.random.default_rng(12)
    n = 8
    pts = Points(rng.normal(size=(n, 2)), rng.normal(size=n))
    base = DiscreteMeasure.uniform(n)
    loss = loss_from_name("absolute")
    kern = gaussian_rbf(1.0)
    clean = solve(SvmProblem(pts, base, loss, kern, 0.3))
    dists = {}
    for eps in (0.01, 0.2):
        vals = []
        for _ in range(20):
            direction = DiscreteMeasure(rng.dirichlet(np.ones(n)))
            sol = solve(SvmProblem(pts, contaminate(base, direction, eps),
                                   loss, kern, 0.3))
            vals.append(rkhs_distance(sol, clean))
        dists[eps] = float(np.median(vals))
    assert dists[0.01] < dists[0.2]


def test_degenerate_single_mass_converges():
    rng = np.random.default_rng(13)
    pts = Points(rng.normal(size=(5, 2)), rng.normal(size=5))
    w = np.zeros(5)
    w[2] = 1.0
    sol = solve(SvmProblem(pts, DiscreteMeasure(w), loss_from_name("absolute"),
                           gaussian_rbf(1.0), 0.5))
    assert sol.gap <= 1e-8 * (1 + abs(sol.objective))
    assert np.all(sol.alpha[np.arange(5) != 2] == 0.0)


def test_solver_cap_raises_with_trace():
    rng = np.random.default_rng(14)
    prob = random_problem(rng, 8, kind="logistic", lam=0.05,
                          kernel=gaussian_rbf(1.0))
    with pytest.raises(SolverError) as err:
        solve(prob, tol=1e-12, max_sweeps=1)
    assert "gap" in err.value.details


def test_problem_validation():
    pts = Points(np.array([[0.0]]), np.array([0.5]))
    with pytest.raises(DataFormatError):
        SvmProblem(pts, DiscreteMeasure.uniform(2), loss_from_name("absolute"),
                   gaussian_rbf(1.0), 1.0)
    with pytest.raises(DataFormatError):
        SvmProblem(pts, DiscreteMeasure.uniform(1), loss_from_name("absolute"),
                   gaussian_rbf(1.0), 0.0)
    with pytest.raises(DataFormatError):
        SvmProblem(pts, DiscreteMeasure.uniform(1), loss_from_name("hinge"),
                   gaussian_rbf(1.0), 1.0)   # hinge needs y in {-1, +1}
