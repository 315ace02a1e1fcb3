"""Batch front door.

Usage: ``bootstab SUBCOMMAND CONFIG.ini`` with subcommands blmetric,
svm-train, bootstrap, robustness, gc-decay and selftest (the last one
needs no config).  All run parameters live in one INI-style config file;
there are no positional arguments beyond the subcommand and config path,
so a run is reproducible from the single artifact.  All randomness flows
from ``[run] master_seed``; no wall clock or OS entropy is consulted.

Every output file embeds the SHA-256 of the config file and the master
seed.  Floats are emitted with 17 significant digits.  Exit codes:
0 success, 2 config/input parse error, 3 invariant failure, 4 solver
failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import os
import sys

import numpy as np

from . import __version__
from .bl import BLProblem, bl_distance, bl_distance_oracle
from .bootstrap import (PREDICTOR, RISK, SolverConfig, bootstrap_law_exact,
                        bootstrap_law_mc, law_distance)
from .exceptions import (BootstabError, ConfigError, DataFormatError,
                         InvariantViolation, SolverError)
from .harness import (GC_EPS_LEVELS, RobustnessConfig, bootstrap_qr_probe,
                      gc_decay_probe, uqr_probe)
from .kernels import kernel_from_name
from .losses import loss_from_name
from .measures import DiscreteMeasure, contaminate, empirical, sample
from .space import (DistanceMatrix, Points, build_euclidean_space,
                    load_points_csv, validate_metric)
from .svm import SvmProblem, risk, risk_continuity_check, solve

FORMAT_VERSION = "1"

SUBCOMMANDS = ("blmetric", "svm-train", "bootstrap", "robustness",
               "gc-decay", "selftest")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_SOLVER = 4


# ---------------------------------------------------------------------------
# serialization: floats at fixed 17 significant digits, deterministic order

def _fmt_float(x) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise InvariantViolation(f"non-finite value {x!r} in output")
    return format(x, ".17g")


def to_json(obj, _indent: int = 0) -> str:
    import json as _json
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return _json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), _indent)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v, _indent) for v in obj) + "]"
    if isinstance(obj, dict):
        items = ", ".join(f"{_json.dumps(str(k))}: {to_json(v, _indent)}"
                          for k, v in obj.items())
        return "{" + items + "}"
    raise InvariantViolation(f"unserializable type {type(obj)!r}")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _fmt_float(v)
    return str(v)


def rows_to_csv(rows: list[dict], provenance: dict) -> str:
    out = io.StringIO()
    for k, v in provenance.items():
        out.write(f"# {k}={_csv_cell(v)}\n")
    if rows:
        header = list(rows[0].keys())
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(_csv_cell(row[k]) for k in header) + "\n")
    return out.getvalue()


def rows_to_jsonl(rows: list[dict], provenance: dict) -> str:
    lines = [to_json({"provenance": provenance})]
    lines += [to_json(row) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# config schema

_SOLVER_KEYS = {
    "loss": ("str", "absolute"),
    "tau": ("float", 0.5),
    "epsilon": ("float", 0.1),
    "kernel": ("str", "gaussian_rbf"),
    "gamma": ("float", 1.0),
    "box_low": ("floats", None),
    "box_high": ("floats", None),
    "lam": ("float", 1.0),
    "tol": ("float", 1e-8),
}

SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {
        "format_version": ("str", None),      # required, must match
        "master_seed": ("int", 0),
        "workers": ("int", 0),                # 0 = one per processor
        "output": ("str", None),
    },
    "blmetric": {
        "distances": ("str", None),
        "p": ("floats", None),
        "q": ("floats", None),
        "radius": ("float", 1.0),
        "backend": ("str", "auto"),
    },
    "svm-train": {
        "dataset": ("str", None),
        "weights": ("floats", None),
        **_SOLVER_KEYS,
    },
    "bootstrap": {
        "dataset": ("str", None),
        "mode": ("str", "mc"),
        "b": ("int", 500),
        "estimator": ("str", PREDICTOR),
        "dump_atoms": ("bool", False),
        "radius": ("float", 1.0),
        **_SOLVER_KEYS,
    },
    "robustness": {
        "dataset": ("str", None),
        "base_weights": ("str", "uniform"),
        "directions": ("str", None),
        "eps_grid": ("floats", None),
        "n_grid": ("ints", None),
        "outer_reps": ("int", 10),
        "inner_b": ("int", 50),
        "estimator": ("str", "both"),
        "probe": ("str", "both"),
        "y_weight": ("float", 1.0),
        "radius": ("float", 1.0),
        "backend": ("str", "auto"),
        "include_control": ("bool", True),
        **_SOLVER_KEYS,
    },
    "gc-decay": {
        "dataset": ("str", None),
        "measures": ("str", None),
        "n_grid": ("ints", None),
        "reps": ("int", 50),
        "y_weight": ("float", 1.0),
        "radius": ("float", 1.0),
        "backend": ("str", "auto"),
    },
}

_REQUIRED = {
    "blmetric": ("distances", "p", "q"),
    "svm-train": ("dataset",),
    "bootstrap": ("dataset",),
    "robustness": ("dataset", "directions", "eps_grid", "n_grid"),
    "gc-decay": ("dataset", "measures", "n_grid"),
}


def _parse_scalar(kind: str, raw: str, section: str, key: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "ints":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(
            f"config field [{section}] {key} = {raw!r} is not a valid {kind}",
            section=section, field=key, value=raw,
        ) from None


def load_config(path: str, subcommand: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.ParsingError as exc:
        lines = [lineno for lineno, _ in getattr(exc, "errors", [])]
        raise ConfigError(f"config syntax error: {exc}", lines=lines) from None
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        raise ConfigError(f"config syntax error at line {lineno}: {exc}",
                          line=lineno) from None

    allowed_sections = {"run", subcommand}
    for section in parser.sections():
        if section not in allowed_sections:
            raise ConfigError(f"unknown config section [{section}]", section=section)

    cfg: dict[str, dict] = {}
    for section in ("run", subcommand):
        schema = SCHEMA[section]
        values = {}
        present = parser[section] if parser.has_section(section) else {}
        for key in present:
            if key not in schema:
                raise ConfigError(
                    f"unknown config field [{section}] {key}",
                    section=section, field=key,
                )
        for key, (kind, default) in schema.items():
            if key in present:
                values[key] = _parse_scalar(kind, present[key], section, key)
            else:
                values[key] = default
        cfg[section] = values

    run = cfg["run"]
    if run["format_version"] is None:
        raise ConfigError("missing required field [run] format_version",
                          section="run", field="format_version")
    if run["format_version"] != FORMAT_VERSION:
        raise ConfigError(
            f"config format_version {run['format_version']!r} not supported "
            f"(this build supports {FORMAT_VERSION!r})",
            got=run["format_version"], supported=FORMAT_VERSION,
        )
    for key in _REQUIRED.get(subcommand, ()):
        if cfg[subcommand].get(key) is None:
            raise ConfigError(
                f"missing required field [{subcommand}] {key}",
                section=subcommand, field=key,
            )
    with open(path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    cfg["_provenance"] = {
        "config_sha256": digest,
        "master_seed": run["master_seed"],
        "format_version": FORMAT_VERSION,
        "tool_version": __version__,
    }
    return cfg


def _solver_from(section: dict) -> SolverConfig:
    loss = loss_from_name(section["loss"], tau=section["tau"],
                          epsilon=section["epsilon"])
    kernel = kernel_from_name(section["kernel"], gamma=section["gamma"],
                              box_low=section["box_low"],
                              box_high=section["box_high"])
    return SolverConfig(loss=loss, kernel=kernel, lam=section["lam"],
                        tol=section["tol"])


def _parse_measure_token(token: str, n: int) -> DiscreteMeasure:
    token = token.strip()
    if token == "uniform":
        return DiscreteMeasure.uniform(n)
    if token.startswith("point_mass:"):
        return DiscreteMeasure.point_mass(int(token.split(":", 1)[1]), n)
    try:
        w = np.array([float(v) for v in token.split(",")])
    except ValueError:
        raise ConfigError(f"cannot parse measure token {token!r}",
                          token=token) from None
    if w.shape[0] != n:
        raise ConfigError(
            f"measure has {w.shape[0]} weights but the support has {n} points",
            token=token, expected=n,
        )
    return DiscreteMeasure(w)


def _parse_measures(spec: str, n: int) -> list[DiscreteMeasure]:
    return [_parse_measure_token(tok, n) for tok in spec.split(";") if tok.strip()]


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_rows(rows: list[dict], provenance: dict, output: str | None) -> None:
    jsonl = rows_to_jsonl(rows, provenance)
    if output:
        with open(output, "w") as fh:
            fh.write(jsonl)
        base, _ = os.path.splitext(output)
        with open(base + ".csv", "w") as fh:
            fh.write(rows_to_csv(rows, provenance))
    else:
        sys.stdout.write(jsonl)


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_blmetric(cfg: dict) -> int:
    sec = cfg["blmetric"]
    try:
        mat = np.loadtxt(sec["distances"], delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataFormatError(
            f"cannot read distance matrix {sec['distances']}: {exc}") from None
    d = DistanceMatrix.from_array(mat)
    prob = BLProblem(d, DiscreteMeasure(np.array(sec["p"])),
                     DiscreteMeasure(np.array(sec["q"])), radius=sec["radius"])
    res = bl_distance(prob, backend=sec["backend"])
    doc = {
        "provenance": cfg["_provenance"],
        "value": res.value,
        "witness": res.f_star,
        "sup_bound": res.sup_bound,
        "lip_bound": res.lip_bound,
        "radius": sec["radius"],
        "backend": res.backend,
    }
    text = to_json(doc) + "\n"
    sys.stdout.write(text)
    if cfg["run"]["output"]:
        _emit(text, cfg["run"]["output"])
    return EXIT_OK


def _cmd_svm_train(cfg: dict) -> int:
    sec = cfg["svm-train"]
    pts = load_points_csv(sec["dataset"])
    solver = _solver_from(sec)
    if sec["weights"] is None:
        weights = DiscreteMeasure.uniform(len(pts))
    else:
        weights = DiscreteMeasure(np.array(sec["weights"]))
    prob = SvmProblem(pts, weights, solver.loss, solver.kernel, solver.lam)
    sol = solve(prob, tol=solver.tol)
    own_risk = risk(sol, weights)
    sup_bound = sol.sup_norm_bound()
    risk_bound = solver.loss.lip ** 2 * solver.kernel.k_sup ** 2 / solver.lam
    doc = {
        "provenance": cfg["_provenance"],
        "alpha": sol.alpha,
        "rkhs_norm": sol.rkhs_norm,
        "objective": sol.objective,
        "dual_gap": sol.gap,
        "f_values": sol.f_values,
        "risk": own_risk,
        "bounds": {
            "sup_norm_bound": sup_bound,
            "sup_norm_ok": bool(np.max(np.abs(sol.f_values)) <= sup_bound + 1e-6),
            "risk_bound": risk_bound,
            "risk_ok": bool(abs(own_risk) <= risk_bound + 1e-6),
        },
    }
    _emit(to_json(doc) + "\n", cfg["run"]["output"])
    return EXIT_OK


def _cmd_bootstrap(cfg: dict) -> int:
    sec = cfg["bootstrap"]
    pts = load_points_csv(sec["dataset"])
    solver = _solver_from(sec)
    estimator = sec["estimator"]
    if estimator not in (PREDICTOR, RISK):
        raise ConfigError(f"estimator must be {PREDICTOR} or {RISK}",
                          field="estimator", value=estimator)
    data = np.arange(len(pts))
    if sec["mode"] == "exact":
        law = bootstrap_law_exact(data, pts, estimator, solver)
    elif sec["mode"] == "mc":
        law = bootstrap_law_mc(data, pts, B=sec["b"], estimator=estimator,
                               cfg=solver, seed=cfg["run"]["master_seed"])
    else:
        raise ConfigError(f"mode must be mc or exact, got {sec['mode']!r}",
                          field="mode", value=sec["mode"])
    from .bootstrap import _atom_distance_matrix
    dmat = _atom_distance_matrix(list(law.atoms), law.kind)
    tri = dmat[np.triu_indices(law.n_atoms, k=1)] if law.n_atoms > 1 else np.zeros(1)
    doc = {
        "provenance": cfg["_provenance"],
        "estimator": law.kind,
        "mode": sec["mode"],
        "n": law.meta["n"],
        "B": law.meta["B"],
        "atom_count": law.n_atoms,
        "weights": law.weights.w,
        "pairwise_distance_quantiles": {
            "q0": float(np.min(tri)), "q25": float(np.quantile(tri, 0.25)),
            "q50": float(np.quantile(tri, 0.5)), "q75": float(np.quantile(tri, 0.75)),
            "q100": float(np.max(tri)),
        },
    }
    if sec["dump_atoms"]:
        if law.kind == RISK:
            doc["atoms"] = law.risk_values()
        else:
            doc["atoms"] = [a.alpha for a in law.atoms]
    _emit(to_json(doc) + "\n", cfg["run"]["output"])
    return EXIT_OK


def _cmd_robustness(cfg: dict) -> int:
    sec = cfg["robustness"]
    pts = load_points_csv(sec["dataset"])
    n_support = len(pts)
    base = _parse_measure_token(sec["base_weights"], n_support)
    directions = tuple(_parse_measures(sec["directions"], n_support))
    workers = cfg["run"]["workers"] or (os.cpu_count() or 1)
    rcfg = RobustnessConfig(
        points=pts, base_weights=base, directions=directions,
        eps_grid=tuple(sorted(sec["eps_grid"])), n_grid=tuple(sorted(sec["n_grid"])),
        solver=_solver_from(sec), outer_reps=sec["outer_reps"],
        inner_B=sec["inner_b"], estimator=sec["estimator"],
        master_seed=cfg["run"]["master_seed"], y_weight=sec["y_weight"],
        radius=sec["radius"], backend=sec["backend"],
        workers=workers, include_control=sec["include_control"],
    )
    probe = sec["probe"]
    if probe not in ("inner", "outer", "both"):
        raise ConfigError("probe must be inner, outer or both",
                          field="probe", value=probe)
    rows = []
    if probe in ("inner", "both"):
        rows += uqr_probe(rcfg)
    if probe in ("outer", "both"):
        rows += bootstrap_qr_probe(rcfg)
    cap = 2.0 * rcfg.radius
    for row in rows:
        if not (0.0 <= row.value <= cap) or not (0.0 <= row.data_dbl <= cap):
            raise InvariantViolation(
                "reported distance outside [0, 2*radius]",
                row=row.to_dict(), cap=cap,
            )
    _emit_rows([r.to_dict() for r in rows], cfg["_provenance"],
               cfg["run"]["output"])
    return EXIT_OK


def _cmd_gc_decay(cfg: dict) -> int:
    sec = cfg["gc-decay"]
    pts = load_points_csv(sec["dataset"])
    measures = _parse_measures(sec["measures"], len(pts))
    rows = gc_decay_probe(measures, pts, tuple(sorted(sec["n_grid"])),
                          reps=sec["reps"], seed=cfg["run"]["master_seed"],
                          y_weight=sec["y_weight"], radius=sec["radius"],
                          backend=sec["backend"])
    for row in rows:
        if not all(0.0 <= f <= 1.0 for f in row.fractions):
            raise InvariantViolation("exceedance fraction outside [0, 1]",
                                     row=row.to_dict())
    _emit_rows([r.to_dict() for r in rows], cfg["_provenance"],
               cfg["run"]["output"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest: fast invariant battery with oracle comparisons

def _selftest_checks():
    from .kernels import gaussian_rbf, linear_on_box
    from .losses import LOSS_KINDS

    rng = np.random.default_rng(2024)

    def random_problem(n, radius=1.0):
        x = rng.normal(size=(n, 2))
        d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
        return BLProblem(DistanceMatrix(d), DiscreteMeasure(rng.dirichlet(np.ones(n))),
                         DiscreteMeasure(rng.dirichlet(np.ones(n))), radius=radius)

    def check_analytic():
        for dist in (0.1, 0.5, 1.0, 2.0, 10.0):
            prob = BLProblem(DistanceMatrix(np.array([[0.0, dist], [dist, 0.0]])),
                             DiscreteMeasure(np.array([1.0, 0.0])),
                             DiscreteMeasure(np.array([0.0, 1.0])))
            want = 2.0 * dist / (dist + 2.0)
            got = bl_distance(prob).value
            if abs(got - want) > 1e-7:
                return f"two-point value {got} != {want} at d={dist}"
        return None

    def check_lp_vs_oracle():
        for _ in range(15):
            prob = random_problem(3)
            lp = bl_distance(prob).value
            oracle = bl_distance_oracle(prob, 0.02)
            if lp < oracle - 1e-9 or abs(lp - oracle) > 0.05:
                return f"LP {lp} vs oracle {oracle}"
        return None

    def check_metric_axioms():
        for _ in range(20):
            n = int(rng.integers(2, 9))
            prob = random_problem(n)
            v_pq = bl_distance(prob).value
            v_qp = bl_distance(BLProblem(prob.d, prob.q, prob.p)).value
            if abs(v_pq - v_qp) > 1e-7:
                return f"asymmetry {v_pq} vs {v_qp}"
            r = DiscreteMeasure(rng.dirichlet(np.ones(n)))
            v_pr = bl_distance(BLProblem(prob.d, prob.p, r)).value
            v_rq = bl_distance(BLProblem(prob.d, r, prob.q)).value
            if v_pq > v_pr + v_rq + 1e-7:
                return "triangle inequality violated"
        return None

    def check_witness_and_scaling():
        for _ in range(10):
            prob = random_problem(int(rng.integers(2, 7)), radius=2.0)
            res = bl_distance(prob)
            f, b, lip = res.f_star, res.sup_bound, res.lip_bound
            if np.max(np.abs(f)) > b + 1e-9 or b + lip > prob.radius + 1e-9:
                return "witness violates ball constraints"
            diff = np.abs(f[:, None] - f[None, :]) - lip * prob.d.d
            if diff.max() > 1e-9:
                return "witness violates Lipschitz constraints"
            base = bl_distance(BLProblem(prob.d, prob.p, prob.q, radius=1.0)).value
            if abs(res.value - 2.0 * base) > 1e-9:
                return "seminorm scaling broken"
        return None

    def check_svm_bounds():
        for trial in range(20):
            kind = LOSS_KINDS[trial % len(LOSS_KINDS)]
            n = 8
            x = rng.normal(size=(n, 2))
            y = (rng.choice([-1.0, 1.0], n) if kind in ("hinge", "logistic")
                 else rng.normal(size=n))
            kern = gaussian_rbf(1.0) if trial % 2 else linear_on_box((-7, -7), (7, 7))
            loss = loss_from_name(kind, tau=0.3, epsilon=0.15)
            lam = float(rng.uniform(0.1, 2.0))
            prob = SvmProblem(Points(x, y), DiscreteMeasure(rng.dirichlet(np.ones(n))),
                              loss, kern, lam)
            sol = solve(prob)
            if np.max(np.abs(sol.f_values)) > sol.sup_norm_bound() + 1e-6:
                return f"sup-norm bound violated for {kind}"
            if abs(risk(sol, prob.weights)) > loss.lip ** 2 * kern.k_sup ** 2 / lam + 1e-6:
                return f"risk bound violated for {kind}"
        return None

    def check_svm_oracle():
        pts = Points(np.array([[0.0]]), np.array([1.0]))
        prob = SvmProblem(pts, DiscreteMeasure(np.array([1.0])),
                          loss_from_name("absolute"), gaussian_rbf(1.0), 0.25)
        sol = solve(prob)
        if abs(sol.f_values[0] - 1.0) > 1e-3 or abs(sol.objective + 0.75) > 1e-3:
            return f"1-point oracle mismatch: f={sol.f_values[0]}, J={sol.objective}"
        return None

    def check_risk_continuity():
        for _ in range(10):
            n = 6
            x = rng.normal(size=(n, 2))
            y = rng.normal(size=n)
            pts = Points(x, y)
            kern = gaussian_rbf(1.0)
            base = DiscreteMeasure(rng.dirichlet(np.ones(n)))
            q = contaminate(base, DiscreteMeasure.point_mass(0, n), 0.15)
            rep = risk_continuity_check(
                SvmProblem(pts, base, loss_from_name("absolute"), kern, 0.5),
                SvmProblem(pts, q, loss_from_name("absolute"), kern, 0.5))
            if rep.slack_sup < -1e-9 or rep.slack_rkhs < -1e-9:
                return f"negative slack {rep.slack_sup}, {rep.slack_rkhs}"
        return None

    def check_exact_bootstrap():
        pts = Points(rng.normal(size=(3, 2)), rng.normal(size=3))
        solver = SolverConfig(loss_from_name("absolute"), gaussian_rbf(1.0), 0.5)
        law = bootstrap_law_exact([0, 1], pts, PREDICTOR, solver)
        if not np.allclose(law.weights.w, [0.25, 0.5, 0.25]):
            return f"n=2 weights {law.weights.w}"
        mc1 = bootstrap_law_mc([0, 1, 2], pts, B=300, estimator=RISK,
                               cfg=solver, seed=7)
        mc2 = bootstrap_law_mc([0, 1, 2], pts, B=300, estimator=RISK,
                               cfg=solver, seed=7)
        if law_distance(mc1, mc2).value != 0.0:
            return "same-seed laws differ"
        return None

    def check_gc_mini():
        pts = Points(np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]]),
                     np.zeros(4))
        rows = gc_decay_probe(
            [DiscreteMeasure.uniform(4), DiscreteMeasure(np.array([0.4, 0.3, 0.2, 0.1]))],
            pts, n_grid=(10, 160), reps=20, seed=11)
        by = {(r.n, r.eps): r.max_fraction for r in rows}
        if by[(160, 0.1)] > by[(10, 0.1)]:
            return f"no decay: {by[(10, 0.1)]} -> {by[(160, 0.1)]}"
        for n in (10, 160):
            fr = [by[(n, lvl)] for lvl in GC_EPS_LEVELS]
            if not all(a >= b for a, b in zip(fr, fr[1:])):
                return f"fractions not nonincreasing in eps at n={n}"
        return None

    def check_euclidean_metric():
        pts = Points(rng.normal(size=(6, 3)), rng.normal(size=6))
        d = build_euclidean_space(pts, y_weight=1.0)
        report = validate_metric(d)
        if not report:
            return f"euclidean matrix failed: {report.reason}"
        sampled = sample(DiscreteMeasure.uniform(6), 40, 5)
        emp = empirical(sampled, 6)
        if abs(emp.w.sum() - 1.0) > 1e-12:
            return "empirical weights do not sum to 1"
        return None

    return [
        ("euclidean metric + empirical measure", check_euclidean_metric),
        ("two-point analytic distance", check_analytic),
        ("LP vs grid oracle", check_lp_vs_oracle),
        ("metric axioms on random instances", check_metric_axioms),
        ("witness feasibility + radius scaling", check_witness_and_scaling),
        ("fitted-function bounds, all losses", check_svm_bounds),
        ("single-point training oracle", check_svm_oracle),
        ("risk continuity inequality", check_risk_continuity),
        ("exact bootstrap weights + determinism", check_exact_bootstrap),
        ("empirical-measure decay table", check_gc_mini),
    ]


def _cmd_selftest() -> int:
    failures = 0
    for name, fn in _selftest_checks():
        try:
            problem = fn()
        except SolverError as exc:
            sys.stdout.write(f"[FAIL] {name}: solver error {exc}\n")
            return EXIT_SOLVER
        if problem is None:
            sys.stdout.write(f"[ ok ] {name}\n")
        else:
            sys.stdout.write(f"[FAIL] {name}: {problem}\n")
            failures += 1
    if failures:
        sys.stdout.write(f"{failures} selftest check(s) failed\n")
        return EXIT_INVARIANT
    sys.stdout.write("all selftest checks passed\n")
    return EXIT_OK


# ---------------------------------------------------------------------------

_HANDLERS = {
    "blmetric": _cmd_blmetric,
    "svm-train": _cmd_svm_train,
    "bootstrap": _cmd_bootstrap,
    "robustness": _cmd_robustness,
    "gc-decay": _cmd_gc_decay,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bootstab",
        description="bounded-Lipschitz distances, shifted-loss kernel machines, "
                    "and bootstrap stability probes",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        if name == "selftest":
            p.add_argument("config", nargs="?", default=None)
        else:
            p.add_argument("config")
    args = parser.parse_args(argv)

    try:
        if args.subcommand == "selftest":
            return _cmd_selftest()
        cfg = load_config(args.config, args.subcommand)
        return _HANDLERS[args.subcommand](cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        if exc.details:
            sys.stderr.write(f"  details: {exc.details}\n")
        return EXIT_CONFIG
    except InvariantViolation as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        return EXIT_INVARIANT
    except SolverError as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER
    except BootstabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
