"""Dense tableau simplex for small linear programs.

Solves   maximize c'x  subject to  A x <= b,  x >= 0   with  b >= 0,
so the all-slack basis is feasible and no phase-1 is needed.  That is
exactly the shape of the bounded-Lipschitz LP after its change of
variables (see ``bl.py``).

Pivoting uses Dantzig's rule for speed and switches permanently to
Bland's anti-cycling rule once the objective stalls, which guarantees
termination on the (highly degenerate) metric LPs.  Because rank-one
tableau updates accumulate roundoff across degenerate pivots, apparent
optimality is never trusted directly: the tableau is refactorized from
the current basis (one exact linear solve) and pivoting resumes if the
fresh reduced costs disagree.  The returned solution always comes from a
refactorized tableau.  Dependency-free and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SolverError

REDUCED_COST_TOL = 1e-9
PIVOT_TOL = 1e-9
STALL_LIMIT = 200          # pivots without objective progress before Bland's rule
ITERATION_FACTOR = 50      # cap = factor * (structural + slack variables)
MAX_REFACTORIZATIONS = 60


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    value: float
    iterations: int
    used_bland: bool
    refactorizations: int


def _rebuild(A_full: np.ndarray, b: np.ndarray, c_full: np.ndarray,
             basis: np.ndarray):
    """Recompute the tableau exactly from the basis (drops accumulated error)."""
    B = A_full[:, basis]
    try:
        identity = np.eye(B.shape[0])
        B_inv = np.linalg.solve(B, identity)
    except np.linalg.LinAlgError:
        raise SolverError("singular simplex basis during refactorization") from None
    body = B_inv @ A_full
    rhs = B_inv @ b
    zrow = c_full[basis] @ body - c_full
    value = float(c_full[basis] @ rhs)
    return body, rhs, zrow, value


def solve_max(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> SimplexResult:
    """Maximize c'x s.t. Ax <= b, x >= 0, assuming b >= 0 componentwise."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, nv = A.shape
    if b.shape != (m,) or c.shape != (nv,):
        raise SolverError("inconsistent LP dimensions", A=A.shape, b=b.shape, c=c.shape)
    if b.size and b.min() < 0:
        raise SolverError("solve_max requires b >= 0 (feasible slack basis)",
                          min_b=float(b.min()))

    A_full = np.concatenate([A, np.eye(m)], axis=1)
    c_full = np.concatenate([c, np.zeros(m)])
    ncols = nv + m + 1
    T = np.zeros((m + 1, ncols))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :nv] = -c                      # reduced costs; optimal when all >= 0
    basis = np.arange(nv, nv + m)

    max_iter = ITERATION_FACTOR * (nv + m)
    bland = False
    stall = 0
    last_value = 0.0
    it = 0
    refactors = 0
    final_rhs = None
    final_value = 0.0
    while True:
        red = T[m, :-1]
        if bland:
            negs = np.nonzero(red < -REDUCED_COST_TOL)[0]
            col = int(negs[0]) if negs.size else -1
        else:
            col = int(np.argmin(red))
            if red[col] >= -REDUCED_COST_TOL:
                col = -1
        if col < 0:
            # apparent optimum: refactorize and either accept or resume
            body, rhs, zrow, value = _rebuild(A_full, b, c_full, basis)
            refactors += 1
            if zrow.min() >= -REDUCED_COST_TOL:
                final_rhs = rhs
                final_value = value
                break
            if refactors > MAX_REFACTORIZATIONS:
                raise SolverError(
                    "simplex failed to certify optimality after repeated "
                    "refactorizations",
                    refactorizations=refactors, objective=value,
                )
            T[:m, :-1] = body
            T[:m, -1] = np.maximum(rhs, 0.0)
            T[m, :-1] = zrow
            T[m, -1] = value
            continue

        it += 1
        if it > max_iter:
            raise SolverError(
                "simplex iteration cap exceeded",
                iterations=it, cap=max_iter, objective=float(T[m, -1]),
                bland=bland,
            )
        colvals = T[:m, col]
        pos = colvals > PIVOT_TOL
        if not np.any(pos):
            raise SolverError("LP is unbounded", column=col)
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / colvals[pos]
        best = ratios.min()
        tied = np.nonzero(ratios <= best + PIVOT_TOL * (1.0 + best))[0]
        if bland:
            # Bland: leaving variable with the smallest index
            row = int(tied[np.argmin(basis[tied])])
        else:
            # stability: largest pivot element among the tied rows
            row = int(tied[np.argmax(colvals[tied])])

        piv = T[row, col]
        T[row] /= piv
        coef = T[:, col].copy()
        coef[row] = 0.0
        T -= np.outer(coef, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col

        value = float(T[m, -1])
        if not bland:
            if value > last_value + 1e-12:
                stall = 0
                last_value = value
            else:
                stall += 1
                if stall >= STALL_LIMIT:
                    bland = True

    x = np.zeros(nv + m)
    x[basis] = np.maximum(final_rhs, 0.0)   # clip degenerate -1e-16 noise
    return SimplexResult(x=x[:nv], value=final_value, iterations=it,
                         used_bland=bland, refactorizations=refactors)
