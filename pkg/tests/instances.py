"""Shared synthetic instances used across the test modules."""

import numpy as np

from bootstab import (DiscreteMeasure, Points, SolverConfig, gaussian_rbf,
                      hinge)


def random_bl_problem(rng, n, radius=1.0, dim=2):
    from bootstab import BLProblem, DistanceMatrix

    x = rng.normal(size=(n, dim))
    d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    return BLProblem(
        DistanceMatrix(d),
        DiscreteMeasure(rng.dirichlet(np.ones(n))),
        DiscreteMeasure(rng.dirichlet(np.ones(n))),
        radius=radius,
    )


def two_cluster_instance(seed=0):
    """10-point binary classification support with a flipped-label outlier.

    The contamination direction is the point mass on the outlier, so mixing
    toward it plants mislabeled mass inside the positive cluster.
    """
    rng = np.random.default_rng(seed)
    x = np.concatenate([
        rng.normal([-1.0, 0.0], 0.35, size=(5, 2)),
        rng.normal([+1.0, 0.0], 0.35, size=(4, 2)),
        [[1.2, 0.2]],
    ])
    y = np.array([-1.0] * 5 + [1.0] * 4 + [-1.0])
    w = np.array([0.12, 0.1, 0.1, 0.1, 0.1, 0.12, 0.1, 0.1, 0.1, 0.06])
    points = Points(x, y)
    base = DiscreteMeasure(w / w.sum())
    direction = DiscreteMeasure.point_mass(9, 10)
    return points, base, direction


def hinge_solver(lam=0.1, gamma=1.0):
    return SolverConfig(hinge(), gaussian_rbf(gamma), lam=lam)


def well_separated_square(side=5.0):
    x = np.array([[0.0, 0.0], [side, 0.0], [0.0, side], [side, side]])
    return Points(x, np.zeros(4))
