"""Finite samples from a compact metric space and their ground metric.

Everything downstream (measures, LPs, kernel machines) operates on a
finite set of points ``z_i = (x_i, y_i)`` and the matrix of pairwise
ground distances between them.  Compactness is enforced operationally:
supports are finite and coordinates must be finite reals; an optional
declared bounding box is metadata used for sanity checks only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataFormatError, InvariantViolation
from .validation import check_finite_array, check_square_matrix

TRIANGLE_TOL = 1e-9

# Exhaustive triple enumeration is O(n^3); above this size the validator
# falls back to a seeded sample of triples.
EXHAUSTIVE_TRIANGLE_LIMIT = 200


@dataclass(frozen=True)
class Points:
    """A finite list of (x, y) points with shared feature dimension.

    x : (n, d) float array of feature coordinates
    y : (n,) float array of responses
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = check_finite_array(self.x, "x", ndim=2)
        y = check_finite_array(self.y, "y", ndim=1)
        if x.shape[0] != y.shape[0]:
            raise DataFormatError(
                f"x has {x.shape[0]} rows but y has {y.shape[0]} entries",
                x_rows=int(x.shape[0]), y_rows=int(y.shape[0]),
            )
        if x.shape[0] == 0:
            raise DataFormatError("point set must be nonempty")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def subset(self, indices) -> "Points":
        idx = np.asarray(indices, dtype=np.intp)
        return Points(self.x[idx].copy(), self.y[idx].copy())

    @classmethod
    def from_lists(cls, xs, ys) -> "Points":
        x = np.atleast_2d(np.asarray(xs, dtype=float))
        if x.ndim == 2 and x.shape[0] == 1 and len(np.shape(xs)) == 1:
            # a flat list of scalars is a 1-feature column, not one row
            x = x.T
        return cls(x, np.asarray(ys, dtype=float))


@dataclass(frozen=True)
class ValidationReport:
    """Truthy iff the check passed; otherwise names the violated condition."""

    ok: bool
    reason: str | None = None
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative pairwise distances with zero diagonal."""

    d: np.ndarray
    validated: bool = field(default=False, compare=False)

    def __post_init__(self):
        arr = check_square_matrix(self.d)
        object.__setattr__(self, "d", arr)
        self.d.setflags(write=False)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @classmethod
    def from_array(cls, d, validate: bool = True, tol: float = TRIANGLE_TOL) -> "DistanceMatrix":
        mat = cls(np.array(d, dtype=float))
        if validate:
            report = validate_metric(mat, tol=tol)
            if not report:
                raise InvariantViolation(
                    f"distance matrix is not a metric: {report.reason}",
                    reason=report.reason, witness=report.witness,
                )
            object.__setattr__(mat, "validated", True)
        return mat


def build_euclidean_space(points: Points, y_weight: float = 1.0) -> DistanceMatrix:
    """Weighted-Euclidean product metric on the (x, y) points.

    d[i][j] = sqrt(||x_i - x_j||^2 + y_weight * (y_i - y_j)^2).
    ``y_weight`` trades off how far apart two points with equal features
    but different responses are; 0 collapses the response coordinate.
    """
    if not np.isfinite(y_weight) or y_weight < 0:
        raise DataFormatError(f"y_weight must be >= 0, got {y_weight}", value=y_weight)
    dx = points.x[:, None, :] - points.x[None, :, :]
    sq = np.einsum("ijk,ijk->ij", dx, dx)
    dy = points.y[:, None] - points.y[None, :]
    sq = sq + y_weight * dy * dy
    np.maximum(sq, 0.0, out=sq)
    d = np.sqrt(sq)
    # exact symmetry and zero diagonal despite float noise
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d, validated=True)


def validate_metric(
    d,
    tol: float = TRIANGLE_TOL,
    sample_triples: int = 20000,
    sample_seed: int = 0,
) -> ValidationReport:
    """Check symmetry, zero diagonal, nonnegativity and the triangle inequality.

    For n <= 200 all triples are enumerated; larger matrices are checked on
    a seeded random sample of triples (documented fallback; the exhaustive
    check is cubic).
    """
    arr = d.d if isinstance(d, DistanceMatrix) else check_square_matrix(d)
    n = arr.shape[0]
    diag = np.abs(np.diagonal(arr))
    if diag.size and diag.max() > tol:
        i = int(np.argmax(diag))
        return ValidationReport(False, "nonzero diagonal", (i, i))
    asym = np.abs(arr - arr.T)
    if asym.size and asym.max() > tol:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        return ValidationReport(False, "asymmetric", (int(i), int(j)))
    if arr.size and arr.min() < -tol:
        i, j = np.unravel_index(int(np.argmin(arr)), arr.shape)
        return ValidationReport(False, "negative distance", (int(i), int(j)))
    if n <= 2:
        return ValidationReport(True)

    if n <= EXHAUSTIVE_TRIANGLE_LIMIT:
        # slack[i,k] = min_j (d[i,j] + d[j,k]) - d[i,k]; negative => violated
        through = arr[:, :, None] + arr[None, :, :]   # [i, j, k]
        best = through.min(axis=1)
        slack = best - arr
        if slack.min() < -tol:
            i, k = np.unravel_index(int(np.argmin(slack)), slack.shape)
            j = int(np.argmin(through[i, :, k]))
            return ValidationReport(
                False, "triangle inequality violated", (int(i), j, int(k)),
            )
        return ValidationReport(True)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(sample_seed)))
    ijk = rng.integers(0, n, size=(sample_triples, 3))
    lhs = arr[ijk[:, 0], ijk[:, 2]]
    rhs = arr[ijk[:, 0], ijk[:, 1]] + arr[ijk[:, 1], ijk[:, 2]]
    bad = np.nonzero(lhs - rhs > tol)[0]
    if bad.size:
        t = tuple(int(v) for v in ijk[bad[0]])
        return ValidationReport(False, "triangle inequality violated (sampled)", t)
    return ValidationReport(True)


def load_points_csv(path) -> Points:
    """Read a dataset CSV with header columns ``x0..x{d-1}, y``.

    Any non-numeric cell is a hard error naming the offending row and
    column (rows counted from 1 at the header).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        feature_cols = [h for h in header if h != "y"]
        expected = [f"x{i}" for i in range(len(feature_cols))]
        if feature_cols != expected or "y" not in header:
            raise DataFormatError(
                f"{path}: header must be x0..x{{d-1}},y, got {header}",
                header=header,
            )
        y_pos = header.index("y")
        xs, ys = [], []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}",
                    row=row_no,
                )
            vals = []
            for col_no, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: non-numeric cell {cell!r} at row {row_no}, "
                        f"column {header[col_no]!r}",
                        row=row_no, column=header[col_no], cell=cell,
                    ) from None
            ys.append(vals[y_pos])
            xs.append([v for i, v in enumerate(vals) if i != y_pos])
    if not xs:
        raise DataFormatError(f"{path}: no data rows")
    return Points(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
