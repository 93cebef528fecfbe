"""
Exact finite computations on full-rank lattices given by a generator matrix.
The generator's columns are the basis vectors, so a lattice point is t = M @ omega
for an integer coefficient vector omega.

Short vectors are enumerated depth-first over the coefficients. Each axis is
clipped to a box derived from the rows of M^-1 (|omega_i| <= |row_i(M^-1)| * |t|),
and partial norms taken from the QR factor of M reject branches as soon as they
exceed the bound. No lattice reduction is done; at n <= 12 this is fast enough
and provably complete.
"""

import dataclasses
import functools
import logging
import math
import typing

import numpy as np

from rician_lattice_analyzer.core import (EPS_DET, EPS_DIV, EPS_MIN, EPS_RANK, MAX_ENUMERATION_DIM,
                                          DimensionTooLarge, InvalidBound, NonInvertibleGenerator)

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class LatticeVector:
    """A nonzero lattice vector t = M @ coords with its norms"""
    coords: typing.Tuple[int, ...]
    point: np.ndarray
    norm_sq: float
    l1: float
    l2: float
    l4: float
    diversity: int


@dataclasses.dataclass(frozen=True, eq=False)
class ShortVectorReport:
    """Lattice vectors with |t|^2 <= bound, one representative per +-pair"""
    bound: float
    vectors: typing.Tuple[LatticeVector, ...]
    min_norm_sq: float
    minimal_vectors: typing.Tuple[LatticeVector, ...]

    def __len__(self):
        return len(self.vectors)

    def coords(self):
        return np.array([v.coords for v in self.vectors], dtype=np.int64).reshape(-1, self._dim())

    def points(self):
        return np.array([v.point for v in self.vectors], dtype=float).reshape(-1, self._dim())

    def _dim(self):
        return len(self.vectors[0].coords) if self.vectors else 0


class Lattice:
    """
    A full-rank lattice in R^n. The generator is copied and frozen,
    so a Lattice can be shared between threads.
    """

    def __init__(self, generator, name=None):
        m = np.array(generator, dtype=float)
        if m.ndim == 1 and m.size == 1:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NonInvertibleGenerator(f"Generator must be a square matrix, got shape {m.shape}")
        det = float(np.linalg.det(m))
        if not abs(det) > EPS_DET:
            raise NonInvertibleGenerator(f"Generator is singular: |det M| = {abs(det):.3e}")
        m.setflags(write=False)
        self.generator = m
        self.n = m.shape[0]
        self.volume = abs(det)
        self.name = name or f"lattice-{self.n}d"
        self._short_vector_reports = {}

    @classmethod
    def from_rows(cls, basis_vectors, name=None):
        """Build from a list of basis vectors (each becomes a generator column)"""
        return cls(np.array(basis_vectors, dtype=float).T, name=name)

    def __repr__(self):
        return f"Lattice(name={self.name!r}, n={self.n}, volume={self.volume:.6g})"

    @functools.cached_property
    def inverse(self):
        inv = np.linalg.inv(self.generator)
        inv.setflags(write=False)
        return inv

    @functools.cached_property
    def gram(self):
        g = self.generator.T @ self.generator
        g.setflags(write=False)
        return g

    @functools.cached_property
    def _triangular(self):
        # |M w| = |R w| for M = QR
        _, r = np.linalg.qr(self.generator)
        r.setflags(write=False)
        return r

    def scaled_to_unit_volume(self):
        return Lattice(self.generator * self.volume ** (-1.0 / self.n), name=f"{self.name}-unit")

    def point(self, coords):
        return self.generator @ np.asarray(coords, dtype=float)

    def coefficient_box(self, bound):
        return np.ceil(math.sqrt(bound) * np.linalg.norm(self.inverse, axis=1)).astype(np.int64)

    def short_vectors(self, bound):
        report = self._short_vector_reports.get(bound)
        if report is None:
            report = self._short_vector_reports.setdefault(bound, self._enumerate(bound))
        return report

    def _enumerate(self, bound):
        if not bound > 0:
            raise InvalidBound(f"Enumeration bound must be positive, got {bound}")
        if self.n > MAX_ENUMERATION_DIM:
            raise DimensionTooLarge(f"Enumeration is limited to n <= {MAX_ENUMERATION_DIM}, got n = {self.n}")

        box = self.coefficient_box(bound)
        limit = bound * (1 + EPS_MIN)
        logger.debug(f"Enumerating {self.name} up to |t|^2 <= {bound} inside box {box.tolist()}")
        coeffs = _enumerate_coefficients(self._triangular, box, limit)

        points = coeffs @ self.generator.T
        norms_sq = np.einsum('ij,ij->i', points, points)
        first_nonzero = coeffs[np.arange(len(coeffs)), np.argmax(coeffs != 0, axis=1)]
        keep = (first_nonzero > 0) & (norms_sq <= limit)
        coeffs, points, norms_sq = coeffs[keep], points[keep], norms_sq[keep]

        vectors = [_make_vector(c, p, s) for c, p, s in zip(coeffs, points, norms_sq)]
        vectors.sort(key=lambda v: (round(v.norm_sq, 9), tuple(-c for c in v.coords)))

        if vectors:
            min_norm_sq = vectors[0].norm_sq
            minimal = tuple(v for v in vectors if v.norm_sq <= min_norm_sq * (1 + EPS_MIN))
        else:
            min_norm_sq = math.inf
            minimal = ()
        logger.debug(f"Found {len(vectors)} representatives, minimal squared norm {min_norm_sq}")
        return ShortVectorReport(bound=bound, vectors=tuple(vectors), min_norm_sq=min_norm_sq,
                                 minimal_vectors=minimal)

    def minimal_vectors(self):
        return self._minimal_report

    @functools.cached_property
    def _minimal_report(self):
        # Some basis column is a lattice vector, so its norm bounds the minimum
        initial_bound = float(np.min(np.einsum('ij,ij->j', self.generator, self.generator)))
        report = self.short_vectors(initial_bound)
        return ShortVectorReport(bound=report.min_norm_sq, vectors=report.minimal_vectors,
                                 min_norm_sq=report.min_norm_sq, minimal_vectors=report.minimal_vectors)


def _enumerate_coefficients(r, box, radius_sq):
    """All integer w inside the box with |R w|^2 <= radius_sq, both signs, zero included"""
    n = r.shape[0]
    omega = np.zeros(n, dtype=np.int64)
    found = []

    def descend(i, partial):
        remaining = radius_sq - partial
        if remaining < 0:
            return
        shift = float(r[i, i + 1:] @ omega[i + 1:])
        rho = math.sqrt(remaining)
        a = (-shift - rho) / r[i, i]
        b = (-shift + rho) / r[i, i]
        lo = max(math.ceil(min(a, b) - 1e-9), -int(box[i]))
        hi = min(math.floor(max(a, b) + 1e-9), int(box[i]))
        for value in range(lo, hi + 1):
            omega[i] = value
            if i == 0:
                found.append(omega.copy())
            else:
                y = r[i, i] * value + shift
                descend(i - 1, partial + y * y)
        omega[i] = 0

    descend(n - 1, 0.0)
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    return np.array(found, dtype=np.int64)


def _make_vector(coords, point, norm_sq):
    l1, l2, l4 = norms(point)
    return LatticeVector(coords=tuple(int(c) for c in coords), point=point, norm_sq=float(norm_sq),
                         l1=l1, l2=l2, l4=l4, diversity=diversity(point))


def norms(vector):
    """Returns the (L1, L2, L4) norms of a real vector"""
    v = np.asarray(vector, dtype=float)
    return (float(np.linalg.norm(v, 1)), float(np.linalg.norm(v, 2)), float(np.linalg.norm(v, 4)))


def norm_chain_holds(vector, tol=1e-12):
    """|t|_4 <= |t|_2 <= |t|_1 <= sqrt(n) |t|_2"""
    l1, l2, l4 = norms(vector)
    n = np.asarray(vector).size
    scale = tol * max(l1, 1.0)
    return l4 <= l2 + scale and l2 <= l1 + scale and l1 <= math.sqrt(n) * l2 + scale


def diversity(vector, tol=EPS_DIV):
    """Number of components with |t_i| > tol"""
    return int(np.count_nonzero(np.abs(np.asarray(vector, dtype=float)) > tol))


def enumerate_short_vectors(lattice, bound):
    return lattice.short_vectors(float(bound))


def minimal_vectors(lattice):
    return lattice.minimal_vectors()


def is_well_rounded(lattice):
    report = lattice.minimal_vectors()
    if not report.minimal_vectors:
        return False
    points = report.points()
    spanning = np.vstack([points, -points])
    singular_values = np.linalg.svd(spanning, compute_uv=False)
    rank = int(np.count_nonzero(singular_values > EPS_RANK * singular_values[0]))
    return rank == lattice.n


def min_l1_norm(lattice, search_bound=None):
    """
    Minimal L1 norm over the nonzero lattice vectors.

    Any t with |t|_1 <= a has |t|_2^2 <= a^2, so once a candidate of L1 norm a is
    known, enumerating up to a^2 is complete. The search is widened if the given
    bound was too small for a non-unit-volume lattice.
    """
    n = lattice.n
    if search_bound is None:
        search_bound = float(n)
    if search_bound < n:
        raise InvalidBound(f"search_bound must be >= n = {n}, got {search_bound}")
    report = lattice.short_vectors(float(search_bound))
    best = min((v.l1 for v in report.vectors), default=math.inf)
    if best ** 2 > search_bound:
        column_l1 = float(np.min(np.abs(lattice.generator).sum(axis=0)))
        best = min(best, column_l1)
        report = lattice.short_vectors(best ** 2)
        best = min(v.l1 for v in report.vectors)
    return best
