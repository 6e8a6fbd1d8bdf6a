"""Lattices, multilattices and arithmetic on the torus R^n / Omega."""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError
from .geom import EPS_GEOM, ConvexBody, norm

MAX_GRID_POINTS = 10**8
_SNAP = 1e-12


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice generated by the columns of ``basis``."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise InputError("basis must be a square matrix")
        if abs(np.linalg.det(B)) <= EPS_GEOM:
            raise InputError("basis is singular")
        object.__setattr__(self, "basis", B)

    @classmethod
    def from_generators(cls, generators):
        """Build from a list of generator vectors (rows become columns)."""
        return cls(np.asarray(generators, dtype=float).T)

    @classmethod
    def integer(cls, n, spacing=1.0):
        return cls(spacing * np.eye(n))

    @classmethod
    def hexagonal(cls, spacing=1.0):
        return cls(spacing * np.array([[1.0, 0.5], [0.0, math.sqrt(3) / 2]]))

    @property
    def dimension(self):
        return self.basis.shape[0]

    @cached_property
    def covolume(self):
        return float(abs(np.linalg.det(self.basis)))

    @cached_property
    def inverse(self):
        return np.linalg.inv(self.basis)

    @cached_property
    def _row_norms(self):
        return np.linalg.norm(self.inverse, axis=1)

    @cached_property
    def half_box_radius(self):
        """Largest Euclidean length of a vector with basis coordinates in [-1/2, 1/2]."""
        n = self.dimension
        corners = np.array(list(itertools.product([-0.5, 0.5], repeat=n)))
        return float(np.linalg.norm(corners @ self.basis.T, axis=1).max())

    def coords(self, points):
        return np.asarray(points, dtype=float) @ self.inverse.T

    def points(self, coords):
        return np.asarray(coords, dtype=float) @ self.basis.T

    def scaled(self, c):
        return Lattice(self.basis * c)

    def shifts_within(self, radius):
        """Lattice vectors w (ambient, plus integer coords) such that every u with
        |u| <= radius equals v + w for some v in the centred half-box.

        Ordered by Euclidean length, then lexicographically by coordinates.
        """
        n = self.dimension
        box = np.floor(0.5 + self._row_norms * radius + 1e-12).astype(int)
        ranges = [range(-b, b + 1) for b in box]
        Z = np.array(list(itertools.product(*ranges)), dtype=float).reshape(-1, n)
        W = Z @ self.basis.T
        lengths = np.round(np.linalg.norm(W, axis=1), 12)
        order = np.lexsort(np.vstack([Z.T[::-1], lengths]))
        return W[order], Z[order].astype(int)

    def to_list(self):
        """Generators as a list of vectors."""
        return self.basis.T.tolist()


@dataclass(frozen=True, eq=False)
class Multilattice:
    """Union of translates ``Omega + x_i``; translates are stored reduced."""

    base: Lattice
    translates: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.translates, dtype=float))
        if X.shape[0] < 1 or X.shape[1] != self.base.dimension:
            raise InputError("need at least one translate of the lattice dimension")
        torus = Torus(self.base)
        X = reduce(torus, X)
        if len(X) > 1:
            K = _euclid(self.base.dimension)
            for i in range(len(X)):
                d = torus_distance(torus, K, X[i], X[i + 1 :])
                if d.size and d.min() <= EPS_GEOM:
                    raise InputError(f"translates {i} and {i + 1 + int(d.argmin())} coincide modulo the lattice")
        object.__setattr__(self, "translates", X)

    @property
    def q(self):
        return len(self.translates)

    @property
    def dimension(self):
        return self.base.dimension

    def scaled(self, c):
        return Multilattice(self.base.scaled(c), self.translates * c)


def _euclid(n):
    return ConvexBody.ball(n)


@dataclass(frozen=True, eq=False)
class Torus:
    """Quotient ``R^n / Omega`` with half-open parallelepiped fundamental domain."""

    lattice: Lattice

    @property
    def dimension(self):
        return self.lattice.dimension

    def image_shifts(self, K):
        """Lattice shifts sufficient for exact minimum-image K-distances.

        After centring a difference v to basis coordinates in [-1/2, 1/2],
        the minimiser u = v + w has |u| <= (R/r)|v|, R and r being the
        Euclidean circum- and in-radius of K; the coefficient box follows.
        For the ball, shifts that cannot shorten any centred vector are dropped.
        """
        cache = self.__dict__.setdefault("_shift_cache", {})
        key = (K.is_euclidean, round(K.distortion, 12))
        if key not in cache:
            L = self.lattice
            W = L.shifts_within(K.distortion * L.half_box_radius)[0]
            if K.is_euclidean:
                # |v + w| < |v| for some centred v iff h_box(w) > |w|^2 / 2
                h = 0.5 * np.abs(W @ L.basis).sum(axis=1)
                W = W[h > 0.5 * (W * W).sum(axis=1) + 1e-12 * (1 + h) - 1e-15]
                W = np.vstack([np.zeros((1, L.dimension)), W[np.linalg.norm(W, axis=1) > 0]])
            cache[key] = W
        return cache[key]


def reduce(T, p):
    """Canonical representative with basis coordinates in [0, 1).

    Coordinates within rounding of 0 or 1 snap to 0; a lattice vector is
    subtracted, so already reduced points come back unchanged.
    """
    L = T.lattice
    p = np.asarray(p, dtype=float)
    return p - L.points(np.floor(L.coords(p) + _SNAP))


def centered(T, d):
    """Representative of d with basis coordinates in [-1/2, 1/2]."""
    L = T.lattice
    z = L.coords(d)
    return L.points(z - np.rint(z))


def torus_distance(T, K, p, q):
    """Quotient K-distance ``min_w ||p - q + w||_K``; broadcasts over leading axes."""
    d = centered(T, np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    W = T.image_shifts(K)
    vals = norm(K, d[..., None, :] + W)
    return vals.min(axis=-1)


def sample_grid(T, resolution):
    """``resolution**n`` images of the uniform basis-coordinate grid.

    The first coordinate varies fastest.
    """
    n = T.dimension
    if int(resolution) != resolution or resolution < 2:
        raise InputError("grid resolution must be an integer >= 2")
    resolution = int(resolution)
    if resolution**n > MAX_GRID_POINTS:
        raise InputError(f"grid of {resolution}^{n} points exceeds the {MAX_GRID_POINTS} guard")
    return T.lattice.points(grid_coords(n, resolution))


def grid_coords(n, resolution):
    idx = np.indices((resolution,) * n).reshape(n, -1).T[:, ::-1]
    return idx / resolution
