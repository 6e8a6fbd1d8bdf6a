"""Convex bodies, norms, support functions and small convex polytopes.

Everything works in double precision with one absolute tolerance
``EPS_GEOM`` on inputs normalised to unit lattice spacing. Polytopes are
limited to dimension 4; vertex enumeration is brute force over
constraint n-subsets, which is plenty for the ~60 halfspaces that show up
here.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import ConstructionError, InputError, UnsupportedError
from .lp import solve_lp

EPS_GEOM = 1e-9
MAX_POLY_DIM = 4

BALL = "ball"
POLYTOPE = "polytope"


def _affine_rank(points, tol=EPS_GEOM):
    points = np.atleast_2d(points)
    if len(points) <= 1:
        return 0
    diffs = points[1:] - points[0]
    s = np.linalg.svd(diffs, compute_uv=False)
    return int((s > tol * max(1.0, s.max())).sum())


def _dedupe_points(points, tol=EPS_GEOM):
    """Greedy clustering in lexicographic order; keeps the first of each cluster."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return points
    order = np.lexsort(points.T[::-1])
    kept = []
    for i in order:
        p = points[i]
        if not any(np.abs(p - q).max() <= tol for q in kept):
            kept.append(p)
    return np.array(kept)


def hull_facets(points):
    """Unit-normal H-representation ``(normals, offsets)`` of conv(points).

    Coplanar triangulated facets reported by Qhull are merged.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[1]
    if n == 1:
        lo, hi = points.min(), points.max()
        return np.array([[1.0], [-1.0]]), np.array([hi, -lo])
    hull = ConvexHull(points)
    eq = hull.equations
    normals, offsets = eq[:, :-1], -eq[:, -1]
    scale = np.linalg.norm(normals, axis=1)
    normals, offsets = normals / scale[:, None], offsets / scale
    key = np.hstack([normals, offsets[:, None]])
    uniq = _dedupe_points(key, tol=1e-7)
    return uniq[:, :-1].copy(), uniq[:, -1].copy()


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Centrally symmetric convex body K defining the norm ``||.||_K``.

    ``vertices`` are the unscaled polytope vertices; the body itself is
    ``scale * conv(vertices)`` (or ``scale * B^n`` for the ball).
    """

    dimension: int
    kind: str = BALL
    vertices: np.ndarray | None = None
    scale: float = 1.0
    normals: np.ndarray | None = field(default=None, repr=False)
    offsets: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise InputError("dimension must be >= 1")
        if not self.scale > 0:
            raise InputError("scale must be positive")
        if self.kind == BALL:
            return
        if self.kind != POLYTOPE:
            raise InputError(f"unknown body kind {self.kind!r}")
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != self.dimension:
            raise InputError("vertex array must have shape (m, dimension)")
        if self.dimension > MAX_POLY_DIM:
            raise UnsupportedError(f"polytope bodies limited to n <= {MAX_POLY_DIM}")
        for v in V:
            if np.abs(V + v).max(axis=1).min() > EPS_GEOM:
                raise InputError(f"body is not centrally symmetric: -{v.tolist()} missing")
        normals, offsets = hull_facets(V)
        if offsets.min() <= EPS_GEOM:
            raise InputError("origin is not strictly interior to the body")
        if self.dimension > 1:
            if len(ConvexHull(V).vertices) != len(_dedupe_points(V)) or len(_dedupe_points(V)) != len(V):
                raise InputError("vertex list is redundant")
        elif len(V) != 2:
            raise InputError("vertex list is redundant")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets * self.scale)

    @classmethod
    def ball(cls, n, scale=1.0):
        return cls(n, BALL, None, float(scale))

    @classmethod
    def polytope(cls, vertices, scale=1.0):
        V = np.asarray(vertices, dtype=float)
        return cls(V.shape[1], POLYTOPE, V, float(scale))

    @classmethod
    def cube(cls, n, scale=1.0):
        return cls.polytope(np.array(list(itertools.product([-1.0, 1.0], repeat=n))), scale)

    @classmethod
    def cross_polytope(cls, n, scale=1.0):
        eye = np.eye(n)
        return cls.polytope(np.vstack([eye, -eye]), scale)

    @property
    def is_euclidean(self):
        return self.kind == BALL

    @property
    def inradius(self):
        """Euclidean radius of the largest ball about 0 inside K."""
        return self.scale if self.is_euclidean else float(self.offsets.min())

    @property
    def circumradius(self):
        """Euclidean radius of the smallest ball about 0 containing K."""
        if self.is_euclidean:
            return self.scale
        return float(self.scale * np.linalg.norm(self.vertices, axis=1).max())

    @property
    def distortion(self):
        return self.circumradius / self.inradius

    def volume(self):
        n = self.dimension
        if self.is_euclidean:
            return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * self.scale**n
        return polytope_volume(self.vertices * self.scale)

    def scaled(self, c):
        if self.is_euclidean:
            return ConvexBody.ball(self.dimension, self.scale * c)
        return ConvexBody.polytope(self.vertices, self.scale * c)

    def to_dict(self):
        d = {"kind": self.kind, "n": self.dimension, "scale": self.scale}
        if not self.is_euclidean:
            d["vertices"] = self.vertices.tolist()
        return d

    @classmethod
    def from_dict(cls, d, n=None):
        kind = d.get("kind", BALL)
        scale = float(d.get("scale", 1.0))
        if kind == BALL:
            dim = int(d.get("n", n if n is not None else 0))
            return cls.ball(dim, scale)
        if kind == "cube":
            return cls.cube(int(d.get("n", n)), scale)
        if kind == "cross":
            return cls.cross_polytope(int(d.get("n", n)), scale)
        if kind == POLYTOPE:
            return cls.polytope(d["vertices"], scale)
        raise InputError(f"unknown body kind {kind!r}")

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.dimension:
            raise InputError(f"expected vectors of dimension {self.dimension}, got {v.shape[-1]}")
        return v


def norm(K, v):
    """Minkowski functional ``inf{t >= 0 : v in tK}``; vectorised over the last axis."""
    v = K._check(v)
    if K.is_euclidean:
        return np.linalg.norm(v, axis=-1) / K.scale
    return np.max(v @ (K.normals / K.offsets[:, None]).T, axis=-1)


def support(K, a):
    """Support function ``h_K(a) = max_{u in K} a.u``; vectorised over the last axis."""
    a = K._check(a)
    length = np.linalg.norm(a, axis=-1)
    if np.any(length == 0):
        raise InputError("support function needs a nonzero direction")
    if K.is_euclidean:
        return K.scale * length
    return np.max(a @ (K.scale * K.vertices).T, axis=-1)


@dataclass(frozen=True, eq=False)
class Polytope:
    """Bounded convex polytope ``{y : normals @ y <= offsets}`` with cached vertices."""

    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray

    @property
    def dimension(self):
        return self.vertices.shape[1]

    def contains(self, points, tol=EPS_GEOM):
        points = np.asarray(points, dtype=float)
        return np.all(points @ self.normals.T <= self.offsets + tol, axis=-1)

    def volume(self):
        return polytope_volume(self.vertices)

    def homothety(self, center, factor):
        """Image under ``y -> center + factor * (y - center)``."""
        center = np.asarray(center, dtype=float)
        offsets = factor * self.offsets + (1.0 - factor) * (self.normals @ center)
        vertices = center + factor * (self.vertices - center)
        return Polytope(self.normals, offsets, vertices)

    def translated(self, t):
        t = np.asarray(t, dtype=float)
        return Polytope(self.normals, self.offsets + self.normals @ t, self.vertices + t)

    def scaled(self, c):
        return Polytope(self.normals, self.offsets * c, self.vertices * c)

    def validate(self, tol=EPS_GEOM):
        n = self.dimension
        if len(self.vertices) == 0 or _affine_rank(self.vertices) != n:
            raise ConstructionError("polytope is not full-dimensional")
        slack = self.offsets[None, :] - self.vertices @ self.normals.T
        if slack.min() < -tol:
            raise ConstructionError("vertex violates a halfspace")
        tight = (np.abs(slack) <= tol).sum(axis=0)
        if tight.min() < n:
            raise ConstructionError("halfspace is not a facet")

    def to_dict(self):
        return {"normals": self.normals.tolist(), "offsets": self.offsets.tolist()}

    @classmethod
    def from_vertices(cls, vertices):
        normals, offsets = hull_facets(vertices)
        return intersect_halfspaces(normals, offsets)

    @classmethod
    def point(cls, p):
        p = np.asarray(p, dtype=float)
        return cls(np.zeros((0, p.size)), np.zeros(0), p[None, :])


def polytope_volume(vertices):
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape[1] == 1:
        return float(vertices.max() - vertices.min())
    try:
        return float(ConvexHull(vertices).volume)
    except QhullError:
        return 0.0


def _is_bounded(normals):
    """The halfspace system is bounded iff the normals positively span R^n."""
    n = normals.shape[1]
    m = normals.shape[0]
    if m <= n:
        return False
    for d in np.vstack([np.eye(n), -np.eye(n)]):
        sol = solve_lp(np.zeros(m), A_eq=normals.T, b_eq=d)
        if not sol.optimal:
            return False
    return True


def _enumerate_vertices(normals, offsets, tol, chunk=100_000):
    m, n = normals.shape
    found = []
    combos_iter = itertools.combinations(range(m), n)
    while True:
        block = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos_iter, chunk)), dtype=np.intp
        )
        if block.size == 0:
            break
        idx = block.reshape(-1, n)
        M = normals[idx]
        rhs = offsets[idx]
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-12
        if not ok.any():
            continue
        sol = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        feasible = np.all(sol @ normals.T <= offsets + tol, axis=1)
        if feasible.any():
            found.append(sol[feasible])
    if not found:
        return np.zeros((0, n))
    return _dedupe_points(np.vstack(found), tol)


def intersect_halfspaces(normals, offsets, tol=EPS_GEOM, check_bounded=True):
    """Bounded, full-dimensional intersection of ``a . y <= b`` halfspaces.

    Returns a ``Polytope`` whose halfspaces are irredundant (each is a facet)
    and whose vertices are deduplicated at ``tol``.
    """
    A = np.asarray(normals, dtype=float)
    b = np.asarray(offsets, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != b.size:
        raise InputError("halfspace normals and offsets disagree in size")
    n = A.shape[1]
    if n > MAX_POLY_DIM:
        raise UnsupportedError(f"polytopes limited to n <= {MAX_POLY_DIM}")
    length = np.linalg.norm(A, axis=1)
    zero = length <= 1e-15
    if np.any(b[zero] < 0):
        raise ConstructionError("empty intersection: 0 <= negative offset")
    A, b = A[~zero] / length[~zero, None], b[~zero] / length[~zero]
    if A.shape[0] == 0:
        raise ConstructionError("unbounded intersection")

    # parallel duplicates: keep the tightest
    key = np.round(A / 1e-10) * 1e-10
    order = np.lexsort(np.hstack([key, b[:, None]]).T[::-1])
    keep = []
    for i in order:
        if keep and np.abs(A[i] - A[keep[-1]]).max() <= 1e-12:
            continue
        keep.append(i)
    keep.sort()
    A, b = A[keep], b[keep]

    if check_bounded and not _is_bounded(A):
        raise ConstructionError("unbounded intersection: normals do not positively span R^%d" % n)
    V = _enumerate_vertices(A, b, tol)
    if len(V) == 0:
        raise ConstructionError("empty intersection")
    if _affine_rank(V) < n:
        raise ConstructionError("intersection has empty interior")

    slack = b[None, :] - V @ A.T
    facets = []
    for j in range(A.shape[0]):
        tight = V[np.abs(slack[:, j]) <= tol]
        if len(tight) >= n and _affine_rank(tight) == n - 1:
            facets.append(j)
    return Polytope(A[facets], b[facets], V)


def diameter_in_norm(P, K):
    """Largest K-distance between two points of P (attained at vertices)."""
    V = P.vertices
    if len(V) < 2:
        return 0.0
    diffs = V[:, None, :] - V[None, :, :]
    return float(norm(K, diffs).max())


def _origin_simplex_distance(S):
    """Euclidean distance from the origin to conv(rows of S), exact by face enumeration."""
    k = len(S)
    best = np.inf
    for r in range(1, k + 1):
        for sub in itertools.combinations(range(k), r):
            T = S[list(sub)]
            if r == 1:
                best = min(best, float(np.linalg.norm(T[0])))
                continue
            G = T @ T.T
            M = np.zeros((r + 1, r + 1))
            M[:r, :r] = G
            M[:r, r] = M[r, :r] = 1.0
            rhs = np.zeros(r + 1)
            rhs[r] = 1.0
            try:
                mu = np.linalg.solve(M, rhs)[:r]
            except np.linalg.LinAlgError:
                continue
            if mu.min() >= -1e-12:
                best = min(best, float(np.linalg.norm(mu @ T)))
    return best


def _minkowski_difference(P, Q):
    D = (P.vertices[:, None, :] - Q.vertices[None, :, :]).reshape(-1, P.dimension)
    return _dedupe_points(D)


def distance_in_norm(P, Q, K):
    """``min ||p - q||_K`` over p in P, q in Q (0 when they intersect)."""
    if P.dimension != Q.dimension or P.dimension != K.dimension:
        raise InputError("dimension mismatch")
    n = P.dimension
    D = _minkowski_difference(P, Q)
    if n == 1:
        lo, hi = D.min(), D.max()
        if lo <= EPS_GEOM and hi >= -EPS_GEOM:
            return 0.0
        return float(norm(K, np.array([[min(abs(lo), abs(hi))]]))[0])

    hull = None
    if len(D) > n and _affine_rank(D) == n:
        hull = ConvexHull(D)
        D = D[hull.vertices]

    if not K.is_euclidean:
        # minimize t  s.t.  sum(lam) = 1,  a_f . (D^T lam) <= t b_f,  lam, t >= 0
        m = len(D)
        proj = D @ K.normals.T
        A_ub = np.hstack([proj.T, -K.offsets[:, None]])
        c = np.zeros(m + 1)
        c[-1] = 1.0
        A_eq = np.zeros((1, m + 1))
        A_eq[0, :m] = 1.0
        sol = solve_lp(c, A_ub, np.zeros(len(K.offsets)), A_eq, [1.0])
        return max(0.0, float(sol.value))

    if hull is None:
        if len(D) > 12:
            raise ConstructionError("degenerate Minkowski difference too large for brute force")
        return _origin_simplex_distance(D) / K.scale
    eq = hull.equations
    if np.all(eq[:, -1] <= EPS_GEOM):
        return 0.0
    pts = hull.points
    best = np.inf
    for simplex, e in zip(hull.simplices, eq):
        if e[-1] > -EPS_GEOM:
            best = min(best, _origin_simplex_distance(pts[simplex]))
    return best / K.scale
