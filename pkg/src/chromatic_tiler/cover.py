"""Saturated packings, the finite covering instance, greedy and fractional covers.

The torus is covered in two steps. A maximal packing Lambda of small
bodies is built first; any family of translates of the (1 - delta)-shrunk
tiling that covers the finite set Lambda then lifts to a cover of the
whole torus by the un-shrunk translates. The finite problem is solved
greedily, which stays within a (1 + ln max|H|) factor of the fractional
optimum.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from .errors import (
    CertificateError,
    InputError,
    LiftViolation,
    ResolutionError,
    UnsupportedSizeError,
)
from .geom import EPS_GEOM
from .lattice import Multilattice, grid_coords, reduce, sample_grid, torus_distance
from .lp import EPS_LP, check_certificate, solve_lp
from .tiling import locate, voronoi_cells

MAX_PACKING_POINTS = 20_000
LP_SIZE_GUARD = 2000


@dataclass(frozen=True, eq=False)
class SaturatedPacking:
    torus: object
    body: object
    rho: float
    points: np.ndarray
    certificate: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)


def _min_dist_to(T, K, targets, points, chunk=200_000):
    """Minimum torus K-distance from each target to the point set."""
    out = np.full(len(targets), np.inf)
    if len(points) == 0:
        return out
    step = max(1, chunk // (len(points) * len(T.image_shifts(K))))
    for s in range(0, len(targets), step):
        d = torus_distance(T, K, targets[s : s + step, None, :], points[None, :, :])
        out[s : s + step] = d.min(axis=1)
    return out


def _min_pairwise(T, K, points):
    if len(points) < 2:
        return math.inf
    best = math.inf
    for i in range(len(points) - 1):
        best = min(best, float(torus_distance(T, K, points[i], points[i + 1 :]).min()))
    return best


def default_sat_res(T, rho):
    L = T.lattice
    longest = float(np.linalg.norm(L.basis, axis=0).max())
    res = max(8, math.ceil(longest / rho))
    cap = int(round(200_000 ** (1 / T.dimension)))
    return int(min(res, max(cap, 8)))


def saturate(T, K, rho, grid_res=None, max_points=MAX_PACKING_POINTS):
    """Maximal packing of ``rho*K`` on the torus by farthest-point insertion.

    Grid points are inserted, farthest first, while their distance to the
    current set is at least ``2*rho``. The result is then certified to be
    saturated (covering radius <= 2*rho): exactly through Voronoi vertices
    for the Euclidean ball, and through a Lipschitz bound on adaptively
    refined grid cells otherwise. Certification inserts any witness point
    it finds at distance > 2*rho, which keeps the packing property.
    """
    if not rho > 0:
        raise InputError("rho must be positive")
    bound = T.lattice.covolume / K.scaled(rho).volume()
    if bound > max_points:
        raise InputError(
            f"a packing of {rho:.4g}K may need up to {bound:.0f} points (> {max_points}); "
            "use a larger delta"
        )
    if grid_res is None:
        grid_res = default_sat_res(T, rho)
    grid = sample_grid(T, grid_res)
    thresh = 2.0 * rho - EPS_GEOM

    dist = np.full(len(grid), np.inf)
    points = []
    while True:
        j = int(np.argmax(dist)) if points else 0
        if points and dist[j] < thresh:
            break
        p = grid[j]
        points.append(p)
        dist = np.minimum(dist, torus_distance(T, K, grid, p))
    points = np.array(points)
    grid_max = float(dist.max())

    h = T.lattice.half_box_radius / grid_res
    if K.is_euclidean:
        cover_bound = K.scale * grid_max + h
        found = _certify_delaunay(T, K, rho, points, cover_bound)
        if found is not None:
            points, cover_radius = found
            method = "delaunay"
        else:
            points, cover_radius = _certify_voronoi(T, K, rho, points, cover_bound)
            method = "voronoi"
    else:
        points, cover_radius = _certify_lipschitz(T, K, rho, points, grid_res)
        method = "lipschitz"

    if cover_radius > 2.0 * rho:
        raise ResolutionError(f"saturation certificate failed (covering radius {cover_radius} > {2 * rho})")
    cert = {
        "min_pairwise": _min_pairwise(T, K, points),
        "covering_radius": cover_radius,
        "grid_resolution": int(grid_res),
        "method": method,
    }
    if cert["min_pairwise"] < 2.0 * rho - EPS_GEOM:
        raise CertificateError("packing property violated", witness=cert["min_pairwise"])
    return SaturatedPacking(T, K, float(rho), points, cert)


def _circumballs(P, simplices):
    """Circumcentres and radii of the simplices; flat ones are dropped."""
    V = P[simplices]
    A = 2.0 * (V[:, 1:] - V[:, :1])
    rhs = (V[:, 1:] ** 2).sum(-1) - (V[:, :1] ** 2).sum(-1)
    ok = np.abs(np.linalg.det(A)) > 1e-12 * np.abs(A).max(axis=(1, 2)) ** A.shape[1]
    c = np.linalg.solve(A[ok], rhs[ok][..., None])[..., 0]
    r = np.linalg.norm(c - V[ok, 0], axis=1)
    return c, r, ok


def _certify_delaunay(T, K, rho, points, cover_bound, max_layers=3):
    """Exact Euclidean covering radius from a Delaunay triangulation of
    periodic copies; far circumcentres are inserted until none is left.

    A simplex with a vertex in the central copy is genuine when its
    circumdiameter is below the padding width, which is checked.
    Returns ``None`` when the padding would have to be too thick.
    """
    L = T.lattice
    n = T.dimension
    limit = 2.0 * rho
    width = 1.0 / np.linalg.norm(L.inverse, axis=1).max()
    layers = max(1, math.ceil((2.0 * cover_bound + 1e-9) / width))
    while layers <= max_layers:
        shifts = np.array(list(itertools.product(range(-layers, layers + 1), repeat=n)), dtype=float) @ L.basis.T
        if len(points) * len(shifts) < n + 2:
            layers += 1
            continue
        while True:
            q = len(points)
            P = (points[None, :, :] + shifts[:, None, :]).reshape(-1, n)
            core = np.flatnonzero(np.all(shifts == 0, axis=1))[0]
            tri = Delaunay(P)
            simp = tri.simplices[((tri.simplices // q) == core).any(axis=1)]
            c, r, _ = _circumballs(P, simp)
            r_max = float(r.max())
            if 2.0 * r_max >= layers * width:
                break
            r = r / K.scale
            if r_max / K.scale <= limit:
                return points, r_max / K.scale
            far = np.argsort(-r[r > limit], kind="stable")
            cand = reduce(T, c[r > limit][far])
            added = []
            for p in cand:
                pool = np.vstack([points] + added) if added else points
                if torus_distance(T, K, p, pool).min() > limit:
                    added.append(p[None, :])
            points = np.vstack([points] + added)
        layers += 1
    return None


def _certify_voronoi(T, K, rho, points, cover_bound):
    L = T.lattice
    limit = 2.0 * rho
    cells = {}
    dirty = set(range(len(points)))
    while True:
        M = Multilattice(L, points)
        points = M.translates
        todo = sorted(dirty)
        for i, cell in zip(todo, voronoi_cells(M, cover_bound, which=todo)):
            cells[i] = cell
        far = []
        cover = 0.0
        for i in range(len(points)):
            d = np.linalg.norm(cells[i].vertices, axis=1) / K.scale
            cover = max(cover, float(d.max()))
            for v, dv in zip(cells[i].vertices[d > limit], d[d > limit]):
                far.append((-dv, tuple(points[i] + v)))
        if not far:
            return points, cover
        far.sort()
        added = []
        for _, p in far:
            p = np.array(p)
            cand = np.vstack([points] + added) if added else points
            if torus_distance(T, K, p, cand).min() > limit:
                added.append(p[None, :])
        new = np.vstack(added)
        start = len(points)
        points = np.vstack([points, new])
        # cells change only near the inserted points
        reach = 2.0 * cover_bound + 1e-9
        near = set(range(start, len(points)))
        Kb = K.scaled(1.0 / K.scale)
        for p in new:
            d = torus_distance(T, Kb, points[:start], p)
            near.update(np.flatnonzero(d <= reach).tolist())
        dirty = near


def _certify_lipschitz(T, K, rho, points, grid_res, max_depth=10):
    L = T.lattice
    n = T.dimension
    lip = 1.0 / K.inradius
    limit = 2.0 * rho
    centers = (grid_coords(n, grid_res) + 0.5 / grid_res) @ L.basis.T
    h = L.half_box_radius / grid_res
    offsets = np.array([[(c >> b) & 1 for b in range(n)] for c in range(2**n)], dtype=float) - 0.5
    step = L.basis / grid_res
    worst = 0.0
    for _depth in range(max_depth + 1):
        pts = np.asarray(points)
        d = _min_dist_to(T, K, centers, pts)
        while True:
            j = int(np.argmax(d))
            if d[j] < limit - EPS_GEOM:
                break
            p = centers[j]
            pts = np.vstack([pts, p])
            d = np.minimum(d, torus_distance(T, K, centers, p))
        points = pts
        bound = d + lip * h
        ok = bound <= limit
        if ok.any():
            worst = max(worst, float(bound[ok].max()))
        pending = centers[~ok]
        if len(pending) == 0:
            return points, worst
        step = step / 2
        h = h / 2
        centers = (pending[:, None, :] + (offsets @ step.T)[None, :, :]).reshape(-1, n)
    raise ResolutionError("Lipschitz saturation certificate did not converge; use a finer --sat-res")


@dataclass(frozen=True, eq=False)
class CoverInstance:
    ground: SaturatedPacking
    candidates: np.ndarray
    delta: float
    nu_shrink: float
    incidence: np.ndarray  # (candidates, ground) bool
    max_set_size: int
    incidence_bound: float

    @property
    def sizes(self):
        return self.incidence.sum(axis=1)


def default_cand_res(n):
    return {1: 256, 2: 64, 3: 16}.get(n, 8)


def incidence_bound(k, gamma, delta, n):
    return k * (2.0 * gamma / delta) ** n


def build_instance(packing, tiling, params, delta, cand_res=None, chunk=400_000):
    """Finite set-cover instance: Lambda against grid translates of the
    ``nu*(1 - delta)``-shrunk tiling."""
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    expected = params.alpha * params.nu * delta / 2
    if abs(packing.rho - expected) > 1e-9 * expected:
        raise InputError(f"packing radius {packing.rho} does not equal alpha*nu*delta/2 = {expected}")
    n = tiling.dimension
    cand_res = cand_res or default_cand_res(n)
    T = tiling.torus
    cands = sample_grid(T, cand_res)
    factor = params.nu * (1.0 - delta)
    cells = tiling.relative_cells(factor)
    lam = packing.points
    G = len(lam)
    inc = np.zeros((len(cands), G), dtype=bool)
    step = max(1, chunk // max(G, 1))
    for s in range(0, len(cands), step):
        t = cands[s : s + step]
        pts = (lam[None, :, :] - t[:, None, :]).reshape(-1, n)
        idx, _ = locate(tiling, pts, cells=cells)
        inc[s : s + step] = (idx >= 0).reshape(len(t), G)
    uncovered = np.flatnonzero(~inc.any(axis=0))
    if uncovered.size:
        raise ResolutionError(
            f"{uncovered.size} packing points are in no candidate set; raise --cand-res",
        )
    max_size = int(inc.sum(axis=1).max())
    bound = incidence_bound(tiling.k, params.gamma, delta, n)
    if max_size > bound:
        raise CertificateError(f"max |Lambda cap F'| = {max_size} exceeds k(2 gamma/delta)^n = {bound}")
    return CoverInstance(packing, cands, float(delta), factor, inc, max_size, bound)


def greedy_cover(inst):
    """Greedy set cover; ties go to the lowest candidate index."""
    M = np.asarray(inst.incidence if hasattr(inst, "incidence") else inst, dtype=bool)
    if not M.any(axis=0).all():
        raise InputError("instance is infeasible: some ground point is in no set")
    gains = M.sum(axis=1).astype(np.int64)
    uncovered = np.ones(M.shape[1], dtype=bool)
    chosen = []
    while uncovered.any():
        j = int(np.argmax(gains))
        newly = M[j] & uncovered
        chosen.append(j)
        uncovered &= ~newly
        gains -= M[:, newly].sum(axis=1)
    return chosen


@dataclass
class FractionalCover:
    weights: np.ndarray
    total: float
    reduced_shape: tuple = (0, 0)


def _reduce_instance(M):
    """Drop duplicate/dominated sets and implied ground points; LP optimum unchanged."""
    cols = np.arange(M.shape[0])
    rows = np.arange(M.shape[1])
    A = M.copy()
    while True:
        before = A.shape
        # sets: remove duplicates then strict subsets
        _, first = np.unique(np.packbits(A, axis=1), axis=0, return_index=True)
        first.sort()
        A, cols = A[first], cols[first]
        Af = A.astype(np.float32)
        inter = Af @ Af.T
        size = A.sum(axis=1)
        sub = (inter >= size[:, None] - 0.5) & (size[:, None] < size[None, :])
        keep = ~sub.any(axis=1)
        A, cols = A[keep], cols[keep]
        # ground points: λ2 is implied when every set covering λ1 also covers λ2
        _, first = np.unique(np.packbits(A.T, axis=1), axis=0, return_index=True)
        first.sort()
        A, rows = A[:, first], rows[first]
        Af = A.astype(np.float32)
        inter = Af.T @ Af
        deg = A.sum(axis=0)
        implied = (inter >= deg[None, :] - 0.5) & (deg[None, :] < deg[:, None])
        keep = ~implied.any(axis=1)
        A, rows = A[:, keep], rows[keep]
        if A.shape == before:
            return A, cols, rows


def fractional_optimum(inst, max_size=LP_SIZE_GUARD):
    """Exact optimum of the covering LP ``min sum w  s.t.  M^T w >= 1, w >= 0``.

    Solved after exact dominance reductions; the optimal packing of ground
    points is the dual certificate.
    """
    M = np.asarray(inst.incidence if hasattr(inst, "incidence") else inst, dtype=bool)
    if not M.any(axis=0).all():
        raise InputError("instance is infeasible: some ground point is in no set")
    A, cols, rows = _reduce_instance(M)
    if A.shape[0] > max_size or A.shape[1] > max_size:
        raise UnsupportedSizeError(
            f"reduced covering LP has {A.shape[0]} sets x {A.shape[1]} points (guard {max_size})"
        )
    A_ub = -A.T.astype(float)
    b_ub = -np.ones(A.shape[1])
    c = np.ones(A.shape[0])
    sol = solve_lp(c, A_ub, b_ub)
    if not sol.optimal:
        raise CertificateError(f"covering LP returned {sol.status}")
    viol, gap = check_certificate(sol, c, A_ub, b_ub)
    scale = max(1.0, abs(sol.value))
    if viol > EPS_LP * scale or gap > EPS_LP * scale:
        raise CertificateError(f"LP certificate failed (violation {viol:.3g}, gap {gap:.3g})")
    w = np.zeros(M.shape[0])
    w[cols] = sol.x
    coverage = M.T.astype(float) @ w
    if coverage.min() < 1.0 - EPS_LP * scale:
        raise CertificateError("fractional weights fail to cover a ground point")
    total = float(w.sum())
    return FractionalCover(w, total, A.shape), total


def measure_bound(params, delta, n):
    """``((1 + gamma)/(1 - delta))^n``: the fractional cover number of the torus
    by all translates of the shrunk tiling (not of the finite candidate grid)."""
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    gamma = params if isinstance(params, (int, float)) else params.gamma
    return ((1.0 + gamma) / (1.0 - delta)) ** n


@dataclass
class CoverCertificate:
    sample_res: int
    points_checked: int
    uncovered: int
    hypothesis: dict = field(default_factory=dict)
    witness: list | None = None

    @property
    def passed(self):
        return self.uncovered == 0

    def to_dict(self):
        return {
            "sample_res": self.sample_res,
            "points_checked": self.points_checked,
            "uncovered": self.uncovered,
            "coverage": 1.0 - self.uncovered / max(1, self.points_checked),
            "hypothesis": self.hypothesis,
            "witness": self.witness,
        }


def lift_cover(translates, tiling, nu, sample_res, instance=None, selection=None, raise_on_fail=True):
    """Check that the ``nu``-shrunk tiling translated by ``translates`` covers the torus.

    With ``instance``/``selection`` the packing hypotheses behind the lift are
    asserted first. The grid check then tests every point of a
    ``sample_res**n`` grid.
    """
    translates = np.atleast_2d(np.asarray(translates, dtype=float))
    if not 0 < nu < 1:
        raise InputError("nu must lie in (0, 1)")
    hyp = {}
    if instance is not None:
        pk = instance.ground
        rho = pk.rho
        if pk.certificate["min_pairwise"] < 2 * rho - EPS_GEOM:
            raise InputError("packing hypothesis fails")
        if pk.certificate["covering_radius"] > 2 * rho:
            raise InputError("saturation hypothesis fails")
        sel = list(selection if selection is not None else [])
        covered = instance.incidence[sel].any(axis=0) if sel else np.zeros(len(pk.points), bool)
        if not covered.all():
            raise InputError(f"selection leaves {int((~covered).sum())} packing points uncovered")
        if abs(instance.nu_shrink - nu * (1 - instance.delta)) > 1e-12:
            raise InputError("candidate shrink does not equal nu*(1 - delta)")
        hyp = {
            "rho": rho,
            "min_pairwise": pk.certificate["min_pairwise"],
            "covering_radius": pk.certificate["covering_radius"],
            "ground_covered": int(covered.sum()),
        }
    T = tiling.torus
    grid = sample_grid(T, sample_res)
    cells = tiling.relative_cells(nu)
    open_ = np.ones(len(grid), dtype=bool)
    for t in translates:
        todo = np.flatnonzero(open_)
        if todo.size == 0:
            break
        idx, _ = locate(tiling, grid[todo] - t, cells=cells)
        open_[todo[idx >= 0]] = False
    missing = int(open_.sum())
    witness = grid[np.flatnonzero(open_)[0]].tolist() if missing else None
    cert = CoverCertificate(int(sample_res), len(grid), missing, hyp, witness)
    if missing and raise_on_fail:
        raise LiftViolation(f"{missing} grid points are not covered", witness=witness)
    return cert
