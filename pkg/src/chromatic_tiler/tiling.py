"""Periodic tilings associated with multilattices and their sandwich parameters.

A ``PeriodicTiling`` holds one convex cell per translate class of a
multilattice; the whole tiling of R^n is the union of lattice copies.
Voronoi construction is Euclidean only: for a general norm the bisector
regions need not be convex, so other bodies enter only through the
parameters and the coloring norm.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AssociationError, ConstructionError, InputError, UnsupportedError
from .geom import EPS_GEOM, ConvexBody, Polytope, intersect_halfspaces, norm, support
from .lattice import Lattice, Multilattice, Torus, centered, sample_grid

VOLUME_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class PeriodicTiling:
    multilattice: Multilattice
    cells: list
    kind: str = "voronoi"

    @property
    def sites(self):
        return self.multilattice.translates

    @property
    def lattice(self):
        return self.multilattice.base

    @property
    def torus(self):
        return Torus(self.multilattice.base)

    @property
    def dimension(self):
        return self.multilattice.dimension

    @property
    def k(self):
        return self.multilattice.q

    def relative_cells(self, factor=1.0):
        """Cells translated so their site is the origin, scaled by ``factor``."""
        return [c.translated(-x).scaled(factor) for c, x in zip(self.cells, self.sites)]

    def validate(self, samples=0):
        """Check association and the tiling property; raise on failure."""
        for i, (cell, x) in enumerate(zip(self.cells, self.sites)):
            cell.validate()
            slack = cell.offsets - cell.normals @ x
            if slack.min() <= EPS_GEOM:
                raise AssociationError(f"site {i} is not strictly inside its cell (slack {slack.min():.3g})")
        total = sum(c.volume() for c in self.cells)
        covol = self.lattice.covolume
        if abs(total - covol) > VOLUME_RTOL * covol:
            raise ConstructionError(f"cell volumes sum to {total}, lattice covolume is {covol}")
        if samples:
            points = sample_grid(self.torus, samples)
            counts = containment_counts(self, points)
            if counts["closed"].min() < 1:
                raise ConstructionError("cells do not cover the torus")
            if counts["interior"].max() > 1:
                raise ConstructionError("cell interiors overlap")
        return self


def _shells(lengths, count, tol=1e-9):
    """Smallest prefix length >= count that does not split an equal-length shell."""
    if count >= len(lengths):
        return len(lengths)
    edge = lengths[count - 1]
    return int(np.searchsorted(lengths, edge + tol, side="right"))


def _voronoi_cell(rel, box):
    n = rel.shape[1]
    lengths = np.linalg.norm(rel, axis=1)
    normals = np.vstack([rel, np.eye(n), -np.eye(n)])
    offsets = np.concatenate([lengths**2 / 2, np.full(2 * n, box)])
    cell = intersect_halfspaces(normals, offsets, check_bounded=False)
    return cell, bool(np.any(cell.offsets >= box * (1 - 1e-7)))


def voronoi_cells(M, cover_bound=None, which=None):
    """Euclidean Voronoi cells (site-relative) of every translate class of M.

    ``cover_bound`` must upper-bound the covering radius of M; by default
    the half-box radius of the base lattice is used, which always is one.
    Only sites within twice the cell circumradius can contribute a facet,
    so the neighbour set grows until it is closed under that rule.
    """
    L = M.base
    n = M.dimension
    X = M.translates
    if cover_bound is None:
        cover_bound = L.half_box_radius
    search = 2.0 * cover_bound + 1e-9
    W, _ = L.shifts_within(search)
    box = 4.0 * cover_bound + 1.0
    cells = []
    for i in range(len(X)) if which is None else which:
        x = X[i]
        base = centered(Torus(L), X - x)
        rel = (base[:, None, :] + W[None, :, :]).reshape(-1, n)
        lengths = np.linalg.norm(rel, axis=1)
        keep = (lengths > EPS_GEOM) & (lengths <= search)
        rel, lengths = rel[keep], lengths[keep]
        order = np.lexsort(np.vstack([rel.T[::-1], np.round(lengths, 10)]))
        rel, lengths = rel[order], lengths[order]
        if len(rel) < n + 1:
            raise ConstructionError(f"site {i} has too few neighbours for a bounded cell")
        used = _shells(lengths, 2 * n + 2)
        while True:
            cell, on_box = _voronoi_cell(rel[:used], box)
            if on_box:
                if used == len(rel):
                    raise ConstructionError(f"Voronoi cell of site {i} is unbounded")
                used = _shells(lengths, 2 * used)
                continue
            R = float(np.linalg.norm(cell.vertices, axis=1).max())
            need = int(np.searchsorted(lengths, 2 * R + 1e-9, side="right"))
            if need <= used:
                break
            used = need
        cells.append(cell)
    return cells


def voronoi_tiling(M, validate=True):
    """Euclidean Voronoi tiling of the multilattice M on its torus."""
    rel = voronoi_cells(M)
    cells = [c.translated(x) for c, x in zip(rel, M.translates)]
    tiling = PeriodicTiling(M, cells, "voronoi")
    if validate:
        tiling.validate()
    return tiling


def tiling_from_cells(M, cells, samples=32):
    """Explicit tiling; cells are ``Polytope``s or ``(normals, offsets)`` pairs."""
    built = []
    for c in cells:
        if not isinstance(c, Polytope):
            c = intersect_halfspaces(*c)
        built.append(c)
    if len(built) != M.q:
        raise InputError(f"need one cell per translate ({M.q}), got {len(built)}")
    tiling = PeriodicTiling(M, built, "explicit")
    return tiling.validate(samples=samples)


def locate(tiling, points, factor=1.0, tol=EPS_GEOM, cells=None):
    """First periodic cell copy containing each point.

    Cells are shrunk by ``factor`` about their sites. Returns
    ``(cell_index, copy_coords)`` with ``cell_index == -1`` where no copy
    contains the point; ``copy_coords`` are the integer lattice coordinates
    of the copy's translation.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    L = tiling.lattice
    N = len(points)
    idx = np.full(N, -1)
    coords = np.zeros((N, tiling.dimension), dtype=int)
    rel_cells = cells if cells is not None else tiling.relative_cells(factor)
    for i, (cell, x) in enumerate(zip(rel_cells, tiling.sites)):
        todo = np.flatnonzero(idx < 0)
        if todo.size == 0:
            break
        z = L.coords(points[todo] - x)
        r = np.rint(z)
        v = L.points(z - r)
        radius = float(np.linalg.norm(cell.vertices, axis=1).max()) + tol
        W, Z = L.shifts_within(radius)
        for w, zw in zip(W, Z):
            open_ = idx[todo] < 0
            if not open_.any():
                break
            inside = open_ & cell.contains(v + w, tol)
            hit = todo[inside]
            idx[hit] = i
            coords[hit] = (r[inside] - zw).astype(int)
    return idx, coords


def containment_counts(tiling, points, tol=EPS_GEOM):
    """Number of closed and open cell copies containing each point."""
    points = np.atleast_2d(points)
    L = tiling.lattice
    closed = np.zeros(len(points), dtype=int)
    interior = np.zeros(len(points), dtype=int)
    for cell, x in zip(tiling.relative_cells(), tiling.sites):
        z = L.coords(points - x)
        v = L.points(z - np.rint(z))
        radius = float(np.linalg.norm(cell.vertices, axis=1).max()) + tol
        for w in L.shifts_within(radius)[0]:
            s = (v + w) @ cell.normals.T - cell.offsets
            closed += np.all(s <= tol, axis=1)
            interior += np.all(s < -tol, axis=1)
    return {"closed": closed, "interior": interior}


@dataclass(frozen=True)
class TilingParameters:
    alpha: float
    beta: float
    gamma: float
    mu: float
    forbidden: float
    scale: float
    eta: float
    nu: float = field(default=0.0)

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "mu": self.mu,
            "nu": self.nu,
            "forbidden": self.forbidden,
            "scale": self.scale,
            "eta": self.eta,
        }


def tiling_parameters(tiling, K, eta=1e-6):
    """Tight sandwich ``alpha K + x <= psi_x <= beta K + x`` over all cells.

    ``alpha`` is the smallest facet-distance/support ratio, ``beta`` the
    largest K-norm of a vertex about its site.
    """
    if not 0 < eta < 0.01:
        raise InputError("eta must lie in (0, 0.01)")
    alphas, betas = [], []
    for cell, x in zip(tiling.cells, tiling.sites):
        alphas.append(np.min((cell.offsets - cell.normals @ x) / support(K, cell.normals)))
        betas.append(np.max(norm(K, cell.vertices - x)))
    alpha, beta = float(min(alphas)), float(max(betas))
    if alpha <= EPS_GEOM:
        raise AssociationError(f"a site lies on the boundary of its cell (alpha = {alpha:.3g})")
    mu = alpha / (alpha + beta)
    forbidden = 2.0 * beta * mu
    return TilingParameters(
        alpha=alpha,
        beta=beta,
        gamma=beta / alpha,
        mu=mu,
        forbidden=forbidden,
        scale=1.0 / forbidden,
        eta=eta,
        nu=mu * (1.0 - eta),
    )


def shrink(tiling, factor):
    """Cells mapped by the homothety of ratio ``factor`` about their sites."""
    if not 0 < factor < 1:
        raise InputError("shrink factor must lie in (0, 1)")
    return [c.homothety(x, factor) for c, x in zip(tiling.cells, tiling.sites)]


@dataclass(frozen=True)
class XiRatios:
    xi1: float
    xi2: float
    xi: float


def lattice_xi(lattice, K):
    """Covering and packing thresholds of the translate system ``K + lattice``."""
    if K.dimension != lattice.dimension:
        raise InputError("dimension mismatch")
    shortest_basis = float(norm(K, lattice.basis.T).min())
    W, _ = lattice.shifts_within(K.circumradius * shortest_basis + 1e-9)
    lengths = norm(K, W)
    xi2 = 0.5 * float(lengths[lengths > EPS_GEOM].min())
    if not K.is_euclidean:
        raise UnsupportedError("covering threshold needs the Euclidean ball (convex Voronoi cells)")
    cell = voronoi_cells(Multilattice(lattice, np.zeros((1, lattice.dimension))))[0]
    xi1 = float(norm(K, cell.vertices).max())
    return XiRatios(xi1=xi1, xi2=xi2, xi=xi1 / xi2)


def build_ball_multilattice(n, grid_res=8):
    """Saturated multilattice over the cube lattice (2Z)^n for the unit ball.

    Sites are a maximal set with pairwise distance >= 2, so twice the ball
    placed at every site covers space and the Voronoi tiling has gamma <= 2.
    """
    from .cover import saturate

    if not 2 <= n <= 4:
        raise UnsupportedError(f"ball-generic construction supports 2 <= n <= 4, got {n}")
    lattice = Lattice.integer(n, 2.0)
    K = ConvexBody.ball(n)
    packing = saturate(Torus(lattice), K, rho=1.0, grid_res=grid_res)
    M = Multilattice(lattice, packing.points)
    tiling = voronoi_tiling(M)
    bound = lattice.covolume / K.volume()
    if M.q > bound + EPS_GEOM:
        raise ConstructionError(f"saturation produced k = {M.q} > vol(T)/vol(B^n) = {bound:.4f}")
    return M, tiling


def hexagonal_tiling():
    M = Multilattice(Lattice.hexagonal(), np.zeros((1, 2)))
    return voronoi_tiling(M)


def square_tiling(n=2):
    M = Multilattice(Lattice.integer(n), np.zeros((1, n)))
    return voronoi_tiling(M)

