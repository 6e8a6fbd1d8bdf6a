"""Colorings of R^n_K built from covers by shrunk tilings, and their verification.

A ``shrunk_cover`` coloring gives color j to the points of
``s * (nu * Psi + t_j)`` not already colored by an earlier translate. Every
piece of one color is a shrunk cell, so a color avoids distance 1 as soon
as pieces have K-diameter < 1 and distinct pieces are more than 1 apart.
A ``cell_partition`` coloring instead colors whole cells by a class rule
``(offset_i + weights . z) mod modulus`` on the lattice copy ``z``.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .config import RunConfig, thread_count
from .cover import (
    build_instance,
    fractional_optimum,
    greedy_cover,
    incidence_bound,
    lift_cover,
    measure_bound,
    saturate,
)
from .errors import CertificateError, InputError, LiftViolation, UnsupportedSizeError
from .geom import ConvexBody, diameter_in_norm, distance_in_norm, intersect_halfspaces, norm
from .lattice import Lattice, Multilattice, sample_grid
from .tiling import (
    PeriodicTiling,
    build_ball_multilattice,
    hexagonal_tiling,
    locate,
    square_tiling,
    tiling_from_cells,
    tiling_parameters,
)

SCHEMA = 1
SHRUNK_COVER = "shrunk_cover"
CELL_PARTITION = "cell_partition"
PAIR_BATCH = 10_000
BASELINE_ETA = 1e-3


class VerificationFailed(CertificateError):
    """A built coloring failed verification; ``witness`` holds the report."""


@dataclass(frozen=True, eq=False)
class Coloring:
    body: ConvexBody
    tiling: PeriodicTiling
    mode: str
    scale: float
    nu: float = 1.0
    translates: np.ndarray | None = None
    # cell_partition: {"weights": [...], "offsets": [...], "modulus": m}
    partition: dict | None = None
    eta: float = 1e-6

    def __post_init__(self):
        if self.mode == SHRUNK_COVER:
            T = np.atleast_2d(np.asarray(self.translates, dtype=float))
            if T.shape[1] != self.tiling.dimension or len(T) == 0:
                raise InputError("translates must be a non-empty list of n-vectors")
            object.__setattr__(self, "translates", T)
        elif self.mode == CELL_PARTITION:
            p = self.partition or {}
            if len(p.get("weights", ())) != self.tiling.dimension or len(p.get("offsets", ())) != self.tiling.k:
                raise InputError("partition needs one weight per axis and one offset per cell class")
            if int(p.get("modulus", 0)) < 1:
                raise InputError("partition modulus must be a positive integer")
        else:
            raise InputError(f"unknown coloring mode {self.mode!r}")
        if not self.scale > 0:
            raise InputError("scale must be positive")
        if not 0 < self.nu <= 1:
            raise InputError("nu must lie in (0, 1]")

    @property
    def color_count(self):
        if self.mode == SHRUNK_COVER:
            return len(self.translates)
        return int(self.partition["modulus"])

    @property
    def n(self):
        return self.tiling.dimension

    def to_dict(self):
        til = self.tiling
        return {
            "schema": SCHEMA,
            "n": self.n,
            "body": self.body.to_dict(),
            "lattice_basis": til.lattice.to_list(),
            "translate_classes": til.sites.tolist(),
            "cells": [{"normals": c.normals.tolist(), "offsets": c.offsets.tolist()} for c in til.cells],
            "nu": self.nu,
            "eta": self.eta,
            "scale": self.scale,
            "mode": self.mode,
            "translates": [] if self.translates is None else self.translates.tolist(),
            "partition": self.partition,
            "color_count": self.color_count,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            if d.get("schema") != SCHEMA:
                raise InputError(f"unsupported coloring schema {d.get('schema')!r}")
            n = int(d["n"])
            body = ConvexBody.from_dict(d["body"], n)
            M = Multilattice(Lattice.from_generators(d["lattice_basis"]), np.array(d["translate_classes"], dtype=float))
            cells = [intersect_halfspaces(np.array(c["normals"]), np.array(c["offsets"])) for c in d["cells"]]
            if len(cells) != M.q:
                raise InputError("need one cell per translate class")
            tiling = PeriodicTiling(M, cells, "explicit").validate()
            return cls(
                body=body,
                tiling=tiling,
                mode=d["mode"],
                scale=float(d["scale"]),
                nu=float(d["nu"]),
                translates=np.array(d["translates"], dtype=float) if d["mode"] == SHRUNK_COVER else None,
                partition=d.get("partition"),
                eta=float(d.get("eta", 1e-6)),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, InputError):
                raise
            raise InputError(f"malformed coloring: {e}") from e


def colors_of(C, points):
    """Color of each point, or -1 where no piece contains it."""
    y = np.atleast_2d(np.asarray(points, dtype=float)) / C.scale
    til = C.tiling
    out = np.full(len(y), -1)
    if C.mode == CELL_PARTITION:
        idx, z = locate(til, y)
        p = C.partition
        ok = idx >= 0
        offs = np.asarray(p["offsets"], dtype=np.int64)
        out[ok] = (offs[idx[ok]] + z[ok] @ np.asarray(p["weights"], dtype=np.int64)) % int(p["modulus"])
        return out
    cells = til.relative_cells(C.nu)
    for j, t in enumerate(C.translates):
        todo = np.flatnonzero(out < 0)
        if todo.size == 0:
            break
        idx, _ = locate(til, y[todo] - t, cells=cells)
        out[todo[idx >= 0]] = j
    return out


def color_of(C, p):
    """Lowest color whose piece contains ``p``; raises if none does."""
    c = int(colors_of(C, p)[0])
    if c < 0:
        raise LiftViolation("point is in no colored piece", witness=np.asarray(p, dtype=float).tolist())
    return c


@dataclass
class VerificationReport:
    structural: dict
    sampled: dict
    cover: dict = field(default_factory=dict)

    @property
    def passed(self):
        s = self.structural
        return (
            s["max_diameter"] < 1.0
            and s["min_separation"] > 1.0
            and self.sampled["violations"] == 0
            and self.sampled["undefined"] == 0
            and self.cover.get("uncovered", 0) == 0
        )

    def to_dict(self):
        return {"passed": self.passed, "structural": self.structural, "sampled": self.sampled, "cover": self.cover}


def _same_color(C, i, i2, z):
    if C.mode == SHRUNK_COVER:
        return True
    p = C.partition
    a = p["offsets"][i]
    b = p["offsets"][i2] + int(np.dot(p["weights"], z))
    return (a - b) % int(p["modulus"]) == 0


def structural_check(C):
    """Scaled piece diameters and same-color piece separations.

    Pairs are taken over cell copies whose Euclidean gap could still give a
    scaled K-distance <= 2; farther pairs are separated by more than that.
    """
    K, s, til = C.body, C.scale, C.tiling
    L = til.lattice
    rel = til.relative_cells(C.nu)
    radii = [float(np.linalg.norm(P.vertices, axis=1).max()) for P in rel]
    diam = max(diameter_in_norm(P, K) for P in rel) * s
    reach = 2.0 * K.circumradius / s
    sep = math.inf
    witness = None
    pairs = 0
    X = til.sites
    for i in range(til.k):
        for i2 in range(til.k):
            d0 = X[i2] - X[i]
            r = np.rint(L.coords(d0))
            W, Z = L.shifts_within(radii[i] + radii[i2] + reach + np.linalg.norm(L.points(r) - d0))
            for w, zw in zip(W, Z):
                z = zw - r.astype(int)
                off = d0 + L.points(z)
                if i == i2 and not z.any():
                    continue
                if np.linalg.norm(off) - radii[i] - radii[i2] > reach:
                    continue
                if not _same_color(C, i, i2, z):
                    continue
                pairs += 1
                d = distance_in_norm(rel[i], rel[i2].translated(off), K) * s
                if d < sep:
                    sep, witness = d, {"cells": [i, i2], "copy": z.tolist()}
    return {
        "max_diameter": diam,
        "min_separation": sep,
        "diameter_margin": 1.0 - diam,
        "separation_margin": sep - 1.0,
        "pairs_checked": pairs,
        "closest_pair": witness,
    }


def _pair_batch(C, ss, count):
    rng = np.random.default_rng(ss)
    n = C.n
    u = rng.random((count, n))
    x = C.scale * C.tiling.lattice.points(u)
    g = rng.standard_normal((count, n))
    d = g / norm(C.body, g)[:, None]
    a = colors_of(C, x)
    b = colors_of(C, x + d)
    both = (a >= 0) & (b >= 0)
    bad = np.flatnonzero(both & (a == b))
    wit = [{"x": x[k].tolist(), "y": (x[k] + d[k]).tolist(), "color": int(a[k])} for k in bad[:5]]
    return len(bad), int((~both).sum()), wit


def sample_pairs(C, pair_samples, seed=0, threads=None):
    """Random pairs at K-distance exactly 1; counts monochromatic ones.

    Batches draw from independent child seeds, so results do not depend on
    how many worker threads run them.
    """
    sizes = [PAIR_BATCH] * (pair_samples // PAIR_BATCH)
    if pair_samples % PAIR_BATCH:
        sizes.append(pair_samples % PAIR_BATCH)
    seeds = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    threads = threads or thread_count()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda a: _pair_batch(C, *a), zip(seeds, sizes)))
    witnesses = [w for r in results for w in r[2]][:5]
    return {
        "pairs": int(pair_samples),
        "seed": int(seed),
        "violations": sum(r[0] for r in results),
        "undefined": sum(r[1] for r in results),
        "witnesses": witnesses,
    }


def partition_coverage(C, sample_res):
    grid = sample_grid(C.tiling.torus, sample_res)
    idx, _ = locate(C.tiling, grid)
    return {"sample_res": int(sample_res), "points_checked": len(grid), "uncovered": int((idx < 0).sum())}


def verify_coloring(C, pair_samples=0, seed=0, lift_res=None, threads=None):
    """Structural and sampled properness checks plus the cover certificate."""
    structural = structural_check(C)
    sampled = (
        sample_pairs(C, pair_samples, seed, threads)
        if pair_samples
        else {"pairs": 0, "seed": int(seed), "violations": 0, "undefined": 0, "witnesses": []}
    )
    cover = {}
    if lift_res:
        if C.mode == SHRUNK_COVER:
            cert = lift_cover(C.translates, C.tiling, C.nu, lift_res, raise_on_fail=False)
            cover = cert.to_dict()
        else:
            cover = partition_coverage(C, lift_res)
    return VerificationReport(structural, sampled, cover)


@dataclass
class BoundReport:
    n: int
    k: int
    gamma: float
    delta: float
    theorem1_value: float | None
    finite_run_bound: float
    measure_bound: float
    butler_value: float | None
    color_count_m: int
    tau_star: float
    tau_source: str
    max_set_size: int
    incidence_bound: float
    ground_size: int

    def to_dict(self):
        d = dict(self.__dict__)
        d["checks"] = {
            "m_le_finite_run_bound": self.color_count_m <= self.finite_run_bound,
            "max_set_size_le_incidence_bound": self.max_set_size <= self.incidence_bound,
            "tau_star_ge_ground_over_max_set": self.tau_star >= self.ground_size / self.max_set_size - 1e-9
            if self.tau_source == "lp"
            else None,
        }
        return d

    @property
    def passed(self):
        c = self.to_dict()["checks"]
        return all(v is not False for v in c.values())


def _quiet(fn, *args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            return fn(*args)
        except InputError:
            return None


def build_tiling(cfg):
    if cfg.construction == "hexagonal":
        return hexagonal_tiling()
    if cfg.construction == "square":
        return square_tiling(cfg.n)
    if cfg.construction == "ball-generic":
        return build_ball_multilattice(cfg.n)[1]
    e = cfg.explicit
    try:
        M = Multilattice(Lattice.from_generators(e["lattice_basis"]), np.array(e["translates"], dtype=float))
        cells = [(np.array(c["normals"], dtype=float), np.array(c["offsets"], dtype=float)) for c in e["cells"]]
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, InputError):
            raise
        raise InputError(f"malformed explicit construction: {err}") from err
    return tiling_from_cells(M, cells)


@dataclass
class PipelineResult:
    coloring: Coloring
    verification: VerificationReport
    bounds: BoundReport
    params: object
    instance: object
    selection: list


def build_coloring(cfg, threads=None, raise_on_fail=True):
    """Run the full pipeline for ``cfg`` (a ``RunConfig`` or a dict)."""
    if isinstance(cfg, dict):
        cfg = RunConfig.from_dict(cfg)
    K = ConvexBody.from_dict(cfg.body, cfg.n)
    if K.dimension != cfg.n:
        raise InputError(f"body dimension {K.dimension} does not match n = {cfg.n}")
    tiling = build_tiling(cfg)
    params = tiling_parameters(tiling, K, cfg.eta)
    delta = cfg.resolved_delta
    rho = params.alpha * params.nu * delta / 2
    packing = saturate(tiling.torus, K, rho, cfg.sat_res)
    inst = build_instance(packing, tiling, params, delta, cfg.cand_res)
    selection = greedy_cover(inst)
    try:
        _, tau = fractional_optimum(inst)
        source = "lp"
    except UnsupportedSizeError:
        tau = measure_bound(params, delta, cfg.n)
        source = "measure_bound"
    translates = inst.candidates[selection]
    lift = lift_cover(translates, tiling, params.nu, cfg.resolved_lift_res, inst, selection, raise_on_fail=False)
    C = Coloring(K, tiling, SHRUNK_COVER, params.scale, params.nu, translates, eta=cfg.eta)
    report = verify_coloring(C, cfg.resolved_pair_samples, cfg.seed, threads=threads)
    report.cover = lift.to_dict()
    n = cfg.n
    br = BoundReport(
        n=n,
        k=tiling.k,
        gamma=params.gamma,
        delta=delta,
        theorem1_value=_quiet(bounds.theorem1_bound, n, tiling.k, params.gamma),
        finite_run_bound=bounds.finite_run_bound(inst.max_set_size, tau),
        measure_bound=measure_bound(params, delta, n),
        butler_value=_quiet(bounds.butler_bound, n, 2**n, 3.0),
        color_count_m=C.color_count,
        tau_star=tau,
        tau_source=source,
        max_set_size=inst.max_set_size,
        incidence_bound=incidence_bound(tiling.k, params.gamma, delta, n),
        ground_size=len(packing),
    )
    result = PipelineResult(C, report, br, params, inst, selection)
    if raise_on_fail and not (report.passed and br.passed):
        raise VerificationFailed("coloring failed verification", witness=result)
    return result


def partition_seven_baseline(eta_prime=BASELINE_ETA, pair_samples=100_000, seed=0, lift_res=512, threads=None):
    """Classical 7-coloring: hexagons of diameter ``1 - eta_prime`` colored by
    the index-7 sublattice spanned by (2, 1) and (-1, 3)."""
    tiling = hexagonal_tiling()
    cell_diam = 2.0 / math.sqrt(3)
    C = Coloring(
        ConvexBody.ball(2),
        tiling,
        CELL_PARTITION,
        scale=(1.0 - eta_prime) / cell_diam,
        partition={"weights": [1, 5], "offsets": [0], "modulus": 7},
    )
    return C, verify_coloring(C, pair_samples, seed, lift_res, threads)
