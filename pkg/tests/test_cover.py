import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from chromatic_tiler.color import build_coloring
from chromatic_tiler.cover import (
    build_instance,
    fractional_optimum,
    greedy_cover,
    lift_cover,
    measure_bound,
    saturate,
)
from chromatic_tiler.errors import InputError, LiftViolation, UnsupportedSizeError
from chromatic_tiler.geom import ConvexBody
from chromatic_tiler.lattice import Lattice, Torus, sample_grid, torus_distance
from chromatic_tiler.tiling import locate, tiling_parameters

SQRT3 = math.sqrt(3)
HEX_DELTA = 1 / (4 * math.log(2))

S123 = np.array([[1, 1, 1, 0], [0, 0, 1, 1], [0, 0, 0, 1]], dtype=bool)


def dense_cover_radius(T, K, points, res):
    grid = sample_grid(T, res)
    d = np.full(len(grid), np.inf)
    for p in points:
        d = np.minimum(d, torus_distance(T, K, grid, p))
    return d.max()


def test_saturate_single_site(disk):
    T = Torus(Lattice.integer(2, 2.0))
    pk = saturate(T, disk, 1.0)
    assert pk.points.tolist() == [[0.0, 0.0]]
    assert pk.certificate["covering_radius"] == pytest.approx(math.sqrt(2))
    assert pk.certificate["covering_radius"] < 2


def test_saturate_huge_rho(disk):
    pk = saturate(Torus(Lattice.hexagonal()), disk, 5.0)
    assert len(pk) == 1 and pk.certificate["min_pairwise"] == math.inf


def test_saturate_hexagonal_small_rho(disk):
    T = Torus(Lattice.hexagonal())
    rho = 1 / (2 * SQRT3)
    pk = saturate(T, disk, rho)
    cert = pk.certificate
    assert cert["min_pairwise"] >= 1 / SQRT3 - 1e-9
    assert cert["covering_radius"] <= 2 * rho
    assert dense_cover_radius(T, disk, pk.points, 200) <= cert["covering_radius"] + 1e-9


def test_saturate_rejects_bad_rho(disk):
    T = Torus(Lattice.hexagonal())
    with pytest.raises(InputError):
        saturate(T, disk, 0)
    with pytest.raises(InputError, match="larger delta"):
        saturate(T, disk, 1e-3)


@pytest.mark.parametrize("K", [ConvexBody.cube(2), ConvexBody.cross_polytope(2)], ids=["square", "cross"])
@pytest.mark.parametrize("rho", [0.17, 0.3])
def test_lipschitz_certificate_against_dense_sampling(K, rho):
    T = Torus(Lattice([[2.0, 0.6], [0.0, 1.7]]))
    pk = saturate(T, K, rho)
    assert pk.certificate["method"] == "lipschitz"
    assert pk.certificate["min_pairwise"] >= 2 * rho - 1e-9
    assert dense_cover_radius(T, K, pk.points, 300) <= 2 * rho


@given(seed=st.integers(0, 2**32 - 1))
def test_saturation_packing_and_cover_random_lattice(seed):
    rng = np.random.default_rng(seed)
    B = np.array([[1.0, rng.uniform(-0.5, 0.5)], [0.0, rng.uniform(0.7, 1.3)]])
    T, disk = Torus(Lattice(B)), ConvexBody.ball(2)
    rho = rng.uniform(0.08, 0.3)
    pk = saturate(T, disk, rho)
    assert pk.certificate["min_pairwise"] >= 2 * rho - 1e-9
    assert dense_cover_radius(T, disk, pk.points, 120) <= pk.certificate["covering_radius"] + 1e-9


@pytest.fixture(scope="module")
def hex_instance(hex_tiling, disk):
    p = tiling_parameters(hex_tiling, disk)
    pk = saturate(hex_tiling.torus, disk, p.alpha * p.nu * HEX_DELTA / 2)
    return p, build_instance(pk, hex_tiling, p, HEX_DELTA)


def test_build_instance_hexagonal(hex_instance):
    p, inst = hex_instance
    assert inst.incidence.any(axis=0).all()
    assert inst.incidence_bound == pytest.approx((2 * (2 / SQRT3) / HEX_DELTA) ** 2)
    assert inst.incidence_bound == pytest.approx(41.0, abs=0.05)
    assert inst.max_set_size <= inst.incidence_bound
    assert inst.nu_shrink == pytest.approx(p.nu * (1 - HEX_DELTA))
    assert len(inst.candidates) == 64**2


def test_build_instance_rejections(hex_tiling, disk, hex_instance):
    p, inst = hex_instance
    for bad in (1.0, 1.5, 0.0):
        with pytest.raises(InputError):
            build_instance(inst.ground, hex_tiling, p, bad)
    with pytest.raises(InputError, match="alpha"):
        build_instance(inst.ground, hex_tiling, p, 0.5)


def test_build_instance_own_offsets_cover(hex_tiling, hex_instance):
    # the translate t = lambda - site puts a shrunk cell's site on lambda
    _, inst = hex_instance
    lam = inst.ground.points
    t = lam - hex_tiling.sites[0]
    cells = hex_tiling.relative_cells(inst.nu_shrink)
    idx, _ = locate(hex_tiling, lam - t, cells=cells)
    assert np.all(idx == 0)


def test_greedy_examples():
    assert greedy_cover(S123) == [0, 1]
    assert greedy_cover(np.ones((3, 5), dtype=bool)) == [0]
    assert sorted(greedy_cover(np.eye(6, dtype=bool))) == list(range(6))
    with pytest.raises(InputError):
        greedy_cover(np.array([[1, 0]], dtype=bool))


def test_fractional_examples():
    assert fractional_optimum(S123)[1] == pytest.approx(2)
    assert fractional_optimum(np.ones((3, 5), dtype=bool))[1] == pytest.approx(1)
    assert fractional_optimum(np.eye(7, dtype=bool))[1] == pytest.approx(7)
    with pytest.raises(UnsupportedSizeError):
        fractional_optimum(np.eye(30, dtype=bool), max_size=20)


def random_instance(rng):
    g = int(rng.integers(1, 21))
    m = int(rng.integers(1, 13))
    M = rng.random((m, g)) < rng.uniform(0.1, 0.6)
    for j in np.flatnonzero(~M.any(axis=0)):
        M[rng.integers(m), j] = True
    return M


def brute_optimum(M):
    m = len(M)
    for r in range(1, m + 1):
        for S in itertools.combinations(range(m), r):
            if M[list(S)].any(axis=0).all():
                return r


def test_lovasz_inequality_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        M = random_instance(rng)
        sel = greedy_cover(M)
        assert M[sel].any(axis=0).all()
        fc, tau = fractional_optimum(M)
        ref = linprog(np.ones(len(M)), A_ub=-M.T.astype(float), b_ub=-np.ones(M.shape[1]), method="highs")
        assert tau == pytest.approx(ref.fun, abs=1e-9)
        assert (M.T.astype(float) @ fc.weights).min() >= 1 - 1e-9
        assert fc.weights.min() >= -1e-12
        opt = brute_optimum(M)
        assert tau <= opt + 1e-9 <= len(sel) + 1e-9
        assert len(sel) < (1 + math.log(M.sum(axis=1).max())) * tau + 1e-9
        assert tau >= M.shape[1] / M.sum(axis=1).max() - 1e-9


def test_measure_bound_examples():
    assert measure_bound(2.0, 1e-12, 2) == pytest.approx(9)
    assert measure_bound(2 / SQRT3, HEX_DELTA, 2) == pytest.approx(11.357, abs=2e-3)
    assert measure_bound(1.0, 0.5, 1) == pytest.approx(4)
    with pytest.raises(InputError):
        measure_bound(1.0, 1.0, 2)


@pytest.fixture(scope="module")
def square_run():
    return build_coloring({"construction": "square", "pair_samples": 1000})


def test_lift_square_pipeline(square_run):
    r = square_run
    cert = lift_cover(r.coloring.translates, r.coloring.tiling, r.params.nu, 512, r.instance, r.selection)
    assert cert.passed and cert.points_checked == 512**2
    assert cert.hypothesis["ground_covered"] == len(r.instance.ground)


def test_lift_rejects_incomplete_selection(square_run):
    r = square_run
    inc = r.instance.incidence
    sel = list(r.selection)
    # drop a set that is the only selected cover of some ground point
    for j in sel:
        rest = [i for i in sel if i != j]
        if not inc[rest].any(axis=0).all():
            break
    with pytest.raises(InputError, match="uncovered"):
        lift_cover(r.instance.candidates[rest], r.coloring.tiling, r.params.nu, 64, r.instance, rest)


def test_lift_with_nu_equal_mu(square_run):
    r = square_run
    assert lift_cover(r.coloring.translates, r.coloring.tiling, r.params.mu, 256).passed


def test_lift_reports_witness(square_run):
    r = square_run
    with pytest.raises(LiftViolation) as e:
        lift_cover(r.coloring.translates[:1], r.coloring.tiling, r.params.nu, 64)
    assert len(e.value.witness) == 2
    cert = lift_cover(r.coloring.translates[:1], r.coloring.tiling, r.params.nu, 64, raise_on_fail=False)
    assert not cert.passed and cert.witness is not None


def test_pipeline_bound_chain(hex_run):
    b, _inst = hex_run.bounds, hex_run.instance
    assert b.tau_source == "lp"
    assert b.color_count_m <= b.finite_run_bound
    assert b.max_set_size <= b.incidence_bound
    assert b.tau_star >= b.ground_size / b.max_set_size - 1e-9
    assert b.tau_star <= b.color_count_m
