import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chromatic_tiler.errors import InputError
from chromatic_tiler.geom import ConvexBody, norm
from chromatic_tiler.lattice import Lattice, Multilattice, Torus, reduce, sample_grid, torus_distance

SQRT3 = math.sqrt(3)
BODIES = [ConvexBody.ball(2), ConvexBody.cube(2), ConvexBody.cross_polytope(2)]


def brute_distance(T, K, p, q, box=12):
    """Minimum over a generous coefficient box around the rounded coordinates, no pruning."""
    n = T.dimension
    d = np.asarray(p) - np.asarray(q)
    z0 = np.rint(T.lattice.coords(d))
    Z = np.array(list(itertools.product(range(-box, box + 1), repeat=n)), dtype=float)
    return norm(K, d - T.lattice.points(z0) + T.lattice.points(Z)).min(axis=-1)


def skew_lattice(seed):
    rng = np.random.default_rng(seed)
    while True:
        B = rng.normal(size=(2, 2))
        if abs(np.linalg.det(B)) > 0.3:
            return Lattice(B)


def test_lattice_validation():
    with pytest.raises(InputError):
        Lattice([[1, 2], [2, 4]])
    with pytest.raises(InputError):
        Lattice([[1, 0, 0], [0, 1, 0]])
    L = Lattice.hexagonal()
    assert L.covolume == pytest.approx(SQRT3 / 2, rel=1e-12)


def test_multilattice_rejects_coincident_translates():
    with pytest.raises(InputError, match="coincide"):
        Multilattice(Lattice.integer(2), [[0.2, 0.3], [1.2, -0.7]])
    M = Multilattice(Lattice.integer(2), [[0.2, 0.3], [1.7, -0.5]])
    assert M.q == 2
    assert np.allclose(M.translates[1], [0.7, 0.5])


def test_reduce_examples():
    T2 = Torus(Lattice.integer(2, 2.0))
    assert np.allclose(reduce(T2, [2.7, 0]), [0.7, 0])
    assert np.allclose(reduce(T2, [0, 0]), [0, 0])
    Th = Torus(Lattice.hexagonal())
    assert np.allclose(reduce(Th, [1, 0]), [0, 0], atol=1e-12)


def test_reduce_idempotent(rng):
    for T in [Torus(Lattice.hexagonal()), Torus(skew_lattice(3)), Torus(Lattice.integer(3, 2.0))]:
        P = rng.normal(size=(1000, T.dimension)) * 10
        R = reduce(T, P)
        assert np.array_equal(reduce(T, R), R)
        z = T.lattice.coords(R)
        assert np.all((z >= -1e-12) & (z < 1))
        assert np.allclose(np.rint(T.lattice.coords(P - R)), T.lattice.coords(P - R), atol=1e-9)


def test_torus_distance_examples(disk):
    T2 = Torus(Lattice.integer(2, 2.0))
    assert torus_distance(T2, disk, [0, 0], [1.9, 0]) == pytest.approx(0.1)
    assert torus_distance(T2, disk, [0.3, 0.4], [0.3, 0.4]) == 0
    Th = Torus(Lattice.hexagonal())
    assert torus_distance(Th, disk, [0, 0], [0.5, SQRT3 / 6]) == pytest.approx(1 / SQRT3)


@pytest.mark.parametrize("K", BODIES, ids=["disk", "square", "cross"])
@given(seed=st.integers(0, 2**32 - 1))
def test_torus_distance_matches_unpruned_search(K, seed):
    rng = np.random.default_rng(seed)
    T = Torus(skew_lattice(seed))
    p, q = rng.normal(size=(2, 40, 2)) * 3
    assert np.allclose(torus_distance(T, K, p, q), brute_distance(T, K, p[:, None], q[:, None]), atol=1e-9)


@pytest.mark.parametrize("K", BODIES, ids=["disk", "square", "cross"])
def test_torus_metric_properties(K, rng):
    T = Torus(Lattice.hexagonal())
    p, q, r = rng.normal(size=(3, 1000, 2)) * 2
    d = lambda a, b: torus_distance(T, K, a, b)
    assert np.all(d(p, r) <= d(p, q) + d(q, r) + 1e-9)
    assert np.allclose(d(p, q), d(q, p), atol=1e-12)
    assert np.all(d(p, q) <= norm(K, p - q) + 1e-12)
    w = T.lattice.points(rng.integers(-5, 6, size=(1000, 2)))
    assert np.allclose(d(p, p + w), 0, atol=1e-9)


def test_euclidean_shift_pruning_counts(disk):
    assert len(Torus(Lattice.integer(3, 2.0)).image_shifts(ConvexBody.ball(3))) == 1
    assert len(Torus(Lattice.hexagonal()).image_shifts(disk)) == 5


def test_sample_grid_examples():
    T = Torus(Lattice.integer(2, 2.0))
    assert sample_grid(T, 2).tolist() == [[0, 0], [1, 0], [0, 1], [1, 1]]
    with pytest.raises(InputError):
        sample_grid(T, 1)
    with pytest.raises(InputError):
        sample_grid(Torus(Lattice.integer(3)), 1000)
    Th = Torus(Lattice.hexagonal())
    z = Th.lattice.coords(sample_grid(Th, 3))
    assert z.shape == (9, 2)
    assert np.allclose(np.sort(np.unique(np.round(z, 12))), [0, 1 / 3, 2 / 3])
