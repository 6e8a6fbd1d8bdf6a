"""Acceptance criteria A1-A7; each test prints one PASS/FAIL line."""

import math
import time
from contextlib import contextmanager

import numpy as np

from chromatic_tiler.bounds import butler_bound, theorem1_bound
from chromatic_tiler.cli import main
from chromatic_tiler.color import build_coloring, partition_seven_baseline
from chromatic_tiler.cover import fractional_optimum, greedy_cover
from chromatic_tiler.geom import ConvexBody
from chromatic_tiler.tiling import build_ball_multilattice, hexagonal_tiling, square_tiling, tiling_parameters

SQRT3 = math.sqrt(3)
A3_BUDGET = 60
A3_SECONDS = {}


@contextmanager
def criterion(capsys, name, limit):
    t0 = time.perf_counter()
    checks = {}
    err = None
    try:
        yield checks
    except Exception as e:  # reported, then re-raised
        err = e
    dt = time.perf_counter() - t0
    checks[f"runtime {dt:.2f}s < {limit:g}s"] = dt < limit
    failed = [k for k, ok in checks.items() if not ok]
    ok = err is None and not failed
    detail = "; ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items())
    with capsys.disabled():
        print(f"\n{name} {'PASS' if ok else 'FAIL'} {detail}" + (f" error={err!r}" if err else ""))
    if err is not None:
        raise err
    assert not failed, failed
    return dt


def test_a1_lovasz(capsys):
    with criterion(capsys, "A1", 10) as c:
        rng = np.random.default_rng(1)
        worst = -math.inf
        for _ in range(200):
            g, m = int(rng.integers(1, 21)), int(rng.integers(1, 13))
            M = rng.random((m, g)) < rng.uniform(0.1, 0.6)
            for j in np.flatnonzero(~M.any(axis=0)):
                M[rng.integers(m), j] = True
            tau = fractional_optimum(M)[1]
            bound = (1 + math.log(M.sum(axis=1).max())) * tau
            worst = max(worst, len(greedy_cover(M)) - bound)
        c[f"greedy - (1+ln max|H|)tau* max {worst:.4f} < 1e-9"] = worst < 1e-9


def test_a2_tiling_parameters(capsys):
    with criterion(capsys, "A2", 5) as c:
        disk = ConvexBody.ball(2)
        h = tiling_parameters(hexagonal_tiling(), disk)
        s = tiling_parameters(square_tiling(2), disk)
        c["hex gamma"] = abs(h.gamma - 2 / SQRT3) <= 1e-9
        c["hex mu"] = abs(h.mu - (2 * SQRT3 - 3)) <= 1e-9
        c["square gamma"] = abs(s.gamma - math.sqrt(2)) <= 1e-9
        gammas = {}
        for n in (2, 3):
            _, til = build_ball_multilattice(n)
            gammas[n] = tiling_parameters(til, ConvexBody.ball(n)).gamma
        c["ball n=3 gamma"] = abs(gammas[3] - SQRT3) <= 1e-9
        c["ball gamma <= 2"] = all(g <= 2 for g in gammas.values())


def pipeline_checks(c, r, lift_res, pairs):
    v, b = r.verification, r.bounds
    s = v.structural
    c[f"max diameter {s['max_diameter']:.9f} < 1"] = s["max_diameter"] < 1 and s["diameter_margin"] > 0
    c[f"min separation {s['min_separation']:.9f} > 1"] = s["min_separation"] > 1 and s["separation_margin"] > 0
    c[f"lift {v.cover['sample_res']}^n uncovered {v.cover['uncovered']}"] = (
        v.cover["sample_res"] == lift_res and v.cover["uncovered"] == 0
    )
    c[f"{v.sampled['pairs']} pairs violations {v.sampled['violations']}"] = (
        v.sampled["pairs"] == pairs and v.sampled["violations"] == 0 and v.sampled["undefined"] == 0
    )
    c[f"m={b.color_count_m} <= {b.finite_run_bound:.3f} (tau* {b.tau_source} {b.tau_star:.4f})"] = (
        b.color_count_m <= b.finite_run_bound and b.tau_source == "lp"
    )
    c[f"max set {b.max_set_size} <= {b.incidence_bound:.3f}"] = b.max_set_size <= b.incidence_bound


def test_a3_hexagonal(capsys):
    with criterion(capsys, "A3", A3_BUDGET) as c:
        t0 = time.perf_counter()
        r = build_coloring({"construction": "hexagonal"})
        A3_SECONDS["build"] = time.perf_counter() - t0
        pipeline_checks(c, r, 512, 100_000)


def test_a4_ball_three(capsys):
    with criterion(capsys, "A4", 300) as c:
        cfg = {"construction": "ball-generic", "n": 3, "delta": 0.5, "cand_res": 12, "lift_res": 64, "pair_samples": 10_000}
        r = build_coloring(cfg)
        c[f"gamma {r.params.gamma:.9f} = sqrt 3"] = abs(r.params.gamma - SQRT3) <= 1e-9
        pipeline_checks(c, r, 64, 10_000)


def test_a5_seven_baseline(capsys):
    with criterion(capsys, "A5", 5) as c:
        C, rep = partition_seven_baseline()
        c[f"colors {C.color_count} = 7"] = C.color_count == 7
        c[f"separation {rep.structural['min_separation']:.5f} verified"] = rep.passed


def test_a6_bounds(capsys):
    with criterion(capsys, "A6", 1) as c:
        v = theorem1_bound(100, 1, 2)
        c[f"ln bound(100,1,2) {v:.4f}"] = abs(v - 116.8556) <= 1e-3
        roots = [math.exp(theorem1_bound(n, 1, 2) / n) for n in (10**3, 10**4, 10**5)]
        c[f"roots {roots[0]:.5f} {roots[1]:.5f} {roots[2]:.5f}"] = roots[1] <= 3.01 and roots[0] > roots[1] > roots[2] > 3
        b = butler_bound(1000, 2**1000, 0)
        c[f"butler {b:.5f}"] = abs(b - 2.0389) <= 1e-3


def test_a7_determinism(capsys, tmp_path, monkeypatch):
    # two full hexagonal runs against twice the A3 budget
    t0 = time.perf_counter()
    with criterion(capsys, "A7", 2 * A3_BUDGET) as c:
        for threads, sub in (("1", "a"), ("4", "b")):
            monkeypatch.setenv("CHROMATIC_TILER_THREADS", threads)
            code = main(["color", "--construction", "hexagonal", "--seed", "11", "--out", str(tmp_path / sub)])
            capsys.readouterr()
            c[f"exit code threads={threads}"] = code == 0
        for name in ("coloring.json", "report.json"):
            c[f"{name} identical"] = (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        if "build" in A3_SECONDS:
            ratio = (time.perf_counter() - t0) / A3_SECONDS["build"]
            c[f"measured {ratio:.2f}x the A3 pipeline"] = True
