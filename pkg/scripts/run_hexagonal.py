"""Build, verify and write the hexagonal n=2 coloring.

    python3 scripts/run_hexagonal.py --out runs/hex
"""

import argparse
from pathlib import Path

from chromatic_tiler import svg
from chromatic_tiler.cli import _run_report, _write, dumps
from chromatic_tiler.color import build_coloring
from chromatic_tiler.config import RunConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/hex")
    ap.add_argument("--delta", type=float)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = RunConfig(construction="hexagonal", delta=args.delta, seed=args.seed)
    res = build_coloring(cfg)
    out = Path(args.out)
    _write(out / "coloring.json", dumps(res.coloring.to_dict()))
    _write(out / "report.json", dumps(_run_report(cfg, res)))
    _write(out / "coloring.svg", svg.render(res.coloring))
    b, s = res.bounds, res.verification.structural
    print(f"m = {b.color_count_m} colors, tau* = {b.tau_star:.4f}, finite-run bound {b.finite_run_bound:.3f}")
    print(f"max diameter {s['max_diameter']:.9f}, min separation {s['min_separation']:.9f}")
    print(f"measure bound {b.measure_bound:.4f}, max set {b.max_set_size} <= {b.incidence_bound:.3f}")


if __name__ == "__main__":
    main()
