"""Command line: ``chromatic-tiler {gamma,color,verify,bounds,baseline7}``.

Exit codes: 0 verified, 1 verification or certificate failure, 2 invalid
input or unsupported request.
"""

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bounds, svg
from .color import (
    SCHEMA,
    Coloring,
    VerificationFailed,
    build_coloring,
    build_tiling,
    partition_seven_baseline,
    verify_coloring,
)
from .config import RunConfig, thread_count
from .errors import CertificateError, ChromaticError, InputError, UnsupportedError
from .geom import ConvexBody
from .tiling import tiling_parameters

log = logging.getLogger("chromatic_tiler")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def load_config(args):
    data = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object")
    overrides = {
        "construction": args.construction,
        "n": args.n,
        "seed": args.seed,
        "pair_samples": args.samples,
        "delta": args.delta,
        "eta": args.eta,
        "cand_res": args.cand_res,
        "sat_res": args.sat_res,
        "lift_res": args.lift_res,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)


def cmd_gamma(args):
    cfg = load_config(args)
    K = ConvexBody.from_dict(cfg.body, cfg.n)
    tiling = build_tiling(cfg)
    params = tiling_parameters(tiling, K, cfg.eta)
    out = {"schema": SCHEMA, "construction": cfg.construction, "n": cfg.n, "k": tiling.k, "params": params.to_dict()}
    text = dumps(out)
    sys.stdout.write(text)
    if args.out:
        _write(Path(args.out) / "gamma.json", text)
    return EXIT_OK


def _run_report(cfg, res):
    inst = res.instance
    return {
        "schema": SCHEMA,
        "config": cfg.to_dict(),
        "params": res.params.to_dict(),
        "instance": {
            "ground_size": len(inst.ground.points),
            "candidates": len(inst.candidates),
            "max_set_size": inst.max_set_size,
            "incidence_bound": inst.incidence_bound,
            "nu_shrink": inst.nu_shrink,
            "packing_certificate": inst.ground.certificate,
            "selection": res.selection,
        },
        "verification": res.verification.to_dict(),
        "bounds": res.bounds.to_dict(),
        "passed": res.verification.passed and res.bounds.passed,
    }


def cmd_color(args):
    cfg = load_config(args)
    out = Path(args.out or ".")
    threads = thread_count()
    try:
        res = build_coloring(cfg, threads=threads)
        code = EXIT_OK
    except VerificationFailed as e:
        res = e.witness
        code = EXIT_FAIL
    C = res.coloring
    _write(out / "coloring.json", dumps(C.to_dict()))
    _write(out / "report.json", dumps(_run_report(cfg, res)))
    if C.n == 2:
        _write(out / "coloring.svg", svg.render(C))
    summary = {
        "passed": code == EXIT_OK,
        "colors": C.color_count,
        "max_diameter": res.verification.structural["max_diameter"],
        "min_separation": res.verification.structural["min_separation"],
        "out": str(out),
    }
    sys.stdout.write(dumps(summary))
    return code


def _default_lift_res(n):
    return RunConfig(construction="square", n=n).resolved_lift_res


def cmd_verify(args):
    try:
        data = json.loads(Path(args.coloring).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read coloring {args.coloring}: {e}") from e
    if not isinstance(data, dict):
        raise InputError("coloring file must hold a JSON object")
    C = Coloring.from_dict(data)
    samples = args.samples if args.samples is not None else 10_000
    lift_res = args.lift_res or _default_lift_res(C.n)
    rep = verify_coloring(C, samples, args.seed or 0, lift_res, thread_count())
    out = {"schema": SCHEMA, "colors": C.color_count, "verification": rep.to_dict()}
    text = dumps(out)
    sys.stdout.write(text)
    if args.out:
        _write(Path(args.out) / "verify.json", text)
    return EXIT_OK if rep.passed else EXIT_FAIL


def bounds_row(n, k, gamma, c):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        log_bound = bounds.theorem1_bound(n, k, gamma)
        butler = bounds.butler_bound(n, 2**n, c)
    return {
        "n": n,
        "k": k,
        "gamma": gamma,
        "c": c,
        "two_ln_k": 2.0 * math.log(k),
        "bracket": bounds.theorem1_log_bracket(n, k, gamma),
        "theorem1_log": log_bound,
        "theorem1": math.exp(log_bound) if log_bound < 709.0 else None,
        "theorem1_root": math.exp(log_bound / n),
        "butler": butler,
        "warnings": [str(w.message) for w in caught],
    }


def cmd_bounds(args):
    ns = args.n_values or [args.n if args.n is not None else 100]
    rows = [bounds_row(n, args.k, args.gamma, args.c) for n in ns]
    sys.stdout.write(dumps({"schema": SCHEMA, "rows": rows}))
    return EXIT_OK


def cmd_baseline7(args):
    out = Path(args.out or ".")
    samples = args.samples if args.samples is not None else 100_000
    C, rep = partition_seven_baseline(pair_samples=samples, seed=args.seed or 0, lift_res=args.lift_res or 512, threads=thread_count())
    _write(out / "baseline7.json", dumps(C.to_dict()))
    _write(out / "baseline7_report.json", dumps({"schema": SCHEMA, "colors": C.color_count, "verification": rep.to_dict()}))
    _write(out / "baseline7.svg", svg.render(C))
    sys.stdout.write(dumps({"passed": rep.passed, "colors": C.color_count, "out": str(out)}))
    return EXIT_OK if rep.passed else EXIT_FAIL


def _run_flags(p):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--construction", choices=["hexagonal", "square", "ball-generic", "explicit"])
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--cand-res", type=int)
    p.add_argument("--sat-res", type=int)


def _common(p):
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="random unit-distance pairs to test")
    p.add_argument("--lift-res", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="chromatic-tiler", description="Verified colorings of R^n_K from shrunk tilings.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="tiling parameters of a construction")
    _run_flags(p)
    _common(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("color", help="build, verify and write a coloring")
    _run_flags(p)
    _common(p)
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("verify", help="re-verify a coloring.json")
    p.add_argument("coloring")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    p.add_argument("--n", type=int)
    p.add_argument("--n-values", type=int, nargs="+")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--c", type=float, default=3.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("baseline7", help="classical 7-coloring of the plane")
    _common(p)
    p.set_defaults(func=cmd_baseline7)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, UnsupportedError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT
    except CertificateError as e:
        sys.stderr.write(f"verification failed: {e}\n")
        if getattr(e, "witness", None) is not None and not hasattr(e.witness, "coloring"):
            sys.stderr.write(f"witness: {_clean(e.witness)}\n")
        return EXIT_FAIL
    except ChromaticError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
