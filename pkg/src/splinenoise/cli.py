"""Command-line entry point.

``splinenoise curves`` runs a Monte Carlo sweep from a JSON config and writes
CSV (and SVG) probability curves plus a manifest; ``splinenoise check`` runs
the numerical self-check battery.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bspline import penalty_operator
from .checks import REPORT_NAME, run_oracle_checks
from .errors import ConfigError, ExcessiveFailuresError
from .experiment import RNG_SCHEME, ExperimentConfig, monte_carlo
from .svg import line_chart

log = logging.getLogger("splinenoise")

EXIT_OK, EXIT_CONFIG, EXIT_FAILURES = 0, 1, 2
MANIFEST_NAME = "manifest.json"


def _num(v):
    return format(float(v), ".17g")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(c if isinstance(c, str) else _num(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def load_config(path):
    """Read a config file, or the config echoed inside a manifest."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if isinstance(data, dict) and "rng_scheme" in data and "config" in data:
        data = data["config"]
    return ExperimentConfig.from_dict(data)


def write_curves(result, out, svg=True):
    """Write the three curve families; returns the list of CSV paths."""
    cfg = result.config
    lam, sig = cfg.lambda_grid, cfg.sigma_grid
    written = []
    lam_dir, sig_dir = out / "lambda_axis", out / "sigma_axis"
    lam_dir.mkdir(parents=True, exist_ok=True)
    sig_dir.mkdir(parents=True, exist_ok=True)

    for s, sv in enumerate(sig):
        path = lam_dir / f"sigma={sv!r}.csv"
        _write_csv(path, ("axis", "value", "p1", "p2"),
                   [("lambda", lv, result.p1[s, l], result.p2[s, l]) for l, lv in enumerate(lam)])
        written.append(path)
        if svg:
            path.with_suffix(".svg").write_text(line_chart(
                {"p1": (lam, result.p1[s]), "p2": (lam, result.p2[s])},
                title=f"n={cfg.n}, sigma={sv:g}", xlabel="lambda", ylabel="probability"))

    for l, lv in enumerate(lam):
        path = sig_dir / f"lambda={lv!r}.csv"
        _write_csv(path, ("axis", "value", "p1", "p2"),
                   [("sigma", sv, result.p1[s, l], result.p2[s, l]) for s, sv in enumerate(sig)])
        written.append(path)
        if svg:
            path.with_suffix(".svg").write_text(line_chart(
                {"p1": (sig, result.p1[:, l]), "p2": (sig, result.p2[:, l])},
                title=f"n={cfg.n}, lambda={lv:g}", xlabel="sigma", ylabel="probability"))

    path = out / "p3_p4_vs_sigma.csv"
    _write_csv(path, ("sigma", "p3", "p4"), list(zip(sig, result.p3, result.p4)))
    written.append(path)
    if svg:
        path.with_suffix(".svg").write_text(line_chart(
            {"p3": (sig, result.p3), "p4": (sig, result.p4)},
            title=f"path failures, n={cfg.n}", xlabel="sigma", ylabel="probability"))
    return written


def run_curves(config_path, out_dir, seed=None, threads=1, svg=True):
    """Run a sweep and write its outputs. Returns the process exit code."""
    try:
        config = load_config(config_path)
        if seed is not None:
            config = config.replace(seed=seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    code = EXIT_OK
    t0 = time.perf_counter()
    try:
        result = monte_carlo(config, threads=threads)
    except ExcessiveFailuresError as exc:
        print(f"error: {exc}", file=sys.stderr)
        result, code = exc.result, EXIT_FAILURES
    elapsed = time.perf_counter() - t0

    write_curves(result, out, svg=svg)
    manifest = {
        "tool": "splinenoise",
        "tool_version": __version__,
        "rng_scheme": RNG_SCHEME,
        "numpy_version": np.__version__,
        "config": config.to_dict(),
        "duration_seconds": round(elapsed, 3),
        "trial_failures": {repr(s): int(f) for s, f in zip(config.sigma_grid, result.failures)},
        "zero_strong_noise_draws": int(result.zero_signs.sum()),
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n")
    log.info("wrote %s in %.2fs", out, elapsed)
    return code


def _perturbed_penalty(knots):
    P = penalty_operator(knots)
    return type(P)(P.delta2, P.gram, P.L * 1.01)


FAULTS = {"penalty": _perturbed_penalty}


def build_parser():
    parser = argparse.ArgumentParser(prog="splinenoise", description="Spline residual strong-noise detection experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curves", help="run a Monte Carlo sweep and write probability curves")
    p.add_argument("--config", required=True, help="JSON config (or a previous manifest.json)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")
    p.add_argument("--no-svg", action="store_true", help="skip SVG charts")

    c = sub.add_parser("check", help="run the numerical self-check battery")
    c.add_argument("--out", required=True, help=f"directory for {REPORT_NAME}")
    c.add_argument("--inject-fault", choices=sorted(FAULTS), help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "curves":
        return run_curves(args.config, args.out, seed=args.seed, threads=max(args.threads, 1),
                          svg=not args.no_svg)
    penalty_fn = FAULTS[args.inject_fault] if args.inject_fault else penalty_operator
    code = run_oracle_checks(args.out, penalty_fn=penalty_fn)
    sys.stdout.write((Path(args.out) / REPORT_NAME).read_text())
    return code


if __name__ == "__main__":
    sys.exit(main())
