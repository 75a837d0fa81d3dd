"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O or file-format
error, 3 numerical failure (SVD non-convergence, divergence, broken
conjugate symmetry).
"""

import argparse
import csv
import json
import logging
import sys
from io import StringIO

from . import __version__
from .config import ConfigError, build_run_config, load_config_file
from .io import (
    CubeFormatError,
    atomic_write,
    export_band,
    read_cube_file,
    save_cube,
    write_report,
)
from .linalg import NumericalFailure
from .metrics import evaluate
from .noise import apply_noise
from .solver import DivergenceError, denoise
from .tensor_core import SymmetryError, permute_mode
from .weights import build_weight_plan, slice_singular_values

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("mdwtnn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--threads", type=int, help="worker threads for the mode updates")


def _solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--lam", help="sparse-noise weight, or 'auto'")
    g.add_argument("--tau-n", dest="tau_n", type=float)
    g.add_argument("--alpha", help="three comma-separated mode weights")
    g.add_argument("--rho", type=float)
    g.add_argument("--mu0", type=float)
    g.add_argument("--beta0", type=float)
    g.add_argument("--mu-max", dest="mu_max", type=float)
    g.add_argument("--tol", type=float)
    g.add_argument("--max-iter", dest="max_iter", type=int)
    _weight_flags(g)
    g.add_argument("--no-frequency-weighting", dest="frequency_weighting",
                   action="store_const", const=False)
    g.add_argument("--no-weight-refresh", dest="weight_refresh", action="store_const", const=False)
    g.add_argument("--tw-init", dest="tw_init", choices=("observation", "zero"))
    g.add_argument("--tw-refresh", dest="tw_refresh", type=int)


def _weight_flags(g):
    g.add_argument("--c1", type=float)
    g.add_argument("--c2", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--truncation", choices=("max-ratio", "energy-ratio", "none"))


def build_parser():
    parser = _Parser(prog="mdwtnn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="add simulated mixed noise to a clean cube")
    p.add_argument("clean")
    p.add_argument("out")
    p.add_argument("--case", type=int, choices=range(1, 6))
    p.add_argument("--gaussian", help="standard deviation, or lo:hi per band")
    p.add_argument("--impulse", help="impulse fraction, or lo:hi per band")
    p.add_argument("--clip", action="store_const", const=True)
    p.add_argument("--dtype", choices=("f32", "f64"), default="f64")
    _common(p)

    p = sub.add_parser("denoise", help="remove mixed noise from a cube")
    p.add_argument("noisy")
    p.add_argument("out")
    p.add_argument("--log", help="iteration log path (default OUT.log.jsonl)")
    _solver_flags(p)
    _common(p)

    p = sub.add_parser("evaluate", help="MPSNR/MSSIM/MSAM of a test cube")
    p.add_argument("ref")
    p.add_argument("test")
    p.add_argument("prefix", help="writes PREFIX.csv and PREFIX.json")
    p.add_argument("--log", help="iteration log of the run that produced TEST")
    p.add_argument("--peak", type=float)
    _common(p)

    p = sub.add_parser("inspect-weights", help="per-mode frequency weights and truncation counts")
    p.add_argument("cube")
    p.add_argument("--out", help="CSV path (default stdout)")
    _weight_flags(p)
    _common(p)

    p = sub.add_parser("tsvd", help="singular values of every frequency slice")
    p.add_argument("cube")
    p.add_argument("--mode", type=int, choices=(1, 2, 3), default=3)
    p.add_argument("--out", help="CSV path (default stdout)")
    _common(p)

    p = sub.add_parser("export-band", help="write one band as a 16-bit PGM")
    p.add_argument("cube")
    p.add_argument("band", type=int, help="1-based band index")
    p.add_argument("out")
    return parser


_CONFIG_KEYS = ("lam", "tau_n", "alpha", "rho", "mu0", "beta0", "mu_max", "tol", "max_iter",
                "c1", "c2", "eta", "truncation", "frequency_weighting", "weight_refresh",
                "tw_init", "tw_refresh", "threads", "seed", "case", "gaussian", "impulse",
                "clip", "peak")


def _run_config(args, paths):
    file_values = load_config_file(args.config) if getattr(args, "config", None) else {}
    overrides = {k: getattr(args, k) for k in _CONFIG_KEYS if hasattr(args, k)}
    return build_run_config(file_values, overrides, paths)


def _emit(text, out):
    if out:
        atomic_write(out, text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    cfg = _run_config(args, {"clean": args.clean, "out": args.out})
    src = read_cube_file(args.clean)
    noisy = apply_noise(src.data, cfg.noise)
    save_cube(noisy, args.out, dtype=args.dtype, bands=src.bands,
              meta={"command": "simulate", "run": cfg.as_dict()})
    print(f"wrote {args.out}")


def cmd_denoise(args):
    log_path = args.log or args.out + ".log.jsonl"
    cfg = _run_config(args, {"noisy": args.noisy, "out": args.out, "log": log_path})
    src = read_cube_file(args.noisy)
    result = denoise(src.data, cfg.solver)
    meta = {"command": "denoise", "run": cfg.as_dict(), "solver": result.config,
            "converged": result.converged, "iterations": result.iterations}
    save_cube(result.x_hat, args.out, bands=src.bands, meta=meta)
    lines = [json.dumps(rec, sort_keys=True) for rec in result.log_records()]
    lines.append(json.dumps({
        "final": True, "converged": result.converged, "iterations": result.iterations,
        "constraint": result.constraint_residual, "consensus": result.consensus_residual,
        "wall_time": result.wall_time, "run": cfg.as_dict(), "solver": result.config,
        "weights": result.plan.as_dict(),
    }, sort_keys=True))
    atomic_write(log_path, ("\n".join(lines) + "\n").encode("utf-8"))
    status = "converged" if result.converged else "stopped"
    print(f"{status} after {result.iterations} iterations; wrote {args.out}")


def _read_log(path):
    records, final = [], {}
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                if rec.get("final"):
                    final = rec
                else:
                    records.append(rec)
    return records, final


def cmd_evaluate(args):
    cfg = _run_config(args, {"ref": args.ref, "test": args.test, "prefix": args.prefix})
    ref = read_cube_file(args.ref).data
    test = read_cube_file(args.test)
    report = evaluate(ref, test.data, peak=cfg.peak)
    records, final = _read_log(args.log) if args.log else ([], {})
    wall = final.get("wall_time", report.wall_time)
    config = {"evaluate": cfg.as_dict(), "test": test.meta}
    write_report(report, args.prefix, config=config, log=records, wall_time=wall)
    print(f"MPSNR {report.mpsnr:.3f}  MSSIM {report.mssim:.4f}  MSAM {report.msam:.3f}")


def _csv(rows):
    buf = StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_inspect_weights(args):
    cfg = _run_config(args, {"cube": args.cube})
    x = read_cube_file(args.cube).data
    s = cfg.solver
    plan = build_weight_plan(x, c1=s.c1, c2=s.c2, eta=s.eta, truncation=s.truncation)
    rows = [("mode", "slice", "weight", "trunc_count")]
    for p in (1, 2, 3):
        w, tw = plan.mode(p)
        rows += [(p, k, repr(float(wk)), int(t)) for k, (wk, t) in enumerate(zip(w, tw), start=1)]
    _emit(_csv(rows), args.out)


def cmd_tsvd(args):
    x = read_cube_file(args.cube).data
    s = slice_singular_values(permute_mode(x, args.mode))
    rows = [("slice",) + tuple(f"sv{i}" for i in range(1, s.shape[1] + 1))]
    rows += [(k,) + tuple(repr(float(v)) for v in row) for k, row in enumerate(s, start=1)]
    _emit(_csv(rows), args.out)


def cmd_export_band(args):
    x = read_cube_file(args.cube).data
    export_band(x, args.band, args.out)
    print(f"wrote {args.out}")


COMMANDS = {
    "simulate": cmd_simulate,
    "denoise": cmd_denoise,
    "evaluate": cmd_evaluate,
    "inspect-weights": cmd_inspect_weights,
    "tsvd": cmd_tsvd,
    "export-band": cmd_export_band,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_usage().strip())
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CubeFormatError) as exc:
        code = getattr(exc, "code", "E_IO")
        print(f"I/O error [{code}]: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalFailure, DivergenceError, SymmetryError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
