"""Command-line driver.

    permeaflow run <config>           one case, artifacts under --out
    permeaflow convergence <config>   h-halving battery and rate table
    permeaflow energy-test <config>   dt battery, modified energy monotonicity
    permeaflow limits <config>        epsilon sweep of the sharp-limit case
    permeaflow cases list

Exit status is 1 when an acceptance threshold fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from contextlib import nullcontext
from pathlib import Path

from . import __version__
from .config import RunConfig, dump_config, load_config
from .grid import ConfigurationError
from .io import write_manifest

log = logging.getLogger("permeaflow")

RATE_BOUNDS = (1.7, 2.3)
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _out_root(args, rc: RunConfig | None) -> Path:
    if args.out:
        return Path(args.out)
    if rc is not None and rc.out_dir:
        return Path(rc.out_dir)
    return Path(os.environ.get("PERMEAFLOW_OUT", "permeaflow-out"))


def _prepare(args, rc: RunConfig, suffix: str = "") -> Path:
    out = _out_root(args, rc) / (rc.case.kind.value + suffix)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(dump_config(rc), encoding="utf-8")
    return out


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg, flush=True)


def _verdict(args, ok: bool, what: str) -> int:
    print(f"{'PASS' if ok else 'FAIL'} {what}")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args, rc: RunConfig) -> int:
    from .experiments import run_case

    out = _prepare(args, rc)

    def progress(state, stats):
        if rc.case.output_every and state.n % rc.case.output_every == 0:
            _say(args, f"step {state.n:6d}  t={state.t:.6g}  gauss={stats.gauss_iters}  newton={stats.newton_iters}")

    res = run_case(rc.case, rc.solver, out_dir=out, progress=progress)
    write_manifest(out, [p for p in out.iterdir()])
    for key, val in res.report.items():
        if key != "checks":
            _say(args, f"{key:>26}: {val}")
    for name, ok in res.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_convergence(args, rc: RunConfig) -> int:
    from .experiments import run_convergence

    out = _prepare(args, rc, "-convergence")
    table, results = run_convergence(
        rc.levels, rc.solver, rc.case,
        progress=lambda n, r: _say(args, f"{n}x{n} done in {r.report['wall_time']:.1f}s"))
    text = table.format()
    print(text)
    (out / "rate_table.txt").write_text(text + "\n", encoding="utf-8")
    with open(out / "rates.csv", "w", newline="\n", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variable", "coarse", "fine", "l2", "linf", "rate_l2", "rate_linf"])
        for var, rows in table.rows.items():
            for r in rows:
                w.writerow([var, r.coarse, r.fine, f"{r.l2:.16e}", f"{r.linf:.16e}",
                            "" if r.rate_l2 is None else f"{r.rate_l2:.6f}",
                            "" if r.rate_linf is None else f"{r.rate_linf:.6f}"])
    write_manifest(out, list(out.iterdir()))
    lo, hi = RATE_BOUNDS
    ok = all(lo <= r <= hi for var in table.rows for r in table.rates(var))
    return _verdict(args, ok, f"all L2 rates in [{lo}, {hi}]")


def cmd_energy_test(args, rc: RunConfig) -> int:
    from .experiments import CaseKind, energy_dts, run_energy_battery
    from .experiments.runner import ENERGY_TOL
    from .io import append_energy_log

    if rc.case.kind not in (CaseKind.ENERGY_STABILITY, CaseKind.CONVERGENCE_2D):
        raise ConfigurationError("energy-test needs an EnergyStability or Convergence2D section")
    out = _prepare(args, rc, "-energy")
    ok = True
    for k, dt in zip(rc.ks, energy_dts(rc.ks)):
        (res,) = run_energy_battery([dt], rc.case, rc.solver, rc.min_steps)
        path = out / f"energy_k{k}.csv"
        path.unlink(missing_ok=True)
        for n, t, rep in res.energies:
            append_energy_log(rep, t, n, path)
        inc = res.report["max_energy_increase"]
        good = inc <= ENERGY_TOL
        ok &= good
        _say(args, f"k={k} dt={dt:.6g} steps={res.report['steps']} max dE_mod={inc:.3e} "
                   f"volume drift={res.report['volume_drift']:.2e} mass drift={res.report['mass_drift']:.2e}"
                   f"{'' if good else '  <-- increase'}")
    write_manifest(out, list(out.iterdir()))
    return _verdict(args, ok, f"modified energy nonincreasing (tol {ENERGY_TOL:g}) for every dt")


def cmd_limits(args, rc: RunConfig) -> int:
    from .experiments import CaseKind, run_limits

    if rc.case.kind is not CaseKind.SHARP_LIMIT_1D:
        raise ConfigurationError("limits needs a SharpLimit1D section")
    out = _prepare(args, rc, "-limits")
    results = run_limits(rc.epsilons, rc.case, rc.solver)
    errs = [r.report["bulk_linf_error"] for r in results]
    with open(out / "limits.csv", "w", newline="\n", encoding="utf-8") as fh:
        fh.write("epsilon,nx,bulk_linf_error\n")
        for r in results:
            fh.write(f"{r.report['epsilon']:.16e},{r.report['nx']},{r.report['bulk_linf_error']:.16e}\n")
            _say(args, f"eps={r.report['epsilon']:<6g} nx={r.report['nx']:<6d} bulk Linf error={r.report['bulk_linf_error']:.3e}")
    write_manifest(out, list(out.iterdir()))
    ok = all(b < a for a, b in zip(errs, errs[1:])) and errs[-1] <= 0.5 * errs[0]
    return _verdict(args, ok, "bulk error decreasing in epsilon, last <= half of first")


def cmd_cases(args) -> int:
    from .experiments import list_cases

    for name in list_cases():
        print(name)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--out", default=d, help="output root (default: $PERMEAFLOW_OUT or ./permeaflow-out)")
    p.add_argument("--threads", type=int, default=d, help="thread count for BLAS/OpenMP pools")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="print verdicts only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permeaflow", description="Phase-field membrane transport solver.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _flags(common, suppress=True)
    for name, helptext in (("run", "run one case"), ("convergence", "grid refinement battery"),
                           ("energy-test", "time-step battery"), ("limits", "sharp-interface epsilon sweep")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("config", help="INI configuration file")
    cp = sub.add_parser("cases", parents=[common], help="case catalog")
    cp.add_argument("action", choices=["list"])
    return parser


def _thread_limit(n: int | None):
    if not n:
        return nullcontext()
    if n < 1:
        raise ConfigurationError("--threads must be positive")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        with _thread_limit(args.threads):
            if args.command == "cases":
                return cmd_cases(args)
            rc = load_config(args.config)
            handler = {"run": cmd_run, "convergence": cmd_convergence,
                       "energy-test": cmd_energy_test, "limits": cmd_limits}[args.command]
            return handler(args, rc)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
