"""Command-line interface.

Exit codes: 0 success, 1 configuration or input error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Sequence

from .asymptotics import (
    abscissa_series,
    convergence_study,
    loglog_slope,
    regime_classify,
    residue_constants,
)
from .errors import ConfigError, KernelValidationError, SectorError, VoltspecError
from .kernel import ExponentialKernel, load_kernel, sector_decay_probe
from .modal_sim import abscissa_consistency, assemble, integrate, max_step
from .oracle import crosscheck, vieta_identities
from .roots import full_slice, residual_tol
from .stability import classify
from .suite import Case, stable_suite
from .symbol import Mode, eval_ell

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2
ORACLE_MAX_N = 12
DEFAULT_RAYS = (0.0, 0.75 * math.pi, -0.75 * math.pi)
DEFAULT_RADII = (10.0, 100.0, 1000.0, 10000.0)


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def render_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(float(v)) if hasattr(v, "dtype") else fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def render_json(doc) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def emit(args, name: str, text: str) -> None:
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------------
# config parsing

def parse_modes(spec: str | None, grid: str | None, default: Sequence[float] = (1.0,)) -> list[float]:
    if spec and grid:
        raise ConfigError("give either --modes or --a-grid, not both")
    if grid:
        parts = grid.split(":")
        if len(parts) != 3:
            raise ConfigError("--a-grid expects start:ratio:count")
        try:
            start, ratio, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"bad --a-grid {grid!r}") from None
        if count < 1 or start < 1 or ratio <= 0:
            raise ConfigError("--a-grid needs start >= 1, ratio > 0, count >= 1")
        return [start * ratio**j for j in range(count)]
    if spec:
        try:
            values = [float(x) for x in spec.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad --modes {spec!r}") from None
        if not values:
            raise ConfigError("--modes is empty")
        return values
    return list(default)


def parse_floats(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad {flag} {text!r}") from None


def make_modes(values: Sequence[float], theta: float) -> list[Mode]:
    try:
        return [Mode(a, theta) for a in values]
    except KernelValidationError as exc:
        raise ConfigError(str(exc)) from None


def need_kernel(args) -> ExponentialKernel:
    if not args.kernel:
        raise ConfigError("--kernel is required")
    return load_kernel(args.kernel)


# ----------------------------------------------------------------------------
# commands

def cmd_spectrum(args) -> int:
    kernel = need_kernel(args)
    modes = make_modes(parse_modes(args.modes, args.a_grid), args.theta)
    rows = []
    failed = []
    for i, mode in enumerate(modes):
        try:
            slc = full_slice(mode, kernel)
        except VoltspecError as exc:
            failed.append((i, str(exc)))
            continue
        tol = residual_tol(mode)
        for z in slc.real_zeros:
            rows.append((i, mode.a, "real", z.value, 0.0, z.residual))
        for x in slc.extra_real:
            rows.append((i, mode.a, "real", x, 0.0, abs(eval_ell(mode, kernel, x))))
        for x in slc.unstable_real:
            rows.append((i, mode.a, "unstable", x, 0.0, abs(eval_ell(mode, kernel, x))))
        if slc.complex_pair is not None:
            p = slc.complex_pair
            rows.append((i, mode.a, "pair", p.alpha, p.beta, p.residual))
            rows.append((i, mode.a, "pair", p.alpha, -p.beta, p.residual))
        if slc.residual_max > tol:
            failed.append((i, f"residual {slc.residual_max:.3e} exceeds {tol:.3e}"))
    header = ("mode_index", "a_n", "kind", "re", "im", "residual")
    if args.format == "json":
        emit(args, "spectrum.json", render_json({"zeros": [dict(zip(header, r)) for r in rows],
                                                 "failures": failed}))
    else:
        emit(args, "spectrum.csv", render_csv(header, rows))
    for i, msg in failed:
        print(f"mode {i}: {msg}", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_asymptotics(args) -> int:
    kernel = need_kernel(args)
    grid = parse_modes(args.modes, args.a_grid, default=(1e2, 1e3, 1e4))
    source = kernel.family if kernel.family is not None and kernel.family.r <= 1 else kernel
    study = convergence_study(source, args.theta, grid)
    header = ("a_n", "re", "im", "re_pred", "im_pred", "d_re", "d_im", "route")
    rows = [(r.a, r.computed.real, r.computed.imag, r.predicted.real, r.predicted.imag,
             r.d_re, r.d_im, r.route) for r in study.rows]
    summary = {
        "theta": args.theta,
        "N": study.N,
        "regime": study.regime.as_dict(),
        "slope_re": study.slope_re,
        "slope_im": study.slope_im,
        "order_re": study.order_re,
        "order_im": study.order_im,
        "pass_re": study.pass_re,
        "pass_im": study.pass_im,
        "notes": study.notes,
    }
    ok = study.passed
    if study.regime.kind == "ConstantAbscissa":
        fam = kernel.family
        re, _ = abscissa_series(fam, args.theta, grid, N=study.N)
        target = study.regime.vartheta
        slope = loglog_slope(grid, [abs(x - target) for x in re])
        summary["vartheta"] = target
        summary["vartheta_slope"] = slope
        summary["pass_vartheta"] = slope <= -(1.0 - fam.r) + 0.3
        ok = ok and summary["pass_vartheta"]
    if kernel.family is not None and 0 < kernel.family.r < 1:
        c = residue_constants(kernel.family.r)
        summary["D"] = c.D
        summary["D_diagnostic"] = c.sign_diagnostic
    summary["passed"] = ok
    if args.out:
        emit(args, "asymptotics.csv", render_csv(header, rows))
        emit(args, "asymptotics.json", render_json(summary))
    elif args.format == "json":
        emit(args, "asymptotics.json", render_json(summary))
    else:
        emit(args, "asymptotics.csv", render_csv(header, rows))
    print(("PASS" if ok else "FAIL") + f" slope_re={study.slope_re:.3f} slope_im={study.slope_im:.3f}",
          file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_classify(args) -> int:
    kernel = need_kernel(args)
    modes = make_modes(parse_modes(args.modes, args.a_grid), args.theta)
    report = classify(kernel, modes)
    doc = report.as_dict()
    doc.update(regime_classify(kernel.family, args.theta).as_dict())
    if kernel.family is not None:
        doc["r"] = kernel.family.r
    emit(args, "classify.json", render_json(doc))
    return EXIT_OK


def _oracle_cases(args) -> list[Case]:
    if args.kernel:
        kernel = load_kernel(args.kernel)
        if kernel.N > ORACLE_MAX_N:
            raise ConfigError(f"oracle check supports at most {ORACLE_MAX_N} terms (got {kernel.N})")
        modes = make_modes(parse_modes(args.modes, args.a_grid), args.theta)
        return [Case(kernel, m) for m in modes]
    return stable_suite(seed=args.seed, count=args.count)


def cmd_oracle_check(args) -> int:
    cases = _oracle_cases(args)
    rows = []
    failures = 0
    for i, case in enumerate(cases):
        rep = crosscheck(case.mode, case.kernel, perturb=args.perturb)
        zeros = full_slice(case.mode, case.kernel).zeros()
        s_res, p_res = vieta_identities(case.mode, case.kernel, zeros)
        ok = rep.passed and s_res <= 1e-8 and p_res <= 1e-8
        failures += not ok
        rows.append((i, case.kernel.N, case.mode.a, case.mode.theta, rep.dist_companion,
                     rep.dist_eigen, rep.dist_oracles, s_res, p_res, "PASS" if ok else "FAIL"))
    header = ("case", "N", "a_n", "theta", "dist_companion", "dist_eigen", "dist_oracles",
              "vieta_sum", "vieta_prod", "status")
    summary = {"cases": len(cases), "failures": failures, "seed": args.seed,
               "passed": failures == 0}
    if args.out:
        emit(args, "oracle_check.csv", render_csv(header, rows))
        emit(args, "oracle_check.json", render_json(summary))
    elif args.format == "json":
        emit(args, "oracle_check.json", render_json(summary))
    else:
        emit(args, "oracle_check.csv", render_csv(header, rows))
    print(f"{len(cases) - failures}/{len(cases)} PASS", file=sys.stderr)
    return EXIT_OK if failures == 0 else EXIT_VERIFY


def cmd_simulate(args) -> int:
    kernel = need_kernel(args)
    values = parse_modes(args.modes, args.a_grid)
    modes = make_modes(values, args.theta)
    reports = []
    trace_text = None
    ok = True
    for mode in modes:
        dt = args.dt if args.dt is not None else max_step(mode, kernel)
        rep = abscissa_consistency(mode, kernel, args.T, dt, args.u0, args.v0)
        if trace_text is None:
            trace = integrate(assemble(mode, kernel, args.u0, args.v0), rep.horizon, dt)
            trace_text = render_csv(trace.header, trace.as_rows(args.stride))
        doc = rep.as_dict()
        doc["a_n"] = mode.a
        doc["dt"] = dt
        reports.append(doc)
        ok = ok and rep.passed
    summary = {"theta": args.theta, "T": args.T, "modes": reports, "passed": ok}
    if args.out:
        emit(args, "trace.csv", trace_text)
        emit(args, "simulate.json", render_json(summary))
    elif args.format == "json":
        emit(args, "simulate.json", render_json(summary))
    else:
        emit(args, "trace.csv", trace_text)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_probe(args) -> int:
    kernel = need_kernel(args)
    rays = parse_floats(args.rays, "--rays") if args.rays else list(DEFAULT_RAYS)
    radii = parse_floats(args.radii, "--radii") if args.radii else list(DEFAULT_RADII)
    table = sector_decay_probe(kernel, kernel.family, args.delta, radii, rays)
    summary = {
        "delta": args.delta,
        "decay_violations": table.decay_violations,
        "h_bounded": table.h_bounded,
        "h_ratio": table.h_ratio,
        "notes": table.notes,
        "passed": table.passed,
    }
    if args.out:
        emit(args, "probe.csv", render_csv(table.header, table.as_rows()))
        emit(args, "probe.json", render_json(summary))
    elif args.format == "json":
        emit(args, "probe.json", render_json(summary))
    else:
        emit(args, "probe.csv", render_csv(table.header, table.as_rows()))
    return EXIT_OK if table.passed else EXIT_VERIFY


COMMANDS = {
    "spectrum": cmd_spectrum,
    "asymptotics": cmd_asymptotics,
    "classify": cmd_classify,
    "oracle-check": cmd_oracle_check,
    "simulate": cmd_simulate,
    "probe": cmd_probe,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kernel", help="inline JSON or path to a kernel JSON file")
    common.add_argument("--theta", type=float, default=0.0, help="exponent theta in [0, 1]")
    common.add_argument("--modes", help="comma-separated mode eigenvalues a_n")
    common.add_argument("--a-grid", dest="a_grid", help="geometric grid start:ratio:count")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="stdout format (default: json for classify, csv otherwise)")

    parser = _Parser(prog="voltspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("spectrum", parents=[common], help="zeros of the symbol per mode")
    sub.add_parser("asymptotics", parents=[common], help="convergence of the pair to its asymptotics")
    sub.add_parser("classify", parents=[common], help="stability verdict and regime")
    p = sub.add_parser("oracle-check", parents=[common], help="cross-check roots against dense oracles")
    p.add_argument("--count", type=int, default=100, help="random cases when no kernel is given")
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p = sub.add_parser("simulate", parents=[common], help="time-domain decay versus abscissa")
    p.add_argument("--T", dest="T", type=float, default=200.0)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--v0", type=float, default=0.0)
    p.add_argument("--stride", type=int, default=100, help="trace rows written every stride steps")
    p = sub.add_parser("probe", parents=[common], help="decay of the transform along rays")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--rays", help="comma-separated ray angles (radians)")
    p.add_argument("--radii", help="comma-separated increasing radii")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format is None:
            args.format = "json" if args.command == "classify" else "csv"
        if not 0.0 <= args.theta <= 1.0:
            raise ConfigError("--theta must lie in [0, 1]")
        return COMMANDS[args.command](args)
    except (ConfigError, KernelValidationError, SectorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VoltspecError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
