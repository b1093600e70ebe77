"""``qplane`` command line: verify | fq | transform | convergence.

Exit codes: 0 success, 1 a hard check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .fourier import (RELATIONS, WindowError, build_fourier_data, fourier_apply, plancherel_residual,
                      relation_residual, unitarity_defect)
from .io import ModeFileError, dumps, fmt_float, read_modes, write_modes
from .lattice import TWO_PI, CirclePoint, QLattice
from .modes import basis, random_mode_function
from .qexp import FqEvaluator
from .verify import (FOURIER_TEST_K, FOURIER_TEST_L, SUITES, ConfigError, VerifyConfig,
                     convergence_figure, run_verify)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("QPLANE_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"QPLANE_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"QPLANE_THREADS must be a positive integer, got {raw!r}")
    return n


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _lattice(q: float) -> QLattice:
    try:
        return QLattice(q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _suites(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in SUITES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown suite(s) {bad}; choose from {list(SUITES)}")
    return names


# --- verify ------------------------------------------------------------------

def cmd_verify(args) -> int:
    suites: list[str] = []
    for chunk in args.suite or [list(SUITES)]:
        suites.extend(s for s in chunk if s not in suites)
    try:
        cfg = VerifyConfig(q=args.q, k_window=(args.kmin, args.kmax), l_window=(-args.lmax, args.lmax),
                           n_theta=args.ntheta, tol_exact=args.tol_exact, tol_quad=args.tol_quad,
                           suites=tuple(suites), seed=args.seed, threads=_threads(), fmt=args.format)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    report = run_verify(cfg)
    _emit(report.render(cfg.fmt), args.out)
    return EXIT_FAIL if report.exit_code else EXIT_OK


# --- fq ----------------------------------------------------------------------

def cmd_fq(args) -> int:
    ev = FqEvaluator(_lattice(args.q))
    if args.point is not None:
        k_raw, theta_raw = args.point
        try:
            k, theta = int(k_raw), float(theta_raw)
        except ValueError:
            raise UsageError(f"--point expects an integer K and a real THETA, got {args.point}") from None
        v = ev.fq_point(CirclePoint(k, theta))
        _emit(f"{v.real:.15g}{v.imag:+.15g}j\n", args.out)
        return EXIT_OK
    n = args.ntheta
    if n < 1:
        raise UsageError(f"--ntheta must be positive, got {n}")
    thetas = TWO_PI * np.arange(n) / n
    values = ev.fq_circle(args.circle, thetas)
    rows = ["k,theta,re,im"] + [
        f"{args.circle},{fmt_float(t)},{fmt_float(v.real)},{fmt_float(v.imag)}" for t, v in zip(thetas, values)
    ]
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


# --- transform ---------------------------------------------------------------

def _kernel_args(args):
    if args.kmax < args.kmin:
        raise UsageError(f"empty kernel window [{args.kmin}, {args.kmax}]")
    if args.lmax < 0:
        raise UsageError(f"--lmax must be non-negative, got {args.lmax}")
    return (args.kmin, args.kmax), (-args.lmax, args.lmax)


def cmd_transform(args) -> int:
    try:
        f = read_modes(args.inp, default_q=args.q)
    except ModeFileError as exc:
        raise UsageError(f"parse error: {exc}") from None
    n_window, l_window = _kernel_args(args)
    try:
        data = build_fourier_data(f.lattice, n_window, l_window, args.ntheta, threads=_threads())
        res = fourier_apply(f, data)
    except (WindowError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    fmt = "csv" if args.format == "csv" else "json"
    write_modes(res.function, args.out, fmt)
    sidecar = dumps({
        "q": f.q,
        "kernel_window": list(n_window),
        "l_window": list(l_window),
        "n_theta": args.ntheta,
        "output_window": list(res.window),
        "tail": res.tail,
    }) + "\n"
    if args.out:
        Path(str(args.out) + ".tail.json").write_text(sidecar)
    else:
        sys.stderr.write(sidecar)
    return EXIT_OK


# --- convergence -------------------------------------------------------------

FAMILIES = ("relations", "plancherel", "unitarity", "parseval")


def convergence_rows(lattice: QLattice, axis: str, values: list[int], *, kernel_window=(-12, 12),
                     l_window=(-16, 16), n_theta: int = 512, seed: int = 0, n_functions: int = 5,
                     threads: int = 1) -> list[dict]:
    rng = np.random.default_rng([seed, SUITES.index("fourier")])
    fs = [basis(lattice, 0, 0)] + [random_mode_function(lattice, FOURIER_TEST_K, FOURIER_TEST_L, rng)
                                   for _ in range(n_functions)]
    rows = []
    for v in values:
        n_win, nt = ((-v, v), n_theta) if axis == "kwindow" else (kernel_window, v)
        data = build_fourier_data(lattice, n_win, l_window, nt, threads=threads)
        rows.append({
            axis: v,
            "relations": max(relation_residual(r, f, data).residual for r in RELATIONS for f in fs),
            "plancherel": max(plancherel_residual(k, l, data).residual for k in range(-2, 3) for l in range(-3, 4)),
            "unitarity": unitarity_defect(((-2, 2), (-3, 3)), data),
            "parseval": data.max_parseval_defect(),
        })
    return rows


def cmd_convergence(args) -> int:
    lattice = _lattice(args.q)
    values = args.values or ([8, 12, 16] if args.axis == "kwindow" else [128, 256, 512])
    n_window, l_window = _kernel_args(args)
    try:
        rows = convergence_rows(lattice, args.axis, values, kernel_window=n_window, l_window=l_window,
                                n_theta=args.ntheta, seed=args.seed, threads=_threads())
    except (WindowError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    lines = [",".join((args.axis,) + FAMILIES)]
    for row in rows:
        lines.append(",".join([str(row[args.axis])] + [fmt_float(row[f]).strip('"') for f in FAMILIES]))
    if len(rows) > 1:
        flags = ["true" if convergence_figure([r[f] for r in rows]) < 1.0 else "false" for f in FAMILIES]
        lines.append(",".join(["monotone"] + flags))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qplane", description="Harmonic analysis on the closed q-lattice plane.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites and print a report")
    v.add_argument("--q", type=float, default=0.5)
    v.add_argument("--kmin", type=int, default=-8)
    v.add_argument("--kmax", type=int, default=8)
    v.add_argument("--lmax", type=int, default=12)
    v.add_argument("--ntheta", type=int, default=256)
    v.add_argument("--tol-exact", type=float, default=1e-12)
    v.add_argument("--tol-quad", type=float, default=1e-3)
    v.add_argument("--suite", type=_suites, action="append",
                   help=f"comma-separated subset of {','.join(SUITES)} (repeatable; default all)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--format", choices=("json", "csv", "text"), default="json")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fq", help="evaluate the quantum exponential")
    f.add_argument("--q", type=float, default=0.5)
    where = f.add_mutually_exclusive_group(required=True)
    where.add_argument("--point", nargs=2, metavar=("K", "THETA"))
    where.add_argument("--circle", type=int, metavar="K")
    f.add_argument("--ntheta", type=int, default=256)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fq)

    t = sub.add_parser("transform", help="apply the Fourier transform to a mode file")
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--out")
    t.add_argument("--q", type=float, default=None, help="q for CSV input without a '# q=' line")
    t.add_argument("--kmin", type=int, default=-12)
    t.add_argument("--kmax", type=int, default=12)
    t.add_argument("--lmax", type=int, default=16)
    t.add_argument("--ntheta", type=int, default=512)
    t.add_argument("--format", choices=("json", "csv"), default="json")
    t.set_defaults(func=cmd_transform)

    c = sub.add_parser("convergence", help="residual families against kernel window or sample count")
    c.add_argument("--axis", choices=("kwindow", "ntheta"), required=True)
    c.add_argument("--values", type=_int_list, default=None,
                   help="comma-separated sweep (default 8,12,16 or 128,256,512)")
    c.add_argument("--q", type=float, default=0.5)
    c.add_argument("--kmin", type=int, default=-12)
    c.add_argument("--kmax", type=int, default=12)
    c.add_argument("--lmax", type=int, default=16)
    c.add_argument("--ntheta", type=int, default=512)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_convergence)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qplane {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
