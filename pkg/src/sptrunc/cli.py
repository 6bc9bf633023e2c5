"""Command-line entry point: ``sptrunc {sample,density,corr,asympt,verify}``.

Exit codes: 0 success, 1 usage or invalid parameters, 2 I/O failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import asymptotics as asy
from . import harness
from .errors import SptruncError
from .io import OutputError, eigenvalues_to_csv, fmt, rows_to_csv, to_json, write_text
from .kernels import KernelContext, R1_exact, R2_exact
from .sampler import TruncationParams, sample_spectra

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return val


def _seed(text: str) -> int:
    try:
        val = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be an integer, got {text!r}") from None
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("must be a 64-bit unsigned integer")
    return val


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _ints(text: str) -> list[int]:
    return [_positive_int(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--n", type=_positive_int, default=4, help="kept quaternion dimension N")
    shared.add_argument("--m", type=_positive_int, default=2, help="removed quaternion rows/columns M")
    shared.add_argument("--seed", type=_seed, default=0, help="RNG seed (RMT_SEED overrides)")
    shared.add_argument("--out", default=None, help="output file (default: stdout)")
    shared.add_argument("--format", choices=("csv", "json"), default="csv")
    shared.add_argument("--threads", type=_positive_int, default=1, help="worker processes for sampling")

    p = _Parser(prog="sptrunc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", parents=[shared], help="dump paired eigenvalues of truncated Haar draws")
    s.add_argument("--samples", type=_positive_int, default=1000)

    d = sub.add_parser("density", parents=[shared], help="density on a grid, or a Monte Carlo comparison")
    d.add_argument("--mode", choices=("exact", "mc", "strong", "weak", "edge"), default="exact")
    d.add_argument("--grid", type=_positive_int, default=50, help="points per axis")
    d.add_argument("--a", type=float, default=None, help="strong-regime ratio M/N (default m/n)")
    d.add_argument("--qmax", type=float, default=5.0, help="largest radial offset q (weak mode)")
    d.add_argument("--xmax", type=float, default=3.0)
    d.add_argument("--ymax", type=float, default=3.0)
    d.add_argument("--scaled-by-pi", action="store_true", help="edge mode: variables in units of pi/N")
    d.add_argument("--samples", type=_positive_int, default=10000)
    d.add_argument("--bins-r", type=_positive_int, default=20)
    d.add_argument("--bins-phi", type=_positive_int, default=12)

    c = sub.add_parser("corr", parents=[shared], help="two-point function: exact profile or pair-count experiment")
    c.add_argument("--mode", choices=("exact", "mc"), default="exact")
    c.add_argument("--z0", type=_complex, default=0.4j)
    c.add_argument("--radii", type=_floats, default=[0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5])
    c.add_argument("--ref-radius", type=float, default=0.03)
    c.add_argument("--samples", type=_positive_int, default=100000)
    c.add_argument("--grid", type=_positive_int, default=50, help="exact mode: number of separations")

    a = sub.add_parser("asympt", parents=[shared], help="finite-N sweeps against limiting laws")
    a.add_argument("--check", choices=("strong", "weak", "edge", "annulus", "bulk"), default="strong")
    a.add_argument("--ns", type=_ints, default=[10, 20, 40])
    a.add_argument("--z", type=_complex, default=None, help="evaluation point (strong/annulus/bulk)")
    a.add_argument("--q", type=float, default=1.0, help="weak: radial offset")
    a.add_argument("--phi", type=float, default=np.pi / 2, help="weak: angle")
    a.add_argument("--x", type=float, default=0.5, help="edge: x")
    a.add_argument("--y", type=float, default=1.0, help="edge: y")
    a.add_argument("--s", type=float, default=0.5, help="bulk: unfolded separation")

    v = sub.add_parser("verify", parents=[shared], help="run self-check suites")
    v.add_argument("suite", nargs="?", choices=("all", "kernels", "sampler", "asymptotics"), default="all")
    v.add_argument("--tol", type=float, default=None, help="override the tolerances of the selected suite")
    return p


# ----------------------------------------------------------------------------
# subcommands


def _emit(args, text: str) -> None:
    write_text(args.out, text)


def cmd_sample(args) -> int:
    params = TruncationParams(args.n, args.m)
    eigs, resid = sample_spectra(params, args.seed, args.samples, workers=args.threads)
    if args.format == "json":
        doc = {
            "params": {"n": args.n, "m": args.m, "seed": args.seed, "samples": args.samples},
            "eigenvalues": [[[lam.real, lam.imag] for lam in row] for row in eigs],
            "pairing_residual": resid.tolist(),
        }
        _emit(args, to_json(doc))
    else:
        _emit(args, eigenvalues_to_csv(eigs))
    return EXIT_OK


def _grid_rows(xs, ys, f):
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = f(X, Y)
    return zip(X.ravel(), Y.ravel(), np.asarray(vals).ravel())


def _table(args, header, rows) -> str:
    rows = list(rows)
    if args.format == "json":
        return to_json({"columns": header, "rows": [[float(v) for v in r] for r in rows]})
    return rows_to_csv(header, rows)


def cmd_density(args) -> int:
    N, M = args.n, args.m
    if args.mode == "mc":
        b = harness.Binning("polar", ((0.0, 1.0), (-np.pi, np.pi)), (args.bins_r, args.bins_phi))
        cfg = harness.ExperimentConfig(TruncationParams(N, M), args.samples, args.seed, b, workers=args.threads)
        rep = harness.run_density_experiment(cfg)
        _emit(args, rep.to_json() if args.format == "json" else rep.to_csv())
        return EXIT_OK
    if args.mode == "weak":
        qs = np.linspace(args.qmax / args.grid, args.qmax, args.grid)
        _emit(args, _table(args, ["r", "density"], zip(qs, asy.weak_density_scaled(M, qs))))
        return EXIT_OK
    if args.mode == "edge":
        if args.xmax <= 0:
            raise UsageError("--xmax must be positive")
        xs = np.linspace(args.xmax / args.grid, args.xmax, args.grid)
        ys = np.linspace(-args.ymax, args.ymax, args.grid)
        rows = _grid_rows(xs, ys, lambda X, Y: asy.edge_density(M, X, Y, args.scaled_by_pi))
        _emit(args, _table(args, ["x", "y", "density"], rows))
        return EXIT_OK
    xs = np.linspace(-1.0, 1.0, args.grid)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    z = (X + 1j * Y).ravel()
    inside = np.abs(z) < 1
    vals = np.zeros(z.size)
    if args.mode == "exact":
        vals[inside] = R1_exact(KernelContext(N, M), z[inside]) / N
    else:
        vals[inside] = asy.density_strong(args.a if args.a is not None else M / N, z[inside])
    _emit(args, _table(args, ["x", "y", "density"], zip(z.real, z.imag, vals)))
    return EXIT_OK


def cmd_corr(args) -> int:
    N, M = args.n, args.m
    z0 = args.z0
    if args.mode == "mc":
        b = harness.Binning("radial", ((0.0, 1.0),), (1,))
        cfg = harness.ExperimentConfig(TruncationParams(N, M), args.samples, args.seed, b, workers=args.threads)
        rep = harness.run_pair_correlation_experiment(cfg, z0, args.radii, args.ref_radius)
        _emit(args, rep.to_json() if args.format == "json" else rep.to_csv())
        return EXIT_OK
    if abs(z0) >= 1:
        raise UsageError("--z0 must lie inside the unit disk")
    smax = 1.0 - abs(z0)
    seps = np.linspace(0.0, smax, args.grid, endpoint=False)
    z2 = z0 + seps
    vals = R2_exact(KernelContext(N, M), np.full_like(z2, z0), z2)
    rows = zip(np.full(seps.size, z0.real), np.full(seps.size, z0.imag), z2.real, z2.imag, vals)
    _emit(args, _table(args, ["re1", "im1", "re2", "im2", "R2"], rows))
    return EXIT_OK


def _sweep(args):
    ns = args.ns
    if args.check == "strong":
        z = args.z if args.z is not None else 0.3 + 0.3j
        for N in ns:
            yield N, R1_exact(KernelContext(N, N), z) / N, asy.density_strong(1.0, z)
    elif args.check == "annulus":
        z = args.z if args.z is not None else np.sqrt(0.7) * np.exp(0.25j * np.pi)
        for N in ns:
            yield N, np.log(R1_exact(KernelContext(N, N), z)) / N, asy.decay_rate(1.0, abs(z) ** 2)
    elif args.check == "bulk":
        z0 = args.z if args.z is not None else 0.2 + 0.3j
        for N in ns:
            ctx = KernelContext(N, N)
            r1 = R1_exact(ctx, z0)
            yield N, R2_exact(ctx, z0, z0 + args.s / np.sqrt(r1)) / r1**2, asy.ginibre_corr_det([0, args.s])
    elif args.check == "weak":
        for N in ns:
            z = (1 - args.q / N) * np.exp(1j * args.phi)
            yield N, R1_exact(KernelContext(N, args.m), z) / N**2, asy.weak_density_scaled(args.m, args.q)
    else:
        for N in ns:
            z = 1 - (args.x + 1j * args.y) / N
            yield N, R1_exact(KernelContext(N, args.m), z) / N**2, asy.edge_density(args.m, args.x, args.y)


def cmd_asympt(args) -> int:
    rows = [(N, v, o, abs(v - o)) for N, v, o in _sweep(args)]
    _emit(args, _table(args, ["param", "value", "oracle", "abs_err"], rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_checks

    results, failed = run_checks(args.suite, args.tol)
    doc = {"suite": args.suite, "pass": not failed, "checks": [r.to_dict() for r in results]}
    write_text(args.out, to_json(doc) + "\n")
    if failed:
        names = ", ".join(dict.fromkeys(failed))
        print(f"verification failed: {names}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "density": cmd_density,
    "corr": cmd_corr,
    "asympt": cmd_asympt,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        env_seed = os.environ.get("RMT_SEED")
        if env_seed:
            args.seed = _seed(env_seed)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except argparse.ArgumentTypeError as exc:
        print(f"sptrunc: error: RMT_SEED {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutputError as exc:
        print(f"sptrunc: {exc}", file=sys.stderr)
        return EXIT_IO
    except SptruncError as exc:
        print(f"sptrunc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _entry() -> None:  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    _entry()
