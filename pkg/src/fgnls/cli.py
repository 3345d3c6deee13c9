"""Command-line entry point: ``fgnls {periods,theta,fgrid,psigrid,check}``.

Exit codes: 0 success, 1 usage or input error, 2 numerical or invariant failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amplitude import AmplitudeContext, Axis, f_grid, psi_grid
from .analysis import certify, dnls_bound_check, period_invariants
from .errors import FgnlsError, SurfaceError
from .periods import compute_periods
from .surface import Mode, SurfaceSpec, validate
from .theta import ThetaContext, certificate

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
GRID_COMMANDS = ("fgrid", "psigrid")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    surface: SurfaceSpec
    params: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "json"
    seed: int = 0
    tol: float = 1e-10
    threads: int = 1

    def __post_init__(self):
        if self.tol <= 0:
            raise UsageError("--tol must be positive")
        if self.threads < 1:
            raise UsageError("--threads must be at least 1")


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _cplx(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return _pair(a)
    return [_cplx(x) for x in a]


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def surface_from_config(data: dict, base_dir: Path) -> SurfaceSpec:
    raw = data.get("surface", data if "mode" in data else None)
    if raw is None:
        raise UsageError("config needs a 'surface' entry or top-level 'mode'")
    if isinstance(raw, str):
        raw = load_config(str(base_dir / raw))
    try:
        return SurfaceSpec.from_dict(raw)
    except (TypeError, ValueError, KeyError) as exc:
        raise UsageError(f"invalid surface spec: {exc}") from exc


def _threads(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("FGNLS_THREADS")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"FGNLS_THREADS must be an integer, got {env!r}") from exc
    return 1


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _context(cfg: RunConfig, pd=None) -> AmplitudeContext:
    surface = validate(cfg.surface)
    pd = pd or compute_periods(surface, tol=cfg.tol)
    return AmplitudeContext(surface, pd, ThetaContext(pd.tau))


def periods_json(pd) -> dict:
    flags = period_invariants(pd)
    return {
        "surface": pd.surface.spec().to_dict(),
        "genus": pd.genus,
        "A_matrix": _cplx(pd.A_matrix),
        "kappa": _cplx(pd.kappa),
        "tau": _cplx(pd.tau),
        "u_inf": _cplx(pd.u_inf),
        "riemann_K": _cplx(pd.reduce(pd.riemann_K)),
        "V": pd.V.real.tolist(),
        "W": pd.W.real.tolist(),
        "p_inf": pd.p_inf.real,
        "q_inf": pd.q_inf.real,
        "base_point": _pair(pd.base_point),
        "h1": [float(x) for x in pd.h1],
        "a_condition": pd.a_cond,
        "invariants": flags,
    }


def cmd_periods(cfg: RunConfig) -> int:
    pd = compute_periods(validate(cfg.surface), tol=cfg.tol)
    report = periods_json(pd)
    _emit(json.dumps(report, indent=2, sort_keys=True), cfg.out)
    return EXIT_OK if all(report["invariants"].values()) else EXIT_NUMERIC


def cmd_theta(cfg: RunConfig) -> int:
    ctx = _context(cfg)
    zs = cfg.params.get("z")
    if zs is None:
        zs = [[0.0, 0.0]] * ctx.genus
    z = np.array([complex(*p) for p in zs])
    if z.shape != (ctx.genus,):
        raise UsageError(f"'z' must hold {ctx.genus} [re, im] pairs")
    cert = certificate(ctx.theta_ctx, z)
    _emit(json.dumps({"z": _cplx(z), "value": _pair(cert.value), "refined": _pair(cert.refined),
                      "change": cert.change, "radius": cert.radius, "points": cert.n_points},
                     indent=2, sort_keys=True), cfg.out)
    return EXIT_OK


def _grid_out(grid, cfg: RunConfig) -> None:
    _emit(grid.to_csv() if cfg.fmt == "csv" else grid.to_json(), cfg.out)


def cmd_fgrid(cfg: RunConfig) -> int:
    ctx = _context(cfg)
    n = int(cfg.params.get("n", 200))
    if n < 1:
        raise UsageError("grid size must be positive")
    plane = tuple(cfg.params.get("plane", (0, 1)))
    grid = f_grid(ctx, n, plane, cfg.params.get("base"), threads=cfg.threads)
    _grid_out(grid, cfg)
    return EXIT_OK


def _axis(name: str, spec) -> Axis:
    try:
        start, stop, count = spec
        ax = Axis(name, float(start), float(stop), int(count))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"axis {name!r} must be [start, stop, count]") from exc
    if ax.count < 1:
        raise UsageError(f"axis {name!r} needs a positive count")
    return ax


def cmd_psigrid(cfg: RunConfig) -> int:
    ctx = _context(cfg)
    xa = _axis("x", cfg.params.get("x", [-2.0, 2.0, 128]))
    ta = _axis("t", cfg.params.get("t", [-2.0, 2.0, 128]))
    omega0 = cfg.params.get("omega0")
    if omega0 is not None and len(omega0) != ctx.genus:
        raise UsageError(f"'omega0' must have {ctx.genus} entries")
    _grid_out(psi_grid(ctx, xa, ta, omega0, threads=cfg.threads), cfg)
    return EXIT_OK


def cmd_check(cfg: RunConfig, corrupt_tau: float | None = None) -> int:
    """Full certification suite; ``corrupt_tau`` breaks the symmetry of tau (negative control)."""
    surface = validate(cfg.surface)
    pd = compute_periods(surface, tol=cfg.tol)
    corrupt_tau = corrupt_tau if corrupt_tau is not None else cfg.params.get("test_corrupt_tau")
    if corrupt_tau:
        tau = pd.tau.copy()
        if pd.genus > 1:
            tau[0, 1] += corrupt_tau
        else:
            tau[0, 0] += corrupt_tau * 1j
        pd = dataclasses.replace(pd, tau=tau)
    checks: dict = {}
    try:
        ctx = AmplitudeContext(surface, pd, ThetaContext(pd.tau))
    except (FgnlsError, ValueError) as exc:
        checks = {k: {"pass": v} for k, v in period_invariants(pd).items()}
        checks["theta_context"] = {"pass": False, "error": str(exc)}
    else:
        checks = certify(ctx, seed=cfg.seed, samples=int(cfg.params.get("samples", 1000)), threads=cfg.threads)
        if surface.mode is Mode.DEFOCUSING:
            xs = np.linspace(-5.0, 5.0, 48)
            rng = np.random.default_rng(cfg.seed)
            rep = dnls_bound_check(ctx, xs, xs, [np.zeros(ctx.genus)] + list(rng.random((3, ctx.genus))))
            checks["dnls_bound_check"] = {"pass": rep.ok(), **dataclasses.asdict(rep)}
        if corrupt_tau:
            checks.update({k: {"pass": v} for k, v in period_invariants(pd).items()})
    ok = all(c["pass"] for c in checks.values())
    report = {"surface": surface.spec().to_dict(), "pass": ok, "checks": checks}
    _emit(json.dumps(report, indent=2, sort_keys=True, default=float), cfg.out)
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {"periods": cmd_periods, "theta": cmd_theta, "fgrid": cmd_fgrid, "psigrid": cmd_psigrid,
            "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config (surface spec and parameters)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="grid output format")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
    common.add_argument("--threads", type=int, help="worker threads (default $FGNLS_THREADS or 1)")
    parser = _Parser(prog="fgnls", description="Finite-gap NLS amplitudes and their certification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None)
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    path = Path(args.config)
    data = load_config(str(path))
    spec = surface_from_config(data, path.parent)
    fmt = args.format or ("csv" if args.command in GRID_COMMANDS else "json")
    if fmt == "csv" and args.command not in GRID_COMMANDS:
        raise UsageError("csv output is only available for grid commands")
    params = {k: v for k, v in data.items() if k not in ("surface", "mode", "alphas", "bands")}
    return RunConfig(args.command, spec, params, args.out, fmt, args.seed, args.tol, _threads(args.threads))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        validate(cfg.surface)
    except (UsageError, SurfaceError) as exc:
        print(f"fgnls: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"fgnls: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FgnlsError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        print(f"fgnls: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
