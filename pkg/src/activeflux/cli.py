"""Command-line front end: verify, spectrum, solve, mass-scan.

All file output is byte-deterministic: floats are printed with 17 significant
digits, JSON keys are sorted, lines end with ``\n``, and no timestamps or
environment data are written.  Each output starts with ``#`` header lines
carrying the schema version and the exact configuration that produced it.

Exit codes: 0 success / all checks passed; 1 a check failed or the energy
blew up; 2 usage or configuration errors (bad flags, malformed files,
parameters outside their admissible range).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

import numpy as np

from . import checks, solver, spectral
from . import operators as ops

__all__ = ["main", "console_main"]

SCHEMA_VERSION = 1

_TWO_PI = 2.0 * math.pi


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:  # normalize -0.0
        x = 0.0
    return "%.17g" % x


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _json_text(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"


def _header_lines(config: dict) -> list[str]:
    config_json = json.dumps(config, sort_keys=True, default=_json_default)
    return [f"# schema_version = {SCHEMA_VERSION}", f"# config = {config_json}"]


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=50, help="number of cells (default 50)")
    p.add_argument("--x-min", type=float, default=0.0, help="left end of the domain")
    p.add_argument(
        "--x-max", type=float, default=_TWO_PI, help="right end of the domain (default 2*pi)"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="activeflux",
        description="Active Flux operators: verification, spectra, advection runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the full operator check battery")
    _add_grid_args(p_verify)
    p_verify.add_argument("--output", help="write a machine-readable report here")
    p_verify.add_argument("--format", choices=("csv", "json"), default="csv")

    p_spec = sub.add_parser("spectrum", help="per-mode eigenvalues of an operator")
    _add_grid_args(p_spec)
    p_spec.add_argument(
        "--operator",
        default="central-d",
        help=(
            "central-d | d-minus | d-plus | diagonal-mass | upwind-mass | "
            "dissipation | file:<path to operator JSON>"
        ),
    )
    p_spec.add_argument("--output", help="CSV destination (default stdout)")
    p_spec.add_argument("--dump-operator", help="also write the operator as JSON here")

    p_solve = sub.add_parser("solve", help="advect exp(sin x) and trace the energy")
    _add_grid_args(p_solve)
    p_solve.add_argument("--variant", choices=("central", "upwind"), default="central")
    p_solve.add_argument("--speed", type=float, default=1.0, help="advection speed a")
    p_solve.add_argument(
        "--dt-factor", type=float, default=0.5, help="time step as a fraction of dx"
    )
    p_solve.add_argument("--t-end", type=float, default=_TWO_PI)
    p_solve.add_argument(
        "--rk",
        default="rk4x2",
        help=(
            "rk4x2 (two composed RK4 half-steps, default) | rk4 | ssprk33 | "
            "custom:<butcher json file>"
        ),
    )
    p_solve.add_argument(
        "--relaxation",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="energy-matching step rescaling (default on)",
    )
    p_solve.add_argument("--output", help="energy trace destination (default stdout)")
    p_solve.add_argument("--format", choices=("csv", "json"), default="csv")
    p_solve.add_argument("--final-state", help="write the final dof vector as JSON here")

    p_scan = sub.add_parser("mass-scan", help="classify the mass family along m_p")
    p_scan.add_argument("--mv", type=float, default=1.0, help="average weight m_v")
    p_scan.add_argument("--mp-min", type=float, required=True)
    p_scan.add_argument("--mp-max", type=float, required=True)
    p_scan.add_argument("--steps", type=int, default=101)
    p_scan.add_argument("--output", help="CSV destination (default stdout)")
    return parser


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_verify(args) -> int:
    grid = ops.build_grid(args.n, args.x_min, args.x_max)
    reports = checks.run_all(grid)
    config = {"command": "verify", "n": args.n, "x_min": args.x_min, "x_max": args.x_max}

    width = max(len(r.name) for r in reports)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  residual {r.residual:.3e}  tol {r.tolerance:.3e}")
    n_pass = sum(r.passed for r in reports)
    print(f"{n_pass}/{len(reports)} checks passed (n = {args.n})")

    if args.output:
        if args.format == "json":
            payload = {
                "schema_version": SCHEMA_VERSION,
                "config": config,
                "reports": [r.to_json_dict() for r in reports],
            }
            _emit(_json_text(payload), args.output)
        else:
            lines = _header_lines(config)
            lines.append("name,passed,residual,tolerance")
            for r in reports:
                lines.append(
                    f"{r.name},{int(r.passed)},{_fmt(r.residual)},{_fmt(r.tolerance)}"
                )
            _emit("\n".join(lines) + "\n", args.output)
    return 0 if n_pass == len(reports) else 1


def _resolve_operator(name: str, grid: ops.Grid) -> ops.BlockCirculantOp:
    if name.startswith("file:"):
        path = name[len("file:"):]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read operator file {path!r}: {exc}") from exc
        return ops.BlockCirculantOp.from_json_dict(data)
    builders = {
        "central-d": ops.central_D,
        "d-minus": ops.upwind_D_minus,
        "d-plus": ops.upwind_D_plus,
        "diagonal-mass": ops.diagonal_mass,
        "upwind-mass": ops.upwind_mass,
        "dissipation": lambda g: ops.upwind_mass(g)
        @ (ops.upwind_D_plus(g) - ops.upwind_D_minus(g)),
    }
    if name not in builders:
        raise ValueError(
            f"unknown operator {name!r}; choose one of {sorted(builders)} or file:<path>"
        )
    return builders[name](grid)


def _cmd_spectrum(args) -> int:
    grid = ops.build_grid(args.n, args.x_min, args.x_max)
    op = _resolve_operator(args.operator, grid)
    config = {
        "command": "spectrum",
        "operator": args.operator,
        "n": op.n,
        "x_min": args.x_min,
        "x_max": args.x_max,
    }
    pairs = spectral.eigenvalues(op).reshape(op.n, 2)
    lines = _header_lines(config)
    lines.append("k,theta,re_lambda_1,im_lambda_1,re_lambda_2,im_lambda_2")
    for k in range(op.n):
        theta = 2.0 * math.pi * k / op.n
        l1, l2 = pairs[k]
        lines.append(
            ",".join(
                (
                    str(k),
                    _fmt(theta),
                    _fmt(l1.real),
                    _fmt(l1.imag),
                    _fmt(l2.real),
                    _fmt(l2.imag),
                )
            )
        )
    _emit("\n".join(lines) + "\n", args.output)
    if args.dump_operator:
        _emit(_json_text(op.to_json_dict()), args.dump_operator)
    return 0


def _cmd_solve(args) -> int:
    config_obj = solver.ExperimentConfig(
        variant=args.variant,
        n=args.n,
        x_min=args.x_min,
        x_max=args.x_max,
        t_end=args.t_end,
        rk=args.rk,
        relaxation=args.relaxation,
        dt_factor=args.dt_factor,
        advection_speed=args.speed,
    )
    config = {
        "command": "solve",
        "variant": args.variant,
        "n": args.n,
        "x_min": args.x_min,
        "x_max": args.x_max,
        "t_end": args.t_end,
        "rk": args.rk,
        "relaxation": args.relaxation,
        "dt_factor": args.dt_factor,
        "speed": args.speed,
    }
    try:
        trace, u_final = solver.run_experiment(config_obj)
    except RuntimeError as exc:  # blow-up guard, relaxation breakdown, step budget
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "trace": {
                "times": trace.times.tolist(),
                "energies": trace.energies.tolist(),
                "gammas": trace.gammas.tolist(),
            },
        }
        _emit(_json_text(payload), args.output)
    else:
        lines = _header_lines(config)
        lines.append("t,energy,gamma")
        for t, energy, gamma in zip(trace.times, trace.energies, trace.gammas):
            lines.append(f"{_fmt(t)},{_fmt(energy)},{_fmt(gamma)}")
        _emit("\n".join(lines) + "\n", args.output)

    if args.final_state:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "u": u_final.tolist(),
        }
        _emit(_json_text(payload), args.final_state)
    return 0


def _cmd_mass_scan(args) -> int:
    if args.steps < 1:
        raise ValueError("--steps must be at least 1")
    if args.mp_max < args.mp_min:
        raise ValueError("--mp-max must not be below --mp-min")
    config = {
        "command": "mass-scan",
        "m_v": args.mv,
        "mp_min": args.mp_min,
        "mp_max": args.mp_max,
        "steps": args.steps,
    }
    values = np.linspace(args.mp_min, args.mp_max, args.steps)
    lines = _header_lines(config)
    lines.append("m_v,m_p,classification,zero_multiplicity,min_eigenvalue")
    for m_p in values:
        cls = checks.check_mass_definiteness(args.mv, float(m_p))
        lines.append(
            ",".join(
                (
                    _fmt(args.mv),
                    _fmt(m_p),
                    cls.kind,
                    str(cls.zero_multiplicity),
                    _fmt(cls.min_eigenvalue),
                )
            )
        )
    _emit("\n".join(lines) + "\n", args.output)
    return 0


_COMMANDS = {
    "verify": _cmd_verify,
    "spectrum": _cmd_spectrum,
    "solve": _cmd_solve,
    "mass-scan": _cmd_mass_scan,
}


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage/help; normalize the exit code
        return 0 if exc.code in (0, None) else 2
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
