"""Command-line harness.

Subcommands::

    spatial           spatial refinement sweep against a nested fine reference
    temporal          step-size sweep on one fixed mesh
    smalltime         spatial sweep at small observation times
    diagnose          sector / numerical-range / smoothing diagnostics
    reproduce-paper   canned study sets (tiny golden config or the full set)

Every flag can also be supplied through ``--config FILE`` holding flat
``key = value`` lines (same names as the long flags, ``#`` comments allowed);
explicit flags win over the file.  Exit codes: 0 success, 2 invalid
configuration, 3 solver failure, 4 violated invariant in a diagnostics run.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .diagnostics import estimate_constants, numerical_range_sample, sector_check, smoothing_check
from .experiments import (ConfigError, ExperimentConfig, StudyError,
                          run_smalltime_study, run_spatial_study,
                          run_temporal_study)
from .mesh import UniformMesh
from .presets import paper_studies, tiny_config
from .reporting import emit_csv, emit_markdown
from .solvers import SolverError

__all__ = ["main", "build_config"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4


class InvariantViolation(RuntimeError):
    """A structural hypothesis failed numerically (diagnose subcommand)."""


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in str(text).split(",") if p.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in str(text).split(",") if p.strip())


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


# flag name -> (config field, parser); used for both CLI values and files
_FIELD_PARSERS = {
    "example": ("example", str),
    "alpha": ("alphas", _parse_floats),
    "scheme": ("scheme", str),
    "m-list": ("m_list", _parse_ints),
    "m-ref": ("m_ref", int),
    "tau": ("tau", float),
    "tau-list": ("tau_list", _parse_floats),
    "tau-ref": ("tau_ref", float),
    "t": ("times", _parse_floats),
    "init": ("init", str),
    "norm": ("normalize", _parse_bool),
    "backend": ("backend", str),
    "seed": ("seed", int),
}


def read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip().replace("_", "-")] = value.strip()
    return values


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, config file, and explicit flags into a config."""
    merged: dict[str, object] = {}
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, value in file_values.items():
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        field, parse = _FIELD_PARSERS[key]
        merged[field] = parse(value)
    for key, (field, parse) in _FIELD_PARSERS.items():
        cli_value = getattr(args, key.replace("-", "_"), None)
        if cli_value is not None:
            merged[field] = parse(cli_value) if not isinstance(cli_value, (tuple, bool)) \
                else cli_value
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--example", choices=("a", "b1", "b2", "c"))
    p.add_argument("--alpha", help="comma-separated orders in (1, 2)")
    p.add_argument("--scheme", help="BE, CN or DampedCN")
    p.add_argument("--m-list", help="comma-separated cell counts")
    p.add_argument("--m-ref", type=int, help="reference mesh cells (spatial)")
    p.add_argument("--tau", type=float, help="step size (spatial/smalltime)")
    p.add_argument("--tau-list", help="comma-separated steps (temporal)")
    p.add_argument("--tau-ref", type=float, help="reference step (temporal)")
    p.add_argument("--t", help="comma-separated observation times")
    p.add_argument("--init", choices=("l2", "ritz", "interp"),
                   help="initial-state operator (default l2)")
    p.add_argument("--norm", dest="norm", action=argparse.BooleanOptionalAction,
                   default=None, help="normalize errors by ||v|| (default on)")
    p.add_argument("--backend", choices=("dense", "iterative", "auto"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _render(report, fmt: str) -> str:
    return emit_csv(report) if fmt == "csv" else emit_markdown(report)


def _diagnose(args) -> str:
    alphas = _parse_floats(args.alpha) if args.alpha else (1.25, 1.5, 1.75)
    m_list = _parse_ints(args.m_list) if args.m_list else (32, 64, 128)
    seed = args.seed if args.seed is not None else 0
    n_samples = args.samples
    lines = ["alpha,m,min_re,max_abs_arg,sector_angle,c0,C0,samples,"
             "samples_in_sector,smoothing_sup_gamma1"]
    for alpha in alphas:
        for m in m_list:
            mesh = UniformMesh(m)
            sector = sector_check(mesh, alpha)
            if not sector.all_in_right_half_plane:
                raise InvariantViolation(
                    f"eigenvalue with nonpositive real part at alpha={alpha}, m={m}")
            if sector.max_abs_arg >= math.pi / 2:
                raise InvariantViolation(
                    f"eigenvalue argument reaches pi/2 at alpha={alpha}, m={m}")
            consts = estimate_constants(mesh, alpha, n_samples=n_samples, seed=seed)
            samples = numerical_range_sample(mesh, alpha, n_samples, seed=seed)
            inside = int(np.sum(np.abs(np.angle(samples)) <= sector.sector_angle + 1e-8))
            if inside != n_samples:
                raise InvariantViolation(
                    f"{n_samples - inside} numerical-range samples left the "
                    f"fitted sector at alpha={alpha}, m={m}")
            sup = math.nan
            if m <= 128:
                sup = smoothing_check(mesh, alpha, 1.0,
                                      t_grid=(1e-3, 1e-2, 1e-1, 1.0),
                                      n_vectors=3, seed=seed).overall
            vals = (alpha, m, sector.min_real, sector.max_abs_arg,
                    sector.sector_angle, consts.c0, consts.C0, n_samples,
                    inside, sup)
            lines.append(",".join(
                str(v) if isinstance(v, int) else repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def _reproduce(args) -> int:
    seed = args.seed if args.seed is not None else 0
    if args.preset == "tiny":
        report = run_spatial_study(tiny_config(seed))
        _emit(_render(report, args.format), args.out)
        return EXIT_OK
    outdir = Path(args.out) if args.out else Path(".")
    outdir.mkdir(parents=True, exist_ok=True)
    runners = {"spatial": run_spatial_study, "temporal": run_temporal_study,
               "smalltime": run_smalltime_study}
    for name, kind, config in paper_studies(seed):
        report = runners[kind](config)
        path = outdir / f"{name}.{'md' if args.format == 'markdown' else 'csv'}"
        with open(path, "w", newline="\n") as fh:
            fh.write(_render(report, args.format))
        print(f"wrote {path}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracfem",
        description="Convergence studies and diagnostics for the "
                    "space-fractional diffusion solver.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (("spatial", "spatial refinement sweep"),
                       ("temporal", "time-step sweep on a fixed mesh"),
                       ("smalltime", "spatial sweep at small times")):
        p = sub.add_parser(name, help=desc)
        _add_common_flags(p)

    p = sub.add_parser("diagnose", help="spectral diagnostics of the pencil")
    p.add_argument("--alpha", help="comma-separated orders")
    p.add_argument("--m-list", help="comma-separated cell counts")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")

    p = sub.add_parser("reproduce-paper", help="run a canned study set")
    p.add_argument("--preset", choices=("tiny", "paper"), default="tiny")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="file (tiny) or directory (paper)")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "diagnose":
            _emit(_diagnose(args), args.out)
            return EXIT_OK
        if args.command == "reproduce-paper":
            return _reproduce(args)
        config = build_config(args)
        runner = {"spatial": run_spatial_study,
                  "temporal": run_temporal_study,
                  "smalltime": run_smalltime_study}[args.command]
        report = runner(config)
        _emit(_render(report, args.format), args.out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except StudyError as exc:
        cell = f"alpha={exc.alpha}" + (f", m={exc.m}" if exc.m else "")
        print(f"error: study failed at {cell}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (SolverError, np.linalg.LinAlgError) as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
