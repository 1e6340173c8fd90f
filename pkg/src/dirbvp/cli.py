"""Command-line front end: problem configs in, reports and CSV tables out.

Config files are flat ``key = value`` text, one field per line, with
expression values running unquoted to the end of the line; a ``.json``
extension switches to a JSON object with the same fields.  CSV output
uses '.' decimals at full round-trip precision, so identical inputs
produce byte-identical files.

Exit codes: 0 success, 1 a checked condition is violated, 2 solver or
configuration failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .convergence import ConvergenceTable, ManufacturedProblem, StudyError, manufacture, run_study
from .expr import EvalError, ParseError, evaluate, parse
from .grid import norms, random_element
from .problem import ProblemSpec, apriori_bound, check_fx_lower, check_growth, classify, make_spec
from .solver import CONVERGED, SolverConfig, newton_solve

__all__ = ["ProblemConfig", "ConfigError", "load_config", "build_problem", "run", "main"]

_COMMANDS = ("check", "solve", "converge", "norms")

_EXPRESSION_FIELDS = ("f", "v", "x_star")
_NUMBER_FIELDS = ("A", "B", "fx_lower", "tol")
_DEFAULT_NORMS_NS = (2, 4, 8, 16, 32, 64)
_NORMS_SAMPLES = 5


class ConfigError(ValueError):
    """A problem configuration is missing, malformed, or inconsistent."""


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    f: str
    A: float
    B: float
    fx_lower: float
    v: str | None = None
    x_star: str | None = None
    n: int | None = None
    ns: tuple[int, ...] | None = None
    tol: float | None = None
    max_iter: int | None = None


def _parse_flat(text: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in fields:
            raise ConfigError(f"line {lineno}: duplicate field {key!r}")
        fields[key] = value
    return fields


def _parse_ns(value) -> tuple[int, ...]:
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(",") if part.strip()]
    else:
        parts = list(value)
    try:
        ns = tuple(int(part) for part in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"field 'Ns': expected a comma-separated integer list, got {value!r}")
    if not ns:
        raise ConfigError("field 'Ns': list is empty")
    if any(n < 2 for n in ns):
        raise ConfigError("field 'Ns': every grid size must be at least 2")
    return ns


def load_config(path) -> ProblemConfig:
    """Read and validate a problem configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")

    if path.suffix == ".json":
        try:
            fields = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}")
        if not isinstance(fields, dict):
            raise ConfigError(f"{path}: expected a JSON object")
    else:
        fields = _parse_flat(text)

    known = {"name", "f", "v", "A", "B", "fx_lower", "x_star", "N", "Ns", "tol", "max_iter"}
    unknown = set(fields) - known
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")

    def take(key, convert, default=None):
        if key not in fields:
            return default
        try:
            return convert(fields[key])
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field {key!r}: {exc}")

    for key in ("f", "A", "B", "fx_lower"):
        if key not in fields:
            raise ConfigError(f"missing field: {key}")

    config = ProblemConfig(
        name=take("name", str, path.stem),
        f=take("f", str),
        v=take("v", str),
        x_star=take("x_star", str),
        A=take("A", float),
        B=take("B", float),
        fx_lower=take("fx_lower", float),
        n=take("N", int),
        ns=take("Ns", _parse_ns),
        tol=take("tol", float),
        max_iter=take("max_iter", int),
    )

    if config.v is None and config.x_star is None:
        raise ConfigError("missing field: v (or x_star, from which v is derived)")
    if config.v is not None and config.x_star is not None:
        raise ConfigError("give either v or x_star, not both: v is derived from x_star")
    if config.n is not None and config.n < 2:
        raise ConfigError("field 'N': grid size must be at least 2")
    if config.tol is not None and config.tol <= 0:
        raise ConfigError("field 'tol': must be positive")
    if config.max_iter is not None and config.max_iter < 1:
        raise ConfigError("field 'max_iter': must be at least 1")

    for key in _EXPRESSION_FIELDS:
        value = getattr(config, key)
        if value is not None:
            try:
                parse(value)
            except ParseError as exc:
                raise ConfigError(f"field {key!r}: {exc}")

    build_problem(config)  # surfaces semantic errors (bad fx, v using x, ...) at load time
    return config


def build_problem(config: ProblemConfig) -> ProblemSpec | ManufacturedProblem:
    """Turn a config into a solvable problem, deriving v when x_star is given."""
    try:
        if config.x_star is not None:
            return manufacture(
                config.f, config.x_star, A=config.A, B=config.B, fx_lower=config.fx_lower
            )
        return make_spec(config.f, config.v, A=config.A, B=config.B, fx_lower=config.fx_lower)
    except (ParseError, ValueError) as exc:
        raise ConfigError(f"config {config.name!r}: {exc}")


def _spec_of(problem) -> ProblemSpec:
    return problem.spec if isinstance(problem, ManufacturedProblem) else problem


def _solver_config(config: ProblemConfig) -> SolverConfig:
    kwargs = {}
    if config.tol is not None:
        kwargs["tol"] = config.tol
    if config.max_iter is not None:
        kwargs["max_iter"] = config.max_iter
    return SolverConfig(**kwargs)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _emit(text: str, output) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _report_dict(report) -> dict:
    return {
        "condition": report.condition,
        "verdict": report.verdict,
        "violation_count": report.violation_count,
        "samples_t": report.samples_t,
        "samples_x": report.samples_x,
        "witnesses": [
            {"t": t, "x": x, "lhs": lhs, "rhs": rhs} for t, x, lhs, rhs in report.witnesses
        ],
    }


def _run_check(config: ProblemConfig, output) -> int:
    spec = _spec_of(build_problem(config))

    t_grid = np.linspace(0.0, 1.0, 1001)
    v_sup = float(np.max(np.abs(evaluate(spec.v, t_grid, 0.0))))
    # Solutions live in [-M, M]; sample twice that box when M exists.
    if spec.declared_A < 1.0:
        x_range = 2.0 * apriori_bound(spec, v_sup)
    else:
        x_range = 10.0

    growth = check_growth(spec, x_range)
    fx_low = check_fx_lower(spec, x_range)
    flags = classify(spec)

    lines = [f"problem: {config.name}", f"sample box: [0,1] x [{-x_range:g}, {x_range:g}]"]
    for report in (growth, fx_low):
        lines.append(f"{report.condition}: {report.verdict} "
                     f"({report.samples_t} x {report.samples_x} samples)")
        for t, x, lhs, rhs in report.witnesses:
            lines.append(f"  witness t={t:.6g} x={x:.6g} lhs={lhs:.6g} rhs={rhs:.6g}")
        if report.violation_count > len(report.witnesses):
            lines.append(f"  ... {report.violation_count} violations in total")
    lines.append(f"continuous theorem applies: {flags.continuous_theorem_applies}")
    lines.append(f"discrete theorem applies: {flags.discrete_theorem_applies}")
    sys.stdout.write("\n".join(lines) + "\n")

    machine = json.dumps(
        {
            "problem": config.name,
            "x_range": x_range,
            "growth": _report_dict(growth),
            "fx_lower": _report_dict(fx_low),
            "classification": {
                "continuous_theorem_applies": flags.continuous_theorem_applies,
                "discrete_theorem_applies": flags.discrete_theorem_applies,
            },
        },
        indent=2,
    )
    if output is None:
        sys.stdout.write(machine + "\n")
    else:
        _emit(machine + "\n", output)

    return 1 if (growth.violated or fx_low.violated) else 0


def _run_solve(config: ProblemConfig, output) -> int:
    if config.n is None:
        raise ConfigError("solve requires N (config field N or --n)")
    spec = _spec_of(build_problem(config))
    report = newton_solve(spec, config.n, _solver_config(config))

    rows = ["k,t,x"]
    for k, (t, x) in enumerate(zip(report.solution.nodes, report.solution.values)):
        rows.append(f"{k},{_fmt(t)},{_fmt(x)}")
    _emit("\n".join(rows) + "\n", output)

    sys.stdout.write(
        f"status: {report.status}\n"
        f"iterations: {report.iterations}\n"
        f"residual_norm: {report.residual_norm:.6e}\n"
        f"sup_norm: {norms(report.solution).sup_norm:.6e}\n"
    )
    return 0 if report.status == CONVERGED else 2


def _table_csv(table: ConvergenceTable) -> str:
    rows = ["N,sup_error,empirical_order,derivative_bound"]
    for row in table.rows:
        order = "" if row.empirical_order is None else _fmt(row.empirical_order)
        rows.append(f"{row.n},{_fmt(row.sup_error)},{order},{_fmt(row.derivative_bound)}")
    return "\n".join(rows) + "\n"


def _run_converge(config: ProblemConfig, output) -> int:
    if not config.ns:
        raise ConfigError("converge requires Ns (config field Ns or --ns)")
    problem = build_problem(config)
    try:
        table = run_study(problem, config.ns, _solver_config(config), problem_id=config.name)
    except StudyError as exc:
        _emit(_table_csv(exc.partial), output)
        sys.stderr.write(f"error: {exc}\n")
        return 2
    _emit(_table_csv(table), output)
    return 0


def _run_norms(output, seed: int, n: int | None) -> int:
    rng = np.random.default_rng(seed)
    ns = (n,) if n is not None else _DEFAULT_NORMS_NS
    rows = [
        "N,sample,quarter_e_norm,half_delta_norm,n_norm,sqrtN_sup_norm,N_delta_norm,N2_e_norm,chain_holds"
    ]
    for size in ns:
        for sample in range(_NORMS_SAMPLES):
            m = norms(random_element(size, rng))
            chain = (
                0.25 * m.e_norm,
                0.5 * m.delta_norm,
                m.n_norm,
                np.sqrt(size) * m.sup_norm,
                size * m.delta_norm,
                size**2 * m.e_norm,
            )
            holds = all(a <= b + 1e-12 for a, b in zip(chain, chain[1:]))
            rows.append(
                f"{size},{sample},"
                + ",".join(_fmt(value) for value in chain)
                + f",{str(holds).lower()}"
            )
    _emit("\n".join(rows) + "\n", output)
    return 0


def run(command: str, config: ProblemConfig | None, output=None, seed: int = 0,
        n: int | None = None) -> int:
    """Execute one CLI command; returns the process exit status."""
    if command not in _COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    if command == "norms":
        return _run_norms(output, seed, n)
    if config is None:
        raise ConfigError(f"{command} requires --config")
    if command == "check":
        return _run_check(config, output)
    if command == "solve":
        return _run_solve(config, output)
    return _run_converge(config, output)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dirbvp",
        description="Check, solve, and run refinement studies for nonlinear "
        "Dirichlet difference equations.",
    )
    parser.add_argument("command", choices=_COMMANDS)
    parser.add_argument("--config", help="problem config file (flat text or .json)")
    parser.add_argument("--output", help="write the primary artifact to this file")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized demos")
    parser.add_argument("--n", type=int, help="override the config grid size N")
    parser.add_argument("--ns", help="override the config list Ns (comma separated)")
    args = parser.parse_args(argv)

    try:
        config = None
        if args.config is not None:
            config = load_config(args.config)
            if args.n is not None:
                config = replace(config, n=args.n)
            if args.ns is not None:
                config = replace(config, ns=_parse_ns(args.ns))
        return run(args.command, config, output=args.output, seed=args.seed, n=args.n)
    except (ConfigError, ParseError, EvalError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
