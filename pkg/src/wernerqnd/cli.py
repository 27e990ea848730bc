"""Command-line front end: protocol runs, sweeps, and CSV/report output.

Configuration comes from an INI-style file (``key = value`` lines with
optional ``[section]`` headers, ``#``/``;`` comments) and/or command-line
flags; flags override file values.  Output is deterministic: the same
configuration and seed produce byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 numeric or constraint
error during the run, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .dynamics import IntegratorConfig
from .errors import (
    CalibrationError,
    ConfigError,
    ConvergenceError,
    IntegrationError,
    NonInformativeTimeError,
)
from .protocols import (
    JointConfig,
    SequentialConfig,
    run_dissipative_calibration,
    run_joint,
    run_sequential,
    sweep_error_surface,
    sweep_population_surface,
)
from .states import BellKind, werner
from .validation import ValidationConfig, validate_full_model

PROTOCOLS = ("joint", "sequential", "calibrate", "fig2", "fig3", "validate-full-model")

_KINDS = {k.value: k for k in BellKind}

# key -> python type used when parsing config-file values
KEY_TYPES: dict[str, type] = {
    "protocol": str,
    "seed": int,
    "out": str,
    "kind": str,
    "x": float,
    "lambda": float,
    "t": float,
    "gamma": float,
    "shots": int,
    "lambda1": float,
    "lambda2": float,
    "t1": float,
    "t2": float,
    "n": int,
    "x_min": float,
    "x_max": float,
    "x_points": int,
    "gamma_min": float,
    "gamma_max": float,
    "gamma_points": int,
    "t_max": float,
    "t_points": int,
    "dt": float,
    "t_end": float,
    "steady_eps": float,
    "g": float,
    "delta": float,
    "omega_ratio": float,
    "n_max": int,
}

# keys each protocol accepts beyond the common (protocol, seed, out)
PROTOCOL_KEYS: dict[str, tuple[str, ...]] = {
    "joint": ("kind", "x", "lambda", "t", "gamma", "shots", "dt"),
    "sequential": ("kind", "x", "lambda1", "lambda2", "t1", "t2", "n", "gamma",
                   "shots", "dt"),
    "calibrate": ("kind", "lambda", "gamma", "x_min", "x_max", "x_points", "dt",
                  "t_end", "steady_eps"),
    "fig2": ("kind", "lambda", "gamma", "x_min", "x_max", "x_points", "t_max",
             "t_points", "dt"),
    "fig3": ("kind", "lambda1", "lambda2", "t1", "t2", "x_min", "x_max", "x_points",
             "gamma_min", "gamma_max", "gamma_points", "dt"),
    "validate-full-model": ("kind", "x", "g", "delta", "omega_ratio", "n_max"),
}
COMMON_KEYS = ("protocol", "seed", "out")


def _fmt(value: Any) -> str:
    """Render a value for reports/CSV; floats get 12 significant digits."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _parse_values(text: str) -> tuple[dict[str, Any], dict[str, int]]:
    """Parse INI-style text into typed values plus the line each key came from."""
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"line {lineno}: malformed section header {raw.strip()!r}")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if key not in KEY_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not rhs:
            raise ConfigError(f"line {lineno}: missing value for key {key!r}")
        typ = KEY_TYPES[key]
        try:
            values[key] = typ(rhs)
        except ValueError:
            raise ConfigError(
                f"line {lineno}: cannot parse {rhs!r} as {typ.__name__} for key {key!r}"
            ) from None
        lines[key] = lineno
        if not _key_in_domain(key, values[key]):
            raise ConfigError(f"line {lineno}: {_domain_message(key, values[key])}")
    return values, lines


def parse_config(text: str) -> "RunConfig":
    """Parse and fully validate an INI-style configuration.

    Rejects unknown keys, malformed values, and violated cross-parameter
    constraints, each reported with its line number.  Section headers are
    allowed for organization and otherwise ignored.  The text must select
    a protocol.
    """
    values, lines = _parse_values(text)
    if "protocol" not in values:
        raise ConfigError("config selects no protocol (add 'protocol = <name>')")
    return _validated_run_config(values.pop("protocol"), values, lines)


def _key_in_domain(key: str, value: Any) -> bool:
    if key == "protocol":
        return value in PROTOCOLS
    if key == "kind":
        return value in _KINDS
    if key == "x":
        return 0.0 <= value <= 1.0
    if key in ("gamma", "gamma_min", "gamma_max"):
        return value >= 0.0
    if key in ("x_min", "x_max"):
        return 0.0 <= value <= 1.0
    if key in ("shots", "x_points", "gamma_points", "t_points", "n_max"):
        return value >= 1
    if key == "n":
        return value >= 0
    if key in ("lambda", "lambda1", "lambda2", "t", "t1", "t2", "dt", "t_end",
               "steady_eps", "t_max", "delta"):
        return value > 0.0
    return True


def _domain_message(key: str, value: Any) -> str:
    if key == "protocol":
        return f"protocol must be one of {', '.join(PROTOCOLS)}; got {value!r}"
    if key == "kind":
        return f"kind must be one of {', '.join(sorted(_KINDS))}; got {value!r}"
    if key in ("x", "x_min", "x_max"):
        return f"{key} is a Werner mixing parameter and must lie in [0, 1]; got {_fmt(value)}"
    if key in ("gamma", "gamma_min", "gamma_max"):
        return f"{key} is a decay rate and must be >= 0; got {_fmt(value)}"
    if key == "n":
        return f"n must be a non-negative integer; got {value}"
    return f"{key} = {_fmt(value)} is out of range"


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run: protocol name plus its validated parameters."""

    protocol: str
    seed: int = 0
    out: str = "."
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(
                f"protocol must be one of {', '.join(PROTOCOLS)}; got {self.protocol!r}"
            )
        allowed = set(PROTOCOL_KEYS[self.protocol])
        stray = sorted(set(self.params) - allowed)
        if stray:
            raise ConfigError(
                f"keys {stray} are not used by protocol {self.protocol!r}; "
                f"allowed keys: {sorted(allowed)}"
            )


def _located(key: str, lines: dict[str, int]) -> str:
    return f"line {lines[key]}: " if key in lines else ""


def _validated_run_config(protocol: str, values: dict[str, Any],
                          lines: dict[str, int]) -> RunConfig:
    """Build a RunConfig, checking domains and cross-parameter constraints.

    Violations are reported with the config-file line number when the
    offending value came from a file.
    """
    if protocol not in PROTOCOLS:
        raise ConfigError(
            f"{_located('protocol', lines)}protocol must be one of "
            f"{', '.join(PROTOCOLS)}; got {protocol!r}"
        )
    for key, value in values.items():
        if not _key_in_domain(key, value):
            raise ConfigError(f"{_located(key, lines)}{_domain_message(key, value)}")
    params = dict(values)
    seed = params.pop("seed", 0)
    out = params.pop("out", ".")
    allowed = set(PROTOCOL_KEYS[protocol])
    stray = sorted(set(params) - allowed)
    if stray:
        where = _located(stray[0], lines)
        raise ConfigError(
            f"{where}keys {stray} are not used by protocol {protocol!r}; "
            f"allowed keys: {sorted(allowed)}"
        )
    # Cross-parameter constraints surface now, not mid-run.
    try:
        if protocol == "sequential" or (protocol == "fig3" and "t2" in params):
            SequentialConfig(
                lam1=params.get("lambda1", 1.0),
                lam2=params.get("lambda2", 1.0),
                t1=params.get("t1", math.pi / 2.0),
                t2=params.get("t2"),
                n=params.get("n"),
                gamma=params.get("gamma", 0.0),
                shots=params.get("shots"),
                seed=seed,
            )
        elif protocol == "joint":
            JointConfig(
                lam=params.get("lambda", 1.0),
                t=params.get("t"),
                gamma=params.get("gamma", 0.0),
                shots=params.get("shots"),
                seed=seed,
            )
    except ValueError as exc:
        key = "t2" if "t2" in str(exc) else "t"
        raise ConfigError(f"{_located(key, lines)}{exc}") from None
    return RunConfig(protocol=protocol, seed=seed, out=out, params=params)


def resolve_config(protocol: str, file_values: dict[str, Any],
                   flag_values: dict[str, Any],
                   file_lines: dict[str, int] | None = None) -> RunConfig:
    """Merge file values and flag overrides into a validated RunConfig."""
    merged = dict(file_values)
    lines = dict(file_lines or {})
    for key, value in flag_values.items():
        if value is None:
            continue
        merged[key] = value
        lines.pop(key, None)  # overridden values no longer trace to the file
    # The subcommand acts as a flag: it overrides a protocol key in the file.
    merged.pop("protocol", None)
    return _validated_run_config(protocol, merged, lines)


def _grid(lo: float, hi: float, points: int) -> np.ndarray:
    if points == 1:
        return np.array([lo])
    if hi < lo:
        raise ConfigError(f"grid upper bound {hi} is below lower bound {lo}")
    return np.linspace(lo, hi, points)


def _integrator(params: dict[str, Any], default_dt: float, t_end: float,
                steady_eps: float = 1e-8) -> IntegratorConfig:
    return IntegratorConfig(
        dt=params.get("dt", default_dt),
        t_end=params.get("t_end", t_end),
        steady_eps=params.get("steady_eps", steady_eps),
    )


def _kind(params: dict[str, Any]) -> BellKind:
    return _KINDS[params.get("kind", "psi_minus")]


def _report_lines(cfg: RunConfig, resolved: dict[str, Any],
                  results: dict[str, Any]) -> list[str]:
    lines = [f"protocol = {cfg.protocol}", f"seed = {cfg.seed}"]
    lines += [f"{key} = {_fmt(value)}" for key, value in resolved.items()]
    lines.append("")
    lines += [f"{key} = {_fmt(value)}" for key, value in results.items()]
    return lines


def _write(out_dir: Path, name: str, lines: Sequence[str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_csv(out_dir: Path, name: str, header: Sequence[str],
               rows: Sequence[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _write(out_dir, name, lines)


def _run_single(cfg: RunConfig, out_dir: Path) -> None:
    params = cfg.params
    kind = _kind(params)
    x = params.get("x", 0.5)
    rho12 = werner(x, kind)
    relabel = kind in (BellKind.PSI_PLUS, BellKind.PHI_PLUS)
    if cfg.protocol == "joint":
        run_cfg = JointConfig(
            lam=params.get("lambda", 1.0),
            t=params.get("t"),
            gamma=params.get("gamma", 0.0),
            shots=params.get("shots"),
            seed=cfg.seed,
        )
        integrator = _integrator(params, 1e-3, run_cfg.t)
        report = run_joint(rho12, run_cfg, x_true=x, relabel=relabel,
                           integrator=integrator)
        resolved = {
            "kind": kind.value, "x": x, "lambda": run_cfg.lam, "t": run_cfg.t,
            "gamma": run_cfg.gamma, "relabel": relabel,
        }
    else:
        run_cfg = SequentialConfig(
            lam1=params.get("lambda1", 1.0),
            lam2=params.get("lambda2", 1.0),
            t1=params.get("t1", math.pi / 2.0),
            t2=params.get("t2"),
            n=params.get("n"),
            gamma=params.get("gamma", 0.0),
            shots=params.get("shots"),
            seed=cfg.seed,
        )
        integrator = _integrator(params, 1e-3, run_cfg.t1 + run_cfg.t2)
        report = run_sequential(rho12, run_cfg, x_true=x, relabel=relabel,
                                integrator=integrator)
        resolved = {
            "kind": kind.value, "x": x, "lambda1": run_cfg.lam1,
            "lambda2": run_cfg.lam2, "t1": run_cfg.t1, "t2": run_cfg.t2,
            "n": run_cfg.n, "gamma": run_cfg.gamma, "relabel": relabel,
        }
    if run_cfg.shots is not None:
        resolved["shots"] = run_cfg.shots
    results = {
        "x_hat": report.x_hat,
        "delta_x": report.delta_x,
        "fidelity_12": report.fidelity_12,
        "probe_excited_population": float(np.real(report.probe_state.matrix[0, 0])),
        "clamped": report.clamped,
    }
    if report.stderr is not None:
        results["stderr"] = report.stderr
    _write(out_dir, "report.txt", _report_lines(cfg, resolved, results))


def _run_calibrate(cfg: RunConfig, out_dir: Path) -> None:
    params = cfg.params
    gamma = params.get("gamma", 0.1)
    lam = params.get("lambda", 1.0)
    x_grid = _grid(params.get("x_min", 0.0), params.get("x_max", 1.0),
                   params.get("x_points", 11))
    integrator = _integrator(params, 1e-2, params.get("t_end", 400.0))
    curve, trajectories = run_dissipative_calibration(
        gamma, x_grid, lam=lam, kind=_kind(params), integrator=integrator
    )
    rows = [
        (x, traj.observables["sigma3z"][-1], traj.times[-1])
        for x, traj in zip(x_grid, trajectories)
    ]
    _write_csv(out_dir, "calibration.csv", ("x", "sigma3z", "t_reached"), rows)
    resolved = {
        "kind": _kind(params).value, "lambda": lam, "gamma": gamma,
        "x_points": len(x_grid),
    }
    results = {
        "slope": curve.slope,
        "intercept": curve.intercept,
        "max_residual": curve.max_residual,
        "provenance": curve.provenance,
    }
    _write(out_dir, "report.txt", _report_lines(cfg, resolved, results))


def _run_fig2(cfg: RunConfig, out_dir: Path) -> None:
    params = cfg.params
    gamma = params.get("gamma", 0.1)
    lam = params.get("lambda", 1.0)
    x_grid = _grid(params.get("x_min", 0.0), params.get("x_max", 1.0),
                   params.get("x_points", 11))
    t_grid = np.linspace(0.0, params.get("t_max", 50.0), params.get("t_points", 101))
    integrator = IntegratorConfig(dt=params.get("dt", 1e-3), t_end=float(t_grid[-1]))
    rows = sweep_population_surface(gamma, x_grid, t_grid, lam=lam,
                                    kind=_kind(params), integrator=integrator)
    _write_csv(out_dir, "fig2.csv", ("x", "t", "sigma3z", "ground_population"), rows)
    resolved = {
        "kind": _kind(params).value, "lambda": lam, "gamma": gamma,
        "x_points": len(x_grid), "t_points": len(t_grid),
    }
    results = {"rows": len(rows)}
    _write(out_dir, "report.txt", _report_lines(cfg, resolved, results))


def _run_fig3(cfg: RunConfig, out_dir: Path) -> None:
    params = cfg.params
    x_grid = _grid(params.get("x_min", 0.0), params.get("x_max", 1.0),
                   params.get("x_points", 21))
    gamma_grid = _grid(params.get("gamma_min", 0.0), params.get("gamma_max", 0.1),
                       params.get("gamma_points", 11))
    t1 = params.get("t1", math.pi / 2.0)
    t2 = params.get("t2", math.pi / 2.0)
    lam1 = params.get("lambda1", 1.0)
    lam2 = params.get("lambda2", 1.0)
    integrator = IntegratorConfig(dt=params.get("dt", 1e-3), t_end=t1 + t2)
    rows = sweep_error_surface(x_grid, gamma_grid, t1=t1, t2=t2, lam1=lam1,
                               lam2=lam2, kind=_kind(params), integrator=integrator)
    _write_csv(out_dir, "fig3.csv", ("x", "gamma", "fidelity", "delta_x"), rows)
    resolved = {
        "kind": _kind(params).value, "lambda1": lam1, "lambda2": lam2,
        "t1": t1, "t2": t2, "x_points": len(x_grid),
        "gamma_points": len(gamma_grid),
    }
    results = {
        "rows": len(rows),
        "max_delta_x": max(r.delta_x for r in rows),
        "min_fidelity": min(r.fidelity for r in rows),
    }
    _write(out_dir, "report.txt", _report_lines(cfg, resolved, results))


def _run_validate(cfg: RunConfig, out_dir: Path) -> None:
    params = cfg.params
    vcfg = ValidationConfig(
        g=params.get("g", 1.0),
        delta=params.get("delta", 20.0),
        omega_ratio=params.get("omega_ratio", 10.0),
        x=params.get("x", 0.5),
        n_max=params.get("n_max", 2),
        kind=_kind(params),
    )
    report = validate_full_model(vcfg)
    rows = [
        (t, pf, pe, abs(pf - pe))
        for t, pf, pe in zip(report.times, report.p_full, report.p_eff)
    ]
    _write_csv(out_dir, "validation.csv",
               ("t", "p_excited_full", "p_excited_effective", "abs_deviation"), rows)
    resolved = {
        "kind": vcfg.kind.value, "g": vcfg.g, "delta": vcfg.delta,
        "omega_ratio": vcfg.omega_ratio, "x": vcfg.x, "n_max": vcfg.n_max,
    }
    results = {
        "max_deviation": report.max_deviation,
        "passes": report.passes,
        "cutoff_disagreement": report.cutoff_disagreement,
    }
    lines = _report_lines(cfg, resolved, results)
    lines += [f"warning = {w}" for w in report.warnings]
    _write(out_dir, "report.txt", lines)


def run(cfg: RunConfig) -> int:
    """Execute a resolved configuration; returns the process exit code."""
    out_dir = Path(cfg.out)
    try:
        if cfg.protocol in ("joint", "sequential"):
            _run_single(cfg, out_dir)
        elif cfg.protocol == "calibrate":
            _run_calibrate(cfg, out_dir)
        elif cfg.protocol == "fig2":
            _run_fig2(cfg, out_dir)
        elif cfg.protocol == "fig3":
            _run_fig3(cfg, out_dir)
        else:
            _run_validate(cfg, out_dir)
    except ConfigError as exc:
        print(f"error (config): {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error (convergence): {exc}", file=sys.stderr)
        return 4
    except (ValueError, NonInformativeTimeError, IntegrationError,
            CalibrationError) as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wernerqnd",
        description="Nondemolition measurement of two-qubit Werner states: "
                    "protocol runs, calibration, and sweep tables.",
    )
    sub = parser.add_subparsers(dest="protocol", required=True)
    helps = {
        "joint": "both qubits coupled to the probe simultaneously",
        "sequential": "probe visits qubit 1, then qubit 2",
        "calibrate": "steady-state <sigma_z> vs x calibration under probe decay",
        "fig2": "probe <sigma_z>(x, t) surface under probe decay (fig2.csv)",
        "fig3": "fidelity and estimation-error surface over (x, gamma) (fig3.csv)",
        "validate-full-model": "compare the effective model with the driven "
                               "two-cavity model",
    }
    for proto in PROTOCOLS:
        p = sub.add_parser(proto, help=helps[proto])
        p.add_argument("--config", type=str, default=None,
                       help="INI-style config file; flags override its values")
        p.add_argument("--out", type=str, default=None,
                       help="output directory (default: current directory)")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for sampled readout (default: 0)")
        for key in PROTOCOL_KEYS[proto]:
            typ = KEY_TYPES[key]
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ,
                           default=None, help=f"{key} ({typ.__name__})")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    values = vars(args)
    protocol = values.pop("protocol")
    config_path = values.pop("config", None)
    file_values: dict[str, Any] = {}
    file_lines: dict[str, int] = {}
    try:
        if config_path is not None:
            try:
                text = Path(config_path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config file {config_path!r}: {exc}")
            file_values, file_lines = _parse_values(text)
        cfg = resolve_config(protocol, file_values, values, file_lines)
    except ConfigError as exc:
        print(f"error (config): {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
