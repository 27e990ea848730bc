"""Measurement protocols and estimation of the Werner mixing parameter.

Three routes to the parameter x are implemented:

* joint: both system qubits couple to the probe simultaneously; the probe
  populations after time t follow (1-x)/2 * sin^2(lam*t), inverted for x.
* sequential: the probe visits each qubit in turn (two commuting pair
  couplings); succeeds whenever the stage times satisfy the timing
  constraint lam2*t2 = lam1*t1 + 2*n*pi, read out as x = -<sigma_z>.
* dissipative calibration: with probe spontaneous emission the probe
  relaxes to a steady state whose <sigma_z> is affine in x; the affine
  map is calibrated once and inverted thereafter.

All runs are pure given (inputs, seed); sweeps enumerate their grids in
deterministic order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .dynamics import (
    IntegratorConfig,
    Trajectory,
    integrate_master,
    propagate,
    steady_state,
)
from .errors import CalibrationError, ConvergenceError, NonInformativeTimeError
from .operators import (
    effective_hamiltonian,
    pair_hamiltonian,
    pauli,
    probe_decay_channel,
)
from .states import (
    BellKind,
    DensityMatrix,
    bell_relabel,
    bell_state,
    fidelity,
    ground_state,
    sample_measurement,
    werner,
)
from .tensor import THREE_QUBITS

# Below this value of sin^2(lam*t) the probe populations carry no usable
# signal and inversion would amplify noise without bound.
MIN_SIGNAL = 1e-6

_SIGMA3Z = pauli("z", "q3", THREE_QUBITS)


@dataclass(frozen=True)
class JointConfig:
    """Joint-protocol run: coupling lam, interaction time t, probe decay gamma."""

    lam: float = 1.0
    t: float | None = None
    gamma: float = 0.0
    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"coupling must be > 0, got {self.lam}")
        if self.t is None:
            object.__setattr__(self, "t", math.pi / (2.0 * self.lam))
        if self.t <= 0:
            raise ValueError(f"interaction time must be > 0, got {self.t}")
        if math.sin(self.lam * self.t) ** 2 < MIN_SIGNAL:
            raise ValueError(
                f"non-informative interaction time t={self.t}: "
                f"sin^2(lam*t) < {MIN_SIGNAL}, the probe returns to its initial state"
            )
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


@dataclass(frozen=True)
class SequentialConfig:
    """Sequential-protocol run; stage times must satisfy the timing constraint
    t2 = (lam1/lam2) * t1 + 2*pi*n / lam2 for a non-negative integer n."""

    lam1: float = 1.0
    lam2: float = 1.0
    t1: float = math.pi / 2.0
    t2: float | None = None
    n: int | None = None
    gamma: float = 0.0
    shots: int | None = None
    seed: int = 0

    TIMING_TOL = 1e-9

    def __post_init__(self):
        if self.lam1 <= 0 or self.lam2 <= 0:
            raise ValueError("couplings must be > 0")
        if self.t1 <= 0:
            raise ValueError(f"t1 must be > 0, got {self.t1}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        base = (self.lam1 / self.lam2) * self.t1
        period = 2.0 * math.pi / self.lam2
        if self.t2 is None:
            n = 0 if self.n is None else self.n
            if n < 0:
                raise ValueError(f"n must be >= 0, got {n}")
            object.__setattr__(self, "n", n)
            object.__setattr__(self, "t2", base + n * period)
            return
        n = self.n if self.n is not None else round((self.t2 - base) / period)
        expected = base + n * period
        if n < 0 or abs(self.t2 - expected) > self.TIMING_TOL:
            raise ValueError(
                f"t2={self.t2} violates the timing constraint "
                f"t2 = (lam1/lam2)*t1 + 2*pi*n/lam2; nearest valid value is "
                f"{base + max(n, 0) * period:.12g} (n={max(n, 0)})"
            )
        object.__setattr__(self, "n", n)


@dataclass(frozen=True)
class CalibrationCurve:
    """Affine map x -> steady-state <sigma_z> of the probe, and its inverse."""

    slope: float
    intercept: float
    gamma: float
    provenance: str = "fitted"
    max_residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.provenance not in ("analytic-endpoints", "fitted"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        at_one = self.slope + self.intercept
        if abs(at_one - (-1.0)) > 1e-5:
            raise ValueError(
                f"calibration curve must pass through (x=1, value=-1); got {at_one:.8g}"
            )

    def evaluate(self, x: float) -> float:
        return self.slope * x + self.intercept

    def invert(self, value: float) -> float:
        return (value - self.intercept) / self.slope


class Estimate(NamedTuple):
    x_hat: float
    stderr: float | None
    clamped: bool


@dataclass(frozen=True)
class ProtocolReport:
    """Audit of one protocol run: what went in, what the probe said."""

    x_true: float
    x_hat: float
    delta_x: float
    fidelity_12: float
    probe_state: DensityMatrix
    reduced_12: DensityMatrix
    config: object
    stderr: float | None = None
    clamped: bool = False
    trajectory: Trajectory | None = None

    def __post_init__(self):
        if abs(self.delta_x - abs(self.x_true - self.x_hat)) > 1e-12:
            raise ValueError("delta_x must equal |x_true - x_hat|")
        if not -1e-9 <= self.fidelity_12 <= 1.0 + 1e-9:
            raise ValueError(f"fidelity {self.fidelity_12} outside [0, 1]")


def infer_mixing_parameter(rho12: DensityMatrix) -> float:
    """Read x off a minus-family Werner state via its Bell-state overlap.

    The overlap with the dominant minus-family Bell state is (1+3x)/4;
    for states outside that family the result is clipped and only
    indicative.
    """
    overlaps = []
    for kind in (BellKind.PSI_MINUS, BellKind.PHI_MINUS):
        psi = bell_state(kind, rho12.layout).amplitudes
        overlaps.append(float(np.real(psi.conj() @ rho12.matrix @ psi)))
    return float(np.clip((4.0 * max(overlaps) - 1.0) / 3.0, 0.0, 1.0))


def estimate_x_from_probe(
    probe: DensityMatrix,
    lambda_t: float | None = None,
    curve: CalibrationCurve | None = None,
    shots: int | None = None,
    seed: int = 0,
) -> Estimate:
    """Invert the probe state into a mixing-parameter estimate.

    Exactly one inversion mode must be selected: ``lambda_t`` inverts the
    closed-evolution population law x = 1 - 2*P_e / sin^2(lam*t), while
    ``curve`` inverts a steady-state calibration.  With ``shots`` the
    populations come from a seeded sampled readout and a binomial
    standard error accompanies the estimate; estimates are clamped to
    [0, 1] with the clamping flagged.
    """
    if (lambda_t is None) == (curve is None):
        raise ValueError("select exactly one inversion mode: lambda_t or curve")
    if len(probe.layout.factors) != 1 or probe.layout.dims != (2,):
        raise ValueError("probe must be a single-qubit state")

    if shots is not None:
        record = sample_measurement(probe, shots, seed)
        p_excited = record.frequency("e")
        se_p = math.sqrt(max(p_excited * (1.0 - p_excited), 0.0) / shots)
    else:
        p_excited = float(np.real(probe.matrix[0, 0]))
        se_p = None

    if lambda_t is not None:
        signal = math.sin(lambda_t) ** 2
        if signal < MIN_SIGNAL:
            raise NonInformativeTimeError(
                f"sin^2(lam*t) = {signal:.3e} < {MIN_SIGNAL}: "
                "the probe carries no information at this time"
            )
        raw = 1.0 - 2.0 * p_excited / signal
        stderr = None if se_p is None else 2.0 * se_p / signal
    else:
        value = 2.0 * p_excited - 1.0  # <sigma_z> from populations
        raw = curve.invert(value)
        stderr = None if se_p is None else abs(2.0 * se_p / curve.slope)

    clamped = raw < 0.0 or raw > 1.0
    return Estimate(x_hat=float(np.clip(raw, 0.0, 1.0)), stderr=stderr, clamped=clamped)


def _with_probe(rho12: DensityMatrix) -> DensityMatrix:
    return rho12.tensor(ground_state("q3").to_density())


def _default_integrator(t_end: float) -> IntegratorConfig:
    return IntegratorConfig(dt=1e-3, t_end=t_end)


def run_joint(
    rho12: DensityMatrix,
    cfg: JointConfig,
    x_true: float | None = None,
    relabel: bool = False,
    integrator: IntegratorConfig | None = None,
) -> ProtocolReport:
    """Run the joint protocol: evolve system+probe together, read out the probe.

    With ``relabel=True`` the plus-family transformation is applied before
    the run and inverted afterwards, so plus-family Werner states are
    measured without disturbance too.  Fidelity is always reported
    against the original input.
    """
    work = bell_relabel(rho12) if relabel else rho12
    if x_true is None:
        x_true = infer_mixing_parameter(work)
    joint = _with_probe(work)
    h = effective_hamiltonian(cfg.lam)
    trajectory = None
    if cfg.gamma == 0.0:
        final = propagate(h, joint, cfg.t)
    else:
        icfg = integrator or _default_integrator(cfg.t)
        trajectory = integrate_master(
            h, [probe_decay_channel(cfg.gamma)], joint, icfg,
            observables={"sigma3z": _SIGMA3Z}, sample_times=[cfg.t],
        )
        final = trajectory.states[-1]

    reduced = final.reduced("q1", "q2")
    if relabel:
        reduced = bell_relabel(reduced)
    probe = final.reduced("q3")
    est = estimate_x_from_probe(
        probe, lambda_t=cfg.lam * cfg.t, shots=cfg.shots, seed=cfg.seed
    )
    return ProtocolReport(
        x_true=x_true,
        x_hat=est.x_hat,
        delta_x=abs(x_true - est.x_hat),
        fidelity_12=fidelity(reduced, rho12),
        probe_state=probe,
        reduced_12=reduced,
        config=cfg,
        stderr=est.stderr,
        clamped=est.clamped,
        trajectory=trajectory,
    )


def run_sequential(
    rho12: DensityMatrix,
    cfg: SequentialConfig,
    x_true: float | None = None,
    relabel: bool = False,
    integrator: IntegratorConfig | None = None,
) -> ProtocolReport:
    """Run the two-stage protocol: probe meets qubit 1, then qubit 2.

    The probe is read out with the quarter-period inversion
    x = -<sigma_z>, which is exact when sin^2(lam1*t1) = 1 (the gate-time
    configurations this protocol is designed around).
    """
    work = bell_relabel(rho12) if relabel else rho12
    if x_true is None:
        x_true = infer_mixing_parameter(work)
    state = _with_probe(work)
    h1 = pair_hamiltonian(1, cfg.lam1)
    h2 = pair_hamiltonian(2, cfg.lam2)
    trajectory = None
    if cfg.gamma == 0.0:
        state = propagate(h2, propagate(h1, state, cfg.t1), cfg.t2)
    else:
        channels = [probe_decay_channel(cfg.gamma)]
        icfg = integrator or _default_integrator(cfg.t1 + cfg.t2)
        stage1 = integrate_master(
            h1, channels, state, icfg,
            observables={"sigma3z": _SIGMA3Z}, sample_times=[cfg.t1],
        )
        stage2 = integrate_master(
            h2, channels, stage1.states[-1], icfg,
            observables={"sigma3z": _SIGMA3Z}, sample_times=[cfg.t2],
        )
        trajectory = Trajectory(
            times=np.concatenate([stage1.times, stage1.times[-1] + stage2.times]),
            states=stage1.states + stage2.states,
            observables={
                k: np.concatenate([stage1.observables[k], stage2.observables[k]])
                for k in stage1.observables
            },
        )
        state = stage2.states[-1]

    reduced = state.reduced("q1", "q2")
    if relabel:
        reduced = bell_relabel(reduced)
    probe = state.reduced("q3")
    # Quarter-period inversion: sin^2 = 1, i.e. x_hat = -<sigma_z>.
    est = estimate_x_from_probe(
        probe, lambda_t=math.pi / 2.0, shots=cfg.shots, seed=cfg.seed
    )
    return ProtocolReport(
        x_true=x_true,
        x_hat=est.x_hat,
        delta_x=abs(x_true - est.x_hat),
        fidelity_12=fidelity(reduced, rho12),
        probe_state=probe,
        reduced_12=reduced,
        config=cfg,
        stderr=est.stderr,
        clamped=est.clamped,
        trajectory=trajectory,
    )


# Calibration sweeps run long; a coarser step keeps them fast while the
# steady state, being an attractor, stays accurate far beyond it.
CALIBRATION_INTEGRATOR = IntegratorConfig(dt=1e-2, t_end=400.0)


def run_dissipative_calibration(
    gamma: float,
    x_grid: Sequence[float],
    lam: float = 1.0,
    kind: BellKind = BellKind.PSI_MINUS,
    integrator: IntegratorConfig | None = None,
) -> tuple[CalibrationCurve, list[Trajectory]]:
    """Build the affine map between steady-state <sigma_z> and x.

    Every grid point is driven to its steady state; an affine curve is
    fitted and cross-checked against the curve built from the x = 0 and
    x = 1 endpoints alone (they must agree within 1e-4, otherwise the
    response is not linear and :class:`CalibrationError` is raised).
    Returns the fitted curve and one trajectory per grid point.
    """
    if gamma <= 0:
        raise ValueError(f"calibration requires gamma > 0, got {gamma}")
    if len(x_grid) == 0:
        raise ValueError("x_grid must be non-empty")
    icfg = integrator or CALIBRATION_INTEGRATOR
    h = effective_hamiltonian(lam)
    channels = [probe_decay_channel(gamma)]

    wanted = list(dict.fromkeys([0.0, 1.0] + [float(x) for x in x_grid]))
    values: dict[float, float] = {}
    trajectories: dict[float, Trajectory] = {}
    for x in wanted:
        rho0 = _with_probe(werner(x, kind))
        result = steady_state(
            h, channels, rho0, icfg,
            observables={"sigma3z": _SIGMA3Z}, keep_trajectory=True,
        )
        if not result.reached:
            raise ConvergenceError(
                f"steady state not reached for x={x} within t_end={icfg.t_end} "
                f"(generator norm {result.generator_norm:.3e})"
            )
        values[x] = float(np.real(np.trace(result.state.matrix @ _SIGMA3Z)))
        trajectories[x] = result.trajectory

    xs = np.array([float(x) for x in x_grid])
    ys = np.array([values[float(x)] for x in x_grid])
    if xs.size >= 2:
        slope, intercept = np.polyfit(xs, ys, 1)
    else:
        # Single-point grid: fall back to the endpoint construction.
        slope = values[1.0] - values[0.0]
        intercept = values[0.0]
    residual = float(np.max(np.abs(slope * xs + intercept - ys)))

    end_slope = values[1.0] - values[0.0]
    end_intercept = values[0.0]
    disagreement = max(
        abs((end_slope * x + end_intercept) - (slope * x + intercept)) for x in (0.0, 0.5, 1.0)
    )
    if disagreement > 1e-4:
        raise CalibrationError(
            f"fitted curve deviates from the endpoint construction by {disagreement:.3e} "
            "(> 1e-4): steady response is not affine in x"
        )
    curve = CalibrationCurve(
        slope=float(slope), intercept=float(intercept), gamma=gamma,
        provenance="fitted", max_residual=residual,
    )
    return curve, [trajectories[float(x)] for x in x_grid]


class Fig2Row(NamedTuple):
    x: float
    t: float
    sigma3z: float
    ground_population: float


class Fig3Row(NamedTuple):
    x: float
    gamma: float
    fidelity: float
    delta_x: float


def sweep_population_surface(
    gamma: float,
    x_grid: Sequence[float],
    t_grid: Sequence[float],
    lam: float = 1.0,
    kind: BellKind = BellKind.PSI_MINUS,
    integrator: IntegratorConfig | None = None,
) -> list[Fig2Row]:
    """Probe <sigma_z>(x, t) surface under dissipative joint evolution.

    Emits one row per (x, t) grid point, in grid order, with both the raw
    <sigma_z> and the ground-state population (1 - <sigma_z>) / 2.
    """
    if len(x_grid) == 0 or len(t_grid) == 0:
        raise ValueError("grids must be non-empty")
    t_list = [float(t) for t in t_grid]
    if any(t < 0 for t in t_list) or any(b < a for a, b in zip(t_list, t_list[1:])):
        raise ValueError("t_grid must be non-negative and non-decreasing")
    icfg = integrator or IntegratorConfig(dt=1e-3, t_end=max(t_list))
    h = effective_hamiltonian(lam)
    channels = [probe_decay_channel(gamma)]
    rows: list[Fig2Row] = []
    for x in x_grid:
        rho0 = _with_probe(werner(float(x), kind))
        traj = integrate_master(
            h, channels, rho0, icfg,
            observables={"sigma3z": _SIGMA3Z}, sample_times=t_list,
        )
        for t, sz in zip(traj.times, traj.observables["sigma3z"]):
            rows.append(Fig2Row(float(x), float(t), float(sz), (1.0 - float(sz)) / 2.0))
    return rows


def sweep_error_surface(
    x_grid: Sequence[float],
    gamma_grid: Sequence[float],
    t1: float = math.pi / 2.0,
    t2: float = math.pi / 2.0,
    lam1: float = 1.0,
    lam2: float = 1.0,
    kind: BellKind = BellKind.PSI_MINUS,
    integrator: IntegratorConfig | None = None,
) -> list[Fig3Row]:
    """Werner fidelity and estimation error delta_x over an (x, gamma) grid.

    Runs the sequential protocol at each grid point, in grid order (x
    outer, gamma inner).
    """
    if len(x_grid) == 0 or len(gamma_grid) == 0:
        raise ValueError("grids must be non-empty")
    rows: list[Fig3Row] = []
    for x in x_grid:
        rho12 = werner(float(x), kind)
        for gamma in gamma_grid:
            cfg = SequentialConfig(
                lam1=lam1, lam2=lam2, t1=t1, t2=t2, gamma=float(gamma)
            )
            report = run_sequential(rho12, cfg, x_true=float(x), integrator=integrator)
            rows.append(Fig3Row(float(x), float(gamma), report.fidelity_12, report.delta_x))
    return rows
