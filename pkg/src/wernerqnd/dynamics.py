"""Time evolution: unitary maps and dissipative master-equation integration.

The master equation used throughout is

    drho/dt = -i [H, rho] + sum_k rate_k (2 L_k rho L_k^+ - L_k^+ L_k rho - rho L_k^+ L_k)

with the rate convention of :class:`~wernerqnd.operators.LindbladChannel`.
Integration is classic fixed-step fourth-order Runge-Kutta: deterministic,
step-size chosen by the caller, every recorded state re-validated against
the density-matrix invariants.  A vectorized Liouvillian builder is
provided as an independent cross-check (kernel / exact-propagator oracle),
not as the default path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IntegrationError
from .operators import LindbladChannel
from .states import DensityMatrix
from .tensor import check_unitary, hermitian_expm, _as_square

# Along a trajectory, rounding may push eigenvalues slightly negative;
# recorded states tolerate this much before failing validation.
TRAJECTORY_PSD_TOL = 1e-8


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings (times in units of 1/g)."""

    dt: float = 1e-3
    t_end: float = 10.0
    record_every: int = 10
    trace_tol: float = 1e-8
    steady_eps: float = 1e-8

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.trace_tol <= 0 or self.steady_eps <= 0:
            raise ValueError("tolerances must be > 0")


@dataclass(frozen=True)
class Trajectory:
    """Recorded times, validated states, and named observable series."""

    times: np.ndarray
    states: list[DensityMatrix]
    observables: dict[str, np.ndarray]

    def __post_init__(self):
        n = len(self.times)
        if len(self.states) != n or any(len(v) != n for v in self.observables.values()):
            raise ValueError("trajectory series have mismatched lengths")


@dataclass(frozen=True)
class SteadyStateResult:
    state: DensityMatrix
    reached: bool
    t_reached: float
    generator_norm: float
    trajectory: Trajectory | None = None


def conjugate(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    """U rho U^+ for a unitary U; preserves trace and spectrum."""
    u = _as_square(u, "u")
    if not check_unitary(u):
        raise ValueError("conjugation requires a unitary within 1e-10")
    if u.shape[0] != rho.layout.dim:
        raise ValueError(f"unitary dim {u.shape[0]} does not match state dim {rho.layout.dim}")
    return DensityMatrix(u @ rho.matrix @ u.conj().T, rho.layout, psd_tol=rho.psd_tol)


def propagate(h: np.ndarray, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """Closed-system evolution of rho0 under Hermitian h for time t."""
    return conjugate(rho0, hermitian_expm(h, t))


def _channel_terms(channels: Iterable[LindbladChannel], dim: int):
    terms = []
    for ch in channels:
        l_op = _as_square(ch.collapse, "collapse")
        if l_op.shape[0] != dim:
            raise ValueError(f"collapse operator dim {l_op.shape[0]} does not match {dim}")
        terms.append((ch.rate, l_op, l_op.conj().T, l_op.conj().T @ l_op))
    return terms


def lindblad_rhs(h: np.ndarray, channels: Sequence[LindbladChannel],
                 rho: np.ndarray) -> np.ndarray:
    """Right-hand side of the master equation evaluated at a state matrix."""
    h = _as_square(h, "h")
    rho = np.asarray(rho, dtype=complex)
    out = -1j * (h @ rho - rho @ h)
    for rate, l_op, l_dag, ldl in _channel_terms(channels, h.shape[0]):
        out = out + rate * (2.0 * (l_op @ rho @ l_dag) - ldl @ rho - rho @ ldl)
    return out


def liouvillian_matrix(h: np.ndarray, channels: Sequence[LindbladChannel]) -> np.ndarray:
    """Dense superoperator L acting on row-major vectorized states.

    Satisfies L @ rho.reshape(-1) == lindblad_rhs(h, channels, rho).reshape(-1);
    used as an independent oracle (exact propagator expm(L t), kernel solve).
    """
    h = _as_square(h, "h")
    d = h.shape[0]
    eye = np.eye(d)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, l_op, l_dag, ldl in _channel_terms(channels, d):
        sup = sup + rate * (
            2.0 * np.kron(l_op, l_op.conj())
            - np.kron(ldl, eye)
            - np.kron(eye, ldl.T)
        )
    return sup


def liouvillian_kernel(sup: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of a superoperator."""
    u, s, vh = np.linalg.svd(sup)
    rank = int(np.sum(s > tol * s[0])) if s.size else 0
    return vh[rank:].conj().T


def _validated(mat: np.ndarray, layout, trace_tol: float) -> DensityMatrix:
    if not np.all(np.isfinite(mat.view(float))):
        raise IntegrationError("integration produced non-finite entries")
    drift = abs(np.trace(mat).real - 1.0) + abs(np.trace(mat).imag)
    if drift > trace_tol:
        raise IntegrationError(
            f"trace drift {drift:.3e} exceeds tolerance {trace_tol:.1e}; reduce dt"
        )
    # Re-symmetrize before validating: RK4 keeps Hermiticity to rounding only.
    sym = (mat + mat.conj().T) / 2
    return DensityMatrix(sym, layout, psd_tol=TRAJECTORY_PSD_TOL)


def _rk4_span(rhs, rho: np.ndarray, span: float, dt: float) -> np.ndarray:
    """Integrate across span with steps of size <= dt, landing exactly on span."""
    if span <= 0:
        return rho
    n = max(1, math.ceil(span / dt - 1e-12))
    h = span / n
    for _ in range(n):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


def integrate_master(
    h: np.ndarray,
    channels: Sequence[LindbladChannel],
    rho0: DensityMatrix,
    cfg: IntegratorConfig,
    observables: dict[str, np.ndarray] | None = None,
    sample_times: Sequence[float] | None = None,
) -> Trajectory:
    """Integrate the master equation and record validated states.

    With ``sample_times`` given, the integrator lands exactly on each
    requested time (monotone, starting at >= 0) and records only those;
    otherwise it records t = 0, every ``record_every``-th step, and the
    final time ``cfg.t_end``.  Raises :class:`IntegrationError` when the
    trace drifts beyond ``cfg.trace_tol`` (the step size is too large) or
    any entry becomes non-finite.
    """
    h = _as_square(h, "h")
    terms = _channel_terms(channels, h.shape[0])

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = -1j * (h @ rho - rho @ h)
        for rate, l_op, l_dag, ldl in terms:
            out = out + rate * (2.0 * (l_op @ rho @ l_dag) - ldl @ rho - rho @ ldl)
        return out

    obs = observables or {}
    obs_series: dict[str, list[float]] = {name: [] for name in obs}
    times: list[float] = []
    states: list[DensityMatrix] = []

    def record(t: float, mat: np.ndarray):
        state = _validated(mat, rho0.layout, cfg.trace_tol)
        times.append(t)
        states.append(state)
        for name, op in obs.items():
            obs_series[name].append(float(np.real(np.trace(state.matrix @ op))))

    rho = np.array(rho0.matrix, dtype=complex)

    if sample_times is not None:
        samples = [float(t) for t in sample_times]
        if any(t < 0 for t in samples) or any(
            b - a < -1e-15 for a, b in zip(samples, samples[1:])
        ):
            raise ValueError("sample_times must be non-negative and non-decreasing")
        t_now = 0.0
        for t_target in samples:
            rho = _rk4_span(rhs, rho, t_target - t_now, cfg.dt)
            t_now = t_target
            record(t_now, rho)
    else:
        n_total = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-12)) if cfg.t_end > 0 else 0
        step = cfg.t_end / n_total if n_total else 0.0
        record(0.0, rho)
        for i in range(1, n_total + 1):
            rho = _rk4_span(rhs, rho, step, step)
            if i % cfg.record_every == 0 or i == n_total:
                record(i * step, rho)

    return Trajectory(
        times=np.array(times),
        states=states,
        observables={k: np.array(v) for k, v in obs_series.items()},
    )


def steady_state(
    h: np.ndarray,
    channels: Sequence[LindbladChannel],
    rho0: DensityMatrix,
    cfg: IntegratorConfig,
    observables: dict[str, np.ndarray] | None = None,
    keep_trajectory: bool = False,
    check_interval: float = 1.0,
) -> SteadyStateResult:
    """Integrate until the generator norm ||drho/dt||_F falls below steady_eps.

    Non-convergence within ``cfg.t_end`` is reported via ``reached=False``,
    not raised: the caller decides whether a partial answer is usable.
    The criterion is on the generator, not on state differences, so it is
    independent of the step size.
    """
    h = _as_square(h, "h")
    terms = _channel_terms(channels, h.shape[0])

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = -1j * (h @ rho - rho @ h)
        for rate, l_op, l_dag, ldl in terms:
            out = out + rate * (2.0 * (l_op @ rho @ l_dag) - ldl @ rho - rho @ ldl)
        return out

    obs = observables or {}
    times: list[float] = []
    recorded: list[DensityMatrix] = []
    obs_series: dict[str, list[float]] = {name: [] for name in obs}

    def record(t: float, state: DensityMatrix):
        if not keep_trajectory:
            return
        times.append(t)
        recorded.append(state)
        for name, op in obs.items():
            obs_series[name].append(float(np.real(np.trace(state.matrix @ op))))

    rho = np.array(rho0.matrix, dtype=complex)
    t_now = 0.0
    norm = float(np.linalg.norm(lindblad_rhs(h, channels, rho)))
    state = _validated(rho, rho0.layout, cfg.trace_tol)
    record(t_now, state)
    reached = norm <= cfg.steady_eps
    while not reached and t_now < cfg.t_end - 1e-12:
        span = min(check_interval, cfg.t_end - t_now)
        rho = _rk4_span(rhs, rho, span, cfg.dt)
        t_now += span
        state = _validated(rho, rho0.layout, cfg.trace_tol)
        norm = float(np.linalg.norm(rhs(rho)))
        record(t_now, state)
        reached = norm <= cfg.steady_eps

    trajectory = None
    if keep_trajectory:
        trajectory = Trajectory(
            times=np.array(times),
            states=recorded,
            observables={k: np.array(v) for k, v in obs_series.items()},
        )
    return SteadyStateResult(
        state=state,
        reached=reached,
        t_reached=t_now,
        generator_norm=norm,
        trajectory=trajectory,
    )
