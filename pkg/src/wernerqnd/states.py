"""Quantum states: Bell pairs, the Werner family, and state functionals.

Density matrices validate their defining invariants (Hermiticity, unit
trace, positivity) on construction, so any operation that returns a
:class:`DensityMatrix` has been checked.  All arrays are frozen
read-only; operations return new values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .tensor import (
    STRUCTURE_TOL,
    SubsystemLayout,
    TWO_QUBITS,
    check_hermitian,
    embed_operator,
    frobenius_distance,
    kron,
    partial_trace,
)

# Harmless negative eigenvalues from integration rounding are tolerated
# down to this slack; anything below is a real positivity violation.
PSD_SLACK = 1e-10


class BellKind(enum.Enum):
    PSI_MINUS = "psi_minus"
    PSI_PLUS = "psi_plus"
    PHI_MINUS = "phi_minus"
    PHI_PLUS = "phi_plus"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    """Normalized state vector on a labeled tensor-product space."""

    amplitudes: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.dim:
            raise ValueError(
                f"amplitude vector has size {amps.size}, layout dim is {self.layout.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state vector is not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.layout)

    def overlap(self, other: "PureState") -> complex:
        if self.layout != other.layout:
            raise ValueError("layout mismatch in overlap")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator with a layout."""

    matrix: np.ndarray
    layout: SubsystemLayout
    psd_tol: float = field(default=PSD_SLACK, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.layout.dim, self.layout.dim):
            raise ValueError(f"matrix shape {m.shape} does not match layout dim {self.layout.dim}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("density matrix contains non-finite entries")
        if not check_hermitian(m, STRUCTURE_TOL):
            raise ValueError("density matrix is not Hermitian within 1e-10")
        tr = np.trace(m)
        if abs(tr - 1.0) > STRUCTURE_TOL:
            raise ValueError(f"density matrix trace is {tr:.12g}, expected 1")
        min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
        if min_eig < -self.psd_tol:
            raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3e}")
        object.__setattr__(self, "matrix", _frozen(m))

    def reduced(self, *keep: str) -> "DensityMatrix":
        sub, sub_layout = partial_trace(self.matrix, self.layout, keep)
        return DensityMatrix(sub, sub_layout, psd_tol=self.psd_tol)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(
            kron(self.matrix, other.matrix),
            self.layout.join(other.layout),
            psd_tol=max(self.psd_tol, other.psd_tol),
        )

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome counts of a seeded projective-measurement simulation."""

    shots: int
    counts: dict[str, int]
    seed: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("outcome counts do not sum to shots")

    def frequency(self, outcome: str) -> float:
        return self.counts.get(outcome, 0) / self.shots


# Local basis vectors per the package convention: index 0 = |e> = |1>.
EXCITED = np.array([1.0, 0.0], dtype=complex)
GROUND = np.array([0.0, 1.0], dtype=complex)


def ground_state(label: str = "q3") -> PureState:
    return PureState(GROUND, SubsystemLayout.qubits(label))


def excited_state(label: str = "q3") -> PureState:
    return PureState(EXCITED, SubsystemLayout.qubits(label))


_BELL_AMPLITUDES = {
    # Index order on two qubits: |11>, |10>, |01>, |00> (excited first).
    BellKind.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
    BellKind.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    BellKind.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),
    BellKind.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
}


def bell_state(kind: BellKind, layout: SubsystemLayout = TWO_QUBITS) -> PureState:
    """One of the four maximally entangled two-qubit states."""
    if len(layout.factors) != 2 or layout.dims != (2, 2):
        raise ValueError("Bell states need a two-qubit layout")
    return PureState(_BELL_AMPLITUDES[kind], layout)


def werner(x: float, kind: BellKind = BellKind.PSI_MINUS,
           layout: SubsystemLayout = TWO_QUBITS) -> DensityMatrix:
    """Mixture (1-x)/4 * I + x * |bell><bell| of identity and a Bell state."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"mixing parameter x must lie in [0, 1], got {x}")
    bell = bell_state(kind, layout)
    m = (1.0 - x) / 4.0 * np.eye(4) + x * np.outer(bell.amplitudes, bell.amplitudes.conj())
    return DensityMatrix(m, layout)


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


def expectation(rho: DensityMatrix, observable: np.ndarray) -> float:
    """tr(rho * observable) for a Hermitian observable."""
    obs = np.asarray(observable, dtype=complex)
    if obs.shape != rho.matrix.shape:
        raise ValueError(f"observable shape {obs.shape} does not match state {rho.matrix.shape}")
    if not check_hermitian(obs):
        raise ValueError("observable is not Hermitian within 1e-10")
    val = np.trace(rho.matrix @ obs)
    if abs(val.imag) > STRUCTURE_TOL:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def fidelity(rho: DensityMatrix, target: DensityMatrix) -> float:
    """Squared Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    For a pure argument this reduces to the overlap <psi|sigma|psi>, which
    is evaluated directly: the general eigendecomposition route takes
    square roots of numerically-zero eigenvalues on rank-deficient states
    and loses ~1e-8 of accuracy there, far above what identity checks on
    pure states need.
    """
    if rho.layout != target.layout:
        raise ValueError("fidelity requires matching layouts")
    for a, b in ((target, rho), (rho, target)):
        evals, vecs = np.linalg.eigh(a.matrix)
        if evals[-1] >= 1.0 - 1e-12:
            psi = vecs[:, -1]
            f = float(np.real(psi.conj() @ b.matrix @ psi))
            break
    else:
        evals, vecs = np.linalg.eigh(rho.matrix)
        sqrt_rho = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T
        inner = sqrt_rho @ target.matrix @ sqrt_rho
        inner_evals = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0.0, None)
        # Drop pure rounding noise before the outer square root amplifies it.
        if inner_evals.size and inner_evals[-1] > 0:
            inner_evals[inner_evals < inner_evals[-1] * 1e-14] = 0.0
        f = float(np.sum(np.sqrt(inner_evals)) ** 2)
    if f > 1.0 + 1e-9:
        raise ValueError(f"fidelity {f} exceeds 1 beyond tolerance")
    return max(f, 0.0)


def bell_relabel(rho: DensityMatrix, direction: str = "forward") -> DensityMatrix:
    """Swap the +/- Bell families: Psi+ <-> Psi-, Phi+ <-> Phi-.

    Implemented as a phase flip (sigma_z) on the first qubit, which is
    self-inverse, so ``direction`` only documents intent.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    if len(rho.layout.factors) != 2 or rho.layout.dims != (2, 2):
        raise ValueError("bell_relabel acts on two-qubit states")
    flip = embed_operator(np.diag([1.0, -1.0]).astype(complex), rho.layout,
                          [rho.layout.labels[0]])
    return DensityMatrix(flip @ rho.matrix @ flip, rho.layout, psd_tol=rho.psd_tol)


def sample_measurement(rho: DensityMatrix, shots: int, seed: int,
                       basis: str = "z") -> MeasurementRecord:
    """Simulate projective readout of a single qubit in the energy basis.

    Outcomes are drawn from the diagonal populations with a deterministic
    seeded generator: the same (rho, shots, seed) always reproduces the
    same counts.
    """
    if basis != "z":
        raise ValueError(f"only the computational (z) basis is supported, got {basis!r}")
    if len(rho.layout.factors) != 1 or rho.layout.dims != (2,):
        raise ValueError("sample_measurement expects a single-qubit state")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p_excited = float(np.real(rho.matrix[0, 0]))
    if p_excited < -1e-9 or p_excited > 1.0 + 1e-9:
        raise ValueError(f"excited-state population {p_excited} outside [0, 1]")
    p_excited = min(max(p_excited, 0.0), 1.0)
    rng = np.random.default_rng(seed)
    n_e = int(rng.binomial(shots, p_excited))
    return MeasurementRecord(shots=shots, counts={"e": n_e, "g": shots - n_e}, seed=seed)


def states_close(a: DensityMatrix, b: DensityMatrix, tol: float = 1e-8) -> bool:
    return a.layout == b.layout and frobenius_distance(a.matrix, b.matrix) <= tol
