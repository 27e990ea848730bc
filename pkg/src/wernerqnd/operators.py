"""Generators and gates of the measurement model.

Everything is expressed in natural units g = 1, hbar = 1: couplings and
decay rates are in units of g, times in units of 1/g.  The three-qubit
space is (q1, q2, q3) with q3 the probe; the full driven-cavity model
adds two truncated boson modes (cavA, cavB).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .states import PureState, BellKind, bell_state, excited_state, ground_state
from .tensor import SubsystemLayout, THREE_QUBITS, embed_operator, kron

# Local 2x2 blocks in the (|e>, |g>) basis.
_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),   # |e><g|
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),  # |g><e|
}


def pauli(axis: str, qubit: str | None = None,
          layout: SubsystemLayout | None = None) -> np.ndarray:
    """Pauli (or raising/lowering) operator, local or embedded on a layout."""
    try:
        block = _PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown axis {axis!r}; expected one of {sorted(_PAULI)}") from None
    if qubit is None and layout is None:
        return block.copy()
    if qubit is None or layout is None:
        raise ValueError("qubit and layout must be given together")
    return embed_operator(block, layout, [qubit])


def qnd_unitary() -> np.ndarray:
    """The joint three-qubit gate that writes the mixing parameter onto the probe.

    Equal to (1/2) * (I - i X1 X3 - i X2 X3 - X1 X2), the product of the
    two commuting pair gates at their quarter-period.
    """
    eye = np.eye(8, dtype=complex)
    x1x3 = embed_operator(kron(_PAULI["x"], _PAULI["x"]), THREE_QUBITS, ["q1", "q3"])
    x2x3 = embed_operator(kron(_PAULI["x"], _PAULI["x"]), THREE_QUBITS, ["q2", "q3"])
    x1x2 = embed_operator(kron(_PAULI["x"], _PAULI["x"]), THREE_QUBITS, ["q1", "q2"])
    return 0.5 * (eye - 1j * x1x3 - 1j * x2x3 - x1x2)


def pair_unitary() -> np.ndarray:
    """Two-qubit gate (I - i X (x) X) / sqrt(2), the pairwise factor of the joint gate."""
    return (np.eye(4, dtype=complex) - 1j * kron(_PAULI["x"], _PAULI["x"])) / np.sqrt(2)


def effective_hamiltonian(lam: float = 1.0,
                          layout: SubsystemLayout = THREE_QUBITS) -> np.ndarray:
    """(lam/2) * (X1 + X2) X3: both system qubits coupled to the probe at once."""
    if lam <= 0:
        raise ValueError(f"coupling must be strictly positive, got {lam}")
    x3 = pauli("x", "q3", layout)
    return 0.5 * lam * (pauli("x", "q1", layout) + pauli("x", "q2", layout)) @ x3


def pair_hamiltonian(which: int, lam: float = 1.0,
                     layout: SubsystemLayout = THREE_QUBITS) -> np.ndarray:
    """(lam/2) * Xi X3 for i = 1 or 2: one cavity stage of the sequential scheme."""
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which}")
    if lam <= 0:
        raise ValueError(f"coupling must be strictly positive, got {lam}")
    return 0.5 * lam * pauli("x", f"q{which}", layout) @ pauli("x", "q3", layout)


def effective_coupling(g: float, delta: float) -> float:
    """Dispersive atom-atom coupling g^2/delta from eliminating a far-detuned mode.

    Warns when the detuning is not comfortably large compared to g, where
    the elimination stops being quantitatively reliable.
    """
    if delta == 0:
        raise ValueError("detuning must be nonzero")
    if abs(delta) < 10.0 * abs(g):
        warnings.warn(
            f"detuning {delta} is below 10*g = {10 * abs(g)}; "
            "the dispersive approximation degrades here",
            stacklevel=2,
        )
    return g * g / delta


@dataclass(frozen=True)
class LindbladChannel:
    """Collapse operator with its rate, contributing
    rate * (2 L rho L^dag - L^dag L rho - rho L^dag L) to the master equation."""

    collapse: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")
        object.__setattr__(self, "collapse", np.asarray(self.collapse, dtype=complex))


def probe_decay_channel(gamma: float,
                        layout: SubsystemLayout = THREE_QUBITS) -> LindbladChannel:
    """Spontaneous emission of the probe qubit at rate gamma."""
    return LindbladChannel(pauli("minus", "q3", layout), gamma)


@dataclass(frozen=True)
class FullModelParams:
    """Parameters of the driven two-cavity model (all frequencies in units of g).

    ``omega_l`` is the drive frequency; the Hamiltonian is built in the
    frame rotating at omega_l so the drive term is static.  ``n_max`` is
    the highest retained Fock state per cavity mode.
    """

    g: float
    delta: float
    omega_drive_amp: float
    nu: float
    omega1: float
    omega2: float
    omega3: float
    omega_l: float
    n_max: int

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"detuning must be > 0, got {self.delta}")
        if self.n_max < 1:
            raise ValueError(f"Fock cutoff must be >= 1, got {self.n_max}")
        if abs((self.omega3 - self.nu) - self.delta) > 1e-9:
            raise ValueError("delta must equal omega3 - nu")

    @classmethod
    def resonant(cls, g: float, delta: float, omega_drive_amp: float,
                 nu: float = 50.0, n_max: int = 2) -> "FullModelParams":
        """Parameters satisfying the dispersive resonance omega3 - omega1 = g^2/delta,
        with the drive tuned to the probe transition."""
        lam = effective_coupling(g, delta) if g != 0 else 0.0
        omega3 = nu + delta
        return cls(
            g=g,
            delta=delta,
            omega_drive_amp=omega_drive_amp,
            nu=nu,
            omega1=omega3 - lam,
            omega2=omega3 - lam,
            omega3=omega3,
            omega_l=omega3,
            n_max=n_max,
        )

    @property
    def effective_coupling(self) -> float:
        return self.g * self.g / self.delta


def _annihilation(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = np.sqrt(n)
    return a


def full_hamiltonian(p: FullModelParams) -> tuple[np.ndarray, SubsystemLayout]:
    """Static Hamiltonian of the driven two-cavity model in the drive frame.

    Layout is (q1, q2, q3, cavA, cavB) with each cavity truncated to
    n_max + 1 Fock states.  Atoms 1 and 3 exchange photons with cavity A,
    atoms 2 and 3 with cavity B, and the classical drive acts on the
    probe as omega_drive_amp * X3.
    """
    fock_dim = p.n_max + 1
    layout = SubsystemLayout(
        (("q1", 2), ("q2", 2), ("q3", 2), ("cavA", fock_dim), ("cavB", fock_dim))
    )
    a = _annihilation(fock_dim)
    number = a.conj().T @ a

    def up(label: str) -> np.ndarray:
        return embed_operator(_PAULI["plus"], layout, [label])

    def pop(label: str) -> np.ndarray:
        return embed_operator(_PAULI["plus"] @ _PAULI["minus"], layout, [label])

    h = (
        (p.omega1 - p.omega_l) * pop("q1")
        + (p.omega2 - p.omega_l) * pop("q2")
        + (p.omega3 - p.omega_l) * pop("q3")
        + (p.nu - p.omega_l) * (
            embed_operator(number, layout, ["cavA"])
            + embed_operator(number, layout, ["cavB"])
        )
    )
    for atom, cavity in (("q1", "cavA"), ("q2", "cavB"), ("q3", "cavA"), ("q3", "cavB")):
        exchange = up(atom) @ embed_operator(a, layout, [cavity])
        h = h + p.g * (exchange + exchange.conj().T)
    h = h + p.omega_drive_amp * embed_operator(_PAULI["x"], layout, ["q3"])
    return h, layout


def dark_states(layout: SubsystemLayout = THREE_QUBITS) -> list[PureState]:
    """The four product states annihilated by the joint effective Hamiltonian:
    each minus-family Bell pair combined with the probe ground or excited state."""
    states = []
    for probe in (ground_state("q3"), excited_state("q3")):
        for kind in (BellKind.PSI_MINUS, BellKind.PHI_MINUS):
            pair = bell_state(kind, SubsystemLayout.qubits("q1", "q2"))
            amps = np.kron(pair.amplitudes, probe.amplitudes)
            states.append(PureState(amps, layout))
    return states
