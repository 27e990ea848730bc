"""Dense complex linear algebra over tensor-product Hilbert spaces.

Matrices are plain ``numpy`` arrays of dtype complex128.  A
:class:`SubsystemLayout` records the ordered tensor factors a matrix acts
on, so operators can be embedded on arbitrary (possibly non-adjacent)
factors and subsystems can be traced out by label.

Basis convention, fixed package-wide: for every qubit factor, local index
0 is the excited state |e> = |1> = (1, 0)^T and local index 1 is the
ground state |g> = |0> = (0, 1)^T.  Composite indices are big-endian in
factor order, so for three qubits the global index is 4*b1 + 2*b2 + b3
with b_i = 0 when qubit i is excited.  This is exactly what ``np.kron``
produces, but every matrix in the package must be read with that
ordering in mind.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Structural checks (unitarity, hermiticity) use this tolerance.
STRUCTURE_TOL = 1e-10
# Identities that hold exactly in exact arithmetic are asserted at this one.
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered list of labeled tensor factors, e.g. (("q1", 2), ("q2", 2))."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels in layout: {labels}")
        for lab, d in self.factors:
            if d < 1:
                raise ValueError(f"factor {lab!r} has dimension {d} < 1")

    @classmethod
    def qubits(cls, *labels: str) -> "SubsystemLayout":
        return cls(tuple((lab, 2) for lab in labels))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims)) if self.factors else 1

    def index(self, label: str) -> int:
        for i, (lab, _) in enumerate(self.factors):
            if lab == label:
                return i
        raise KeyError(f"unknown factor label {label!r}; layout has {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.factors[self.index(label)][1]

    def subset(self, labels: Iterable[str]) -> "SubsystemLayout":
        """Layout restricted to the given labels, kept in original order."""
        wanted = set(labels)
        unknown = wanted - set(self.labels)
        if unknown:
            raise KeyError(f"unknown factor labels {sorted(unknown)}; layout has {self.labels}")
        return SubsystemLayout(tuple(f for f in self.factors if f[0] in wanted))

    def join(self, other: "SubsystemLayout") -> "SubsystemLayout":
        return SubsystemLayout(self.factors + other.factors)


TWO_QUBITS = SubsystemLayout.qubits("q1", "q2")
THREE_QUBITS = SubsystemLayout.qubits("q1", "q2", "q3")


def _as_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def kron(a: np.ndarray, b: np.ndarray, *rest: np.ndarray) -> np.ndarray:
    """Kronecker product of two or more matrices, big-endian factor order."""
    out = np.kron(_as_square(a, "a"), _as_square(b, "b"))
    for m in rest:
        out = np.kron(out, _as_square(m))
    return out


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a, dtype=complex).conj().T


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def check_hermitian(a: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    a = _as_square(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def check_unitary(a: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    a = _as_square(a)
    eye = np.eye(a.shape[0])
    return bool(np.max(np.abs(a.conj().T @ a - eye)) <= tol)


def embed_operator(
    op: np.ndarray, layout: SubsystemLayout, targets: Sequence[str]
) -> np.ndarray:
    """Lift ``op`` acting on ``targets`` (in the given order) to the full space.

    The returned matrix acts as ``op`` on the target factors and as the
    identity on every other factor, with the index permutation handled so
    that targets need not be adjacent or in layout order.
    """
    op = _as_square(op, "op")
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target labels: {targets}")
    positions = [layout.index(lab) for lab in targets]
    target_dims = [layout.dims[p] for p in positions]
    if op.shape[0] != int(np.prod(target_dims)):
        raise ValueError(
            f"operator dim {op.shape[0]} does not match target dims {target_dims}"
        )

    n = len(layout.factors)
    rest = [p for p in range(n) if p not in positions]
    rest_dim = int(np.prod([layout.dims[p] for p in rest])) if rest else 1

    big = np.kron(op, np.eye(rest_dim, dtype=complex))
    # big lives on factor order (targets..., rest...); permute back to layout order.
    src_order = positions + rest
    perm = [src_order.index(p) for p in range(n)]
    dims_src = [layout.dims[p] for p in src_order]
    tensor = big.reshape(dims_src + dims_src)
    tensor = tensor.transpose(perm + [n + p for p in perm])
    return np.ascontiguousarray(tensor.reshape(layout.dim, layout.dim))


def partial_trace(
    m: np.ndarray, layout: SubsystemLayout, keep: Iterable[str]
) -> tuple[np.ndarray, SubsystemLayout]:
    """Trace out every factor not in ``keep``.

    Returns the reduced matrix together with the layout of the kept
    factors (in original order).  Raises on an empty keep set.
    """
    m = _as_square(m, "m")
    if m.shape[0] != layout.dim:
        raise ValueError(f"matrix dim {m.shape[0]} does not match layout dim {layout.dim}")
    kept = layout.subset(keep)
    if not kept.factors:
        raise ValueError("keep set must be non-empty; use np.trace for the full trace")

    n = len(layout.factors)
    keep_pos = [layout.index(lab) for lab in kept.labels]
    dims = list(layout.dims)
    tensor = m.reshape(dims + dims)
    # Contract bra/ket indices of every traced factor pairwise.
    traced = [p for p in range(n) if p not in keep_pos]
    for offset, p in enumerate(sorted(traced)):
        axis = p - offset  # earlier contractions shrink the index list
        tensor = np.trace(tensor, axis1=axis, axis2=axis + (n - offset))
    d = kept.dim
    return np.ascontiguousarray(tensor.reshape(d, d)), kept


def hermitian_expm(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary exp(-i*h*t) of a Hermitian generator via eigendecomposition.

    Eigendecomposition keeps the result unitary to rounding, which matters
    for long propagations; it also rejects non-Hermitian input outright.
    """
    h = _as_square(h, "h")
    if not check_hermitian(h):
        raise ValueError("generator is not Hermitian within 1e-10")
    evals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * evals * float(t))
    return (vecs * phases) @ vecs.conj().T
