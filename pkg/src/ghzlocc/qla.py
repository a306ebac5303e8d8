"""Dense complex linear algebra on multiqubit state space.

Qubit 0 is the most significant bit of an amplitude index, so the amplitude of
``|b_0 b_1 ... b_{N-1}>`` sits at ``int("b_0b_1...", 2)``. Operators acting on a
subset of qubits use the same convention restricted to that subset (lowest
qubit index first).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, NumericalDomainError

NORM_TOL = 1e-9
EIG_FLOOR = -1e-8
# Squared norms below this are treated as exactly-zero branches.
ZERO_PROB = 1e-14


@dataclass(frozen=True)
class QubitSubset:
    """A set of qubit indices stored as a bitmask (bit ``q`` set means qubit ``q`` is in the set)."""

    mask: int

    def __post_init__(self):
        if self.mask < 0:
            raise InvalidArgument("qubit mask must be non-negative")

    @classmethod
    def of(cls, qubits: Iterable[int]) -> "QubitSubset":
        mask = 0
        for q in qubits:
            if q < 0:
                raise InvalidArgument(f"negative qubit index {q}")
            mask |= 1 << q
        return cls(mask)

    @property
    def qubits(self) -> tuple[int, ...]:
        out, m, q = [], self.mask, 0
        while m:
            if m & 1:
                out.append(q)
            m >>= 1
            q += 1
        return tuple(out)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, q: int) -> bool:
        return bool(self.mask >> q & 1)

    def complement(self, n: int) -> "QubitSubset":
        return QubitSubset(((1 << n) - 1) ^ self.mask)

    def fits(self, n: int) -> bool:
        return self.mask >> n == 0

    def index_mask(self, n: int) -> int:
        """Bitmask of this subset in amplitude-index coordinates (qubit 0 = MSB)."""
        return sum(1 << (n - 1 - q) for q in self.qubits)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.qubits)) + "}"


def _subset(x: QubitSubset | Iterable[int]) -> QubitSubset:
    return x if isinstance(x, QubitSubset) else QubitSubset.of(x)


def _num_qubits_for(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise InvalidArgument(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 1:
            raise InvalidArgument("a state needs at least one qubit")
        if amps.shape[0] != 1 << self.num_qubits:
            raise InvalidArgument(
                f"{amps.shape[0]} amplitudes given for {self.num_qubits} qubits"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex] | np.ndarray) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(_num_qubits_for(amps.shape[0]), amps)

    @classmethod
    def basis_state(cls, bits: str) -> "StateVector":
        """Computational basis state from a bitstring such as ``"010"``."""
        if not bits or set(bits) - {"0", "1"}:
            raise InvalidArgument(f"not a bitstring: {bits!r}")
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(len(bits), amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        d = 1 << self.num_qubits
        if mat.shape != (d, d):
            raise InvalidArgument(f"matrix shape {mat.shape} does not match {self.num_qubits} qubits")
        if not np.allclose(mat, mat.conj().T, atol=NORM_TOL, rtol=0):
            raise InvalidArgument("density operator is not Hermitian")
        if abs(np.trace(mat) - 1.0) > NORM_TOL:
            raise InvalidArgument(f"density operator has trace {np.trace(mat).real:.12g}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityOperator":
        a = state.amplitudes
        return cls(state.num_qubits, np.outer(a, a.conj()))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "DensityOperator":
        mat = np.asarray(matrix, dtype=complex)
        return cls(_num_qubits_for(mat.shape[0]), mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __repr__(self) -> str:
        return f"DensityOperator(num_qubits={self.num_qubits})"


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product; ``a``'s qubits come first."""
    return StateVector(a.num_qubits + b.num_qubits, np.kron(a.amplitudes, b.amplitudes))


def partial_trace(rho: DensityOperator, keep: QubitSubset | Iterable[int]) -> DensityOperator:
    n = rho.num_qubits
    keep = _subset(keep)
    if len(keep) == 0 or not keep.fits(n) or len(keep) == n:
        raise InvalidArgument(f"keep={keep} must be a nonempty proper subset of {n} qubits")
    kept = list(keep.qubits)
    traced = [q for q in range(n) if q not in keep]
    t = rho.matrix.reshape([2] * (2 * n))
    t = t.transpose(kept + traced + [n + q for q in kept] + [n + q for q in traced])
    dk, dt = 1 << len(kept), 1 << len(traced)
    reduced = np.einsum("ajbj->ab", t.reshape(dk, dt, dk, dt))
    return DensityOperator(len(kept), reduced)


def partial_transpose(rho: DensityOperator | np.ndarray, side: QubitSubset | Iterable[int]) -> np.ndarray:
    """Transpose the tensor factor belonging to ``side``. Accepts any square operator."""
    mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    n = _num_qubits_for(mat.shape[0])
    side = _subset(side)
    if len(side) == 0 or not side.fits(n) or len(side) == n:
        raise InvalidArgument(f"side={side} must be a nonempty proper subset of {n} qubits")
    axes = list(range(2 * n))
    for q in side.qubits:
        axes[q], axes[n + q] = axes[n + q], axes[q]
    return mat.reshape([2] * (2 * n)).transpose(axes).reshape(mat.shape)


def entropy(rho: DensityOperator) -> float:
    """Von Neumann entropy in bits."""
    lam = rho.eigenvalues()
    if lam.min() < EIG_FLOOR:
        raise NumericalDomainError(f"eigenvalue {lam.min():.3e} below floor {EIG_FLOOR}")
    lam = lam[lam > 0]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def binary_entropy(p: float) -> float:
    """``-p log2 p - (1-p) log2 (1-p)`` with ``0 log 0 = 0``."""
    return -sum(x * np.log2(x) for x in (p, 1.0 - p) if x > 0)


def apply_local(state: StateVector, op: np.ndarray, qubits: QubitSubset | Iterable[int]) -> np.ndarray:
    """Apply ``op`` to the listed qubits; returns raw (unnormalized) amplitudes."""
    qs = _subset(qubits).qubits
    n = state.num_qubits
    k = len(qs)
    op = np.asarray(op, dtype=complex)
    if op.shape != (1 << k, 1 << k):
        raise InvalidArgument(f"operator shape {op.shape} does not act on {k} qubits")
    if k == 0 or qs[-1] >= n:
        raise InvalidArgument(f"qubits {qs} do not fit a {n}-qubit state")
    t = state.amplitudes.reshape([2] * n)
    t = np.tensordot(op.reshape([2] * (2 * k)), t, axes=(list(range(k, 2 * k)), list(qs)))
    # tensordot puts the op's output axes first; move them back into place
    rest = [q for q in range(n) if q not in qs]
    order = [0] * n
    for pos, q in enumerate(list(qs) + rest):
        order[q] = pos
    return t.transpose(order).reshape(-1)


def computational_projectors(num_qubits: int) -> list[np.ndarray]:
    d = 1 << num_qubits
    out = []
    for i in range(d):
        p = np.zeros((d, d), dtype=complex)
        p[i, i] = 1.0
        out.append(p)
    return out


@dataclass(frozen=True)
class Branch:
    """One measurement outcome: its probability and post-measurement state (``None`` if impossible)."""

    probability: float
    state: StateVector | None

    @property
    def possible(self) -> bool:
        return self.state is not None


def check_complete(operators: Sequence[np.ndarray], tol: float = NORM_TOL) -> None:
    """Raise unless ``sum K^dagger K`` is the identity within ``tol``."""
    if not operators:
        raise InvalidArgument("empty measurement")
    d = np.asarray(operators[0]).shape[0]
    total = np.zeros((d, d), dtype=complex)
    for k in operators:
        k = np.asarray(k, dtype=complex)
        if k.shape != (d, d):
            raise InvalidArgument("measurement operators have mismatched shapes")
        total += k.conj().T @ k
    err = np.abs(total - np.eye(d)).max()
    if err > tol:
        raise InvalidArgument(f"measurement is incomplete (deviation {err:.3e} from identity)")


def measure(state: StateVector, operators: Sequence[np.ndarray], qubits: QubitSubset | Iterable[int]) -> list[Branch]:
    """General local measurement with Kraus operators ``operators`` on ``qubits``."""
    check_complete(operators)
    branches = []
    for k in operators:
        raw = apply_local(state, k, qubits)
        p = float(np.vdot(raw, raw).real)
        if p < ZERO_PROB:
            branches.append(Branch(0.0, None))
        else:
            branches.append(Branch(p, StateVector(state.num_qubits, raw / np.sqrt(p))))
    return branches


def measure_projective(state: StateVector, projectors: Sequence[np.ndarray], qubits: QubitSubset | Iterable[int]) -> list[Branch]:
    """Projective measurement on ``qubits``; the projectors must sum to the identity."""
    if not projectors:
        raise InvalidArgument("empty projector set")
    d = np.asarray(projectors[0]).shape[0]
    total = sum(np.asarray(p, dtype=complex) for p in projectors)
    err = np.abs(total - np.eye(d)).max()
    if err > NORM_TOL:
        raise InvalidArgument(f"projectors do not sum to identity (deviation {err:.3e})")
    return measure(state, projectors, qubits)
