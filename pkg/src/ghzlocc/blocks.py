"""Bipartitions of the qubits and the two-pair blocks they induce on a GHZ basis.

Under a bipartition A|B every canonical string splits as ``k = (a, b)``. The
pair on ``k`` shares its A substrings ``{a, abar}`` with exactly one other pair,
the one on ``(a, bbar)``; together they span ``{a, abar} x {b, bbar}`` and form a
block. Each bipartition therefore groups the ``2^(N-1)`` pairs into ``2^(N-2)``
blocks of two.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InvalidArgument
from .ghz_basis import Basis, StateLabel, state_vector
from .qla import QubitSubset

TWO_ENTANGLED_PAIRS = "two_entangled_pairs"
ONE_PAIR_TWO_PRODUCTS = "one_pair_two_products"
FOUR_PRODUCTS = "four_products"


@dataclass(frozen=True)
class Bipartition:
    num_qubits: int
    side_a: QubitSubset

    def __post_init__(self):
        n, a = self.num_qubits, self.side_a
        if n < 2 or not a.fits(n) or len(a) == 0 or len(a) == n:
            raise InvalidArgument(f"{a} is not a nonempty proper subset of {n} qubits")

    @classmethod
    def of(cls, n: int, side_a) -> "Bipartition":
        """Canonical bipartition with the given side (either side may be passed)."""
        a = side_a if isinstance(side_a, QubitSubset) else QubitSubset.of(side_a)
        return cls(n, a).canonical()

    @property
    def side_b(self) -> QubitSubset:
        return self.side_a.complement(self.num_qubits)

    def complement(self) -> "Bipartition":
        return Bipartition(self.num_qubits, self.side_b)

    def is_canonical(self) -> bool:
        na, nb = len(self.side_a), len(self.side_b)
        return na < nb or (na == nb and 0 in self.side_a)

    def canonical(self) -> "Bipartition":
        return self if self.is_canonical() else self.complement()

    def __str__(self) -> str:
        return f"{self.side_a}|{self.side_b}"

    def spec(self) -> str:
        """``"0|12"``-style configuration string for this cut."""
        return "|".join(
            ",".join(map(str, s.qubits)) if self.num_qubits > 10 else "".join(map(str, s.qubits))
            for s in (self.side_a, self.side_b)
        )


def enumerate_bipartitions(n: int) -> list[Bipartition]:
    """All canonical bipartitions, ordered by size of side A then lexicographically."""
    if n < 2:
        raise InvalidArgument(f"need at least 2 qubits, got {n}")
    out = []
    for m in range(1, n // 2 + 1):
        for qs in combinations(range(n), m):
            if 2 * m == n and qs[0] != 0:
                continue
            out.append(Bipartition(n, QubitSubset.of(qs)))
    return out


def substring(value: int, n: int, qubits: tuple[int, ...]) -> int:
    """Bits of the ``n``-bit string ``value`` at ``qubits``, first qubit as most significant."""
    out = 0
    for q in qubits:
        out = out << 1 | (value >> (n - 1 - q) & 1)
    return out


def partner_index(n: int, bp: Bipartition, pair_index: int) -> int:
    """Index of the pair locked to ``pair_index`` under ``bp``: flip side B, then re-canonicalize."""
    full = (1 << n) - 1
    s = (pair_index - 1) ^ bp.side_b.index_mask(n)
    if s >> (n - 1):
        s ^= full
    return s + 1


@dataclass(frozen=True, eq=False)
class Block:
    basis: Basis
    bipartition: Bipartition
    pair_i: int
    pair_j: int

    def __post_init__(self):
        if self.pair_i == self.pair_j:
            raise InvalidArgument("a block needs two distinct pairs")

    def __eq__(self, other):
        if not isinstance(other, Block):
            return NotImplemented
        return (self.bipartition, self.pair_i, self.pair_j) == (other.bipartition, other.pair_i, other.pair_j)

    def __hash__(self):
        return hash((self.bipartition, self.pair_i, self.pair_j))

    @property
    def kind(self) -> str:
        return classify_hybrid(self)

    @property
    def pair_indices(self) -> tuple[int, int]:
        return self.pair_i, self.pair_j

    def labels(self) -> list[StateLabel]:
        return [StateLabel(i, t) for i in self.pair_indices for t in self.basis.pair(i).tags()]

    def __repr__(self) -> str:
        ki, kj = (self.basis.pair(i).k_str for i in self.pair_indices)
        return f"Block({self.bipartition}, {ki}~{kj})"


def block_of(basis: Basis, bp: Bipartition, pair_index: int) -> Block:
    basis.pair(pair_index)
    if bp.num_qubits != basis.num_qubits:
        raise InvalidArgument("bipartition and basis disagree on the number of qubits")
    j = partner_index(basis.num_qubits, bp, pair_index)
    return Block(basis, bp, min(pair_index, j), max(pair_index, j))


def blocks_for(basis: Basis, bp: Bipartition) -> list[Block]:
    if bp.num_qubits != basis.num_qubits:
        raise InvalidArgument("bipartition and basis disagree on the number of qubits")
    n = basis.num_qubits
    out = []
    for p in basis.pairs:
        j = partner_index(n, bp, p.index)
        if p.index < j:
            out.append(Block(basis, bp, p.index, j))
    return out


def classify_hybrid(block: Block) -> str:
    ndeg = sum(block.basis.pair(i).degenerate for i in block.pair_indices)
    return (TWO_ENTANGLED_PAIRS, ONE_PAIR_TWO_PRODUCTS, FOUR_PRODUCTS)[ndeg]


@dataclass(frozen=True, eq=False)
class CompactForm:
    """A block's four members rewritten as two-qubit states.

    Side A's substrings ``a, abar`` of pair ``i``'s canonical string become
    ``|0>, |1>``; likewise ``b, bbar`` on side B. ``vectors[r]`` is the compact
    form of ``labels[r]``.
    """

    block: Block
    labels: tuple[StateLabel, ...]
    vectors: np.ndarray
    a_strings: tuple[int, int]
    b_strings: tuple[int, int]

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T


def compact_form(block: Block) -> CompactForm:
    basis, bp = block.basis, block.bipartition
    n = basis.num_qubits
    qa, qb = bp.side_a.qubits, bp.side_b.qubits
    ki = basis.pair(block.pair_i).k
    a, b = substring(ki, n, qa), substring(ki, n, qb)
    a_strings = (a, a ^ ((1 << len(qa)) - 1))
    b_strings = (b, b ^ ((1 << len(qb)) - 1))
    labels = tuple(block.labels())
    vecs = np.zeros((4, 4), dtype=complex)
    for r, lab in enumerate(labels):
        amps = state_vector(basis, lab).amplitudes
        for idx in np.flatnonzero(amps):
            ca = a_strings.index(substring(int(idx), n, qa))
            cb = b_strings.index(substring(int(idx), n, qb))
            vecs[r, 2 * ca + cb] = amps[idx]
    return CompactForm(block, labels, vecs, a_strings, b_strings)
