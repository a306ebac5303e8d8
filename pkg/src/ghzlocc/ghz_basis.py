"""Canonical N-qubit GHZ bases, hybrid bases, and their entanglement.

A basis is a list of ``2^(N-1)`` conjugate pairs. Pair ``i`` (1-based) is built
on the bitstring ``k`` with leading bit 0 and its complement ``kbar``::

    |psi_i+> = alpha |k> + beta |kbar>
    |psi_i-> = beta  |k> - alpha |kbar>

Pairs are ordered lexicographically by ``k``, so pair ``i`` has ``k = i - 1``.
A pair with ``beta = 0`` is degenerate: its members are the product states
``|k>`` and ``|kbar>``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument
from .qla import StateVector, binary_entropy

COEFF_TOL = 1e-12

ENTANGLED_TAGS = ("+", "-")
PRODUCT_TAGS = ("k", "kbar")


def bitstring(value: int, n: int) -> str:
    return format(value, f"0{n}b")


@dataclass(frozen=True)
class ConjugatePair:
    index: int
    k: int
    num_qubits: int
    alpha: float
    beta: float
    # alpha^2 exactly as supplied, kept so serialization round-trips bit for bit
    alpha_sq: float | None = None

    def __post_init__(self):
        if self.alpha_sq is None:
            object.__setattr__(self, "alpha_sq", self.alpha**2)
        top = 1 << (self.num_qubits - 1)
        if not 0 <= self.k < top:
            raise InvalidArgument(f"k={self.k} is not a canonical {self.num_qubits}-bit string")
        if self.beta < 0 or self.alpha < self.beta - COEFF_TOL:
            raise InvalidArgument(f"need alpha >= beta >= 0, got ({self.alpha}, {self.beta})")
        if abs(self.alpha**2 + self.beta**2 - 1.0) > COEFF_TOL:
            raise InvalidArgument(f"alpha^2 + beta^2 = {self.alpha**2 + self.beta**2!r}, not 1")

    @property
    def kbar(self) -> int:
        return self.k ^ ((1 << self.num_qubits) - 1)

    @property
    def k_str(self) -> str:
        return bitstring(self.k, self.num_qubits)

    @property
    def kbar_str(self) -> str:
        return bitstring(self.kbar, self.num_qubits)

    @property
    def degenerate(self) -> bool:
        return self.beta == 0.0

    def tags(self) -> tuple[str, str]:
        return PRODUCT_TAGS if self.degenerate else ENTANGLED_TAGS


def pair_entanglement(pair: ConjugatePair) -> float:
    """Entanglement entropy (ebits) shared by both members of ``pair``."""
    return binary_entropy(pair.alpha_sq) if pair.beta > 0 else 0.0


@dataclass(frozen=True, order=True)
class StateLabel:
    """Addresses one basis member: ``tag`` is ``+``/``-`` for entangled pairs, ``k``/``kbar`` for degenerate ones."""

    pair_index: int
    tag: str

    def __post_init__(self):
        if self.tag not in ENTANGLED_TAGS + PRODUCT_TAGS:
            raise InvalidArgument(f"unknown state tag {self.tag!r}")

    @property
    def is_product(self) -> bool:
        return self.tag in PRODUCT_TAGS

    def __str__(self) -> str:
        kind = "prod" if self.is_product else "pair"
        return f"{kind}:{self.pair_index}:{self.tag}"


@dataclass(frozen=True)
class Basis:
    num_qubits: int
    pairs: tuple[ConjugatePair, ...]

    def __post_init__(self):
        if len(self.pairs) != 1 << (self.num_qubits - 1):
            raise InvalidArgument("wrong number of pairs")

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @property
    def num_entangled(self) -> int:
        """Number of pairs with ``beta > 0`` (the hybrid parameter K)."""
        return sum(not p.degenerate for p in self.pairs)

    @property
    def all_entangled(self) -> bool:
        return self.num_entangled == len(self.pairs)

    @property
    def kind(self) -> str:
        return "all_entangled" if self.all_entangled else f"hybrid:{self.num_entangled}"

    def pair(self, index: int) -> ConjugatePair:
        if not 1 <= index <= len(self.pairs):
            raise InvalidArgument(f"pair index {index} out of range 1..{len(self.pairs)}")
        return self.pairs[index - 1]

    def pair_of_string(self, value: int) -> ConjugatePair:
        """The pair whose support contains the computational string ``value``."""
        top = 1 << (self.num_qubits - 1)
        return self.pairs[value ^ ((1 << self.num_qubits) - 1) if value >= top else value]

    def labels(self) -> list[StateLabel]:
        return [StateLabel(p.index, t) for p in self.pairs for t in p.tags()]

    def check_label(self, label: StateLabel) -> ConjugatePair:
        pair = self.pair(label.pair_index)
        if label.tag not in pair.tags():
            what = "degenerate (product)" if pair.degenerate else "entangled"
            raise InvalidArgument(f"{label} does not address pair {pair.index}, which is {what}")
        return pair

    def matrix(self) -> np.ndarray:
        """All ``2^N`` members as columns, in ``labels()`` order."""
        return np.column_stack([state_vector(self, lab).amplitudes for lab in self.labels()])

    def to_json(self) -> str:
        return json.dumps(basis_to_dict(self))

    @classmethod
    def from_json(cls, text: str) -> "Basis":
        return basis_from_dict(json.loads(text))


def _from_alpha_sq(a2) -> tuple[float, float, float]:
    if isinstance(a2, bool) or not isinstance(a2, (int, float, Fraction)):
        raise InvalidArgument(f"alpha^2 entry {a2!r} is not a number")
    if not 0 <= a2 <= 1:
        raise InvalidArgument(f"alpha^2 = {a2} outside [0, 1]")
    return math.sqrt(a2), math.sqrt(1 - a2), float(a2)


def build_basis(n: int, coefficients: Sequence | None = None, *, alpha_sq: Sequence | None = None) -> Basis:
    """Build the GHZ basis on ``n`` qubits.

    Pass either ``coefficients`` as ``(alpha, beta)`` tuples or ``alpha_sq`` as
    squared leading coefficients (floats or ``Fraction``), one per pair in
    lexicographic order of the canonical ``k``.
    """
    if not isinstance(n, int) or n < 2:
        raise InvalidArgument(f"need at least 2 qubits, got {n!r}")
    if (coefficients is None) == (alpha_sq is None):
        raise InvalidArgument("give exactly one of coefficients or alpha_sq")
    entries = list(coefficients if coefficients is not None else alpha_sq)
    npairs = 1 << (n - 1)
    if len(entries) != npairs:
        raise InvalidArgument(f"{n} qubits need {npairs} coefficient pairs, got {len(entries)}")
    if alpha_sq is not None:
        coeffs = [_from_alpha_sq(e) for e in entries]
    else:
        coeffs = []
        for e in entries:
            if not isinstance(e, (tuple, list)) or len(e) != 2:
                raise InvalidArgument(f"coefficient entry {e!r} is not an (alpha, beta) pair")
            coeffs.append((float(e[0]), float(e[1]), None))
    pairs = tuple(ConjugatePair(i + 1, i, n, a, b, a2) for i, (a, b, a2) in enumerate(coeffs))
    for p in pairs:
        # each pair's 2x2 coefficient matrix must be orthogonal; supports are disjoint by construction
        c = np.array([[p.alpha, p.beta], [p.beta, -p.alpha]])
        if np.abs(c @ c.T - np.eye(2)).max() > 1e-9:
            raise InvalidArgument(f"pair {p.index} members are not orthonormal")
    return Basis(n, pairs)


def maximal_basis(n: int) -> Basis:
    return build_basis(n, alpha_sq=[Fraction(1, 2)] * (1 << (n - 1)))


def computational_basis(n: int) -> Basis:
    return build_basis(n, alpha_sq=[1] * (1 << (n - 1)))


def hybrid_basis(n: int, k: int, alpha_sq: float | Fraction = Fraction(1, 2)) -> Basis:
    """First ``k`` pairs entangled with the given ``alpha_sq``; the remaining pairs degenerate."""
    npairs = 1 << (n - 1)
    if not 0 <= k <= npairs:
        raise InvalidArgument(f"K={k} outside 0..{npairs}")
    return build_basis(n, alpha_sq=[alpha_sq] * k + [1] * (npairs - k))


def random_basis(n: int, seed: int) -> Basis:
    """All pairs entangled, ``alpha^2`` drawn uniformly from ``(0.5, 1)``."""
    rng = np.random.default_rng(seed)
    draws = rng.uniform(0.5, 1.0, size=1 << (n - 1))
    return build_basis(n, alpha_sq=[float(x) for x in draws])


def state_vector(basis: Basis, label: StateLabel) -> StateVector:
    pair = basis.check_label(label)
    amps = np.zeros(basis.dim, dtype=complex)
    if label.tag == "+":
        amps[pair.k], amps[pair.kbar] = pair.alpha, pair.beta
    elif label.tag == "-":
        amps[pair.k], amps[pair.kbar] = pair.beta, -pair.alpha
    elif label.tag == "k":
        amps[pair.k] = 1.0
    else:
        amps[pair.kbar] = 1.0
    return StateVector(basis.num_qubits, amps)


@dataclass(frozen=True)
class StateSet:
    basis: Basis
    labels: tuple[StateLabel, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise InvalidArgument("state set has repeated labels")
        for lab in self.labels:
            self.basis.check_label(lab)
        object.__setattr__(self, "labels", tuple(sorted(self.labels)))

    @classmethod
    def of(cls, basis: Basis, labels: Iterable[StateLabel]) -> "StateSet":
        return cls(basis, tuple(labels))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label: StateLabel) -> bool:
        return label in self.labels

    def members_of_pair(self, index: int) -> list[StateLabel]:
        return [lab for lab in self.labels if lab.pair_index == index]

    def vectors(self) -> list[StateVector]:
        return [state_vector(self.basis, lab) for lab in self.labels]

    def spec(self) -> str:
        return ",".join(str(lab) for lab in self.labels)


def average_entanglement(states: StateSet) -> float:
    if len(states) == 0:
        raise InvalidArgument("average entanglement of an empty set")
    return float(np.mean([pair_entanglement(states.basis.pair(lab.pair_index)) for lab in states]))


def basis_to_dict(basis: Basis) -> dict:
    return {
        "n": basis.num_qubits,
        "pairs": [{"k": p.k_str, "alpha_sq": p.alpha_sq} for p in basis.pairs],
        "kind": basis.kind,
    }


def basis_from_dict(doc: dict) -> Basis:
    try:
        n = int(doc["n"])
        entries = doc["pairs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"malformed basis document: {exc}") from None
    if n < 2:
        raise InvalidArgument(f"need at least 2 qubits, got {n}")
    by_k = {}
    for e in entries:
        k = e["k"]
        if len(k) != n or set(k) - {"0", "1"}:
            raise InvalidArgument(f"bad bitstring {k!r} for n={n}")
        if k[0] != "0":
            raise InvalidArgument(f"bitstring {k!r} is not canonical (leading bit must be 0)")
        by_k[int(k, 2)] = e["alpha_sq"]
    if sorted(by_k) != list(range(1 << (n - 1))):
        raise InvalidArgument("basis document does not list every canonical pair exactly once")
    basis = build_basis(n, alpha_sq=[by_k[k] for k in range(1 << (n - 1))])
    if "kind" in doc and doc["kind"] != basis.kind:
        raise InvalidArgument(f"declared kind {doc['kind']!r} does not match coefficients ({basis.kind})")
    return basis


def _index_range(token: str, npairs: int) -> range:
    if token == "*":
        return range(1, npairs + 1)
    try:
        if "-" in token:
            lo, hi = (int(x) for x in token.split("-", 1))
        else:
            lo = hi = int(token)
    except ValueError:
        raise InvalidArgument(f"bad pair index {token!r}") from None
    if not 1 <= lo <= hi <= npairs:
        raise InvalidArgument(f"pair range {token!r} outside 1..{npairs}")
    return range(lo, hi + 1)


def _expand(basis: Basis, item: str) -> list[StateLabel]:
    if item == "all":
        return basis.labels()
    if item == "all-plus":
        return [StateLabel(p.index, "+") for p in basis.pairs if not p.degenerate]
    if item == "products":
        return [lab for lab in basis.labels() if lab.is_product]
    if item == "max":
        # every product member plus the "+" member of each entangled pair
        return [lab for lab in basis.labels() if lab.is_product or lab.tag == "+"]
    parts = item.split(":")
    if parts[0] not in ("pair", "prod") or len(parts) not in (2, 3):
        raise InvalidArgument(f"cannot parse set item {item!r}")
    tags = ENTANGLED_TAGS if parts[0] == "pair" else PRODUCT_TAGS
    if len(parts) == 3:
        if parts[2] not in tags:
            raise InvalidArgument(f"tag {parts[2]!r} is not valid in {item!r}")
        tags = (parts[2],)
    out = []
    for i in _index_range(parts[1], len(basis.pairs)):
        for t in tags:
            lab = StateLabel(i, t)
            basis.check_label(lab)
            out.append(lab)
    return out


def parse_set_spec(basis: Basis, spec: str) -> StateSet:
    """Parse a comma-separated set description.

    Items: ``all``, ``all-plus``, ``products``, ``max``, ``pair:I[:+|-]``,
    ``prod:I[:k|kbar]`` where ``I`` is an index, a range ``a-b`` or ``*``.
    A leading ``~`` removes the item's states instead of adding them; items
    apply left to right, e.g. ``all,~pair:1:-``.
    """
    chosen: dict[StateLabel, None] = {}
    for raw in spec.split(","):
        item = raw.strip()
        if not item:
            continue
        drop = item.startswith("~")
        labels = _expand(basis, item.lstrip("~"))
        for lab in labels:
            if drop:
                chosen.pop(lab, None)
            else:
                chosen[lab] = None
    return StateSet.of(basis, chosen)
