"""LOCC protocols as measurement trees, and exact simulation of them.

A protocol is a finite tree. Each internal node names the party that acts and a
complete set of measurement operators on that party's qubits, with one child per
operator. Classical communication is implicit: a node is reached only through a
particular outcome history, so its choice of measurement may depend on
everything measured before it. Leaves carry a guess (a ``StateLabel``) or
``None`` for "inconclusive".
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .blocks import Bipartition, substring
from .errors import InvalidArgument
from .ghz_basis import Basis, StateLabel, StateSet, bitstring, state_vector
from .qla import QubitSubset, StateVector, check_complete, measure

# Success/error probabilities closer than this to 0 or 1 count as exact.
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class SpatialConfiguration:
    num_qubits: int
    parties: tuple[QubitSubset, ...]

    def __post_init__(self):
        seen = 0
        for p in self.parties:
            if len(p) == 0:
                raise InvalidArgument("empty party")
            if p.mask & seen:
                raise InvalidArgument("parties overlap")
            seen |= p.mask
        if seen != (1 << self.num_qubits) - 1:
            raise InvalidArgument(f"parties do not cover all {self.num_qubits} qubits")

    @classmethod
    def parse(cls, spec: str, n: int | None = None) -> "SpatialConfiguration":
        """Parse ``"0|12"`` (digit groups) or ``"0,1|2,10"`` (comma-separated groups)."""
        groups = []
        for g in spec.split("|"):
            g = g.strip()
            try:
                qs = [int(x) for x in g.split(",")] if "," in g else [int(c) for c in g]
            except ValueError:
                raise InvalidArgument(f"bad configuration spec {spec!r}") from None
            if not qs or len(set(qs)) != len(qs):
                raise InvalidArgument(f"bad party {g!r} in {spec!r}")
            groups.append(QubitSubset.of(qs))
        total = sum(len(g) for g in groups)
        return cls(total if n is None else n, tuple(groups))

    @classmethod
    def separated(cls, n: int) -> "SpatialConfiguration":
        return cls(n, tuple(QubitSubset.of([q]) for q in range(n)))

    @classmethod
    def from_bipartition(cls, bp: Bipartition) -> "SpatialConfiguration":
        return cls(bp.num_qubits, (bp.side_a, bp.side_b))

    def coarsens_to(self, bp: Bipartition) -> bool:
        """True if every party sits wholly on one side of ``bp``."""
        return all(p.mask & bp.side_a.mask in (0, p.mask) for p in self.parties)

    def spec(self) -> str:
        sep = "," if self.num_qubits > 10 else ""
        return "|".join(sep.join(map(str, p.qubits)) for p in self.parties)


@dataclass(frozen=True)
class Leaf:
    guess: StateLabel | None = None
    name: str | None = None


@dataclass(frozen=True, eq=False)
class Node:
    party: int
    operators: tuple[np.ndarray, ...]
    children: tuple["Tree", ...]
    outcomes: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.operators) != len(self.children):
            raise InvalidArgument("a node needs one child per measurement operator")
        if self.outcomes and len(self.outcomes) != len(self.operators):
            raise InvalidArgument("outcome names do not match operators")


Tree = Union[Node, Leaf]


@dataclass(frozen=True, eq=False)
class ProtocolTree:
    config: SpatialConfiguration
    root: Tree

    def __post_init__(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                continue
            if not 0 <= node.party < len(self.config.parties):
                raise InvalidArgument(f"node acts on unknown party {node.party}")
            d = 1 << len(self.config.parties[node.party])
            for op in node.operators:
                if np.shape(op) != (d, d):
                    raise InvalidArgument(f"operator shape {np.shape(op)} does not fit party {node.party}")
            check_complete(node.operators)
            stack.extend(node.children)

    def leaves(self) -> int:
        count, stack = 0, [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                count += 1
            else:
                stack.extend(node.children)
        return count


@dataclass(frozen=True)
class LeafOutcome:
    name: str
    guess: StateLabel | None
    probability: float


def simulate(protocol: ProtocolTree, state: StateVector) -> list[LeafOutcome]:
    """Exact branch-by-branch collapse; zero-probability branches are pruned."""
    cfg = protocol.config
    if state.num_qubits != cfg.num_qubits:
        raise InvalidArgument(f"{state.num_qubits}-qubit state, {cfg.num_qubits}-qubit protocol")
    out = []
    stack = [(protocol.root, state, 1.0, ())]
    while stack:
        node, psi, prob, path = stack.pop()
        if isinstance(node, Leaf):
            out.append(LeafOutcome(node.name or "/".join(path), node.guess, prob))
            continue
        names = node.outcomes or tuple(str(i) for i in range(len(node.operators)))
        branches = measure(psi, node.operators, cfg.parties[node.party])
        for br, child, name in zip(branches, node.children, names):
            if br.possible:
                stack.append((child, br.state, prob * br.probability, path + (name,)))
    out.sort(key=lambda leaf: leaf.name)
    return out


@dataclass(frozen=True)
class LabelStats:
    success: float
    inconclusive: float
    error: float


@dataclass(frozen=True)
class RunReport:
    """Per-input outcome statistics of one protocol on one state set.

    ``guesses[label]`` maps each guess (``None`` = inconclusive) to the
    probability of ending on a leaf with that guess when ``label`` was sent.
    """

    guesses: dict[StateLabel, dict[StateLabel | None, float]]

    def stats(self, label: StateLabel) -> LabelStats:
        dist = self.guesses[label]
        success = dist.get(label, 0.0)
        inconclusive = dist.get(None, 0.0)
        return LabelStats(success, inconclusive, max(0.0, 1.0 - success - inconclusive))

    def false_alarm(self, label: StateLabel) -> float:
        """Largest probability that some other input ends on a leaf guessing ``label``."""
        return max((d.get(label, 0.0) for lab, d in self.guesses.items() if lab != label), default=0.0)

    def to_dict(self) -> dict:
        rows = {}
        for lab in self.guesses:
            s = self.stats(lab)
            rows[str(lab)] = {"success": s.success, "inconclusive": s.inconclusive, "error": s.error}
        return rows


def run_protocol(protocol: ProtocolTree, states: StateSet) -> RunReport:
    guesses = {}
    for lab in states:
        dist: dict = defaultdict(float)
        for leaf in simulate(protocol, state_vector(states.basis, lab)):
            dist[leaf.guess] += leaf.probability
        guesses[lab] = dict(dist)
    return RunReport(guesses)


def verify_perfect(protocol: ProtocolTree, states: StateSet) -> tuple[bool, RunReport]:
    report = run_protocol(protocol, states)
    ok = all(abs(report.stats(lab).success - 1.0) <= EXACT_TOL for lab in states)
    return ok, report


def verify_conclusive(protocol: ProtocolTree, states: StateSet) -> tuple[bool, list[StateLabel]]:
    """Labels the protocol identifies with nonzero probability and never names wrongly."""
    report = run_protocol(protocol, states)
    found = [
        lab for lab in states
        if report.stats(lab).success > EXACT_TOL and report.false_alarm(lab) <= EXACT_TOL
    ]
    return bool(found), found


def _pair_guess(basis: Basis, states: StateSet, outcome: int) -> StateLabel | None:
    """Guess after learning the full computational string ``outcome``."""
    pair = basis.pair_of_string(outcome)
    members = states.members_of_pair(pair.index)
    if pair.degenerate:
        exact = StateLabel(pair.index, "k" if outcome == pair.k else "kbar")
        if exact in members:
            return exact
    return members[0] if len(members) == 1 else None


def _projector(d: int, vectors: list[np.ndarray]) -> np.ndarray:
    p = np.zeros((d, d), dtype=complex)
    for v in vectors:
        p += np.outer(v, v.conj())
    return p


def _unit(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def _compose(n: int, parts: list[tuple[tuple[int, ...], int]]) -> int:
    """Assemble an n-bit string from substrings placed on the given qubits."""
    value = 0
    for qubits, sub in parts:
        for pos, q in enumerate(qubits):
            if sub >> (len(qubits) - 1 - pos) & 1:
                value |= 1 << (n - 1 - q)
    return value


def build_pair_id_protocol(basis: Basis, config: SpatialConfiguration, states: StateSet) -> ProtocolTree:
    """Every party measures its qubits in the computational basis, one after another.

    The full outcome string lies in the support ``{k_i, kbar_i}`` of exactly one
    pair, which the leaves turn into a guess.
    """
    if config.num_qubits != basis.num_qubits:
        raise InvalidArgument("configuration and basis disagree on the number of qubits")
    n = basis.num_qubits
    parties = [p.qubits for p in config.parties]

    def grow(level: int, parts: list) -> Tree:
        if level == len(parties):
            b = _compose(n, parts)
            return Leaf(_pair_guess(basis, states, b), bitstring(b, n))
        qs = parties[level]
        d = 1 << len(qs)
        ops = tuple(_projector(d, [_unit(d, s)]) for s in range(d))
        kids = tuple(grow(level + 1, parts + [(qs, s)]) for s in range(d))
        return Node(level, ops, kids, tuple(bitstring(s, len(qs)) for s in range(d)))

    return ProtocolTree(config, grow(0, []))


def _classes(width: int) -> list[tuple[int, int]]:
    full = (1 << width) - 1
    return [(s, s ^ full) for s in range(1 << (width - 1))]


def _class_node(party: int, d: int, classes, kids) -> Node:
    ops = tuple(_projector(d, [_unit(d, s), _unit(d, t)]) for s, t in classes)
    return Node(party, ops, tuple(kids), tuple(f"{s}~{t}" for s, t in classes))


def _with_rest(d: int, ops: list[np.ndarray]) -> list[np.ndarray]:
    """Complete a partial projective measurement with the projector onto what's left."""
    return ops + [np.eye(d) - sum(ops)]


def build_block_protocol(basis: Basis, states: StateSet, config: SpatialConfiguration) -> ProtocolTree:
    """Two-party protocol that resolves the block first, then the state inside it.

    Round one: each side projects onto the span of a complementary pair of its
    substrings, which fixes the block without disturbing any member. Round two
    depends on what the set holds in that block: if it holds both members of a
    single entangled pair, side B measures in the ``|b> +- |bbar>`` basis and side
    A finishes in the matching rotated basis; otherwise the members have
    disjoint computational supports and both sides measure computationally.
    Raises ``InvalidArgument`` if some block holds a full entangled pair plus
    anything else, which no LOCC protocol can separate across this cut.
    """
    if len(config.parties) != 2:
        raise InvalidArgument(f"block protocols need exactly two parties, got {len(config.parties)}")
    if config.num_qubits != basis.num_qubits:
        raise InvalidArgument("configuration and basis disagree on the number of qubits")
    n = basis.num_qubits
    bp = Bipartition.of(n, config.parties[0])
    pa = 0 if config.parties[0] == bp.side_a else 1
    pb = 1 - pa
    qa, qb = bp.side_a.qubits, bp.side_b.qubits
    da, db = 1 << len(qa), 1 << len(qb)

    def inner(a: int, b: int) -> Tree:
        abar, bbar = a ^ (da - 1), b ^ (db - 1)
        strings = [(x, y) for x in (a, abar) for y in (b, bbar)]
        pairs = {basis.pair_of_string(_compose(n, [(qa, x), (qb, y)])).index for x, y in strings}
        present = [lab for lab in states if lab.pair_index in pairs]
        full = [i for i in pairs if not basis.pair(i).degenerate and len(states.members_of_pair(i)) == 2]
        if len(present) <= 1:
            return Leaf(present[0] if present else None)
        if full and len(present) > 2:
            raise InvalidArgument(
                f"across {bp} the states {', '.join(map(str, present))} share one block "
                "and are not perfectly distinguishable"
            )
        if full:
            return _sign_round(full[0], abar, bbar)
        return _computational_round(a, abar, b, bbar)

    def _sign_round(index: int, abar: int, bbar: int) -> Tree:
        pair = basis.pair(index)
        ap, bp_ = substring(pair.k, n, qa), substring(pair.k, n, qb)
        apb, bpb = ap ^ (da - 1), bp_ ^ (db - 1)
        plus = (_unit(db, bp_) + _unit(db, bpb)) / np.sqrt(2)
        minus = (_unit(db, bp_) - _unit(db, bpb)) / np.sqrt(2)
        kids = []
        for s in (1.0, -1.0):
            u_plus = pair.alpha * _unit(da, ap) + s * pair.beta * _unit(da, apb)
            u_minus = pair.beta * _unit(da, ap) - s * pair.alpha * _unit(da, apb)
            ops = _with_rest(da, [_projector(da, [u_plus]), _projector(da, [u_minus])])
            kids.append(Node(pa, tuple(ops), (Leaf(StateLabel(index, "+")), Leaf(StateLabel(index, "-")), Leaf())))
        ops = _with_rest(db, [_projector(db, [plus]), _projector(db, [minus])])
        return Node(pb, tuple(ops), (*kids, Leaf()), ("+", "-", "rest"))

    def _computational_round(a: int, abar: int, b: int, bbar: int) -> Tree:
        kids = []
        for y in (b, bbar):
            leaves = []
            for x in (a, abar):
                leaves.append(Leaf(_pair_guess(basis, states, _compose(n, [(qa, x), (qb, y)]))))
            ops = _with_rest(da, [_projector(da, [_unit(da, a)]), _projector(da, [_unit(da, abar)])])
            kids.append(Node(pa, tuple(ops), (*leaves, Leaf())))
        ops = _with_rest(db, [_projector(db, [_unit(db, b)]), _projector(db, [_unit(db, bbar)])])
        return Node(pb, tuple(ops), (*kids, Leaf()))

    b_classes = _classes(len(qb))
    a_classes = _classes(len(qa))
    root = _class_node(
        pb, db, b_classes,
        [_class_node(pa, da, a_classes, [inner(a, b) for a, _ in a_classes]) for b, _ in b_classes],
    )
    return ProtocolTree(config, root)
