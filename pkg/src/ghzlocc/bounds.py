"""Distinguishability bounds and block-pattern verdicts for sets of GHZ basis states.

Two two-qubit facts are taken as given and matched as patterns inside blocks:

* lemma 1: three or more members of the two entangled pairs of a block are not
  perfectly LOCC distinguishable;
* lemma 2: an entangled pair together with a product state of the same block is
  not perfectly LOCC distinguishable.

A witness across a cut rules out perfect discrimination in every spatial
configuration that can be coarsened to that cut. A set is only reported as
``perfect_ok`` when an explicit protocol has been simulated and succeeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .blocks import Bipartition, Block, blocks_for, enumerate_bipartitions
from .errors import InvalidArgument
from .ghz_basis import Basis, StateLabel, StateSet, average_entanglement, pair_entanglement
from .locc_sim import (
    SpatialConfiguration,
    build_block_protocol,
    build_pair_id_protocol,
    verify_perfect,
)

PERFECT_OK = "perfect_ok"
NOT_PERFECT = "not_perfect"
CONCLUSIVE_ONLY = "conclusive_only"
UNKNOWN = "unknown"

# floor() slack so that e.g. 4 / 2.0000000000000004 still counts as 2
_FLOOR_SLACK = 1e-9


def hayashi_bound(states: StateSet) -> int:
    """``floor(D / mean(2^E))`` over the members of ``states``."""
    if len(states) == 0:
        raise InvalidArgument("bound of an empty set")
    weights = [2.0 ** pair_entanglement(states.basis.pair(lab.pair_index)) for lab in states]
    return math.floor(states.basis.dim / float(np.mean(weights)) + _FLOOR_SLACK)


def structural_bound(basis: Basis) -> int:
    """``2^N - K`` for K entangled pairs; equals ``2^(N-1)`` when every pair is entangled."""
    return basis.dim - basis.num_entangled


@dataclass(frozen=True)
class Witness:
    bipartition: Bipartition
    block: Block
    labels: tuple[StateLabel, ...]
    lemma: int

    def to_dict(self) -> dict:
        basis = self.block.basis
        return {
            "bipartition": self.bipartition.spec(),
            "block": [basis.pair(i).k_str for i in self.block.pair_indices],
            "labels": [str(lab) for lab in self.labels],
            "lemma": self.lemma,
        }


def block_witness(states: StateSet, block: Block) -> Witness | None:
    present = [lab for lab in states if lab.pair_index in block.pair_indices]
    entangled = [lab for lab in present if not lab.is_product]
    if len(entangled) >= 3:
        return Witness(block.bipartition, block, tuple(present), 1)
    full = any(len([lab for lab in entangled if lab.pair_index == i]) == 2 for i in block.pair_indices)
    if full and len(present) > len(entangled):
        return Witness(block.bipartition, block, tuple(present), 2)
    return None


def find_witnesses(states: StateSet, bp: Bipartition) -> list[Witness]:
    out = []
    for block in blocks_for(states.basis, bp):
        w = block_witness(states, block)
        if w is not None:
            out.append(w)
    return out


def conclusive_check(states: StateSet) -> tuple[bool, list[StateLabel]]:
    """Members identifiable with certainty by a computational-basis measurement.

    A product member is always identifiable; an entangled member is when its
    conjugate partner is absent from the set.
    """
    found = [
        lab for lab in states
        if lab.is_product or len(states.members_of_pair(lab.pair_index)) == 1
    ]
    return bool(found), found


def construct_max_perfect_set(basis: Basis, sign: str | Mapping[int, str] = "+") -> StateSet:
    """Every product member plus one member (``sign``) of each entangled pair."""
    labels = []
    for p in basis.pairs:
        if p.degenerate:
            labels += [StateLabel(p.index, "k"), StateLabel(p.index, "kbar")]
        else:
            s = sign if isinstance(sign, str) else sign.get(p.index, "+")
            labels.append(StateLabel(p.index, s))
    return StateSet.of(basis, labels)


@dataclass(frozen=True)
class Verdict:
    status: str
    configuration: str
    hayashi: int
    structural: int
    avg_entanglement: float
    witnesses: dict[Bipartition, list[Witness]] = field(default_factory=dict)
    conclusive: tuple[StateLabel, ...] = ()

    def all_witnesses(self) -> list[Witness]:
        return [w for ws in self.witnesses.values() for w in ws]

    def blocked_everywhere(self) -> bool:
        return bool(self.witnesses) and all(self.witnesses.values())

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "configuration": self.configuration,
            "hayashi_bound": self.hayashi,
            "structural_bound": self.structural,
            "avg_entanglement": self.avg_entanglement,
            "witnesses": [w.to_dict() for w in self.all_witnesses()],
            "witness_free_cuts": [bp.spec() for bp, ws in self.witnesses.items() if not ws],
            "conclusive_labels": [str(lab) for lab in self.conclusive],
        }


def analyze_set(states: StateSet, config: SpatialConfiguration | None = None) -> Verdict:
    """Scan every canonical cut for witnesses and classify ``states`` for ``config``.

    ``config`` defaults to every qubit in its own lab. Witnesses are reported for
    all cuts; only cuts that ``config`` coarsens to decide the status.
    """
    basis = states.basis
    n = basis.num_qubits
    config = config or SpatialConfiguration.separated(n)
    if config.num_qubits != n:
        raise InvalidArgument("configuration and basis disagree on the number of qubits")
    witnesses = {bp: find_witnesses(states, bp) for bp in enumerate_bipartitions(n)}
    blocking = any(ws for bp, ws in witnesses.items() if config.coarsens_to(bp))
    _, conclusive = conclusive_check(states)

    if blocking:
        status = CONCLUSIVE_ONLY if conclusive else NOT_PERFECT
    elif len(states) <= 1 or verify_perfect(build_pair_id_protocol(basis, config, states), states)[0]:
        status = PERFECT_OK
    elif len(config.parties) == 2 and verify_perfect(build_block_protocol(basis, states, config), states)[0]:
        status = PERFECT_OK
    else:
        status = UNKNOWN
    return Verdict(
        status=status,
        configuration=config.spec(),
        hayashi=hayashi_bound(states) if len(states) else basis.dim,
        structural=structural_bound(basis),
        avg_entanglement=average_entanglement(states) if len(states) else 0.0,
        witnesses=witnesses,
        conclusive=tuple(conclusive),
    )
