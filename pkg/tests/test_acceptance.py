"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import contextlib
import itertools
import math

import numpy as np
from scipy.optimize import brentq

from conftest import ACCEPTANCE_LINES
from ghzlocc.blocks import Bipartition, blocks_for, enumerate_bipartitions, partner_index
from ghzlocc.bounds import (
    NOT_PERFECT,
    analyze_set,
    construct_max_perfect_set,
    find_witnesses,
    hayashi_bound,
)
from ghzlocc.ghz_basis import (
    StateLabel,
    StateSet,
    average_entanglement,
    build_basis,
    computational_basis,
    maximal_basis,
    parse_set_spec,
)
from ghzlocc.locc_sim import (
    SpatialConfiguration,
    build_block_protocol,
    build_pair_id_protocol,
    run_protocol,
    verify_perfect,
)
from ghzlocc.ppt_sdp import DiscriminationInstance, global_success_bound, instance_for, ppt_success_bound
from ghzlocc.qla import DensityOperator, StateVector, binary_entropy, entropy, partial_trace, partial_transpose


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        line = f"criterion {number}: FAIL  {title}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"criterion {number}: PASS  {title}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def alpha_sq_for(e):
    """alpha^2 in [1/2, 1) whose pair carries e ebits."""
    if e >= 1.0:
        return 0.5
    return brentq(lambda x: binary_entropy(x) - e, 0.5, 1 - 1e-16, xtol=1e-15)


def draw_basis(n, draw, rng, draws=200):
    """Draw number ``draw`` targets a mean entanglement rising from 0.02 to 1 ebit."""
    level = 0.02 + 0.98 * draw / (draws - 1)
    npairs = 1 << (n - 1)
    if draw == draws - 1:
        return build_basis(n, alpha_sq=[0.5] * npairs)
    es = np.clip(level * rng.uniform(0.8, 1.2, size=npairs), 1e-3, 1.0)
    return build_basis(n, alpha_sq=[alpha_sq_for(float(e)) for e in es])


def test_criterion_1_max_set_tight():
    with criterion(1, "max perfect set has 2^(N-1) states, pair-id success 1 +- 1e-12, N=2..6"):
        for n in range(2, 7):
            basis = maximal_basis(n)
            states = construct_max_perfect_set(basis)
            assert len(states) == 1 << (n - 1)
            report = run_protocol(build_pair_id_protocol(basis, SpatialConfiguration.separated(n), states), states)
            for lab in states:
                assert abs(report.stats(lab).success - 1.0) <= 1e-12, (n, lab)


def test_criterion_2_oversized_sets_blocked():
    with criterion(2, "every 2^(N-1)+1 set has a witness in every cut, N=2..5, 200 draws, E from <0.1 to 1"):
        draws = 200
        for n in range(2, 6):
            rng = np.random.default_rng(1000 + n)
            bps = enumerate_bipartitions(n)
            size = (1 << (n - 1)) + 1
            ebar = []
            for d in range(draws):
                basis = draw_basis(n, d, rng, draws)
                assert basis.all_entangled
                labels = basis.labels()
                if n <= 3 or (n == 4 and d in (0, draws // 2, draws - 1)):
                    candidates = itertools.combinations(labels, size)
                else:
                    candidates = []
                    base = list(construct_max_perfect_set(basis))
                    for p in rng.choice(len(basis.pairs), size=min(10, len(basis.pairs)), replace=False):
                        candidates.append(base + [StateLabel(int(p) + 1, "-")])
                    for _ in range(30 if n == 4 else 20):
                        idx = rng.choice(len(labels), size=size, replace=False)
                        candidates.append([labels[i] for i in idx])
                for combo in candidates:
                    s = StateSet.of(basis, combo)
                    assert len(s) == size
                    ebar.append(average_entanglement(s))
                    for bp in bps:
                        assert find_witnesses(s, bp), (n, d, s.spec(), bp.spec())
            assert min(ebar) < 0.1 and max(ebar) > 1 - 1e-12, (n, min(ebar), max(ebar))


def test_criterion_3_block_counting():
    with criterion(3, "2^(N-2) blocks per cut partition all pairs; partner map is an involution, N=2..6"):
        for n in range(2, 7):
            basis = maximal_basis(n)
            npairs = 1 << (n - 1)
            for bp in enumerate_bipartitions(n):
                blocks = blocks_for(basis, bp)
                assert len(blocks) == 1 << (n - 2)
                covered = sorted(i for blk in blocks for i in blk.pair_indices)
                assert covered == list(range(1, npairs + 1))
                for i in range(1, npairs + 1):
                    j = partner_index(n, bp, i)
                    assert j != i and partner_index(n, bp, j) == i


def test_criterion_4_hayashi():
    with criterion(4, "Hayashi bound 2^(N-1) for the maximal basis, 2^N for the computational basis"):
        for n in range(2, 7):
            mb = maximal_basis(n)
            cb = computational_basis(n)
            assert hayashi_bound(StateSet.of(mb, mb.labels())) == 1 << (n - 1)
            assert hayashi_bound(StateSet.of(cb, cb.labels())) == 1 << n


def test_criterion_5_hybrid_bases():
    with criterion(5, "hybrid K: 2^N-K set perfect, every +1 superset blocked in every cut, N=3,4"):
        rng = np.random.default_rng(5)
        for n in (3, 4):
            npairs = 1 << (n - 1)
            bps = enumerate_bipartitions(n)
            for k in range(npairs):
                for variant in range(3):
                    if variant == 0:
                        ent = [0.5] * k
                    else:
                        ent = [float(x) for x in rng.uniform(0.5, 0.99, size=k)]
                    basis = build_basis(n, alpha_sq=ent + [1] * (npairs - k))
                    assert basis.num_entangled == k
                    states = construct_max_perfect_set(basis)
                    assert len(states) == (1 << n) - k
                    tree = build_pair_id_protocol(basis, SpatialConfiguration.separated(n), states)
                    ok, report = verify_perfect(tree, states)
                    assert ok
                    for lab in states:
                        assert abs(report.stats(lab).success - 1.0) <= 1e-12
                    missing = [lab for lab in basis.labels() if lab not in states.labels]
                    assert len(missing) == k
                    for extra in missing:
                        sup = StateSet.of(basis, list(states) + [extra])
                        for bp in bps:
                            ws = find_witnesses(sup, bp)
                            assert ws and all(w.lemma in (1, 2) for w in ws), (n, k, extra, bp.spec())


def test_criterion_6_orphan_conclusive():
    with criterion(6, "full N=3 basis minus one state: orphan identified w.p. 1 +- 1e-12, zero error"):
        basis = maximal_basis(3)
        for drop in basis.labels():
            states = StateSet.of(basis, [lab for lab in basis.labels() if lab != drop])
            orphan = StateLabel(drop.pair_index, "+" if drop.tag == "-" else "-")
            report = run_protocol(build_pair_id_protocol(basis, SpatialConfiguration.separated(3), states), states)
            assert abs(report.stats(orphan).success - 1.0) <= 1e-12
            assert report.stats(orphan).error == 0.0
            assert report.false_alarm(orphan) == 0.0
            for lab in states:
                assert report.stats(lab).error <= 1e-12


def test_criterion_7_cut_dependent_set():
    with criterion(7, "GHZ pairs 000 and 011: perfect across 1|02 via block protocol, witness at 0|12"):
        basis = maximal_basis(3)
        states = parse_set_spec(basis, "pair:1,pair:4")
        vecs = {str(lab): v.amplitudes for lab, v in zip(states, states.vectors())}
        s = 1 / math.sqrt(2)
        np.testing.assert_allclose(vecs["pair:1:+"][[0, 7]], [s, s])
        np.testing.assert_allclose(vecs["pair:4:-"][[3, 4]], [s, -s])
        tree = build_block_protocol(basis, states, SpatialConfiguration.parse("1|02"))
        report = run_protocol(tree, states)
        for lab in states:
            assert abs(report.stats(lab).success - 1.0) <= 1e-12
        verdict = analyze_set(states)
        assert verdict.witnesses[Bipartition.of(3, [0])]
        assert not verdict.witnesses[Bipartition.of(3, [1])]
        assert verdict.status == NOT_PERFECT
        assert analyze_set(states, SpatialConfiguration.parse("0|12")).status == NOT_PERFECT


def _orthogonal_ensembles():
    rng = np.random.default_rng(8)
    out = []
    for n, m in ((2, 2), (2, 3), (2, 4), (3, 3), (3, 5)):
        g = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
        q, _ = np.linalg.qr(g)
        rhos = [DensityOperator.from_state(StateVector(n, q[:, i])) for i in range(m)]
        out.append(DiscriminationInstance.uniform(rhos, Bipartition.of(n, [0])))
    b = build_basis(2, alpha_sq=[0.8, 0.7])
    out.append(instance_for(parse_set_spec(b, "all"), Bipartition.of(2, [0])))
    return out


def test_criterion_8_sdp():
    with criterion(8, "PPT 0.5 / 2/3 / 1 for 4 / 3 / 2 Bell states, gap < 1e-6, global = 1 on orthogonal ensembles"):
        bell = maximal_basis(2)
        cut = Bipartition.of(2, [0])
        targets = {"all": 0.5, "pair:1,pair:2:+": 2 / 3}
        for spec, value in targets.items():
            sol = ppt_success_bound(instance_for(parse_set_spec(bell, spec), cut))
            assert abs(sol.dual_value - value) <= 1e-4 and abs(sol.primal_value - value) <= 1e-4
            assert sol.gap < 1e-6
        for a, b in itertools.combinations(bell.labels(), 2):
            sol = ppt_success_bound(instance_for(StateSet.of(bell, [a, b]), cut))
            assert abs(sol.dual_value - 1.0) <= 1e-6 and sol.gap < 1e-6
        rng = np.random.default_rng(88)
        for n in (2, 3):
            for _ in range(3):
                g = rng.normal(size=(1 << n, 2)) + 1j * rng.normal(size=(1 << n, 2))
                q, _ = np.linalg.qr(g)
                rhos = [DensityOperator.from_state(StateVector(n, q[:, i])) for i in range(2)]
                sol = ppt_success_bound(DiscriminationInstance.uniform(rhos, Bipartition.of(n, [0])))
                assert abs(sol.dual_value - 1.0) <= 1e-6 and sol.gap < 1e-6
        for inst in _orthogonal_ensembles():
            sol = global_success_bound(inst)
            assert abs(sol.dual_value - 1.0) <= 1e-6 and sol.gap < 1e-6


def test_criterion_9_numerics():
    with criterion(9, "1000 random states per dimension 2..64: involution exact, Schmidt 1e-8, entropy 1e-9"):
        rng = np.random.default_rng(9)
        for n in range(1, 7):
            d = 1 << n
            for _ in range(1000):
                v = rng.normal(size=d) + 1j * rng.normal(size=d)
                psi = StateVector(n, v / np.linalg.norm(v))
                rho = DensityOperator.from_state(psi)
                if n == 1:
                    assert abs(entropy(rho)) <= 1e-9
                    w = rng.uniform()
                    mixed = DensityOperator(1, w * rho.matrix + (1 - w) * np.eye(2) / 2)
                    lam = np.linalg.eigvalsh(mixed.matrix)
                    assert abs(entropy(mixed) - float(-(lam * np.log2(lam)).sum())) <= 1e-9
                    continue
                m = int(rng.integers(1, n))
                side = sorted(int(q) for q in rng.choice(n, size=m, replace=False))
                rest = [q for q in range(n) if q not in side]
                pt = partial_transpose(rho, side)
                np.testing.assert_array_equal(partial_transpose(pt, side), rho.matrix)
                ra, rb = partial_trace(rho, side), partial_trace(rho, rest)
                la = np.sort(ra.eigenvalues())[::-1]
                lb = np.sort(rb.eigenvalues())[::-1]
                r = min(len(la), len(lb))
                np.testing.assert_allclose(la[:r], lb[:r], atol=1e-8)
                # Schmidt coefficients by SVD of the amplitude matrix, no partial trace involved
                amps = psi.amplitudes.reshape([2] * n).transpose(side + rest).reshape(1 << m, -1)
                sv = np.linalg.svd(amps, compute_uv=False) ** 2
                sv = sv[sv > 1e-300]
                formula = float(-(sv * np.log2(sv)).sum())
                assert abs(entropy(ra) - formula) <= 1e-9
                assert abs(entropy(rb) - formula) <= 1e-9
