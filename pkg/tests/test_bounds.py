import math

import pytest
from scipy.optimize import brentq

from ghzlocc.blocks import Bipartition, enumerate_bipartitions
from ghzlocc.bounds import (
    CONCLUSIVE_ONLY,
    NOT_PERFECT,
    PERFECT_OK,
    analyze_set,
    conclusive_check,
    construct_max_perfect_set,
    find_witnesses,
    hayashi_bound,
    structural_bound,
)
from ghzlocc.ghz_basis import (
    StateLabel,
    StateSet,
    build_basis,
    computational_basis,
    hybrid_basis,
    maximal_basis,
    parse_set_spec,
    random_basis,
)
from ghzlocc.locc_sim import SpatialConfiguration
from ghzlocc.qla import binary_entropy


class TestHayashi:
    def test_bell(self):
        b = maximal_basis(2)
        assert hayashi_bound(parse_set_spec(b, "all")) == 2

    def test_computational(self):
        b = computational_basis(3)
        assert hayashi_bound(StateSet.of(b, b.labels())) == 8

    def test_half_ebit(self):
        a2 = brentq(lambda x: binary_entropy(x) - 0.5, 0.5, 1 - 1e-15, xtol=1e-15)
        b = build_basis(3, alpha_sq=[a2] * 4)
        s = parse_set_spec(b, "all-plus")
        # 8 / 2^0.5 = 5.656...
        assert hayashi_bound(s) == math.floor(8 / math.sqrt(2)) == 5


class TestStructural:
    def test_values(self):
        assert structural_bound(maximal_basis(4)) == 8
        assert structural_bound(hybrid_basis(3, 2)) == 6
        assert structural_bound(computational_basis(3)) == 8


class TestAnalyze:
    def test_bell(self):
        v = analyze_set(parse_set_spec(maximal_basis(2), "all"))
        assert v.status == NOT_PERFECT
        (w,) = v.all_witnesses()
        assert w.lemma == 1 and len(w.labels) == 4

    def test_three_qubit_cut_dependence(self):
        b = maximal_basis(3)
        s = parse_set_spec(b, "pair:1,pair:4")
        assert find_witnesses(s, Bipartition.of(3, [1])) == []
        assert len(find_witnesses(s, Bipartition.of(3, [0]))) == 1
        assert analyze_set(s).status == NOT_PERFECT
        assert analyze_set(s, SpatialConfiguration.parse("0|12")).status == NOT_PERFECT
        assert analyze_set(s, SpatialConfiguration.parse("1|02")).status == PERFECT_OK

    def test_max_set(self):
        v = analyze_set(construct_max_perfect_set(maximal_basis(3)))
        assert v.status == PERFECT_OK and v.all_witnesses() == []
        assert v.hayashi == v.structural == 4

    def test_hybrid_lemma2(self):
        b = hybrid_basis(3, 2)
        s = parse_set_spec(b, "max,pair:1:-")
        assert len(s) == 7
        v = analyze_set(s)
        assert v.status == CONCLUSIVE_ONLY
        assert v.blocked_everywhere()
        assert any(w.lemma == 2 for w in v.all_witnesses())

    def test_to_dict(self):
        d = analyze_set(parse_set_spec(maximal_basis(3), "pair:1,pair:4")).to_dict()
        assert d["witness_free_cuts"] == ["1|02", "2|01"]
        assert d["witnesses"][0]["bipartition"] == "0|12"


class TestConclusive:
    def test_full_basis(self):
        assert conclusive_check(parse_set_spec(maximal_basis(3), "all")) == (False, [])

    def test_orphan(self):
        ok, labs = conclusive_check(parse_set_spec(maximal_basis(3), "all,~pair:2:+"))
        assert ok and labs == [StateLabel(2, "-")]

    def test_hybrid_product(self):
        ok, labs = conclusive_check(parse_set_spec(hybrid_basis(3, 1), "all"))
        assert ok and all(lab.is_product for lab in labs)


class TestConstruct:
    @pytest.mark.parametrize("n,expected", [(2, 2), (3, 4), (4, 8)])
    def test_max_sizes(self, n, expected):
        assert len(construct_max_perfect_set(maximal_basis(n))) == expected

    def test_hybrid_size(self):
        assert len(construct_max_perfect_set(hybrid_basis(3, 2))) == 6

    def test_sign_choice(self):
        s = construct_max_perfect_set(maximal_basis(3), {2: "-"})
        assert StateLabel(2, "-") in s.labels and StateLabel(1, "+") in s.labels


@pytest.mark.parametrize("n", [2, 3, 4])
def test_lemma1_everywhere_for_every_extension(n):
    b = random_basis(n, 100 + n)
    base = construct_max_perfect_set(b)
    for p in b.pairs:
        s = StateSet.of(b, list(base) + [StateLabel(p.index, "-")])
        for bp in enumerate_bipartitions(n):
            assert find_witnesses(s, bp), (p.index, bp.spec())
