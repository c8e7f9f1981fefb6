import unittest

import numpy as np
import pytest
from pydantic import ValidationError

from gldpc.schemas.code_schema import BaseGraph, CodeSpec, ComponentCode, GeneralizationPlan
from gldpc.services.code_service import (
    builtin_component, code_rate, construct_code, count_four_cycles, dump_alist,
    expand_parity_matrix, generalize, generate_regular_base, hamming_component, load_alist,
    rate_report, select_gcn_set
)
from gldpc.utils.exceptions import (
    AlistFormatError, InfeasibleParametersError, InvalidParameterError, ShapeMismatchError
)
from gldpc.utils.gf2_utils import gf2_span

TOY_ALIST = """6 2
1 3
1 1 1 1 1 1
3 3
1
1
1
2
2
2
1 2 3
4 5 6
"""


class TestAlist(unittest.TestCase):

    def test_load_toy(self):
        base = load_alist(TOY_ALIST)
        self.assertEqual((base.n, base.m, base.gamma, base.p), (6, 2, 1, 3))
        self.assertEqual(base.rows, ((0, 1, 2), (3, 4, 5)))

    def test_trailing_zero_padding_is_ignored(self):
        padded = TOY_ALIST.replace("\n1\n1\n1\n2", "\n1 0\n1\n1\n2")
        self.assertEqual(load_alist(padded).rows, ((0, 1, 2), (3, 4, 5)))

    def test_zero_based_index_is_rejected(self):
        with self.assertRaises(AlistFormatError):
            load_alist(TOY_ALIST.replace("4 5 6", "3 4 5").replace("1 2 3", "0 1 2"))

    def test_disagreeing_adjacency_is_rejected(self):
        with self.assertRaises(AlistFormatError):
            load_alist(TOY_ALIST.replace("1 2 3\n4 5 6", "1 2 4\n3 5 6"))

    def test_irregular_graph_is_rejected(self):
        text = "3 2\n2 2\n2 1 1\n2 2\n1 2\n1\n2\n1 2\n1 3\n"
        with self.assertRaises(AlistFormatError):
            load_alist(text)

    def test_round_trip_of_generated_graph(self):
        base = generate_regular_base(2, 7, 49, seed=5)
        self.assertEqual(load_alist(dump_alist(base)), base)


class TestBaseGraph(unittest.TestCase):

    def test_generated_graph_is_regular_and_four_cycle_free(self):
        base = generate_regular_base(2, 7, 49, seed=1)
        self.assertEqual(base.m, 14)
        degrees = np.bincount(np.array(base.rows).ravel(), minlength=49)
        self.assertTrue((degrees == 2).all())
        self.assertEqual(count_four_cycles(base), 0)

    def test_generation_is_deterministic(self):
        self.assertEqual(generate_regular_base(2, 7, 49, seed=9),
                         generate_regular_base(2, 7, 49, seed=9))

    def test_indivisible_length_is_infeasible(self):
        with self.assertRaises(InfeasibleParametersError):
            generate_regular_base(2, 7, 468, seed=1)

    def test_four_cycle_count(self):
        base = BaseGraph(n=4, m=2, gamma=1, p=2, rows=((0, 1), (2, 3)))
        self.assertEqual(count_four_cycles(base), 0)
        base = BaseGraph(n=3, m=3, gamma=2, p=2, rows=((0, 1), (0, 2), (1, 2)))
        self.assertEqual(count_four_cycles(base), 0)
        base = BaseGraph(n=4, m=4, gamma=2, p=2, rows=((0, 1), (0, 1), (2, 3), (2, 3)))
        self.assertEqual(count_four_cycles(base), 2)

    def test_base_graph_validation(self):
        with self.assertRaises(ValidationError):
            BaseGraph(n=4, m=2, gamma=1, p=2, rows=((0, 1), (1, 2)))


def test_select_gcn_set_counts_and_determinism():
    plan = select_gcn_set(134, mu=0.373, seed=3)
    assert plan.g == 50
    assert plan == select_gcn_set(134, mu=0.373, seed=3)
    assert select_gcn_set(134, mu=0.0, seed=3).zeta == ()
    assert select_gcn_set(134, mu=1.0, seed=3).zeta == tuple(range(134))
    assert set(plan.zeta).isdisjoint(plan.zeta_prime)
    assert sorted(plan.zeta + plan.zeta_prime) == list(range(134))
    assert len(plan.zeta_prime) == 84


def test_select_gcn_set_explicit_and_invalid():
    assert select_gcn_set(5, zeta=[3, 1]).zeta == (1, 3)
    with pytest.raises(InvalidParameterError):
        select_gcn_set(5, zeta=[7])
    with pytest.raises(InvalidParameterError):
        select_gcn_set(5, mu=1.5)


def test_builtin_components(hamming74):
    assert hamming74.row_weights == [4, 4, 4]
    assert builtin_component("spc-5").hc_rows == ((1, 1, 1, 1, 1),)
    assert builtin_component("hamming-3").k == 4
    assert builtin_component("golay") is None
    with pytest.raises(InvalidParameterError):
        hamming_component(1)


def test_hamming74_dual_words_all_have_weight_four(hamming74):
    words = gf2_span(np.array(hamming74.hc_rows))
    assert sorted(words.sum(axis=1).tolist()) == [0] + [4] * 7


def test_component_needs_full_rank():
    with pytest.raises(ValidationError):
        ComponentCode(p=3, k=1, hc_rows=((1, 1, 0), (1, 1, 0)), name="bad")


def test_generalize_maps_columns_to_sorted_neighbors(hamming74):
    base = generate_regular_base(2, 7, 49, seed=1)
    graph = generalize(base, hamming74, GeneralizationPlan(m=14, zeta=(0, 5)))
    gcn = graph.cns[0]
    assert gcn.kind == "GCN" and gcn.z == 3
    for j, row in enumerate(hamming74.hc_rows):
        assert gcn.row_support(j) == [v for t, v in enumerate(base.rows[0]) if row[t]]
    assert graph.cns[1].kind == "SPCN" and graph.cns[1].row_support(0) == list(base.rows[1])


def test_generalize_rejects_mismatched_component():
    base = generate_regular_base(2, 7, 49, seed=1)
    with pytest.raises(ShapeMismatchError):
        generalize(base, builtin_component("spc-5"), GeneralizationPlan(m=14))
    with pytest.raises(ShapeMismatchError):
        generalize(base, builtin_component("spc-7"), GeneralizationPlan(m=13))


def test_expanded_row_count(desk_code, half_code):
    assert desk_code.h.row_count == 14 + 14 * 2
    assert half_code.h.row_count == 14 + half_code.graph.g * 2
    assert half_code.graph.g == 7


def test_code_rate_is_exact(desk_code):
    rate = code_rate(desk_code.h, 49)
    assert rate.denominator * (49 - desk_code.h.rank) == rate.numerator * 49
    with pytest.raises(ShapeMismatchError):
        code_rate(desk_code.h, 48)


def test_design_rates_of_the_n469_family(hamming74):
    base = generate_regular_base(2, 7, 469, seed=1)
    expected = {0.0: 0.714, 0.373: 0.501, 0.746: 0.288, 0.970: 0.160, 1.0: 0.143}
    for mu, rate in expected.items():
        spec = CodeSpec(gamma=2, p=7, n=469, mu=mu)
        _, h, report = construct_code(spec, hamming74, base=base)
        assert report.rows == 134 + 2 * report.g
        assert report.design_rate == rate
        assert report.rank <= report.rows
        assert report.rank_deficiency == report.rows - report.rank


def test_even_degree_ldpc_base_is_structurally_deficient(hamming74):
    spec = CodeSpec(gamma=2, p=7, n=49, mu=0.0)
    graph, h, report = construct_code(spec, hamming74)
    assert report.structural
    assert report.rank <= 13
    assert report.rank_deficiency >= 1
    assert report.base_seed is not None


def test_rate_report_fields(desk_code):
    report = rate_report(desk_code.graph, desk_code.h, base_seed=1)
    assert (report.n, report.m, report.g, report.mu) == (49, 14, 14, 1.0)
    assert report.rows == 42
    assert not report.structural
    assert report.design_rate == round(7 / 49, 3)


def test_loaded_base_is_never_reseeded(hamming74):
    base = load_alist(TOY_ALIST)
    graph, _, report = construct_code(CodeSpec(gamma=1, p=3, n=6, mu=0.0),
                                      builtin_component("spc-3"), base=base)
    assert report.base_seed is None
    assert report.rank == 2


def test_expand_parity_matrix_rows_follow_cn_order(desk_code):
    rows = expand_parity_matrix(desk_code.graph).rows
    first = desk_code.graph.cns[0]
    for j in range(first.z):
        assert np.flatnonzero(rows[j]).tolist() == first.row_support(j)


def test_vn_adjacency_matches_expanded_columns(half_code):
    graph = half_code.graph
    rows = expand_parity_matrix(graph).rows
    row_keys = [(cn.index, j) for cn in graph.cns for j in range(cn.z)]
    for vn in range(graph.n):
        expected = {row_keys[r] for r in np.flatnonzero(rows[:, vn])}
        assert set(graph.vn_adjacency[vn]) == expected
        assert len(graph.vn_adjacency[vn]) == int(rows[:, vn].sum())
        assert {cn for cn, _ in graph.vn_adjacency[vn]} <= set(
            np.flatnonzero((graph.neighbors == vn).any(axis=1)).tolist())
