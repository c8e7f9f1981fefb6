import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gldpc.models.message_state import MessageState
from gldpc.services.channel_service import L_MAX, channel_llr, snr_point, transmit
from gldpc.services.decoder_service import (
    FixedOrderSchedule, FloodingSchedule, PolicySchedule, RandomSequentialSchedule,
    check_to_var, cn_states, cn_update, decode, hard_decision, posterior, syndrome_ok,
    var_to_check
)
from gldpc.services.code_service import (
    expand_parity_matrix, generalize, generate_regular_base, select_gcn_set
)
from gldpc.utils.exceptions import InvalidParameterError, ShapeMismatchError
from gldpc.utils.gf2_utils import gf2_nullspace, gf2_span


def exact_extrinsic(llrs):
    """log P(parity of the bits is even) / P(odd), by enumerating every bit pattern."""
    p0 = [1.0 / (1.0 + math.exp(-l)) for l in llrs]
    even = odd = 0.0
    for bits in itertools.product((0, 1), repeat=len(llrs)):
        prob = 1.0
        for bit, p in zip(bits, p0):
            prob *= p if bit == 0 else 1.0 - p
        if sum(bits) % 2:
            odd += prob
        else:
            even += prob
    return math.log(even / odd)


def test_check_to_var_known_value():
    assert check_to_var([1.0, 2.0]) == pytest.approx(0.73533, abs=1e-5)
    assert check_to_var([1.0, 2.0]) == pytest.approx(
        2 * math.atanh(math.tanh(0.5) * math.tanh(1.0)), abs=1e-12)


def test_check_to_var_matches_enumeration(rng):
    for _ in range(10_000):
        degree = int(rng.integers(1, 6))
        llrs = rng.uniform(-5.0, 5.0, size=degree)
        assert check_to_var(llrs) == pytest.approx(exact_extrinsic(llrs), abs=1e-9)


def test_check_to_var_saturates():
    assert check_to_var([np.inf, np.inf]) == L_MAX
    assert check_to_var([np.inf, -np.inf]) == -L_MAX
    assert check_to_var([L_MAX, L_MAX]) == pytest.approx(L_MAX, abs=1.0)
    with pytest.raises(InvalidParameterError):
        check_to_var([])


def test_variable_side_sums():
    assert var_to_check(1.0, [0.5, -0.25]) == 1.25
    assert var_to_check(29.0, [5.0]) == L_MAX
    assert posterior(-1.0, [0.5, -2.0, 0.25]) == -2.25


def test_hard_decision_tie_goes_to_zero():
    assert hard_decision(0.0) == 0
    assert hard_decision(-1e-12) == 1
    assert hard_decision(np.array([0.0, -0.5, 2.0])).tolist() == [0, 1, 0]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=2, max_size=7))
def test_check_to_var_is_odd(llrs):
    flipped = [-llrs[0]] + llrs[1:]
    assert check_to_var(flipped) == pytest.approx(-check_to_var(llrs), abs=1e-12)


def test_syndrome_matches_nullspace_membership(hamming74):
    rng = np.random.default_rng(5)
    for i in range(20):
        n = 14 if i % 2 else 21
        base = generate_regular_base(2, 7, n, seed=i, max_attempts=2)
        plan = select_gcn_set(base.m, mu=1.0 if i % 4 < 2 else 0.5, seed=i)
        graph = generalize(base, hamming74, plan)
        h = expand_parity_matrix(graph).rows.astype(np.int64)
        codewords = gf2_span(gf2_nullspace(h))
        assert codewords.shape[0] == 2 ** (n - expand_parity_matrix(graph).rank)
        for word in codewords:
            assert syndrome_ok(word, graph)
        for word in rng.integers(0, 2, size=(200, n)):
            assert syndrome_ok(word, graph) == (not (h @ word % 2).any())


def test_cn_states_big_endian(hamming_graph):
    llr = np.array([-1.0, 2.0, 2.0, 2.0, 2.0, 2.0, -3.0])
    assert cn_states(hamming_graph, llr).tolist() == [65]


def test_cn_update_counts_messages(hamming_graph, toy_graph):
    state = MessageState(hamming_graph, np.full(7, 2.0))
    cn_update(state, hamming_graph, 0)
    assert state.spcn_to_vn_messages == 12
    state = MessageState(toy_graph, np.full(6, 2.0))
    cn_update(state, toy_graph, 1)
    assert state.spcn_to_vn_messages == 3
    assert state.vn_update_counts.tolist() == [0, 0, 0, 1, 1, 1]
    with pytest.raises(InvalidParameterError):
        cn_update(state, toy_graph, 2)


def test_repeated_update_of_an_isolated_parity_check_is_stable(toy_graph):
    state = MessageState(toy_graph, np.array([1.0, -0.5, 2.0, 0.3, 0.7, -1.1]))
    out = cn_update(state, toy_graph, 0)
    first = state.m_cv.copy()
    assert np.array_equal(cn_update(state, toy_graph, 0), out)
    np.testing.assert_allclose(state.m_cv, first, rtol=1e-12, atol=1e-15)
    assert state.m_cv[:3] == pytest.approx([check_to_var([-0.5, 2.0]),
                                            check_to_var([1.0, 2.0]),
                                            check_to_var([1.0, -0.5])])


def test_cn_update_output_is_hard_decision_of_neighbors(desk_code, rng):
    llr = rng.normal(2.0, 2.0, size=49)
    state = MessageState(desk_code.graph, llr)
    out = cn_update(state, desk_code.graph, 3)
    vns = desk_code.graph.neighbors[3]
    assert out.tolist() == hard_decision(state.posterior[vns]).tolist()


def test_noiseless_frame_converges_in_one_iteration(desk_code):
    llr = np.full(49, L_MAX)
    schedules = [
        FloodingSchedule(),
        FixedOrderSchedule(range(14)),
        RandomSequentialSchedule(3),
        PolicySchedule(lambda states, done: int(np.argmin(done))),
    ]
    for schedule in schedules:
        result = decode(llr, desk_code.graph, schedule, i_max=10)
        assert result.converged
        assert result.iterations_used == 1
        assert not result.bits.any()


def test_flooding_counter_is_edges_times_iterations(desk_code):
    s = snr_point(1.0, 0.143)
    for seed in range(5):
        llr = channel_llr(transmit(np.zeros(49, dtype=int), s, seed), s)
        result = decode(llr, desk_code.graph, FloodingSchedule(), i_max=20)
        assert result.spcn_to_vn_messages == desk_code.graph.total_edges * result.iterations_used
    assert desk_code.graph.total_edges == 14 * 12


def frozen(state, graph, a):
    """CN update that leaves every message untouched."""
    state.spcn_to_vn_messages += int(graph.cn_edge_count[a])
    return hard_decision(state.posterior[graph.neighbors[a]])


def failing_frame():
    llr = np.full(49, 5.0)
    llr[0] = -5.0
    return llr


def test_every_sweep_schedules_each_cn_once(desk_code):
    llr = failing_frame()
    result = decode(llr, desk_code.graph, RandomSequentialSchedule(8), i_max=3, update=frozen)
    assert not result.converged
    assert result.iterations_used == 3
    assert len(result.schedule_trace) == 3 * 14
    for sweep in range(3):
        assert sorted(result.schedule_trace[sweep * 14:(sweep + 1) * 14]) == list(range(14))


def test_sweep_updates_each_vn_once_per_incident_cn(desk_code, rng):
    graph = desk_code.graph
    state = MessageState(graph, failing_frame())
    for a in rng.permutation(graph.m):
        cn_update(state, graph, int(a))
    assert np.array_equal(state.vn_update_counts, graph.vn_cn_count)
    assert set(graph.vn_cn_count.tolist()) == {2}
    assert state.spcn_to_vn_messages == graph.total_edges


def test_channel_llrs_are_clipped_on_entry(toy_graph):
    llr = np.array([100.0, -100.0, np.inf, 3.0, -45.0, 0.5])
    state = MessageState(toy_graph, llr)
    assert np.abs(state.posterior).max() == L_MAX
    assert np.abs(state.m_vc).max() == L_MAX
    assert state.posterior.tolist() == [L_MAX, -L_MAX, L_MAX, 3.0, -L_MAX, 0.5]
    cn_update(state, toy_graph, 0)
    cn_update(state, toy_graph, 1)
    assert np.abs(state.m_cv).max() <= L_MAX
    assert np.abs(state.m_vc).max() <= L_MAX


def test_random_schedule_is_reproducible(desk_code):
    s = snr_point(1.0, 0.143)
    llr = channel_llr(transmit(np.zeros(49, dtype=int), s, 4), s)
    first = decode(llr, desk_code.graph, RandomSequentialSchedule(21, 0, 4), i_max=20)
    second = decode(llr, desk_code.graph, RandomSequentialSchedule(21, 0, 4), i_max=20)
    assert first.schedule_trace == second.schedule_trace
    assert np.array_equal(first.bits, second.bits)
    assert len(first.schedule_trace) <= 20 * 14


def test_invalid_schedules(desk_code):
    llr = np.full(49, 1.0)
    with pytest.raises(InvalidParameterError):
        decode(llr, desk_code.graph, FixedOrderSchedule([0, 0, 1]), i_max=1)
    with pytest.raises(InvalidParameterError):
        decode(llr, desk_code.graph, PolicySchedule(lambda states, done: 99), i_max=1)
    with pytest.raises(InvalidParameterError):
        decode(failing_frame(), desk_code.graph, PolicySchedule(lambda states, done: 0),
               i_max=1, update=frozen)
    with pytest.raises(ShapeMismatchError):
        decode(np.zeros(48), desk_code.graph, FloodingSchedule(), i_max=1)


def test_flooding_agrees_with_map_on_hamming_code(hamming_graph):
    agreement = _map_agreement(hamming_graph, frames=2000)
    assert agreement >= 0.95


@pytest.mark.slow
def test_flooding_agrees_with_map_on_hamming_code_full(hamming_graph):
    assert _map_agreement(hamming_graph, frames=10_000) >= 0.98


def _map_agreement(graph, frames):
    h = expand_parity_matrix(graph).rows
    codewords = gf2_span(gf2_nullspace(h)).astype(np.int64)
    assert codewords.shape[0] == 16
    esn0 = 3.0
    s = snr_point(esn0, 1.0)
    rng = np.random.default_rng(77)
    agree = 0
    for _ in range(frames):
        llr = channel_llr(transmit(np.zeros(7, dtype=int), s, rng), s)
        map_word = codewords[np.argmin(codewords @ llr)]
        result = decode(llr, graph, FloodingSchedule(), i_max=50)
        agree += np.array_equal(result.bits, map_word)
    return agree / frames


@pytest.mark.parametrize("schedule_factory", [
    lambda: FloodingSchedule(),
    pytest.param(lambda: RandomSequentialSchedule(5, 1), marks=pytest.mark.slow),
])
def test_sign_flipped_frames_give_identical_error_patterns(desk_code, schedule_factory):
    graph = desk_code.graph
    codewords = gf2_span(gf2_nullspace(desk_code.h.rows))
    s = snr_point(2.0, desk_code.report.rate)
    picker = np.random.default_rng(99)
    for frame in range(1000):
        word = codewords[picker.integers(codewords.shape[0])]
        llr0 = channel_llr(transmit(np.zeros(49, dtype=int), s, frame), s)
        llr1 = channel_llr(transmit(word, s, frame), s)
        r0 = decode(llr0, graph, schedule_factory(), i_max=20)
        r1 = decode(llr1, graph, schedule_factory(), i_max=20)
        assert np.array_equal(r0.bits, r1.bits ^ word)
        assert r0.converged == r1.converged
        assert r0.iterations_used == r1.iterations_used
