import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyszego.cmv import (
    build_cmv,
    free_cmv,
    multiplication_identity_error,
    poly_trace_dense,
    sum_rule_check,
    t0,
    tau_compress,
    trace_diff,
    trace_series_D,
)
from polyszego.errors import SeriesTruncationError, ValidationError
from polyszego.measures import laurent_expand


def close(a, b, tol=1e-30):
    return abs(mp.mpc(a) - mp.mpc(b)) <= tol


def test_free_matrix_row_zero():
    C0 = free_cmv(6)
    row = [C0.entry(0, j) for j in range(6)]
    assert row == [0, 1, 0, 0, 0, 0]
    assert all(C0.entry(k, k) == 0 for k in range(6))


def test_diagonal_formula():
    alphas = [mp.mpc(0.5, 0.1), mp.mpc(-0.2, 0.3), mp.mpc(0.1, -0.4), mp.mpc(0.3)]
    d = build_cmv(alphas, 8).diagonal()
    assert close(d[0], mp.conj(alphas[0]))
    for k in range(1, 4):
        assert close(d[k], -mp.conj(alphas[k]) * alphas[k - 1])
    assert close(d[4], 0)


def test_trace_first_three():
    d = build_cmv([0.5], 6).diagonal()
    assert close(d[0] + d[1] + d[2], 0.5)


def test_multiplication_identity():
    assert multiplication_identity_error([0.5, 0.2j, -0.3 + 0.1j], 8) < 1e-20


def test_t0_examples():
    assert t0([0, 0]) == 0
    assert close(t0([0.5]), mp.log(mp.mpf(3) / 4) / 2)
    assert close(t0([0.5, mp.mpf(1) / 3]), (mp.log(mp.mpf(3) / 4) + mp.log(mp.mpf(8) / 9)) / 2)
    assert abs(t0([0.5]) + mp.mpf("0.1438410362258904")) < 1e-15


@pytest.mark.parametrize("a", [0.5, -0.3, 0.9])
def test_trace_diff_linear(a):
    assert close(trace_diff([0, -2], [a]).value, -2 * a, 1e-30)


def test_trace_diff_free():
    assert trace_diff([0, 1, 2, 3], [0, 0, 0]).value == 0


def test_trace_diff_dense_oracle():
    alphas = [0.4 - 0.3j]
    td = trace_diff([0, 0, -1], alphas)
    assert close(td.value, poly_trace_dense([0, 0, -1], alphas, 12), 1e-30)


@settings(max_examples=20, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=0.9, allow_nan=False), min_size=1, max_size=5),
    st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False), min_size=1, max_size=4),
)
def test_trace_diff_stabilizes(alphas, P):
    td = trace_diff(P, alphas)
    d = len(P) - 1
    assert td.stabilized_M <= len(alphas) + 2 * d + 4
    assert close(td.value, poly_trace_dense(P, alphas, len(alphas) + 2 * d + 6), 1e-25)


def test_tau_compress():
    C = build_cmv([0.5, 0.2j, -0.1, 0.3j], 12)
    assert tau_compress(C.dense(), 0) == C.dense()
    C0 = free_cmv(12).dense()
    t2 = tau_compress(C0, 2)
    # row 0 is a boundary row; the period-2 pattern holds from index 1 on
    for i in range(1, 8):
        for j in range(1, 8):
            assert t2[i, j] == C0[i, j]
    # the diagonal of τ²(C) is the diagonal formula shifted by two
    d = C.diagonal()
    t2c = tau_compress(C, 2)
    assert all(close(t2c[k, k], d[k + 2]) for k in range(8))
    with pytest.raises(ValidationError):
        tau_compress(C, 12)


def test_unitarity_interior():
    alphas = [0.5, 0.2j, -0.3 + 0.4j, 0.7]
    C = build_cmv(alphas, 14).dense()
    G = C.H * C
    for i in range(10):
        for j in range(10):
            assert close(G[i, j], 1 if i == j else 0, 1e-20)


def test_sum_rule_hand_case():
    rep = sum_rule_check(laurent_expand([1]), [0.5])
    target = 2 * mp.log(mp.mpf(3) / 4) - 1
    assert close(rep.lhs, target, 1e-20) and close(rep.rhs, target, 1e-30)


def test_sum_rule_free_and_two_step():
    rep = sum_rule_check(laurent_expand([1, 1j]), [0, 0])
    assert rep.lhs == 0 and rep.rhs == 0
    rep = sum_rule_check(laurent_expand([1]), [0.5, mp.mpf(1) / 3])
    assert rep.abs_diff < 1e-8
    assert '"stabilized_M"' in rep.to_json()


def test_trace_series_closed_form():
    assert trace_series_D([], 0.3) == 1
    assert close(trace_series_D([0.5], 0), mp.sqrt(3) / 2, 1e-30)
    assert close(trace_series_D([0.5], 0.5), 2 / mp.sqrt(3), 1e-12)


def test_trace_series_truncation_error():
    with pytest.raises(SeriesTruncationError):
        trace_series_D([0.9, 0.8], 0.95, K_terms=4, tol=1e-20)
    with pytest.raises(ValidationError):
        trace_series_D([0.5], 1.0)


@settings(max_examples=15, deadline=None)
@given(
    st.floats(-0.9, 0.9),
    st.complex_numbers(max_magnitude=0.85, allow_nan=False),
)
def test_trace_series_rank_one_family(a, z):
    D = trace_series_D([a], z)
    assert close(D, mp.sqrt(1 - mp.mpf(a) ** 2) / (1 - a * mp.mpc(z)), 1e-10)
