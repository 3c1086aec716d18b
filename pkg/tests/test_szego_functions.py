import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyszego.errors import NonSzegoError, ProximityError, ValidationError
from polyszego.measures import bernstein_szego, laurent_expand, lebesgue, ps_exponential
from polyszego.quadrature import QuadratureSpec
from polyszego.szego_core import eval_phi_star
from polyszego.szego_functions import (
    kernel_data,
    log_psi_n_eval,
    modified_D,
    modified_kernel,
    modified_phi_star,
    p0_closed_form,
    p0_kernel,
    p0_psi_exponent,
    psi_coefficients,
    psi_n_eval,
    psi_n_laurent,
    q_eval,
    schwarz_D,
)

FAST = QuadratureSpec(abs_tol=1e-16, rel_tol=1e-16)


def close(a, b, tol):
    return abs(mp.mpc(a) - mp.mpc(b)) <= tol


def test_q_examples():
    d = kernel_data([1])
    assert close(q_eval(d, -1), 4, 1e-30)
    assert close(q_eval(d, 1j), 2, 1e-30)
    d2 = kernel_data([1, -1])
    assert abs(mp.im(q_eval(d2, 1j))) <= 1e-30
    with pytest.raises(ValidationError):
        q_eval(d, 0)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 359), min_size=1, max_size=3, unique=True), st.floats(0, 6.28))
def test_q_real_on_circle(degs, theta):
    d = kernel_data([mp.expj(mp.pi * k / 180) for k in degs])
    t = mp.expj(theta)
    val = q_eval(d, t)
    assert abs(mp.im(val)) < 1e-28
    assert close(val, d.weight(t), 1e-28)
    assert abs(abs(d.constantC) - 1) < 1e-30


def test_schwarz_D_examples():
    assert schwarz_D(lebesgue(), 0.4j) == 1
    mu = bernstein_szego([0.5])
    assert close(schwarz_D(mu, 0.5), 2 / mp.sqrt(3), 1e-18)
    assert close(schwarz_D(mu, 0), mp.sqrt(3) / 2, 1e-18)
    with pytest.raises(NonSzegoError):
        schwarz_D(ps_exponential(1, 1, 1), 0.2)


def test_modified_D_examples():
    d = kernel_data([1])
    assert modified_D(lebesgue(), d, 0.5) == 1
    mu = bernstein_szego([0.5])
    val = modified_D(mu, d, mp.mpf("0.999") * 1j)
    assert abs(abs(val) ** 2 - mu.density(1j)) < 1e-3
    val = modified_D(ps_exponential(1, 1, 1), d, -0.5, FAST)
    assert mp.isfinite(abs(val)) and abs(val) > 0
    with pytest.raises(ProximityError):
        modified_D(mu, d, 1 - mp.mpf(10) ** -20)
    with pytest.raises(ValidationError):
        modified_D(mu, d, 1.2)


def test_radial_trend():
    d = kernel_data([1])
    mu = bernstein_szego([0.5])
    t = mp.expj(2.0)
    errs = [abs(abs(modified_D(mu, d, r * t)) ** 2 - mu.density(t))
            for r in (mp.mpf("0.9"), mp.mpf("0.99"), mp.mpf("0.999"))]
    assert errs[0] > errs[1] > errs[2]


def test_degenerate_reduction():
    d = kernel_data([])
    mu = bernstein_szego([0.5, 0.2j])
    for z in (0.3, -0.2 + 0.5j):
        assert close(modified_D(mu, d, z), schwarz_D(mu, z), 1e-25)


def test_modified_phi_star_examples():
    d = kernel_data([1])
    assert modified_phi_star([0, 0], 2, d, 0.4) == 1
    z = mp.mpf("0.999") * 1j
    assert abs(abs(modified_phi_star([0.5], 1, d, z)) - abs(eval_phi_star([0.5], 1, 1j))) < 1e-3


@pytest.mark.parametrize("zetas", [[1], [1, 1j], [mp.expj(0.4), -1, mp.expj(-2)]])
def test_factorization(zetas):
    d = kernel_data(zetas)
    alphas = [0.5, -0.3j, 0.2 + 0.1j]
    for z in (mp.mpf(1) / 3, 0.4 - 0.3j):
        lhs = modified_phi_star(alphas, 3, d, z)
        rhs = psi_n_eval(alphas, 3, d, z) * eval_phi_star(alphas, 3, z)
        assert close(lhs, rhs, 1e-8)


@pytest.mark.parametrize("zetas", [[1], [1j, -1]])
def test_laurent_form_matches_quadrature(zetas):
    d = kernel_data(zetas)
    alphas = [0.5, -0.3j, 0.2 + 0.1j, 0.6]
    psi = psi_n_laurent(alphas, 4, d)
    for z in (0, 0.3, -0.5 + 0.2j, 0.8j):
        assert close(psi.log_eval(z), log_psi_n_eval(alphas, 4, d, z), 1e-18)


def test_psi_trivial():
    d = kernel_data([1])
    assert psi_n_eval([0, 0], 2, d, 0.3) == 1
    c = psi_coefficients([0, 0], 2, d)
    assert c.A0n == 0 and all(a == 0 for a in c.Akn) and all(b == 0 for b in c.Bkn)


def test_psi_fit_holdout():
    c = psi_coefficients([0.5], 1, kernel_data([1]), FAST)
    assert c.holdout_residual <= 1e-8
    assert c.class_violation() <= 1e-10
    assert '"Akn"' in c.to_json()


def test_real_alphas_give_zero_B():
    A, B = p0_closed_form([0.5, mp.mpf(1) / 3], 1)
    assert B == 0
    c = psi_coefficients([0.5, mp.mpf(1) / 3], 2, kernel_data([1]), FAST)
    assert abs(c.Bkn[0]) < 1e-10


def test_p0_closed_form_examples():
    A, B = p0_closed_form([0.5j], 0)
    assert close(A, mp.log(mp.mpf(3) / 4) / 2, 1e-30) and close(B, 1j / mp.mpf(8), 1e-30)
    A, B = p0_closed_form([0.5j, 0.5], 1)
    assert close(B, 3j / mp.mpf(16), 1e-30)


def test_p0_closed_form_matches_psi():
    # the printed pair for index n describes ψ_{n+1}, normalized to 1 at the origin
    alphas = [0.5j, 0.3 - 0.2j, -0.1 + 0.4j]
    d = kernel_data([1])
    for n in range(3):
        A, B = p0_closed_form(alphas, n)
        for z in (0.3, -0.5j, 0.6 + 0.2j):
            lhs = log_psi_n_eval(alphas, n + 1, d, z) - log_psi_n_eval(alphas, n + 1, d, 0)
            assert close(lhs, p0_psi_exponent(A, B, z), 1e-8)


def test_printed_kernel_reduction():
    d = kernel_data([1])
    for t in (mp.expj(0.3), mp.expj(2.5), -1):
        for z in (0.3, -0.5 + 0.1j, 0.7j):
            assert close(modified_kernel(d, t, z), p0_kernel(t, z), 1e-28)


def test_kernel_data_from_weight():
    w = laurent_expand([1, -1])
    d = kernel_data(w)
    assert d.N == 2 and close(d.constantC, -1, 1e-30)
    assert d.to_json()["zetas"] == [[1.0, 0.0], [-1.0, 0.0]]
