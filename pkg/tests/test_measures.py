import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyszego.errors import UnsupportedMultiplicityError, ValidationError
from polyszego.measures import (
    bernstein_szego,
    laurent_expand,
    lebesgue,
    log_integral,
    measure_from_json,
    moments,
    p_log_integral,
    ps_exponential,
    total_mass,
    with_atoms,
)



def close(a, b, tol):
    return abs(mp.mpc(a) - mp.mpc(b)) <= tol


def test_laurent_single_root():
    w = laurent_expand([1])
    assert {k: complex(v) for k, v in w.laurent.items()} == {-1: -1, 0: 2, 1: -1}
    assert [complex(c) for c in w.analytic_P] == [0, -2]
    assert w.a0 == 4


def test_laurent_two_roots():
    w = laurent_expand([1, -1])
    nz = {k: complex(v) for k, v in w.laurent.items() if v != 0}
    assert nz == {-2: -1, 0: 2, 2: -1}
    assert [complex(c) for c in w.analytic_P] == [0, 0, -1]
    assert w.a0 == 4


def test_laurent_empty():
    w = laurent_expand([])
    assert w.laurent == {0: 1} and [complex(c) for c in w.analytic_P] == [0] and w.a0 == 2
    assert w(0.3j) == 1


def test_laurent_validation():
    with pytest.raises(ValidationError):
        laurent_expand([1.1])
    with pytest.raises(UnsupportedMultiplicityError):
        laurent_expand([1], [2])
    with pytest.raises(ValidationError):
        laurent_expand([1, 1])


roots_strategy = st.lists(st.integers(0, 359), min_size=1, max_size=3, unique=True).map(
    lambda degs: [d * np.pi / 180 for d in degs])


@settings(max_examples=25, deadline=None)
@given(roots_strategy)
def test_trig_weight_invariants(angles):
    w = laurent_expand([mp.expj(a) for a in angles])
    for j, c in w.laurent.items():
        assert close(w.laurent[-j], mp.conj(c), 1e-30)
    assert abs(w.a0 - 2 * w.laurent[0]) < 1e-30 and w.a0 > 0
    assert w.min_on_grid(512) >= -mp.mpf(10) ** (-32)
    # t P'(t) = p_1(t) - p_1(0) coefficientwise
    p1 = w.p1_coefficients()
    for k in range(1, len(p1)):
        assert close(k * w.analytic_P[k], p1[k], 1e-30)
    assert w.analytic_P[0] == 0
    t = mp.expj(0.77)
    assert close(w.laurent_eval(t), w(t), 1e-30)


def test_bernstein_szego_density_values():
    mu = bernstein_szego([0.5])
    assert abs(mu.density(-1) - mp.mpf(1) / 3) < 1e-30
    assert abs(mu.density(1) - 3) < 1e-30
    assert bernstein_szego([]).density(0.2 + 0.1j) == 1


def test_moments_lebesgue_and_bs():
    assert moments(lebesgue(), 4) == [1, 0, 0, 0, 0]
    c = moments(bernstein_szego([0.5]), 2)
    assert close(c[0], 1, 1e-25) and close(c[1], 0.5, 1e-25) and close(c[2], 0.25, 1e-25)


def test_moments_with_atom():
    mu = with_atoms(lebesgue(), [(1, 0.5)])
    c = moments(mu, 3)
    assert close(c[0], 1, 1e-30) and all(close(x, 0.5, 1e-30) for x in c[1:])


def test_moments_conjugate_symmetry():
    mu = bernstein_szego([0.3 + 0.1j, -0.2j])
    c = moments(mu, 3)
    back = mp.quad(lambda th: mu.density(mp.expj(th)) * mp.expj(2 * th), [0, mp.pi, 2 * mp.pi])
    # c_{-2} from a direct integral equals conj(c_2)
    assert close(back / (2 * mp.pi), mp.conj(c[2]), 1e-20)


def test_total_mass_with_atoms():
    mu = with_atoms(bernstein_szego([0.5]), [(-1, 0.1), (1j, 0.2)])
    assert abs(total_mass(mu) - 1) < 1e-18


def test_atom_validation():
    with pytest.raises(ValidationError):
        with_atoms(lebesgue(), [(1, 0.5), (1, 0.2)])
    with pytest.raises(ValidationError):
        with_atoms(lebesgue(), [(1, -0.1)])
    with pytest.raises(ValidationError):
        with_atoms(lebesgue(), [(1, 1.5)])


def test_p_log_integral_examples():
    p = laurent_expand([1])
    assert p_log_integral(p, lebesgue()).value == 0
    assert abs(p_log_integral(p, bernstein_szego([0.5])).value - (2 * mp.log(mp.mpf(3) / 4) - 1)) < 1e-30


def test_p_log_integral_ps_exponential():
    mu = ps_exponential(1, 1, 1)
    p = laurent_expand([1])
    # p log w = -|t-1| - p log Z, so the integral is -4/π - 2 log Z
    expected = -4 / mp.pi - 2 * mp.log(mu.normalization)
    assert abs(p_log_integral(p, mu).value - expected) < 1e-18
    flat = log_integral(mu)
    assert flat.diverged and flat.value == mp.ninf and flat.partial < 0


def test_ps_exponential_normalized_and_validated():
    mu = ps_exponential(1j, 1.5, 2)
    assert abs(total_mass(mu) - 1) < 1e-18
    assert mu.singular_points[0].exponent == 1.5
    for bad in ({"s": 3}, {"s": 0}, {"s": -1}):
        with pytest.raises(ValidationError):
            ps_exponential(1, bad["s"], 1)
    with pytest.raises(ValidationError):
        ps_exponential(1.2, 1, 1)


def test_json_roundtrip():
    mu = with_atoms(bernstein_szego([0.5, 0.25j]), [(-1, 0.1)])
    doc = mu.to_json()
    back = measure_from_json(doc)
    t = mp.expj(0.4)
    assert abs(back.density(t) - mu.density(t)) < 1e-30 and back.atoms == mu.atoms
    with pytest.raises(ValidationError):
        measure_from_json({"type": "bernstein_szego", "params": {"alpha": []}})
    with pytest.raises(ValidationError):
        measure_from_json({"type": "cauchy", "params": {}})


@settings(max_examples=10, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=0.85), min_size=1, max_size=4))
def test_bs_log_integral_finite(alphas):
    mu = bernstein_szego(alphas)
    res = log_integral(mu, laurent_expand([1, -1]))
    assert not res.diverged and mp.isfinite(res.value)
