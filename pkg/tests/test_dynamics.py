import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netsense import dynamics as dy
from netsense.errors import PoleError

BENCH = dict(omega_n=math.sqrt(2), zeta=0.05, k=0.37949)


def test_canonical_coefficients():
    d = dy.second_order(2.0, 0.1, 0.5)
    # (s^2 + 0.4 s + 4) / 2
    assert d.g_coeffs == pytest.approx((2.0, 0.2, 0.5))
    d1 = dy.first_order(1.0, 0.5)
    assert d1.g_coeffs == pytest.approx((2.0, 2.0))


def test_invalid_dynamics():
    with pytest.raises(ValueError):
        dy.custom([1.0])
    with pytest.raises(ValueError):
        dy.custom([1.0, 0.0])
    with pytest.raises(ValueError):
        dy.second_order(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        dy.second_order(-1.0, 0.1, 1.0)
    with pytest.raises(ValueError):
        dy.first_order(1.0, 0.0)
    with pytest.raises(ValueError):
        dy.NodalDynamics((1.0, 2.0, 3.0), 2, 1.0, 0.1, 1.0)


def test_dict_round_trip():
    for d in (dy.second_order(**BENCH), dy.first_order(1.0, 0.5), dy.custom([1.0, 2.0, 3.0, 4.0])):
        assert dy.NodalDynamics.from_dict(d.to_dict()) == d
    assert dy.NodalDynamics.from_dict({"g_coeffs": [1, 1]}).order == "custom"


def test_f_dc_gain():
    assert dy.f_eval(dy.second_order(1, 0.01, 1), 0) == pytest.approx(1.0, abs=1e-15)


def test_f_resonance():
    val = dy.f_eval(dy.second_order(1, 0.01, 1), 1j)
    assert val == pytest.approx(-50j, abs=1e-12)
    assert abs(val) == pytest.approx(50, rel=1e-12)
    assert math.degrees(cmath.phase(val)) == pytest.approx(-90, abs=1e-9)


def test_f_first_order():
    assert dy.f_eval(dy.first_order(1, 0.5), 1j) == pytest.approx(0.25 - 0.25j, abs=1e-15)


def test_f_pole():
    with pytest.raises(PoleError):
        dy.f_eval(dy.custom([1.0, 0.0, 1.0]), 1j)


def test_h_lambda_zero_is_f():
    d = dy.second_order(**BENCH)
    for s in (0.3j, 1.4j, 2 + 5j):
        assert dy.h_eval(d, 0.0, s) == pytest.approx(dy.f_eval(d, s), rel=1e-15)


def test_h_benchmark_dc():
    d = dy.second_order(**BENCH)
    k = BENCH["k"]
    expected = k / (1 - k)
    assert expected == pytest.approx(0.611578, abs=1e-6)
    assert dy.h_eval(d, 1.0, 0) == pytest.approx(expected, rel=1e-13)
    assert dy.closed_loop_limit_eval(d, 0) == pytest.approx(expected, rel=1e-13)


def test_h_pole():
    d = dy.first_order(1.0, 1.0)  # g(0) = 1
    with pytest.raises(PoleError):
        dy.h_eval(d, 1.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(
    wn=st.floats(0.1, 10),
    zeta=st.floats(0.005, 2),
    k=st.floats(0.01, 5),
    lam=st.floats(-3, 3),
    w=st.floats(-50, 50),
)
def test_h_matches_naive_formula(wn, zeta, k, lam, w):
    d = dy.second_order(wn, zeta, k)
    s = 1j * w
    f = dy.f_eval(d, s)
    if abs(1 - lam * f) <= 1e-6:
        return
    naive = f / (1 - lam * f)
    assert abs(dy.h_eval(d, lam, s) - naive) <= 1e-12 * abs(naive)


def test_h_vectorized():
    d = dy.second_order(**BENCH)
    s = 1j * np.logspace(-2, 2, 50)
    vec = dy.h_eval(d, 0.4, s)
    assert vec.shape == (50,)
    assert vec[7] == dy.h_eval(d, 0.4, s[7])


@settings(max_examples=100, deadline=None)
@given(wn=st.floats(0.1, 10), zeta=st.floats(0.005, 2), k=st.floats(0.01, 5), w=st.floats(0.01, 100))
def test_conjugate_symmetry(wn, zeta, k, w):
    d = dy.second_order(wn, zeta, k)
    assert dy.f_eval(d, -1j * w) == pytest.approx(np.conj(dy.f_eval(d, 1j * w)), rel=1e-14)


# -- stability --------------------------------------------------------------------


def test_stability_examples():
    assert dy.is_stable(dy.second_order(1, 0.05, 0.9), 1.0).stable
    assert not dy.is_stable(dy.second_order(1, 0.05, 1.2), 1.0).stable
    st1 = dy.is_stable(dy.first_order(1, 2), 1.0)
    assert not st1.stable
    # root s = k wn^2 lam - wn^2 = 1
    assert st1.margin == pytest.approx(-1.0, abs=1e-14)


def test_stability_margin_second_order():
    # s^2 + 0.1 s + (1 - 0.9) -> underdamped, real part -0.05
    st2 = dy.is_stable(dy.second_order(1, 0.05, 0.9), 1.0)
    assert st2.margin == pytest.approx(0.05, abs=1e-12)


def test_stability_custom_polynomial():
    # (s + 1)(s + 2)(s + 3) stable, shift by lam=100 makes it unstable
    g = np.polynomial.polynomial.polyfromroots([-1, -2, -3])
    d = dy.custom(g)
    assert dy.is_stable(d, 0.0).stable
    assert dy.is_stable(d, 0.0).margin == pytest.approx(1.0, abs=1e-9)
    assert not dy.is_stable(d, 100.0).stable


def test_marginal_counts_as_unstable():
    d = dy.custom([1.0, 0.0, 1.0])  # s^2 + 1: roots on the axis
    assert not dy.is_stable(d, 0.0).stable


@settings(max_examples=100, deadline=None)
@given(
    wn=st.floats(0.1, 10), zeta=st.floats(0.005, 2), k=st.floats(0.01, 5),
    lam=st.floats(-3, 3), dl=st.floats(0, 3),
)
def test_stability_monotone_in_lambda(wn, zeta, k, lam, dl):
    d = dy.second_order(wn, zeta, k)
    if not dy.is_stable(d, lam).stable:
        assert not dy.is_stable(d, lam + dl).stable


def test_max_stable_gain():
    assert dy.max_stable_gain(1, 0.05, 2.5, 0.1) == pytest.approx(0.36, rel=1e-15)
    assert dy.max_stable_gain(1, 0.05, 1.0, 0.1) == pytest.approx(0.9, rel=1e-15)
    k = dy.max_stable_gain(1, 0.05, 1.0, 1e-6)
    assert 1 - k * 1.0 == pytest.approx(1e-6, rel=1e-6)
    assert dy.max_stable_gain(1, None, 2.0, 0.1) == pytest.approx(0.45)
    with pytest.raises(ValueError):
        dy.max_stable_gain(1, 0.05, 0.0, 0.1)
    with pytest.raises(ValueError):
        dy.max_stable_gain(1, 0.05, 1.0, 1.0)


# -- ER limit ----------------------------------------------------------------------


def test_er_limit_benchmark_parameters():
    lim = dy.er_limit_model(dy.second_order(**BENCH))
    k = BENCH["k"]
    # direct arithmetic
    assert lim.omega_n == pytest.approx(math.sqrt(2) * math.sqrt(1 - k), rel=1e-14)
    # sqrt(2) * sqrt(0.62051) = 1.1140108
    assert lim.omega_n == pytest.approx(1.114011, abs=1e-6)
    assert lim.zeta == pytest.approx(0.063474, abs=1e-6)
    assert lim.k == pytest.approx(0.611578, abs=1e-6)


@pytest.mark.parametrize(
    "params", [BENCH, dict(omega_n=1.0, zeta=0.01, k=0.9), dict(omega_n=3.0, zeta=0.7, k=0.2)]
)
def test_er_limit_transfer_function(params):
    d = dy.second_order(**params)
    lim = dy.er_limit_model(d)
    for w in np.logspace(-2, 2, 100):
        s = 1j * w
        f = dy.f_eval(d, s)
        naive = f / (1 - f)
        assert abs(dy.f_eval(lim, s) - naive) <= 1e-10 * abs(naive)


def test_er_limit_no_coupling():
    d = dy.second_order(1.3, 0.2, 1e-12)
    lim = dy.er_limit_model(d)
    assert lim.omega_n == pytest.approx(1.3, rel=1e-11)
    assert lim.zeta == pytest.approx(0.2, rel=1e-11)
    assert lim.k == pytest.approx(1e-12, rel=1e-11)


def test_er_limit_errors():
    with pytest.raises(ValueError):
        dy.er_limit_model(dy.second_order(1, 0.1, 1.0))
    with pytest.raises(ValueError):
        dy.er_limit_model(dy.first_order(1, 0.5))


@settings(max_examples=100, deadline=None)
@given(wn=st.floats(0.1, 10), zeta=st.floats(0.005, 2), k=st.floats(0.001, 0.99))
def test_er_limit_inverse(wn, zeta, k):
    d = dy.second_order(wn, zeta, k)
    back = dy.er_limit_inverse(dy.er_limit_model(d))
    assert back.omega_n == pytest.approx(wn, rel=1e-12)
    assert back.zeta == pytest.approx(zeta, rel=1e-12)
    assert back.k == pytest.approx(k, rel=1e-12)


def test_closed_loop_limit_equals_h1():
    d = dy.second_order(**BENCH)
    for w in (0.1, 1.0, 1.11, 7.0):
        assert dy.closed_loop_limit_eval(d, 1j * w) == dy.h_eval(d, 1.0, 1j * w)


def test_closed_loop_limit_high_frequency():
    d = dy.second_order(**BENCH)
    s = 1e4j
    f = dy.f_eval(d, s)
    assert abs(dy.closed_loop_limit_eval(d, s) - f) / abs(f) < 1e-6
