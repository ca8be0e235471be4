import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bregman_tv import InvalidInputError, InvalidParameterError
from bregman_tv.forward_models import dense_operator
from bregman_tv.operators import gradient, tv_subgradient, tv_value
from bregman_tv.regularization import (
    Band,
    IndexFunction,
    MdpConfig,
    alpha_lower_bound_check,
    alpha_schedule,
    alpha_upper_bound,
    bregman_distance,
    bregman_error_bound,
    concavity_gap,
    mdp_band_check,
    mdp_consequences,
    objective_F,
    strict_convexity_gap,
    total_error_bound,
    total_error_constant,
    vsc_residual,
)


def test_index_function_values():
    psi = IndexFunction()
    assert psi(0.0) == 0.0
    assert psi(4.0) == 2.0
    np.testing.assert_allclose(IndexFunction(3.0, 1.0)([0.0, 2.0]), [0.0, 6.0])


@pytest.mark.parametrize("c,p", [(0.0, 0.5), (1.0, 0.0), (1.0, 1.5), (-1.0, 0.5)])
def test_index_function_rejects(c, p):
    with pytest.raises(InvalidParameterError):
        IndexFunction(c, p)


def test_index_function_negative_argument():
    with pytest.raises(InvalidInputError):
        IndexFunction()(-1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.05, 1.0), st.floats(0, 100), st.floats(0, 100))
def test_index_function_concave_increasing(c, p, a, b):
    psi = IndexFunction(c, p)
    lo, hi = min(a, b), max(a, b)
    assert psi(lo) <= psi(hi)
    assert psi(0.5 * (a + b)) >= 0.5 * (psi(a) + psi(b)) - 1e-9 * max(1.0, psi(hi))


def test_bregman_distance_hand_value():
    u_ref = np.array([[0.0, 1.0]])
    u = np.array([[2.0, 0.0]])
    q = tv_subgradient(u_ref)  # x-channel: +1
    # J(u) = 2, J(u_ref) = 1, <D^T q, u - u_ref> = <(-1, 1), (2, -1)> = -3
    assert bregman_distance(u, u_ref, q) == pytest.approx(2 - 1 + 3)


def test_bregman_distance_self_is_zero(rng):
    u = rng.random((5, 4))
    assert bregman_distance(u, u, tv_subgradient(u)) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bregman_distance_nonnegative(seed):
    r = np.random.default_rng(seed)
    u, u_ref = r.normal(size=(4, 5)), r.normal(size=(4, 5))
    q = tv_subgradient(u_ref)
    assert bregman_distance(u, u_ref, q) >= -1e-10


def test_bregman_distance_rejects_non_subgradient():
    u = np.array([[0.0, 1.0]])
    bad = -tv_subgradient(u)
    with pytest.raises(InvalidInputError):
        bregman_distance(u, u, bad)
    with pytest.raises(InvalidInputError):
        bregman_distance(u, u, 2 * np.ones((2, 1, 2)))


def test_objective_hand_value():
    op = dense_operator(np.eye(2))
    u = np.array([[1.0, 3.0]])
    u0 = np.zeros((1, 2))
    # 0.5*||u - v||^2 with v = (0, 1): 0.5*(1 + 4) = 2.5; D_J(u, 0) = J(u) = 2
    assert objective_F(u, [0.0, 1.0], op, 0.5, u0) == pytest.approx(2.5 + 0.5 * 2.0)


def test_objective_infinite_off_domain():
    op = dense_operator(np.eye(2))
    assert objective_F(np.array([[-1.0, 0.0]]), [0, 0], op, 1.0, np.zeros((1, 2))) == np.inf


def test_mdp_band():
    cfg = MdpConfig(1.1, 1.5, 2.0)
    assert cfg.band == pytest.approx((2.2, 3.0))
    assert mdp_band_check(2.0, cfg) is Band.BELOW
    assert mdp_band_check(2.2, cfg) is Band.INSIDE
    assert mdp_band_check(3.0, cfg) is Band.INSIDE
    assert mdp_band_check(3.01, cfg) is Band.ABOVE


@pytest.mark.parametrize("lo,hi", [(1.0, 1.5), (1.5, 1.2), (0.5, 2.0)])
def test_mdp_config_rejects(lo, hi):
    with pytest.raises(InvalidParameterError):
        MdpConfig(lo, hi)


def test_alpha_schedule():
    assert [alpha_schedule(i) for i in (1, 2, 4)] == [1.0, 0.5, 0.25]
    for bad in (0, -1, 1.5, True):
        with pytest.raises(InvalidInputError):
            alpha_schedule(bad)


def test_alpha_bounds():
    psi = IndexFunction()
    assert alpha_upper_bound(4.0, psi) == pytest.approx(8.0)
    with pytest.raises(InvalidInputError):
        alpha_upper_bound(0.0, psi)
    # psi(4) = 2; (1.1 - 1) * 16 / (2 alpha) <= 2  iff  alpha >= 0.4
    assert alpha_lower_bound_check(0.41, 4.0, psi, 1.1).holds
    assert alpha_lower_bound_check(0.5, 4.0, psi, 1.1).slack == pytest.approx(2 - 1.6)
    assert not alpha_lower_bound_check(0.3, 4.0, psi, 1.1).holds


def test_vsc_residual_at_truth_is_zero(rng):
    op = dense_operator(rng.normal(size=(6, 6)))
    u = rng.random((2, 3))
    assert vsc_residual(u, u, op, IndexFunction()) == pytest.approx(0.0, abs=1e-12)
    assert vsc_residual(u, u, op, IndexFunction(), form="bregman") == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        vsc_residual(u, u, op, IndexFunction(), form="other")


def test_vsc_residual_hand_value():
    op = dense_operator(np.eye(2))
    ud = np.zeros((1, 2))
    u = np.array([[0.0, 4.0]])
    # rhs = J(u) - J(ud) + psi(||u - ud||) = 4 + 2; lhs = 0.5 * 4
    assert vsc_residual(u, ud, op, IndexFunction(), sigma=0.5) == pytest.approx(6.0 - 2.0)


def test_mdp_consequences():
    lo, hi = mdp_consequences(1.0, 2.0, 1.1, 1.5)
    assert lo == pytest.approx(1.0 - 0.2)
    assert hi == pytest.approx(5.0 - 1.0)


def test_error_bound_constants():
    assert total_error_constant(1.5, 2.0) == pytest.approx(2 + 4 * 3 / 0.5)
    psi = IndexFunction()
    assert total_error_bound(4.0, psi, 1.5, 2.0) == pytest.approx((2 + 3) * 2)
    assert bregman_error_bound(4.0, psi, 1.5, 2.0, sigma=1.0) == pytest.approx((2 + 2 + 3) * 2)


def test_identity_helpers_hand_values():
    assert strict_convexity_gap([1.0, 0.0], [0.0, 1.0], 0.5) == pytest.approx(0.0, abs=1e-15)
    assert concavity_gap(IndexFunction(), 4.0, 1.0) == pytest.approx(4 - 2)


def test_tv_value_consistent_with_gradient(rng):
    u = rng.random((3, 3))
    assert tv_value(u) == pytest.approx(np.abs(gradient(u)).sum())
