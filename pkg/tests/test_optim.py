import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import mvan.autodiff as ad
from mvan.optim import AdamHyper, AdamState, adam_step


def test_first_step_reference_value():
    # theta=1, g=0.5: bias correction makes m_hat=g, v_hat=g^2, so the first
    # update is almost exactly the learning rate.
    p = ad.parameter("theta", np.array([1.0]))
    state = AdamState([p])
    adam_step(state, {p: np.array([0.5])}, AdamHyper())
    assert p.data[0] == pytest.approx(0.999, abs=1e-9)


def test_first_step_size_is_learning_rate_for_any_gradient_sign():
    for g in (-3.0, -0.5, 0.25, 10.0):
        p = ad.parameter("theta", np.array([2.0]))
        adam_step(AdamState([p]), {p: np.array([g])}, AdamHyper(learning_rate=0.01))
        assert p.data[0] == pytest.approx(2.0 - 0.01 * np.sign(g), abs=1e-7)


def test_zero_gradient_is_a_no_op():
    p = ad.parameter("theta", np.array([[1.5, -2.5]]))
    state = AdamState([p])
    for _ in range(3):
        adam_step(state, {p: np.zeros_like(p.data)}, AdamHyper())
    np.testing.assert_array_equal(p.data, [[1.5, -2.5]])


def test_missing_gradient_raises_with_name():
    p = ad.parameter("encoder.w", np.ones(2))
    q = ad.parameter("head.b", np.ones(2))
    state = AdamState([p, q])
    with pytest.raises(ValueError, match="head.b"):
        adam_step(state, {p: np.ones(2)}, AdamHyper())


def test_gradient_shape_mismatch_raises():
    p = ad.parameter("w", np.ones((2, 2)))
    state = AdamState([p])
    with pytest.raises(ValueError, match="shape"):
        adam_step(state, {p: np.ones(3)}, AdamHyper())


@given(
    st.lists(st.floats(min_value=-5, max_value=5), min_size=1, max_size=6),
    st.integers(min_value=1, max_value=5),
)
def test_identical_parameters_stay_identical(grad_values, steps):
    g = np.asarray(grad_values)
    a = ad.parameter("a", np.linspace(-1, 1, g.size))
    b = ad.parameter("b", np.linspace(-1, 1, g.size))
    sa, sb = AdamState([a]), AdamState([b])
    for _ in range(steps):
        adam_step(sa, {a: g.copy()}, AdamHyper())
        adam_step(sb, {b: g.copy()}, AdamHyper())
    np.testing.assert_array_equal(a.data, b.data)


def test_descends_a_quadratic():
    p = ad.parameter("x", np.array([4.0]))
    state = AdamState([p])
    hyper = AdamHyper(learning_rate=0.05)
    for _ in range(2000):
        loss = ad.mul(p, p)
        adam_step(state, ad.gradient(loss, [p]), hyper)
    assert abs(p.data[0]) < 1e-2
