import random

import pytest

from gradcalc.core import GQ
from gradcalc.jetring import (
    JetModel,
    check_ring_properties,
    mul,
    partial,
    substitute,
    theta,
    total_derivative,
)


@pytest.fixture
def model():
    # y, z even; u, w odd; base dimension 2
    return JetModel((("y", 0), ("z", 0), ("u", 1), ("w", 1)), 2, "constant")


def test_odd_anticommute(model):
    u, w = model.jet("u"), model.jet("w")
    assert mul(w, u) == -mul(u, w)
    assert mul(u, u).is_zero()


def test_even_odd_sorted_without_sign(model):
    y, u = model.jet("y"), model.jet("u")
    assert mul(u, y) == mul(y, u)


def test_theta_squares_to_zero(model):
    t = theta(model)
    f = mul(t, model.jet("y")) + model.jet("u")
    assert mul(mul(t, f), mul(t, f)).is_zero()


def test_partial_of_absent_derivative_is_zero(model):
    y = model.jet("y")
    assert partial(y, model.jet_gen("y", (0,))).is_zero()


def test_left_partial_sign(model):
    u, w = model.jet("u"), model.jet("w")
    uw = mul(u, w)
    assert partial(uw, model.jet_gen("u")) == w
    assert partial(uw, model.jet_gen("w")) == -u


def test_total_derivative_square(model):
    y = model.jet("y")
    assert total_derivative(mul(y, y), 0) == mul(model.jet("y", (0,)), y).scale(GQ(2))


def test_total_derivative_background_modes():
    formal = JetModel((("y", 0),), 2, "formal")
    const = JetModel((("y", 0),), 2, "constant")
    assert total_derivative(formal.background_symbol("g[0,1]"), 1) == formal.background_symbol("g[0,1]", (1,))
    assert total_derivative(const.background_symbol("g[0,1]"), 1).is_zero()


def test_total_derivatives_commute(model):
    f = mul(model.jet("u", (1,)), mul(model.jet("y"), model.jet("w", (0,))))
    assert total_derivative(total_derivative(f, 0), 1) == total_derivative(total_derivative(f, 1), 0)


def test_substitute(model):
    y, z = model.jet("y"), model.jet("z")
    assert substitute(mul(y, z), {model.jet_gen("y"): 0}).is_zero()
    f = mul(y, z) + model.jet("u")
    assert substitute(f, {}) == f
    with pytest.raises(ValueError):
        substitute(f, {model.jet_gen("y"): model.jet("u")})


def test_evaluate_matches_numeric(model):
    y, z = model.jet("y"), model.jet("z")
    f = mul(y, y).scale(GQ(3)) - mul(y, z) + model.const(GQ(0, 1))
    vals = {"y": 2.0, "z": -1.5}
    got = f.evaluate(lambda g: vals[model.coords[g.key][0]])
    assert got == pytest.approx(3 * 4.0 + 3.0 + 1j)


@pytest.mark.parametrize("m", [2, 4])
def test_ring_property_suite(m):
    checks = check_ring_properties(random.Random(m), 30, m=m)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
