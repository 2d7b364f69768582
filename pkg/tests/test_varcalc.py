import random
from fractions import Fraction

import numpy as np
import pytest

from gradcalc.core import GQ
from gradcalc.jetring import JetModel, mul
from gradcalc.varcalc import (
    BasicForm,
    LagrangianDensity,
    NoetherError,
    VerticalField,
    check_dH_delta_commute,
    check_dH_nilpotent,
    check_el_trivial,
    check_splitting,
    coordinate_form,
    d_H,
    delta,
    euler_lagrange,
    euler_lagrange_oracle,
    momentum,
    noether_current,
    prolong,
    splitting_residual,
)

HALF = GQ(Fraction(1, 2))


@pytest.fixture
def scalar2():
    return JetModel((("y", 0),), 2, "constant")


def test_dH_of_scalar(scalar2):
    y = scalar2.jet("y")
    out = d_H(BasicForm.scalar(y))
    assert out.degree == 1
    assert out.component((0,)) == scalar2.jet("y", (0,))
    assert out.component((1,)) == scalar2.jet("y", (1,))


def test_dH_of_one_form_matches_wedge(scalar2):
    y = scalar2.jet("y")
    alpha = BasicForm(scalar2, 1, {(1,): y})
    out = d_H(alpha)
    assert out == d_H(BasicForm.scalar(y)).wedge(coordinate_form(scalar2, [1]))
    assert out.component((0, 1)) == scalar2.jet("y", (0,))


def test_dH_of_top_form_is_zero(scalar2):
    out = d_H(BasicForm.density(scalar2.jet("y")))
    assert out.degree == 2 and out.is_zero()


def test_prolong_examples(scalar2):
    y = scalar2.jet("y")
    tab = prolong(VerticalField(scalar2, {0: y}), 1)
    assert tab[(0, ())] == y
    assert tab[(0, (0,))] == scalar2.jet("y", (0,))
    shift = prolong(VerticalField(scalar2, {0: scalar2.const(3)}), 2)
    assert {k for k, f in shift.items() if not f.is_zero()} == {(0, ())}


def test_delta_examples(scalar2):
    y = scalar2.jet("y")
    v = VerticalField(scalar2, {0: y})
    ell = mul(y, y).scale(HALF)
    assert delta(v, BasicForm.density(ell)).density_coefficient() == mul(y, y)
    assert delta(v, BasicForm.scalar(scalar2.const(5))).is_zero()


def test_vertical_field_grade_check():
    model = JetModel((("y", 0), ("u", 1)), 2, "constant")
    with pytest.raises(ValueError):
        VerticalField(model, {0: model.jet("y"), 1: model.jet("y")})


def test_el_quadratic(scalar2):
    y = scalar2.jet("y")
    assert euler_lagrange(LagrangianDensity(mul(y, y).scale(HALF)))[0] == y


def test_el_klein_gordon(scalar2):
    y, y0, y1 = scalar2.jet("y"), scalar2.jet("y", (0,)), scalar2.jet("y", (1,))
    mu2 = Fraction(3, 2)
    ell = (mul(y0, y0) - mul(y1, y1)).scale(HALF) - mul(y, y).scale(GQ(mu2 / 2))
    F = euler_lagrange(LagrangianDensity(ell, 1))[0]
    expect = -scalar2.jet("y", (0, 0)) + scalar2.jet("y", (1, 1)) - y.scale(GQ(mu2))
    assert F == expect


def test_el_oracle_grid():
    checks = euler_lagrange_oracle()
    assert all(c.passed for c in checks), checks


def _complex_scalar(m=2):
    model = JetModel((("y", 0), ("ybar", 0)), m, "constant")
    eta = [1] + [-1] * (m - 1)
    ell = model.zero()
    for a in range(m):
        ell = ell + mul(model.jet("ybar", (a,)), model.jet("y", (a,))).scale(GQ(eta[a]))
    ell = ell - mul(model.jet("ybar"), model.jet("y"))
    return model, LagrangianDensity(ell, 1), eta


def test_noether_phase_current():
    model, L, eta = _complex_scalar()
    i = GQ(0, 1)
    v = VerticalField(model, {0: model.jet("y").scale(i), 1: model.jet("ybar").scale(-i)})
    J = noether_current(L, v)
    y, yb = model.jet("y"), model.jet("ybar")
    expect = [
        (mul(yb.d(a), y) - mul(y.d(a), yb)).scale(i * GQ(eta[a])) for a in range(model.dim)
    ]
    assert J == BasicForm.current(expect, model)


def test_noether_zero_field():
    model, L, _ = _complex_scalar()
    assert noether_current(L, VerticalField(model, {})).is_zero()


def test_noether_rejects_non_symmetry(scalar2):
    y = scalar2.jet("y")
    L = LagrangianDensity(mul(y, y).scale(HALF))
    with pytest.raises(NoetherError) as exc:
        noether_current(L, VerticalField(scalar2, {0: y}))
    assert exc.value.residual is not None and not exc.value.residual.is_zero()


def test_momentum_second_order_splitting():
    model = JetModel((("y", 0), ("u", 1), ("w", 1)), 2, "constant")
    y, u, w = model.jet("y"), model.jet("u"), model.jet("w")
    ell = mul(model.jet("y", (0, 1)), mul(y, y)) + mul(model.jet("u", (1, 1)), model.jet("w", (0,)))
    L = LagrangianDensity(ell, 2)
    v = VerticalField(model, {0: mul(y, y), 1: mul(y, w), 2: model.jet("u", (0,))})
    assert splitting_residual(L, v).is_zero()
    assert momentum(L).order == 2


@pytest.mark.parametrize("suite", [check_dH_nilpotent, check_dH_delta_commute, check_splitting, check_el_trivial])
def test_random_suites(suite):
    checks = suite(random.Random(suite.__name__))
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_el_numeric_against_numpy_gradient():
    # independent numpy evaluation of the Klein-Gordon operator on a smooth field
    model = JetModel((("y", 0),), 2, "constant")
    y, y0, y1 = model.jet("y"), model.jet("y", (0,)), model.jet("y", (1,))
    ell = (mul(y0, y0) - mul(y1, y1)).scale(HALF) - mul(y, y).scale(GQ(Fraction(1, 2)))
    F = euler_lagrange(LagrangianDensity(ell, 1))[0]
    h = 1e-3
    t, x = np.meshgrid(np.arange(-2, 3) * h + 0.3, np.arange(-2, 3) * h - 0.2, indexing="ij")
    phi = np.sin(t) * np.cos(2 * x)
    dtt = np.gradient(np.gradient(phi, h, axis=0), h, axis=0)[2, 2]
    dxx = np.gradient(np.gradient(phi, h, axis=1), h, axis=1)[2, 2]
    vals = {(): phi[2, 2], (0, 0): dtt, (1, 1): dxx}
    got = F.evaluate(lambda g: vals[g.index]).real
    assert got == pytest.approx(-dtt + dxx - phi[2, 2], rel=1e-9)
