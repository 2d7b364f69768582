import random
from fractions import Fraction

import numpy as np
import pytest

from gradcalc.core import GQ
from gradcalc.jetring import mul
from gradcalc.varcalc import euler_lagrange
from gradcalc.ym_brst import (
    FieldModel,
    S,
    brst_current,
    check_clifford,
    check_dirac_projectors,
    check_nilpotent,
    check_theta_S,
    curvature_gauge_residual,
    curvature_like,
    dirac_projectors,
    fp_current,
    fp_current_display,
    fp_noether_current,
    gamma_matrices,
    gauge_invariance,
    ghost_exactness,
    minkowski,
    model_from_dict,
    momentum_symbols,
    on_shell_momenta,
    second_order_equivalence,
    su2,
    su3,
    u1,
    validate_lie_algebra,
)


def _ok(checks):
    return all(c.passed for c in checks)


@pytest.mark.parametrize("make", [u1, su2, su3])
def test_builtin_groups_validate(make):
    checks = validate_lie_algebra(make())
    assert _ok(checks), [c for c in checks if not c.passed]
    names = {c.name for c in checks}
    assert ("lie.traceless" in names) == (make is not u1)


def test_flipped_constant_fails_jacobi_with_triple():
    checks = {c.name: c for c in validate_lie_algebra(su2().flipped(0, 1, 2))}
    assert not checks["lie.jacobi"].passed
    assert "triple" in checks["lie.jacobi"].witness


@pytest.mark.parametrize("m", [2, 4])
def test_clifford(m):
    assert check_clifford(gamma_matrices(m), minkowski(m)).passed


def test_gammas_numpy_anticommutator():
    gs = [np.array([[x.to_complex() for x in row] for row in g]) for g in gamma_matrices(4)]
    eta = np.diag(minkowski(4))
    for a in range(4):
        for b in range(4):
            assert np.allclose(gs[a] @ gs[b] + gs[b] @ gs[a], 2 * eta[a, b] * np.eye(4))


def test_model_rejects_fermions_in_odd_dimension():
    with pytest.raises(ValueError):
        FieldModel(u1(), 3, sectors=["fermion"])


def test_ghost_needs_gauge():
    with pytest.raises(ValueError):
        FieldModel(u1(), 4, sectors=["ghost"])


def test_fermion_terms_need_constant_metric():
    fm = FieldModel(u1(), 2, "formal")
    with pytest.raises(ValueError):
        fm.ell_psi()


@pytest.mark.parametrize("mode", ["constant", "formal"])
def test_nakanishi_lautrup_equation(mode):
    fm = FieldModel(su2(), 2, mode, xi=Fraction(3, 2), sectors=["gauge", "ghost"])
    F = euler_lagrange(fm.lagrangian())
    for I in range(3):
        expect = fm.f_sqrtg(I) + mul(fm.n(I), fm.sqrtg()).scale(GQ(Fraction(3, 2)))
        assert F[fm.i_n[I]] == expect


def test_S_is_odd_antiderivation():
    fm = FieldModel(su2(), 2, "constant")
    a, w = fm.A(0, 1), fm.omega(2)
    assert S(fm, mul(a, w)) == mul(S(fm, a), w) + mul(a, S(fm, w))
    assert S(fm, mul(w, a)) == mul(S(fm, w), a) - mul(w, S(fm, a))


@pytest.mark.parametrize("group", [u1, su2])
@pytest.mark.parametrize("mode", ["constant", "formal"])
def test_nilpotency_and_theta_S_m2(group, mode):
    fm = FieldModel(group(), 2, mode)
    rng = random.Random(7)
    assert _ok(check_nilpotent(fm, rng, 20))
    assert _ok(check_theta_S(fm, rng, 20))


def test_flipped_group_breaks_nilpotency():
    fm = FieldModel(su2().flipped(0, 1, 2), 2, "constant", sectors=["gauge", "ghost"])
    checks = check_nilpotent(fm)
    assert not checks[0].passed and "S^2" in checks[0].witness


@pytest.mark.parametrize("group", [u1, su2])
def test_identity_suite_m2(group):
    for mode in ("constant", "formal"):
        sectors = ["fermion", "gauge", "ghost"] if mode == "constant" else ["gauge", "ghost"]
        fm = FieldModel(group(), 2, mode, sectors=sectors)
        _, _, checks = ghost_exactness(fm)
        checks += brst_current(fm)[1] + fp_current(fm) + second_order_equivalence(fm)
        if mode == "constant":
            checks += gauge_invariance(fm)
        assert _ok(checks), [c for c in checks if not c.passed]


def test_fp_noether_differs_from_display_only_in_the_derivative_term():
    fm = FieldModel(u1(), 2, "constant", sectors=["gauge", "ghost"])
    diff = fp_noether_current(fm) - fp_current_display(fm)
    expect = []
    for a in range(2):
        expect.append(mul(fm.omega(0, (a,)), fm.varpi(0)).scale(GQ(2 * minkowski(2)[a])))
    from gradcalc.varcalc import BasicForm

    assert diff == BasicForm.current(expect, fm.jm)


def test_dirac_projectors_example():
    Pp, Pm = dirac_projectors((3, 1, 2, 0), 2)
    assert _ok(check_dirac_projectors((3, 1, 2, 0), 2))
    # numpy oracle: projectors and eigenvalues
    A = np.array([[x.to_complex() for x in r] for r in Pp])
    assert np.allclose(A @ A, A)
    assert np.linalg.matrix_rank(A) == 2


def test_dirac_m2():
    assert _ok(check_dirac_projectors((5, 4), 3))


@pytest.mark.parametrize("p,mass", [((3, 1, 2, 0), 1), ((-3, 1, 2, 0), 2), ((3, 1, 2, 0), 0)])
def test_dirac_rejects_bad_input(p, mass):
    with pytest.raises(ValueError):
        dirac_projectors(p, mass)


def test_on_shell_momenta_enough():
    moms = on_shell_momenta(24)
    assert len(moms) == 24
    for p, mass in moms:
        assert p[0] ** 2 - sum(x * x for x in p[1:]) == mass * mass


def test_curvature_like_abelian_gauge_invariant():
    lie = u1()
    jm, alpha, p = momentum_symbols(lie, 4)
    chi = [jm.background_symbol("chi[0]")]
    assert curvature_gauge_residual(lie, alpha, p, chi) == {}
    rho = curvature_like(lie, alpha, p)
    assert len(rho) == 6


def test_curvature_like_nonabelian_residual_is_exposed():
    lie = su2()
    jm, alpha, p = momentum_symbols(lie, 2)
    chi = [jm.background_symbol(f"chi[{I}]") for I in range(3)]
    res = curvature_gauge_residual(lie, alpha, p, chi)
    # cross terms c alpha (p chi) survive in the non-abelian case
    assert sorted(res) == [(0, 0, 1), (1, 0, 1), (2, 0, 1)]


def test_model_from_dict_defaults():
    fm, report = model_from_dict({"group": "su2"})
    assert fm.sectors == frozenset({"fermion", "gauge", "ghost"})
    assert fm.dim == 4 and _ok(report)
    with pytest.raises(ValueError):
        model_from_dict({"group": "so10"})
