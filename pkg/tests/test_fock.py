import random

import numpy as np
import pytest

from gradcalc.core import GQ
from gradcalc.fock import (
    ABSORB,
    BOSON,
    CREATE,
    FERMION,
    FockOperator,
    FockState,
    ModeSet,
    Surd,
    absorb,
    apply,
    bracket_matrix,
    charge_commutator_check,
    charge_model,
    check_fock_axioms,
    check_normal_order,
    emit,
    exterior_product,
    fock_basis,
    free_field_check,
    guarded_columns,
    interior_product,
    inverse_symbol,
    lattice_modes,
    ladder,
    normal_order,
    pairing,
    superbracket,
    truncated_matrix,
)


def fermions(n):
    return ModeSet(range(n), [1], [FERMION])


def bosons(n):
    return ModeSet(range(n), [1], [BOSON])


def test_fermion_self_product_vanishes():
    ms = fermions(1)
    m = FockState.particle(ms, 0)
    assert exterior_product(m, m).is_zero()


def test_boson_self_product_matches_emit_twice():
    ms = bosons(1)
    m = FockState.particle(ms, 0)
    vac = FockState.vacuum(ms)
    twice = apply(emit(ms, 0), apply(emit(ms, 0), vac))
    assert exterior_product(m, m) == twice
    assert set(twice.terms) == {(2,)}


def test_fermion_exterior_antisymmetric():
    ms = fermions(2)
    a, b = FockState.particle(ms, 0), FockState.particle(ms, 1)
    assert exterior_product(a, b) == -exterior_product(b, a)


def test_interior_examples():
    ms = fermions(2)
    m1, m2 = FockState.particle(ms, 0), FockState.particle(ms, 1)
    vac = FockState.vacuum(ms)
    assert interior_product(m1, m1) == vac
    both = exterior_product(m1, m2)
    assert interior_product(m1, both) == m2
    assert interior_product(m2, both) == -m1
    assert interior_product(m1, vac).is_zero()
    assert pairing(both, both) == GQ(-1) or pairing(both, both) == GQ(1)


def test_emit_on_vacuum():
    ms = fermions(2)
    assert apply(ladder("emit", {1: 1}, ms), FockState.vacuum(ms)) == FockState.particle(ms, 1)


def test_number_operator_examples():
    ms = fermions(1)
    N = emit(ms, 0) * absorb(ms, 0)
    one = FockState.particle(ms, 0)
    assert apply(N, one) == one
    assert apply(N, FockState.vacuum(ms)).is_zero()
    assert apply(FockOperator.identity(ms), one) == one


def test_normal_order_fermion_examples():
    ms = fermions(1)
    a, ad = absorb(ms, 0), emit(ms, 0)
    number = normal_order([ad, a])
    assert normal_order([a, ad], "wick") == FockOperator.identity(ms) - number
    assert normal_order([a, ad], "modified") == -number
    assert normal_order([ad, a], "modified") == number


def test_normal_order_rejects_unknown_mode():
    ms = fermions(1)
    with pytest.raises(ValueError):
        normal_order([emit(ms, 0)], "bogus")


def test_boson_overflow_flag():
    ms = bosons(1)
    st = FockState(ms, {(2,): 1}, n_max=2)
    out = apply(emit(ms, 0), st)
    assert out.is_zero() and out.overflow


def test_canonical_relations_mixed():
    ms = ModeSet(range(2), [1, 1], [BOSON, FERMION])
    for m in range(len(ms)):
        for n in range(len(ms)):
            br = superbracket(absorb(ms, m), emit(ms, n))
            assert br == FockOperator.identity(ms, 1 if m == n else 0)
            assert superbracket(absorb(ms, m), absorb(ms, n)).is_zero()


def _numpy_ladder(n_max):
    a = np.zeros((n_max + 1, n_max + 1))
    for n in range(1, n_max + 1):
        a[n - 1, n] = np.sqrt(n)
    return a


def test_single_site_boson_commutator_against_numpy():
    n_max = 4
    ms, phi, pi = charge_model(1, [[0]], BOSON)
    basis = fock_basis(ms, n_max)
    cols = guarded_columns(ms, n_max, 2, basis)
    ours = bracket_matrix(phi[(0, 0)], pi[(0, 0)], ms, n_max, basis, cols)
    a = _numpy_ladder(n_max)
    dense = a @ (1j * a.T) - (1j * a.T) @ a
    for j in cols:
        n = basis[j][0]
        assert n <= 2
        assert ours.entries.get((j, j)) == GQ(0, 1)
        assert dense[n, n] == pytest.approx(1j)


def test_number_operator_matches_numpy_spectrum():
    ms = bosons(1)
    N = truncated_matrix(emit(ms, 0) * absorb(ms, 0), ms, 4)
    a = _numpy_ladder(4)
    ref = np.diag(a.T @ a)
    basis = fock_basis(ms, 4)
    for j, occ in enumerate(basis):
        assert N.entries.get((j, j), GQ(0)).to_complex() == pytest.approx(ref[occ[0]])


def test_axiom_suite():
    checks = check_fock_axioms(random.Random(1), 10)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_normal_order_suite():
    checks = check_normal_order(random.Random(2), 10)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_surd_rule():
    rules = (8, 12)
    s = Surd.symbol(0, rules)
    assert s * s * s * s == 8
    assert s * inverse_symbol(0, rules) == 1
    assert Surd.symbol(1, rules) * s != s * s


@pytest.mark.parametrize("N", [2, 3, 4, 6])
def test_lattice_modes_orthogonal(N):
    fs = lattice_modes(N)
    assert len(fs) == N
    for i in range(N):
        for j in range(i + 1, N):
            assert sum(a * b for a, b in zip(fs[i][0], fs[j][0])) == 0


def test_lattice_rejects_other_sizes():
    with pytest.raises(ValueError):
        lattice_modes(5)


@pytest.mark.parametrize("stats", [FERMION, BOSON])
@pytest.mark.parametrize("N", [2, 3])
def test_free_field(stats, N):
    checks = free_field_check(N, 1, stats)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


@pytest.mark.parametrize("stats", [FERMION, BOSON])
def test_charge_generates_rotation(stats):
    checks = charge_commutator_check(2, [[0, -1], [1, 0]], stats)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_zero_charge_commutes():
    checks = charge_commutator_check(2, [[0]], BOSON)
    assert all(c.passed for c in checks)
