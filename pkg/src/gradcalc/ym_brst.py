"""Yang-Mills theory with Faddeev-Popov ghosts and its BRST symmetry.

Field content (grade in brackets): fermion psi^{alpha i} (1), Dirac adjoint
psibar_{alpha i} (1), gauge field A_a^I (0), ghost omega^I (1), anti-ghost
varpi_I (1), Nakanishi-Lautrup field n^I (0).  Lie-algebra indices are moved
with delta_IJ, which is invariant for an orthonormal frame.

Conventions fixed here:

* ``F^I_ac = d_c A^I_a - d_a A^I_c + c^I_JH A^J_a A^H_c``; with the covariant
  derivative ``d - A`` on fermions this makes F transform covariantly.
* In the formal background mode the metric enters through the free symbols
  ``g[a,b]`` (inverse metric, a <= b) and ``sqrtg``.  The divergence term is
  only ever used in the combination ``f^I sqrtg = d_a(g^ab sqrtg A^I_b)``.
* Fermion terms need the constant Minkowski background (flat spin connection).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import product as iproduct
from typing import Iterable, Sequence

from .core import GQ, Check, parse_gq
from .jetring import (
    JET,
    THETA,
    JetModel,
    JetPolynomial,
    const,
    mul,
    radical,
    random_polynomial,
    theta,
    total_derivative,
)
from .varcalc import (
    BasicForm,
    LagrangianDensity,
    NoetherError,
    VerticalField,
    contract_el,
    d_H,
    delta,
    euler_lagrange,
    momentum,
    noether_current,
    vert_bracket,
)

SECTORS = ("fermion", "gauge", "ghost")
HALF = GQ(Fraction(1, 2))


# --------------------------------------------------------------------------
# small matrix helpers (entries: GQ or constant JetPolynomial)
# --------------------------------------------------------------------------

def _zero_like(x):
    return JetPolynomial({}, None) if isinstance(x, JetPolynomial) else GQ(0)


def mat_mul(X, Y):
    n, k, p = len(X), len(Y), len(Y[0])
    out = []
    for r in range(n):
        row = []
        for c in range(p):
            acc = _zero_like(X[0][0])
            for t in range(k):
                acc = acc + X[r][t] * Y[t][c]
            row.append(acc)
        out.append(row)
    return out


def mat_add(X, Y, sign=1):
    return [[x + y if sign == 1 else x - y for x, y in zip(rx, ry)] for rx, ry in zip(X, Y)]


def mat_scale(X, s):
    return [[x * s for x in row] for row in X]


def mat_dagger(X):
    def cj(x):
        return x.conj_coefficients() if isinstance(x, JetPolynomial) else x.conj()
    return [[cj(X[r][c]) for r in range(len(X))] for c in range(len(X[0]))]


def identity(n, one=None):
    one = GQ(1) if one is None else one
    zero = _zero_like(one)
    return [[one if r == c else zero for c in range(n)] for r in range(n)]


def _is_zero(x) -> bool:
    return x.is_zero()


def mat_is_zero(X) -> bool:
    return all(_is_zero(x) for row in X for x in row)


def mat_eq(X, Y) -> bool:
    return mat_is_zero(mat_add(X, Y, -1))


def trace(X):
    acc = _zero_like(X[0][0])
    for k in range(len(X)):
        acc = acc + X[k][k]
    return acc


def det(X):
    """Laplace expansion; only ring operations."""
    n = len(X)
    if n == 1:
        return X[0][0]
    if n == 2:
        return X[0][0] * X[1][1] - X[0][1] * X[1][0]
    acc = _zero_like(X[0][0])
    for c in range(n):
        if _is_zero(X[0][c]):
            continue
        minor = [row[:c] + row[c + 1:] for row in X[1:]]
        term = X[0][c] * det(minor)
        acc = acc + term if c % 2 == 0 else acc - term
    return acc


def rank(X) -> int:
    """Largest r with a nonzero r x r minor (division-free)."""
    from itertools import combinations

    n, p = len(X), len(X[0])
    for r in range(min(n, p), 0, -1):
        for rows in combinations(range(n), r):
            for cols in combinations(range(p), r):
                if not _is_zero(det([[X[i][j] for j in cols] for i in rows])):
                    return r
    return 0


# --------------------------------------------------------------------------
# Lie-algebra data
# --------------------------------------------------------------------------

def parse_constant(entry) -> JetPolynomial:
    """Model-free constant from ``{"re","im","sqrt3"}`` or a string like ``"-i/2*sqrt3"``."""
    if isinstance(entry, JetPolynomial):
        return entry
    if isinstance(entry, dict):
        val = GQ(Fraction(str(entry.get("re", 0))), Fraction(str(entry.get("im", 0))))
        out = const(val)
        if int(entry.get("sqrt3", 0)) % 2:
            out = out * radical("sqrt3")
        return out
    if isinstance(entry, (int, Fraction, GQ)):
        return const(entry)
    if isinstance(entry, float):
        return const(Fraction(str(entry)))
    s = str(entry).replace(" ", "")
    has_root = "sqrt3" in s
    s = s.replace("*sqrt3", "").replace("sqrt3*", "").replace("sqrt3", "1")
    out = const(parse_gq(s))
    return out * radical("sqrt3") if has_root else out


@dataclass
class LieAlgebraData:
    name: str
    dim: int
    rep_dim: int
    c: dict  # (I, J, K) -> constant polynomial, nonzero entries only
    l: list  # l[I][i][j] -> constant polynomial
    orthonormal: bool = True

    def __post_init__(self):
        self.c = {k: v for k, v in self.c.items() if not v.is_zero()}
        by_first: dict = {}
        for (I, J, K), v in sorted(self.c.items()):
            by_first.setdefault(I, []).append((J, K, v))
        self._by_first = by_first

    @property
    def abelian(self) -> bool:
        return not self.c

    def sc(self, I, J, K) -> JetPolynomial:
        return self.c.get((I, J, K), const(0))

    def terms_for(self, I) -> list:
        """Nonzero (J, K, c^I_JK)."""
        return self._by_first.get(I, [])

    def flipped(self, I, J, K) -> "LieAlgebraData":
        """Copy with the sign of one structure constant flipped (for negative tests)."""
        c = dict(self.c)
        c[(I, J, K)] = -c.get((I, J, K), const(0))
        return LieAlgebraData(self.name + "-flipped", self.dim, self.rep_dim, c, self.l, self.orthonormal)


def u1() -> LieAlgebraData:
    return LieAlgebraData("u1", 1, 1, {}, [[[const(GQ(0, -1))]]])


def su2() -> LieAlgebraData:
    half_i = GQ(0, Fraction(-1, 2))
    sigma = [
        [[0, 1], [1, 0]],
        [[0, GQ(0, -1)], [GQ(0, 1), 0]],
        [[1, 0], [0, -1]],
    ]
    l = [[[const(half_i * x) for x in row] for row in s] for s in sigma]
    c = {}
    for I, J, K in iproduct(range(3), repeat=3):
        e = _levi_civita(I, J, K)
        if e:
            c[(I, J, K)] = const(e)
    return LieAlgebraData("su2", 3, 2, c, l)


def _levi_civita(*idx) -> int:
    if len(set(idx)) != len(idx):
        return 0
    inv = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx)) if idx[a] > idx[b])
    return -1 if inv % 2 else 1


def lie_from_dict(d: dict, name: str = "inline") -> LieAlgebraData:
    l = [[[parse_constant(e) for e in row] for row in M] for M in d["rep_matrices"]]
    dim = int(d.get("dim", len(l)))
    rep_dim = int(d.get("rep_dim", len(l[0]) if l else 1))
    if len(l) != dim:
        raise ValueError(f"expected {dim} representation matrices, got {len(l)}")
    for M in l:
        if len(M) != rep_dim or any(len(r) != rep_dim for r in M):
            raise ValueError("representation matrices have inconsistent sizes")
    c = {}
    for entry in d.get("structure_constants", []):
        I, J, K, val = entry
        for x in (I, J, K):
            if not 0 <= int(x) < dim:
                raise ValueError(f"structure constant index {x} out of range")
        key = (int(I), int(J), int(K))
        c[key] = c.get(key, const(0)) + parse_constant(val)
    return LieAlgebraData(d.get("name", name), dim, rep_dim, c, l, bool(d.get("orthonormal", True)))


def su3() -> LieAlgebraData:
    text = resources.files("gradcalc").joinpath("data/su3.json").read_text()
    return lie_from_dict(json.loads(text), "su3")


GROUPS = {"u1": u1, "su2": su2, "su3": su3}


def validate_lie_algebra(data: LieAlgebraData) -> list[Check]:
    """Antisymmetry, Jacobi, bracket-representation consistency, anti-Hermiticity."""
    n = data.dim
    out = []

    bad = next(((I, J, K) for I, J, K in iproduct(range(n), repeat=3)
                if not (data.sc(I, J, K) + data.sc(I, K, J)).is_zero()), None)
    out.append(Check("lie.antisymmetry", bad is None,
                     "" if bad is None else f"c^{bad[0]}_{{{bad[1]}{bad[2]}}} + c^{bad[0]}_{{{bad[2]}{bad[1]}}} != 0"))

    bad = None
    for J, K, H in iproduct(range(n), repeat=3):
        for I in range(n):
            acc = const(0)
            for L in range(n):
                acc = acc + data.sc(L, J, K) * data.sc(I, H, L)
                acc = acc + data.sc(L, K, H) * data.sc(I, J, L)
                acc = acc + data.sc(L, H, J) * data.sc(I, K, L)
            if not acc.is_zero():
                bad = (J, K, H, I, acc)
                break
        if bad:
            break
    out.append(Check("lie.jacobi", bad is None,
                     "" if bad is None else
                     f"triple (J,K,H)=({bad[0]},{bad[1]},{bad[2]}), component I={bad[3]}: {bad[4].to_text()}"))

    bad = None
    for J, K in iproduct(range(n), repeat=2):
        lhs = mat_add(mat_mul(data.l[J], data.l[K]), mat_mul(data.l[K], data.l[J]), -1)
        rhs = [[const(0) for _ in range(data.rep_dim)] for _ in range(data.rep_dim)]
        for I in range(n):
            s = data.sc(I, J, K)
            if not s.is_zero():
                rhs = mat_add(rhs, mat_scale(data.l[I], s))
        if not mat_eq(lhs, rhs):
            bad = (J, K)
            break
    out.append(Check("lie.representation", bad is None,
                     "" if bad is None else f"[l_{bad[0]}, l_{bad[1]}] != c^I_{{{bad[0]}{bad[1]}}} l_I"))

    bad = next((I for I in range(n) if not mat_eq(mat_dagger(data.l[I]), mat_scale(data.l[I], -1))), None)
    out.append(Check("lie.anti_hermitian", bad is None, "" if bad is None else f"l_{bad} is not anti-Hermitian"))

    if not data.abelian:
        bad = next((I for I in range(n) if not trace(data.l[I]).is_zero()), None)
        out.append(Check("lie.traceless", bad is None, "" if bad is None else f"tr l_{bad} != 0"))
    return out


# --------------------------------------------------------------------------
# gamma matrices
# --------------------------------------------------------------------------

def minkowski(m: int) -> list[int]:
    return [1] + [-1] * (m - 1)


def gamma_matrices(m: int = 4) -> list:
    """Dirac-basis gamma^a (upper index); gamma^0 Hermitian, spatial ones anti-Hermitian."""
    i, z, o = GQ(0, 1), GQ(0), GQ(1)
    if m == 4:
        sig = [
            [[z, o], [o, z]],
            [[z, -i], [i, z]],
            [[o, z], [z, -o]],
        ]
        g0 = [[o, z, z, z], [z, o, z, z], [z, z, -o, z], [z, z, z, -o]]
        out = [g0]
        for s in sig:
            M = [[z] * 4 for _ in range(4)]
            for r in range(2):
                for c in range(2):
                    M[r][c + 2] = s[r][c]
                    M[r + 2][c] = -s[r][c]
            out.append(M)
        return out
    if m == 2:
        return [[[o, z], [z, -o]], [[z, o], [-o, z]]]
    raise ValueError(f"gamma matrices are provided for m = 2 and m = 4, not {m}")


def check_clifford(gammas, metric) -> Check:
    n = len(gammas[0])
    for a, b in iproduct(range(len(gammas)), repeat=2):
        anti = mat_add(mat_mul(gammas[a], gammas[b]), mat_mul(gammas[b], gammas[a]))
        target = mat_scale(identity(n), GQ(2 * metric[a] if a == b else 0))
        if not mat_eq(anti, target):
            return Check("gamma.clifford", False, f"{{gamma^{a}, gamma^{b}}} != 2 g^{a}{b}")
    return Check("gamma.clifford", True)


# --------------------------------------------------------------------------
# field model
# --------------------------------------------------------------------------

class FieldModel:
    """Sector declaration, Lie data, gamma matrices, metric mode and gauge parameter."""

    def __init__(self, lie: LieAlgebraData, dim: int = 4, metric_mode: str = "constant",
                 xi=1, sectors: Iterable[str] = SECTORS, fermion_mass=1):
        sectors = frozenset(sectors)
        unknown = sectors - set(SECTORS)
        if unknown:
            raise ValueError(f"unknown sectors {sorted(unknown)}")
        if "ghost" in sectors and "gauge" not in sectors:
            raise ValueError("the ghost sector requires the gauge sector")
        if dim < 2:
            raise ValueError("base dimension must be at least 2")
        if "fermion" in sectors and dim not in (2, 4):
            raise ValueError(f"fermions are supported for m = 2 or 4, not {dim}")
        if metric_mode not in ("constant", "formal"):
            raise ValueError("metric_mode must be 'constant' or 'formal'")
        self.lie = lie
        self.dim = dim
        self.metric_mode = metric_mode
        self.xi = Fraction(str(xi)) if isinstance(xi, float) else Fraction(xi)
        self.sectors = sectors
        self.fermion_mass = Fraction(str(fermion_mass)) if isinstance(fermion_mass, float) else Fraction(fermion_mass)
        self.gammas = gamma_matrices(dim) if "fermion" in sectors else []
        self.eta = minkowski(dim)

        coords = []
        self.i_psi, self.i_psibar, self.i_A = {}, {}, {}
        self.i_omega, self.i_varpi, self.i_n = {}, {}, {}
        nspin = len(self.gammas[0]) if self.gammas else 0
        self.nspin = nspin

        def add(table, key, name, grade):
            table[key] = len(coords)
            coords.append((name, grade))

        if "fermion" in sectors:
            for al in range(nspin):
                for i in range(lie.rep_dim):
                    add(self.i_psi, (al, i), f"psi[{al},{i}]", 1)
            for al in range(nspin):
                for i in range(lie.rep_dim):
                    add(self.i_psibar, (al, i), f"psibar[{al},{i}]", 1)
        if "gauge" in sectors:
            for a in range(dim):
                for I in range(lie.dim):
                    add(self.i_A, (a, I), f"A[{a},{I}]", 0)
        if "ghost" in sectors:
            for I in range(lie.dim):
                add(self.i_omega, I, f"omega[{I}]", 1)
            for I in range(lie.dim):
                add(self.i_varpi, I, f"varpi[{I}]", 1)
            for I in range(lie.dim):
                add(self.i_n, I, f"n[{I}]", 0)
        self.jm = JetModel(tuple(coords), dim, metric_mode)
        self._F: dict = {}

    def variant(self, metric_mode: str | None = None, sectors: Iterable[str] | None = None) -> "FieldModel":
        return FieldModel(self.lie, self.dim, metric_mode or self.metric_mode, self.xi,
                          self.sectors if sectors is None else sectors, self.fermion_mass)

    def has(self, sector: str) -> bool:
        return sector in self.sectors

    # ---- generators
    def psi(self, al, i, A=()):
        return self.jm.jet(self.i_psi[(al, i)], A)

    def psibar(self, al, i, A=()):
        return self.jm.jet(self.i_psibar[(al, i)], A)

    def A(self, a, I, D=()):
        return self.jm.jet(self.i_A[(a, I)], D)

    def omega(self, I, D=()):
        return self.jm.jet(self.i_omega[I], D)

    def varpi(self, I, D=()):
        return self.jm.jet(self.i_varpi[I], D)

    def n(self, I, D=()):
        return self.jm.jet(self.i_n[I], D)

    def ginv(self, a, b) -> JetPolynomial:
        """g^{ab}: eta in constant mode, a formal symbol otherwise."""
        if self.metric_mode == "constant":
            return self.jm.const(self.eta[a] if a == b else 0)
        a, b = min(a, b), max(a, b)
        return self.jm.background_symbol(f"g[{a},{b}]")

    def sqrtg(self) -> JetPolynomial:
        if self.metric_mode == "constant":
            return self.jm.const(1)
        return self.jm.background_symbol("sqrtg")

    def zero(self) -> JetPolynomial:
        return self.jm.zero()

    # ---- building blocks
    def cov_omega(self, b, I) -> JetPolynomial:
        """nabla_b omega^I = omega^I_{,b} + c^I_JH omega^J A^H_b."""
        out = self.omega(I, (b,))
        for J, H, c in self.lie.terms_for(I):
            out = out + c * mul(self.omega(J), self.A(b, H))
        return out

    def F(self, I, a, c) -> JetPolynomial:
        key = (I, a, c)
        if key in self._F:
            return self._F[key]
        if a == c:
            val = self.zero()
        else:
            val = self.A(a, I, (c,)) - self.A(c, I, (a,))
            for J, H, s in self.lie.terms_for(I):
                val = val + s * mul(self.A(a, J), self.A(c, H))
        self._F[key] = val
        return val

    def F_up(self, I, a, b) -> JetPolynomial:
        """F^{ab} = g^{ap} g^{bq} F_pq."""
        out = self.zero()
        m = self.dim
        for p in range(m):
            gap = self.ginv(a, p)
            if gap.is_zero():
                continue
            for q in range(m):
                if p == q:
                    continue
                gbq = self.ginv(b, q)
                if gbq.is_zero():
                    continue
                out = out + mul(mul(gap, gbq), self.F(I, p, q))
        return out

    def f_sqrtg(self, I) -> JetPolynomial:
        """f^I sqrtg = d_a(g^ab sqrtg A^I_b)."""
        out = self.zero()
        s = self.sqrtg()
        for a in range(self.dim):
            inner = self.zero()
            for b in range(self.dim):
                gab = self.ginv(a, b)
                if not gab.is_zero():
                    inner = inner + mul(mul(gab, s), self.A(b, I))
            out = out + total_derivative(inner, a)
        return out

    def rep(self, I, i, j) -> JetPolynomial:
        return self.lie.l[I][i][j]

    def gamma(self, a, al, be) -> GQ:
        return self.gammas[a][al][be]

    # ---- Lagrangian pieces
    def _require_fermion_background(self):
        if self.metric_mode != "constant":
            raise ValueError("fermion terms need the constant Minkowski background")

    def ell_psi(self) -> JetPolynomial:
        if not self.has("fermion"):
            return self.zero()
        self._require_fermion_background()
        lie, m = self.lie, self.dim
        gauge = self.has("gauge")
        half_i = GQ(0, Fraction(1, 2))
        out = self.zero()
        for a in range(m):
            for al, be in iproduct(range(self.nspin), repeat=2):
                g = self.gamma(a, al, be)
                if g.is_zero():
                    continue
                for i in range(lie.rep_dim):
                    # psibar_{al i} gamma^a (psi^{be i}_{,a} - (A_a psi)^{be i})
                    nab = self.psi(be, i, (a,))
                    nabbar = self.psibar(al, i, (a,))
                    if gauge:
                        for I in range(lie.dim):
                            for j in range(lie.rep_dim):
                                r = self.rep(I, i, j)
                                if not r.is_zero():
                                    nab = nab - r * mul(self.A(a, I), self.psi(be, j))
                                r2 = self.rep(I, j, i)
                                if not r2.is_zero():
                                    nabbar = nabbar + r2 * mul(self.A(a, I), self.psibar(al, j))
                    out = out + mul(self.psibar(al, i), nab).scale(half_i * g)
                    out = out - mul(nabbar, self.psi(be, i)).scale(half_i * g)
        for al in range(self.nspin):
            for i in range(lie.rep_dim):
                out = out - mul(self.psibar(al, i), self.psi(al, i)).scale(self.fermion_mass)
        return out

    def ell_A(self) -> JetPolynomial:
        if not self.has("gauge"):
            return self.zero()
        out = self.zero()
        m = self.dim
        for I in range(self.lie.dim):
            for a in range(m):
                for c in range(m):
                    if a == c:
                        continue
                    out = out + mul(self.F(I, a, c), self.F_up(I, a, c))
        return mul(out, self.sqrtg()).scale(GQ(Fraction(-1, 4)))

    def ell_ghost(self) -> JetPolynomial:
        if not self.has("ghost"):
            return self.zero()
        s = self.sqrtg()
        out = self.zero()
        for I in range(self.lie.dim):
            for a in range(self.dim):
                for b in range(self.dim):
                    gab = self.ginv(a, b)
                    if gab.is_zero():
                        continue
                    out = out + mul(mul(gab, self.varpi(I, (a,))), mul(self.cov_omega(b, I), s))
            out = out + mul(self.n(I), self.f_sqrtg(I))
            out = out + mul(mul(self.n(I), self.n(I)), s).scale(HALF * self.xi)
        return out

    def lagrangian(self) -> LagrangianDensity:
        return LagrangianDensity(self.ell_psi() + self.ell_A() + self.ell_ghost(), 1, self.jm)

    # ---- BRST data
    def s_table(self) -> dict:
        """S y for every fiber coordinate y (sector index -> polynomial)."""
        lie = self.lie
        tab = {}
        if self.has("fermion") and self.has("ghost"):
            for (al, i), k in self.i_psi.items():
                acc = self.zero()
                for I in range(lie.dim):
                    for j in range(lie.rep_dim):
                        r = self.rep(I, i, j)
                        if not r.is_zero():
                            acc = acc + r * mul(self.omega(I), self.psi(al, j))
                tab[k] = acc
            for (al, i), k in self.i_psibar.items():
                acc = self.zero()
                for I in range(lie.dim):
                    for j in range(lie.rep_dim):
                        r = self.rep(I, j, i)
                        if not r.is_zero():
                            acc = acc + r * mul(self.psibar(al, j), self.omega(I))
                tab[k] = acc
        if self.has("ghost"):
            for (a, I), k in self.i_A.items():
                tab[k] = self.cov_omega(a, I)
            for I, k in self.i_omega.items():
                acc = self.zero()
                for J, H, c in lie.terms_for(I):
                    acc = acc + c * mul(self.omega(J), self.omega(H))
                tab[k] = acc.scale(HALF)
            for I, k in self.i_varpi.items():
                tab[k] = self.n(I)
            for I, k in self.i_n.items():
                tab[k] = self.zero()
        return tab

    def current_display(self, with_fermion: bool = True) -> list[JetPolynomial]:
        """J^a = (-i<psibar gamma^a omega psi> + <F^ab, nabla_b omega>) sqrtg + J_ghost^a."""
        out = []
        s = self.sqrtg()
        lie = self.lie
        ghost = self.ghost_current_display()
        for a in range(self.dim):
            acc = self.zero()
            if with_fermion and self.has("fermion"):
                ferm = self.zero()
                for al, be in iproduct(range(self.nspin), repeat=2):
                    g = self.gamma(a, al, be)
                    if g.is_zero():
                        continue
                    for I in range(lie.dim):
                        for i in range(lie.rep_dim):
                            for j in range(lie.rep_dim):
                                r = self.rep(I, i, j)
                                if r.is_zero():
                                    continue
                                term = mul(mul(self.psibar(al, i), self.omega(I)), self.psi(be, j))
                                ferm = ferm + (r * term).scale(g)
                acc = acc + ferm.scale(GQ(0, -1))
            if self.has("gauge") and self.has("ghost"):
                for I in range(lie.dim):
                    for b in range(self.dim):
                        if a != b:
                            acc = acc + mul(self.F_up(I, a, b), self.cov_omega(b, I))
            out.append(mul(acc, s) + ghost[a])
        return out

    def ghost_current_display(self) -> list[JetPolynomial]:
        """J_ghost^a = g^ab (n_I nabla_b omega^I - 1/2 varpi_{I,b} c^I_JH omega^J omega^H) sqrtg."""
        if not self.has("ghost"):
            return [self.zero() for _ in range(self.dim)]
        s = self.sqrtg()
        out = []
        for a in range(self.dim):
            acc = self.zero()
            for b in range(self.dim):
                gab = self.ginv(a, b)
                if gab.is_zero():
                    continue
                inner = self.zero()
                for I in range(self.lie.dim):
                    inner = inner + mul(self.n(I), self.cov_omega(b, I))
                    for J, H, c in self.lie.terms_for(I):
                        inner = inner - (c * mul(self.varpi(I, (b,)), mul(self.omega(J), self.omega(H)))).scale(HALF)
                acc = acc + mul(gab, inner)
            out.append(mul(acc, s))
        return out

    # ---- BRST field and transformation
    def s_jet(self, i: int, A: tuple) -> JetPolynomial:
        """S(y^i_A) = d_A(S y^i), cached."""
        cache = self.__dict__.setdefault("_s_cache", {})
        key = (i, A)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if not A:
            tab = self.__dict__.get("_s_tab")
            if tab is None:
                tab = self._s_tab = self.s_table()
            val = tab.get(i, self.zero())
        else:
            val = total_derivative(self.s_jet(i, A[:-1]), A[-1])
        cache[key] = val
        return val


def brst_field(fm: FieldModel) -> VerticalField:
    """v = theta * S y^i d/dy^i."""
    th = theta(fm.jm)
    return VerticalField(fm.jm, {k: mul(th, f) for k, f in fm.s_table().items()})


def S(fm: FieldModel, expr):
    """BRST transformation: odd left antiderivation, commuting with every d_a."""
    if isinstance(expr, BasicForm):
        return BasicForm(expr.model, expr.degree, {T: S(fm, f) for T, f in expr.comps.items()}, expr.order + 1)
    if isinstance(expr, LagrangianDensity):
        return S(fm, expr.form())
    if expr.has_theta():
        raise ValueError("S acts on theta-free expressions")
    acc: dict = {}
    model = fm.jm
    for mono, c in expr.terms.items():
        odd = 0
        for p, g in enumerate(mono):
            if g[0] == JET:
                Sg = fm.s_jet(g[1], g[2])
                if Sg.terms:
                    pre = JetPolynomial._raw({mono[:p]: -c if odd & 1 else c}, model)
                    suf = JetPolynomial._raw({mono[p + 1:]: GQ(1)}, model)
                    for m2, c2 in mul(mul(pre, Sg), suf).terms.items():
                        acc[m2] = acc[m2] + c2 if m2 in acc else c2
            odd += g[3]
    return JetPolynomial(acc, model)


# --------------------------------------------------------------------------
# identity checks
# --------------------------------------------------------------------------

WITNESS_LIMIT = 600


def _text(x) -> str:
    if isinstance(x, (list, tuple)):
        t = "; ".join(f"[{k}] {p.to_text()}" for k, p in enumerate(x) if not p.is_zero())
    elif isinstance(x, dict):
        t = "; ".join(f"[{k}] {p.to_text()}" for k, p in sorted(x.items()) if not p.is_zero())
    else:
        t = x.to_text()
    return t if len(t) <= WITNESS_LIMIT else t[:WITNESS_LIMIT] + " ..."


def _zero_check(name: str, residual) -> Check:
    ok = residual.is_zero()
    return Check(name, ok, "" if ok else "residual: " + _text(residual))


def _fiber_generators(fm: FieldModel, max_order: int):
    from .jetring import multi_indices

    for i in range(len(fm.jm.coords)):
        for A in multi_indices(fm.dim, max_order):
            yield i, A


def check_nilpotent(fm: FieldModel, rng=None, n_random: int = 50, max_order: int = 1,
                    max_degree: int = 3) -> list[Check]:
    """S^2 = 0 on every fiber coordinate (and first jets) and on random polynomials."""
    bad = None
    for i, A in _fiber_generators(fm, max_order):
        r = S(fm, fm.s_jet(i, A))
        if not r.is_zero():
            bad = (fm.jm.gen_name(fm.jm.jet_gen(i, A)), r)
            break
    out = [Check("nilpotency.coordinates", bad is None,
                 "" if bad is None else f"S^2 {bad[0]} = {_text(bad[1])}")]
    if rng is not None and n_random:
        bad = None
        for _ in range(n_random):
            f = random_polynomial(fm.jm, rng, 3, max_degree, max_order)
            r = S(fm, S(fm, f))
            if not r.is_zero():
                bad = (f, r)
                break
        out.append(Check("nilpotency.random", bad is None,
                         "" if bad is None else f"f = {_text(bad[0])}; S^2 f = {_text(bad[1])}"))
    return out


def check_theta_S(fm: FieldModel, rng, n_random: int = 50, max_order: int = 2,
                  max_degree: int = 3) -> list[Check]:
    """theta S f = delta[v] f on random polynomials (ties the two implementations)."""
    v = brst_field(fm)
    th = theta(fm.jm)
    bad = None
    bgs = ("sqrtg", "g[0,1]") if fm.metric_mode == "formal" else ()
    for _ in range(n_random):
        f = random_polynomial(fm.jm, rng, 3, max_degree, max_order, backgrounds=bgs)
        r = mul(th, S(fm, f)) - delta(v, f)
        if not r.is_zero():
            bad = (f, r)
            break
    return [Check("theta_S.delta", bad is None,
                  "" if bad is None else f"f = {_text(bad[0])}; residual {_text(bad[1])}")]


def ghost_K(fm: FieldModel) -> BasicForm:
    """K = varpi_I (f^I + 1/2 xi n^I) sqrtg d^m x."""
    out = fm.zero()
    for I in range(fm.lie.dim):
        inner = fm.f_sqrtg(I) + mul(fm.n(I), fm.sqrtg()).scale(HALF * fm.xi)
        out = out + mul(fm.varpi(I), inner)
    return BasicForm.density(out, fm.jm)


def ghost_M(fm: FieldModel) -> BasicForm:
    """M = <varpi, *nabla omega> = g^ab sqrtg varpi_I nabla_b omega^I dx_a."""
    J = []
    for a in range(fm.dim):
        acc = fm.zero()
        for b in range(fm.dim):
            gab = fm.ginv(a, b)
            if gab.is_zero():
                continue
            for I in range(fm.lie.dim):
                acc = acc + mul(gab, mul(fm.varpi(I), fm.cov_omega(b, I)))
        J.append(mul(acc, fm.sqrtg()))
    return BasicForm.current(J, fm.jm)


def ghost_N(fm: FieldModel) -> BasicForm:
    """N = <n, *nabla omega> = g^ab sqrtg n_I nabla_b omega^I dx_a."""
    J = []
    for a in range(fm.dim):
        acc = fm.zero()
        for b in range(fm.dim):
            gab = fm.ginv(a, b)
            if gab.is_zero():
                continue
            for I in range(fm.lie.dim):
                acc = acc + mul(gab, mul(fm.n(I), fm.cov_omega(b, I)))
        J.append(mul(acc, fm.sqrtg()))
    return BasicForm.current(J, fm.jm)


def ghost_lagrangian(fm: FieldModel) -> LagrangianDensity:
    return LagrangianDensity(fm.ell_ghost(), 1, fm.jm)


def ghost_exactness(fm: FieldModel):
    """L_ghost = S K + d_H M and delta[v] L_ghost = theta d_H N; returns (K, M, checks)."""
    if not fm.has("ghost"):
        raise ValueError("ghost exactness needs the ghost sector")
    K, M = ghost_K(fm), ghost_M(fm)
    L = ghost_lagrangian(fm).form()
    out = [_zero_check("ghost.exactness", L - S(fm, K) - d_H(M))]
    v = brst_field(fm)
    N = ghost_N(fm).lmul(theta(fm.jm))
    out.append(_zero_check("ghost.delta_closed", delta(v, L) - d_H(N)))
    return K, M, out


def gauge_invariance(fm: FieldModel) -> list[Check]:
    """delta[v](L_psi + L_A) = 0."""
    v = brst_field(fm)
    ell = fm.ell_psi() + fm.ell_A()
    return [_zero_check("gauge_invariance.matter_gauge", delta(v, ell))]


def _noether(name: str, L, v, N):
    try:
        return noether_current(L, v, N), Check(name, True)
    except NoetherError as exc:
        return None, Check(name, False, f"{exc.args[0]}; residual: {_text(exc.residual)}")


def brst_current(fm: FieldModel):
    """Noether current of the BRST field; returns (J, checks) with J = theta J^a dx_a."""
    L = fm.lagrangian()
    v = brst_field(fm)
    th = theta(fm.jm)
    N = ghost_N(fm).lmul(th) if fm.has("ghost") else BasicForm.zero(fm.jm, fm.dim - 1)
    J, chk = _noether("brst_current.certificate", L, v, N)
    out = [chk]
    if J is None:
        return None, out
    display = BasicForm.current(fm.current_display(), fm.jm).lmul(th)
    out.append(_zero_check("brst_current.display", J - display))
    if fm.has("gauge") or fm.has("fermion"):
        # the matter+gauge part is conserved modulo the matter and gauge field equations
        L_m = LagrangianDensity(fm.ell_psi() + fm.ell_A(), 1, fm.jm)
        Jm, chk = _noether("brst_current.matter_gauge_conserved", L_m, v, None)
        out.append(chk)
        if Jm is not None:
            Jd = [a - b for a, b in zip(fm.current_display(), fm.ghost_current_display())]
            out.append(_zero_check("brst_current.matter_gauge_display",
                                   Jm - BasicForm.current(Jd, fm.jm).lmul(th)))
    return J, out


def fp_field(fm: FieldModel) -> VerticalField:
    """v_FP = omega^I d/d omega^I - varpi_I d/d varpi_I."""
    comps = {}
    for I in range(fm.lie.dim):
        comps[fm.i_omega[I]] = fm.omega(I)
        comps[fm.i_varpi[I]] = -fm.varpi(I)
    return VerticalField(fm.jm, comps)


def fp_current_display(fm: FieldModel) -> BasicForm:
    """J_FP^a = g^ab (varpi_{I,b} omega^I + varpi_I nabla_b omega^I) sqrtg."""
    J = []
    for a in range(fm.dim):
        acc = fm.zero()
        for b in range(fm.dim):
            gab = fm.ginv(a, b)
            if gab.is_zero():
                continue
            for I in range(fm.lie.dim):
                acc = acc + mul(gab, mul(fm.varpi(I, (b,)), fm.omega(I)) + mul(fm.varpi(I), fm.cov_omega(b, I)))
        J.append(mul(acc, fm.sqrtg()))
    return BasicForm.current(J, fm.jm)


def fp_noether_current(fm: FieldModel) -> BasicForm:
    """Noether current of v_FP (N = 0); see fp_current for its relation to the display."""
    return noether_current(fm.lagrangian(), fp_field(fm), None)


def fp_current(fm: FieldModel) -> list[Check]:
    if not fm.has("ghost"):
        raise ValueError("the Faddeev-Popov current needs the ghost sector")
    L = fm.lagrangian()
    vfp = fp_field(fm)
    out = [_zero_check("faddeev_popov.invariance", delta(vfp, L.form()))]
    Jfp = fp_current_display(fm)
    rhs = []
    ghost = fm.ghost_current_display()
    for a in range(fm.dim):
        acc = fm.zero()
        for b in range(fm.dim):
            gab = fm.ginv(a, b)
            if gab.is_zero():
                continue
            for I in range(fm.lie.dim):
                acc = acc + mul(gab, mul(fm.n(I, (b,)), fm.omega(I)))
        rhs.append(mul(acc, fm.sqrtg()) + ghost[a])
    out.append(_zero_check("faddeev_popov.S_current", S(fm, Jfp) - BasicForm.current(rhs, fm.jm)))
    v = brst_field(fm)
    br = vert_bracket(vfp, v) - v
    out.append(Check("faddeev_popov.bracket", not br.comps, "" if not br.comps else "residual: " + br.to_text()[:WITNESS_LIMIT]))
    _, chk = _noether("faddeev_popov.noether_certificate", L, vfp, None)
    out.append(chk)
    return out


def second_order_equivalence(fm: FieldModel) -> list[Check]:
    """L' = L - d_H M: delta[v]M = theta N, delta[v]L' = 0, P'-| v_(1) = theta J."""
    if not fm.has("ghost"):
        raise ValueError("second-order equivalence needs the ghost sector")
    th = theta(fm.jm)
    M = ghost_M(fm)
    N = ghost_N(fm)
    v = brst_field(fm)
    out = [_zero_check("second_order.delta_M", delta(v, M) - N.lmul(th))]
    L = fm.lagrangian()
    L2 = LagrangianDensity(L.ell - d_H(M).density_coefficient(), 2, fm.jm)
    out.append(_zero_check("second_order.invariance", delta(v, L2.form())))
    P = momentum(L2).contract(v)
    display = BasicForm.current(fm.current_display(), fm.jm).lmul(th)
    out.append(_zero_check("second_order.current", P - display))
    return out


# --------------------------------------------------------------------------
# momentum space: the curvature-like tensor
# --------------------------------------------------------------------------

def momentum_symbols(lie: LieAlgebraData, m: int = 4):
    """Formal symbols alpha[a,I] and p[a] as background generators of a bare model."""
    jm = JetModel((), m, "formal")
    alpha = {(a, I): jm.background_symbol(f"alpha[{a},{I}]") for a in range(m) for I in range(lie.dim)}
    p = [jm.background_symbol(f"p[{a}]") for a in range(m)]
    return jm, alpha, p


def curvature_like(lie: LieAlgebraData, alpha: dict, p: list) -> dict:
    """rho^I_ab = i (p_a alpha^I_b - p_b alpha^I_a) + c^I_JK alpha^J_a alpha^K_b for a < b."""
    m = len(p)
    out = {}
    for I in range(lie.dim):
        for a in range(m):
            for b in range(a + 1, m):
                val = (mul(p[a], alpha[(b, I)]) - mul(p[b], alpha[(a, I)])).scale(GQ(0, 1))
                for J, K, c in lie.terms_for(I):
                    val = val + c * mul(alpha[(a, J)], alpha[(b, K)])
                out[(I, a, b)] = val
    return out


def curvature_gauge_residual(lie: LieAlgebraData, alpha: dict, p: list, chi: list) -> dict:
    """rho[alpha + p (x) chi] - rho[alpha]; exposed for inspection only."""
    shifted = {(a, I): alpha[(a, I)] + mul(p[a], chi[I]) for (a, I) in alpha}
    r1, r0 = curvature_like(lie, shifted, p), curvature_like(lie, alpha, p)
    return {k: r1[k] - r0[k] for k in r0 if not (r1[k] - r0[k]).is_zero()}


# --------------------------------------------------------------------------
# Dirac projectors
# --------------------------------------------------------------------------

def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def gamma_of(p: Sequence, gammas) -> list:
    """gamma_p = p_a gamma^a with p_a = eta_ab p^b."""
    eta = minkowski(len(p))
    n = len(gammas[0])
    out = [[GQ(0)] * n for _ in range(n)]
    for a, pa in enumerate(p):
        out = mat_add(out, mat_scale(gammas[a], GQ(eta[a] * _q(pa))))
    return out


def dirac_projectors(p: Sequence, mass):
    """P+- = (m +- gamma_p) / 2m for an exactly on-shell momentum with p^0 > 0."""
    p = [_q(x) for x in p]
    mass = _q(mass)
    if mass <= 0:
        raise ValueError("mass must be positive")
    eta = minkowski(len(p))
    norm = sum(eta[a] * p[a] * p[a] for a in range(len(p)))
    if norm != mass * mass:
        raise ValueError(f"momentum is off shell: p^2 = {norm}, m^2 = {mass * mass}")
    if p[0] <= 0:
        raise ValueError("p^0 must be positive")
    gammas = gamma_matrices(len(p))
    gp = gamma_of(p, gammas)
    n = len(gp)
    mI = mat_scale(identity(n), GQ(mass))
    k = GQ(Fraction(1, 2) / mass)
    return mat_scale(mat_add(mI, gp), k), mat_scale(mat_add(mI, gp, -1), k)


def _independent_columns(P, r: int) -> list:
    from itertools import combinations

    n = len(P)
    for cols in combinations(range(len(P[0])), r):
        for rows in combinations(range(n), r):
            if not det([[P[i][j] for j in cols] for i in rows]).is_zero():
                return [[P[i][j] for j in cols] for i in range(n)]
    raise ValueError("no independent columns")


def check_dirac_projectors(p: Sequence, mass) -> list[Check]:
    Pp, Pm = dirac_projectors(p, mass)
    n = len(Pp)
    tag = "p=(" + ",".join(str(_q(x)) for x in p) + f") m={_q(mass)}"
    g0 = gamma_matrices(len(p))[0]

    def chk(name, ok):
        return Check(f"dirac.{name}", ok, "" if ok else tag)

    out = [
        chk("idempotent_plus", mat_eq(mat_mul(Pp, Pp), Pp)),
        chk("idempotent_minus", mat_eq(mat_mul(Pm, Pm), Pm)),
        chk("orthogonal", mat_is_zero(mat_mul(Pp, Pm)) and mat_is_zero(mat_mul(Pm, Pp))),
        chk("complete", mat_eq(mat_add(Pp, Pm), identity(n))),
        chk("rank", rank(Pp) == n // 2 and rank(Pm) == n // 2),
        chk("trace", trace(Pp) == GQ(n // 2) and trace(Pm) == GQ(n // 2)),
        chk("form_orthogonal", mat_is_zero(mat_mul(mat_mul(mat_dagger(Pp), g0), Pm))),
    ]
    sig_ok = True
    for P, sign in ((Pp, 1), (Pm, -1)):
        B = _independent_columns(P, n // 2)
        G = mat_mul(mat_mul(mat_dagger(B), g0), B)
        # Sylvester on sign * G (Hermitian, so leading minors are real)
        minors = [det([row[:k] for row in G[:k]]) for k in range(1, len(G) + 1)]
        for k, d in enumerate(minors, start=1):
            if not d.is_real() or (d.re * sign ** k) <= 0:
                sig_ok = False
    out.append(chk("form_signature", sig_ok))
    return out


def on_shell_momenta(count: int, m: int = 4) -> list[tuple]:
    """Deterministic list of (p, mass) with integer p, p^0 > 0 and p^2 = mass^2 > 0."""
    from math import isqrt

    found = []
    for mass in range(1, 20):
        rng_ = range(-4, 5)
        for spatial in iproduct(rng_, repeat=m - 1):
            e2 = mass * mass + sum(x * x for x in spatial)
            e = isqrt(e2)
            if e * e == e2:
                found.append(((e,) + spatial, mass))
                if len(found) >= count:
                    return found
    return found


# --------------------------------------------------------------------------
# model files
# --------------------------------------------------------------------------

def model_from_dict(d: dict) -> tuple[FieldModel, list[Check]]:
    """Build a FieldModel from the model-file schema; returns the Lie validation report too."""
    group = d.get("group")
    if group is None:
        raise ValueError("model needs a 'group'")
    if isinstance(group, str):
        if group not in GROUPS:
            raise ValueError(f"unknown group {group!r}; expected one of {sorted(GROUPS)} or an inline object")
        lie = GROUPS[group]()
    elif isinstance(group, dict):
        lie = lie_from_dict(group)
    else:
        raise ValueError("group must be a name or an object")
    report = validate_lie_algebra(lie)
    sectors = d.get("sectors_enabled", list(SECTORS))
    fm = FieldModel(lie, int(d.get("dimension", 4)), d.get("metric_mode", "constant"),
                    _q(d.get("xi", 1)), sectors, _q(d.get("fermion_mass", 1)))
    return fm, report
