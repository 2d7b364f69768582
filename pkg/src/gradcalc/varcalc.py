"""Variational calculus on basic (totally horizontal) forms.

Sign conventions used throughout:

* ``d_H`` puts the new ``dx^b`` on the left: ``d_H(a_S dx^S) = d_b a_S dx^b ^ dx^S``.
* ``(m-1)``-forms are written ``J^a dx_a`` with ``dx_a = d/dx^a -| d^m x``, so
  ``d_H(J^a dx_a) = d_a J^a d^m x``.
* Vertical fields act from the left: ``delta[v] f = sum (d_A v^i)(d f / d y^i_A)``
  with the left derivative of :mod:`gradcalc.jetring`.  Contractions with
  momenta and with the Euler-Lagrange covector use the same ordering,
  ``F -| v = v^i F_i`` and ``P^a -| v = v^i P^a_i``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

from .core import GQ
from .jetring import (
    JET,
    Generator,
    JetModel,
    JetPolynomial,
    mul,
    partial,
    random_polynomial,
    total_derivative,
)

__all__ = [
    "BasicForm",
    "VerticalField",
    "LagrangianDensity",
    "Momentum",
    "NoetherError",
    "d_H",
    "prolong",
    "delta",
    "euler_lagrange",
    "contract_el",
    "momentum",
    "noether_current",
    "splitting_residual",
    "vert_bracket",
    "random_form",
    "random_vertical_field",
    "coordinate_form",
    "check_dH_nilpotent",
    "check_dH_delta_commute",
    "check_splitting",
    "check_el_trivial",
    "euler_lagrange_oracle",
]


class NoetherError(ValueError):
    """Raised when a claimed identity fails; ``residual`` holds the witness."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


# --------------------------------------------------------------------------
# forms
# --------------------------------------------------------------------------

class BasicForm:
    """Degree-q horizontal form with components on increasing index tuples."""

    __slots__ = ("model", "degree", "order", "comps")

    def __init__(self, model: JetModel, degree: int, comps: Mapping | None = None, order: int | None = None):
        m = model.dim
        if not 0 <= degree <= m:
            raise ValueError(f"degree {degree} out of range for base dimension {m}")
        self.model = model
        self.degree = degree
        clean = {}
        for T, f in (comps or {}).items():
            T = tuple(T)
            if len(T) != degree or list(T) != sorted(set(T)) or (T and not 0 <= T[0] <= T[-1] < m):
                raise ValueError(f"component index {T} is not an increasing {degree}-tuple")
            if not isinstance(f, JetPolynomial):
                f = JetPolynomial.constant(f, model)
            if f.model is not None and f.model is not model:
                raise ValueError("component belongs to a different field model")
            if f.terms:
                clean[T] = f
        self.comps = clean
        self.order = order if order is not None else max(
            (f.jet_order() for f in clean.values()), default=0)

    # constructors
    @classmethod
    def scalar(cls, f: JetPolynomial, model: JetModel | None = None) -> "BasicForm":
        model = model or f.model
        return cls(model, 0, {(): f})

    @classmethod
    def density(cls, ell: JetPolynomial, model: JetModel | None = None) -> "BasicForm":
        model = model or ell.model
        return cls(model, model.dim, {tuple(range(model.dim)): ell})

    @classmethod
    def current(cls, J: Iterable[JetPolynomial], model: JetModel) -> "BasicForm":
        """Build ``J^a dx_a``."""
        m = model.dim
        comps = {}
        for a, Ja in enumerate(J):
            T = tuple(b for b in range(m) if b != a)
            comps[T] = Ja if a % 2 == 0 else -Ja
        return cls(model, m - 1, comps)

    @classmethod
    def zero(cls, model: JetModel, degree: int) -> "BasicForm":
        return cls(model, degree, {})

    # accessors
    def component(self, T) -> JetPolynomial:
        return self.comps.get(tuple(T), JetPolynomial({}, self.model))

    def density_coefficient(self) -> JetPolynomial:
        if self.degree != self.model.dim:
            raise ValueError("not a top-degree form")
        return self.component(range(self.model.dim))

    def currents(self) -> list[JetPolynomial]:
        """Inverse of :meth:`current`: the J^a of an (m-1)-form."""
        m = self.model.dim
        if self.degree != m - 1:
            raise ValueError("not an (m-1)-form")
        out = []
        for a in range(m):
            c = self.component(tuple(b for b in range(m) if b != a))
            out.append(c if a % 2 == 0 else -c)
        return out

    def is_zero(self) -> bool:
        return not self.comps

    # linear structure
    def _check(self, other: "BasicForm"):
        if other.model is not self.model or other.degree != self.degree:
            raise ValueError("forms have different model or degree")

    def __add__(self, other: "BasicForm") -> "BasicForm":
        self._check(other)
        comps = dict(self.comps)
        for T, f in other.comps.items():
            comps[T] = comps[T] + f if T in comps else f
        return BasicForm(self.model, self.degree, comps, max(self.order, other.order))

    def __neg__(self):
        return BasicForm(self.model, self.degree, {T: -f for T, f in self.comps.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, BasicForm):
            return NotImplemented
        return (other.degree == self.degree
                and set(self.comps) == set(other.comps)
                and all(self.comps[T] == other.comps[T] for T in self.comps))

    def __hash__(self):
        return hash((self.degree, frozenset(self.comps)))

    def lmul(self, f: JetPolynomial) -> "BasicForm":
        """Multiply every component on the left by ``f``."""
        return BasicForm(self.model, self.degree, {T: mul(f, c) for T, c in self.comps.items()})

    def map(self, fn) -> "BasicForm":
        return BasicForm(self.model, self.degree, {T: fn(c) for T, c in self.comps.items()})

    def wedge(self, other: "BasicForm") -> "BasicForm":
        """Exterior product; the dx's commute with the polynomial coefficients."""
        if other.model is not self.model:
            raise ValueError("forms belong to different models")
        q = self.degree + other.degree
        if q > self.model.dim:
            raise ValueError("product degree exceeds the base dimension")
        comps: dict = {}
        for S, f in self.comps.items():
            for T, g in other.comps.items():
                if set(S) & set(T):
                    continue
                U, sign = _merge_sign(S, T)
                term = mul(f, g)
                if sign < 0:
                    term = -term
                comps[U] = comps[U] + term if U in comps else term
        return BasicForm(self.model, q, comps)

    def to_text(self) -> str:
        if not self.comps:
            return "0"
        lines = []
        for T in sorted(self.comps):
            dx = "^".join(f"dx{a}" for a in T) or "1"
            lines.append(f"[{dx}] {self.comps[T].to_text()}")
        return "\n".join(lines)

    __str__ = to_text

    def __repr__(self):
        return f"BasicForm(degree={self.degree}, {self.to_text()!r})"


def _merge_sign(S: tuple, T: tuple) -> tuple[tuple, int]:
    inv = sum(1 for s in S for t in T if s > t)
    return tuple(sorted(S + T)), (-1 if inv % 2 else 1)


def coordinate_form(model: JetModel, indices: Iterable[int]) -> BasicForm:
    """The constant form dx^{a1} ^ ... ^ dx^{aq}."""
    idx = tuple(indices)
    if len(set(idx)) != len(idx):
        return BasicForm.zero(model, len(idx))
    inv = sum(1 for x, y in combinations(idx, 2) if x > y)
    one = JetPolynomial.constant(-1 if inv % 2 else 1, model)
    return BasicForm(model, len(idx), {tuple(sorted(idx)): one})


def d_H(alpha: BasicForm) -> BasicForm:
    """Horizontal differential; a top-degree form maps to the zero top form."""
    model = alpha.model
    m = model.dim
    q = alpha.degree
    if q == m:
        return BasicForm(model, m, {}, alpha.order + 1)
    comps: dict = {}
    for S, f in alpha.comps.items():
        for b in range(m):
            if b in S:
                continue
            pos = sum(1 for s in S if s < b)
            T = tuple(sorted(S + (b,)))
            term = total_derivative(f, b)
            if not term.terms:
                continue
            if pos % 2:
                term = -term
            comps[T] = comps[T] + term if T in comps else term
    return BasicForm(model, q + 1, comps, alpha.order + 1)


# --------------------------------------------------------------------------
# vertical fields
# --------------------------------------------------------------------------

class VerticalField:
    """v = v^i d/dy^i with ``grade(v^i) == grade(y^i)`` for every sector."""

    def __init__(self, model: JetModel, comps: Mapping):
        self.model = model
        clean = {}
        for key, f in comps.items():
            i = key if isinstance(key, int) else model.index(key)
            if not isinstance(f, JetPolynomial):
                f = JetPolynomial.constant(f, model)
            if not f.has_grade(model.grade_of(i)):
                raise ValueError(
                    f"component for {model.coords[i][0]} does not have the grade of its sector")
            if f.terms:
                clean[i] = f
        self.comps = clean
        self._prolonged: dict = {}

    grade = 0  # even because component grades match sector grades

    def component(self, i) -> JetPolynomial:
        i = i if isinstance(i, int) else self.model.index(i)
        return self.comps.get(i, JetPolynomial({}, self.model))

    def prolonged(self, i: int, A: tuple) -> JetPolynomial:
        """d_A v^i, cached."""
        if i not in self.comps:
            return JetPolynomial({}, self.model)
        A = tuple(sorted(A))
        key = (i, A)
        hit = self._prolonged.get(key)
        if hit is not None:
            return hit
        if not A:
            val = self.comps[i]
        else:
            val = total_derivative(self.prolonged(i, A[:-1]), A[-1])
        self._prolonged[key] = val
        return val

    def __eq__(self, other):
        if not isinstance(other, VerticalField):
            return NotImplemented
        keys = set(self.comps) | set(other.comps)
        return all(self.component(i) == other.component(i) for i in keys)

    def __add__(self, other: "VerticalField") -> "VerticalField":
        keys = set(self.comps) | set(other.comps)
        return VerticalField(self.model, {i: self.component(i) + other.component(i) for i in keys})

    def __neg__(self):
        return VerticalField(self.model, {i: -f for i, f in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def to_text(self) -> str:
        if not self.comps:
            return "0"
        return "\n".join(f"{self.model.coords[i][0]}: {self.comps[i].to_text()}" for i in sorted(self.comps))


def prolong(v: VerticalField, k: int) -> dict:
    """Table {(i, A): d_A v^i} for |A| <= k."""
    if k < 0:
        raise ValueError("prolongation order must be nonnegative")
    from .jetring import multi_indices

    out = {}
    for i in sorted(v.comps):
        for A in multi_indices(v.model.dim, k):
            val = v.prolonged(i, A)
            if val.terms:
                out[(i, A)] = val
    return out


def _delta_poly(v: VerticalField, f: JetPolynomial) -> JetPolynomial:
    # one pass: split f by jet generator with the left-derivative sign
    by_gen: dict = {}
    for mono, c in f.terms.items():
        odd_before = 0
        prev = None
        for p, g in enumerate(mono):
            if g[0] == JET and g[1] in v.comps and g != prev:
                rest = mono[:p] + mono[p + 1:]
                if g[3]:
                    val = -c if odd_before & 1 else c
                else:
                    k = 1
                    while p + k < len(mono) and mono[p + k] == g:
                        k += 1
                    val = c * k if k > 1 else c
                bucket = by_gen.setdefault(g, {})
                bucket[rest] = bucket[rest] + val if rest in bucket else val
            odd_before += g[3]
            prev = g
    out = JetPolynomial({}, f.model)
    for g in sorted(by_gen):
        rest = JetPolynomial({m: c for m, c in by_gen[g].items()}, f.model)
        if rest.terms:
            out = out + mul(v.prolonged(g[1], g[2]), rest)
    return out


def delta(v: VerticalField, alpha):
    """delta[v] on a polynomial, a BasicForm or a LagrangianDensity."""
    if isinstance(alpha, JetPolynomial):
        return _delta_poly(v, alpha)
    if isinstance(alpha, LagrangianDensity):
        alpha = alpha.form()
    return BasicForm(alpha.model, alpha.degree,
                     {T: _delta_poly(v, f) for T, f in alpha.comps.items()}, alpha.order + 1)


# --------------------------------------------------------------------------
# Lagrangians
# --------------------------------------------------------------------------

@dataclass
class LagrangianDensity:
    """L = ell d^m x of jet order ``order``."""

    ell: JetPolynomial
    order: int | None = None
    model: JetModel | None = None

    def __post_init__(self):
        if self.model is None:
            self.model = self.ell.model
        if self.model is None:
            raise ValueError("a Lagrangian needs a field model")
        if not self.ell.has_grade(0):
            raise ValueError("Lagrangian density must be even")
        k = self.ell.jet_order()
        if self.order is None:
            self.order = k
        elif self.order < k:
            raise ValueError(f"declared order {self.order} is below the jet order {k}")

    def form(self) -> BasicForm:
        return BasicForm.density(self.ell, self.model)

    def __sub__(self, other):
        if isinstance(other, BasicForm):
            other = other.density_coefficient()
        elif isinstance(other, LagrangianDensity):
            other = other.ell
        return LagrangianDensity(self.ell - other, None, self.model)

    def __add__(self, other):
        if isinstance(other, BasicForm):
            other = other.density_coefficient()
        elif isinstance(other, LagrangianDensity):
            other = other.ell
        return LagrangianDensity(self.ell + other, None, self.model)


def _as_lagrangian(L) -> LagrangianDensity:
    if isinstance(L, LagrangianDensity):
        return L
    if isinstance(L, BasicForm):
        return LagrangianDensity(L.density_coefficient(), None, L.model)
    return LagrangianDensity(L)


def _jet_gens(f: JetPolynomial) -> list:
    return sorted({g for m in f.terms for g in m if g[0] == JET})


def euler_lagrange(L) -> dict:
    """F_i = sum_A (-1)^|A| d_A (d ell / d y^i_A), one entry per sector."""
    L = _as_lagrangian(L)
    model = L.model
    out = {i: JetPolynomial({}, model) for i in range(len(model.coords))}
    for g in _jet_gens(L.ell):
        term = partial(L.ell, g)
        for a in g[2]:
            term = total_derivative(term, a)
        if len(g[2]) % 2:
            term = -term
        out[g[1]] = out[g[1]] + term
    return out


def contract_el(F: Mapping, v: VerticalField) -> JetPolynomial:
    """F -| v = sum_i v^i F_i."""
    out = JetPolynomial({}, v.model)
    for i, f in sorted(F.items()):
        if i in v.comps and f.terms:
            out = out + mul(v.comps[i], f)
    return out


@dataclass
class Momentum:
    """Entries P[(a, i, B)] with |B| <= k-1, read as P^a = sum P[(a,i,B)] dy^i_B."""

    model: JetModel
    order: int
    entries: dict = field(default_factory=dict)

    def entry(self, a: int, i: int, B: tuple = ()) -> JetPolynomial:
        return self.entries.get((a, i, tuple(sorted(B))), JetPolynomial({}, self.model))

    def contract(self, v: VerticalField) -> BasicForm:
        """P -| v_(k-1) as the (m-1)-form J^a dx_a with J^a = sum d_B v^i P[(a,i,B)]."""
        m = self.model.dim
        J = [JetPolynomial({}, self.model) for _ in range(m)]
        for (a, i, B), P in sorted(self.entries.items()):
            if i in v.comps and P.terms:
                J[a] = J[a] + mul(v.prolonged(i, B), P)
        return BasicForm.current(J, self.model)


def momentum(L) -> Momentum:
    """Momentum of a first- or second-order Lagrangian."""
    L = _as_lagrangian(L)
    k = L.order
    if k not in (1, 2):
        raise ValueError(f"momentum is implemented for orders 1 and 2 only, got {k}")
    model = L.model
    m = model.dim
    half = GQ(Fraction(1, 2))
    ents: dict = {}
    second: dict = {}
    for g in _jet_gens(L.ell):
        A = g[2]
        i = g[1]
        if len(A) == 1:
            key = (A[0], i, ())
            ents[key] = ents.get(key, JetPolynomial({}, model)) + partial(L.ell, g)
        elif len(A) == 2:
            P = partial(L.ell, g)
            a, b = A
            if a == b:
                second[(a, a, i)] = P
            else:
                P = P.scale(half)
                second[(a, b, i)] = P
                second[(b, a, i)] = P
    for (a, b, i), P in second.items():
        key = (a, i, ())
        ents[key] = ents.get(key, JetPolynomial({}, model)) - total_derivative(P, b)
        ents[(a, i, (b,))] = P
    ents = {key: P for key, P in ents.items() if P.terms}
    return Momentum(model, k, ents)


def splitting_residual(L, v: VerticalField) -> BasicForm:
    """delta[v]L - F -| v - d_H(P -| v_(k-1)); zero when the splitting identity holds."""
    L = _as_lagrangian(L)
    lhs = delta(v, L.form())
    F = euler_lagrange(L)
    lhs = lhs - BasicForm.density(contract_el(F, v), L.model)
    return lhs - d_H(momentum(L).contract(v))


def noether_current(L, v: VerticalField, N: BasicForm | None = None) -> BasicForm:
    """J = P -| v_(k-1) - N, after checking delta[v]L = d_H N and d_H J + F -| v = 0."""
    L = _as_lagrangian(L)
    model = L.model
    if N is None:
        N = BasicForm.zero(model, model.dim - 1)
    if N.degree != model.dim - 1:
        raise ValueError("N must be an (m-1)-form")
    residual = delta(v, L.form()) - d_H(N)
    if not residual.is_zero():
        raise NoetherError("delta[v]L differs from d_H N", residual)
    J = momentum(L).contract(v) - N
    F = euler_lagrange(L)
    cert = d_H(J) + BasicForm.density(contract_el(F, v), model)
    if not cert.is_zero():
        raise NoetherError("conservation certificate d_H J + F -| v = 0 failed", cert)
    return J


def vert_bracket(v: VerticalField, w: VerticalField) -> VerticalField:
    """[v, w]^i = delta[v] w^i - (-1)^{|v||w|} delta[w] v^i."""
    sign = -1 if (v.grade and w.grade) else 1
    keys = set(v.comps) | set(w.comps)
    comps = {}
    for i in keys:
        a = _delta_poly(v, w.component(i))
        b = _delta_poly(w, v.component(i))
        comps[i] = a - b if sign == 1 else a + b
    return VerticalField(v.model, comps)


# --------------------------------------------------------------------------
# random objects for property checks
# --------------------------------------------------------------------------

def random_form(model: JetModel, rng: random.Random, degree: int, max_order: int = 2,
                n_terms: int = 2, max_degree: int = 3, backgrounds=(), base: bool = True) -> BasicForm:
    comps = {}
    for T in combinations(range(model.dim), degree):
        if rng.random() < 0.6 or degree in (0, model.dim):
            comps[T] = random_polynomial(model, rng, n_terms, max_degree, max_order,
                                         backgrounds=backgrounds, base=base)
    return BasicForm(model, degree, comps)


def random_vertical_field(model: JetModel, rng: random.Random, max_order: int = 1,
                          n_terms: int = 2, max_degree: int = 2) -> VerticalField:
    comps = {}
    for i, (_, g) in enumerate(model.coords):
        comps[i] = random_polynomial(model, rng, n_terms, max_degree, max_order, grade=g)
    return VerticalField(model, comps)


# --------------------------------------------------------------------------
# randomized property suites
# --------------------------------------------------------------------------

def _property_model(m: int) -> JetModel:
    from .jetring import property_model

    return property_model(m)


def check_dH_nilpotent(rng: random.Random, n_cases: int = 50, dims=(2, 4)) -> list:
    """d_H d_H = 0 on random basic forms."""
    from .core import Check

    bad = None
    for case in range(n_cases):
        model = _property_model(dims[case % len(dims)])
        q = rng.randint(0, min(3, model.dim))
        alpha = random_form(model, rng, q, max_order=2, n_terms=2, max_degree=3, backgrounds=("g",))
        r = d_H(d_H(alpha)) if q <= model.dim - 2 else BasicForm.zero(model, model.dim)
        if not r.is_zero():
            bad = f"case {case} (m={model.dim}, q={q}): {alpha.to_text()} -> {r.to_text()}"
            break
    return [Check("dH.nilpotent", bad is None, bad or "")]


def check_dH_delta_commute(rng: random.Random, n_cases: int = 50, dims=(2, 4)) -> list:
    """delta[v] d_H = d_H delta[v] on random basic forms and grade-matched fields."""
    from .core import Check

    bad = None
    for case in range(n_cases):
        model = _property_model(dims[case % len(dims)])
        q = rng.randint(0, min(3, model.dim - 1))
        alpha = random_form(model, rng, q, max_order=2, n_terms=2, max_degree=3, backgrounds=("g",))
        v = random_vertical_field(model, rng, max_order=1)
        r = delta(v, d_H(alpha)) - d_H(delta(v, alpha))
        if not r.is_zero():
            bad = f"case {case} (m={model.dim}, q={q}): residual {r.to_text()}"
            break
    return [Check("dH.delta_commute", bad is None, bad or "")]


def random_lagrangian(model: JetModel, rng: random.Random, order: int) -> "LagrangianDensity":
    """Even random density with at least one jet of the requested order."""
    ell = random_polynomial(model, rng, 3, 3, order, grade=0, backgrounds=("g",))
    top = model.jet_gen(rng.randrange(len(model.coords)), tuple(rng.randrange(model.dim) for _ in range(order)))
    extra = JetPolynomial.from_generator(top, model)
    if top.grade:
        extra = mul(extra, model.jet(rng.choice([i for i, (_, g) in enumerate(model.coords) if g])))
    return LagrangianDensity(ell + mul(extra, model.jet(0)), order, model)


def check_splitting(rng: random.Random, n_cases: int = 25, orders=(1, 2), m: int = 2) -> list:
    """delta[v]L - F -| v = d_H(P -| v_(k-1)) for random L (odd sectors included)."""
    from .core import Check

    out = []
    model = _property_model(m)
    for k in orders:
        bad = None
        for case in range(n_cases):
            L = random_lagrangian(model, rng, k)
            v = random_vertical_field(model, rng, max_order=1)
            r = splitting_residual(L, v)
            if not r.is_zero():
                bad = f"case {case}: ell={L.ell.to_text()}; residual {r.to_text()}"
                break
        out.append(Check(f"splitting.order{k}", bad is None, bad or ""))
    return out


def check_el_trivial(rng: random.Random, n_cases: int = 20, m: int = 2) -> list:
    """euler_lagrange(ell + d_a J^a) = euler_lagrange(ell)."""
    from .core import Check

    model = _property_model(m)
    bad = None
    for case in range(n_cases):
        L = random_lagrangian(model, rng, 1)
        J = [random_polynomial(model, rng, 2, 3, 1, grade=0, backgrounds=("g",)) for _ in range(m)]
        ex = d_H(BasicForm.current(J, model)).density_coefficient()
        F1, F2 = euler_lagrange(L), euler_lagrange(LagrangianDensity(L.ell + ex, None, model))
        diff = {i: F2[i] - F1[i] for i in F1 if F2[i] != F1[i]}
        if diff:
            i = min(diff)
            bad = f"case {case}: sector {model.coords[i][0]} differs by {diff[i].to_text()}"
            break
    return [Check("euler_lagrange.exact_trivial", bad is None, bad or "")]


def euler_lagrange_oracle(grid: int = 5, h: float = 0.1, mu2=Fraction(3, 2), lam=Fraction(1, 4),
                          tol: float = 1e-6) -> list:
    """Compare h^2 F at interior grid points with a finite-difference variation of the lattice action.

    Field: scalar y on an m = 2 grid with eta = diag(1, -1),
    ell = 1/2 eta^ab y_a y_b - 1/2 mu2 y^2 - lam y^4 (lam = 0 gives Klein-Gordon).
    """
    import math

    from .core import Check

    out = []
    for label, quartic in (("klein_gordon", Fraction(0)), ("quartic", lam)):
        model = JetModel((("y", 0),), 2, "constant")
        y = model.jet(0)
        ell = (mul(model.jet(0, (0,)), model.jet(0, (0,))) - mul(model.jet(0, (1,)), model.jet(0, (1,)))).scale(
            GQ(Fraction(1, 2))) - mul(y, y).scale(GQ(mu2 / 2)) - (y ** 4).scale(GQ(quartic))
        F = euler_lagrange(LagrangianDensity(ell, 1, model))[0]
        eta = (1.0, -1.0)
        field_ = [[math.sin(0.7 * i + 0.3) * math.cos(0.4 * j) + 0.2 * i * j / grid for j in range(grid)]
                  for i in range(grid)]

        def action(Y):
            S = 0.0
            for i in range(grid):
                for j in range(grid):
                    for a, (di, dj) in enumerate(((1, 0), (0, 1))):
                        if i + di < grid and j + dj < grid:
                            D = (Y[i + di][j + dj] - Y[i][j]) / h
                            S += 0.5 * eta[a] * D * D * h * h
                    v = Y[i][j]
                    S -= (0.5 * float(mu2) * v * v + float(quartic) * v ** 4) * h * h
            return S

        worst = 0.0
        eps = 1e-4
        for i in range(1, grid - 1):
            for j in range(1, grid - 1):
                up = [row[:] for row in field_]
                dn = [row[:] for row in field_]
                up[i][j] += eps
                dn[i][j] -= eps
                fd = (action(up) - action(dn)) / (2 * eps)
                second = {
                    (0, 0): (field_[i + 1][j] - 2 * field_[i][j] + field_[i - 1][j]) / h ** 2,
                    (1, 1): (field_[i][j + 1] - 2 * field_[i][j] + field_[i][j - 1]) / h ** 2,
                    (0, 1): (field_[i + 1][j + 1] - field_[i + 1][j - 1] - field_[i - 1][j + 1]
                             + field_[i - 1][j - 1]) / (4 * h * h),
                }
                first = {(0,): (field_[i + 1][j] - field_[i - 1][j]) / (2 * h),
                         (1,): (field_[i][j + 1] - field_[i][j - 1]) / (2 * h)}

                def val(g, i=i, j=j, second=second, first=first):
                    if not g.index:
                        return field_[i][j]
                    return first[g.index] if len(g.index) == 1 else second[g.index]

                sym = F.evaluate(val).real * h * h
                worst = max(worst, abs(fd - sym) / max(abs(sym), 1e-12))
        ok = worst < tol
        out.append(Check(f"euler_lagrange.oracle.{label}", ok,
                         "" if ok else f"max relative error {worst:.3e} >= {tol:g}"))
    return out
