"""Bundle automorphisms, their prolongation to jets, and pullback of densities.

Tilded and untilded coordinates share names: an expression handed to
:func:`pullback_expr` is read in the tilded system, and the result is in
the untilded one.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

from .errors import ShapeError, SingularError
from .jetspace import Bundle, MultiIndex, euler_lagrange, total_derivative
from .symexpr import BASE, JET, ONE, ZERO, Expr

MAX_JACOBIAN_DIM = 4


class Automorphism:
    """A fiber-preserving map: ``x~ = base_map(x)``, ``u~ = fiber_map(x, u)``."""

    def __init__(self, bundle: Bundle, base_map: Sequence[Expr], fiber_map: Sequence[Expr]):
        base_map, fiber_map = tuple(base_map), tuple(fiber_map)
        if len(base_map) != bundle.n or len(fiber_map) != bundle.m:
            raise ShapeError(
                f"automorphism needs {bundle.n} base and {bundle.m} fiber components")
        for e in base_map:
            if any(s.kind == JET for s in e.symbols()):
                raise ShapeError(f"base map component {e} depends on fiber or jet variables")
        for e in fiber_map:
            if any(s.kind == JET and s.order > 0 for s in e.symbols()):
                raise ShapeError(f"fiber map component {e} depends on derivatives")
        self.bundle = bundle
        self.base_map = base_map
        self.fiber_map = fiber_map

    @classmethod
    def identity(cls, bundle: Bundle) -> "Automorphism":
        return cls(bundle, [Expr.symbol(s) for s in bundle.base_symbols],
                   [Expr.symbol(bundle.u(a)) for a in range(bundle.m)])

    @classmethod
    def parse(cls, bundle: Bundle, base: Sequence[str], fiber: Sequence[str]) -> "Automorphism":
        return cls(bundle, [bundle.parse(t) for t in base], [bundle.parse(t) for t in fiber])

    def compose(self, inner: "Automorphism") -> "Automorphism":
        """``self o inner``: apply ``inner`` first."""
        b = self.bundle
        bind = {s: e for s, e in zip(b.base_symbols, inner.base_map)}
        bind.update({b.u(a): e for a, e in enumerate(inner.fiber_map)})
        return Automorphism(b, [e.substitute(bind) for e in self.base_map],
                            [e.substitute(bind) for e in self.fiber_map])

    def fiber_jacobian(self) -> list[list[Expr]]:
        """``[a][c] = d fiber_map[c] / d u^a``."""
        b = self.bundle
        return [[f.partial(b.u(a)) for f in self.fiber_map] for a in range(b.m)]

    def __repr__(self):
        b = self.bundle
        parts = [f"{x}~ = {e}" for x, e in zip(b.base, self.base_map)]
        parts += [f"{u}~ = {e}" for u, e in zip(b.fiber, self.fiber_map)]
        return f"Automorphism({', '.join(parts)})"


def determinant(mat: Sequence[Sequence[Expr]]) -> Expr:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    terms = []
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        t = ONE
        for i, p in enumerate(perm):
            t = t * mat[i][p]
            if t.is_zero:
                break
        if not t.is_zero:
            terms.append(-t if inversions % 2 else t)
    return Expr.sum(terms)


def _minor(mat, r, c):
    return [[v for j, v in enumerate(row) if j != c] for i, row in enumerate(mat) if i != r]


def jacobian(psi: Automorphism):
    """Return ``(J, det J, J^-1)`` with ``J[i][j] = d base_map[j] / d x^i``."""
    b = psi.bundle
    n = b.n
    if n > MAX_JACOBIAN_DIM:
        raise ShapeError(f"symbolic Jacobian inversion supports n <= {MAX_JACOBIAN_DIM}")
    J = [[psi.base_map[j].partial(b.x(i)) for j in range(n)] for i in range(n)]
    det = determinant(J)
    if det.is_zero:
        raise SingularError("singular base map: Jacobian determinant vanishes identically")
    if n == 1:
        inv = [[ONE / det]]
    else:
        inv = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                cof = determinant(_minor(J, i, j))
                inv[j][i] = (cof if (i + j) % 2 == 0 else -cof) / det
    return J, det, inv


class Prolongation:
    """The lift ``j psi``: a lazily filled table ``(a, I) -> u~^a_I o j psi``.

    Entries obey ``u~^a_{Ij} o j psi = (J^-1)_{j i} D_i(u~^a_I o j psi)``,
    the chain rule solved for tilded total derivatives.
    """

    def __init__(self, psi: Automorphism):
        self.automorphism = psi
        self.bundle = psi.bundle
        self.jacobian, self.det, self.inverse = jacobian(psi)
        self._table = {(a, ()): e for a, e in enumerate(psi.fiber_map)}

    def tilde_derivative(self, value: Expr, j: int) -> Expr:
        """``(D~_j F) o j psi`` given ``value = F o j psi``."""
        b = self.bundle
        return Expr.sum(self.inverse[j][i] * total_derivative(value, i, b)
                        for i in range(b.n) if not self.inverse[j][i].is_zero)

    def entry(self, a: int, index: MultiIndex = ()) -> Expr:
        index = tuple(sorted(index))
        key = (a, index)
        hit = self._table.get(key)
        if hit is not None:
            return hit
        self.bundle.jet(a, index)  # enforces the order limit
        value = self.tilde_derivative(self.entry(a, index[:-1]), index[-1])
        self._table[key] = value
        return value

    def entry_along(self, a: int, path: Sequence[int]) -> Expr:
        """Recompute an entry appending indices in the given order, bypassing the table."""
        value = self.automorphism.fiber_map[a]
        for j in path:
            value = self.tilde_derivative(value, j)
        return value

    def extend(self, order: int) -> "Prolongation":
        for s in self.bundle.all_jets(order):
            self.entry(s.field, s.index)
        return self

    def bindings(self, e: Expr) -> dict:
        psi = self.automorphism
        out = {}
        for s in e.symbols():
            if s.kind == BASE:
                out[s] = psi.base_map[s.key[1]]
            elif s.kind == JET:
                out[s] = self.entry(s.field, s.index)
        return out

    def pullback(self, F: Expr) -> Expr:
        return F.substitute(self.bindings(F))


def prolong(psi: Automorphism, order: int = 0) -> Prolongation:
    return Prolongation(psi).extend(order)


def pullback_expr(F: Expr, prol: Prolongation) -> Expr:
    """``F o j psi`` for ``F`` written in tilded coordinates."""
    return prol.pullback(F)


def transform_functional(P: Expr, prol: Prolongation) -> Expr:
    """Density of Psi(int P) = int (P o j psi) det(psi_M), signed determinant."""
    return prol.pullback(P) * prol.det


def chain_rule_residuals(F: Expr, prol: Prolongation) -> list[Expr]:
    """D_i(F o jpsi) - sum_j ((D~_j F) o jpsi) D_i psi_M^j for each base direction i.

    The tilded total derivative is taken on ``F`` itself and then pulled back,
    so this re-checks the prolongation table without reusing its recursion.
    """
    b = prol.bundle
    pulled = prol.pullback(F)
    tilde = [prol.pullback(total_derivative(F, j, b)) for j in range(b.n)]
    return [total_derivative(pulled, i, b)
            - Expr.sum(tilde[j] * prol.jacobian[i][j] for j in range(b.n))
            for i in range(b.n)]


@dataclass(frozen=True)
class VariationalCheck:
    ok: bool
    residuals: tuple[Expr, ...]

    def __bool__(self):
        return self.ok


def variational_sides(P: Expr, prol: Prolongation) -> tuple[list[Expr], list[Expr]]:
    """Both sides of E_a((P o j psi) det) = det * d psi_E^c/du^a * (E~_c(P) o j psi)."""
    b = prol.bundle
    lhs = euler_lagrange(transform_functional(P, prol), b)
    el_tilde = [prol.pullback(c) for c in euler_lagrange(P, b)]
    fj = prol.automorphism.fiber_jacobian()
    rhs = [prol.det * Expr.sum(fj[a][c] * el_tilde[c] for c in range(b.m)) for a in range(b.m)]
    return lhs, rhs


def verify_lemma1(P: Expr, prol: Prolongation) -> VariationalCheck:
    lhs, rhs = variational_sides(P, prol)
    residuals = tuple(l - r for l, r in zip(lhs, rhs))
    return VariationalCheck(all(r.is_zero for r in residuals), residuals)


def orientation(det: Expr, bundle: Bundle) -> str:
    """'+' or '-' when the sign of ``det`` is forced, else '?'.

    Decidable cases: constants, and monomial ratios whose odd powers involve
    only symbols declared positive.
    """
    if det.is_constant:
        v = det.constant_value()
        return "+" if v > 0 else "-"
    if len(det.num) != 1 or len(det.den) != 1:
        return "?"
    (mono, coef), = det.num.items()
    (dmono, _), = det.den.items()
    for s, e in mono + dmono:
        if e % 2 and s.name not in bundle.positive:
            return "?"
    return "+" if coef > 0 else "-"
