"""Canonicity conditions for the three supported operator shapes.

* case 1: n = m = 1, ``D = omega D_x``;
* case 2: any n, m, first-order ``D = omega^{abi} D_i``;
* case 3: n = m = 1, ``D = sum_I omega^I (D_x)^I``.

Each check returns a :class:`CanonReport` whose conditions carry the
residual ``lhs - rhs`` as an expression; the transformation is canonical
iff every residual is zero.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import comb
from typing import Sequence

from .errors import ShapeError
from .jetspace import total_derivative, total_derivative_multi
from .poisson import DiffOperator, apply_operator, equal_mod_divergence
from .jetspace import euler_lagrange
from .pullback import Automorphism, Prolongation, orientation, transform_functional
from .sampling import random_density
from .symexpr import BASE, JET, ONE, ZERO, Expr

DEFAULT_MAX_COEFF_INDEX = 8


@dataclass(frozen=True)
class Condition:
    label: str
    residual: Expr

    @property
    def satisfied(self) -> bool:
        return self.residual.is_zero


@dataclass(frozen=True)
class CanonReport:
    case: int
    conditions: tuple[Condition, ...]
    orientation: str

    @property
    def verdict(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def residuals(self) -> list[Expr]:
        return [c.residual for c in self.conditions]

    def __getitem__(self, label: str) -> Expr:
        for c in self.conditions:
            if c.label == label:
                return c.residual
        raise KeyError(label)


def detect_case(D: DiffOperator) -> int:
    b = D.bundle
    first_order = all(len(i) == 1 for *_, i in D.terms())
    if b.n == 1 and b.m == 1:
        return 1 if first_order else 3
    if first_order:
        return 2
    raise ShapeError(
        "operator outside the three supported cases: higher-order or order-zero "
        "terms are only handled for one base and one fiber variable")


def _require_scalar(D: DiffOperator, what: str):
    if D.bundle.n != 1 or D.bundle.m != 1:
        raise ShapeError(f"{what} needs one base and one fiber variable")


def _prolongation(psi: Automorphism, prol: Prolongation | None) -> Prolongation:
    return prol if prol is not None else Prolongation(psi)


def check_case1(psi: Automorphism, D: DiffOperator, prol: Prolongation | None = None) -> CanonReport:
    _require_scalar(D, "case 1")
    if any(i != (0,) for *_, i in D.terms()):
        raise ShapeError("case 1 needs an operator of the form omega*D{x}")
    prol = _prolongation(psi, prol)
    b = D.bundle
    det = prol.det
    du = psi.fiber_map[0].partial(b.u(0))
    omega = D.coefficient(0, 0, (0,))
    conditions = (
        Condition("(i) D_x(det*dpsi_E/du) = 0", total_derivative(det * du, 0, b)),
        Condition("(ii) omega o jpsi = omega*det^2*(dpsi_E/du)^2",
                  prol.pullback(omega) - omega * det ** 2 * du ** 2),
    )
    return CanonReport(1, conditions, orientation(det, b))


def check_case2(psi: Automorphism, D: DiffOperator, prol: Prolongation | None = None) -> CanonReport:
    b = D.bundle
    if any(len(i) != 1 for *_, i in D.terms()):
        raise ShapeError("case 2 needs a first-order operator omega^{abi} D_i with no order-zero part")
    prol = _prolongation(psi, prol)
    det, J = prol.det, prol.jacobian
    fj = psi.fiber_jacobian()  # fj[c][a] = d psi_E^a / d u^c
    conditions = []

    triggers = sorted({(d, i[0]) for _, d, _, i in D.terms()})
    for d, j in triggers:
        for bb in range(b.m):
            label = f"(i) d={b.fiber[d]} j={b.base[j]} b={b.fiber[bb]}"
            conditions.append(Condition(label, total_derivative(det * fj[d][bb], j, b)))

    omega = {(a, c, i[0]): coef for a, c, coef, i in D.terms()}
    for a in range(b.m):
        for bb in range(b.m):
            for i in range(b.n):
                lhs = prol.pullback(omega.get((a, bb, i), ZERO))
                rhs = Expr.sum(coef * fj[c][a] * fj[d][bb] * J[j][i]
                               for (c, d, j), coef in omega.items())
                label = f"(ii) a={b.fiber[a]} b={b.fiber[bb]} i={b.base[i]}"
                conditions.append(Condition(label, lhs - det * rhs))
    return CanonReport(2, tuple(conditions), orientation(det, b))


class CompCoeffTable:
    """Memoized coefficients (I, j) of D_x^I(F o jpsi) = sum_j (D~^j F o jpsi) (I, j).

    Recurrence ``(I, j) = (I-1, j-1) det + D_x (I-1, j)`` with ``(0, 0) = 1``.
    """

    def __init__(self, prol: Prolongation, max_index: int = DEFAULT_MAX_COEFF_INDEX):
        if prol.bundle.n != 1:
            raise ShapeError("(I, j) coefficients are defined for a one-dimensional base")
        self.prol = prol
        self.max_index = max_index
        self._memo: dict = {}

    def __call__(self, I: int, j: int) -> Expr:
        if not 0 <= I <= self.max_index:
            raise IndexError(f"coefficient index I={I} outside 0..{self.max_index}")
        if j < 0 or j > I:
            return ZERO
        if I == 0:
            return ONE
        if j == 0:
            return ZERO
        key = (I, j)
        hit = self._memo.get(key)
        if hit is None:
            hit = self(I - 1, j - 1) * self.prol.det + total_derivative(self(I - 1, j), 0, self.prol.bundle)
            self._memo[key] = hit
        return hit


def comp_coeff(I: int, j: int, prol: Prolongation, max_index: int = DEFAULT_MAX_COEFF_INDEX) -> Expr:
    return CompCoeffTable(prol, max_index)(I, j)


def _scalar_coefficients(D: DiffOperator) -> list[Expr]:
    return [D.coefficient(0, 0, (0,) * k) for k in range(D.order + 1)]


def check_case3(psi: Automorphism, D: DiffOperator, prol: Prolongation | None = None) -> CanonReport:
    _require_scalar(D, "case 3")
    prol = _prolongation(psi, prol)
    b = D.bundle
    N = D.order
    omega = _scalar_coefficients(D)
    du = psi.fiber_map[0].partial(b.u(0))
    c = prol.det * du
    dc = [c]
    for _ in range(N):
        dc.append(total_derivative(dc[-1], 0, b))
    table = CompCoeffTable(prol, max(N, DEFAULT_MAX_COEFF_INDEX))
    conditions = []
    for I in range(N + 1):
        terms = []
        for J in range(I, N + 1):
            if omega[J].is_zero:
                continue
            for j in range(I, J + 1):
                terms.append(comb(J, j) * omega[J] * dc[J - j] * table(j, I))
        residual = prol.pullback(omega[I]) - du * Expr.sum(terms)
        conditions.append(Condition(f"I={I}", residual))
    return CanonReport(3, tuple(conditions), orientation(prol.det, b))


def is_constant_map(psi: Automorphism, prol: Prolongation | None = None) -> bool:
    """det psi_M and dpsi_E/du free of base and jet variables (parameters allowed)."""
    prol = _prolongation(psi, prol)
    du = psi.fiber_map[0].partial(psi.bundle.u(0))
    return not any(s.kind in (BASE, JET) for e in (prol.det, du) for s in e.symbols())


def reduced_case3_residuals(psi: Automorphism, D: DiffOperator, prol: Prolongation | None = None) -> list[Expr]:
    """Reduced case-3 residuals omega^I o jpsi - omega^I det^(I+1) (dpsi_E/du)^2.

    Only valid when det psi_M and dpsi_E/du are constants.
    """
    _require_scalar(D, "case 3")
    prol = _prolongation(psi, prol)
    if not is_constant_map(psi, prol):
        raise ShapeError("the reduced condition needs constant det psi_M and dpsi_E/du")
    du = psi.fiber_map[0].partial(psi.bundle.u(0))
    return [prol.pullback(w) - w * prol.det ** (I + 1) * du ** 2
            for I, w in enumerate(_scalar_coefficients(D))]


def check_canonical(psi: Automorphism, D: DiffOperator, case: int | str = "auto",
                    prol: Prolongation | None = None) -> CanonReport:
    if case in ("auto", None):
        case = detect_case(D)
    case = int(case)
    checks = {1: check_case1, 2: check_case2, 3: check_case3}
    if case not in checks:
        raise ShapeError(f"unknown case {case!r}")
    return checks[case](psi, D, prol)


# ---------------------------------------------------------------------------
# sampling cross-check of {Psi P, Psi Q} = Psi {P, Q}

@dataclass(frozen=True)
class CrossValidation:
    samples: int
    preserved: int
    counterexample: tuple[Expr, Expr] | None

    @property
    def rate(self) -> float:
        return self.preserved / self.samples if self.samples else 1.0

    @property
    def all_preserved(self) -> bool:
        return self.preserved == self.samples


def _bracket(P: Expr, Q: Expr, D: DiffOperator) -> Expr:
    b = D.bundle
    ep = euler_lagrange(P, b)
    dq = apply_operator(D, euler_lagrange(Q, b))
    return Expr.sum(x * y for x, y in zip(ep, dq))


def bracket_preserved(P: Expr, Q: Expr, D: DiffOperator, prol: Prolongation) -> bool:
    lhs = _bracket(transform_functional(P, prol), transform_functional(Q, prol), D)
    rhs = transform_functional(_bracket(P, Q, D), prol)
    return equal_mod_divergence(lhs, rhs, D.bundle)


def sample_pairs(bundle, samples: int, seed: int) -> list[tuple[Expr, Expr]]:
    rng = random.Random(seed)
    return [(random_density(bundle, rng), random_density(bundle, rng)) for _ in range(samples)]


def cross_validate(psi: Automorphism, D: DiffOperator, samples: int = 50, seed: int = 0,
                   extra_pairs: Sequence[tuple[Expr, Expr]] = (),
                   prol: Prolongation | None = None) -> CrossValidation:
    """Test bracket preservation on seeded random density pairs.

    Pairs are drawn before any evaluation so results depend only on the seed.
    """
    detect_case(D)
    prol = _prolongation(psi, prol)
    pairs = list(extra_pairs) + sample_pairs(D.bundle, samples, seed)
    preserved = 0
    counterexample = None
    for P, Q in pairs:
        if bracket_preserved(P, Q, D, prol):
            preserved += 1
        elif counterexample is None:
            counterexample = (P, Q)
    return CrossValidation(len(pairs), preserved, counterexample)
