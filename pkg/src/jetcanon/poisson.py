"""Matrix differential operators and Poisson brackets of local functionals."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ShapeError
from .jetspace import Bundle, MultiIndex, euler_lagrange, is_total_divergence, total_derivative_multi
from .symexpr import Expr

Term = tuple[Expr, MultiIndex]


@dataclass(frozen=True)
class DiffOperator:
    """``D^{ab} = sum_I omega^{abI} D_I``; ``entries`` maps ``(a, b)`` to its terms.

    Build with :meth:`build` so that indices are sorted, repeated indices
    merged and zero coefficients dropped.
    """

    bundle: Bundle
    entries: Mapping[tuple[int, int], tuple[Term, ...]]

    @classmethod
    def build(cls, bundle: Bundle, terms: Iterable[tuple[int, int, Expr, Sequence]]) -> "DiffOperator":
        acc: dict = {}
        for a, b, coef, index in terms:
            a, b = bundle.field_pos(a), bundle.field_pos(b)
            index = tuple(sorted(bundle.base_pos(i) for i in index))
            key = (a, b, index)
            acc[key] = acc.get(key, Expr(0)) + coef
        entries: dict = {}
        for (a, b, index), coef in sorted(acc.items(), key=lambda kv: (kv[0][0], kv[0][1], len(kv[0][2]), kv[0][2])):
            if not coef.is_zero:
                entries.setdefault((a, b), []).append((coef, index))
        return cls(bundle, {k: tuple(v) for k, v in entries.items()})

    @classmethod
    def scalar(cls, bundle: Bundle, terms: Iterable[tuple[Expr, Sequence]]) -> "DiffOperator":
        return cls.build(bundle, ((0, 0, c, i) for c, i in terms))

    @classmethod
    def zero(cls, bundle: Bundle) -> "DiffOperator":
        return cls(bundle, {})

    def terms(self):
        for (a, b), ts in self.entries.items():
            for coef, index in ts:
                yield a, b, coef, index

    def coefficient(self, a: int, b: int, index: Sequence[int]) -> Expr:
        index = tuple(sorted(index))
        for coef, i in self.entries.get((a, b), ()):
            if i == index:
                return coef
        return Expr(0)

    @property
    def order(self) -> int:
        return max((len(i) for *_, i in self.terms()), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def apply(self, v: Sequence[Expr]) -> list[Expr]:
        return apply_operator(self, v)

    def __str__(self):
        b = self.bundle
        rows = []
        for (a, c), ts in self.entries.items():
            body = " + ".join(f"({coef})*D{{{b.index_name(i)}}}" for coef, i in ts)
            rows.append(f"{b.fiber[a]} {b.fiber[c]} : {body}")
        return "\n".join(rows) if rows else "0"


def apply_operator(D: DiffOperator, v: Sequence[Expr]) -> list[Expr]:
    """Component a = sum_{b, I} omega^{abI} D_I(v_b)."""
    b = D.bundle
    if len(v) != b.m:
        raise ShapeError(f"operator acts on vectors of length {b.m}, got {len(v)}")
    cache: dict = {}
    out = [[] for _ in range(b.m)]
    for a, c, coef, index in D.terms():
        key = (c, index)
        if key not in cache:
            cache[key] = total_derivative_multi(v[c], index, b)
        out[a].append(coef * cache[key])
    return [Expr.sum(parts) for parts in out]


@dataclass(frozen=True)
class BracketResult:
    density: Expr
    witness: tuple[Expr, ...]

    @property
    def is_divergence(self) -> bool:
        return all(w.is_zero for w in self.witness)


def bracket_density(P: Expr, Q: Expr, D: DiffOperator) -> BracketResult:
    """Integrand E(P) . D(E(Q)) of {int P, int Q}, with its Euler-Lagrange image."""
    b = D.bundle
    ep = euler_lagrange(P, b)
    dq = apply_operator(D, euler_lagrange(Q, b))
    density = Expr.sum(x * y for x, y in zip(ep, dq))
    return BracketResult(density, tuple(euler_lagrange(density, b)))


def equal_mod_divergence(p: Expr, q: Expr, bundle: Bundle) -> bool:
    return is_total_divergence(p - q, bundle)


def skew_adjoint_spot_check(D: DiffOperator, samples: int = 20, seed: int = 0) -> bool:
    """Diagnostic only: {P,Q} + {Q,P} is a divergence on random pairs."""
    from .sampling import random_density

    rng = random.Random(seed)
    pairs = [(random_density(D.bundle, rng), random_density(D.bundle, rng)) for _ in range(samples)]
    for P, Q in pairs:
        s = bracket_density(P, Q, D).density + bracket_density(Q, P, D).density
        if not is_total_divergence(s, D.bundle):
            return False
    return True
