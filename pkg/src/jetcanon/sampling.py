"""Seeded random densities for property checks and cross-validation."""

from __future__ import annotations

import random

from .jetspace import Bundle
from .symexpr import Expr

COEFFICIENTS = (-3, -2, -1, 1, 2, 3)


def random_density(bundle: Bundle, rng: random.Random, *, max_terms: int = 3,
                   max_degree: int = 3, max_order: int = 2) -> Expr:
    """Sum of 1..max_terms monomials in the base variables and jets of order <= max_order.

    Each monomial has degree 1..max_degree with factors drawn uniformly (with
    replacement) from that pool and a coefficient from +-{1, 2, 3}.
    """
    pool = [Expr.symbol(s) for s in bundle.base_symbols]
    pool += [Expr.symbol(s) for s in bundle.all_jets(max_order)]
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        t = Expr(rng.choice(COEFFICIENTS))
        for _ in range(rng.randint(1, max_degree)):
            t = t * rng.choice(pool)
        terms.append(t)
    return Expr.sum(terms)


def random_densities(bundle: Bundle, count: int, seed: int, **kw) -> list[Expr]:
    rng = random.Random(seed)
    return [random_density(bundle, rng, **kw) for _ in range(count)]
