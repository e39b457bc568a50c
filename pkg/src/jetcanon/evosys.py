"""Hamiltonian evolutionary systems u_t = D delta H and their conservation laws."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .canon import CanonReport, check_canonical
from .errors import JetError, NonCanonicalError
from .jetspace import Bundle, euler_lagrange, is_total_divergence
from .poisson import DiffOperator, apply_operator
from .pullback import Automorphism, Prolongation, transform_functional
from .symexpr import ZERO, Expr, monomial_key, render

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvoSystem:
    bundle: Bundle
    operator: DiffOperator
    hamiltonian: Expr
    claws: Mapping[str, Expr] = field(default_factory=dict)


def rhs(sys: EvoSystem) -> list[Expr]:
    return apply_operator(sys.operator, euler_lagrange(sys.hamiltonian, sys.bundle))


def conservation_residual(P: Expr, sys: EvoSystem) -> Expr:
    """dP/dt + E(P) . rhs; a total divergence iff int P is conserved."""
    b = sys.bundle
    total = Expr.sum(e * r for e, r in zip(euler_lagrange(P, b), rhs(sys)))
    if b.time is not None:
        total = total + P.partial(b.time)
    return total


def verify_conservation_law(P: Expr, sys: EvoSystem) -> bool:
    return is_total_divergence(conservation_residual(P, sys), sys.bundle)


def transform_claw(P: Expr, psi: Automorphism | Prolongation) -> Expr:
    prol = psi if isinstance(psi, Prolongation) else Prolongation(psi)
    return transform_functional(P, prol)


@dataclass(frozen=True)
class Transformed:
    system: EvoSystem
    report: CanonReport | None
    rhs: tuple[Expr, ...]


def transform_system(sys: EvoSystem, psi: Automorphism, *, allow_noncanonical: bool = False,
                     case="auto") -> Transformed:
    """Push the Hamiltonian and every claw through Psi; the operator is kept.

    Raises :class:`NonCanonicalError` when the canonicity check fails, unless
    ``allow_noncanonical`` is set (then a warning is logged).
    """
    prol = Prolongation(psi)
    report = check_canonical(psi, sys.operator, case, prol)
    if not report.verdict:
        if not allow_noncanonical:
            raise NonCanonicalError("transformation is not canonical for this operator", report)
        log.warning("transforming with a non-canonical map; conservation laws may not carry over")
    new = EvoSystem(
        sys.bundle, sys.operator,
        transform_functional(sys.hamiltonian, prol),
        {name: transform_functional(P, prol) for name, P in sys.claws.items()},
    )
    return Transformed(new, report, tuple(rhs(new)))


# ---------------------------------------------------------------------------
# comparison against printed reference values

def term_differences(computed: Expr, printed: Expr) -> list[dict]:
    """Monomials whose coefficients disagree (numerators over the common denominator)."""
    if computed.den != printed.den:
        return [{"monomial": "<denominator>", "computed": render(computed.denominator()),
                 "printed": render(printed.denominator())}]
    monos = sorted(set(computed.num) | set(printed.num), key=monomial_key, reverse=True)
    out = []
    for m in monos:
        a, b = computed.num.get(m, Fraction(0)), printed.num.get(m, Fraction(0))
        if a != b:
            name = "*".join(s.name if e == 1 else f"{s.name}^{e}" for s, e in m) or "1"
            out.append({"monomial": name, "computed": _fmt(a), "printed": _fmt(b)})
    return out


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def compare_printed(item: str, computed: Expr, printed_text: str, bundle: Bundle) -> dict | None:
    """A ``paper_mismatch`` entry, or None when the printed value agrees exactly."""
    entry = {"item": item, "computed": render(computed), "printed": printed_text}
    try:
        printed = bundle.parse(printed_text)
    except JetError as exc:
        entry["relation"] = "unparseable"
        entry["reason"] = str(exc)
        return entry
    if printed == computed:
        return None
    if printed == -computed:
        entry["relation"] = "negated"
    else:
        entry["relation"] = "differs"
    entry["difference"] = render(computed - printed)
    entry["terms"] = term_differences(computed, printed)
    return entry
