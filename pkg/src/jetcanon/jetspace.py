"""Jet coordinates over a trivial vector bundle.

A :class:`Bundle` names the base variables ``x^i``, the fiber variables
``u^a`` and free parameters, and hands out jet symbols ``u^a_I`` on demand.
Multi-indices are plain sorted tuples of base-variable positions, so
``u_xy`` and ``u_yx`` are the same symbol.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence, Union

from .errors import OrderLimitError, ParseError, ShapeError, UnknownIdentifier
from .symexpr import BASE, JET, ONE, PARAM, ZERO, Expr, Symbol

MultiIndex = tuple[int, ...]
BaseIndex = Union[int, str]

_NAME = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")

DEFAULT_ORDER_LIMIT = 16


class Bundle:
    """Base variables, fiber variables and parameters of a trivial bundle E -> M.

    Declaration order fixes the monomial order used for rendering.
    ``positive`` lists names known to be positive (``k>0`` in manifests); it
    is only used to decide the sign of a Jacobian determinant.
    """

    def __init__(self, base: Sequence[str], fiber: Sequence[str], params: Sequence[str] = (),
                 *, positive: Iterable[str] = (), order_limit: int = DEFAULT_ORDER_LIMIT):
        base, fiber, params = tuple(base), tuple(fiber), tuple(params)
        if not base or not fiber:
            raise ShapeError("a bundle needs at least one base and one fiber variable")
        names = base + fiber + params
        for name in names:
            if not _NAME.match(name):
                raise ShapeError(f"invalid variable name {name!r}")
        if len(set(names)) != len(names):
            raise ShapeError("bundle variable names must be distinct")
        positive = frozenset(positive)
        if not positive <= set(names):
            raise ShapeError(f"positivity declared for unknown names {sorted(positive - set(names))}")

        self.base = base
        self.fiber = fiber
        self.params = params
        self.positive = positive
        self.order_limit = order_limit
        self.base_symbols = tuple(Symbol(x, BASE, (0, i)) for i, x in enumerate(base))
        self.param_symbols = tuple(Symbol(p, PARAM, (2, j)) for j, p in enumerate(params))
        # longest first so that greedy index parsing prefers multi-letter names
        self._index_names = sorted(range(len(base)), key=lambda i: -len(base[i]))

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def m(self) -> int:
        return len(self.fiber)

    @property
    def time(self) -> Symbol | None:
        return self.param("t") if "t" in self.params else None

    def with_order_limit(self, limit: int) -> "Bundle":
        return Bundle(self.base, self.fiber, self.params, positive=self.positive, order_limit=limit)

    def __eq__(self, other):
        return (isinstance(other, Bundle) and self.base == other.base
                and self.fiber == other.fiber and self.params == other.params)

    def __hash__(self):
        return hash((self.base, self.fiber, self.params))

    def __repr__(self):
        return f"Bundle(base={list(self.base)}, fiber={list(self.fiber)}, params={list(self.params)})"

    # -- symbols ------------------------------------------------------------

    def base_pos(self, i: BaseIndex) -> int:
        if isinstance(i, str):
            try:
                return self.base.index(i)
            except ValueError:
                raise ShapeError(f"{i!r} is not a base variable") from None
        if not 0 <= i < self.n:
            raise ShapeError(f"base index {i} out of range")
        return i

    def field_pos(self, a: Union[int, str]) -> int:
        if isinstance(a, str):
            try:
                return self.fiber.index(a)
            except ValueError:
                raise ShapeError(f"{a!r} is not a fiber variable") from None
        if not 0 <= a < self.m:
            raise ShapeError(f"fiber index {a} out of range")
        return a

    def x(self, i: BaseIndex = 0) -> Symbol:
        return self.base_symbols[self.base_pos(i)]

    def param(self, name: str) -> Symbol:
        return self.param_symbols[self.params.index(name)]

    def jet(self, a: Union[int, str], index: Iterable[BaseIndex] = ()) -> Symbol:
        a = self.field_pos(a)
        index = tuple(sorted(self.base_pos(i) for i in index))
        if len(index) > self.order_limit:
            raise OrderLimitError(
                f"jet order {len(index)} exceeds the configured limit {self.order_limit}")
        name = self.fiber[a]
        if index:
            name += "_" + self.index_name(index)
        return Symbol(name, JET, (1, len(index), a, *index), field=a, index=index)

    def u(self, a: Union[int, str] = 0) -> Symbol:
        return self.jet(a, ())

    def index_name(self, index: MultiIndex) -> str:
        return "".join(self.base[i] for i in index)

    def parse_index(self, text: str) -> MultiIndex:
        """Split a string such as ``"xy"`` into sorted base positions."""
        out = []
        pos = 0
        while pos < len(text):
            for i in self._index_names:
                if text.startswith(self.base[i], pos):
                    out.append(i)
                    pos += len(self.base[i])
                    break
            else:
                raise ParseError(f"malformed jet index {text!r}: {text[pos:]!r} is not a base variable")
        return tuple(sorted(out))

    def resolve(self, name: str) -> Symbol:
        if name in self.base:
            return self.x(name)
        if name in self.params:
            return self.param(name)
        field, sep, idx = name.partition("_")
        if field in self.fiber:
            if sep and not idx:
                raise ParseError(f"malformed jet index in {name!r}")
            return self.jet(field, self.parse_index(idx))
        raise UnknownIdentifier(f"unknown identifier {name!r}")

    def __getitem__(self, name: str) -> Expr:
        return Expr.symbol(self.resolve(name))

    def parse(self, text: str) -> Expr:
        from .parser import parse

        return parse(text, self)

    def all_jets(self, max_order: int) -> list[Symbol]:
        """Every jet symbol with order <= max_order, in monomial order."""
        from itertools import combinations_with_replacement

        out = []
        for k in range(max_order + 1):
            for a in range(self.m):
                for idx in combinations_with_replacement(range(self.n), k):
                    out.append(self.jet(a, idx))
        return out


# ---------------------------------------------------------------------------
# total derivatives and the Euler-Lagrange operator

def total_derivative(e: Expr, i: BaseIndex, bundle: Bundle) -> Expr:
    """D_i e = de/dx^i + sum over jets u^a_J in e of u^a_{Ji} de/du^a_J."""
    i = bundle.base_pos(i)
    images = {}
    for s in e.symbols():
        if s.kind == BASE:
            if s.key == (0, i):
                images[s] = ONE
        elif s.kind == JET:
            images[s] = Expr.symbol(bundle.jet(s.field, s.index + (i,)))
    return e.derive(images)


def total_derivative_multi(e: Expr, index: Iterable[BaseIndex], bundle: Bundle) -> Expr:
    for i in index:
        if e.is_zero:
            break
        e = total_derivative(e, i, bundle)
    return e


def euler_lagrange(P: Expr, bundle: Bundle) -> list[Expr]:
    """Components E_a(P) = sum_I (-D)_I dP/du^a_I, one per fiber variable."""
    # nested evaluation: A_I = dP/du_I - sum_{j >= max I} D_j A_{I+j}, E = A_()
    partials = {(s.field, s.index): P.partial(s) for s in P.symbols() if s.kind == JET}
    needed = set()
    for a, index in partials:
        for r in range(len(index) + 1):
            needed.add((a, index[:r]))
    out = []
    for a in range(bundle.m):
        acc = {}
        for _, index in sorted((k for k in needed if k[0] == a),
                               key=lambda k: -len(k[1])):
            lo = index[-1] if index else 0
            terms = [partials.get((a, index), ZERO)]
            for j in range(lo, bundle.n):
                child = acc.pop(index + (j,), None)
                if child is not None and not child.is_zero:
                    terms.append(-total_derivative(child, j, bundle))
            acc[index] = Expr.sum(terms)
        out.append(acc.get((), ZERO))
    return out


def is_total_divergence(P: Expr, bundle: Bundle) -> bool:
    """Null-Lagrangian test: every Euler-Lagrange component vanishes."""
    return all(c.is_zero for c in euler_lagrange(P, bundle))


def jet_order(e: Expr) -> int:
    return max((s.order for s in e.symbols() if s.kind == JET), default=0)
