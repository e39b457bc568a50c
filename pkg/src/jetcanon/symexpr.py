"""Exact rational functions over Q in named symbols.

An :class:`Expr` is a pair ``(num, den)`` of sparse polynomials with
``Fraction`` coefficients, always kept in normal form:

* ``gcd(num, den) == 1``;
* the leading monomial of ``den`` (graded-lex, see :func:`monomial_key`)
  has coefficient ``+1``;
* zero is ``0/1``.

Two expressions are mathematically equal iff their normal forms are
identical, so ``==`` decides equality of rational functions.

A polynomial is a ``dict`` mapping a monomial to its coefficient. A monomial
is a tuple of ``(Symbol, exponent)`` pairs sorted by ``Symbol.key``. These
dicts are never mutated once they are stored in an ``Expr``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import chain
from math import gcd
from typing import Iterable, Mapping, Union

from .errors import SingularError

Number = Union[int, Fraction]

BASE = "base"
JET = "jet"
PARAM = "param"


class Symbol:
    """A named coordinate.

    ``key`` fixes the variable order used by the monomial order; bundles hand
    out keys so that base variables come first, then jet variables by order,
    then parameters. Jet symbols carry their fiber index ``field`` and sorted
    multi-index ``index`` (a tuple of base-variable positions).
    """

    __slots__ = ("name", "kind", "key", "field", "index", "_negkey", "_hash")

    def __init__(self, name: str, kind: str, key: tuple, field: int | None = None,
                 index: tuple[int, ...] = ()):
        self.name = name
        self.kind = kind
        self.key = key
        self.field = field
        self.index = tuple(index)
        self._negkey = tuple(-k for k in key)
        self._hash = hash((name, key))

    @property
    def order(self) -> int:
        return len(self.index)

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Symbol) and self.key == other.key and self.name == other.name

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"Symbol({self.name!r})"


# ---------------------------------------------------------------------------
# sparse polynomial helpers

def _skey(pair):
    return pair[0].key


def monomial_key(m):
    """Sort key realising graded-lex order (larger key = larger monomial)."""
    return (sum(e for _, e in m), tuple((s._negkey, e) for s, e in m))


def _mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for s, e in b:
        d[s] = d.get(s, 0) + e
    return tuple(sorted(d.items(), key=_skey))


def _mono_div(a, b):
    """a / b, assuming b divides a."""
    if not b:
        return a
    d = dict(a)
    for s, e in b:
        r = d[s] - e
        if r:
            d[s] = r
        else:
            del d[s]
    return tuple(sorted(d.items(), key=_skey))


def _mono_gcd(monos):
    it = iter(monos)
    g = dict(next(it))
    for m in it:
        if not g:
            break
        md = dict(m)
        g = {s: min(e, md[s]) for s, e in g.items() if s in md}
    return tuple(sorted(g.items(), key=_skey))


def _padd(p, q, sign=1):
    out = dict(p)
    for m, c in q.items():
        v = out.get(m, 0) + sign * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _pscale(p, c):
    if c == 1:
        return p
    return {m: v * c for m, v in p.items()}


def _pmul(p, q):
    if len(p) == 1 and () in p:
        return _pscale(q, p[()])
    if len(q) == 1 and () in q:
        return _pscale(p, q[()])
    if len(p) * len(q) > _PACKED_THRESHOLD:
        return _pmul_packed(p, q)
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


_PACKED_THRESHOLD = 64
_FIELD_BITS = 24


def _integer_form(p):
    """(common denominator, {monomial: integer numerator})."""
    den = 1
    for c in p.values():
        d = c.denominator if isinstance(c, Fraction) else 1
        den = den * d // gcd(den, d)
    return den, {m: int(c * den) for m, c in p.items()}


def _pmul_packed(p, q):
    # exponent vectors packed into one int, integer coefficients
    syms = sorted(_psymbols(p) | _psymbols(q), key=lambda s: s.key)
    shift = {s: i * _FIELD_BITS for i, s in enumerate(syms)}
    mask = (1 << _FIELD_BITS) - 1

    def pack(m):
        return sum(e << shift[s] for s, e in m)

    dp, ip = _integer_form(p)
    dq, iq = _integer_form(q)
    qa = [(pack(m), c) for m, c in iq.items()]
    acc = {}
    get = acc.get
    for m1, c1 in ip.items():
        k1 = pack(m1)
        for k2, c2 in qa:
            k = k1 + k2
            acc[k] = get(k, 0) + c1 * c2
    den = dp * dq
    out = {}
    for k, c in acc.items():
        if not c:
            continue
        mono = []
        for s in syms:
            e = k & mask
            if e:
                mono.append((s, e))
            k >>= _FIELD_BITS
        out[tuple(mono)] = Fraction(c, den)
    return out


def _ppow(p, k):
    result = {(): Fraction(1)}
    base = p
    while k:
        if k & 1:
            result = _pmul(result, base)
        k >>= 1
        if k:
            base = _pmul(base, base)
    return result


def _pdiff(p, s):
    out = {}
    for m, c in p.items():
        for i, (t, e) in enumerate(m):
            if t == s:
                rest = m[:i] + ((t, e - 1),) + m[i + 1:] if e > 1 else m[:i] + m[i + 1:]
                v = out.get(rest, 0) + c * e
                if v:
                    out[rest] = v
                else:
                    out.pop(rest, None)
                break
    return out


def _pderive(p, images):
    """Apply the derivation sending each symbol ``s`` to polynomial ``images[s]``."""
    if len(p) > _PACKED_THRESHOLD and all(len(img) == 1 for img in images.values()):
        return _pderive_packed(p, images)
    out = {}
    for m, c in p.items():
        for i, (s, e) in enumerate(m):
            img = images.get(s)
            if not img:
                continue
            rest = m[:i] + ((s, e - 1),) + m[i + 1:] if e > 1 else m[:i] + m[i + 1:]
            ce = c * e
            for mi, ci in img.items():
                mm = _mono_mul(rest, mi)
                v = out.get(mm, 0) + ce * ci
                if v:
                    out[mm] = v
                else:
                    out.pop(mm, None)
    return out


def _pderive_packed(p, images):
    # every image is a single term c*mono: s^e -> e*c * s^(e-1) * mono
    syms = _psymbols(p)
    for img in images.values():
        syms |= _psymbols(img)
    syms = sorted(syms, key=lambda s: s.key)
    shift = {s: i * _FIELD_BITS for i, s in enumerate(syms)}
    mask = (1 << _FIELD_BITS) - 1
    den, ip = _integer_form(p)
    rules = []
    for s, img in images.items():
        if s not in shift:
            continue
        (mono, c), = img.items()
        cd = c.denominator if isinstance(c, Fraction) else 1
        rules.append((shift[s], sum(e << shift[t] for t, e in mono) - (1 << shift[s]), c, cd))
    cden = 1
    for *_, cd in rules:
        cden = cden * cd // gcd(cden, cd)
    rules = [(sh, delta, int(c * cden)) for sh, delta, c, _ in rules]
    acc = {}
    get = acc.get
    for m, c in ip.items():
        k = sum(e << shift[t] for t, e in m)
        for sh, delta, ci in rules:
            e = (k >> sh) & mask
            if e:
                kk = k + delta
                acc[kk] = get(kk, 0) + c * e * ci
    total = den * cden
    out = {}
    for k, c in acc.items():
        if not c:
            continue
        mono = []
        for t in syms:
            e = k & mask
            if e:
                mono.append((t, e))
            k >>= _FIELD_BITS
        out[tuple(mono)] = Fraction(c, total)
    return out


def _psymbols(p):
    return {s for m in p for s, _ in m}


_ONE = {(): Fraction(1)}


@lru_cache(maxsize=64)
def _gcd_ring(nvars):
    from sympy import QQ
    from sympy.polys.orderings import grlex
    from sympy.polys.rings import ring

    names = ",".join(f"g{i}" for i in range(nvars))
    return ring(names, QQ, grlex)[0]


def _cancel_general(num, den):
    """Cancel the polynomial gcd of num and den (multivariate, via sympy)."""
    from sympy import QQ

    syms = sorted(_psymbols(num) | _psymbols(den), key=lambda s: s.key)
    pos = {s: i for i, s in enumerate(syms)}
    ring = _gcd_ring(len(syms))

    def to_ring(p):
        terms = {}
        for m, c in p.items():
            exps = [0] * len(syms)
            for s, e in m:
                exps[pos[s]] = e
            terms[tuple(exps)] = QQ(c.numerator, c.denominator)
        return ring.from_dict(terms)

    def from_ring(r):
        out = {}
        for exps, c in r.terms():
            m = tuple((syms[i], e) for i, e in enumerate(exps) if e)
            out[m] = Fraction(int(c.numerator), int(c.denominator))
        return out

    p, q = to_ring(num).cancel(to_ring(den))
    return from_ring(p), from_ring(q)


def _normalize(num, den):
    if not num:
        return ZERO
    if not den:
        raise SingularError("division by zero")
    if len(den) == 1 and () in den:
        c = den[()]
        return Expr._raw(_pscale(num, 1 / Fraction(c)), _ONE)

    g = _mono_gcd(chain(num, den))
    if g:
        num = {_mono_div(m, g): c for m, c in num.items()}
        den = {_mono_div(m, g): c for m, c in den.items()}
    if len(den) > 1 and len(num) > 1:
        num, den = _cancel_general(num, den)

    lm = max(den, key=monomial_key)
    lc = den[lm]
    if lc != 1:
        inv = 1 / Fraction(lc)
        num = _pscale(num, inv)
        den = _pscale(den, inv)
    return Expr._raw(num, den)


# ---------------------------------------------------------------------------

class Expr:
    """Immutable rational function in normal form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, value: Number = 0):
        value = Fraction(value)
        self.num = {(): value} if value else {}
        self.den = _ONE
        self._hash = None

    @classmethod
    def _raw(cls, num, den):
        e = object.__new__(cls)
        e.num = num
        e.den = den
        e._hash = None
        return e

    @classmethod
    def const(cls, value: Number) -> "Expr":
        return cls(value)

    @classmethod
    def symbol(cls, s: Symbol) -> "Expr":
        return cls._raw({((s, 1),): Fraction(1)}, _ONE)

    @classmethod
    def from_polys(cls, num: dict, den: dict | None = None) -> "Expr":
        num = {m: Fraction(c) for m, c in num.items() if c}
        if den is None:
            return cls._raw(num, _ONE)
        return _normalize(num, {m: Fraction(c) for m, c in den.items() if c})

    @staticmethod
    def sum(terms: Iterable["Expr"]) -> "Expr":
        """Add many expressions, grouping terms that share a denominator."""
        groups: dict = {}
        for t in terms:
            t = _coerce(t)
            if not t.num:
                continue
            k = frozenset(t.den.items())
            if k in groups:
                groups[k] = (_padd(groups[k][0], t.num), t.den)
            else:
                groups[k] = (t.num, t.den)
        total = ZERO
        for num, den in groups.values():
            if den is _ONE or den == _ONE:
                part = Expr._raw(num, _ONE)
            else:
                part = _normalize(num, den)
            total = total + part
        return total

    # -- inspection ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_polynomial(self) -> bool:
        return self.den == _ONE

    @property
    def is_constant(self) -> bool:
        return self.den == _ONE and all(not m for m in self.num)

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return self.num.get((), Fraction(0))

    def symbols(self) -> set[Symbol]:
        return _psymbols(self.num) | _psymbols(self.den)

    def numerator(self) -> "Expr":
        return Expr._raw(self.num, _ONE)

    def denominator(self) -> "Expr":
        return Expr._raw(self.den, _ONE)

    def terms(self):
        """(coefficient, monomial) pairs of the numerator, in descending order."""
        return [(self.num[m], m) for m in sorted(self.num, key=monomial_key, reverse=True)]

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den is other.den or self.den == other.den:
            if self.den == _ONE:
                return Expr._raw(_padd(self.num, other.num), _ONE)
            return _normalize(_padd(self.num, other.num), self.den)
        num = _padd(_pmul(self.num, other.den), _pmul(other.num, self.den))
        return _normalize(num, _pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return Expr._raw({m: -c for m, c in self.num.items()}, self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return ZERO
        if self.den == _ONE and other.den == _ONE:
            return Expr._raw(_pmul(self.num, other.num), _ONE)
        return _normalize(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            raise SingularError("division by the zero expression")
        if not self.num:
            return ZERO
        return _normalize(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k == 0:
            return ONE
        if k < 0:
            if not self.num:
                raise SingularError("zero raised to a negative power")
            return (ONE / self) ** (-k)
        if not self.num:
            return ZERO
        # gcd(a, b) == 1 implies gcd(a^k, b^k) == 1, and lc(b^k) == lc(b)^k == 1
        den = self.den if self.den == _ONE else _ppow(self.den, k)
        return Expr._raw(_ppow(self.num, k), den)

    # -- calculus and substitution -------------------------------------------

    def partial(self, s: Symbol) -> "Expr":
        """Formal partial derivative, all other symbols independent."""
        dn = _pdiff(self.num, s)
        if not any(t == s for m in self.den for t, _ in m):
            if self.den == _ONE:
                return Expr._raw(dn, _ONE)
            return _normalize(dn, self.den) if dn else ZERO
        dd = _pdiff(self.den, s)
        num = _padd(_pmul(dn, self.den), _pmul(self.num, dd), -1)
        return _normalize(num, _pmul(self.den, self.den))

    def derive(self, images: Mapping[Symbol, "Expr"]) -> "Expr":
        """Apply the derivation ``s -> images[s]`` (missing symbols map to 0).

        Polynomial images are handled at the polynomial level; otherwise the
        chain-rule sum of partials is used.
        """
        if all(v.den == _ONE for v in images.values()):
            pimg = {s: v.num for s, v in images.items() if v.num}
            dn = _pderive(self.num, pimg)
            if self.den == _ONE:
                return Expr._raw(dn, _ONE)
            dd = _pderive(self.den, pimg)
            if not dd:
                return _normalize(dn, self.den) if dn else ZERO
            num = _padd(_pmul(dn, self.den), _pmul(self.num, dd), -1)
            return _normalize(num, _pmul(self.den, self.den))
        return Expr.sum(self.partial(s) * images[s] for s in self.symbols() if s in images)

    def substitute(self, bindings: Mapping[Symbol, "Expr"]) -> "Expr":
        """Simultaneous substitution of symbols by expressions."""
        if not self.num:
            return ZERO
        relevant = {s: _coerce(v) for s, v in bindings.items()}
        cache: dict = {}
        num = _evaluate(self.num, relevant, cache)
        if self.den == _ONE:
            return num
        den = _evaluate(self.den, relevant, cache)
        if den.is_zero:
            raise SingularError(f"singular substitution: denominator {render(self.denominator())} vanishes")
        return num / den

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    def __bool__(self):
        return bool(self.num)

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Expr({render(self)!r})"


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Expr(x)
    if isinstance(x, Symbol):
        return Expr.symbol(x)
    return NotImplemented


def _evaluate(poly, bindings, cache):
    terms = []
    for m, c in poly.items():
        t = Expr(c)
        for s, e in m:
            k = (s, e)
            f = cache.get(k)
            if f is None:
                base = bindings.get(s)
                f = (base if base is not None else Expr.symbol(s)) ** e
                cache[k] = f
            t = t * f
        terms.append(t)
    return Expr.sum(terms)


ZERO = Expr._raw({}, _ONE)
ONE = Expr._raw({(): Fraction(1)}, _ONE)


def equal(a: Expr, b: Expr) -> bool:
    return _coerce(a) == _coerce(b)


def partial(e: Expr, s: Symbol) -> Expr:
    return e.partial(s)


def substitute(e: Expr, bindings: Mapping[Symbol, Expr]) -> Expr:
    return e.substitute(bindings)


# ---------------------------------------------------------------------------
# rendering

def _fmt_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_mono(m) -> str:
    return "*".join(s.name if e == 1 else f"{s.name}^{e}" for s, e in m)


def _render_poly(p) -> str:
    if not p:
        return "0"
    out = []
    for i, m in enumerate(sorted(p, key=monomial_key, reverse=True)):
        c = p[m]
        neg = c < 0
        a = -c if neg else c
        if not m:
            body = _fmt_coef(a)
        elif a == 1:
            body = _fmt_mono(m)
        else:
            body = f"{_fmt_coef(a)}*{_fmt_mono(m)}"
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def render(e: Expr) -> str:
    """Deterministic text form; reparses to an equal expression."""
    n = _render_poly(e.num)
    if e.den == _ONE:
        return n
    if len(e.num) > 1:
        n = f"({n})"
    d = _render_poly(e.den)
    # a lone symbol power needs no parentheses; den's coefficient is 1 there
    if len(e.den) > 1 or len(next(iter(e.den))) > 1:
        d = f"({d})"
    return f"{n}/{d}"
