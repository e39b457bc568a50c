"""Reader for the line-oriented ``.jv`` manifest format.

    [bundle]                 # declaration order fixes the monomial order
    base   = x               # ``name>0`` marks a positive variable
    fiber  = u
    params = k>0 t

    [transform]              # right-hand sides in untilded coordinates
    x~ = x/k
    u~ = k*u

    [operator]               # <a> <b> : coef*D{indices} + ...
    u u : 1*D{x}

    [hamiltonian]
    H = -1/2*u_x^2 + 1/6*u^3

    [claws]
    P1 = 1/2*u^2

    [expected]               # printed reference values, compared not trusted
    hamiltonian = ...
    rhs u = ...
    claw P1 = ...

    [options]
    case = auto
    samples = 50
    seed = 0
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import JetError, ParseError
from .evosys import EvoSystem
from .jetspace import DEFAULT_ORDER_LIMIT, Bundle
from .poisson import DiffOperator
from .pullback import Automorphism
from .symexpr import Expr

SECTIONS = ("bundle", "transform", "operator", "hamiltonian", "claws", "expected", "options")
_HEADER = re.compile(r"\[\s*([A-Za-z]+)\s*\]\Z")
_NAME = re.compile(r"[A-Za-z][A-Za-z0-9']*\Z")
_DTERM = re.compile(r"(?:\*\s*)?D\{([^}]*)\}")


class ManifestError(JetError):
    def __init__(self, message, line=None, col=None, path=None):
        self.line, self.col, self.path = line, col, path
        where = ":".join(str(p) for p in (path, line, col) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)


@dataclass
class Manifest:
    bundle: Bundle
    operator: DiffOperator
    hamiltonian_name: str
    hamiltonian: Expr
    transform: Automorphism | None = None
    claws: dict[str, Expr] = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    path: str | None = None

    def system(self) -> EvoSystem:
        return EvoSystem(self.bundle, self.operator, self.hamiltonian, dict(self.claws))


@dataclass
class _Line:
    no: int
    text: str
    indent: int


def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


class _Reader:
    def __init__(self, text: str, path, order_limit):
        self.path = path
        self.order_limit = order_limit
        self.sections: dict[str, list[_Line]] = {}
        self._split(text)

    def error(self, msg, line=None, col=None):
        return ManifestError(msg, line.no if line else None, col, self.path)

    def _split(self, text):
        current = None
        for no, raw in enumerate(text.splitlines(), 1):
            body = _strip_comment(raw)
            if not body.strip():
                continue
            indent = len(body) - len(body.lstrip())
            stripped = body.strip()
            m = _HEADER.match(stripped)
            if m:
                name = m.group(1).lower()
                if name not in SECTIONS:
                    raise ManifestError(f"unknown section [{name}]", no, indent + 1, self.path)
                if name in self.sections:
                    raise ManifestError(f"duplicate section [{name}]", no, indent + 1, self.path)
                self.sections[name] = []
                current = name
                continue
            if current is None:
                raise ManifestError("content before the first section header", no, indent + 1, self.path)
            self.sections[current].append(_Line(no, body, indent))

    def key_values(self, section):
        out = []
        for ln in self.sections.get(section, []):
            lhs, eq, rhs = ln.text.partition("=")
            if not eq:
                raise self.error("expected 'name = value'", ln, ln.indent + 1)
            col = len(lhs) + 1 + (len(rhs) - len(rhs.lstrip())) + 1
            out.append((ln, lhs.strip(), rhs.strip(), col))
        return out

    def expr(self, text, ln, col):
        try:
            return self.bundle.parse(text)
        except ParseError as exc:
            c = col + exc.position if exc.position is not None else col
            raise ManifestError(str(exc).split(" (at column")[0], ln.no, c, self.path) from None
        except JetError as exc:
            raise ManifestError(str(exc), ln.no, col, self.path) from None

    # -- sections ------------------------------------------------------------

    def read_bundle(self):
        if "bundle" not in self.sections:
            raise self.error("missing [bundle] section")
        decl = {"base": [], "fiber": [], "params": []}
        positive = []
        for ln, key, value, col in self.key_values("bundle"):
            if key not in decl:
                raise self.error(f"unknown bundle key {key!r}", ln, ln.indent + 1)
            for tok in value.split():
                name, gt, rest = tok.partition(">")
                if gt:
                    if rest != "0":
                        raise self.error(f"only 'name>0' tags are supported, got {tok!r}", ln, col)
                    positive.append(name)
                decl[key].append(name)
        try:
            self.bundle = Bundle(decl["base"], decl["fiber"], decl["params"],
                                 positive=positive, order_limit=self.order_limit)
        except JetError as exc:
            raise self.error(str(exc)) from None

    def read_transform(self):
        if "transform" not in self.sections:
            return None
        b = self.bundle
        got = {}
        for ln, key, value, col in self.key_values("transform"):
            if not key.endswith("~") or key[:-1] not in b.base + b.fiber:
                raise self.error(f"transform target must be a declared variable with '~', got {key!r}",
                                 ln, ln.indent + 1)
            if key[:-1] in got:
                raise self.error(f"{key} defined twice", ln, ln.indent + 1)
            got[key[:-1]] = (self.expr(value, ln, col), ln)
        missing = [v for v in b.base + b.fiber if v not in got]
        if missing:
            raise self.error(f"[transform] is missing {', '.join(v + '~' for v in missing)}")
        try:
            return Automorphism(b, [got[x][0] for x in b.base], [got[u][0] for u in b.fiber])
        except JetError as exc:
            raise self.error(f"invalid transform: {exc}") from None

    def read_operator(self):
        if "operator" not in self.sections:
            raise self.error("missing [operator] section")
        b = self.bundle
        terms = []
        for ln in self.sections["operator"]:
            head, colon, body = ln.text.partition(":")
            names = head.split()
            if not colon or len(names) != 2:
                raise self.error("operator rows look like '<a> <b> : coef*D{x} + ...'", ln, ln.indent + 1)
            for nm in names:
                if nm not in b.fiber:
                    raise self.error(f"{nm!r} is not a fiber variable", ln, ln.text.index(nm) + 1)
            base_col = len(head) + 1
            matches = list(_DTERM.finditer(body))
            trailing = body[matches[-1].end():] if matches else body
            if not matches or trailing.strip():
                col = base_col + (matches[-1].end() if matches else 0) + 1
                raise self.error("each operator term must end in D{...}", ln, col)
            prev = 0
            for k, mt in enumerate(matches):
                raw, idx = body[prev:mt.start()], mt.group(1)
                coef_col = base_col + prev + (len(raw) - len(raw.lstrip())) + 1
                prev = mt.end()
                coef_text = raw.strip()
                if k > 0:
                    if coef_text.startswith("+"):
                        coef_text = coef_text[1:].strip()
                    elif not coef_text.startswith("-"):
                        raise self.error("operator terms must be joined by '+' or '-'", ln, coef_col)
                if coef_text in ("", "-"):
                    coef_text += "1"
                coef = self.expr(coef_text, ln, coef_col)
                try:
                    index = b.parse_index(idx.strip())
                except JetError as exc:
                    raise self.error(str(exc), ln, coef_col) from None
                terms.append((names[0], names[1], coef, index))
        return DiffOperator.build(b, terms)

    def read_named(self, section, required):
        if section not in self.sections:
            if required:
                raise self.error(f"missing [{section}] section")
            return {}
        out = {}
        for ln, key, value, col in self.key_values(section):
            if not _NAME.match(key):
                raise self.error(f"invalid name {key!r}", ln, ln.indent + 1)
            if key in out:
                raise self.error(f"{key} defined twice", ln, ln.indent + 1)
            out[key] = self.expr(value, ln, col)
        return out

    def read_expected(self):
        out = {"hamiltonian": None, "rhs": {}, "claws": {}}
        for ln, key, value, _ in self.key_values("expected"):
            parts = key.split()
            if parts == ["hamiltonian"]:
                out["hamiltonian"] = value
            elif len(parts) == 2 and parts[0] == "rhs" and parts[1] in self.bundle.fiber:
                out["rhs"][parts[1]] = value
            elif len(parts) == 2 and parts[0] == "claw":
                out["claws"][parts[1]] = value
            else:
                raise self.error(f"unknown expected entry {key!r}", ln, ln.indent + 1)
        return out

    def read_options(self):
        out = {}
        for ln, key, value, col in self.key_values("options"):
            if key == "case":
                if value not in ("auto", "1", "2", "3"):
                    raise self.error("case must be auto, 1, 2 or 3", ln, col)
                out[key] = value
            elif key in ("samples", "seed"):
                try:
                    out[key] = int(value)
                except ValueError:
                    raise self.error(f"{key} must be an integer", ln, col) from None
            else:
                raise self.error(f"unknown option {key!r}", ln, ln.indent + 1)
        return out


def parse_manifest(text: str, path: str | None = None,
                   order_limit: int = DEFAULT_ORDER_LIMIT) -> Manifest:
    r = _Reader(text, path, order_limit)
    r.read_bundle()
    transform = r.read_transform()
    operator = r.read_operator()
    ham = r.read_named("hamiltonian", required=True)
    if len(ham) != 1:
        raise r.error("[hamiltonian] must define exactly one density")
    (hname, hexpr), = ham.items()
    m = Manifest(r.bundle, operator, hname, hexpr, transform,
                 claws=r.read_named("claws", required=False),
                 expected=r.read_expected(), options=r.read_options(), path=path)
    return m


def load_manifest(path, order_limit: int = DEFAULT_ORDER_LIMIT) -> Manifest:
    text = Path(path).read_text()
    return parse_manifest(text, str(path), order_limit)
