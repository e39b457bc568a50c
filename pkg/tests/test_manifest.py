import pytest

from jetcanon import ParseError, parse_manifest, render
from jetcanon.manifest import ManifestError
from conftest import MANIFESTS, manifest

GOOD = """\
[bundle]
base = x
fiber = u
params = k>0 t

[transform]
x~ = x/k
u~ = k*u

[operator]
u u : 1 * D{x}      # the KdV structure

[hamiltonian]
H = -1/2*u_x^2 + 1/6*u^3

[claws]
P1 = 1/2*u^2
M  = u
"""


def test_parse_good():
    m = parse_manifest(GOOD)
    assert (m.bundle.n, m.bundle.m) == (1, 1)
    assert "k" in m.bundle.positive and "t" not in m.bundle.positive
    assert m.hamiltonian_name == "H"
    assert list(m.claws) == ["P1", "M"]
    assert m.operator.order == 1
    assert render(m.transform.base_map[0]) == "x/k"


def test_operator_rows_with_several_terms():
    m = manifest("kdv2nd_scaling")
    assert m.operator.order == 3
    assert render(m.operator.coefficient(0, 0, ())) == "1/3*u_x"
    assert render(m.operator.coefficient(0, 0, (0,))) == "2/3*u"


def test_boussinesq_matrix():
    m = manifest("boussinesq3")
    assert list(m.bundle.fiber) == ["u", "v"]
    assert m.operator.coefficient(0, 1, (0,)) == m.operator.coefficient(1, 0, (0,))
    assert m.operator.coefficient(0, 0, (0,)).is_zero


@pytest.mark.parametrize("name", sorted(p.stem for p in MANIFESTS.glob("*.jv")))
def test_shipped_manifests_load(name):
    assert manifest(name).operator.terms()


def _error(text):
    with pytest.raises(ManifestError) as info:
        parse_manifest(text, "m.jv")
    return info.value


def test_missing_operator():
    text = GOOD.replace("[operator]\nu u : 1 * D{x}      # the KdV structure\n", "")
    assert "missing [operator]" in str(_error(text))


def test_expression_error_position():
    err = _error(GOOD.replace("P1 = 1/2*u^2", "P1 = 1/2*w^2"))
    assert (err.line, err.col) == (17, 10)
    assert str(err).startswith("m.jv:17:10: unknown identifier 'w'")


def test_operator_errors():
    assert _error(GOOD.replace("u u : 1 * D{x}", "u w : D{x}")).line == 11
    err = _error(GOOD.replace("u u : 1 * D{x}", "u u : D{x} u"))
    assert "end in D{...}" in str(err)
    err = _error(GOOD.replace("u u : 1 * D{x}", "u u : D{x} 2*D{x}"))
    assert "joined by" in str(err)
    err = _error(GOOD.replace("u u : 1 * D{x}", "u u : D{q}"))
    assert err.line == 11


@pytest.mark.parametrize("old, new, message", [
    ("[claws]", "[clause]", "unknown section"),
    ("[bundle]\n", "oops\n[bundle]\n", "before the first section"),
    ("u~ = k*u\n", "", "missing u~"),
    ("u~ = k*u", "w~ = k*u", "declared variable"),
    ("x~ = x/k", "x~ = u", "invalid transform"),
    ("params = k>0 t", "params = k>1 t", "name>0"),
    ("H = -1/2*u_x^2 + 1/6*u^3", "H = u\nG = u", "exactly one"),
    ("M  = u", "M  u", "name = value"),
    ("[hamiltonian]", "[hamiltonian]\n[hamiltonian]", "duplicate section"),
])
def test_semantic_errors(old, new, message):
    assert message in str(_error(GOOD.replace(old, new)))


def test_options_and_expected():
    text = GOOD + "\n[expected]\nclaw P1 = k/2*u^2\nrhs u = u\n\n[options]\nsamples = 5\ncase = 1\n"
    m = parse_manifest(text)
    assert m.expected["claws"] == {"P1": "k/2*u^2"} and m.expected["rhs"] == {"u": "u"}
    assert m.options == {"samples": 5, "case": "1"}
    assert "integer" in str(_error(GOOD + "\n[options]\nseed = x\n"))


@pytest.mark.parametrize("name", sorted(p.stem for p in MANIFESTS.glob("*.jv")))
def test_render_round_trip_on_corpus(name):
    m = manifest(name)
    exprs = [m.hamiltonian, *m.claws.values()]
    if m.transform is not None:
        exprs += [*m.transform.base_map, *m.transform.fiber_map]
    exprs += [c for *_, c, _ in m.operator.terms()]
    texts = [m.expected.get("hamiltonian"), *m.expected.get("rhs", {}).values(),
             *m.expected.get("claws", {}).values()]
    for t in filter(None, texts):
        try:
            exprs.append(m.bundle.parse(t))
        except ParseError:
            pass
    for e in exprs:
        assert m.bundle.parse(render(e)) == e
