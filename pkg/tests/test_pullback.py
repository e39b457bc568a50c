import random

import pytest

from jetcanon import (ONE, ZERO, Automorphism, Bundle, Prolongation, chain_rule_residuals, render,
                      transform_functional, verify_lemma1)
from jetcanon.errors import OrderLimitError, ShapeError, SingularError
from jetcanon.pullback import jacobian, variational_sides, orientation
from jetcanon.sampling import random_densities

HALF_ANGLE = ("(1 - w^2)/(1 + w^2)", "2*w/(1 + w^2)")


def inversion(b):
    return Automorphism.parse(b, ["1/x"], ["x^2*u"])


def test_first_jet_of_inversion(kdv):
    prol = Prolongation(inversion(kdv))
    assert prol.entry(0, (0,)) == kdv.parse("-x^4*u_x - 2*x^3*u")
    assert prol.det == kdv.parse("-1/x^2")


def test_transformed_hamiltonian_of_inversion(kdv):
    prol = Prolongation(inversion(kdv))
    H = kdv.parse("-1/2*u_x^2 + 1/6*u^3")
    assert render(transform_functional(H, prol)) == \
        "1/2*x^6*u_x^2 + 2*x^5*u*u_x - 1/6*x^4*u^3 + 2*x^4*u^2"


def test_scaling_pullback(kdv):
    prol = Prolongation(Automorphism.parse(kdv, ["x/k"], ["k*u"]))
    assert prol.pullback(kdv.parse("u_x")) == kdv.parse("k^2*u_x")
    assert prol.pullback(kdv.parse("u_xxx")) == kdv.parse("k^4*u_xxx")


def test_table_independent_of_index_order(plane):
    psi = Automorphism.parse(plane, ["x + y^2", "y"], ["x*u + 3*y*u^2"])
    prol = Prolongation(psi)
    assert prol.entry_along(0, (0, 1, 1)) == prol.entry_along(0, (1, 0, 1)) == prol.entry(0, (0, 1, 1))


def test_rotation_with_half_angle_parameter():
    b = Bundle(["x", "y"], ["u"], ["w"])
    c, s = (b.parse(t) for t in HALF_ANGLE)
    psi = Automorphism(b, [c * b["x"] + s * b["y"], -s * b["x"] + c * b["y"]],
                       [b.parse("x*u + 3*y*u^2")])
    prol = Prolongation(psi)
    printed = (b.parse("x*u_x + u + 6*y*u*u_x") * c + b.parse("x*u_y + 3*u^2 + 6*y*u*u_y") * s)
    assert prol.pullback(b.parse("u_x")) == printed
    assert all(r.is_zero for r in chain_rule_residuals(b.parse("u_x"), prol))


def test_rotation_with_free_parameters_picks_up_norm(plane):
    psi = Automorphism.parse(plane, ["c*x + s*y", "-s*x + c*y"], ["x*u + 3*y*u^2"])
    prol = Prolongation(psi)
    printed = plane.parse("(x*u_x + u + 6*y*u*u_x)*c + (x*u_y + 3*u^2 + 6*y*u*u_y)*s")
    assert prol.pullback(plane.parse("u_x")) * plane.parse("c^2 + s^2") == printed


def test_lemma1_on_random_densities(pair):
    prol = Prolongation(Automorphism.parse(pair, ["1/x"], ["x^2*u", "x^2*v"]))
    for P in random_densities(pair, 10, seed=3):
        assert verify_lemma1(P, prol)


def test_variational_sides_are_nontrivial(kdv):
    prol = Prolongation(inversion(kdv))
    (lhs,), (rhs,) = variational_sides(kdv.parse("u_x^2"), prol)
    assert lhs == rhs
    # by hand: Psi(u_x^2) = -(x^6 u_x^2 + 4 x^5 u u_x + 4 x^4 u^2)
    assert lhs == kdv.parse("2*x^6*u_xx + 12*x^5*u_x + 12*x^4*u")


def test_compose_with_inverse_is_identity(kdv):
    psi = Automorphism.parse(kdv, ["x/k"], ["k*u"])
    inv = Automorphism.parse(kdv, ["k*x"], ["u/k"])
    both = psi.compose(inv)
    assert both.base_map == Automorphism.identity(kdv).base_map
    assert both.fiber_map == Automorphism.identity(kdv).fiber_map


def test_double_transformation_returns_original(kdv):
    psi = Prolongation(Automorphism.parse(kdv, ["x/k"], ["k*u"]))
    inv = Prolongation(Automorphism.parse(kdv, ["k*x"], ["u/k"]))
    H = kdv.parse("-1/2*u_x^2 + 1/6*u^3 + x*u")
    assert transform_functional(transform_functional(H, inv), psi) == H


def test_jacobian_inverse(plane):
    psi = Automorphism.parse(plane, ["x + y^2", "x*y + 1"], ["u"])
    J, det, inv = jacobian(psi)
    assert det == plane.parse("x - 2*y^2")
    for i in range(2):
        for k in range(2):
            prod = J[i][0] * inv[0][k] + J[i][1] * inv[1][k]
            assert prod == (ONE if i == k else ZERO)


def test_singular_base_map(plane):
    with pytest.raises(SingularError):
        Prolongation(Automorphism.parse(plane, ["x + y", "2*x + 2*y"], ["u"]))


def test_validation(kdv):
    with pytest.raises(ShapeError):
        Automorphism.parse(kdv, ["x + u"], ["u"])
    with pytest.raises(ShapeError):
        Automorphism.parse(kdv, ["x"], ["u_x"])


def test_order_limit_in_prolongation():
    b = Bundle(["x"], ["u"], order_limit=2)
    prol = Prolongation(Automorphism.parse(b, ["2*x"], ["u"]))
    assert prol.entry(0, (0, 0)) == b.parse("1/4*u_xx")
    with pytest.raises(OrderLimitError):
        prol.entry(0, (0, 0, 0))


@pytest.mark.parametrize("det, expected", [
    ("3", "+"), ("-1/x^2", "-"), ("1/k", "+"), ("x", "?"), ("x^2 + 1", "?"), ("-k^3", "-"),
])
def test_orientation(kdv, det, expected):
    assert orientation(kdv.parse(det), kdv) == expected
