import math

import numpy as np
import pytest

from flagcurves.ode import (CONFORMAL, NONE, SYMPLECTIC, Binary, Const, DomainError, ExprSyntaxError,
                            OdeProblem, Var, differentiate, evaluate, generalized_wilczynski,
                            integrate_ode, linearize, parse_expr, structure_verdict, to_string)

EXPRS = ["y''^2 + sin(x)*y", "exp(y'/3) - y*y'", "sqrt(1 + y^2) * cos(y'')", "log(2 + sin(y)) / (1 + x^2)",
         "y^3 - 2*y'*y'' + x", "-y'^2 / (2 + cos(x*y))"]


# parser ---------------------------------------------------------------------------

def test_parse_tree_shape():
    e = parse_expr("y''^2 + sin(x)*y", 2)
    assert isinstance(e, Binary) and e.op == "+"
    assert e.left == Binary("^", Var("y2"), Const(2.0))
    assert e.right.op == "*"


def test_power_is_right_associative_and_binds_tighter_than_minus():
    assert evaluate(parse_expr("2^3^2", 2), {}) == 512
    assert evaluate(parse_expr("-2^2", 2), {}) == -4


def test_prime_and_index_spellings_agree():
    assert parse_expr("y'''", 3) == parse_expr("y3", 3)
    assert parse_expr("y", 3) == parse_expr("y0", 3)


@pytest.mark.parametrize("src, k", [("y3", 2), ("y'''", 2), ("foo(x)", 2), ("y + * 2", 2), ("(y", 2),
                                    ("z", 2), ("", 2)])
def test_syntax_errors(src, k):
    with pytest.raises(ExprSyntaxError):
        parse_expr(src, k)


def test_error_position():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("y + * 2", 2)
    assert err.value.pos == 4


@pytest.mark.parametrize("src", EXPRS)
def test_round_trip(src):
    e = parse_expr(src, 2)
    assert parse_expr(to_string(e), 2) == e


# differentiation ---------------------------------------------------------------------

def test_derivative_examples():
    assert to_string(differentiate(parse_expr("y2^2", 2), "y2")) == "(2.0 * y2)"
    assert to_string(differentiate(parse_expr("sin(x)*y0", 2), "x")) == "(cos(x) * y0)"
    assert differentiate(parse_expr("x^2", 2), 1) == Const(0.0)


@pytest.mark.parametrize("src", EXPRS)
def test_derivative_against_finite_differences(src):
    e = parse_expr(src, 2)
    rng = np.random.default_rng(EXPRS.index(src))
    pts = rng.uniform(-0.8, 0.8, size=(100, 4))
    env = {"x": pts[:, 0], "y0": pts[:, 1], "y1": pts[:, 2], "y2": pts[:, 3]}
    h = 1e-5
    for name in ("x", "y0", "y1", "y2"):
        exact = np.broadcast_to(evaluate(differentiate(e, name), env), (100,))
        up = dict(env, **{name: env[name] + h})
        dn = dict(env, **{name: env[name] - h})
        fd = (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
        assert np.max(np.abs(exact - fd)) < 1e-6 * max(1.0, np.max(np.abs(exact)))


def test_domain_errors():
    with pytest.raises(DomainError):
        evaluate(parse_expr("log(y)", 2), {"x": 0.0, "y0": -1.0})
    with pytest.raises(DomainError):
        evaluate(parse_expr("1/y", 2), {"x": 0.0, "y0": 0.0})
    with pytest.raises(DomainError):
        evaluate(parse_expr("sqrt(y)", 2), {"x": 0.0, "y0": -4.0})


# integration -----------------------------------------------------------------------

def test_polynomial_solution_is_exact():
    sol = integrate_ode(OdeProblem.parse(3, "0"), [0, 1, 0], np.linspace(0, 2, 41))
    assert np.max(np.abs(sol.y[:, 0] - sol.t)) < 1e-14


def test_wronskian_constant():
    t = np.linspace(0, 2, 201)
    sol = integrate_ode(OdeProblem.parse(3, "y"), [0.1, 0.2, 0.3], t, fundamental=True)
    W = np.linalg.det(sol.phi)
    assert np.max(np.abs(W - 1)) < 1e-8


def test_rk4_fourth_order():
    p = OdeProblem.parse(3, "sin(y)")
    init = [0.3, -0.2, 0.5]
    ref = integrate_ode(p, init, np.linspace(0, 1, 1601)).y[-1, 0]
    e1 = abs(integrate_ode(p, init, np.linspace(0, 1, 21)).y[-1, 0] - ref)
    e2 = abs(integrate_ode(p, init, np.linspace(0, 1, 41)).y[-1, 0] - ref)
    assert e1 / e2 >= 14


def test_non_finite_state_is_reported():
    with pytest.raises((FloatingPointError, DomainError)):
        integrate_ode(OdeProblem.parse(3, "y^3"), [5, 5, 5], np.linspace(0, 5, 50))


def test_order_must_be_at_least_three():
    with pytest.raises(ValueError):
        OdeProblem.parse(2, "y")


# linearization ----------------------------------------------------------------------

def test_linearization_examples():
    t = np.linspace(0, 1, 21)
    zero = OdeProblem.parse(3, "0")
    assert not np.any(linearize(zero, integrate_ode(zero, [1, 2, 3], t)).p)
    lin = OdeProblem.parse(3, "y")
    p = linearize(lin, integrate_ode(lin, [1, 0, 0], t)).p
    assert np.all(p[:, 0] == 1) and not np.any(p[:, 1:])


def test_linearization_along_constant_second_derivative():
    # f = (y'')^2 - c^2 has y'' = c as a solution; then p2 = 2c and p0 = p1 = 0
    c = 0.7
    p = OdeProblem.parse(3, f"y''^2 - {c}^2")
    lin = linearize(p, integrate_ode(p, [0, 0, c], np.linspace(0, 1, 21)))
    assert np.allclose(lin.p[:, 2], 2 * c) and not np.any(lin.p[:, :2])


# invariants and verdicts ----------------------------------------------------------------

def test_generalized_wilczynski_examples():
    t = np.linspace(0, 1, 121)
    p = OdeProblem.parse(3, "0")
    tr = generalized_wilczynski(p, integrate_ode(p, [0, 1, 0], t, fundamental=True))
    assert tr.names == ["Θ3"] and np.max(np.abs(tr.values)) <= 1e-8
    p = OdeProblem.parse(3, "y")
    tr = generalized_wilczynski(p, integrate_ode(p, [0, 1, 0], t, fundamental=True))
    assert np.max(np.abs(tr.values - 6)) <= 1e-6


def test_verdicts():
    t = np.linspace(0, 1, 121)
    v = structure_verdict(OdeProblem.parse(3, "0"), t)
    assert v.kind == CONFORMAL and v.structure.parity == "symmetric" and v.structure.residual <= 1e-6
    v = structure_verdict(OdeProblem.parse(4, "0"), t)
    assert v.kind == SYMPLECTIC and v.structure.parity == "skew" and v.structure.nondegenerate
    v = structure_verdict(OdeProblem.parse(3, "y"), t)
    assert v.kind == NONE and math.isclose(v.theta_max["Θ3"], 6, rel_tol=1e-6)


def test_nonlinear_wunschmann_case():
    # the Schwarzian equation y''' = 3 y''^2 / (2 y') is a classical flat example
    t = np.linspace(0, 1, 201)
    v = structure_verdict(OdeProblem.parse(3, "3*y''^2/(2*y')"), t,
                          inits=[[0, 1, 0.2], [0.1, 1.5, -0.3], [0, 0.8, 0.1]])
    assert v.kind == CONFORMAL


def test_verdict_needs_three_solutions():
    with pytest.raises(ValueError):
        structure_verdict(OdeProblem.parse(3, "0"), np.linspace(0, 1, 50), inits=[[0, 1, 0]])
