import math
import random

import numpy as np
import pytest

from curlkit.errors import EvalDomainError, ParseError
from curlkit import exprlang
from curlkit.exprlang import (
    Bindings,
    BinOp,
    Call,
    Const,
    Neg,
    Num,
    Var,
    derivative,
    evaluate,
    evaluate_with_gradient,
    parse,
    parse_in_variables,
    substitute,
    to_source,
)

FD_STEP_FACTOR = 6.06e-6


def ev(source, coords, dimension=2, constants=None):
    constants = constants or {}
    tree = parse(source, dimension, set(constants))
    return evaluate(tree, Bindings(tuple(coords), constants))


def grad(source, coords, dimension=2, constants=None):
    constants = constants or {}
    tree = parse(source, dimension, set(constants))
    return evaluate_with_gradient(tree, Bindings(tuple(coords), constants))


def fd_gradient(tree, coords, constants):
    coords = list(coords)
    out = []
    for i, xi in enumerate(coords):
        h = max(1.0, abs(xi)) * FD_STEP_FACTOR
        hi, lo = list(coords), list(coords)
        hi[i] += h
        lo[i] -= h
        fp = evaluate(tree, Bindings(tuple(hi), constants))
        fm = evaluate(tree, Bindings(tuple(lo), constants))
        out.append((fp - fm) / (2 * h))
    return np.array(out)


# --- golden trees -----------------------------------------------------------

def test_paper_force_tree_structure():
    tree = parse("-F0/a^3 * x*y^2", 2, {"F0", "a"})
    # ((((-F0) / (a^3)) * x) * (y^2)) under the documented precedence
    root = tree.root
    assert isinstance(root, BinOp) and root.op == "*"
    assert isinstance(root.right, BinOp) and root.right.op == "^"
    assert root.right == BinOp((0, 0), "^", Var((0, 0), "y", 1), Num((0, 0), 2.0))
    inner = root.left
    assert isinstance(inner, BinOp) and inner.op == "*"
    assert inner.right == Var((0, 0), "x", 0)
    div = inner.left
    assert div == BinOp(
        (0, 0),
        "/",
        Neg((0, 0), Const((0, 0), "F0")),
        BinOp((0, 0), "^", Const((0, 0), "a"), Num((0, 0), 3.0)),
    )


GOLDEN = [
    # (source, canonical print)
    ("-F0/a^3 * x*y^2", "-F0/a^3*x*y^2"),
    ("-F0/a^3 * x^3", "-F0/a^3*x^3"),
    ("-(y*z)", "-(y*z)"),
    ("-(2*x*z)", "-(2*x*z)"),
    ("-(x*y)", "-(x*y)"),
    ("x", "x"),
    ("-x^2", "-x^2"),
    ("2^3^2", "2^3^2"),
    ("(2^3)^2", "(2^3)^2"),
    ("1/x + 1/y", "1/x + 1/y"),
    ("-F0*a^2*(1/x + 1/y)", "-F0*a^2*(1/x + 1/y)"),
    ("x^3*y^2", "x^3*y^2"),
    ("sin(x)*cos(y)", "sin(x)*cos(y)"),
    ("exp(-x^2 - y^2)", "exp(-x^2 - y^2)"),
    ("pow(x, 2) + pow(y, 3)", "pow(x, 2) + pow(y, 3)"),
    ("sqrt(x^2 + y^2)", "sqrt(x^2 + y^2)"),
    ("log(x/y)", "log(x/y)"),
    ("x - y - z", "x - y - z"),
    ("x - (y - z)", "x - (y - z)"),
    ("1e-3*x + 2.5E+2", "0.001*x + 250"),
    ("abs(x) + tan(y)", "abs(x) + tan(y)"),
    ("x^-2", "x^-2"),
]


@pytest.mark.parametrize("source,printed", GOLDEN)
def test_golden_print(source, printed):
    dim = 3 if "z" in source else 2
    tree = parse(source, dim, {"F0", "a"})
    assert to_source(tree) == printed


@pytest.mark.parametrize("source,_", GOLDEN)
def test_roundtrip_golden(source, _):
    dim = 3 if "z" in source else 2
    tree = parse(source, dim, {"F0", "a"})
    again = parse(to_source(tree), dim, {"F0", "a"})
    assert again.root == tree.root


# --- precedence and values --------------------------------------------------

def test_unary_minus_vs_power():
    assert ev("-x^2", (2.0, 0.0)) == -4.0


def test_power_right_associative():
    assert ev("2^3^2", (0.0, 0.0)) == 512.0


def test_negative_exponent():
    assert ev("x^-2", (2.0, 0.0)) == 0.25


def test_direct_arithmetic():
    assert ev("-(x*y^2)", (2.0, 3.0)) == -18.0
    assert ev("1/x + 1/y", (2.0, 2.0)) == 1.0


def test_paper_second_component_value():
    consts = {"F0": 1.0, "a": 1.0}
    assert ev("-F0/a^3 * x^3", (1.0, 0.5), constants=consts) == -1.0


def test_unary_minus_binds_tighter_than_mul():
    # -2^2*3 = (-(2^2))*3
    assert ev("-x^2*y", (2.0, 3.0)) == -12.0


def test_scientific_notation():
    assert ev("1e-3 + 2.5e2", (0.0, 0.0)) == pytest.approx(250.001, abs=0)


def test_no_implicit_multiplication():
    with pytest.raises(ParseError):
        parse("2x", 2, set())


def test_unknown_identifier_with_span():
    with pytest.raises(ParseError) as err:
        parse("x + qq*y", 2, set())
    assert err.value.span == (4, 6)


def test_z_forbidden_in_2d():
    with pytest.raises(ParseError):
        parse("x + z", 2, set())
    parse("x + z", 3, set())  # fine in 3D


def test_function_arity_error():
    with pytest.raises(ParseError):
        parse("sin(x, y)", 2, set())
    with pytest.raises(ParseError):
        parse("pow(x)", 2, set())


def test_unknown_function():
    with pytest.raises(ParseError):
        parse("sinh(x)", 2, set())


def test_syntax_errors():
    for bad in ["", "x +", "(x", "x)*2", "*x", "x^", "1..2"]:
        with pytest.raises(ParseError):
            parse(bad, 2, set())


# --- evaluation errors ------------------------------------------------------

def test_division_by_zero_is_error():
    with pytest.raises(EvalDomainError):
        ev("1/x", (0.0, 1.0))


def test_log_domain_error_carries_span():
    tree = parse("y + log(x)", 2, set())
    with pytest.raises(EvalDomainError) as err:
        evaluate(tree, Bindings((-1.0, 0.0), {}))
    assert err.value.span == (4, 10)


def test_sqrt_negative():
    with pytest.raises(EvalDomainError):
        ev("sqrt(x)", (-2.0, 0.0))


def test_negative_base_fractional_power():
    with pytest.raises(EvalDomainError):
        ev("x^0.5", (-1.0, 0.0))


def test_missing_constant_rejected():
    tree = parse("F0*x", 2, {"F0"})
    with pytest.raises(EvalDomainError):
        evaluate(tree, Bindings((1.0, 1.0), {}))


# --- gradients --------------------------------------------------------------

def test_power_rule():
    d = grad("x^3", (2.0, 0.0))
    assert d.value == 8.0
    assert d.partials[0] == 12.0


def test_paper_gradient_at_unit_point():
    consts = {"F0": 1.0, "a": 1.0}
    d = grad("-F0*a^2*(1/x + 1/y)", (1.0, 1.0), constants=consts)
    assert d.value == -2.0
    assert np.allclose(d.partials, [1.0, 1.0], rtol=0, atol=1e-15)


def test_dual_product_and_chain_rule_exact():
    # (x^2 * y^3)' checked against hand differentiation at several points
    tree = parse("x^2*y^3", 2, set())
    for x, y in [(1.0, 2.0), (0.5, -1.5), (-2.0, 3.0)]:
        d = evaluate_with_gradient(tree, Bindings((x, y), {}))
        assert d.partials[0] == pytest.approx(2 * x * y**3, rel=1e-15)
        assert d.partials[1] == pytest.approx(3 * x**2 * y**2, rel=1e-15)


POLYS = [
    "x^3*y^2 - 2*x*y + 7",
    "x^4 - y^4 + x*y",
    "(x + y)^3",
    "x*y*(x - y)",
]


@pytest.mark.parametrize("source", POLYS)
def test_polynomial_ad_matches_fd(source):
    tree = parse(source, 2, set())
    rng = random.Random(7)
    for _ in range(50):
        coords = (rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
        d = evaluate_with_gradient(tree, Bindings(coords, {}))
        fd = fd_gradient(tree, coords, {})
        denom = np.maximum(1.0, np.abs(d.partials))
        assert np.all(np.abs(d.partials - fd) / denom <= 1e-6)


@pytest.mark.parametrize(
    "source", ["sin(x)", "cos(x)", "tan(x)", "exp(x)", "log(x)", "sqrt(x)", "abs(x)", "pow(x, 3)"]
)
def test_builtins_ad_matches_fd(source):
    tree = parse(source, 2, set())
    rng = random.Random(3)
    for _ in range(40):
        coords = (rng.uniform(0.3, 1.2), 0.0)  # away from domain boundaries
        d = evaluate_with_gradient(tree, Bindings(coords, {}))
        fd = fd_gradient(tree, coords, {})
        denom = max(1.0, abs(d.partials[0]))
        assert abs(d.partials[0] - fd[0]) / denom <= 1e-6


def test_varying_exponent_gradient():
    # d/dx x^x = x^x (log x + 1)
    tree = parse("x^x", 2, set())
    d = evaluate_with_gradient(tree, Bindings((1.7, 0.0), {}))
    expected = 1.7**1.7 * (math.log(1.7) + 1)
    assert d.partials[0] == pytest.approx(expected, rel=1e-14)


# --- round-trip property over random trees ----------------------------------

def random_tree(rng, depth, variables):
    if depth == 0 or rng.random() < 0.25:
        choice = rng.randrange(3)
        if choice == 0:
            return Num((0, 0), float(rng.randint(0, 9)))
        if choice == 1:
            return Num((0, 0), round(rng.uniform(0.1, 9.9), 3))
        return Var((0, 0), *rng.choice(list(enumerate(variables)))[::-1])
    kind = rng.random()
    if kind < 0.15:
        return Neg((0, 0), random_tree(rng, depth - 1, variables))
    if kind < 0.85:
        op = rng.choice("+-*/^")
        left = random_tree(rng, depth - 1, variables)
        right = random_tree(rng, depth - 1, variables)
        return BinOp((0, 0), op, left, right)
    func = rng.choice(["sin", "cos", "exp", "sqrt", "abs"])
    return Call((0, 0), func, (random_tree(rng, depth - 1, variables),))


def test_print_parse_roundtrip_random_trees():
    rng = random.Random(2024)
    variables = ("x", "y")
    for _ in range(300):
        root = random_tree(rng, 4, variables)
        tree = exprlang.SyntaxTree(root, variables, frozenset(), "")
        printed = to_source(tree)
        reparsed = parse_in_variables(printed, variables)
        assert reparsed.root == root, printed


def test_evaluation_deterministic():
    tree = parse("sin(x)*exp(y) - x/y", 2, set())
    b = Bindings((0.7, 1.3), {})
    assert evaluate(tree, b) == evaluate(tree, b)


# --- substitution and symbolic derivative ------------------------------------

def test_substitute_gauge_parameter():
    f = parse_in_variables("u + u^3", ("u",))
    u_expr = parse("x*y", 2, set())
    composed = substitute(f, "u", u_expr)
    val = evaluate(composed, Bindings((2.0, 3.0), {}))
    assert val == 6.0 + 6.0**3


def test_derivative_polynomial():
    f = parse_in_variables("u + u^3", ("u",))
    df = derivative(f, "u")
    for u in [-1.5, 0.0, 0.3, 2.0]:
        got = evaluate(df, Bindings((u,), {}))
        assert got == pytest.approx(1 + 3 * u * u, rel=1e-14)


def test_derivative_matches_dual_on_mixed_expression():
    f = parse_in_variables("sin(u)*exp(u) + u/(1 + u^2)", ("u",))
    df = derivative(f, "u")
    for u in [0.1, 0.9, 2.2]:
        sym = evaluate(df, Bindings((u,), {}))
        dual = evaluate_with_gradient(f, Bindings((u,), {}))
        assert sym == pytest.approx(dual.partials[0], rel=1e-12)


def test_derivative_of_general_power():
    f = parse_in_variables("u^u", ("u",))
    df = derivative(f, "u")
    u = 1.3
    assert evaluate(df, Bindings((u,), {})) == pytest.approx(
        u**u * (math.log(u) + 1), rel=1e-12
    )
