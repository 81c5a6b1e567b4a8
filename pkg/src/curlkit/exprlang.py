"""Arithmetic expression language for field and potential definitions.

Grammar (tightest binding first):

    function call, parentheses
    ^                   right-associative; binds tighter than unary minus,
                        so ``-x^2`` means ``-(x^2)``; the exponent may
                        itself start with a unary minus (``x^-2``)
    unary minus
    * /                 left-associative
    + -                 left-associative

Literals are decimal (scientific notation accepted, e.g. ``1e-3``); there
is no implicit multiplication (``2x`` is a syntax error). Identifiers are
coordinates, declared constants, or the builtin functions ``sin cos tan
exp log sqrt abs pow``. Every node carries the byte span of its source
text, which error messages reference.

Evaluation is IEEE double precision. ``evaluate_with_gradient`` returns a
:class:`DualValue` whose partials are exact forward-mode derivatives with
respect to each declared variable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import EvalDomainError, ParseError

COORDS_2D = ("x", "y")
COORDS_3D = ("x", "y", "z")

FUNCTION_ARITY = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
    "pow": 2,
}


# --- syntax tree -----------------------------------------------------------

@dataclass(frozen=True)
class Node:
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Num(Node):
    value: float = 0.0


@dataclass(frozen=True)
class Var(Node):
    name: str = ""
    index: int = 0


@dataclass(frozen=True)
class Const(Node):
    name: str = ""


@dataclass(frozen=True)
class Neg(Node):
    operand: Node = None


@dataclass(frozen=True)
class BinOp(Node):
    op: str = "+"
    left: Node = None
    right: Node = None


@dataclass(frozen=True)
class Call(Node):
    func: str = ""
    args: tuple = ()


@dataclass(frozen=True)
class SyntaxTree:
    """Parsed expression bound to an ordered variable tuple and a set of
    admissible constant names."""

    root: Node
    variables: tuple
    constants: frozenset
    source: str = ""

    def referenced_constants(self):
        found = set()

        def walk(node):
            if isinstance(node, Const):
                found.add(node.name)
            elif isinstance(node, Neg):
                walk(node.operand)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, Call):
                for a in node.args:
                    walk(a)

        walk(self.root)
        return found


@dataclass(frozen=True)
class Bindings:
    """Coordinate values plus the constant table an expression binds to."""

    coords: tuple
    constants: Mapping = field(default_factory=dict)


@dataclass
class DualValue:
    """A real value together with its partial derivatives.

    Arithmetic obeys the product, quotient, and chain rules exactly, so a
    tree evaluated in DualValue arithmetic yields forward-mode derivatives.
    """

    value: float
    partials: np.ndarray

    def __add__(self, other):
        if isinstance(other, DualValue):
            return DualValue(self.value + other.value, self.partials + other.partials)
        return DualValue(self.value + other, self.partials)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DualValue):
            return DualValue(self.value - other.value, self.partials - other.partials)
        return DualValue(self.value - other, self.partials)

    def __rsub__(self, other):
        return DualValue(other - self.value, -self.partials)

    def __mul__(self, other):
        if isinstance(other, DualValue):
            return DualValue(
                self.value * other.value,
                self.value * other.partials + self.partials * other.value,
            )
        return DualValue(self.value * other, self.partials * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DualValue):
            return DualValue(
                self.value / other.value,
                (self.partials * other.value - self.value * other.partials)
                / (other.value * other.value),
            )
        return DualValue(self.value / other, self.partials / other)

    def __rtruediv__(self, other):
        return DualValue(
            other / self.value, -other * self.partials / (self.value * self.value)
        )

    def __neg__(self):
        return DualValue(-self.value, -self.partials)


# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(source):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == m.start():
            # nothing matched: either trailing whitespace or a bad character
            rest = source[pos:]
            stripped = rest.lstrip()
            if not stripped:
                break
            at = pos + (len(rest) - len(stripped))
            raise ParseError(
                f"unexpected character {stripped[0]!r}", (at, at + 1), source
            )
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num"), m.end("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident"), m.end("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op"), m.end("op")))
        pos = m.end()
    tokens.append(("end", "", n, n))
    return tokens


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, source, variables, constants):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0
        self.variables = tuple(variables)
        self.var_index = {name: i for i, name in enumerate(self.variables)}
        self.constants = frozenset(constants)

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, symbol):
        kind, text, start, end = self.peek()
        if kind != "op" or text != symbol:
            raise ParseError(f"expected {symbol!r}", (start, end), self.source)
        return self.advance()

    def parse(self):
        node = self.additive()
        kind, text, start, end = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", (start, end), self.source)
        return node

    def additive(self):
        node = self.term()
        while True:
            kind, text, start, end = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                right = self.term()
                node = BinOp((node.span[0], right.span[1]), text, node, right)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, start, end = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                right = self.unary()
                node = BinOp((node.span[0], right.span[1]), text, node, right)
            else:
                return node

    def unary(self):
        kind, text, start, end = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            operand = self.unary()
            return Neg((start, operand.span[1]), operand)
        return self.power()

    def power(self):
        base = self.primary()
        kind, text, start, end = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            # right-associative; exponent may start with unary minus
            exponent = self.unary()
            return BinOp((base.span[0], exponent.span[1]), "^", base, exponent)
        return base

    def primary(self):
        kind, text, start, end = self.advance()
        if kind == "num":
            return Num((start, end), float(text))
        if kind == "ident":
            nkind, ntext, nstart, nend = self.peek()
            if nkind == "op" and ntext == "(":
                if text not in FUNCTION_ARITY:
                    raise ParseError(f"unknown function {text!r}", (start, end), self.source)
                self.advance()
                args = [self.additive()]
                while True:
                    pkind, ptext, pstart, pend = self.peek()
                    if pkind == "op" and ptext == ",":
                        self.advance()
                        args.append(self.additive())
                    else:
                        break
                close = self.expect_op(")")
                if len(args) != FUNCTION_ARITY[text]:
                    raise ParseError(
                        f"{text} takes {FUNCTION_ARITY[text]} argument(s), got {len(args)}",
                        (start, close[3]),
                        self.source,
                    )
                return Call((start, close[3]), text, tuple(args))
            if text in self.var_index:
                return Var((start, end), text, self.var_index[text])
            if text in self.constants:
                return Const((start, end), text)
            admissible = ", ".join(self.variables) or "(none)"
            raise ParseError(
                f"unknown identifier {text!r} (coordinates: {admissible})",
                (start, end),
                self.source,
            )
        if kind == "op" and text == "(":
            node = self.additive()
            self.expect_op(")")
            return node
        raise ParseError(f"expected an operand, got {text!r}", (start, end), self.source)


def parse_in_variables(source, variables, constants=()):
    """Parse ``source`` against an explicit ordered variable tuple."""
    parser = _Parser(source, variables, constants)
    root = parser.parse()
    return SyntaxTree(root, tuple(variables), frozenset(constants), source)


def parse(source, dimension, constants=()):
    """Parse an expression over the coordinates of a 2D or 3D problem.

    ``z`` is rejected when dimension is 2. Unknown identifiers that are
    neither coordinates, declared constants, nor builtin functions raise
    :class:`ParseError` with the offending span.
    """
    if dimension == 2:
        variables = COORDS_2D
    elif dimension == 3:
        variables = COORDS_3D
    else:
        raise ValueError(f"dimension must be 2 or 3, got {dimension!r}")
    return parse_in_variables(source, variables, constants)


# --- pretty printer --------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _precedence(node):
    if isinstance(node, BinOp):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Neg):
        return _PREC_UNARY
    if isinstance(node, Num) and node.value < 0:
        return _PREC_UNARY  # synthetic negative literal prints like a negation
    return _PREC_ATOM


def _format_number(value):
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _print_node(node):
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        inner = _print_node(node.operand)
        if _precedence(node.operand) < _PREC_UNARY or isinstance(node.operand, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        lp, rp = _precedence(node.left), _precedence(node.right)
        left, right = _print_node(node.left), _print_node(node.right)
        if node.op in "+-":
            if lp < _PREC_ADD:
                left = f"({left})"
            if rp <= _PREC_ADD:
                right = f"({right})"
            return f"{left} {node.op} {right}"
        if node.op in "*/":
            if lp < _PREC_MUL:
                left = f"({left})"
            if rp <= _PREC_MUL:
                right = f"({right})"
            return f"{left}{node.op}{right}"
        # '^': left operand must be an atom; right may be unary or tighter
        if lp <= _PREC_POW:
            left = f"({left})"
        if rp < _PREC_UNARY:
            right = f"({right})"
        return f"{left}^{right}"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(_print_node(a) for a in node.args)})"
    raise TypeError(f"unknown node {node!r}")


def to_source(tree):
    """Render a tree back to source text; reparsing the result yields a
    structurally identical tree."""
    return _print_node(tree.root)


# --- evaluation ------------------------------------------------------------

def _check_finite(value, span):
    if not math.isfinite(value):
        raise EvalDomainError("non-finite result", span)
    return value


def _apply_function(name, x, span):
    if name == "sin":
        return math.sin(x)
    if name == "cos":
        return math.cos(x)
    if name == "tan":
        return _check_finite(math.tan(x), span)
    if name == "exp":
        return _check_finite(math.exp(x) if x < 709.0 else math.inf, span)
    if name == "log":
        if x <= 0.0:
            raise EvalDomainError(f"log of non-positive value {x!r}", span)
        return math.log(x)
    if name == "sqrt":
        if x < 0.0:
            raise EvalDomainError(f"sqrt of negative value {x!r}", span)
        return math.sqrt(x)
    if name == "abs":
        return abs(x)
    raise EvalDomainError(f"unknown function {name!r}", span)


def _pow_value(a, b, span):
    if a == 0.0 and b < 0.0:
        raise EvalDomainError("zero raised to a negative power", span)
    if a < 0.0 and b != int(b):
        raise EvalDomainError("negative base with non-integer exponent", span)
    try:
        return _check_finite(math.pow(a, b), span)
    except OverflowError:
        raise EvalDomainError("overflow in power", span) from None


def _eval_float(node, coords, constants):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return coords[node.index]
    if isinstance(node, Const):
        try:
            return constants[node.name]
        except KeyError:
            raise EvalDomainError(f"constant {node.name!r} not bound", node.span) from None
    if isinstance(node, Neg):
        return -_eval_float(node.operand, coords, constants)
    if isinstance(node, BinOp):
        a = _eval_float(node.left, coords, constants)
        b = _eval_float(node.right, coords, constants)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return _check_finite(a * b, node.span)
        if node.op == "/":
            if b == 0.0:
                raise EvalDomainError("division by zero", node.span)
            return _check_finite(a / b, node.span)
        return _pow_value(a, b, node.span)
    if isinstance(node, Call):
        if node.func == "pow":
            a = _eval_float(node.args[0], coords, constants)
            b = _eval_float(node.args[1], coords, constants)
            return _pow_value(a, b, node.span)
        x = _eval_float(node.args[0], coords, constants)
        return _apply_function(node.func, x, node.span)
    raise TypeError(f"unknown node {node!r}")


def _dual_pow(a, b, span):
    value = _pow_value(a.value, b.value, span)
    if not b.partials.any():
        # constant exponent: plain power rule, valid for negative bases too
        if b.value == 0.0:
            return DualValue(value, np.zeros_like(a.partials))
        grad = b.value * _pow_value(a.value, b.value - 1.0, span) * a.partials
        return DualValue(value, grad)
    if a.value <= 0.0:
        raise EvalDomainError(
            "derivative of power needs a positive base for a varying exponent", span
        )
    grad = value * (b.partials * math.log(a.value) + b.value * a.partials / a.value)
    return DualValue(value, grad)


def _dual_function(name, arg, span):
    x = arg.value
    value = _apply_function(name, x, span)
    if name == "sin":
        d = math.cos(x)
    elif name == "cos":
        d = -math.sin(x)
    elif name == "tan":
        c = math.cos(x)
        d = 1.0 / (c * c)
    elif name == "exp":
        d = value
    elif name == "log":
        d = 1.0 / x
    elif name == "sqrt":
        if x == 0.0:
            raise EvalDomainError("derivative of sqrt at zero", span)
        d = 0.5 / value
    else:  # abs; subgradient 0 at the kink
        d = math.copysign(1.0, x) if x != 0.0 else 0.0
    return DualValue(value, d * arg.partials)


def _eval_dual(node, coords, constants, n):
    if isinstance(node, Num):
        return DualValue(node.value, np.zeros(n))
    if isinstance(node, Var):
        partials = np.zeros(n)
        partials[node.index] = 1.0
        return DualValue(coords[node.index], partials)
    if isinstance(node, Const):
        try:
            return DualValue(constants[node.name], np.zeros(n))
        except KeyError:
            raise EvalDomainError(f"constant {node.name!r} not bound", node.span) from None
    if isinstance(node, Neg):
        return -_eval_dual(node.operand, coords, constants, n)
    if isinstance(node, BinOp):
        a = _eval_dual(node.left, coords, constants, n)
        b = _eval_dual(node.right, coords, constants, n)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            out = a * b
            _check_finite(out.value, node.span)
            return out
        if node.op == "/":
            if b.value == 0.0:
                raise EvalDomainError("division by zero", node.span)
            out = a / b
            _check_finite(out.value, node.span)
            return out
        return _dual_pow(a, b, node.span)
    if isinstance(node, Call):
        if node.func == "pow":
            a = _eval_dual(node.args[0], coords, constants, n)
            b = _eval_dual(node.args[1], coords, constants, n)
            return _dual_pow(a, b, node.span)
        arg = _eval_dual(node.args[0], coords, constants, n)
        return _dual_function(node.func, arg, node.span)
    raise TypeError(f"unknown node {node!r}")


def _missing_constants(tree, constants):
    missing = tree.referenced_constants() - set(constants)
    if missing:
        raise EvalDomainError(
            f"constants not bound: {sorted(missing)}", tree.root.span
        )


def evaluate(tree, bindings):
    """Evaluate a tree at the given bindings, IEEE double precision."""
    _missing_constants(tree, bindings.constants)
    return _eval_float(tree.root, bindings.coords, bindings.constants)


def evaluate_with_gradient(tree, bindings):
    """Evaluate a tree and its exact forward-mode partial derivatives with
    respect to each declared variable, in declaration order."""
    _missing_constants(tree, bindings.constants)
    n = len(tree.variables)
    return _eval_dual(tree.root, bindings.coords, bindings.constants, n)


def eval_at(tree, coords, constants):
    """evaluate() without the Bindings wrapper; hot-loop entry point."""
    return _eval_float(tree.root, coords, constants)


def grad_at(tree, coords, constants):
    """evaluate_with_gradient() without the wrapper; hot-loop entry point."""
    return _eval_dual(tree.root, coords, constants, len(tree.variables))


# --- tree surgery (substitution and differentiation) -----------------------

def _num(value):
    return Num((0, 0), float(value))


def _is_literal(node, value):
    return isinstance(node, Num) and node.value == value


def _add(a, b):
    if _is_literal(a, 0.0):
        return b
    if _is_literal(b, 0.0):
        return a
    return BinOp((0, 0), "+", a, b)


def _sub(a, b):
    if _is_literal(b, 0.0):
        return a
    if _is_literal(a, 0.0):
        return Neg((0, 0), b)
    return BinOp((0, 0), "-", a, b)


def _mul(a, b):
    if _is_literal(a, 0.0) or _is_literal(b, 0.0):
        return _num(0.0)
    if _is_literal(a, 1.0):
        return b
    if _is_literal(b, 1.0):
        return a
    return BinOp((0, 0), "*", a, b)


def _div(a, b):
    if _is_literal(b, 1.0):
        return a
    if _is_literal(a, 0.0):
        return _num(0.0)
    return BinOp((0, 0), "/", a, b)


def _pow(a, b):
    if _is_literal(b, 1.0):
        return a
    return BinOp((0, 0), "^", a, b)


def substitute(tree, var_name, replacement):
    """Replace every occurrence of a variable with a subtree.

    The result is re-bound to the replacement tree's variable tuple; the
    remaining variables of ``tree`` must not survive the substitution (the
    intended use replaces the only variable, e.g. the gauge parameter).
    """
    repl_root = replacement.root

    def walk(node):
        if isinstance(node, Var):
            if node.name == var_name:
                return repl_root
            raise ValueError(
                f"variable {node.name!r} survives substitution of {var_name!r}"
            )
        if isinstance(node, Neg):
            return Neg(node.span, walk(node.operand))
        if isinstance(node, BinOp):
            return BinOp(node.span, node.op, walk(node.left), walk(node.right))
        if isinstance(node, Call):
            return Call(node.span, node.func, tuple(walk(a) for a in node.args))
        return node

    return SyntaxTree(
        walk(tree.root),
        replacement.variables,
        tree.constants | replacement.constants,
        "",
    )


def derivative(tree, var_name):
    """Symbolic derivative with respect to one variable.

    Used for gauge transformations and for constructing closed-form test
    fields; no simplification beyond dropping exact zero/one factors.
    """

    def d(node):
        if isinstance(node, Num) or isinstance(node, Const):
            return _num(0.0)
        if isinstance(node, Var):
            return _num(1.0) if node.name == var_name else _num(0.0)
        if isinstance(node, Neg):
            inner = d(node.operand)
            return _num(0.0) if _is_literal(inner, 0.0) else Neg((0, 0), inner)
        if isinstance(node, BinOp):
            a, b = node.left, node.right
            da, db = d(a), d(b)
            if node.op == "+":
                return _add(da, db)
            if node.op == "-":
                return _sub(da, db)
            if node.op == "*":
                return _add(_mul(da, b), _mul(a, db))
            if node.op == "/":
                return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, _num(2.0)))
            return _d_power(a, b, da, db)
        if isinstance(node, Call):
            if node.func == "pow":
                a, b = node.args
                return _d_power(a, b, d(a), d(b))
            (a,) = node.args
            da = d(a)
            if node.func == "sin":
                outer = Call((0, 0), "cos", (a,))
            elif node.func == "cos":
                outer = Neg((0, 0), Call((0, 0), "sin", (a,)))
            elif node.func == "tan":
                outer = _div(_num(1.0), _pow(Call((0, 0), "cos", (a,)), _num(2.0)))
            elif node.func == "exp":
                outer = Call((0, 0), "exp", (a,))
            elif node.func == "log":
                outer = _div(_num(1.0), a)
            elif node.func == "sqrt":
                outer = _div(_num(1.0), _mul(_num(2.0), Call((0, 0), "sqrt", (a,))))
            elif node.func == "abs":
                outer = _div(Call((0, 0), "abs", (a,)), a)
            else:
                raise ValueError(f"no derivative rule for {node.func!r}")
            return _mul(outer, da)
        raise TypeError(f"unknown node {node!r}")

    def _d_power(a, b, da, db):
        if isinstance(b, Num):
            n = b.value
            if n == 0.0:
                return _num(0.0)
            exponent = _num(n - 1.0) if n - 1.0 >= 0.0 else Neg((0, 0), _num(1.0 - n))
            return _mul(_mul(_num(n), _pow(a, exponent)), da)
        # general case a^b * (db log a + b da / a); requires a > 0 at eval
        logterm = _mul(db, Call((0, 0), "log", (a,)))
        ratio = _div(_mul(b, da), a)
        return _mul(_pow(a, b), _add(logterm, ratio))

    return SyntaxTree(d(tree.root), tree.variables, tree.constants, "")
