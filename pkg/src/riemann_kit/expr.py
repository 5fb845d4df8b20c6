"""Safe compilation of small arithmetic expressions used in config files.

``^`` and ``**`` both denote powers. Only arithmetic, a fixed set of elementary functions and named variables or
constants are accepted; everything else is rejected with the column of the
offending token.
"""

from __future__ import annotations

import ast
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import ExpressionError

FUNCTIONS = {
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "arctan": np.arctan,
    "arccosh": np.arccosh,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sech": lambda z: 1 / np.cosh(z),
    "abs": np.abs,
    "real": np.real,
    "imag": np.imag,
    "conj": np.conj,
    "sign": lambda z: np.sign(np.real(z)),
}

CONSTANTS = {"pi": np.pi, "e": np.e, "i": 1j}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}
_UNARY = {ast.UAdd: lambda a: +a, ast.USub: lambda a: -a}


def _normalize(text: str):
    """Rewrite ``^`` as ``**``; returns the new text and a column map."""
    out, cols = [], []
    for i, ch in enumerate(text):
        if ch == "^":
            out.append("**")
            cols += [i, i]
        else:
            out.append(ch)
            cols.append(i)
    cols.append(len(text))
    return "".join(out), cols


def _col(node) -> int:
    return getattr(node, "col_offset", 0) + 1


def _build(node, names):
    if isinstance(node, ast.Expression):
        return _build(node.body, names)
    if isinstance(node, ast.BinOp):
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed", _col(node))
        left, right = _build(node.left, names), _build(node.right, names)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.UnaryOp):
        op = _UNARY.get(type(node.op))
        if op is None:
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed", _col(node))
        arg = _build(node.operand, names)
        return lambda env: op(arg(env))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            label = node.func.id if isinstance(node.func, ast.Name) else "call"
            raise ExpressionError(f"function {label!r} not allowed", _col(node))
        if node.keywords or len(node.args) != 1:
            raise ExpressionError(f"{node.func.id} takes exactly one argument", _col(node))
        fn = FUNCTIONS[node.func.id]
        arg = _build(node.args[0], names)
        return lambda env: fn(arg(env))
    if isinstance(node, ast.Name):
        if node.id in names:
            key = node.id
            return lambda env: env[key]
        raise ExpressionError(f"unknown name {node.id!r}", _col(node))
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
            and not isinstance(node.value, bool):
        val = node.value
        return lambda env: val
    raise ExpressionError(f"{type(node).__name__} not allowed", _col(node))


def _col_from(position, cols) -> int:
    """Map a 1-based column in the rewritten text back to the original."""
    pos = (position or 1) - 1
    return cols[min(max(pos, 0), len(cols) - 1)] + 1


def names_used(text: str) -> set:
    """Identifiers referenced by ``text`` (function names excluded)."""
    src, cols = _normalize(str(text).strip())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"syntax error: {exc.msg}", _col_from(exc.offset, cols)) from None
    calls = {id(n.func) for n in ast.walk(tree) if isinstance(n, ast.Call)}
    return {n.id for n in ast.walk(tree) if isinstance(n, ast.Name) and id(n) not in calls}


def compile_expr(text: str, variables: Sequence[str],
                 constants: Optional[Mapping[str, complex]] = None) -> Callable:
    """Compile ``text`` into ``f(**values)`` over the given variable names.

    >>> compile_expr("2*x + sin(y)", ["x", "y"])(x=1.0, y=0.0)
    2.0
    """
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression", 1)
    src, cols = _normalize(text.strip())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"syntax error: {exc.msg}", _col_from(exc.offset, cols)) from None
    consts = dict(CONSTANTS)
    consts.update(constants or {})
    names = set(variables) | set(consts)
    try:
        fn = _build(tree, names)
    except ExpressionError as exc:
        raise ExpressionError(exc.detail, _col_from(exc.position, cols)) from None
    expected = tuple(variables)

    def evaluate(**values):
        missing = [v for v in expected if v not in values]
        if missing:
            raise ExpressionError(f"missing value for {missing[0]!r}", 1)
        env = dict(consts)
        env.update(values)
        with np.errstate(all="ignore"):
            return fn(env)

    evaluate.source = text
    evaluate.variables = expected
    return evaluate
