"""Concrete-syntax rendering of types and terms.

Output reparses (see ``parser``) to an alpha-equivalent value. Parentheses
are inserted only where precedence requires them.
"""

from __future__ import annotations

import json

from .syntax import (
    App, BinOp, Case, Exists, Fst, Fun, Inl, Inr, Lam, Lit, Open, Pack, Pair,
    PairE, Prim, Sec, Snd, Sum, Table, Top, TVar, Unit, UnitT, UnOp, Var,
)

# type precedence: exists < arrow < sum < product < facet < atom
_T_EXISTS, _T_ARROW, _T_SUM, _T_PROD, _T_FACET, _T_ATOM = range(6)

# term precedence: open-ended < comparison < additive < multiplicative
#                  < application < prefix < atom
_E_OPEN, _E_CMP, _E_ADD, _E_MUL, _E_APP, _E_PREFIX, _E_ATOM = range(7)

_CMP_OPS = {"==", "<="}
_ADD_OPS = {"+", "-", "++"}
_MUL_OPS = {"*", "%"}


def _paren(text: str, own: int, ctx: int) -> str:
    return f"({text})" if own < ctx else text


def _atomic_type(t) -> bool:
    return isinstance(t, (Prim, UnitT, Top, TVar))


def _safety(t, ctx: int) -> str:
    match t:
        case Prim(n):
            return n
        case UnitT():
            return "Unit"
        case Top():
            return "Top"
        case TVar(n):
            return n
        case Fun(a, b):
            return _paren(f"{_comp(a, _T_SUM)} -> {_comp(b, _T_ARROW)}", _T_ARROW, ctx)
        case Sum(a, b):
            return _paren(f"{_comp(a, _T_PROD)} + {_comp(b, _T_SUM)}", _T_SUM, ctx)
        case Pair(a, b):
            return _paren(f"{_comp(a, _T_FACET)} * {_comp(b, _T_PROD)}", _T_PROD, ctx)
        case Exists(x, body):
            return _paren(f"exists {x}. {_safety(body, _T_EXISTS)}", _T_EXISTS, ctx)
    raise TypeError(f"not a type: {t!r}")


def _comp(t, ctx: int) -> str:
    """A component of a compound type: security type or (erased) safety type."""
    if isinstance(t, Sec):
        if t.left == t.right:
            return _safety(t.left, ctx)
        return _sec(t, ctx)
    return _safety(t, ctx)


def _sec(s: Sec, ctx: int) -> str:
    left, right = s.left, s.right
    if left == right:
        if _atomic_type(left):
            return _paren(f"pub {_safety(left, _T_ATOM)}", _T_FACET, ctx)
        return _safety(left, ctx)
    if isinstance(right, Top):
        return _paren(f"priv {_safety(left, _T_ATOM)}", _T_FACET, ctx)
    return _paren(f"{_safety(left, _T_ATOM)}!{_safety(right, _T_ATOM)}", _T_FACET, ctx)


def pretty_type(t) -> str:
    if isinstance(t, Sec):
        if t.left == t.right and not _atomic_type(t.left):
            return f"pub ({_safety(t.left, _T_EXISTS)})"
        return _sec(t, _T_EXISTS)
    return _safety(t, _T_EXISTS)


def _lit(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v) if v >= 0 else f"(-{-v})"
    return json.dumps(v, ensure_ascii=False)


def _annot(s: Sec) -> str:
    """A security annotation; bare compound types default to public."""
    return _sec(s, _T_EXISTS)


def _term(e, ctx: int) -> str:
    match e:
        case Var(n):
            return n
        case Lit(v):
            return _lit(v)
        case Unit():
            return "unit"
        case PairE(a, b):
            return f"({_term(a, _E_OPEN)}, {_term(b, _E_OPEN)})"
        case Table(d, c, entries):
            rows = "; ".join(f"{_term(k, _E_OPEN)} => {_term(v, _E_OPEN)}" for k, v in entries)
            fun = _safety(Fun(d, c), _T_EXISTS)
            return f"table ({fun}) {{{' ' + rows + ' ' if rows else ''}}}"
        case Fst(a):
            return _paren(f"fst {_term(a, _E_PREFIX)}", _E_PREFIX, ctx)
        case Snd(a):
            return _paren(f"snd {_term(a, _E_PREFIX)}", _E_PREFIX, ctx)
        case UnOp(op, a):
            return _paren(f"{op} {_term(a, _E_PREFIX)}", _E_PREFIX, ctx)
        case App(f, a):
            return _paren(f"{_term(f, _E_APP)} {_term(a, _E_ATOM)}", _E_APP, ctx)
        case BinOp(op, a, b):
            if op in _CMP_OPS:
                text, own = f"{_term(a, _E_ADD)} {op} {_term(b, _E_ADD)}", _E_CMP
            elif op in _ADD_OPS:
                text, own = f"{_term(a, _E_ADD)} {op} {_term(b, _E_MUL)}", _E_ADD
            else:
                text, own = f"{_term(a, _E_MUL)} {op} {_term(b, _E_APP)}", _E_MUL
            return _paren(text, own, ctx)
        case Lam(x, s, body):
            text = f"fun ({x}: {_annot(s)}) => {_term(body, _E_OPEN)}"
            return _paren(text, _E_OPEN, ctx)
        case Inl(a, s) | Inr(a, s):
            kw = "inl" if isinstance(e, Inl) else "inr"
            return _paren(f"{kw} {_term(a, _E_CMP)} : {_annot(s)}", _E_OPEN, ctx)
        case Case(s, x1, e1, x2, e2):
            text = (
                f"case {_term(s, _E_OPEN)} of inl {x1} => {_term(e1, _E_OPEN)}"
                f" | inr {x2} => {_term(e2, _E_OPEN)}"
            )
            return _paren(text, _E_OPEN, ctx)
        case Pack(w, a, s):
            text = (
                f"pack <{_safety(w, _T_EXISTS)}, {_term(a, _E_OPEN)}>"
                f" as {_safety(s, _T_EXISTS)}"
            )
            return _paren(text, _E_OPEN, ctx)
        case Open(x, y, p, body):
            text = f"open {_term(p, _E_OPEN)} as <{x}, {y}> in {_term(body, _E_OPEN)}"
            return _paren(text, _E_OPEN, ctx)
    raise TypeError(f"not a term: {e!r}")


def pretty(x) -> str:
    """Render a term, security type or safety type."""
    if isinstance(x, (Sec, Prim, UnitT, Top, TVar, Fun, Sum, Pair, Exists)):
        return pretty_type(x)
    return _term(x, _E_OPEN)
