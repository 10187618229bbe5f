"""Independent big-step evaluator used as a test oracle.

Environment based with closures, so it shares no code with the
substitution-based small-step machine under test.
"""

from __future__ import annotations

from dataclasses import dataclass

from exsec.syntax import (
    App, BinOp, Case, Fst, Inl, Inr, Lam, Lit, Open, Pack, PairE, Snd, Table,
    UnOp, Unit, Var,
)


class OracleStuck(Exception):
    pass


@dataclass(frozen=True)
class Closure:
    param: str
    body: object
    env: tuple


FUN = "<fun>"


def _lookup(env: tuple, x: str):
    for name, v in env:
        if name == x:
            return v
    raise OracleStuck(f"unbound {x}")


def _prim(op, a, b=None):
    ints = lambda *xs: all(type(x) is int for x in xs)
    if op == "+" and ints(a, b):
        return a + b
    if op == "-" and ints(a, b):
        return a - b
    if op == "*" and ints(a, b):
        return a * b
    if op == "%" and ints(a, b):
        if b == 0:
            raise OracleStuck("remainder by zero")
        m = abs(b)
        return a - m * (a // m)
    if op == "<=" and ints(a, b):
        return a <= b
    if op == "==":
        return type(a) is type(b) and a == b
    if op == "++" and type(a) is str and type(b) is str:
        return a + b
    if op == "length" and type(a) is str:
        return len(a)
    raise OracleStuck(f"bad operands for {op}")


def run(e, env: tuple = ()):
    """Evaluate to an oracle value: Python scalars, tuples tagged by constructor, closures."""
    match e:
        case Var(x):
            return _lookup(env, x)
        case Lit(v):
            return v
        case Unit():
            return ("unit",)
        case Lam(x, _, body):
            return Closure(x, body, env)
        case Table():
            return ("table", tuple((run(k), run(v)) for k, v in e.entries))
        case App(f, a):
            fv = run(f, env)
            av = run(a, env)
            return apply(fv, av)
        case BinOp(op, a, b):
            return _prim(op, run(a, env), run(b, env))
        case UnOp(op, a):
            return _prim(op, run(a, env))
        case PairE(a, b):
            return ("pair", run(a, env), run(b, env))
        case Fst(a) | Snd(a):
            v = run(a, env)
            if not (isinstance(v, tuple) and v[0] == "pair"):
                raise OracleStuck("projection from a non-pair")
            return v[1] if isinstance(e, Fst) else v[2]
        case Inl(a):
            return ("inl", run(a, env))
        case Inr(a):
            return ("inr", run(a, env))
        case Case(s, x1, e1, x2, e2):
            v = run(s, env)
            if isinstance(v, tuple) and v[0] == "inl":
                return run(e1, ((x1, v[1]),) + env)
            if isinstance(v, tuple) and v[0] == "inr":
                return run(e2, ((x2, v[1]),) + env)
            raise OracleStuck("case on a non-injection")
        case Pack(w, a):
            return ("pack", w, run(a, env))
        case Open(_, y, p, body):
            v = run(p, env)
            if not (isinstance(v, tuple) and v[0] == "pack"):
                raise OracleStuck("open of a non-package")
            return run(body, ((y, v[2]),) + env)
    raise OracleStuck(f"unknown term {e!r}")


def apply(f, a):
    if isinstance(f, Closure):
        return run(f.body, ((f.param, a),) + f.env)
    if isinstance(f, tuple) and f[0] == "table":
        for k, v in f[1]:
            if type(k) is type(a) and k == a:
                return v
        raise OracleStuck("table applied outside its domain")
    raise OracleStuck("application of a non-function")


def observe(v):
    """Forget function bodies and witness types so both evaluators' values compare."""
    if isinstance(v, Closure):
        return FUN
    if isinstance(v, tuple):
        match v[0]:
            case "table":
                return FUN
            case "pack":
                return ("pack", observe(v[2]))
            case _:
                return (v[0],) + tuple(observe(x) for x in v[1:])
    return v


def observe_term(v):
    """The same view of a small-step value."""
    match v:
        case Lit(x):
            return x
        case Unit():
            return ("unit",)
        case Lam() | Table():
            return FUN
        case PairE(a, b):
            return ("pair", observe_term(a), observe_term(b))
        case Inl(a):
            return ("inl", observe_term(a))
        case Inr(a):
            return ("inr", observe_term(a))
        case Pack(_, a):
            return ("pack", observe_term(a))
    raise ValueError(f"not a value: {v!r}")
