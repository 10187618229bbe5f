"""Call-by-value small-step reduction with evaluation contexts.

Values are the value-shaped subset of terms (see ``syntax.is_value``).
Evaluation proceeds left to right: the function before the argument, the
left operand before the right, the first pair component before the second.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .syntax import (
    App, BinOp, Case, Fst, Inl, Inr, Lam, Lit, Open, Pack, PairE, Snd, Table,
    Term, UnOp, is_value, subst_term, subst_type_in_term,
)

DEFAULT_FUEL = 1_000_000


@dataclass(frozen=True)
class Stepped:
    term: Term


@dataclass(frozen=True)
class Done:
    value: Term


@dataclass(frozen=True)
class Stuck:
    term: Term
    reason: str
    out_of_domain: bool = False


StepResult = Stepped | Done | Stuck


class StuckError(Exception):
    def __init__(self, term: Term, reason: str):
        self.term = term
        self.reason = reason
        super().__init__(reason)


class OutOfDomain(StuckError):
    """A finite function table was applied outside its keys."""


class FuelExhausted(Exception):
    def __init__(self, term: Term, steps: int):
        self.term = term
        self.steps = steps
        super().__init__(f"fuel exhausted after {steps} steps")


class ThetaError(Exception):
    pass


def theta(op: str, *args):
    """Primitive operations on Python ints, bools and strings."""
    match op, args:
        case "+", (int(a), int(b)):
            return a + b
        case "-", (int(a), int(b)):
            return a - b
        case "*", (int(a), int(b)):
            return a * b
        case "%", (int(a), int(b)):
            if b == 0:
                raise ThetaError("remainder by zero")
            return a % abs(b)
        case "<=", (int(a), int(b)):
            return a <= b
        case "==", (a, b):
            return type(a) is type(b) and a == b
        case "++", (str(a), str(b)):
            return a + b
        case "length", (str(a),):
            return len(a)
    raise ThetaError(f"no rule for {op} on {args!r}")


def _prim_ok(op: str, *lits: Lit) -> bool:
    ints = ("+", "-", "*", "%", "<=")
    vals = [l.value for l in lits]
    if op in ints:
        return all(type(v) is int for v in vals)
    if op == "++" or op == "length":
        return all(type(v) is str for v in vals)
    return op == "=="


def _reduce(e: Term) -> StepResult | None:
    """Contract a redex at the root, or None if ``e`` is not a redex."""
    match e:
        case Fst(PairE(a, b)) if is_value(a) and is_value(b):
            return Stepped(a)
        case Snd(PairE(a, b)) if is_value(a) and is_value(b):
            return Stepped(b)
        case Case(Inl(v), x1, e1, _, _) if is_value(v):
            return Stepped(subst_term(e1, x1, v))
        case Case(Inr(v), _, _, x2, e2) if is_value(v):
            return Stepped(subst_term(e2, x2, v))
        case App(Lam(x, _, body), v) if is_value(v):
            return Stepped(subst_term(body, x, v))
        case App(Table() as t, v) if is_value(v):
            out = t.lookup(v)
            if out is None:
                return Stuck(e, "function table applied outside its domain", True)
            return Stepped(out)
        case BinOp(op, Lit() as a, Lit() as b):
            if not _prim_ok(op, a, b):
                return Stuck(e, f"operator {op} applied to {a.value!r} and {b.value!r}")
            try:
                return Stepped(Lit(theta(op, a.value, b.value)))
            except ThetaError as exc:
                return Stuck(e, str(exc))
        case UnOp(op, Lit() as a):
            if not _prim_ok(op, a):
                return Stuck(e, f"operator {op} applied to {a.value!r}")
            return Stepped(Lit(theta(op, a.value)))
        case Open(x, y, Pack(w, v, _), body) if is_value(v):
            return Stepped(subst_type_in_term(subst_term(body, y, v), x, w))
    return None


def step(e: Term) -> StepResult:
    """One reduction step on a closed term."""
    if is_value(e):
        return Done(e)
    return _step(e)


def _step(e: Term) -> StepResult:
    # decompose e = E[redex]: find the leftmost non-value subterm in
    # evaluation position, step it, and plug the result back
    def inner(sub: Term, rebuild) -> StepResult:
        r = _step(sub)
        return Stepped(rebuild(r.term)) if isinstance(r, Stepped) else r

    match e:
        case Fst(a) | Snd(a) | UnOp(_, a) if not is_value(a):
            field = "operand" if isinstance(e, UnOp) else "expr"
            return inner(a, lambda t: replace(e, **{field: t}))
        case Case(s) if not is_value(s):
            return inner(s, lambda t: replace(e, scrut=t))
        case App(f, a):
            if not is_value(f):
                return inner(f, lambda t: replace(e, fn=t))
            if not is_value(a):
                return inner(a, lambda t: replace(e, arg=t))
        case BinOp(_, a, b):
            if not is_value(a):
                return inner(a, lambda t: replace(e, lhs=t))
            if not is_value(b):
                return inner(b, lambda t: replace(e, rhs=t))
        case PairE(a, b):
            if not is_value(a):
                return inner(a, lambda t: replace(e, fst=t))
            return inner(b, lambda t: replace(e, snd=t))
        case Inl(a) | Inr(a):
            return inner(a, lambda t: replace(e, expr=t))
        case Pack(_, a):
            return inner(a, lambda t: replace(e, payload=t))
        case Open(_, _, p) if not is_value(p):
            return inner(p, lambda t: replace(e, package=t))
    r = _reduce(e)
    if r is not None:
        return r
    from .pretty import pretty

    return Stuck(e, f"no reduction applies to {pretty(e)}")


def eval_term(e: Term, fuel: int = DEFAULT_FUEL) -> Term:
    """Reduce ``e`` to a value within ``fuel`` steps."""
    steps = 0
    while True:
        r = step(e)
        match r:
            case Done(v):
                return v
            case Stuck(t, reason, ood):
                raise (OutOfDomain if ood else StuckError)(t, reason)
            case Stepped(e2):
                if steps >= fuel:
                    raise FuelExhausted(e, steps)
                steps += 1
                e = e2


def trace(e: Term, fuel: int = DEFAULT_FUEL) -> list[Term]:
    """Every intermediate term, from ``e`` to its value; one step per entry."""
    out = [e]
    while True:
        r = step(e)
        match r:
            case Done(_):
                return out
            case Stuck(t, reason, ood):
                raise (OutOfDomain if ood else StuckError)(t, reason)
            case Stepped(e2):
                if len(out) - 1 >= fuel:
                    raise FuelExhausted(e, len(out) - 1)
                out.append(e2)
                e = e2
