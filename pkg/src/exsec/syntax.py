"""Abstract syntax of types and terms, facet-wise well-formedness and erasure.

Types come in two layers. A *safety type* describes the shape of a value; a
*security type* ``Sec(left, right)`` pairs the safety facet seen by a
privileged observer with the declassification facet seen by the public one.
Function, sum and pair constructors take security types as components.

Erased ("simple") types reuse the safety constructors with safety types in
component position instead of ``Sec`` nodes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Mapping, Union

PRIM_NAMES = ("Int", "Bool", "String")

Pos = tuple[int, int]

_fresh_counter = itertools.count(1)


def fresh(base: str, avoid: set[str] | frozenset[str] = frozenset()) -> str:
    """A name derived from ``base`` that is not in ``avoid``."""
    root = base.split("'")[0]
    while True:
        name = f"{root}'{next(_fresh_counter)}"
        if name not in avoid:
            return name


# --------------------------------------------------------------------------
# types


class SafetyType:
    __slots__ = ()


@dataclass(frozen=True)
class Prim(SafetyType):
    name: str


@dataclass(frozen=True)
class UnitT(SafetyType):
    pass


@dataclass(frozen=True)
class Top(SafetyType):
    pass


@dataclass(frozen=True)
class TVar(SafetyType):
    name: str


@dataclass(frozen=True)
class Fun(SafetyType):
    dom: "Sec | SafetyType"
    cod: "Sec | SafetyType"


@dataclass(frozen=True)
class Sum(SafetyType):
    left: "Sec | SafetyType"
    right: "Sec | SafetyType"


@dataclass(frozen=True)
class Pair(SafetyType):
    first: "Sec | SafetyType"
    second: "Sec | SafetyType"


@dataclass(frozen=True, eq=False)
class Exists(SafetyType):
    """``exists var. body``; equality and hashing are up to alpha-renaming."""

    var: str
    body: SafetyType

    def __eq__(self, other):
        if not isinstance(other, Exists):
            return NotImplemented
        return alpha_key(self) == alpha_key(other)

    def __hash__(self):
        return hash(alpha_key(self))


@dataclass(frozen=True)
class Sec:
    left: SafetyType
    right: SafetyType


AnyType = Union[Sec, SafetyType]

INT, BOOL, STRING = Prim("Int"), Prim("Bool"), Prim("String")
UNIT = UnitT()
TOP = Top()


def pub(t: SafetyType) -> Sec:
    return Sec(t, t)


def priv(t: SafetyType) -> Sec:
    return Sec(t, TOP)


def is_public(s: Sec) -> bool:
    return s.left == s.right


def alpha_key(t: AnyType, bound: tuple[str, ...] = ()) -> tuple:
    """Canonical nameless form: bound type variables become de Bruijn indices."""
    match t:
        case Sec(l, r):
            return ("S", alpha_key(l, bound), alpha_key(r, bound))
        case Prim(n):
            return ("P", n)
        case UnitT():
            return ("U",)
        case Top():
            return ("T",)
        case TVar(n):
            for i, b in enumerate(reversed(bound)):
                if b == n:
                    return ("B", i)
            return ("V", n)
        case Fun(a, b):
            return ("F", alpha_key(a, bound), alpha_key(b, bound))
        case Sum(a, b):
            return ("+", alpha_key(a, bound), alpha_key(b, bound))
        case Pair(a, b):
            return ("*", alpha_key(a, bound), alpha_key(b, bound))
        case Exists(x, body):
            return ("E", alpha_key(body, bound + (x,)))
    raise TypeError(f"not a type: {t!r}")


def free_tvars(t: AnyType) -> frozenset[str]:
    match t:
        case Sec(l, r):
            return free_tvars(l) | free_tvars(r)
        case TVar(n):
            return frozenset((n,))
        case Fun(a, b) | Sum(a, b) | Pair(a, b):
            return free_tvars(a) | free_tvars(b)
        case Exists(x, body):
            return free_tvars(body) - {x}
    return frozenset()


def subst_type(t: AnyType, x: str, r: AnyType) -> AnyType:
    """Capture-avoiding substitution of ``r`` for free ``TVar(x)`` in ``t``."""
    match t:
        case Sec(l, rr):
            return Sec(subst_type(l, x, r), subst_type(rr, x, r))
        case TVar(n):
            return r if n == x else t
        case Fun(a, b):
            return Fun(subst_type(a, x, r), subst_type(b, x, r))
        case Sum(a, b):
            return Sum(subst_type(a, x, r), subst_type(b, x, r))
        case Pair(a, b):
            return Pair(subst_type(a, x, r), subst_type(b, x, r))
        case Exists(y, body):
            if y == x or x not in free_tvars(body):
                return t
            if y in free_tvars(r):
                y2 = fresh(y, free_tvars(r) | free_tvars(body))
                body = subst_type(body, y, TVar(y2))
                y = y2
            return Exists(y, subst_type(body, x, r))
    return t


# --------------------------------------------------------------------------
# representation types and well-formedness


class IllFormedType(Exception):
    pass


class AmbiguousRepresentation(IllFormedType):
    pass


def rep_type(ety: Exists) -> SafetyType:
    """The concrete safety type an existential pairs with its variable.

    Scans the body for declassification facets ``Sec(T, X)``. Returns the
    unique such ``T`` (ignoring ``pub X``), or ``TVar(X)`` when there is none.
    """
    if not isinstance(ety, Exists):
        raise IllFormedType(f"rep_type expects an existential, got {ety!r}")
    x = ety.var
    found: list[SafetyType] = []

    def scan(t: AnyType, inner: frozenset[str]) -> None:
        match t:
            case Sec(l, TVar(n)) if n == x and l != TVar(x):
                if free_tvars(l) & (inner | {x}):
                    raise IllFormedType(
                        f"representation of {x} mentions a locally bound type variable"
                    )
                if l not in found:
                    found.append(l)
                scan(l, inner)
            case Sec(l, r):
                scan(l, inner)
                scan(r, inner)
            case Fun(a, b) | Sum(a, b) | Pair(a, b):
                scan(a, inner)
                scan(b, inner)
            case Exists(y, body):
                if y != x:
                    scan(body, inner | {y})

    scan(ety.body, frozenset())
    if len(found) > 1:
        from .pretty import pretty

        shown = ", ".join(pretty(t) for t in found)
        raise AmbiguousRepresentation(
            f"type variable {x} is paired with several safety types: {shown}"
        )
    return found[0] if found else TVar(x)


def check_safety_type(delta: Mapping[str, SafetyType], t: SafetyType) -> None:
    match t:
        case Prim(n):
            if n not in PRIM_NAMES:
                raise IllFormedType(f"unknown primitive type {n}")
        case UnitT():
            pass
        case Top():
            raise IllFormedType("Top is only legal as a declassification facet")
        case TVar(n):
            if n not in delta:
                raise IllFormedType(f"unbound type variable {n}")
        case Fun(a, b) | Sum(a, b) | Pair(a, b):
            check_security_type(delta, a)
            check_security_type(delta, b)
        case Exists(x, body):
            rep = rep_type(t)
            check_safety_type({**delta, x: rep}, body)
        case _:
            raise IllFormedType(f"expected a safety type, got {t!r}")


def check_security_type(delta: Mapping[str, SafetyType], s: Sec) -> None:
    """Raise ``IllFormedType`` unless ``s`` is well-formed under ``delta``."""
    if not isinstance(s, Sec):
        raise IllFormedType(f"expected a security type, got {s!r}")
    check_safety_type(delta, s.left)
    u = s.right
    if u == s.left or isinstance(u, Top):
        return
    if isinstance(u, TVar):
        if u.name not in delta:
            raise IllFormedType(f"unbound type variable {u.name}")
        if delta[u.name] != s.left:
            from .pretty import pretty

            raise IllFormedType(
                f"{pretty(s)}: the safety facet of {u.name} is "
                f"{pretty(delta[u.name])}, not {pretty(s.left)}"
            )
        return
    from .pretty import pretty

    raise IllFormedType(
        f"{pretty(s)}: declassification facet must equal the safety facet, "
        "be Top, or be a type variable"
    )


def wf_security_type(delta: Mapping[str, SafetyType], s: Sec) -> bool:
    try:
        check_security_type(delta, s)
    except IllFormedType:
        return False
    return True


def erase(t: AnyType) -> SafetyType:
    """Drop declassification facets, recursively."""
    match t:
        case Sec(l, _):
            return erase(l)
        case Fun(a, b):
            return Fun(erase(a), erase(b))
        case Sum(a, b):
            return Sum(erase(a), erase(b))
        case Pair(a, b):
            return Pair(erase(a), erase(b))
        case Exists(x, body):
            return Exists(x, erase(body))
    return t


def lift(t: SafetyType) -> Sec:
    """Inverse of ``erase`` choosing public facets everywhere."""
    match t:
        case Fun(a, b):
            return pub(Fun(lift(a), lift(b)))
        case Sum(a, b):
            return pub(Sum(lift(a), lift(b)))
        case Pair(a, b):
            return pub(Pair(lift(a), lift(b)))
        case Exists(x, body):
            return pub(Exists(x, lift(body).left))
    return pub(t)


# --------------------------------------------------------------------------
# terms

_NOPOS = field(default=None, compare=False, repr=False)


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Lam(Term):
    param: str
    annot: Sec
    body: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Var(Term):
    name: str
    pos: Pos | None = _NOPOS


@dataclass(frozen=True, eq=False)
class Lit(Term):
    """Primitive literal; ``True`` and ``1`` are distinct literals."""

    value: int | bool | str
    pos: Pos | None = _NOPOS

    def __eq__(self, other):
        if not isinstance(other, Lit):
            return NotImplemented
        return type(self.value) is type(other.value) and self.value == other.value

    def __hash__(self):
        return hash((type(self.value), self.value))

    @property
    def prim(self) -> Prim:
        if isinstance(self.value, bool):
            return BOOL
        if isinstance(self.value, int):
            return INT
        return STRING


@dataclass(frozen=True)
class BinOp(Term):
    op: str
    lhs: Term
    rhs: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class UnOp(Term):
    op: str
    operand: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Unit(Term):
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class PairE(Term):
    fst: Term
    snd: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Fst(Term):
    expr: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Snd(Term):
    expr: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Inl(Term):
    expr: Term
    annot: Sec
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Inr(Term):
    expr: Term
    annot: Sec
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Case(Term):
    scrut: Term
    lvar: str
    lbody: Term
    rvar: str
    rbody: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Pack(Term):
    witness: SafetyType
    payload: Term
    annot: Exists
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Open(Term):
    tyvar: str
    var: str
    package: Term
    body: Term
    pos: Pos | None = _NOPOS


@dataclass(frozen=True)
class Table(Term):
    """A finite function given by its graph.

    Only produced by the noninterference checker (and witness files) as a
    stand-in for an arbitrary function over a finite domain. Applying it to
    an argument outside its keys is an out-of-domain error, not a value.
    """

    dom: Sec
    cod: Sec
    entries: tuple[tuple[Term, Term], ...]
    pos: Pos | None = _NOPOS

    def lookup(self, key: Term) -> Term | None:
        for k, v in self.entries:
            if k == key:
                return v
        return None


def is_value(e: Term) -> bool:
    match e:
        case Lam() | Lit() | Unit() | Table():
            return True
        case PairE(a, b):
            return is_value(a) and is_value(b)
        case Inl(a) | Inr(a):
            return is_value(a)
        case Pack(_, v):
            return is_value(v)
    return False


def free_vars(e: Term) -> frozenset[str]:
    match e:
        case Var(n):
            return frozenset((n,))
        case Lam(x, _, body):
            return free_vars(body) - {x}
        case App(a, b) | BinOp(_, a, b) | PairE(a, b):
            return free_vars(a) | free_vars(b)
        case UnOp(_, a) | Fst(a) | Snd(a) | Inl(a) | Inr(a) | Pack(_, a):
            return free_vars(a)
        case Case(s, x1, e1, x2, e2):
            return free_vars(s) | (free_vars(e1) - {x1}) | (free_vars(e2) - {x2})
        case Open(_, x, p, body):
            return free_vars(p) | (free_vars(body) - {x})
        case Table(_, _, entries):
            out: frozenset[str] = frozenset()
            for k, v in entries:
                out |= free_vars(k) | free_vars(v)
            return out
    return frozenset()


def subst_term(e: Term, x: str, v: Term) -> Term:
    """Capture-avoiding substitution of ``v`` for ``Var(x)`` in ``e``."""
    fv = free_vars(v)

    def under(y: str, body: Term) -> tuple[str, Term]:
        if y == x:
            return y, body
        if y in fv:
            y2 = fresh(y, fv | free_vars(body))
            body = subst_term(body, y, Var(y2))
            y = y2
        return y, go(body)

    # subtrees without x come back as the same object, so unchanged parts
    # of the term are shared rather than copied
    def go(e: Term) -> Term:
        match e:
            case Var(n):
                return v if n == x else e
            case Lam(y, s, body):
                y2, body2 = under(y, body)
                return e if body2 is body else Lam(y2, s, body2, e.pos)
            case App(a, b):
                a2, b2 = go(a), go(b)
                return e if a2 is a and b2 is b else App(a2, b2, e.pos)
            case BinOp(op, a, b):
                a2, b2 = go(a), go(b)
                return e if a2 is a and b2 is b else BinOp(op, a2, b2, e.pos)
            case PairE(a, b):
                a2, b2 = go(a), go(b)
                return e if a2 is a and b2 is b else PairE(a2, b2, e.pos)
            case UnOp(op, a):
                a2 = go(a)
                return e if a2 is a else UnOp(op, a2, e.pos)
            case Fst(a) | Snd(a):
                a2 = go(a)
                return e if a2 is a else type(e)(a2, e.pos)
            case Inl(a, s) | Inr(a, s):
                a2 = go(a)
                return e if a2 is a else type(e)(a2, s, e.pos)
            case Pack(w, a, s):
                a2 = go(a)
                return e if a2 is a else Pack(w, a2, s, e.pos)
            case Case(sc, x1, e1, x2, e2):
                sc2 = go(sc)
                y1, f1 = under(x1, e1)
                y2, f2 = under(x2, e2)
                if sc2 is sc and f1 is e1 and f2 is e2:
                    return e
                return Case(sc2, y1, f1, y2, f2, e.pos)
            case Open(t, y, p, body):
                p2 = go(p)
                y2, body2 = under(y, body)
                return e if p2 is p and body2 is body else Open(t, y2, p2, body2, e.pos)
            case Table(_, _, entries):
                new = tuple((go(k), go(w)) for k, w in entries)
                return replace(e, entries=new)
        return e

    return go(e)


def term_types(e: Term):
    """Yield every type annotation occurring in ``e``."""
    match e:
        case Lam(_, s, body):
            yield s
            yield from term_types(body)
        case Inl(a, s) | Inr(a, s):
            yield s
            yield from term_types(a)
        case Pack(w, a, s):
            yield w
            yield s
            yield from term_types(a)
        case Table(d, c, entries):
            yield d
            yield c
            for k, v in entries:
                yield from term_types(k)
                yield from term_types(v)
        case _:
            for sub in subterms(e):
                yield from term_types(sub)


def subterms(e: Term) -> tuple[Term, ...]:
    """Immediate subterms."""
    match e:
        case Lam(_, _, b) | UnOp(_, b) | Fst(b) | Snd(b) | Inl(b) | Inr(b) | Pack(_, b):
            return (b,)
        case App(a, b) | BinOp(_, a, b) | PairE(a, b) | Open(_, _, a, b):
            return (a, b)
        case Case(s, _, e1, _, e2):
            return (s, e1, e2)
        case Table(_, _, entries):
            return tuple(t for kv in entries for t in kv)
    return ()


def term_free_tvars(e: Term) -> frozenset[str]:
    match e:
        case Open(x, _, p, body):
            return term_free_tvars(p) | (term_free_tvars(body) - {x})
    out: frozenset[str] = frozenset()
    for t in _own_types(e):
        out |= free_tvars(t)
    for sub in subterms(e):
        out |= term_free_tvars(sub)
    return out


def _own_types(e: Term) -> tuple:
    match e:
        case Lam(_, s, _) | Inl(_, s) | Inr(_, s):
            return (s,)
        case Pack(w, _, s):
            return (w, s)
        case Table(d, c, _):
            return (d, c)
    return ()


def subst_type_in_term(e: Term, x: str, r: AnyType) -> Term:
    """Replace free ``TVar(x)`` by ``r`` in every annotation of ``e``."""
    fr = free_tvars(r)

    def go(e: Term) -> Term:
        match e:
            case Lam(_, s, body):
                return replace(e, annot=subst_type(s, x, r), body=go(body))
            case Inl(a, s) | Inr(a, s):
                return replace(e, expr=go(a), annot=subst_type(s, x, r))
            case Pack(w, a, s):
                return replace(
                    e, witness=subst_type(w, x, r), payload=go(a), annot=subst_type(s, x, r)
                )
            case Open(y, _, p, body):
                if y == x:
                    return replace(e, package=go(p))
                if y in fr:
                    y2 = fresh(y, fr | term_free_tvars(body))
                    body = subst_type_in_term(body, y, TVar(y2))
                    y = y2
                return replace(e, tyvar=y, package=go(p), body=go(body))
            case Table(d, c, entries):
                return replace(
                    e, dom=subst_type(d, x, r), cod=subst_type(c, x, r),
                    entries=tuple((go(k), go(v)) for k, v in entries),
                )
            case App(a, b):
                return replace(e, fn=go(a), arg=go(b))
            case BinOp(_, a, b):
                return replace(e, lhs=go(a), rhs=go(b))
            case PairE(a, b):
                return replace(e, fst=go(a), snd=go(b))
            case UnOp(_, a):
                return replace(e, operand=go(a))
            case Fst(a) | Snd(a):
                return replace(e, expr=go(a))
            case Case(s, _, e1, _, e2):
                return replace(e, scrut=go(s), lbody=go(e1), rbody=go(e2))
        return e

    if x not in term_free_tvars(e):
        return e
    return go(e)


def literals(e: Term):
    """Yield every literal subterm of ``e``."""
    if isinstance(e, Lit):
        yield e
    for sub in subterms(e):
        yield from literals(sub)


def closed_lambdas(e: Term):
    """Yield lambda subterms with no free term variables."""
    if isinstance(e, Lam) and not free_vars(e):
        yield e
    for sub in subterms(e):
        yield from closed_lambdas(sub)


def strip_pos(e: Term) -> Term:
    """Copy of ``e`` with all positions cleared (positions never affect equality)."""
    kids = {}
    for name, val in vars(e).items():
        if isinstance(val, Term):
            kids[name] = strip_pos(val)
    if isinstance(e, Table):
        kids["entries"] = tuple((strip_pos(k), strip_pos(v)) for k, v in e.entries)
    return replace(e, pos=None, **kids)
