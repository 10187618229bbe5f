"""Security type checking and the erased (simple) type system.

``type_of`` is algorithmic: it computes the least security type of a term
under the three-rule subtyping relation, applying subsumption only where a
term is checked against an expected type (function arguments, package
payloads, injection payloads) and joining the types of case branches.
Checking pushes the expected type through pairs, lambdas, branches and
eliminations, since subtyping itself has no depth rules.
"""

from __future__ import annotations

from typing import Mapping

from .syntax import (
    BOOL, INT, STRING, TOP, UNIT, App, BinOp, Case, Exists, Fst, Fun,
    IllFormedType, Inl, Inr, Lam, Lit, Open, Pack, Pair, PairE, Pos, Prim,
    Sec, Snd, Sum, Table, Term, Top, TVar, Unit, UnOp, Var, check_safety_type,
    check_security_type, erase, free_tvars, fresh, pub, rep_type, subst_type,
    subst_type_in_term,
)

# operator signatures: operand types and result type
BINOPS: dict[str, tuple[Prim, Prim, Prim]] = {
    "+": (INT, INT, INT),
    "-": (INT, INT, INT),
    "*": (INT, INT, INT),
    "%": (INT, INT, INT),
    "<=": (INT, INT, BOOL),
    "++": (STRING, STRING, STRING),
}
EQ_OPS = {"=="}  # P x P -> Bool for every primitive P
UNOPS: dict[str, tuple[Prim, Prim]] = {"length": (STRING, INT)}

KINDS = ("mismatch", "unbound", "ill-formed", "escape", "not-a-function",
         "not-a-package", "precision")


class TypeCheckError(Exception):
    def __init__(self, kind: str, message: str, pos: Pos | None = None,
                 expected: object = None, found: object = None):
        assert kind in KINDS, kind
        self.kind = kind
        self.message = message
        self.pos = pos
        self.expected = expected
        self.found = found
        where = f"{pos[0]}:{pos[1]}: " if pos else ""
        super().__init__(f"{where}{kind}: {message}")


def _show(t) -> str:
    from .pretty import pretty

    return pretty(t)


def subtype(s1: Sec, s2: Sec) -> bool:
    """Reflexivity, raising the declassification facet to Top, or upgrading
    a public value to a declassifiable one."""
    if s1 == s2:
        return True
    if s1.left != s2.left:
        return False
    if isinstance(s2.right, Top):
        return True
    return s1.right == s1.left and isinstance(s2.right, TVar)


def precise(t1, t2) -> bool:
    return t1 == t2 or isinstance(t2, TVar)


def stamp(res: Sec, src: Sec) -> Sec:
    return res if src.left == src.right else Sec(res.left, TOP)


def join(s1: Sec, s2: Sec) -> Sec | None:
    """Least upper bound under ``subtype``, or None."""
    if subtype(s1, s2):
        return s2
    if subtype(s2, s1):
        return s1
    if s1.left == s2.left:
        return Sec(s1.left, TOP)
    return None


def binop_sig(op: str, left: Prim | None = None) -> tuple[Prim, Prim, Prim] | None:
    if op in BINOPS:
        return BINOPS[op]
    if op in EQ_OPS and isinstance(left, Prim):
        return (left, left, BOOL)
    return None


class _Checker:
    def __init__(self, delta: Mapping, gamma: Mapping):
        self.delta = dict(delta)
        self.gamma = dict(gamma)

    def wf(self, delta, s, pos) -> None:
        try:
            if isinstance(s, Sec):
                check_security_type(delta, s)
            else:
                check_safety_type(delta, s)
        except IllFormedType as exc:
            raise TypeCheckError("ill-formed", str(exc), pos) from None

    def go(self, delta: dict, gamma: dict, e: Term, where: Pos | None) -> Sec:
        pos = getattr(e, "pos", None) or where
        match e:
            case Var(x):
                if x not in gamma:
                    raise TypeCheckError("unbound", f"unbound variable {x}", pos)
                return gamma[x]
            case Lit(_):
                return pub(e.prim)
            case Unit():
                return pub(UNIT)
            case Lam(x, s, body):
                self.wf(delta, s, pos)
                res = self.go(delta, {**gamma, x: s}, body, pos)
                return pub(Fun(s, res))
            case PairE(a, b):
                return pub(Pair(self.go(delta, gamma, a, pos), self.go(delta, gamma, b, pos)))
            case Inl(a, s) | Inr(a, s):
                self.wf(delta, s, pos)
                if not isinstance(s.left, Sum):
                    raise TypeCheckError("mismatch", "injection annotation is not a sum type",
                                         pos, "a sum type", s)
                part = s.left.left if isinstance(e, Inl) else s.left.right
                self.check(delta, gamma, a, part, pos)
                if not subtype(pub(s.left), s):
                    raise TypeCheckError(
                        "mismatch", f"injection cannot have type {_show(s)}", pos,
                        s, pub(s.left))
                return s
            case Pack(w, a, ety):
                self.wf(delta, w, pos)
                self.wf(delta, ety, pos)
                if not isinstance(ety, Exists):
                    raise TypeCheckError("mismatch", "pack annotation is not existential",
                                         pos, "an existential type", ety)
                rep = rep_type(ety)
                if not precise(w, rep):
                    raise TypeCheckError(
                        "precision",
                        f"representation {_show(w)} does not match {_show(rep)} "
                        f"required by {_show(ety)}", pos, rep, w)
                self.check(delta, gamma, a, pub(subst_type(ety.body, ety.var, w)), pos)
                return pub(ety)
            case App(f, a):
                sf = self.go(delta, gamma, f, pos)
                if not isinstance(sf.left, Fun):
                    raise TypeCheckError("not-a-function",
                                         f"applying a value of type {_show(sf)}", pos,
                                         "a function type", sf)
                self.check(delta, gamma, a, sf.left.dom, pos)
                return stamp(sf.left.cod, sf)
            case BinOp(op, a, b):
                sa = self.go(delta, gamma, a, pos)
                sig = binop_sig(op, sa.left)
                if sig is None:
                    if op in EQ_OPS:
                        raise TypeCheckError("mismatch", f"operand of {op} must be primitive",
                                             pos, "a primitive type", sa)
                    raise TypeCheckError("unbound", f"unknown operator {op}", pos)
                sb = self.go(delta, gamma, b, pos)
                p1, p2, res = sig
                for s, p in ((sa, p1), (sb, p2)):
                    if s.left != p:
                        raise TypeCheckError(
                            "mismatch", f"operand of {op} has type {_show(s)}, expected "
                            f"facet {_show(p)}", pos, p, s)
                return stamp(stamp(pub(res), sa), sb)
            case UnOp(op, a):
                if op not in UNOPS:
                    raise TypeCheckError("unbound", f"unknown operator {op}", pos)
                sa = self.go(delta, gamma, a, pos)
                p, res = UNOPS[op]
                if sa.left != p:
                    raise TypeCheckError(
                        "mismatch", f"operand of {op} has type {_show(sa)}, expected "
                        f"facet {_show(p)}", pos, p, sa)
                return stamp(pub(res), sa)
            case Fst(a) | Snd(a):
                s = self.go(delta, gamma, a, pos)
                if not isinstance(s.left, Pair):
                    raise TypeCheckError("mismatch", f"projecting from {_show(s)}", pos,
                                         "a pair type", s)
                part = s.left.first if isinstance(e, Fst) else s.left.second
                return stamp(part, s)
            case Case(scrut, x1, e1, x2, e2):
                s = self.go(delta, gamma, scrut, pos)
                if not isinstance(s.left, Sum):
                    raise TypeCheckError("mismatch", f"case on {_show(s)}", pos,
                                         "a sum type", s)
                r1 = self.go(delta, {**gamma, x1: s.left.left}, e1, pos)
                r2 = self.go(delta, {**gamma, x2: s.left.right}, e2, pos)
                r = join(r1, r2)
                for cand in (r2, r1) if r is None else ():
                    # one branch may still check against the other's type
                    try:
                        self.check(delta, {**gamma, x1: s.left.left}, e1, cand, pos)
                        self.check(delta, {**gamma, x2: s.left.right}, e2, cand, pos)
                    except TypeCheckError:
                        continue
                    r = cand
                    break
                if r is None:
                    raise TypeCheckError(
                        "mismatch", f"case branches have incompatible types {_show(r1)} "
                        f"and {_show(r2)}", pos, r1, r2)
                return stamp(r, s)
            case Open(_, _, p, _):
                s = self.go(delta, gamma, p, pos)
                x, delta2, gamma2, body = self.scope(delta, gamma, s, e, frozenset(), pos)
                res = self.go(delta2, gamma2, body, pos)
                if x in free_tvars(res):
                    raise TypeCheckError(
                        "escape", f"type variable {x} escapes its scope in {_show(res)}",
                        pos, None, res)
                self.wf(delta, res, pos)
                return stamp(res, s)
            case Table(d, c, entries):
                self.wf(delta, d, pos)
                self.wf(delta, c, pos)
                for k, v in entries:
                    self.check(delta, gamma, k, d, pos)
                    self.check(delta, gamma, v, c, pos)
                return pub(Fun(d, c))
        raise TypeError(f"not a term: {e!r}")

    def scope(self, delta, gamma, s: Sec, e: Open, avoid: frozenset, pos):
        """Context for the body of ``e``, whose package has type ``s``."""
        if not isinstance(s.left, Exists):
            raise TypeCheckError("not-a-package", f"opening a value of type {_show(s)}",
                                 pos, "an existential type", s)
        ety, x, body = s.left, e.tyvar, e.body
        if x in delta or x in avoid:
            names = set(delta) | free_tvars(ety) | avoid
            for t in gamma.values():
                names |= free_tvars(t)
            x2 = fresh(x, names)
            body = subst_type_in_term(body, x, TVar(x2))
            x = x2
        rep = rep_type(ety)
        inner = subst_type(ety.body, ety.var, TVar(x))
        if isinstance(rep, TVar) and rep.name == ety.var:
            rep = TVar(x)
        return x, {**delta, x: rep}, {**gamma, e.var: pub(inner)}, body

    def check(self, delta, gamma, e: Term, expected: Sec, where) -> None:
        # push the expected type into introduction forms and branches, which
        # is where a declarative derivation would use subsumption on subterms
        pos = getattr(e, "pos", None) or where
        t = expected.left
        match e:
            case PairE(a, b) if isinstance(t, Pair):
                self.check(delta, gamma, a, t.first, pos)
                self.check(delta, gamma, b, t.second, pos)
                return
            case Lam(x, s, body) if isinstance(t, Fun) and s == t.dom:
                self.wf(delta, s, pos)
                self.check(delta, {**gamma, x: s}, body, t.cod, pos)
                return
            case Case(scrut, x1, e1, x2, e2):
                s = self.go(delta, gamma, scrut, pos)
                if isinstance(s.left, Sum) and subtype(stamp(expected, s), expected):
                    self.check(delta, {**gamma, x1: s.left.left}, e1, expected, pos)
                    self.check(delta, {**gamma, x2: s.left.right}, e2, expected, pos)
                    return
            case Open():
                s = self.go(delta, gamma, e.package, pos)
                if subtype(stamp(expected, s), expected):
                    _, delta2, gamma2, body = self.scope(
                        delta, gamma, s, e, free_tvars(expected), pos)
                    self.check(delta2, gamma2, body, expected, pos)
                    return
            case Fst(a) | Snd(a):
                s = self.go(delta, gamma, a, pos)
                if isinstance(s.left, Pair) and s.left == s.right:
                    first, second = s.left.first, s.left.second
                    if subtype(first if isinstance(e, Fst) else second, expected):
                        return
                    want = Pair(expected, second) if isinstance(e, Fst) else Pair(first, expected)
                    self.check(delta, gamma, a, pub(want), pos)
                    return
            case App(f, a):
                sf = self.go(delta, gamma, f, pos)
                if isinstance(sf.left, Fun) and sf.left == sf.right:
                    dom, cod = sf.left.dom, sf.left.cod
                    if not subtype(cod, expected):
                        self.check(delta, gamma, f, pub(Fun(dom, expected)), pos)
                    self.check(delta, gamma, a, dom, pos)
                    return
        found = self.go(delta, gamma, e, where)
        if not subtype(found, expected):
            raise TypeCheckError(
                "mismatch", f"expected {_show(expected)}, found {_show(found)}",
                pos, expected, found)


def type_of(delta: Mapping, gamma: Mapping, e: Term) -> Sec:
    """The least security type of ``e`` under ``delta`` and ``gamma``."""
    c = _Checker(delta, gamma)
    for s in gamma.values():
        c.wf(delta, s, getattr(e, "pos", None))
    return c.go(c.delta, c.gamma, e, getattr(e, "pos", None))


def check_against(delta: Mapping, gamma: Mapping, e: Term, s: Sec) -> None:
    """Check ``e`` against ``s``, pushing ``s`` into pairs, lambdas and branches."""
    c = _Checker(delta, gamma)
    pos = getattr(e, "pos", None)
    for t in gamma.values():
        c.wf(delta, t, pos)
    c.wf(delta, s, pos)
    c.check(c.delta, c.gamma, e, s, pos)


# --------------------------------------------------------------------------
# erased types


def simple_type_of(tyvars, gamma: Mapping, e: Term):
    """Standard typing over safety types; annotations are erased first.

    ``tyvars`` is the set of type variables in scope and ``gamma`` maps
    variables to erased safety types.
    """
    return _simple(frozenset(tyvars), dict(gamma), e)


def _simple_wf(tyvars, t, pos):
    bad = free_tvars(t) - tyvars
    if bad:
        raise TypeCheckError("unbound", f"unbound type variable {min(bad)}", pos)
    if _mentions_top(t):
        raise TypeCheckError("ill-formed", "Top in an erased type", pos)


def _mentions_top(t) -> bool:
    match t:
        case Top():
            return True
        case Fun(a, b) | Sum(a, b) | Pair(a, b):
            return _mentions_top(a) or _mentions_top(b)
        case Exists(_, body):
            return _mentions_top(body)
    return False


def _simple(tyvars: frozenset, gamma: dict, e: Term):
    pos = getattr(e, "pos", None)

    def expect(found, want, what):
        if found != want:
            raise TypeCheckError("mismatch", f"{what}: expected {_show(want)}, "
                                 f"found {_show(found)}", pos, want, found)

    match e:
        case Var(x):
            if x not in gamma:
                raise TypeCheckError("unbound", f"unbound variable {x}", pos)
            return gamma[x]
        case Lit(_):
            return e.prim
        case Unit():
            return UNIT
        case Lam(x, s, body):
            t = erase(s)
            _simple_wf(tyvars, t, pos)
            return Fun(t, _simple(tyvars, {**gamma, x: t}, body))
        case PairE(a, b):
            return Pair(_simple(tyvars, gamma, a), _simple(tyvars, gamma, b))
        case Inl(a, s) | Inr(a, s):
            t = erase(s)
            _simple_wf(tyvars, t, pos)
            if not isinstance(t, Sum):
                raise TypeCheckError("mismatch", "injection annotation is not a sum", pos)
            expect(_simple(tyvars, gamma, a), t.left if isinstance(e, Inl) else t.right,
                   "injection payload")
            return t
        case Pack(w, a, ety):
            t = erase(ety)
            _simple_wf(tyvars, t, pos)
            _simple_wf(tyvars, erase(w), pos)
            if not isinstance(t, Exists):
                raise TypeCheckError("mismatch", "pack annotation is not existential", pos)
            expect(_simple(tyvars, gamma, a), subst_type(t.body, t.var, erase(w)),
                   "package payload")
            return t
        case App(f, a):
            tf = _simple(tyvars, gamma, f)
            if not isinstance(tf, Fun):
                raise TypeCheckError("not-a-function", f"applying {_show(tf)}", pos)
            expect(_simple(tyvars, gamma, a), tf.dom, "argument")
            return tf.cod
        case BinOp(op, a, b):
            ta = _simple(tyvars, gamma, a)
            sig = binop_sig(op, ta)
            if sig is None:
                raise TypeCheckError("mismatch", f"bad operand for {op}", pos)
            expect(ta, sig[0], f"left operand of {op}")
            expect(_simple(tyvars, gamma, b), sig[1], f"right operand of {op}")
            return sig[2]
        case UnOp(op, a):
            if op not in UNOPS:
                raise TypeCheckError("unbound", f"unknown operator {op}", pos)
            expect(_simple(tyvars, gamma, a), UNOPS[op][0], f"operand of {op}")
            return UNOPS[op][1]
        case Fst(a) | Snd(a):
            t = _simple(tyvars, gamma, a)
            if not isinstance(t, Pair):
                raise TypeCheckError("mismatch", f"projecting from {_show(t)}", pos)
            return t.first if isinstance(e, Fst) else t.second
        case Case(scrut, x1, e1, x2, e2):
            t = _simple(tyvars, gamma, scrut)
            if not isinstance(t, Sum):
                raise TypeCheckError("mismatch", f"case on {_show(t)}", pos)
            r1 = _simple(tyvars, {**gamma, x1: t.left}, e1)
            expect(_simple(tyvars, {**gamma, x2: t.right}, e2), r1, "case branch")
            return r1
        case Open(x, y, p, body):
            t = _simple(tyvars, gamma, p)
            if not isinstance(t, Exists):
                raise TypeCheckError("not-a-package", f"opening {_show(t)}", pos)
            if x in tyvars:
                avoid = set(tyvars) | free_tvars(t)
                for g in gamma.values():
                    avoid |= free_tvars(g)
                x2 = fresh(x, avoid)
                body = subst_type_in_term(body, x, TVar(x2))
                x = x2
            res = _simple(tyvars | {x}, {**gamma, y: subst_type(t.body, t.var, TVar(x))}, body)
            if x in free_tvars(res):
                raise TypeCheckError("escape", f"type variable {x} escapes its scope", pos)
            return res
        case Table(d, c, entries):
            td, tc = erase(d), erase(c)
            for k, v in entries:
                expect(_simple(tyvars, gamma, k), td, "table key")
                expect(_simple(tyvars, gamma, v), tc, "table value")
            return Fun(td, tc)
    raise TypeError(f"not a term: {e!r}")
