"""Random generation of security-well-typed terms.

Generation is type directed: ``TermGen.term(s, ...)`` builds a term whose
least security type is a subtype of ``s``. Where a rule needs an exact type
(a lambda body, a package payload) the term is wrapped in an ascription
``(fun (z: S) => z) e``, which has type exactly ``S``.

Literals are drawn from a fixed pool so that generated programs stay inside
the finite carriers used by the noninterference checker. Functions supplied
through the environment are only applied to pool literals or to input
variables, for the same reason.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .syntax import (
    BOOL, INT, STRING, UNIT, App, BinOp, Case, Exists, Fst, Fun, Inl, Inr,
    Lam, Lit, Open, Pack, Pair, PairE, Prim, Sec, Snd, Sum, Term, TVar,
    Unit, UnitT, UnOp, Var, pub, priv, rep_type, subst_type,
)
from .typecheck import TypeCheckError, subtype, type_of

PRIMS = (INT, BOOL, STRING)


@dataclass
class GenConfig:
    max_depth: int = 6
    ints: tuple[int, ...] = (0, 1, 2, 3)
    strings: tuple[str, ...] = ("", "a", "ab")
    bools: tuple[bool, ...] = (False, True)
    type_depth: int = 2


class GenFailure(Exception):
    pass


@dataclass
class _Ctx:
    delta: dict
    gamma: dict
    inputs: frozenset = field(default_factory=frozenset)
    counter: list = field(default_factory=lambda: [0])

    def with_var(self, name: str, s: Sec) -> "_Ctx":
        return _Ctx(self.delta, {**self.gamma, name: s}, self.inputs, self.counter)

    def with_tyvar(self, name: str, t) -> "_Ctx":
        return _Ctx({**self.delta, name: t}, self.gamma, self.inputs, self.counter)

    def fresh_var(self) -> str:
        self.counter[0] += 1
        return f"v{self.counter[0]}"

    def fresh_tyvar(self) -> str:
        self.counter[0] += 1
        return f"Y{self.counter[0]}"


class TermGen:
    def __init__(self, rng: random.Random, config: GenConfig | None = None):
        self.rng = rng
        self.cfg = config or GenConfig()

    # -- types

    def lit(self, p: Prim) -> Lit:
        pool = {"Int": self.cfg.ints, "Bool": self.cfg.bools, "String": self.cfg.strings}[p.name]
        return Lit(self.rng.choice(pool))

    def facet(self, t, delta) -> Sec:
        """A random well-formed security type with safety facet ``t``."""
        options = [pub(t), priv(t)]
        options += [Sec(t, TVar(x)) for x, rep in delta.items() if rep == t]
        return self.rng.choice(options)

    def sec_type(self, delta, depth: int | None = None) -> Sec:
        depth = self.cfg.type_depth if depth is None else depth
        r = self.rng.random()
        if depth <= 0 or r < 0.45:
            return self.facet(self.rng.choice(PRIMS + (UNIT,)), delta)
        if r < 0.65:
            return pub(Pair(self.sec_type(delta, depth - 1), self.sec_type(delta, depth - 1)))
        if r < 0.8:
            return pub(Sum(self.sec_type(delta, depth - 1), self.sec_type(delta, depth - 1)))
        return self.rng.choice([pub, priv])(
            Fun(self.sec_type(delta, depth - 1), self.sec_type(delta, depth - 1)))

    def exists_type(self, ctx: _Ctx) -> Exists:
        y = ctx.fresh_tyvar()
        p = self.rng.choice(PRIMS)
        q = self.rng.choice(PRIMS)
        shapes = [
            Pair(Sec(p, TVar(y)), pub(Fun(Sec(p, TVar(y)), pub(q)))),
            Pair(pub(TVar(y)), pub(Fun(pub(TVar(y)), pub(q)))),
            Pair(Sec(p, TVar(y)), pub(p)),
        ]
        return Exists(y, self.rng.choice(shapes))

    # -- terms

    def type_of(self, ctx: _Ctx, e: Term) -> Sec:
        return type_of(ctx.delta, ctx.gamma, e)

    def exact(self, ctx: _Ctx, e: Term, s: Sec) -> Term:
        if self.type_of(ctx, e) == s:
            return e
        z = ctx.fresh_var()
        return App(Lam(z, s, Var(z)), e)

    def term(self, s: Sec, ctx: _Ctx, depth: int) -> Term:
        """A term whose type is a subtype of ``s``."""
        for _ in range(8):
            e = self._attempt(s, ctx, depth)
            if e is None:
                continue
            try:
                if subtype(self.type_of(ctx, e), s):
                    return e
            except TypeCheckError:
                continue
        return self.base(s, ctx)

    def _attempt(self, s: Sec, ctx: _Ctx, depth: int) -> Term | None:
        if depth <= 0:
            return self.base(s, ctx)
        kinds = ["base", "var", "reach", "fst", "app", "case", "open", "let"]
        if isinstance(s.left, Prim):
            kinds += ["op", "op"]
        k = self.rng.choice(kinds)
        d = depth - 1
        match k:
            case "base":
                return self.intro(s, ctx, d)
            case "var":
                names = [x for x, t in ctx.gamma.items() if subtype(t, s)]
                return Var(self.rng.choice(names)) if names else None
            case "reach":
                return self.reach(s, ctx, d)
            case "op":
                return self.op(s, ctx, d)
            case "fst":
                other = self.sec_type(ctx.delta, 1)
                if self.rng.random() < 0.5:
                    return Fst(self.term(pub(Pair(s, other)), ctx, d))
                return Snd(self.term(pub(Pair(other, s)), ctx, d))
            case "app":
                arg_t = self.sec_type(ctx.delta, 1)
                x = ctx.fresh_var()
                inner = ctx.with_var(x, arg_t)
                fn = Lam(x, arg_t, self.exact(inner, self.term(s, inner, d), s))
                return App(fn, self.term(arg_t, ctx, d))
            case "let":
                # (fun (x: S') => body) arg, with the body using x freely
                arg_t = self.sec_type(ctx.delta, 1)
                x = ctx.fresh_var()
                inner = ctx.with_var(x, arg_t)
                body = self.term(s, inner, d)
                res = self.type_of(inner, body)
                return App(Lam(x, arg_t, body), self.term(arg_t, ctx, d)) if subtype(res, s) else None
            case "case":
                s1, s2 = self.sec_type(ctx.delta, 1), self.sec_type(ctx.delta, 1)
                x1, x2 = ctx.fresh_var(), ctx.fresh_var()
                scrut = self.term(pub(Sum(s1, s2)), ctx, d)
                return Case(scrut, x1, self.term(s, ctx.with_var(x1, s1), d),
                            x2, self.term(s, ctx.with_var(x2, s2), d))
            case "open":
                return self.open(s, ctx, d)
        return None

    def open(self, s: Sec, ctx: _Ctx, d: int) -> Term:
        ety = self.exists_type(ctx)
        pkg = self.term(pub(ety), ctx, d)
        y = ety.var
        x = ctx.fresh_var()
        inner = ctx.with_tyvar(y, rep_type(ety)).with_var(x, pub(ety.body))
        return Open(y, x, pkg, self.term(s, inner, d))

    def op(self, s: Sec, ctx: _Ctx, d: int) -> Term | None:
        p = s.left
        # public results need public operands
        def operand(q: Prim) -> Term:
            target = pub(q) if s.left == s.right or isinstance(s.right, TVar) else priv(q)
            return self.term(target, ctx, d)

        if p == INT:
            op = self.rng.choice(["+", "-", "*", "%", "length"])
            if op == "length":
                return UnOp("length", operand(STRING))
            if op == "%":
                return BinOp("%", operand(INT), Lit(self.rng.choice([n for n in self.cfg.ints if n] or [1])))
            return BinOp(op, operand(INT), operand(INT))
        if p == BOOL:
            if self.rng.random() < 0.5:
                return BinOp("<=", operand(INT), operand(INT))
            q = self.rng.choice(PRIMS)
            return BinOp("==", operand(q), operand(q))
        if p == STRING:
            return BinOp("++", operand(STRING), operand(STRING))
        return None

    def reach(self, s: Sec, ctx: _Ctx, d: int) -> Term | None:
        """Eliminate an environment variable until its type fits ``s``."""
        if not ctx.gamma:
            return None
        x = self.rng.choice(sorted(ctx.gamma))
        e: Term = Var(x)
        t = ctx.gamma[x]
        for _ in range(4):
            if subtype(t, s):
                return e
            match t.left:
                case Pair():
                    e = self.rng.choice([Fst, Snd])(e)
                case Fun(dom, _):
                    arg = self.safe_arg(dom, ctx)
                    if arg is None:
                        return None
                    e = App(e, arg)
                case _:
                    return None
            try:
                t = self.type_of(ctx, e)
            except TypeCheckError:
                return None
        return e if subtype(t, s) else None

    def safe_arg(self, s: Sec, ctx: _Ctx) -> Term | None:
        """An argument for an environment function: a pool literal or an input."""
        names = [x for x in ctx.inputs if x in ctx.gamma and subtype(ctx.gamma[x], s)]
        if isinstance(s.left, Prim) and (not names or self.rng.random() < 0.5):
            return self.lit(s.left)
        if isinstance(s.left, UnitT):
            return Unit()
        return Var(self.rng.choice(sorted(names))) if names else None

    def intro(self, s: Sec, ctx: _Ctx, d: int) -> Term | None:
        match s.left:
            case Pair(a, b):
                return PairE(self.exact(ctx, self.term(a, ctx, d), a),
                             self.exact(ctx, self.term(b, ctx, d), b))
            case Sum(a, b):
                if self.rng.random() < 0.5:
                    return Inl(self.term(a, ctx, d), s)
                return Inr(self.term(b, ctx, d), s)
            case Fun(a, b):
                x = ctx.fresh_var()
                inner = ctx.with_var(x, a)
                return Lam(x, a, self.exact(inner, self.term(b, inner, d), b))
            case Exists():
                return self.pack(s.left, ctx, d)
        return self.base(s, ctx)

    def pack(self, ety: Exists, ctx: _Ctx, d: int) -> Term:
        rep = rep_type(ety)
        w = rep if not isinstance(rep, TVar) else self.rng.choice(PRIMS)
        target = pub(subst_type(ety.body, ety.var, w))
        return Pack(w, self.exact(ctx, self.term(target, ctx, d), target), ety)

    def base(self, s: Sec, ctx: _Ctx) -> Term:
        """A small term of type (a subtype of) ``s`` built from introductions."""
        t = s.left
        match t:
            case Prim():
                return self.lit(t)
            case UnitT():
                return Unit()
            case TVar(y):
                names = [x for x, st in ctx.gamma.items() if subtype(st, s)]
                if names:
                    return Var(self.rng.choice(sorted(names)))
                e = self.reach(s, ctx, 0)
                if e is None:
                    raise GenFailure(f"no way to produce a value of abstract type {y}")
                return e
            case Pair(a, b):
                return PairE(self.exact(ctx, self.base(a, ctx), a),
                             self.exact(ctx, self.base(b, ctx), b))
            case Sum(a, b):
                return Inl(self.base(a, ctx), s)
            case Fun(a, b):
                x = ctx.fresh_var()
                inner = ctx.with_var(x, a)
                return Lam(x, a, self.exact(inner, self.base(b, inner), b))
            case Exists():
                return self.pack(t, ctx, 0)
        raise GenFailure(f"cannot generate a term of type {s!r}")


def closed_term(rng: random.Random, config: GenConfig | None = None) -> tuple[Term, Sec]:
    """A random closed security-well-typed term and its type."""
    gen = TermGen(rng, config)
    while True:
        ctx = _Ctx({}, {})
        s = gen.sec_type({}, 2)
        try:
            e = gen.term(s, ctx, gen.cfg.max_depth)
            return e, type_of({}, {}, e)
        except (GenFailure, TypeCheckError):
            continue


# input signatures for open terms over one abstract type X : Int
def input_menu(x: str = "X") -> list[Sec]:
    dx = Sec(INT, TVar(x))
    return [
        dx,
        pub(INT),
        priv(INT),
        pub(BOOL),
        priv(STRING),
        pub(Pair(dx, pub(Fun(dx, pub(BOOL))))),
        pub(Fun(dx, pub(INT))),
        pub(Fun(pub(INT), pub(INT))),
    ]


def open_term(rng: random.Random, config: GenConfig | None = None,
              n_inputs: int = 2) -> tuple[dict, dict, Term, Sec]:
    """A random term over ``X : Int`` and a few inputs, with its type."""
    gen = TermGen(rng, config)
    delta = {"X": INT}
    while True:
        menu = input_menu()
        gamma = {f"x{i}": rng.choice(menu) for i in range(1, n_inputs + 1)}
        ctx = _Ctx(delta, gamma, frozenset(gamma))
        s = rng.choice([pub(INT), priv(INT), Sec(INT, TVar("X")), pub(BOOL),
                        pub(Pair(pub(INT), pub(BOOL))), pub(Fun(pub(INT), pub(BOOL)))])
        try:
            e = gen.term(s, ctx, gen.cfg.max_depth)
            return delta, gamma, e, type_of(delta, gamma, e)
        except (GenFailure, TypeCheckError):
            continue
