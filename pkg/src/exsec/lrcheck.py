"""Executable logical relation and relaxed-noninterference checking.

Every quantifier of the relation is made finite: primitive types range over
the carriers of a ``DomainSpec``, function types over total lookup tables
between carriers (plus closed lambdas taken from the program), and relations
for abstract types over subsets of carrier products.

A check either decides membership (``True``/``False``) or raises
``Undecided`` when a finite bound is hit, e.g. a table is applied outside
its domain or no relation making two packages equivalent was found.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .evaluator import FuelExhausted, OutOfDomain, StuckError, eval_term
from .syntax import (
    BOOL, INT, STRING, Exists, Fun, Inl, Inr, Lit, Pack, Pair, PairE,
    Prim, Sec, Sum, Table, Term, Top, TVar, Unit, UnitT, check_security_type,
    closed_lambdas, erase, free_tvars, is_value, lift, literals, rep_type,
    subst_term, subst_type, subst_type_in_term, IllFormedType,
)
from .typecheck import TypeCheckError, precise, simple_type_of, subtype, type_of

REP_CANDIDATES = (INT, BOOL, STRING)


class Undecided(Exception):
    """A finite bound was hit before membership could be decided."""


class PreconditionError(ValueError):
    pass


# --------------------------------------------------------------------------
# relational environments


@dataclass(frozen=True)
class RelEntry:
    t1: object
    t2: object
    pairs: tuple[tuple[Term, Term], ...]

    def __contains__(self, pair) -> bool:
        return pair in self.pairs


@dataclass(frozen=True, eq=False)
class RelEnv:
    """Maps type variables to two closed representation types and a relation."""

    entries: tuple[tuple[str, RelEntry], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(self.entries))

    def __eq__(self, other):
        return isinstance(other, RelEnv) and self.entries == other.entries

    def __hash__(self):
        return self._hash

    def __getitem__(self, name: str) -> RelEntry:
        for n, ent in self.entries:
            if n == name:
                return ent
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.entries)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def extend(self, name: str, entry: RelEntry) -> "RelEnv":
        rest = tuple((n, e) for n, e in self.entries if n != name)
        return RelEnv(rest + ((name, entry),))

    def rep(self, side: int, name: str):
        ent = self[name]
        return ent.t1 if side == 1 else ent.t2

    def apply(self, side: int, t):
        """Replace every variable of the environment in type ``t``."""
        for n, ent in self.entries:
            t = subst_type(t, n, ent.t1 if side == 1 else ent.t2)
        return t

    def apply_term(self, side: int, e: Term) -> Term:
        for n, ent in self.entries:
            e = subst_type_in_term(e, n, ent.t1 if side == 1 else ent.t2)
        return e


EMPTY_REL_ENV = RelEnv()


# --------------------------------------------------------------------------
# search configuration and verdicts


def _default_carriers() -> dict[str, tuple]:
    return {"Int": (0, 1, 2), "Bool": (False, True), "String": ("",)}


@dataclass(frozen=True)
class DomainSpec:
    """Finite carriers and search bounds."""

    carriers: Mapping[str, tuple] = field(default_factory=_default_carriers)
    fn_depth: int = 2
    max_carrier: int = 4096
    max_relation_pairs: int = 16
    max_package_search: int = 1 << 16
    fuel: int = 100_000
    budget: int = 5_000_000
    hetero: bool = False

    def carrier(self, prim: str) -> tuple:
        return tuple(self.carriers.get(prim, _default_carriers()[prim]))

    def with_carriers(self, **extra) -> "DomainSpec":
        merged = dict(self.carriers)
        merged.update({k: tuple(v) for k, v in extra.items()})
        return DomainSpec(merged, self.fn_depth, self.max_carrier, self.max_relation_pairs,
                          self.max_package_search, self.fuel, self.budget, self.hetero)

    def with_literals(self, *terms: Term) -> "DomainSpec":
        """Extend carriers with every literal occurring in ``terms``."""
        merged = {k: list(self.carrier(k)) for k in ("Int", "Bool", "String")}
        for e in terms:
            for lit in literals(e):
                vals = merged[lit.prim.name]
                if not any(type(v) is type(lit.value) and v == lit.value for v in vals):
                    vals.append(lit.value)
        return self.with_carriers(**merged)


@dataclass(frozen=True)
class SearchMode:
    kind: str = "exhaustive"  # exhaustive | sampled
    samples: int = 100
    seed: int = 0


@dataclass
class Holds:
    mode: str
    checked: int
    budget_used: int


@dataclass
class Violated:
    rho: RelEnv
    subst: tuple[dict[str, Term], dict[str, Term]]
    outputs: tuple[Term | None, Term | None]
    detail: str = ""


@dataclass
class Inconclusive:
    reason: str
    checked: int = 0


Verdict = Holds | Violated | Inconclusive


# --------------------------------------------------------------------------
# the checker


class Checker:
    """Decides membership in the value and expression interpretations.

    ``closures`` are closed lambdas that join the lookup tables as
    candidate values of function types (after instantiating their type
    annotations with the current relational environment).
    """

    def __init__(self, dom: DomainSpec | None = None, closures=()):
        self.dom = dom or DomainSpec()
        self.closures = tuple(dict.fromkeys(closures))
        self.work = 0
        self._carrier: dict = {}
        self._pool: dict = {}
        self._eval: dict = {}
        self._safe: dict = {}
        self._simple: dict = {}
        self.last_stuck: str = ""

    # -- bookkeeping

    def tick(self, n: int = 1) -> None:
        self.work += n
        if self.work > self.dom.budget:
            raise Undecided(f"work budget of {self.dom.budget} exhausted")

    def evaluate(self, e: Term, cache: bool = True) -> Term | None:
        """The value of ``e``, or None if evaluation gets stuck."""
        if is_value(e):
            return e
        if cache:
            hit = self._eval.get(e, self)
            if hit is not self:
                return hit
        self.tick()
        try:
            v = eval_term(e, self.dom.fuel)
        except OutOfDomain:
            raise Undecided("a function table was applied outside its domain") from None
        except FuelExhausted:
            raise Undecided(f"evaluation did not finish within {self.dom.fuel} steps") from None
        except StuckError as exc:
            self.last_stuck = exc.reason
            v = None
        if cache:
            self._eval[e] = v
        return v

    def simple_type(self, v: Term):
        t = self._simple.get(v)
        if t is None:
            try:
                t = simple_type_of((), {}, v)
            except TypeCheckError:
                t = False
            self._simple[v] = t
        return t

    def atom(self, v: Term, t) -> bool:
        return self.simple_type(v) == t

    # -- carriers

    def pool(self, side: int, rho: RelEnv) -> frozenset:
        key = (side, rho)
        out = self._pool.get(key)
        if out is None:
            found = []
            for c in self.closures:
                inst = rho.apply_term(side, c)
                if self.simple_type(inst) is not False:
                    found.append(inst)
            out = tuple(found)
            self._pool[key] = out
        return out

    def carrier(self, t, pool: tuple = (), depth: int = 0) -> tuple[Term, ...]:
        """Candidate closed values of the closed simple type ``t``."""
        key = (t, pool, depth)
        hit = self._carrier.get(key)
        if hit is not None:
            return hit
        out = self._carrier_uncached(t, pool, depth)
        if len(out) > self.dom.max_carrier:
            raise Undecided(f"more than {self.dom.max_carrier} candidate values")
        self._carrier[key] = out
        return out

    def _carrier_uncached(self, t, pool, depth) -> tuple[Term, ...]:
        match t:
            case Prim(n):
                return tuple(Lit(v) for v in self.dom.carrier(n))
            case UnitT():
                return (Unit(),)
            case Pair(a, b):
                xs, ys = self.carrier(a, pool, depth), self.carrier(b, pool, depth)
                self._limit(len(xs) * len(ys))
                return tuple(PairE(x, y) for x in xs for y in ys)
            case Sum(a, b):
                ann = lift(t)
                return (tuple(Inl(x, ann) for x in self.carrier(a, pool, depth))
                        + tuple(Inr(y, ann) for y in self.carrier(b, pool, depth)))
            case Fun(a, b):
                if depth >= self.dom.fn_depth:
                    raise Undecided(f"function types nested deeper than {self.dom.fn_depth}")
                keys = self.carrier(a, pool, depth + 1)
                outs = self.carrier(b, pool, depth)
                self._limit(len(outs) ** len(keys))
                da, cb = lift(a), lift(b)
                tables = tuple(
                    Table(da, cb, tuple(zip(keys, combo)))
                    for combo in itertools.product(outs, repeat=len(keys))
                )
                extra = tuple(c for c in pool if self.simple_type(c) == t)
                return tables + extra
            case Exists(x, body):
                ann = lift(t).left
                out = []
                for w in REP_CANDIDATES:
                    for v in self.carrier(subst_type(body, x, w), pool, depth):
                        out.append(Pack(w, v, ann))
                    self._limit(len(out))
                return tuple(out)
        raise Undecided(f"no finite carrier for {t!r}")

    def _limit(self, n: int) -> None:
        if n > self.dom.max_carrier:
            raise Undecided(f"more than {self.dom.max_carrier} candidate values")

    def candidates(self, side: int, rho: RelEnv, t) -> tuple[Term, ...]:
        closed = rho.apply(side, erase(t))
        if free_tvars(closed):
            raise Undecided(f"type has free variables after instantiation: {closed!r}")
        return self.carrier(closed, self.pool(side, rho))

    # -- related pairs

    def pairs_sec(self, s: Sec, rho: RelEnv) -> list[tuple[Term, Term]]:
        """All candidate pairs related at security type ``s``."""
        left, right = s.left, s.right
        if isinstance(right, Top):
            xs, ys = self.candidates(1, rho, left), self.candidates(2, rho, left)
            self._limit(len(xs) * len(ys))
            return [(x, y) for x in xs for y in ys]
        if left == right:
            return self.pairs_safe(left, rho)
        if isinstance(right, TVar):
            out = list(rho[right.name].pairs)
            for p in self.pairs_safe(left, rho):
                if p not in out:
                    out.append(p)
            return out
        raise IllFormedType(f"ill-formed security type {s!r}")

    def pairs_safe(self, t, rho: RelEnv) -> list[tuple[Term, Term]]:
        match t:
            case Prim() | UnitT():
                return [(v, v) for v in self.candidates(1, rho, t)]
            case TVar(x):
                return list(rho[x].pairs)
            case Pair(a, b):
                xs, ys = self.pairs_sec(a, rho), self.pairs_sec(b, rho)
                self._limit(len(xs) * len(ys))
                return [(PairE(p1, q1), PairE(p2, q2)) for p1, p2 in xs for q1, q2 in ys]
            case Sum(a, b):
                ann1, ann2 = lift(rho.apply(1, erase(t))), lift(rho.apply(2, erase(t)))
                return ([(Inl(v1, ann1), Inl(v2, ann2)) for v1, v2 in self.pairs_sec(a, rho)]
                        + [(Inr(v1, ann1), Inr(v2, ann2)) for v1, v2 in self.pairs_sec(b, rho)])
            case Fun() | Exists():
                xs, ys = self.candidates(1, rho, t), self.candidates(2, rho, t)
                self._limit(len(xs) * len(ys))
                return [(x, y) for x in xs for y in ys if self.val_safe(t, rho, x, y)]
        raise IllFormedType(f"not a safety type: {t!r}")

    # -- membership

    def val_sec(self, s: Sec, rho: RelEnv, v1: Term, v2: Term) -> bool:
        left, right = s.left, s.right
        if isinstance(right, Top):
            return (self.atom(v1, rho.apply(1, erase(left)))
                    and self.atom(v2, rho.apply(2, erase(left))))
        if left == right:
            return self.val_safe(left, rho, v1, v2)
        if isinstance(right, TVar):
            return (v1, v2) in rho[right.name] or self.val_safe(left, rho, v1, v2)
        raise IllFormedType(f"ill-formed security type {s!r}")

    def val_safe(self, t, rho: RelEnv, v1: Term, v2: Term) -> bool:
        match t:
            case Prim(n):
                return (isinstance(v1, Lit) and v1.prim.name == n and v1 == v2)
            case UnitT():
                return isinstance(v1, Unit) and isinstance(v2, Unit)
            case TVar(x):
                return (v1, v2) in rho[x]
            case Pair(a, b):
                return (isinstance(v1, PairE) and isinstance(v2, PairE)
                        and self.val_sec(a, rho, v1.fst, v2.fst)
                        and self.val_sec(b, rho, v1.snd, v2.snd))
            case Sum(a, b):
                if isinstance(v1, Inl) and isinstance(v2, Inl):
                    return self.val_sec(a, rho, v1.expr, v2.expr)
                if isinstance(v1, Inr) and isinstance(v2, Inr):
                    return self.val_sec(b, rho, v1.expr, v2.expr)
                return False
        key = (t, rho, v1, v2)
        hit = self._safe.get(key)
        if hit is None:
            hit = self._val_safe_slow(t, rho, v1, v2)
            self._safe[key] = hit
        return hit

    def _val_safe_slow(self, t, rho: RelEnv, v1: Term, v2: Term) -> bool:
        if not (self.atom(v1, rho.apply(1, erase(t))) and self.atom(v2, rho.apply(2, erase(t)))):
            return False
        match t:
            case Fun(a, b):
                from .syntax import App

                for a1, a2 in self.pairs_sec(a, rho):
                    if not self.expr_sec(b, rho, App(v1, a1), App(v2, a2)):
                        return False
                return True
            case Exists():
                return self.package_related(t, rho, v1, v2)
        raise IllFormedType(f"not a safety type: {t!r}")

    def package_related(self, t: Exists, rho: RelEnv, v1: Term, v2: Term) -> bool:
        if not (isinstance(v1, Pack) and isinstance(v2, Pack)):
            return False
        x, body = t.var, t.body
        rep = rep_type(t)
        w1, w2 = v1.witness, v2.witness
        if rep != TVar(x):
            if not (precise(w1, rho.apply(1, rep)) and precise(w2, rho.apply(2, rep))):
                return False
        elif w1 != w2 and not self.dom.hetero:
            # distinct representations are only searched when enabled
            raise Undecided("packages with different representation types")
        pool = list(itertools.product(self._rel_pool(w1, v1.payload),
                                      self._rel_pool(w2, v2.payload)))
        undecided = None
        tried = 0
        for size in range(len(pool) + 1):
            for subset in itertools.combinations(pool, size):
                tried += 1
                if tried > self.dom.max_package_search:
                    raise Undecided("relation search for a package pair exceeded its bound")
                inner = rho.extend(x, RelEntry(w1, w2, subset))
                try:
                    if self.val_safe(body, inner, v1.payload, v2.payload):
                        return True
                except Undecided as exc:
                    undecided = exc
        raise Undecided(
            "no relation over the candidate values makes the packages equivalent"
            + (f" ({undecided})" if undecided else "")
        )

    def _rel_pool(self, w, payload: Term) -> list[Term]:
        out = list(self.carrier(w)) if not free_tvars(w) else []
        if isinstance(w, Prim):
            for lit in literals(payload):
                if lit.prim == w and lit not in out:
                    out.append(lit)
        return out

    def expr_sec(self, s: Sec, rho: RelEnv, e1: Term, e2: Term, cache: bool = True) -> bool:
        v1, v2 = self.evaluate(e1, cache), self.evaluate(e2, cache)
        if v1 is None or v2 is None:
            return False
        return self.val_sec(s, rho, v1, v2)

    # -- environments

    def rel_envs(self, delta: Mapping, mode: SearchMode = SearchMode()) -> Iterator[RelEnv]:
        names = list(delta)
        if mode.kind == "sampled":
            rng = random.Random(mode.seed)
            for _ in range(mode.samples):
                rho = EMPTY_REL_ENV
                for x in names:
                    t1, t2 = rng.choice(self._rep_choices(delta[x], rho))
                    pool = self._pair_pool(t1, t2)
                    rho = rho.extend(x, RelEntry(t1, t2, tuple(p for p in pool if rng.random() < 0.5)))
                yield rho
            return
        yield from self._rel_envs_exhaustive(delta, names, EMPTY_REL_ENV)

    def _rel_envs_exhaustive(self, delta, names, rho) -> Iterator[RelEnv]:
        if not names:
            yield rho
            return
        x, rest = names[0], names[1:]
        for t1, t2 in self._rep_choices(delta[x], rho):
            pool = self._pair_pool(t1, t2)
            if len(pool) > self.dom.max_relation_pairs:
                raise Undecided(
                    f"{x} has {len(pool)} candidate pairs; exhaustive search is limited "
                    f"to {self.dom.max_relation_pairs}")
            for size in range(len(pool) + 1):
                for subset in itertools.combinations(pool, size):
                    yield from self._rel_envs_exhaustive(
                        delta, rest, rho.extend(x, RelEntry(t1, t2, subset)))

    def _rep_choices(self, t, rho: RelEnv) -> list[tuple]:
        if isinstance(t, TVar) and t.name not in rho:
            if self.dom.hetero:
                return [(a, b) for a in REP_CANDIDATES for b in REP_CANDIDATES]
            return [(a, a) for a in REP_CANDIDATES]
        return [(rho.apply(1, t), rho.apply(2, t))]

    def _pair_pool(self, t1, t2) -> list[tuple[Term, Term]]:
        xs, ys = self.carrier(t1), self.carrier(t2)
        return [(a, b) for a in xs for b in ys]

    def count_rel_envs(self, delta: Mapping) -> int:
        total = 1
        rho = EMPTY_REL_ENV
        for x in delta:
            n = 0
            for t1, t2 in self._rep_choices(delta[x], rho):
                n += 2 ** len(self._pair_pool(t1, t2))
            total *= n
        return total

    def subst_pairs(self, gamma: Mapping, rho: RelEnv) -> Iterator[tuple[dict, dict]]:
        names = list(gamma)
        options = [self.pairs_sec(gamma[x], rho) for x in names]
        for combo in itertools.product(*options):
            yield ({x: p[0] for x, p in zip(names, combo)},
                   {x: p[1] for x, p in zip(names, combo)})


# --------------------------------------------------------------------------
# noninterference


def instantiate(e: Term, rho: RelEnv, side: int, gamma: Mapping[str, Term]) -> Term:
    """``rho_side(gamma(e))``."""
    for x, v in gamma.items():
        e = subst_term(e, x, v)
    return rho.apply_term(side, e)


def _plug(e: Term, gamma: Mapping[str, Term]) -> Term:
    for x, v in gamma.items():
        e = subst_term(e, x, v)
    return e


def _preconditions(delta, gamma, e, s) -> None:
    try:
        for x, t in gamma.items():
            check_security_type(delta, t)
        check_security_type(delta, s)
    except IllFormedType as exc:
        raise PreconditionError(f"ill-formed type: {exc}") from None
    gamma_e = {x: erase(t) for x, t in gamma.items()}
    try:
        found = simple_type_of(delta.keys(), gamma_e, e)
    except TypeCheckError as exc:
        raise PreconditionError(f"program is not simply typed: {exc}") from None
    if found != erase(s):
        from .pretty import pretty

        raise PreconditionError(
            f"program has simple type {pretty(found)}, observation expects {pretty(erase(s))}")


def check_erni(delta: Mapping, gamma: Mapping, e: Term, s: Sec,
               dom: DomainSpec | None = None, mode: SearchMode = SearchMode(),
               checker: Checker | None = None) -> Verdict:
    """Search for related inputs whose outputs are unrelated at ``s``."""
    _preconditions(delta, gamma, e, s)
    dom = dom or DomainSpec()
    ck = checker or Checker(dom, closed_lambdas(e))
    checked = 0
    undecided: Undecided | None = None
    try:
        for rho in ck.rel_envs(delta, mode):
            # candidate values are closed, so instantiating types first is equivalent
            r1, r2 = rho.apply_term(1, e), rho.apply_term(2, e)
            try:
                for g1, g2 in ck.subst_pairs(gamma, rho):
                    checked += 1
                    try:
                        e1, e2 = _plug(r1, g1), _plug(r2, g2)
                        if not ck.expr_sec(s, rho, e1, e2, cache=False):
                            v1, v2 = ck.evaluate(e1, False), ck.evaluate(e2, False)
                            detail = ck.last_stuck if v1 is None or v2 is None else ""
                            return Violated(rho, (g1, g2), (v1, v2), detail)
                    except Undecided as exc:
                        undecided = undecided or exc
            except Undecided as exc:
                undecided = undecided or exc
    except Undecided as exc:
        return Inconclusive(str(exc), checked)
    if undecided is not None:
        return Inconclusive(str(undecided), checked)
    if mode.kind == "sampled":
        return Inconclusive(f"no violation found ({mode.samples} samples, seed {mode.seed})",
                            checked)
    return Holds(mode.kind, checked, ck.work)


def check_self_related(delta: Mapping, gamma: Mapping, e: Term, s: Sec,
                       dom: DomainSpec | None = None,
                       mode: SearchMode = SearchMode()) -> Verdict:
    """Relate a security-typed term to itself; a violation is a soundness bug."""
    try:
        found = type_of(delta, gamma, e)
    except TypeCheckError as exc:
        raise PreconditionError(f"program is not security typed: {exc}") from None
    if not subtype(found, s):
        from .pretty import pretty

        raise PreconditionError(f"program has type {pretty(found)}, not {pretty(s)}")
    return check_erni(delta, gamma, e, s, dom, mode)


def check_witness(delta: Mapping, gamma: Mapping, e: Term, s: Sec,
                  rho: RelEnv, g1: Mapping[str, Term], g2: Mapping[str, Term],
                  dom: DomainSpec | None = None) -> Verdict:
    """Check a single user-supplied instance of the definition."""
    _preconditions(delta, gamma, e, s)
    dom = dom or DomainSpec()
    ck = Checker(dom, closed_lambdas(e))
    g1 = {x: rho.apply_term(1, v) for x, v in g1.items()}
    g2 = {x: rho.apply_term(2, v) for x, v in g2.items()}
    try:
        problem = _admissible(ck, delta, gamma, rho, g1, g2)
        if problem:
            return Inconclusive(f"witness is not admissible: {problem}")
        e1, e2 = instantiate(e, rho, 1, g1), instantiate(e, rho, 2, g2)
        if ck.expr_sec(s, rho, e1, e2):
            return Holds("witness", 1, ck.work)
        v1, v2 = ck.evaluate(e1), ck.evaluate(e2)
        return Violated(rho, (dict(g1), dict(g2)), (v1, v2),
                        ck.last_stuck if v1 is None or v2 is None else "")
    except Undecided as exc:
        return Inconclusive(str(exc), 1)


def _admissible(ck: Checker, delta, gamma, rho: RelEnv, g1, g2) -> str:
    if set(rho.names()) != set(delta):
        return f"relations given for {sorted(rho.names())}, expected {sorted(delta)}"
    for x, t in delta.items():
        ent = rho[x]
        if not (precise(ent.t1, rho.apply(1, t)) and precise(ent.t2, rho.apply(2, t))):
            return f"representation of {x} does not refine {t!r}"
        for a, b in ent.pairs:
            if not (ck.atom(a, ent.t1) and ck.atom(b, ent.t2)):
                return f"pair in the relation for {x} has the wrong types"
    if set(g1) != set(gamma) or set(g2) != set(gamma):
        return f"substitutions must cover exactly {sorted(gamma)}"
    for x, s in gamma.items():
        if not ck.val_sec(s, rho, g1[x], g2[x]):
            return f"the values given for {x} are not related at its type"
    return ""


def in_value_rel(s: Sec, rho: RelEnv, v1: Term, v2: Term,
                 dom: DomainSpec | None = None, closures=()) -> bool:
    return Checker(dom, closures).val_sec(s, rho, v1, v2)


def in_expr_rel(s: Sec, rho: RelEnv, e1: Term, e2: Term,
                dom: DomainSpec | None = None, closures=()) -> bool:
    return Checker(dom, closures).expr_sec(s, rho, e1, e2)


def enum_rel_envs(delta: Mapping, dom: DomainSpec | None = None,
                  mode: SearchMode = SearchMode()) -> Iterator[RelEnv]:
    return Checker(dom).rel_envs(delta, mode)


def enum_subst_pairs(gamma: Mapping, rho: RelEnv, dom: DomainSpec | None = None,
                     closures=()) -> Iterator[tuple[dict, dict]]:
    return Checker(dom, closures).subst_pairs(gamma, rho)


def render_witness(v: Violated) -> str:
    """The violating instance in witness-file syntax."""
    from .pretty import pretty

    lines = []
    for name, ent in v.rho.entries:
        pairs = "; ".join(f"({pretty(a)}, {pretty(b)})" for a, b in ent.pairs)
        body = f" {pairs} " if pairs else ""
        lines.append(f"{name} := ({pretty(ent.t1)}, {pretty(ent.t2)}) {{{body}}}")
    g1, g2 = v.subst
    for x in g1:
        lines.append(f"{x} := {pretty(g1[x])} | {pretty(g2[x])}")
    return "\n".join(lines)


def rel_env_from_witness(rho: Mapping[str, tuple]) -> RelEnv:
    env = EMPTY_REL_ENV
    for name, (t1, t2, pairs) in rho.items():
        env = env.extend(name, RelEntry(t1, t2, tuple(pairs)))
    return env
