import random

import pytest
from hypothesis import given, settings, strategies as st

from exsec import gen
from exsec.evaluator import (
    Done, FuelExhausted, OutOfDomain, Stepped, Stuck, StuckError, eval_term, step, theta, trace,
)
from exsec.parser import parse_term
from exsec.pretty import pretty
from exsec.syntax import (
    App, BinOp, Case, Fst, Inl, Inr, Lam, Lit, Open, Pack, PairE, Snd, Table, UnOp, is_value,
)
from exsec.typecheck import check_against

from oracle import OracleStuck, observe, observe_term, run


def value(text):
    return eval_term(parse_term(text))


@pytest.mark.parametrize("text, expected", [
    ("7 % 3", 1),
    ("(-7) % 3", 2),
    ("7 % (-3)", 1),
    ("(-7) % (-3)", 2),
    ("length \"abc\" + 1", 4),
    ("\"a\" ++ \"b\" == \"ab\"", True),
    ("1 == true", False),
    ("(fun (x: Int) => x * x) 5", 25),
    ("case inr 4 : Bool + Int of inl b => 0 | inr n => n - 1", 3),
    ("open pack <Int, (2, fun (y: Int) => y + 1)> as exists X. X * (X -> Int) as <Z, p> in (snd p) (fst p)", 3),
    ("(table (Int -> Bool) { 1 => true; 2 => false }) 2", False),
])
def test_values(text, expected):
    assert value(text) == Lit(expected)


@given(st.integers(-50, 50), st.integers(-50, 50).filter(bool))
def test_remainder_is_euclidean(a, b):
    r = theta("%", a, b)
    assert 0 <= r < abs(b) and (a - r) % b == 0


def test_stuck_terms():
    with pytest.raises(StuckError):
        value("5 % 0")
    with pytest.raises(OutOfDomain):
        value("(table (Int -> Int) { 1 => 1 }) 3")
    r = step(parse_term("1 2"))
    assert isinstance(r, Stuck)


def test_fuel_and_trace():
    e = parse_term("(fun (x: Int) => x + 1) (2 * 3)")
    t = trace(e)
    assert [pretty(x) for x in t] == [
        "(fun (x: pub Int) => x + 1) (2 * 3)", "(fun (x: pub Int) => x + 1) 6", "6 + 1", "7"]
    with pytest.raises(FuelExhausted):
        eval_term(e, fuel=1)
    assert eval_term(e, fuel=3) == Lit(7)


def test_values_are_done():
    v = parse_term("(1, fun (x: Int) => x)")
    assert step(v) == Done(v)


# -- independent decomposition into evaluation context and redex


def _is_redex(e):
    match e:
        case Fst(PairE(a, b)) | Snd(PairE(a, b)):
            return is_value(a) and is_value(b)
        case Case(Inl(v) | Inr(v)):
            return is_value(v)
        case App(Lam() | Table(), v):
            return is_value(v)
        case BinOp(_, Lit(), Lit()) | UnOp(_, Lit()):
            return True
        case Open(_, _, Pack(_, v)):
            return is_value(v)
    return False


def decompositions(e):
    """Every way of writing ``e`` as E[r] with r a redex."""
    out = [()] if _is_redex(e) else []
    frames = []
    match e:
        case App(f, a):
            frames = [("fn", f)] + ([("arg", a)] if is_value(f) else [])
        case BinOp(_, a, b):
            frames = [("lhs", a)] + ([("rhs", b)] if is_value(a) else [])
        case PairE(a, b):
            frames = [("fst", a)] + ([("snd", b)] if is_value(a) else [])
        case Fst(a) | Snd(a) | Inl(a) | Inr(a) | UnOp(_, a):
            frames = [("sub", a)]
        case Pack(_, a):
            frames = [("payload", a)]
        case Case(s):
            frames = [("scrut", s)]
        case Open(_, _, p):
            frames = [("package", p)]
    for name, sub in frames:
        out += [(name,) + path for path in decompositions(sub)]
    return out


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_unique_decomposition_along_every_run(seed):
    e, _ = gen.closed_term(random.Random(seed))
    while not is_value(e):
        assert len(decompositions(e)) == 1, pretty(e)
        r = step(e)
        assert isinstance(r, Stepped) and step(e) == r
        e = r.term


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_agrees_with_big_step_oracle(seed):
    e, _ = gen.closed_term(random.Random(seed))
    assert observe_term(eval_term(e)) == observe(run(e))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_preservation(seed):
    e, s = gen.closed_term(random.Random(seed), gen.GenConfig(max_depth=5))
    while not is_value(e):
        e = step(e).term
        check_against({}, {}, e, s)


def test_oracle_rejects_what_the_machine_rejects():
    for text in ("5 % 0", "(table (Int -> Int) { 1 => 1 }) 3", "fst 1"):
        with pytest.raises(OracleStuck):
            run(parse_term(text))
        with pytest.raises(StuckError):
            eval_term(parse_term(text))
