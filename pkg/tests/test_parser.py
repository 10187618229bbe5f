import random

import pytest
from hypothesis import given, settings, strategies as st

from exsec import corpus_path, gen
from exsec.parser import ParseError, parse, parse_term, parse_type, parse_witness, tokenize
from exsec.pretty import pretty
from exsec.syntax import (
    BOOL, INT, STRING, App, BinOp, Exists, Fun, Lit, Open, Pack, Pair, Sec, Sum, TVar,
    Var, priv, pub, strip_pos,
)

CORPUS = sorted(p.name for p in corpus_path("").iterdir() if p.name.endswith(".fsec"))


def roundtrip(e):
    return strip_pos(parse_term(pretty(e))) == strip_pos(e)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_pretty_parse_roundtrip_closed(seed):
    e, s = gen.closed_term(random.Random(seed))
    assert roundtrip(e), pretty(e)
    assert parse_type(pretty(s)) == s


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_pretty_parse_roundtrip_open(seed):
    _, gamma, e, s = gen.open_term(random.Random(seed), gen.GenConfig(max_depth=4))
    assert roundtrip(e), pretty(e)
    for t in gamma.values():
        assert parse_type(pretty(t)) == t


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_main_roundtrips(name):
    prog = parse(corpus_path(name).read_text())
    assert roundtrip(prog.closed_main())


@pytest.mark.parametrize("text, expected", [
    ("Int", pub(INT)),
    ("priv String", priv(STRING)),
    ("Int!X", Sec(INT, TVar("X"))),
    ("Int -> Bool -> Int", pub(Fun(pub(INT), pub(Fun(pub(BOOL), pub(INT)))))),
    ("Int * Bool * String", pub(Pair(pub(INT), pub(Pair(pub(BOOL), pub(STRING)))))),
    ("Int + Bool * Int", pub(Sum(pub(INT), pub(Pair(pub(BOOL), pub(INT)))))),
    ("(Int -> Bool) -> Int", pub(Fun(pub(Fun(pub(INT), pub(BOOL))), pub(INT)))),
    ("exists X. Int!X * (Int!X -> Bool)",
     pub(Exists("X", Pair(Sec(INT, TVar("X")), pub(Fun(Sec(INT, TVar("X")), pub(BOOL))))))),
])
def test_type_syntax(text, expected):
    assert parse_type(text) == expected


def test_multi_binder_exists_desugars_to_nesting():
    s = parse_type("exists X, Y. X * Y")
    assert s == pub(Exists("X", Exists("Y", Pair(pub(TVar("X")), pub(TVar("Y"))))))


def test_operator_precedence():
    e = parse_term("1 + 2 * 3 <= 7")
    assert strip_pos(e) == BinOp("<=", BinOp("+", Lit(1), BinOp("*", Lit(2), Lit(3))), Lit(7))
    e = parse_term("f x y")
    assert strip_pos(e) == App(App(Var("f"), Var("x")), Var("y"))
    assert strip_pos(parse_term("(-3)")) == Lit(-3)


def test_multi_witness_pack_and_open():
    e = parse_term('pack <Int, Bool, (1, true)> as exists X, Y. X * Y')
    assert isinstance(e, Pack) and e.witness == INT
    assert isinstance(e.payload, Pack) and e.payload.witness == BOOL
    o = parse_term("open p as <X, Y, z> in z")
    assert isinstance(o, Open) and isinstance(o.body, Open)
    assert o.body.var == "z" and o.body.package == Var(o.var)


def test_program_items():
    prog = parse('''
        type P = exists X. Int!X * (Int!X -> Bool)
        tyvar X : Int
        input x : pub (Int!X * (Int!X -> pub Bool))
        let k = 3
        observe pub Bool
        carrier Int = 1..3, 7
        carrier String = "a", "aa"
        (snd x) (fst x)
    ''')
    assert prog.tyvars == {"X": INT}
    assert prog.observe == pub(BOOL)
    assert prog.carriers == {"Int": (1, 2, 3, 7), "String": ("a", "aa")}
    assert "P" in prog.aliases and [n for n, _ in prog.lets] == ["k"]


def test_lets_are_inlined_in_order():
    prog = parse("let a = 1\nlet b = a + 1\nb * b")
    assert strip_pos(prog.closed_main()) == BinOp(
        "*", BinOp("+", Lit(1), Lit(1)), BinOp("+", Lit(1), Lit(1)))


@pytest.mark.parametrize("text, line, col", [
    ("", 1, 1),
    ("fun (x: Int) =>", 1, 16),
    ("let x = 1\nlet x = 2\nx", 2, 1),
    ("1 +\n  * 2", 2, 3),
    ("input x : Int!X\nx", 1, 1),
    ('"unterminated', 1, 1),
])
def test_parse_errors_carry_positions(text, line, col):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.col) == (line, col)


def test_comments_are_skipped():
    toks = tokenize("1 -- one\n+ 2")
    assert [t.text for t in toks if t.kind != "eof"] == ["1", "+", "2"]


def test_witness_file():
    prog = parse(corpus_path("salary_parity.fsec").read_text())
    w = parse_witness(corpus_path("salary_parity.wit").read_text(), prog)
    t1, t2, pairs = w.rho["X"]
    assert (t1, t2) == (INT, INT) and pairs == ((Lit(100001), Lit(100002)),)
    a, b = w.subst["x"]
    assert a.fst == Lit(100001) and b.fst == Lit(100002)
    with pytest.raises(ParseError):
        parse_witness("X := (Int, Int) { 1 }")


def test_items_end_at_the_left_margin():
    w = parse_witness("x := (1, f) | (2, f)\ny := 3 | 4")
    assert set(w.subst) == {"x", "y"}
    prog = parse("let f = fun (y: Int) =>\n  y + 1\nf 2")
    assert strip_pos(prog.main) == App(Var("f"), Lit(2))
