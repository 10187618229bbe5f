import pytest
from hypothesis import given, strategies as st

from exsec.syntax import (
    BOOL, INT, STRING, TOP, AmbiguousRepresentation, App, Exists, Fun, IllFormedType, Lam,
    Lit, Pair, PairE, Sec, TVar, Var, check_security_type, erase, free_vars, is_value,
    lift, priv, pub, rep_type, subst_term, subst_type, wf_security_type,
)

X, Y = TVar("X"), TVar("Y")


def test_pub_and_priv_abbreviations():
    assert pub(INT) == Sec(INT, INT)
    assert priv(INT) == Sec(INT, TOP)


@pytest.mark.parametrize("s, delta, ok", [
    (pub(INT), {}, True),
    (priv(STRING), {}, True),
    (Sec(INT, X), {"X": INT}, True),
    (Sec(INT, X), {"X": BOOL}, False),
    (Sec(INT, X), {}, False),
    (Sec(INT, BOOL), {}, False),
    (Sec(TOP, TOP), {}, False),
    (pub(Fun(Sec(INT, X), pub(BOOL))), {"X": INT}, True),
    (pub(Pair(pub(INT), Sec(STRING, X))), {"X": INT}, False),
])
def test_well_formedness(s, delta, ok):
    assert wf_security_type(delta, s) is ok


def test_rep_type_unique_absent_and_ambiguous():
    assert rep_type(Exists("X", Pair(Sec(INT, X), pub(Fun(Sec(INT, X), pub(BOOL)))))) == INT
    assert rep_type(Exists("X", Pair(pub(X), pub(X)))) == X
    with pytest.raises(AmbiguousRepresentation):
        rep_type(Exists("X", Pair(Sec(INT, X), Sec(STRING, X))))


def test_existential_body_checked_under_its_representation():
    check_security_type({}, pub(Exists("X", Pair(Sec(INT, X), pub(X)))))
    with pytest.raises(IllFormedType):
        check_security_type({}, pub(Exists("X", Sec(INT, Y))))


def test_exists_equality_is_alpha():
    assert Exists("X", pub(X).left) == Exists("Y", Y)
    assert hash(Exists("X", X)) == hash(Exists("Y", Y))
    assert Exists("X", X) != Exists("X", INT)


def test_erase_and_lift_round_trip():
    s = pub(Fun(Sec(INT, X), priv(Pair(pub(BOOL), Sec(STRING, TOP)))))
    t = erase(s)
    assert t == Fun(INT, Pair(BOOL, STRING))
    assert erase(lift(t)) == t


def test_subst_type_avoids_capture():
    t = Exists("X", Pair(pub(X), pub(Y)))
    out = subst_type(t, "Y", X)
    assert isinstance(out, Exists) and out.var != "X"
    assert out == Exists("Z", Pair(pub(TVar("Z")), pub(X)))


def test_subst_term_avoids_capture_and_respects_shadowing():
    lam = Lam("y", pub(INT), App(Var("x"), Var("y")))
    out = subst_term(lam, "x", Var("y"))
    assert isinstance(out, Lam) and out.param != "y"
    assert free_vars(out) == {"y"}
    shadow = Lam("x", pub(INT), Var("x"))
    assert subst_term(shadow, "x", Lit(3)) == shadow


@given(st.integers(), st.integers())
def test_literal_equality_distinguishes_bool_from_int(a, b):
    assert (Lit(a) == Lit(b)) == (a == b)
    assert Lit(True) != Lit(1) and Lit(False) != Lit(0)


def test_values():
    assert is_value(PairE(Lit(1), Lam("x", pub(INT), Var("x"))))
    assert not is_value(PairE(Lit(1), App(Var("f"), Lit(2))))
