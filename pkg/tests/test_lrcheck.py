import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from exsec import corpus_path, gen
from exsec.evaluator import eval_term
from exsec.lrcheck import (
    EMPTY_REL_ENV, Checker, DomainSpec, Holds, Inconclusive, PreconditionError, RelEntry,
    SearchMode, Undecided, Violated, check_erni, check_self_related, check_witness,
    enum_rel_envs, enum_subst_pairs, in_expr_rel, in_value_rel, rel_env_from_witness,
    render_witness,
)
from exsec.parser import parse, parse_term, parse_type, parse_witness
from exsec.syntax import BOOL, INT, STRING, TOP, Lit, Sec, TVar, closed_lambdas, pub

X = TVar("X")
GTE = "fun (y: Int) => 100000 <= y"
POLICY = "exists X. Int!X * (Int!X -> pub Bool)"


def package(salary, op=GTE, ty=POLICY):
    return eval_term(parse_term(f"pack <Int, ({salary}, {op})> as {ty}"))


def rho_x(*pairs, t=INT):
    return EMPTY_REL_ENV.extend("X", RelEntry(t, t, tuple((Lit(a), Lit(b)) for a, b in pairs)))


def test_rel_env_lookup_and_extension():
    rho = rho_x((1, 2))
    assert "X" in rho and (Lit(1), Lit(2)) in rho["X"]
    rho2 = rho.extend("X", RelEntry(BOOL, BOOL, ()))
    assert rho2["X"].t1 == BOOL and rho2.names() == ("X",)
    assert rho.apply(1, X) == INT


def test_abstract_facet_is_union_of_relation_and_equality():
    s = Sec(INT, X)
    rho = rho_x((1, 2))
    assert in_value_rel(s, rho, Lit(1), Lit(2))
    assert in_value_rel(s, rho, Lit(3), Lit(3))
    assert not in_value_rel(s, rho, Lit(2), Lit(1))
    assert not in_value_rel(pub(INT), rho, Lit(1), Lit(2))
    assert in_value_rel(Sec(INT, TOP), rho, Lit(1), Lit(7))
    assert not in_value_rel(Sec(INT, TOP), rho, Lit(1), Lit(True))


def test_salary_packages_are_equivalent_behind_the_threshold():
    s = pub(parse_type(POLICY).left)
    p1, p2 = package(100001), package(100002)
    dom = DomainSpec().with_carriers(Int=(100000, 100001, 100002))
    assert in_value_rel(s, EMPTY_REL_ENV, p1, p2, dom)
    # no relation exists, but the search only covers finitely many, so this is undecided
    with pytest.raises(Undecided):
        in_value_rel(s, EMPTY_REL_ENV, package(100001), package(99999), dom)


def test_parity_exposing_packages_have_no_relation():
    ty = "exists X. Int!X * (Int!X -> pub Int)"
    s = pub(parse_type(ty).left)
    par = "fun (y: Int) => y % 2"
    dom = DomainSpec().with_carriers(Int=(100001, 100002))
    with pytest.raises(Undecided):
        in_value_rel(s, EMPTY_REL_ENV, package(100001, par, ty), package(100002, par, ty), dom)


def test_function_relation_quantifies_over_related_arguments():
    s = pub(parse_type("Int!X -> pub Bool").left)
    f = parse_term("fun (y: Int) => y <= 1")
    dom = DomainSpec().with_carriers(Int=(0, 1, 2))
    assert in_value_rel(s, rho_x((0, 1)), f, f, dom, [f])
    assert not in_value_rel(s, rho_x((1, 2)), f, f, dom, [f])


def test_expression_relation_requires_termination():
    assert in_expr_rel(pub(INT), EMPTY_REL_ENV, parse_term("1 + 1"), parse_term("2"))
    assert not in_expr_rel(pub(INT), EMPTY_REL_ENV, parse_term("1 % 0"), parse_term("1 % 0"))


def test_enumeration_counts():
    dom = DomainSpec().with_carriers(Int=(0, 1))
    envs = list(enum_rel_envs({"X": INT}, dom))
    assert len(envs) == 16 and len(set(envs)) == 16
    assert Checker(dom).count_rel_envs({"X": INT}) == 16
    pairs = list(enum_subst_pairs({"x": Sec(INT, X)}, rho_x((0, 1)), dom))
    assert ({"x": Lit(0)}, {"x": Lit(1)}) in pairs and len(pairs) == 3


def test_exhaustive_relation_search_is_bounded():
    e = parse_term("x")
    dom = DomainSpec().with_carriers(Int=tuple(range(5)))
    v = check_erni({"X": INT}, {"x": Sec(INT, X)}, e, Sec(INT, X), dom)
    assert isinstance(v, Inconclusive) and "limited" in v.reason


def test_sampled_mode_never_claims_holds():
    prog = parse(corpus_path("salary_ok.fsec").read_text())
    e = prog.closed_main()
    dom = DomainSpec().with_carriers(**prog.carriers)
    v = check_erni(prog.tyvars, prog.inputs, e, prog.observe, dom, SearchMode("sampled", 20, 3))
    assert isinstance(v, Inconclusive) and "20 samples, seed 3" in v.reason
    prog = parse(corpus_path("salary_raw.fsec").read_text())
    v = check_erni(prog.tyvars, prog.inputs, prog.closed_main(), prog.observe,
                   DomainSpec().with_carriers(**prog.carriers), SearchMode("sampled", 50, 0))
    assert isinstance(v, Violated)


def test_preconditions():
    with pytest.raises(PreconditionError):
        check_erni({}, {"x": pub(INT)}, parse_term("x + true"), pub(INT))
    with pytest.raises(PreconditionError):
        check_erni({}, {"x": pub(INT)}, parse_term("x"), pub(BOOL))
    with pytest.raises(PreconditionError):
        check_self_related({}, {"x": Sec(INT, TOP)}, parse_term("x"), pub(INT))


def test_untyped_but_simply_typed_programs_are_checked():
    # not security typed, yet noninterfering: the secret is discarded
    v = check_erni({}, {"x": Sec(INT, TOP)}, parse_term("x * 0"), pub(INT))
    assert isinstance(v, Holds)


@pytest.mark.parametrize("name", ["salary_parity", "salary_raw", "length_public",
                                  "length_abstract"])
def test_rendered_witness_reproduces_the_violation(name):
    prog = parse(corpus_path(f"{name}.fsec").read_text())
    e = prog.closed_main()
    dom = DomainSpec().with_carriers(**prog.carriers).with_literals(e)
    v = check_erni(prog.tyvars, prog.inputs, e, prog.observe, dom)
    assert isinstance(v, Violated)
    w = parse_witness(render_witness(v), prog)
    g1 = {x: a for x, (a, _) in w.subst.items()}
    g2 = {x: b for x, (_, b) in w.subst.items()}
    again = check_witness(prog.tyvars, prog.inputs, e, prog.observe,
                          rel_env_from_witness(w.rho), g1, g2, dom)
    assert isinstance(again, Violated) and again.outputs == v.outputs


def test_inadmissible_witness_is_reported():
    prog = parse(corpus_path("salary_ok.fsec").read_text())
    e = prog.closed_main()
    rho = rho_x((100001, 100002))
    g = lambda n: {"x": parse_term(f"(100001, fun (y: Int) => y <= {n})")}
    v = check_witness(prog.tyvars, prog.inputs, e, prog.observe, rho, g(100001), g(100002),
                      DomainSpec().with_carriers(**prog.carriers))
    assert isinstance(v, Inconclusive) and "not admissible" in v.reason


def test_different_representations_need_hetero():
    ty = "exists Y. Y * (Y -> pub Bool)"
    s = pub(parse_type(ty).left)
    a = eval_term(parse_term(f"pack <Int, (1, fun (n: Int) => n <= 1)> as {ty}"))
    b = eval_term(parse_term(f"pack <Bool, (true, fun (n: Bool) => n)> as {ty}"))
    closures = list(closed_lambdas(a)) + list(closed_lambdas(b))
    with pytest.raises(Undecided):
        in_value_rel(s, EMPTY_REL_ENV, a, b, DomainSpec(), closures)
    assert in_value_rel(s, EMPTY_REL_ENV, a, b, DomainSpec(hetero=True), closures)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32))
def test_closed_values_are_self_related(seed):
    e, s = gen.closed_term(random.Random(seed), gen.GenConfig(max_depth=4))
    v = eval_term(e)
    ck = Checker(DomainSpec().with_literals(e), closed_lambdas(e))
    try:
        assert ck.val_sec(s, EMPTY_REL_ENV, v, v)
    except Undecided:
        assume(False)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32))
def test_open_terms_are_self_related(seed):
    cfg = gen.GenConfig(max_depth=3, ints=(1, 2), strings=("", "a"))
    delta, gamma, e, s = gen.open_term(random.Random(seed), cfg)
    dom = DomainSpec().with_carriers(Int=(1, 2), String=("", "a"))
    assert not isinstance(check_self_related(delta, gamma, e, s, dom), Violated)


def test_enumeration_examples():
    dom = DomainSpec().with_carriers(Int=(0, 1))
    assert list(enum_rel_envs({}, dom)) == [EMPTY_REL_ENV]
    a = list(enum_rel_envs({"X": INT}, dom, SearchMode("sampled", 3, 42)))
    b = list(enum_rel_envs({"X": INT}, dom, SearchMode("sampled", 3, 42)))
    assert len(a) == 3 and a == b
    pub_pairs = list(enum_subst_pairs({"x": pub(INT)}, EMPTY_REL_ENV, dom))
    assert pub_pairs == [({"x": Lit(0)}, {"x": Lit(0)}), ({"x": Lit(1)}, {"x": Lit(1)})]
    assert len(list(enum_subst_pairs({"x": Sec(INT, TOP)}, EMPTY_REL_ENV, dom))) == 4


def test_membership_examples():
    assert in_value_rel(pub(INT), EMPTY_REL_ENV, Lit(5), Lit(5))
    assert not in_value_rel(pub(INT), EMPTY_REL_ENV, Lit(5), Lit(6))
    assert in_value_rel(Sec(STRING, TOP), EMPTY_REL_ENV, Lit("a"), Lit("aa"))
    z = EMPTY_REL_ENV.extend("Z", RelEntry(INT, INT, ((Lit(100001), Lit(100002)),)))
    assert in_value_rel(Sec(INT, TVar("Z")), z, Lit(100001), Lit(100002))
    assert not in_expr_rel(pub(INT), EMPTY_REL_ENV, parse_term("100001 % 2"),
                           parse_term("100002 % 2"))
    assert not in_expr_rel(pub(INT), EMPTY_REL_ENV, parse_term('length "a"'),
                           parse_term('length "aa"'))


@pytest.mark.parametrize("text, s, expected", [
    ("1 + 1", pub(INT), True),
    ('length "ab" == 2', pub(BOOL), True),
    ("(fun (y: Int) => y) 3", pub(INT), True),
])
def test_closed_programs_reduce_to_the_expression_relation(text, s, expected):
    e = parse_term(text)
    v = check_erni({}, {}, e, s)
    assert isinstance(v, Holds) is expected
    assert in_expr_rel(s, EMPTY_REL_ENV, e, e) is expected


CORPUS = sorted(p.name for p in corpus_path("").iterdir() if p.name.endswith(".fsec"))


@pytest.mark.parametrize("name", CORPUS)
def test_well_typed_corpus_programs_are_self_related(name):
    from exsec.typecheck import TypeCheckError, type_of

    prog = parse(corpus_path(name).read_text())
    e = prog.closed_main()
    try:
        s = type_of(prog.tyvars, prog.inputs, e)
    except TypeCheckError:
        pytest.skip("rejected by the type checker")
    dom = DomainSpec().with_carriers(**prog.carriers).with_literals(e)
    assert isinstance(check_self_related(prog.tyvars, prog.inputs, e, s, dom), Holds)
