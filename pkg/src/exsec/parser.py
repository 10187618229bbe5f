"""Lexer and recursive-descent parser for ``.fsec`` programs and witness files.

A program is a sequence of declarations followed by a main expression::

    -- line comment
    type Policy = exists Z. Int!Z * (Int!Z -> pub Bool)   -- type alias
    tyvar X : Int                                          -- abstract type
    input x : pub (Int!X * (Int!X -> pub Bool))            -- free input
    observe pub Bool                                       -- observation type
    carrier Int = 100000, 100001                           -- search carrier
    let gte = fun (y: Int!X) => 100000 <= y                -- definition
    (snd x) (fst x)                                        -- main expression

In a security-type position a bare safety type ``T`` means ``pub T``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .syntax import (
    INT, PRIM_NAMES, TOP, UNIT, App, BinOp, Case, Exists, Fst,
    Fun, IllFormedType, Inl, Inr, Lam, Lit, Open, Pack, Pair, PairE, Prim, Sec,
    Snd, Sum, Table, Term, TVar, Unit, UnOp, Var, check_security_type, fresh,
    free_vars, subst_term, subst_type,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        where = f"{line}:{col}"
        extra = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{where}: {message}{extra}")


KEYWORDS = {
    "fun", "fst", "snd", "inl", "inr", "case", "of", "pack", "as", "open",
    "in", "unit", "true", "false", "length", "pub", "priv", "exists", "table",
    "let", "input", "observe", "tyvar", "type", "carrier",
}
TYPE_NAMES = {"Int", "Bool", "String", "Unit", "Top"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>\d+)
  | (?P<op>->|=>|==|<=|\+\+|:=|\.\.|[-+*%!:,.()<>{}|;=])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'int' | 'string' | 'op' | 'kw' | 'lower' | 'upper' | 'eof'
    text: str
    line: int
    col: int

    @property
    def pos(self) -> tuple[int, int]:
        return (self.line, self.col)


def tokenize(text: str) -> list[Token]:
    tokens = []
    i, line, line_start = 0, 1, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        lexeme = m.group()
        col = i - line_start + 1
        if kind == "ident":
            if lexeme in KEYWORDS:
                kind = "kw"
            elif lexeme[0].isupper():
                kind = "upper"
            else:
                kind = "lower"
        if kind != "ws":
            tokens.append(Token(kind, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            line_start = i + lexeme.rindex("\n") + 1
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


@dataclass
class SourceProgram:
    lets: list[tuple[str, Term]] = field(default_factory=list)
    main: Term | None = None
    inputs: dict[str, Sec] = field(default_factory=dict)
    tyvars: dict[str, object] = field(default_factory=dict)
    observe: Sec | None = None
    carriers: dict[str, tuple] = field(default_factory=dict)
    aliases: dict[str, object] = field(default_factory=dict)

    def closed_main(self) -> Term:
        """The main expression with every ``let`` inlined."""
        return self.inline(self.main)

    def inline(self, e: Term) -> Term:
        for name, body in reversed(self.lets):
            if name in free_vars(e):
                e = subst_term(e, name, body)
        return e


def _as_sec(t) -> Sec:
    return t if isinstance(t, Sec) else Sec(t, t)


_START_EXPR = {"int", "string", "lower"}
_START_EXPR_KW = {"fun", "fst", "snd", "inl", "inr", "case", "pack", "open",
                  "unit", "true", "false", "length", "table"}
_ATOM_KW = {"unit", "true", "false", "table"}
_PREFIX_KW = {"fst", "snd", "length"}
_START_TYPE_KW = {"pub", "priv", "exists"}


class Parser:
    def __init__(self, text: str, aliases: dict | None = None):
        self.tokens = tokenize(text)
        self.i = 0
        self.aliases: dict[str, object] = dict(aliases or {})
        # offside rule: a top-level item ends at the first later line that
        # starts at or left of the item's own column
        self.fence: tuple[int, int] | None = None

    # -- token helpers

    def _fenced(self, t: Token) -> Token:
        f = self.fence
        if f is not None and t.line > f[0] and t.col <= f[1]:
            return Token("eof", "", t.line, t.col)
        return t

    @property
    def tok(self) -> Token:
        return self._fenced(self.tokens[self.i])

    def peek(self, k: int = 1) -> Token:
        return self._fenced(self.tokens[min(self.i + k, len(self.tokens) - 1)])

    def item(self) -> Token:
        """Start a top-level item at the current token."""
        self.fence = None
        t = self.tok
        self.fence = (t.line, t.col)
        return t

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str, expected: tuple[str, ...] = ()) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{message}, found {found}", t.line, t.col, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}", (text,))
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {what}", (what,))
        return self.advance()

    # -- types

    def safety_type(self):
        t = self.raw_type()
        return self.to_safety(t)

    def security_type(self) -> Sec:
        return _as_sec(self.raw_type())

    def to_safety(self, t, tok: Token | None = None):
        if isinstance(t, Sec):
            if t.left == t.right:
                return t.left
            tok = tok or self.tok
            raise ParseError(
                "a faceted type is not allowed where a safety type is expected",
                tok.line, tok.col,
            )
        return t

    def raw_type(self):
        if self.at("exists"):
            start = self.advance()
            names = [self.expect_kind("upper", "type variable").text]
            while self.at(","):
                self.advance()
                names.append(self.expect_kind("upper", "type variable").text)
            self.expect(".")
            body = self.to_safety(self.raw_type(), start)
            for name in reversed(names):
                body = Exists(name, body)
            return body
        return self.arrow_type()

    def arrow_type(self):
        dom = self.sum_type()
        if self.at("->"):
            self.advance()
            cod = self.arrow_type()
            return Fun(_as_sec(dom), _as_sec(cod))
        return dom

    def sum_type(self):
        left = self.prod_type()
        if self.at("+"):
            self.advance()
            return Sum(_as_sec(left), _as_sec(self.sum_type()))
        return left

    def prod_type(self):
        left = self.facet_type()
        if self.at("*"):
            self.advance()
            return Pair(_as_sec(left), _as_sec(self.prod_type()))
        return left

    def facet_type(self):
        if self.at("pub", "priv"):
            kw = self.advance()
            t = self.to_safety(self.atom_type(), kw)
            return Sec(t, t) if kw.text == "pub" else Sec(t, TOP)
        tok = self.tok
        left = self.atom_type()
        if self.at("!"):
            self.advance()
            rtok = self.tok
            right = self.to_safety(self.atom_type(), rtok)
            return Sec(self.to_safety(left, tok), right)
        return left

    def atom_type(self):
        t = self.tok
        if t.kind == "upper":
            self.advance()
            if t.text in PRIM_NAMES:
                return Prim(t.text)
            if t.text == "Unit":
                return UNIT
            if t.text == "Top":
                return TOP
            if t.text in self.aliases:
                return self.aliases[t.text]
            return TVar(t.text)
        if self.at("("):
            self.advance()
            inner = self.raw_type()
            self.expect(")")
            return inner
        raise self.error("expected a type", ("type",))

    def starts_type(self) -> bool:
        t = self.tok
        return t.kind == "upper" or self.at("(", *_START_TYPE_KW)

    # -- terms

    def expr(self) -> Term:
        t = self.tok
        if self.at("fun"):
            self.advance()
            self.expect("(")
            x = self.expect_kind("lower", "variable").text
            self.expect(":")
            s = self.security_type()
            self.expect(")")
            self.expect("=>")
            return Lam(x, s, self.expr(), pos=t.pos)
        if self.at("case"):
            self.advance()
            scrut = self.expr()
            self.expect("of")
            self.expect("inl")
            x1 = self.expect_kind("lower", "variable").text
            self.expect("=>")
            e1 = self.expr()
            self.expect("|")
            self.expect("inr")
            x2 = self.expect_kind("lower", "variable").text
            self.expect("=>")
            e2 = self.expr()
            return Case(scrut, x1, e1, x2, e2, pos=t.pos)
        if self.at("inl", "inr"):
            kw = self.advance()
            payload = self.cmp_expr()
            self.expect(":")
            annot = self.security_type()
            if not isinstance(annot.left, Sum):
                raise ParseError("injection annotation must be a sum type", kw.line, kw.col)
            cls = Inl if kw.text == "inl" else Inr
            return cls(payload, annot, pos=t.pos)
        if self.at("pack"):
            return self.pack_expr()
        if self.at("open"):
            return self.open_expr()
        return self.cmp_expr()

    def pack_expr(self) -> Term:
        t = self.advance()
        self.expect("<")
        witnesses = [self.safety_type()]
        self.expect(",")
        while True:
            save = self.i
            if self.starts_type():
                try:
                    w = self.safety_type()
                    if self.at(","):
                        self.advance()
                        witnesses.append(w)
                        continue
                except ParseError:
                    pass
                self.i = save
            break
        payload = self.expr()
        self.expect(">")
        self.expect("as")
        atok = self.tok
        annot = self.safety_type()
        return self.build_pack(witnesses, payload, annot, atok, t.pos)

    def build_pack(self, witnesses, payload, annot, atok: Token, pos) -> Term:
        # exists X, Y. T is packed as nested single-variable packages
        layers = []
        ty = annot
        for _ in witnesses:
            if not isinstance(ty, Exists):
                raise ParseError(
                    f"pack with {len(witnesses)} witness types needs as many "
                    "existential binders", atok.line, atok.col,
                )
            layers.append(ty)
            ty = ty.body
        subst_layers = []
        for k, layer in enumerate(layers):
            for prev_layer, w in zip(layers[:k], witnesses[:k]):
                layer = subst_type(layer, prev_layer.var, w)
            subst_layers.append(layer)
        # substitute earlier witnesses into inner layers, innermost first
        term = payload
        for layer, w in reversed(list(zip(subst_layers, witnesses))):
            term = Pack(w, term, layer, pos=pos)
        return term

    def open_expr(self) -> Term:
        t = self.advance()
        pkg = self.expr()
        self.expect("as")
        self.expect("<")
        tyvars = [self.expect_kind("upper", "type variable").text]
        self.expect(",")
        while self.tok.kind == "upper":
            tyvars.append(self.advance().text)
            self.expect(",")
        x = self.expect_kind("lower", "variable").text
        self.expect(">")
        self.expect("in")
        body = self.expr()
        if len(tyvars) == 1:
            return Open(tyvars[0], x, pkg, body, pos=t.pos)
        # open e as <X, Y, x> in b  ==  open e as <X, p> in open p as <Y, x> in b
        avoid = free_vars(body) | {x}
        inner_names = []
        for _ in tyvars[1:]:
            inner_names.append(fresh(x, avoid))
            avoid = avoid | {inner_names[-1]}
        term = Open(tyvars[-1], x, Var(inner_names[-1], pos=t.pos), body, pos=t.pos)
        for k in range(len(tyvars) - 2, 0, -1):
            term = Open(tyvars[k], inner_names[k], Var(inner_names[k - 1], pos=t.pos), term, pos=t.pos)
        return Open(tyvars[0], inner_names[0], pkg, term, pos=t.pos)

    def cmp_expr(self) -> Term:
        left = self.add_expr()
        if self.at("==", "<="):
            op = self.advance()
            right = self.add_expr()
            return BinOp(op.text, left, right, pos=op.pos)
        return left

    def add_expr(self) -> Term:
        left = self.mul_expr()
        while self.at("+", "-", "++"):
            op = self.advance()
            left = BinOp(op.text, left, self.mul_expr(), pos=op.pos)
        return left

    def mul_expr(self) -> Term:
        left = self.app_expr()
        while self.at("*", "%"):
            op = self.advance()
            left = BinOp(op.text, left, self.app_expr(), pos=op.pos)
        return left

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind in _START_EXPR or self.at("(", *_ATOM_KW, *_PREFIX_KW)

    def app_expr(self) -> Term:
        if not self.starts_atom():
            raise self.error("expected an expression", ("expression",))
        fn = self.prefix_expr()
        while self.starts_atom():
            arg = self.prefix_expr()
            fn = App(fn, arg, pos=fn.pos)
        return fn

    def prefix_expr(self) -> Term:
        t = self.tok
        if self.at("fst", "snd", "length"):
            self.advance()
            operand = self.prefix_expr()
            if t.text == "fst":
                return Fst(operand, pos=t.pos)
            if t.text == "snd":
                return Snd(operand, pos=t.pos)
            return UnOp("length", operand, pos=t.pos)
        return self.atom_expr()

    def atom_expr(self) -> Term:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Lit(int(t.text), pos=t.pos)
        if t.kind == "string":
            self.advance()
            return Lit(json.loads(t.text), pos=t.pos)
        if t.kind == "lower":
            self.advance()
            return Var(t.text, pos=t.pos)
        if self.at("true", "false"):
            self.advance()
            return Lit(t.text == "true", pos=t.pos)
        if self.at("unit"):
            self.advance()
            return Unit(pos=t.pos)
        if self.at("table"):
            return self.table_expr()
        if self.at("("):
            self.advance()
            if self.at("-") and self.peek().kind == "int":
                self.advance()
                n = int(self.advance().text)
                self.expect(")")
                return Lit(-n, pos=t.pos)
            first = self.expr()
            if self.at(","):
                self.advance()
                second = self.expr()
                self.expect(")")
                return PairE(first, second, pos=t.pos)
            self.expect(")")
            return first
        raise self.error("expected an expression", ("expression",))

    def table_expr(self) -> Term:
        t = self.advance()
        ttok = self.tok
        fty = self.safety_type()
        if not isinstance(fty, Fun):
            raise ParseError("table annotation must be a function type", ttok.line, ttok.col)
        self.expect("{")
        entries = []
        while not self.at("}"):
            k = self.expr()
            self.expect("=>")
            v = self.expr()
            entries.append((k, v))
            if not self.at(";"):
                break
            self.advance()
        self.expect("}")
        return Table(fty.dom, fty.cod, tuple(entries), pos=t.pos)

    # -- programs

    def program(self) -> SourceProgram:
        prog = SourceProgram(aliases=self.aliases)
        names: set[str] = set()
        while True:
            t = self.item()
            if self.at("let"):
                self.advance()
                name = self.expect_kind("lower", "variable").text
                self.check_fresh(name, names, t)
                self.expect("=")
                prog.lets.append((name, self.expr()))
            elif self.at("input"):
                self.advance()
                name = self.expect_kind("lower", "variable").text
                self.check_fresh(name, names, t)
                self.expect(":")
                prog.inputs[name] = self.security_type()
            elif self.at("tyvar"):
                self.advance()
                name = self.expect_kind("upper", "type variable").text
                self.check_fresh(name, names, t)
                self.expect(":")
                prog.tyvars[name] = self.safety_type()
            elif self.at("type"):
                self.advance()
                name = self.expect_kind("upper", "type name").text
                self.check_fresh(name, names, t)
                if name in TYPE_NAMES:
                    raise ParseError(f"cannot redefine {name}", t.line, t.col)
                self.expect("=")
                self.aliases[name] = self.raw_type()
            elif self.at("observe"):
                self.advance()
                if prog.observe is not None:
                    raise ParseError("duplicate observe declaration", t.line, t.col)
                prog.observe = self.security_type()
            elif self.at("carrier"):
                self.advance()
                prog.carriers.update([self.carrier_decl()])
            else:
                break
        if self.tok.kind == "eof":
            raise self.error("expected a main expression", ("expression",))
        prog.main = self.expr()
        self.fence = None
        if self.tok.kind != "eof":
            raise self.error("expected end of input", ("end of input",))
        try:
            for name, s in prog.inputs.items():
                check_security_type(prog.tyvars, s)
            if prog.observe is not None:
                check_security_type(prog.tyvars, prog.observe)
        except IllFormedType as exc:
            raise ParseError(f"ill-formed declaration: {exc}", 1, 1) from None
        return prog

    def check_fresh(self, name: str, names: set[str], t: Token) -> None:
        if name in names:
            raise ParseError(f"duplicate declaration of {name}", t.line, t.col)
        names.add(name)

    def carrier_decl(self) -> tuple[str, tuple]:
        t = self.expect_kind("upper", "primitive type name")
        if t.text not in PRIM_NAMES:
            raise ParseError(f"no carrier for {t.text}", t.line, t.col)
        self.expect("=")
        values: list = []
        while True:
            e = self.atom_expr()
            if not isinstance(e, Lit) or Prim(t.text) != e.prim:
                raise ParseError(f"carrier element must be a {t.text} literal", t.line, t.col)
            if self.at("..") and t.text == "Int":
                self.advance()
                hi = self.atom_expr()
                if not isinstance(hi, Lit) or hi.prim != INT:
                    raise ParseError("range bound must be an integer", t.line, t.col)
                values.extend(range(e.value, hi.value + 1))
            else:
                values.append(e.value)
            if not self.at(","):
                break
            self.advance()
        return t.text, tuple(dict.fromkeys(values))


def parse(text: str) -> SourceProgram:
    return Parser(text).program()


def parse_term(text: str, aliases: dict | None = None) -> Term:
    p = Parser(text, aliases)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error("expected end of input", ("end of input",))
    return e


def parse_type(text: str, aliases: dict | None = None) -> Sec:
    """Parse a security type (a bare safety type means its public version)."""
    p = Parser(text, aliases)
    s = p.security_type()
    if p.tok.kind != "eof":
        raise p.error("expected end of input", ("end of input",))
    return s


def parse_safety_type(text: str, aliases: dict | None = None):
    p = Parser(text, aliases)
    t = p.safety_type()
    if p.tok.kind != "eof":
        raise p.error("expected end of input", ("end of input",))
    return t


# --------------------------------------------------------------------------
# witness files


@dataclass
class Witness:
    """A relational interpretation and a pair of input substitutions.

    ``rho`` maps a type variable to ``(T1, T2, pairs)`` (pairs in file order); ``subst`` maps an
    input variable to its two values.
    """

    rho: dict[str, tuple[object, object, tuple]] = field(default_factory=dict)
    subst: dict[str, tuple[Term, Term]] = field(default_factory=dict)


def parse_witness(text: str, program: SourceProgram | None = None) -> Witness:
    """Parse ``X := (T1, T2) { (v, v); ... }`` and ``x := v | v`` lines.

    Values may mention the program's ``let`` definitions and type aliases.
    """
    p = Parser(text, program.aliases if program else None)
    w = Witness()
    inline = program.inline if program else (lambda e: e)
    while True:
        p.fence = None
        if p.tok.kind == "eof":
            break
        t = p.item()
        if t.kind == "upper":
            p.advance()
            p.expect(":=")
            p.expect("(")
            t1 = p.safety_type()
            p.expect(",")
            t2 = p.safety_type()
            p.expect(")")
            p.expect("{")
            pairs = []
            while not p.at("}"):
                e = inline(p.expr())
                if not isinstance(e, PairE):
                    raise ParseError("relation entries are pairs (v1, v2)", t.line, t.col)
                pairs.append((e.fst, e.snd))
                if not p.at(";"):
                    break
                p.advance()
            p.expect("}")
            if t.text in w.rho:
                raise ParseError(f"duplicate entry for {t.text}", t.line, t.col)
            w.rho[t.text] = (t1, t2, tuple(pairs))
        elif t.kind == "lower":
            p.advance()
            p.expect(":=")
            v1 = inline(p.expr())
            p.expect("|")
            v2 = inline(p.expr())
            if t.text in w.subst:
                raise ParseError(f"duplicate entry for {t.text}", t.line, t.col)
            w.subst[t.text] = (v1, v2)
        else:
            raise p.error("expected a witness entry", ("type variable", "variable"))
    return w
