"""
Recursive-descent parser for ZKSL.

Grammar (one statement per line, blocks by indentation)::

    program  := 'def' 'verify' '(' 'engine' (',' NAME ':' type)* ')' ':' block
    type     := 'Field' | 'Bool' | 'Vec' '[' type ']'
    block    := NEWLINE INDENT stmt+ DEDENT
    stmt     := 'return' 'engine' | 'engine' '.' 'add' '(' formula ')'
              | 'for' NAME 'in' range ':' block
              | 'if' formula ':' block ['else' ':' block]
              | NAME '=' expr
    range    := 'range' '(' expr [',' expr] ')'
    formula  := conj ('or' conj)*
    conj     := neg ('and' neg)*
    neg      := 'not' neg | ('all' | 'any') '(' formula 'for' NAME 'in' range ')'
              | '(' formula ')' | expr [relop expr]
    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/' | '%' | '//') unary)*
    unary    := '-' unary | power
    power    := postfix ['**' unary]
    postfix  := primary ('[' expr ']')*
    primary  := INT | 'True' | 'False' | NAME | NAME '(' args ')' | '(' expr ')'

"""
from logging import getLogger

from zk_coder.constants import ENGINE
from zk_coder.errors import ParseFailure
from zk_coder.lexer import (
    DEDENT,
    EOF,
    INDENT,
    INT,
    KEYWORD,
    NAME,
    NEWLINE,
    OP,
    tokenize,
)
from zk_coder.syntax import (
    AddConstraint,
    AllQuant,
    And,
    AnyQuant,
    Assign,
    BinOp,
    BoolAtom,
    BoolLit,
    ForLoop,
    GadgetCall,
    GadgetExpr,
    Generator,
    If,
    Index,
    IntLit,
    Neg,
    Not,
    Or,
    Param,
    Paren,
    RangeSpec,
    Relation,
    ReturnEngine,
    SketchProgram,
    Span,
    Var,
    build_span_table,
    parse_type,
)


LOG = getLogger(__name__)

RELOPS = ("==", "!=", "<", "<=", ">", ">=", "xor")
ADDITIVE_OPS = ("+", "-")
MULTIPLICATIVE_OPS = ("*", "/", "%", "//")

# Tokens that continue an expression after a closing parenthesis.
_EXPR_CONTINUATION = ADDITIVE_OPS + MULTIPLICATIVE_OPS + ("**", "[") + RELOPS


class _Parser:

    def __init__(self, tokens):
        self.tokens = tokens
        self.position = 0

    @property
    def current(self):
        return self.tokens[self.position]

    @property
    def previous(self):
        return self.tokens[self.position - 1]

    def fail(self, message, production, token=None):
        token = token or self.current
        raise ParseFailure(message, token.line, token.column, production)

    def check(self, kind, text=None):
        return self.current.is_(kind, text)

    def check_op(self, *texts):
        return self.current.kind in (OP, KEYWORD) and self.current.text in texts

    def accept(self, kind, text=None):
        if self.check(kind, text):
            self.position += 1
            return self.previous
        return None

    def expect(self, kind, text, production):
        token = self.accept(kind, text)
        if token is None:
            self.fail(
                "expected {}, found {}".format(repr(text) if text else kind, self.current),
                production,
            )
        return token

    def span_from(self, start):
        end = self.previous
        return Span(start.line, start.column, end.line, end.end_column)

    # Program and statements

    def program(self):
        start = self.current
        self.expect(KEYWORD, "def", "program")
        name = self.expect(NAME, None, "program")
        if name.text != "verify":
            self.fail("the sketch function must be named 'verify'", "program", name)
        self.expect(OP, "(", "program")
        engine = self.expect(NAME, None, "program")
        if engine.text != ENGINE:
            self.fail("the first parameter must be 'engine'", "program", engine)
        params = []
        while self.accept(OP, ","):
            if self.check(OP, ")"):
                break
            params.append(self.param())
        self.expect(OP, ")", "program")
        self.expect(OP, ":", "program")
        body = self.block("program")
        if not self.check(EOF):
            self.fail("expected end of input after the verify function, found {}".format(self.current), "program")
        return tuple(params), body, self.span_from(start)

    def param(self):
        start = self.current
        name = self.expect(NAME, None, "parameter").text
        self.expect(OP, ":", "parameter")
        return Param(name, self.type_(), self.span_from(start))

    def type_(self):
        parts = []
        depth = 0
        while True:
            token = self.expect(NAME, None, "type")
            parts.append(token.text)
            if token.text == "Vec":
                self.expect(OP, "[", "type")
                parts.append("[")
                depth += 1
                continue
            if token.text not in ("Field", "Bool"):
                self.fail("unknown type {!r}".format(token.text), "type", token)
            break
        for _ in range(depth):
            self.expect(OP, "]", "type")
            parts.append("]")
        return parse_type("".join(parts))

    def block(self, production):
        self.expect(NEWLINE, None, production)
        self.expect(INDENT, None, production)
        statements = [self.statement()]
        while not self.accept(DEDENT):
            if self.check(EOF):
                self.fail("unexpected end of input", production)
            statements.append(self.statement())
        return tuple(statements)

    def statement(self):
        start = self.current
        if self.accept(KEYWORD, "return"):
            engine = self.expect(NAME, None, "return")
            if engine.text != ENGINE:
                self.fail("only 'return engine' is allowed", "return", engine)
            self.expect(NEWLINE, None, "return")
            return ReturnEngine(self.span_from(start))

        if self.accept(KEYWORD, "for"):
            var = self.expect(NAME, None, "for").text
            self.expect(KEYWORD, "in", "for")
            range_spec = self.range_()
            self.expect(OP, ":", "for")
            span = self.span_from(start)
            return ForLoop(var, range_spec, self.block("for"), span)

        if self.accept(KEYWORD, "if"):
            cond = self.formula()
            self.expect(OP, ":", "if")
            span = self.span_from(start)
            then = self.block("if")
            orelse = None
            if self.accept(KEYWORD, "else"):
                self.expect(OP, ":", "else")
                orelse = self.block("else")
            return If(cond, then, orelse, span)

        if self.check(NAME) and self.tokens[self.position + 1].is_(OP, "="):
            target = self.current.text
            self.position += 2
            value = self.expr()
            self.expect(NEWLINE, None, "assignment")
            return Assign(target, value, self.span_from(start))

        if self.check(NAME, ENGINE):
            self.position += 1
            self.expect(OP, ".", "engine.add")
            method = self.expect(NAME, None, "engine.add")
            if method.text != "add":
                self.fail("unknown engine method {!r}".format(method.text), "engine.add", method)
            self.expect(OP, "(", "engine.add")
            formula = self.formula()
            self.expect(OP, ")", "engine.add")
            self.expect(NEWLINE, None, "engine.add")
            return AddConstraint(formula, self.span_from(start))

        self.fail("expected a statement, found {}".format(self.current), "statement")

    def range_(self):
        start = self.current
        self.expect(KEYWORD, "range", "range")
        self.expect(OP, "(", "range")
        first = self.expr()
        second = None
        if self.accept(OP, ","):
            second = self.expr()
        self.expect(OP, ")", "range")
        if second is None:
            return RangeSpec(None, first, self.span_from(start))
        return RangeSpec(first, second, self.span_from(start))

    # Formulas

    def formula(self):
        start = self.current
        node = self.conjunction()
        while self.accept(KEYWORD, "or"):
            node = Or(node, self.conjunction(), self.span_from(start))
        return node

    def conjunction(self):
        start = self.current
        node = self.negation()
        while self.accept(KEYWORD, "and"):
            node = And(node, self.negation(), self.span_from(start))
        return node

    def negation(self):
        start = self.current
        if self.accept(KEYWORD, "not"):
            return Not(self.negation(), self.span_from(start))
        if self.check(KEYWORD, "all") or self.check(KEYWORD, "any"):
            return self.quantifier()
        if self.check(OP, "("):
            nested = self.parenthesized_formula()
            if nested is not None:
                return nested
        return self.atom()

    def parenthesized_formula(self):
        saved = self.position
        try:
            self.expect(OP, "(", "formula")
            node = self.formula()
            self.expect(OP, ")", "formula")
        except ParseFailure:
            self.position = saved
            return None
        if self.check_op(*_EXPR_CONTINUATION):
            self.position = saved
            return None
        return node

    def quantifier(self):
        start = self.current
        keyword = self.current.text
        self.position += 1
        self.expect(OP, "(", keyword)
        body = self.formula()
        self.expect(KEYWORD, "for", keyword)
        var = self.expect(NAME, None, keyword).text
        self.expect(KEYWORD, "in", keyword)
        range_spec = self.range_()
        self.expect(OP, ")", keyword)
        node_type = AllQuant if keyword == "all" else AnyQuant
        return node_type(var, range_spec, body, self.span_from(start))

    def atom(self):
        start = self.current
        lhs = self.expr()
        if self.check_op(*RELOPS):
            op = self.current.text
            self.position += 1
            rhs = self.expr()
            if self.check_op(*RELOPS):
                self.fail("comparisons do not chain", "relation")
            return Relation(op, lhs, rhs, self.span_from(start))
        if isinstance(lhs, GadgetExpr):
            return GadgetCall(lhs.name, lhs.args, lhs.span)
        return BoolAtom(lhs, self.span_from(start))

    # Expressions

    def expr(self):
        start = self.current
        node = self.term()
        while self.check_op(*ADDITIVE_OPS):
            op = self.current.text
            self.position += 1
            node = BinOp(op, node, self.term(), self.span_from(start))
        return node

    def term(self):
        start = self.current
        node = self.unary()
        while self.check_op(*MULTIPLICATIVE_OPS):
            op = self.current.text
            self.position += 1
            node = BinOp(op, node, self.unary(), self.span_from(start))
        return node

    def unary(self):
        start = self.current
        if self.accept(OP, "-"):
            return Neg(self.unary(), self.span_from(start))
        return self.power()

    def power(self):
        start = self.current
        base = self.postfix()
        if self.accept(OP, "**"):
            return BinOp("**", base, self.unary(), self.span_from(start))
        return base

    def postfix(self):
        start = self.current
        node = self.primary()
        while self.accept(OP, "["):
            index = self.expr()
            self.expect(OP, "]", "index")
            node = Index(node, index, self.span_from(start))
        return node

    def primary(self):
        start = self.current
        token = self.current
        if self.accept(INT):
            return IntLit(int(token.text), self.span_from(start))
        if self.accept(KEYWORD, "True"):
            return BoolLit(True, self.span_from(start))
        if self.accept(KEYWORD, "False"):
            return BoolLit(False, self.span_from(start))
        if self.accept(OP, "("):
            inner = self.expr()
            self.expect(OP, ")", "expression")
            return Paren(inner, self.span_from(start))
        if self.accept(NAME):
            if self.accept(OP, "("):
                return GadgetExpr(token.text, self.arguments(), self.span_from(start))
            return Var(token.text, self.span_from(start))
        self.fail("expected an expression, found {}".format(token), "expression")

    def arguments(self):
        if self.accept(OP, ")"):
            return ()
        start = self.current
        first = self.expr()
        if self.accept(KEYWORD, "for"):
            var = self.expect(NAME, None, "generator").text
            self.expect(KEYWORD, "in", "generator")
            range_spec = self.range_()
            generator = Generator(first, var, range_spec, self.span_from(start))
            self.expect(OP, ")", "generator")
            return (generator,)
        args = [first]
        while self.accept(OP, ","):
            if self.check(OP, ")"):
                break
            args.append(self.expr())
        self.expect(OP, ")", "arguments")
        return tuple(args)


def parse_sketch(source):
    """
    Parse ZKSL `source` into a :class:`~zk_coder.syntax.SketchProgram`.

    Parameters
    ----------
    source : str
        A single `def verify(engine, ...)` function in concrete ZKSL syntax.

    Returns
    -------
    program : SketchProgram
        The program AST; every node carries its source span.

    Raises
    ------
    ParseFailure
        With the line, column and grammar production that failed.

    """
    parser = _Parser(tokenize(source))
    params, body, span = parser.program()
    program = SketchProgram(params, body, span=span)
    program.source_span_table.update(build_span_table(program))
    LOG.debug("parse_sketch() - parsed %d parameters and %d statements", len(params), len(body))
    return program

