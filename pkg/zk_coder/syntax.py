"""
Abstract syntax of the ZK Sketch Language (ZKSL).

Every node is an immutable dataclass. Source spans are carried on the nodes but
excluded from equality, so two ASTs compare equal iff they are structurally
identical.

"""
import re
from dataclasses import (
    dataclass,
    field,
    fields,
    is_dataclass,
)
from typing import (
    Dict,
    Iterator,
    Optional,
    Tuple,
    Union,
)

from zk_coder.constants import BOOL, FIELD, VEC


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_line: int
    end_column: int

    def __str__(self):
        return "line {}, column {}".format(self.line, self.column)

    def sort_key(self):
        return (self.line, self.column, self.end_line, self.end_column)


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SketchType:
    kind: str
    inner: Optional["SketchType"] = None

    def __str__(self):
        if self.kind == VEC:
            return "Vec[{}]".format(self.inner)
        return self.kind

    @property
    def is_vec(self):
        return self.kind == VEC

    def depth(self):
        """Number of Vec levels wrapping the scalar element type."""
        return 1 + self.inner.depth() if self.is_vec else 0

    def element(self):
        """Scalar type at the bottom of any Vec nesting."""
        return self.inner.element() if self.is_vec else self


FIELD_TYPE = SketchType(FIELD)
BOOL_TYPE = SketchType(BOOL)


def vec_of(inner):
    return SketchType(VEC, inner)


_TYPE_TOKEN = re.compile(r"\s*(Field|Bool|Vec|\[|\])")


def parse_type(text):
    """Parse a type annotation such as ``Vec[Vec[Field]]``."""
    tokens = []
    position = 0
    text = text.strip()
    while position < len(text):
        match = _TYPE_TOKEN.match(text, position)
        if not match:
            raise ValueError("invalid sketch type: {!r}".format(text))
        tokens.append(match.group(1))
        position = match.end()

    def build(index):
        if index >= len(tokens):
            raise ValueError("invalid sketch type: {!r}".format(text))
        token = tokens[index]
        if token == FIELD:
            return FIELD_TYPE, index + 1
        if token == BOOL:
            return BOOL_TYPE, index + 1
        if token == VEC and index + 1 < len(tokens) and tokens[index + 1] == "[":
            inner, index = build(index + 2)
            if index >= len(tokens) or tokens[index] != "]":
                raise ValueError("invalid sketch type: {!r}".format(text))
            return vec_of(inner), index + 1
        raise ValueError("invalid sketch type: {!r}".format(text))

    result, end = build(0)
    if end != len(tokens):
        raise ValueError("invalid sketch type: {!r}".format(text))
    return result


# Expressions

@dataclass(frozen=True)
class IntLit:
    value: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Paren:
    expr: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Index:
    base: "Expr"
    index: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class GadgetExpr:
    name: str
    args: Tuple["Expr", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RangeSpec:
    lo: Optional["Expr"]
    hi: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Generator:
    """``element for var in range(...)``, only valid as the sole argument of a variadic gadget."""
    element: "Expr"
    var: str
    range: RangeSpec
    span: Optional[Span] = _span()


Expr = Union[IntLit, BoolLit, Var, Paren, BinOp, Neg, Index, GadgetExpr, Generator]


# Formulas

@dataclass(frozen=True)
class Relation:
    op: str
    lhs: Expr
    rhs: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class GadgetCall:
    name: str
    args: Tuple[Expr, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolAtom:
    expr: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Not:
    operand: "Formula"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class AllQuant:
    var: str
    range: RangeSpec
    body: "Formula"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class AnyQuant:
    var: str
    range: RangeSpec
    body: "Formula"
    span: Optional[Span] = _span()


Atom = Union[Relation, GadgetCall, BoolAtom]
Formula = Union[Relation, GadgetCall, BoolAtom, Not, And, Or, AllQuant, AnyQuant]


# Statements

@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class AddConstraint:
    formula: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ForLoop:
    var: str
    range: RangeSpec
    body: Tuple["Stmt", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class If:
    cond: Formula
    then: Tuple["Stmt", ...]
    orelse: Optional[Tuple["Stmt", ...]] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ReturnEngine:
    span: Optional[Span] = _span()


Stmt = Union[Assign, AddConstraint, ForLoop, If, ReturnEngine]


@dataclass(frozen=True)
class Param:
    name: str
    type: SketchType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SketchProgram:
    """A `verify(engine, ...)` function. `params` excludes the engine handle."""
    params: Tuple[Param, ...]
    body: Tuple[Stmt, ...]
    source_span_table: Dict[int, Span] = field(default_factory=dict, compare=False, repr=False)
    span: Optional[Span] = _span()

    def param_types(self):
        return {param.name: param.type for param in self.params}


EXPR_NODES = (IntLit, BoolLit, Var, Paren, BinOp, Neg, Index, GadgetExpr, Generator)
ATOM_NODES = (Relation, GadgetCall, BoolAtom)
FORMULA_NODES = ATOM_NODES + (Not, And, Or, AllQuant, AnyQuant)
STMT_NODES = (Assign, AddConstraint, ForLoop, If, ReturnEngine)


def children(node):
    """Child nodes of `node` in source order."""
    for f in fields(node):
        if f.name in ("span", "source_span_table"):
            continue
        value = getattr(node, f.name)
        if isinstance(value, tuple):
            for item in value:
                if is_dataclass(item) and not isinstance(item, (SketchType, Span)):
                    yield item
        elif is_dataclass(value) and not isinstance(value, (SketchType, Span)):
            yield value


def walk(node) -> Iterator[object]:
    """Pre-order traversal of `node` and all of its descendants."""
    yield node
    for child in children(node):
        yield from walk(child)


def build_span_table(program):
    return {
        id(node): node.span
        for node in walk(program)
        if node.span is not None
    }


def strip_paren(expr):
    while isinstance(expr, Paren):
        expr = expr.expr
    return expr


def is_literal_only(node):
    """True iff every leaf below `node` is a literal (the constant-folding criterion)."""
    if isinstance(node, (IntLit, BoolLit)):
        return True
    if isinstance(node, (Var, Generator, AllQuant, AnyQuant)):
        return False
    kids = list(children(node))
    return bool(kids) and all(is_literal_only(kid) for kid in kids)
