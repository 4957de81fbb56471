"""
Constraint extraction.

Walks a well-formed sketch, collects the operators and gadgets of every
constraint added through `engine.add` and emits them as an ordered, typed set
of :class:`ConstraintPrimitive` records: the retrieval keys into the gadget
knowledge base.

"""
from collections import ChainMap
from dataclasses import dataclass, field
from logging import getLogger
from typing import Optional, Tuple, Union

from zk_coder.catalog import canonical_name, resolve, rows_named
from zk_coder.checker import check_sketch, flatten_chain
from zk_coder.constants import BOOL, FIELD, VARIADIC
from zk_coder.errors import ExtractError, UnknownOperator
from zk_coder.interp import ConstraintCounter
from zk_coder.syntax import (
    AddConstraint,
    AllQuant,
    And,
    AnyQuant,
    Assign,
    BinOp,
    BoolAtom,
    ForLoop,
    GadgetCall,
    GadgetExpr,
    Generator,
    If,
    Index,
    Neg,
    Not,
    Or,
    Paren,
    Relation,
    Span,
    Var,
    is_literal_only,
    walk,
)


LOG = getLogger(__name__)


@dataclass(frozen=True)
class ConstraintPrimitive:
    """
    A canonical constraint operator with its operand types and arity.

    `first_occurrence` is informational and excluded from equality.

    """
    canonical_name: str
    operand_types: Tuple[str, ...]
    arity: Union[int, str]
    occurrence_index: int = 0
    first_occurrence: Optional[Span] = field(default=None, compare=False)

    @property
    def key(self):
        return (self.canonical_name, self.operand_types, self.arity)

    @property
    def is_variadic(self):
        return self.arity == VARIADIC

    def signature(self):
        if self.is_variadic:
            return "{}*({},…)".format(self.canonical_name, self.operand_types[0])
        return "{}({})".format(self.canonical_name, ",".join(self.operand_types))

    def display(self):
        """Serialized form ``Name(T,…)#i`` used on the command line and in transcripts."""
        return "{}#{}".format(self.signature(), self.occurrence_index)


def canonicalize(op_surface, operand_types, arity):
    """
    Canonical catalog name of a grammar operator or gadget identifier.

    Parameters
    ----------
    op_surface : str
        Relational or arithmetic operator token, connective keyword or gadget
        identifier (canonical name or alias).
    operand_types : sequence of str
        Operand types, ``"Field"`` or ``"Bool"``.
    arity : int or "variadic"

    Raises
    ------
    UnknownOperator
        If the surface form is outside the grammar and catalog, or no catalog
        row types it with the given operands.

    Examples
    --------
    >>> canonicalize(">=", ("Field", "Field"), 2)
    'GreaterThanOrEqual'

    """
    operand_types = tuple(operand_types)
    name = canonical_name(op_surface)
    if name is None:
        raise UnknownOperator(op_surface, operand_types, arity)
    if op_surface in ("==", "!=") and operand_types == (BOOL, BOOL):
        operand_types = (FIELD, FIELD)
    if arity == VARIADIC:
        matches = [
            row for row in rows_named(name)
            if row.is_variadic and operand_types and row.accepts(operand_types)
        ]
    else:
        row = resolve(name, operand_types) if len(operand_types) == arity else None
        matches = [row] if row is not None else []
    if not matches:
        raise UnknownOperator(op_surface, operand_types, arity)
    return name


def _names(node):
    return {item.name for item in walk(node) if isinstance(item, Var)}


def _emits(statements):
    return any(isinstance(node, AddConstraint) for statement in statements for node in walk(statement))


class _Extractor:

    def __init__(self, report):
        self.rows = report.rows
        self.primitives = []
        self.seen = set()
        self.compile_time = [set()]
        self.live = set()

    def emit(self, node):
        row = self.rows.get(id(node))
        if row is None:
            raise ExtractError("no catalog row for {!r}".format(node))
        if row.key in self.seen:
            return
        self.seen.add(row.key)
        self.primitives.append(ConstraintPrimitive(
            row.name,
            row.operands,
            row.arity,
            len(self.primitives),
            node.span,
        ))

    def is_compile_time(self, node):
        known = set().union(*self.compile_time)
        return all(name in known for name in _names(node)) and not any(
            isinstance(item, (GadgetExpr, Index)) for item in walk(node)
        )

    def bind(self, names):
        self.compile_time.append(set(names))

    def unbind(self):
        self.compile_time.pop()

    def program(self, program):
        self.live = self.live_names(program)
        self.block(program.body)

    def live_names(self, program):
        constraints = set()
        assignments = []
        for node in walk(program):
            if isinstance(node, AddConstraint):
                constraints |= _names(node.formula)
            elif isinstance(node, If) and (_emits(node.then) or _emits(node.orelse or ())):
                constraints |= _names(node.cond)
            elif isinstance(node, Assign):
                assignments.append(node)
        live = set(constraints)
        changed = True
        while changed:
            changed = False
            for node in assignments:
                if node.target in live:
                    added = _names(node.value) - live
                    if added:
                        live |= added
                        changed = True
        return live

    def block(self, statements):
        self.bind(())
        for statement in statements:
            self.statement(statement)
        self.unbind()

    def statement(self, node):
        if isinstance(node, Assign):
            if self.is_compile_time(node.value):
                self.compile_time[-1].add(node.target)
            elif node.target in self.live:
                self.expr(node.value)
        elif isinstance(node, AddConstraint):
            self.formula(node.formula)
        elif isinstance(node, ForLoop):
            self.bind((node.var,))
            self.block(node.body)
            self.unbind()
        elif isinstance(node, If):
            # Guards over loop variables and constants select a branch at compile time.
            if (_emits(node.then) or _emits(node.orelse or ())) and not self.is_compile_time(node.cond):
                self.formula(node.cond)
            self.block(node.then)
            if node.orelse is not None:
                self.block(node.orelse)

    def formula(self, node):
        if isinstance(node, (Relation, GadgetCall, BoolAtom, Not, And, Or)) and is_literal_only(node):
            return
        if isinstance(node, Relation):
            self.emit(node)
            self.expr(node.lhs)
            self.expr(node.rhs)
        elif isinstance(node, GadgetCall):
            self.emit(node)
            self.args(node.args)
        elif isinstance(node, BoolAtom):
            self.expr(node.expr)
        elif isinstance(node, Not):
            self.emit(node)
            self.formula(node.operand)
        elif isinstance(node, (And, Or)):
            self.emit(node)
            for leaf in flatten_chain(node):
                self.formula(leaf)
        elif isinstance(node, (AllQuant, AnyQuant)):
            self.emit(node)
            self.bind((node.var,))
            self.formula(node.body)
            self.unbind()

    def args(self, args):
        for arg in args:
            if isinstance(arg, Generator):
                self.bind((arg.var,))
                self.expr(arg.element)
                self.unbind()
            else:
                self.expr(arg)

    def expr(self, node):
        if isinstance(node, Paren):
            self.expr(node.expr)
        elif isinstance(node, BinOp):
            self.emit(node)
            self.expr(node.lhs)
            self.expr(node.rhs)
        elif isinstance(node, Neg):
            self.emit(node)
            self.expr(node.operand)
        elif isinstance(node, Index):
            self.expr(node.base)
            # Indices over loop variables and constants are resolved at compile time.
            if not self.is_compile_time(node.index):
                self.expr(node.index)
        elif isinstance(node, GadgetExpr):
            self.emit(node)
            self.args(node.args)


def extract(program):
    """
    Ordered, typed set of constraint primitives of a well-formed sketch.

    One primitive per distinct (canonical name, operand types, arity) triple,
    in order of first occurrence in a pre-order walk. Loops are scanned once;
    constant-foldable atoms, range bounds, guards over loop variables and
    constants, and guards of conditionals that emit no constraints contribute
    nothing.

    Raises
    ------
    ValueError
        If the sketch is not well-formed.
    ExtractError
        If an operator has no catalog row.

    """
    report = check_sketch(program)
    if not report.is_empty:
        raise ValueError("cannot extract from a sketch with {} check violation(s)".format(len(report)))
    extractor = _Extractor(report)
    extractor.program(program)
    LOG.debug("extract() - %d primitive(s)", len(extractor.primitives))
    return extractor.primitives


def count_constraints(program):
    """
    Number of `engine.add` executions with every loop unrolled.

    Conditionals whose guard is a compile-time constant are resolved; for any
    other conditional both branches are counted.

    """
    return ConstraintCounter().block(program.body, ChainMap())
