"""
Well-formedness checker for ZKSL sketches.

Checks syntactic validity beyond the grammar, type and arity consistency of
every operator and gadget call against the catalog, and closure (every free
identifier is a parameter, an enclosing loop variable or an earlier
assignment). Violations are returned as data in a :class:`CheckReport`.

"""
from dataclasses import dataclass, field
from logging import getLogger
from typing import Dict, Optional, Tuple

from zk_coder.catalog import (
    SURFACE_OPERATORS,
    gadget_name,
    resolve,
    rows_named,
)
from zk_coder.constants import (
    ARITY_MISMATCH,
    BOOL,
    ENGINE,
    FIELD,
    SHADOWED_NAME,
    STATEMENT_AFTER_RETURN,
    TYPE_MISMATCH,
    UNBOUND_VARIABLE,
    UNBOUNDED_LOOP,
    UNKNOWN_GADGET,
)
from zk_coder.syntax import (
    BOOL_TYPE,
    FIELD_TYPE,
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
    Paren,
    Relation,
    ReturnEngine,
    Span,
    Var,
    vec_of,
)


LOG = getLogger(__name__)

REMEDY_HINTS = {
    TYPE_MISMATCH: "use Field operands for arithmetic and comparisons and Bool operands for connectives",
    ARITY_MISMATCH: "pass exactly the arguments the gadget signature lists",
    UNKNOWN_GADGET: "use a catalog gadget such as Distinct, Conditional, Absolute or Sum, or a built-in operator",
    UNBOUND_VARIABLE: "declare it as a parameter or bind it with an assignment or loop before its first use",
    UNBOUNDED_LOOP: "build range bounds only from integer literals, loop variables and constants",
    STATEMENT_AFTER_RETURN: "make 'return engine' the last statement of verify",
    SHADOWED_NAME: "pick a fresh name; names are bound once and never shadow parameters or loop variables",
}

_ORDERING_OPS = ("<", "<=", ">", ">=")
_EQUALITY_OPS = ("==", "!=")


@dataclass(frozen=True)
class Violation:
    category: str
    message: str
    span: Optional[Span] = None

    def location(self):
        return str(self.span) if self.span is not None else "unknown location"

    def sort_key(self):
        return self.span.sort_key() if self.span is not None else (0, 0, 0, 0)


@dataclass(frozen=True)
class CheckReport:
    """
    Outcome of :func:`check_sketch`.

    Attributes
    ----------
    violations : tuple of Violation
        Ordered by source position; empty iff the sketch is well-formed.
    types : dict
        Inferred :class:`~zk_coder.syntax.SketchType` of every expression and
        formula node, keyed by ``id(node)``.
    rows : dict
        Catalog row each operator, gadget call and connective chain resolved
        to, keyed by ``id(node)``.

    """
    violations: Tuple[Violation, ...]
    types: Dict[int, object] = field(default_factory=dict, compare=False, repr=False)
    rows: Dict[int, object] = field(default_factory=dict, compare=False, repr=False)

    @property
    def is_empty(self):
        return not self.violations

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def categories(self):
        return {violation.category for violation in self.violations}


@dataclass
class _Binding:
    type: object
    constant: bool


def flatten_chain(formula):
    """Leaves of a maximal chain of `And` (or `Or`) nodes rooted at `formula`, left to right."""
    chain_type = type(formula)
    leaves = []
    stack = [formula]
    while stack:
        node = stack.pop()
        if type(node) is chain_type:
            stack.append(node.rhs)
            stack.append(node.lhs)
        else:
            leaves.append(node)
    return leaves


class _Checker:

    def __init__(self):
        self.violations = []
        self.types = {}
        self.rows = {}
        self.scopes = []

    def report(self, category, message, node):
        self.violations.append(Violation(category, message, getattr(node, "span", None)))

    # Scopes

    def push(self):
        self.scopes.append({})

    def pop(self):
        self.scopes.pop()

    def lookup(self, name):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def bind(self, name, type_, constant, node):
        if name == ENGINE:
            self.report(SHADOWED_NAME, "'{}' is reserved for the constraint engine".format(name), node)
            return
        if name in self.scopes[-1]:
            self.report(SHADOWED_NAME, "'{}' is already bound in this block".format(name), node)
            return
        if self.lookup(name) is not None:
            self.report(SHADOWED_NAME, "'{}' shadows an enclosing binding".format(name), node)
            return
        self.scopes[-1][name] = _Binding(type_, constant)

    # Statements

    def program(self, program):
        self.push()
        for param in program.params:
            self.bind(param.name, param.type, False, param)
        body = program.body
        for position, statement in enumerate(body):
            if isinstance(statement, ReturnEngine) and position + 1 < len(body):
                self.report(
                    STATEMENT_AFTER_RETURN,
                    "statement follows 'return engine'",
                    body[position + 1],
                )
                body = body[:position + 1]
                break
        self.block(body, top_level=True)
        self.pop()

    def block(self, statements, top_level=False):
        for statement in statements:
            self.statement(statement, top_level)

    def statement(self, node, top_level):
        if isinstance(node, Assign):
            value_type = self.expr(node.value)
            self.bind(node.target, value_type, self.is_constant(node.value), node)
        elif isinstance(node, AddConstraint):
            self.formula(node.formula)
        elif isinstance(node, ForLoop):
            self.range_(node.range)
            self.push()
            self.bind(node.var, FIELD_TYPE, True, node)
            self.block(node.body)
            self.pop()
        elif isinstance(node, If):
            self.formula(node.cond)
            self.push()
            self.block(node.then)
            self.pop()
            if node.orelse is not None:
                self.push()
                self.block(node.orelse)
                self.pop()
        elif isinstance(node, ReturnEngine):
            if not top_level:
                self.report(STATEMENT_AFTER_RETURN, "'return engine' inside a nested block", node)

    def range_(self, range_spec):
        for bound in (range_spec.lo, range_spec.hi):
            if bound is None:
                continue
            bound_type = self.expr(bound)
            if bound_type is not None and bound_type != FIELD_TYPE:
                self.report(TYPE_MISMATCH, "range bounds must be Field, got {}".format(bound_type), bound)
            if not self.is_constant(bound):
                self.report(UNBOUNDED_LOOP, "range bound is not a compile-time constant", bound)

    def is_constant(self, node):
        if isinstance(node, (IntLit, BoolLit)):
            return True
        if isinstance(node, Var):
            binding = self.lookup(node.name)
            # Unbound names are already reported as such.
            return binding is None or binding.constant
        if isinstance(node, Paren):
            return self.is_constant(node.expr)
        if isinstance(node, Neg):
            return self.is_constant(node.operand)
        if isinstance(node, BinOp):
            return self.is_constant(node.lhs) and self.is_constant(node.rhs)
        return False

    # Expressions

    def expr(self, node):
        result = self._expr(node)
        if result is not None:
            self.types[id(node)] = result
        return result

    def _expr(self, node):
        if isinstance(node, IntLit):
            return FIELD_TYPE
        if isinstance(node, BoolLit):
            return BOOL_TYPE
        if isinstance(node, Var):
            if node.name == ENGINE:
                self.report(UNBOUND_VARIABLE, "'engine' cannot be used as a value", node)
                return None
            binding = self.lookup(node.name)
            if binding is None:
                self.report(UNBOUND_VARIABLE, "'{}' is not bound".format(node.name), node)
                return None
            return binding.type
        if isinstance(node, Paren):
            return self.expr(node.expr)
        if isinstance(node, BinOp):
            self.field_operands(node.op, (node.lhs, node.rhs), node)
            self.rows[id(node)] = resolve(SURFACE_OPERATORS[node.op], (FIELD, FIELD))
            return FIELD_TYPE
        if isinstance(node, Neg):
            self.field_operands("-", (node.operand,), node)
            self.rows[id(node)] = resolve(SURFACE_OPERATORS["neg"], (FIELD,))
            return FIELD_TYPE
        if isinstance(node, Index):
            base_type = self.expr(node.base)
            index_type = self.expr(node.index)
            if index_type is not None and index_type != FIELD_TYPE:
                self.report(TYPE_MISMATCH, "index must be Field, got {}".format(index_type), node.index)
            if base_type is None:
                return None
            if not base_type.is_vec:
                self.report(TYPE_MISMATCH, "cannot index a value of type {}".format(base_type), node)
                return None
            return base_type.inner
        if isinstance(node, GadgetExpr):
            return self.gadget(node.name, node.args, node)
        if isinstance(node, Generator):
            self.report(ARITY_MISMATCH, "a generator is only allowed as the sole argument of a variadic gadget", node)
            return None
        raise TypeError("not an expression node: {!r}".format(node))

    def field_operands(self, op, operands, node):
        for operand in operands:
            operand_type = self.expr(operand)
            if operand_type is not None and operand_type != FIELD_TYPE:
                self.report(
                    TYPE_MISMATCH,
                    "operator '{}' expects Field operands, got {}".format(op, operand_type),
                    node,
                )

    def generator(self, node):
        self.range_(node.range)
        self.push()
        self.bind(node.var, FIELD_TYPE, True, node)
        element_type = self.expr(node.element)
        self.pop()
        if element_type is not None:
            self.types[id(node)] = vec_of(element_type)
        return element_type

    def gadget(self, identifier, args, node):
        name = gadget_name(identifier)
        if name is None:
            self.report(UNKNOWN_GADGET, "unknown gadget '{}'".format(identifier), node)
            for arg in args:
                if isinstance(arg, Generator):
                    self.generator(arg)
                else:
                    self.expr(arg)
            return None

        candidates = rows_named(name)
        variadic = [row for row in candidates if row.is_variadic]

        if len(args) == 1 and isinstance(args[0], Generator):
            element_type = self.generator(args[0])
            if not variadic:
                self.report(ARITY_MISMATCH, "'{}' does not take a generator argument".format(identifier), node)
                return None
            return self.collection(identifier, variadic, element_type, node)

        arg_types = [self.expr(arg) for arg in args]
        if any(isinstance(arg, Generator) for arg in args):
            return None
        if len(arg_types) == 1 and arg_types[0] is not None and arg_types[0].is_vec and variadic:
            return self.collection(identifier, variadic, arg_types[0].inner, node)
        if any(arg_type is None for arg_type in arg_types):
            return self.fallback_result(candidates, len(args))
        for arg, arg_type in zip(args, arg_types):
            if arg_type.is_vec:
                self.report(TYPE_MISMATCH, "gadget arguments must be scalars, got {}".format(arg_type), arg)
                return self.fallback_result(candidates, len(args))

        kinds = tuple(arg_type.kind for arg_type in arg_types)
        row = resolve(name, kinds)
        if row is None:
            if kinds and any(candidate.accepts_arity(len(kinds)) for candidate in candidates):
                self.report(
                    TYPE_MISMATCH,
                    "'{}' is not defined for operands ({})".format(identifier, ", ".join(kinds)),
                    node,
                )
            else:
                self.report(
                    ARITY_MISMATCH,
                    "'{}' does not take {} argument(s)".format(identifier, len(kinds)),
                    node,
                )
            return self.fallback_result(candidates, len(args))
        self.rows[id(node)] = row
        return BOOL_TYPE if row.result == BOOL else FIELD_TYPE

    def collection(self, identifier, variadic, element_type, node):
        if element_type is None:
            return None
        row = next((row for row in variadic if row.operands[0] == element_type.kind), None)
        if row is None or element_type.is_vec:
            self.report(
                TYPE_MISMATCH,
                "'{}' is not defined over elements of type {}".format(identifier, element_type),
                node,
            )
            return None
        self.rows[id(node)] = row
        return BOOL_TYPE if row.result == BOOL else FIELD_TYPE

    @staticmethod
    def fallback_result(candidates, arity):
        results = {row.result for row in candidates if row.accepts_arity(arity)}
        if len(results) == 1:
            return BOOL_TYPE if results.pop() == BOOL else FIELD_TYPE
        return None

    # Formulas

    def formula(self, node):
        result = self._formula(node)
        if result is not None:
            self.types[id(node)] = result
        return result

    def _formula(self, node):
        if isinstance(node, Relation):
            return self.relation(node)
        if isinstance(node, GadgetCall):
            return self.scalar_atom(self.gadget(node.name, node.args, node), node)
        if isinstance(node, BoolAtom):
            return self.scalar_atom(self.expr(node.expr), node)
        if isinstance(node, Not):
            operand = self.formula(node.operand)
            if operand == FIELD_TYPE:
                self.report(TYPE_MISMATCH, "'not' expects a Bool formula, got Field", node)
            self.rows[id(node)] = resolve("Not", (BOOL,))
            return BOOL_TYPE
        if isinstance(node, (And, Or)):
            return self.chain(node)
        if isinstance(node, (AllQuant, AnyQuant)):
            self.range_(node.range)
            self.push()
            self.bind(node.var, FIELD_TYPE, True, node)
            self.formula(node.body)
            self.pop()
            self.rows[id(node)] = resolve("And" if isinstance(node, AllQuant) else "Or", (BOOL, BOOL, BOOL))
            return BOOL_TYPE
        raise TypeError("not a formula node: {!r}".format(node))

    def scalar_atom(self, atom_type, node):
        if atom_type is not None and atom_type.is_vec:
            self.report(TYPE_MISMATCH, "a value of type {} is not a formula".format(atom_type), node)
            return None
        return atom_type

    def relation(self, node):
        lhs = self.expr(node.lhs)
        rhs = self.expr(node.rhs)
        if lhs is None or rhs is None:
            return BOOL_TYPE
        if lhs.is_vec or rhs.is_vec:
            self.report(TYPE_MISMATCH, "cannot compare values of type {} and {}".format(lhs, rhs), node)
            return BOOL_TYPE
        if node.op in _ORDERING_OPS and (lhs != FIELD_TYPE or rhs != FIELD_TYPE):
            self.report(TYPE_MISMATCH, "'{}' expects Field operands, got {} and {}".format(node.op, lhs, rhs), node)
            return BOOL_TYPE
        if lhs != rhs:
            self.report(TYPE_MISMATCH, "'{}' has mixed operands {} and {}".format(node.op, lhs, rhs), node)
            return BOOL_TYPE
        name = SURFACE_OPERATORS[node.op]
        if node.op in _EQUALITY_OPS:
            # Booleans compare as the field elements 0 and 1.
            row = resolve(name, (FIELD, FIELD))
        else:
            row = resolve(name, (lhs.kind, rhs.kind))
        self.rows[id(node)] = row
        return BOOL_TYPE if row.result == BOOL else FIELD_TYPE

    def chain(self, node):
        leaves = flatten_chain(node)
        kinds = [self.formula(leaf) for leaf in leaves]
        known = {kind for kind in kinds if kind is not None}
        if len(known) > 1:
            self.report(TYPE_MISMATCH, "'{}' mixes Bool and Field operands".format(type(node).__name__.lower()), node)
            return None
        kind = known.pop() if known else BOOL_TYPE
        row = resolve(type(node).__name__, (kind.kind,) * len(leaves))
        self.rows[id(node)] = row
        return BOOL_TYPE if row.result == BOOL else FIELD_TYPE


def check_sketch(program):
    """
    Check a parsed sketch for well-formedness.

    Parameters
    ----------
    program : SketchProgram

    Returns
    -------
    report : CheckReport
        Violations in source order, plus the inferred types and catalog rows
        of all nodes.

    """
    checker = _Checker()
    checker.program(program)
    violations = tuple(sorted(checker.violations, key=Violation.sort_key))
    LOG.debug("check_sketch() - %d violation(s)", len(violations))
    return CheckReport(violations, checker.types, checker.rows)


def render_check_feedback(report):
    """
    Render a non-empty check report as numbered feedback lines for the LLM.

    Raises
    ------
    ValueError
        If the report is empty.

    """
    if report.is_empty:
        raise ValueError("render_check_feedback() requires a report with at least one violation")
    lines = []
    for number, violation in enumerate(report.violations, start=1):
        lines.append("{}. [{}] {}: {}. Fix: {}.".format(
            number,
            violation.category,
            violation.location(),
            violation.message,
            REMEDY_HINTS[violation.category],
        ))
    return "\n".join(lines) + "\n"
