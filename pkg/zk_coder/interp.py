"""
Reference interpreter ("oracle") for ZKSL sketches.

Evaluates a well-formed sketch on a concrete assignment of its parameters and
accepts iff every constraint passed to `engine.add` holds. Formulas are
evaluated eagerly, so every constraint is checked and evaluation errors are
never masked by short-circuiting.

"""
from collections import ChainMap
from dataclasses import dataclass, field
from functools import reduce
from logging import getLogger
from typing import (
    Any,
    Mapping,
    Optional,
    Tuple,
)

from zk_coder.arith import FieldArith, IntegerArith
from zk_coder.catalog import (
    SURFACE_OPERATORS,
    gadget_name,
    resolve,
    rows_named,
)
from zk_coder.checker import check_sketch, flatten_chain
from zk_coder.constants import (
    BN254_PRIME,
    BOOL,
    DEFAULT_MAX_LOOP_ITERATIONS,
    FIELD,
    FIELD_MODE,
    INDEX_OUT_OF_BOUNDS,
    INTEGER_MODE,
    LOOP_GUARD_EXCEEDED,
    VALID_EVAL_MODE,
)
from zk_coder.errors import AssignmentError, EvalError, ExtractError
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
    Paren,
    Relation,
    ReturnEngine,
    Var,
    walk,
)


LOG = getLogger(__name__)

MAX_UNROLLED_ITERATIONS = 2 ** 20


@dataclass(frozen=True)
class EvalConfig:
    """
    Evaluation mode of the oracle.

    Parameters
    ----------
    mode : {"integer", "field"}
        Unbounded integer semantics (default) or arithmetic in GF(prime).
    prime : int
        Field modulus used in field mode; defaults to the BN254 scalar field.
    max_loop_iterations : int
        Total number of loop, quantifier and generator iterations allowed in
        one evaluation.

    """
    mode: str = INTEGER_MODE
    prime: int = BN254_PRIME
    max_loop_iterations: int = DEFAULT_MAX_LOOP_ITERATIONS

    def __post_init__(self):
        if self.mode not in VALID_EVAL_MODE:
            raise ValueError("'mode' must be set to one of: {}.".format(", ".join(VALID_EVAL_MODE)))
        if self.mode == FIELD_MODE and not _is_odd_prime(self.prime):
            raise ValueError("'prime' must be an odd prime, got {}".format(self.prime))
        if self.max_loop_iterations < 1:
            raise ValueError("'max_loop_iterations' must be positive")

    def arith(self):
        return FieldArith(self.prime) if self.mode == FIELD_MODE else IntegerArith()


def _is_odd_prime(n):
    if n <= 2 or n % 2 == 0:
        return False
    # Fermat test to bases 2, 3, 5, 7; the moduli in use are well-known primes.
    return all(pow(base, n - 1, n) == 1 for base in (2, 3, 5, 7) if base % n)


@dataclass(frozen=True)
class Assignment:
    """Concrete values of the parameters of a sketch, keyed by parameter name."""
    bindings: Mapping[str, Any]

    def serialize(self):
        """Structured form with decimal-string integers and sorted keys."""
        return {name: serialize_value(self.bindings[name]) for name in sorted(self.bindings)}


def serialize_value(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return str(value)
    return [serialize_value(item) for item in value]


def _convert(name, value, sketch_type):
    if sketch_type.is_vec:
        if not isinstance(value, (list, tuple)):
            raise AssignmentError("'{}' must be a list for type {}".format(name, sketch_type))
        items = [_convert(name, item, sketch_type.inner) for item in value]
        if sketch_type.inner.is_vec and len({len(item) for item in items}) > 1:
            raise AssignmentError("'{}' has inconsistent list lengths".format(name))
        return items
    if sketch_type.kind == BOOL:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.strip().lower() in ("true", "false"):
            return value.strip().lower() == "true"
        if isinstance(value, int) and value in (0, 1):
            return bool(value)
        raise AssignmentError("'{}' must be a boolean, got {!r}".format(name, value))
    if isinstance(value, bool):
        raise AssignmentError("'{}' must be a Field element, got {!r}".format(name, value))
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            if text.lower().startswith(("0x", "-0x")):
                return int(text, 16)
            return int(text, 10)
        except ValueError:
            pass
    raise AssignmentError("'{}' must be a decimal integer, got {!r}".format(name, value))


def to_assignment(param_types, values):
    """
    Convert serialized values (decimal strings, ``true``/``false``, nested
    lists) into an :class:`Assignment` for a signature.

    Parameters
    ----------
    param_types : mapping
        Parameter name to :class:`~zk_coder.syntax.SketchType`, in signature order.
    values : mapping
        Serialized value of every parameter.

    Raises
    ------
    AssignmentError
        On missing or extra names, or values whose shape does not match.

    """
    if not isinstance(values, Mapping):
        raise AssignmentError("an assignment must map parameter names to values")
    missing = [name for name in param_types if name not in values]
    extra = [name for name in values if name not in param_types]
    if missing:
        raise AssignmentError("missing value(s) for: {}".format(", ".join(missing)))
    if extra:
        raise AssignmentError("unknown parameter(s): {}".format(", ".join(sorted(extra))))
    return Assignment({name: _convert(name, values[name], param_types[name]) for name in param_types})


@dataclass(frozen=True)
class Verdict:
    """
    Result of evaluating a sketch on one assignment.

    Exactly one of `accepted` and `error` is meaningful: `error` is set when
    evaluation failed, in which case `accepted` is None.

    """
    accepted: Optional[bool]
    checked: int
    failing_spans: Tuple[Any, ...] = ()
    error: Optional[EvalError] = field(default=None, compare=False)

    @property
    def is_accept(self):
        return self.accepted is True

    @property
    def is_reject(self):
        return self.accepted is False

    @property
    def is_error(self):
        return self.error is not None

    def describe(self):
        if self.is_error:
            return "EvalError {}".format(self.error.kind)
        return "accept" if self.accepted else "reject"


def _kind_of(value):
    if isinstance(value, bool):
        return BOOL
    if isinstance(value, int):
        return FIELD
    raise TypeError("not a scalar value: {!r}".format(value))


# Value of a variadic gadget applied to an empty generator.
EMPTY_FOLD = {
    "And": True,
    "Or": False,
    "XOr": False,
    "Sum": 0,
    "Product": 1,
    "Distinct": True,
}


def apply_row(row, values, arith):
    """Reference semantics of catalog `row` on scalar argument `values`."""
    label = row.label
    name = row.name
    if label in ("And", "And*"):
        return all(values)
    if label in ("Or", "Or*"):
        return any(values)
    if label in ("XOr", "XOr*"):
        return reduce(lambda a, b: a != b, values)
    if label == "Not":
        return not values[0]
    if label in ("And◇", "And◇*"):
        return reduce(arith.bit_and, values)
    if label in ("Or◇", "Or◇*"):
        return reduce(arith.bit_or, values)
    if label in ("XOr◇", "XOr◇*"):
        return reduce(arith.bit_xor, values)
    if name == "Equal":
        return arith.equal(*values)
    if name == "NotEqual":
        return not arith.equal(*values)
    if name == "LessThan":
        return arith.less_than(*values)
    if name == "LessThanOrEqual":
        return not arith.less_than(values[1], values[0])
    if name == "GreaterThan":
        return arith.less_than(values[1], values[0])
    if name == "GreaterThanOrEqual":
        return not arith.less_than(values[0], values[1])
    if name == "Conditional":
        return values[1] if values[0] else values[2]
    if name == "Sum":
        return reduce(arith.add, values)
    if name == "Product":
        return reduce(arith.multiply, values)
    if name == "Distinct":
        return all(
            not arith.equal(values[i], values[j])
            for i in range(len(values))
            for j in range(i + 1, len(values))
        )
    unary = {
        "Negate": arith.negate,
        "Absolute": arith.absolute,
        "Inverse": arith.inverse,
        "Sign": arith.sign,
    }
    if name in unary:
        return unary[name](values[0])
    binary = {
        "Add": arith.add,
        "Subtract": arith.subtract,
        "Multiply": arith.multiply,
        "Divide": arith.divide,
        "Modulo": arith.modulo,
        "FloorDivide": arith.floor_divide,
        "Power": arith.power,
    }
    return binary[name](*values)


def _resolve_call(identifier, values):
    name = gadget_name(identifier) or identifier
    if len(values) == 1 and isinstance(values[0], list):
        values = list(values[0])
        if not values:
            return None, values
        kinds = tuple(_kind_of(value) for value in values)
        row = next((row for row in rows_named(name) if row.is_variadic and row.accepts(kinds)), None)
    else:
        row = resolve(name, tuple(_kind_of(value) for value in values))
    if row is None:
        raise ValueError("no catalog row for {}({})".format(identifier, ", ".join(map(repr, values))))
    return row, values


def eval_gadget(name, args, cfg=EvalConfig()):
    """
    Apply a catalog gadget to concrete arguments.

    Parameters
    ----------
    name : str
        Canonical gadget name or alias.
    args : list
        Scalars (bool for Bool, int for Field), or a single list for variadic gadgets.
    cfg : EvalConfig

    Raises
    ------
    EvalError
        If the gadget is undefined on the arguments (division by zero, ...).

    Examples
    --------
    >>> eval_gadget("Conditional", [True, 7, 9])
    7
    >>> eval_gadget("Distinct", [[1, 2, 2]])
    False

    """
    arith = cfg.arith()
    values = [
        [arith.normalize(v) if _kind_of(v) == FIELD else v for v in arg] if isinstance(arg, list)
        else (arith.normalize(arg) if _kind_of(arg) == FIELD else arg)
        for arg in args
    ]
    row, values = _resolve_call(name, values)
    if row is None:
        return EMPTY_FOLD[gadget_name(name)]
    return apply_row(row, values, arith)


class EvaluationAborted(Exception):
    """Stops evaluation of the remaining program."""


class Interpreter:
    """
    Reference interpreter bound to one well-formed sketch.

    Parameters
    ----------
    program : SketchProgram
        Must have an empty check report.
    cfg : EvalConfig

    Raises
    ------
    ValueError
        If the sketch is not well-formed.

    """

    def __init__(self, program, cfg=EvalConfig()):
        report = check_sketch(program)
        if not report.is_empty:
            raise ValueError("cannot evaluate a sketch with {} check violation(s)".format(len(report)))
        self.program = program
        self.cfg = cfg
        self.param_types = program.param_types()

    def assignment(self, values):
        """Convert serialized values into an assignment for this sketch's signature."""
        return to_assignment(self.param_types, values)

    def evaluate(self, assignment):
        if isinstance(assignment, Assignment):
            assignment = assignment.bindings
        assignment = self.assignment(assignment)
        run = Evaluation(self.cfg)
        env = ChainMap({
            name: run.normalize_value(value)
            for name, value in assignment.bindings.items()
        })
        try:
            run.block(self.program.body, env, ChainMap())
        except EvaluationAborted:
            pass
        verdict = run.verdict()
        LOG.debug("evaluate() - %s after %d constraint(s)", verdict.describe(), verdict.checked)
        return verdict


def evaluate(program, assignment, cfg=EvalConfig()):
    """
    Evaluate a well-formed sketch on a concrete assignment.

    Returns
    -------
    verdict : Verdict
        Accept iff every constraint holds, reject iff at least one does not;
        an evaluation error on any constraint yields an error verdict instead.

    """
    return Interpreter(program, cfg).evaluate(assignment)


class Evaluation:
    """
    State of one evaluation run: loop guard, checked constraints and the first error.

    Statements carry two environments: `env` with every concrete value and
    `static` with the compile-time ones only (loop variables and constant
    assignments). A conditional whose guard is not compile-time counts the
    constraints of the branch it skips as checked, since a circuit enforces
    both branches.

    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.arith = cfg.arith()
        self.iterations = 0
        self.checked = 0
        self.failing = []
        self.error = None
        self._counter = None

    @property
    def counter(self):
        if self._counter is None:
            self._counter = ConstraintCounter(self.cfg)
        return self._counter

    def verdict(self):
        if self.error is not None:
            return Verdict(None, self.checked, tuple(self.failing), self.error)
        return Verdict(not self.failing, self.checked, tuple(self.failing))

    def normalize_value(self, value):
        if isinstance(value, list):
            return [self.normalize_value(item) for item in value]
        if isinstance(value, bool):
            return value
        return self.arith.normalize(value)

    def fatal(self, error, node=None):
        if error.span is None and node is not None:
            error.span = node.span
        if self.error is None:
            self.error = error
        raise EvaluationAborted()

    def tick(self, node):
        self.iterations += 1
        if self.iterations > self.cfg.max_loop_iterations:
            self.fatal(EvalError(
                LOOP_GUARD_EXCEEDED,
                "more than {} loop iterations".format(self.cfg.max_loop_iterations),
                node.span,
            ))

    def iterate(self, range_spec, env, node):
        try:
            lo = self.expr(range_spec.lo, env) if range_spec.lo is not None else 0
            hi = self.expr(range_spec.hi, env)
        except EvalError as error:
            self.fatal(error, node)
        for value in range(lo, hi):
            self.tick(node)
            yield value

    # Statements

    def block(self, statements, env, static):
        for statement in statements:
            self.statement(statement, env, static)

    def statement(self, node, env, static):
        if isinstance(node, Assign):
            try:
                env[node.target] = self.expr(node.value, env)
            except EvalError as error:
                self.fatal(error, node)
            self.counter.statement(node, static)
        elif isinstance(node, AddConstraint):
            self.checked += 1
            try:
                holds = self.truth(self.formula(node.formula, env))
            except EvalError as error:
                if error.span is None:
                    error.span = node.span
                if self.error is None:
                    self.error = error
                return
            if not holds:
                self.failing.append(node.span)
        elif isinstance(node, ForLoop):
            for value in self.iterate(node.range, env, node):
                self.block(node.body, env.new_child({node.var: value}), static.new_child({node.var: value}))
        elif isinstance(node, If):
            try:
                taken = self.truth(self.formula(node.cond, env))
            except EvalError as error:
                self.fatal(error, node)
            branch, skipped = (node.then, node.orelse or ()) if taken else (node.orelse or (), node.then)
            known, _ = self.counter.constant(self.counter.evaluation.formula, node.cond, static)
            if not known:
                try:
                    self.checked += self.counter.block(skipped, static.new_child())
                except ExtractError as error:
                    self.fatal(EvalError(LOOP_GUARD_EXCEEDED, str(error), node.span))
            self.block(branch, env.new_child(), static.new_child())
        elif isinstance(node, ReturnEngine):
            raise EvaluationAborted()

    # Formulas

    def truth(self, value):
        if isinstance(value, bool):
            return value
        return not self.arith.is_zero(value)

    def formula(self, node, env):
        if isinstance(node, Relation):
            return self.relation(node, env)
        if isinstance(node, GadgetCall):
            return self.gadget(node.name, node.args, env)
        if isinstance(node, BoolAtom):
            return self.expr(node.expr, env)
        if isinstance(node, Not):
            return not self.truth(self.formula(node.operand, env))
        if isinstance(node, (And, Or)):
            values = [self.formula(leaf, env) for leaf in flatten_chain(node)]
            if all(isinstance(value, bool) for value in values):
                return all(values) if isinstance(node, And) else any(values)
            combine = self.arith.bit_and if isinstance(node, And) else self.arith.bit_or
            return reduce(combine, values)
        if isinstance(node, (AllQuant, AnyQuant)):
            values = [
                self.truth(self.formula(node.body, env.new_child({node.var: value})))
                for value in self.iterate(node.range, env, node)
            ]
            return all(values) if isinstance(node, AllQuant) else any(values)
        raise TypeError("not a formula node: {!r}".format(node))

    def relation(self, node, env):
        lhs = self.expr(node.lhs, env)
        rhs = self.expr(node.rhs, env)
        if node.op == "xor":
            if isinstance(lhs, bool):
                return lhs != rhs
            return self.arith.bit_xor(lhs, rhs)
        if isinstance(lhs, bool):
            lhs, rhs = int(lhs), int(rhs)
        row = resolve(SURFACE_OPERATORS[node.op], (FIELD, FIELD))
        return apply_row(row, (lhs, rhs), self.arith)

    # Expressions

    def expr(self, node, env):
        if isinstance(node, IntLit):
            return self.arith.normalize(node.value)
        if isinstance(node, BoolLit):
            return node.value
        if isinstance(node, Var):
            return env[node.name]
        if isinstance(node, Paren):
            return self.expr(node.expr, env)
        if isinstance(node, BinOp):
            row = resolve(SURFACE_OPERATORS[node.op], (FIELD, FIELD))
            return apply_row(row, (self.expr(node.lhs, env), self.expr(node.rhs, env)), self.arith)
        if isinstance(node, Neg):
            return self.arith.negate(self.expr(node.operand, env))
        if isinstance(node, Index):
            base = self.expr(node.base, env)
            index = self.expr(node.index, env)
            if not 0 <= index < len(base):
                raise EvalError(INDEX_OUT_OF_BOUNDS, "index {} outside [0, {})".format(index, len(base)), node.span)
            return base[index]
        if isinstance(node, GadgetExpr):
            return self.gadget(node.name, node.args, env)
        raise TypeError("not an expression node: {!r}".format(node))

    def gadget(self, identifier, args, env):
        if len(args) == 1 and isinstance(args[0], Generator):
            generator = args[0]
            values = [[
                self.expr(generator.element, env.new_child({generator.var: value}))
                for value in self.iterate(generator.range, env, generator)
            ]]
        else:
            values = [self.expr(arg, env) for arg in args]
        row, values = _resolve_call(identifier, values)
        if row is None:
            return EMPTY_FOLD[gadget_name(identifier)]
        return apply_row(row, values, self.arith)


class ConstraintCounter:
    """
    Counts `engine.add` executions with every loop unrolled, evaluating no constraint.

    The environment holds compile-time values only. Conditionals whose guard
    folds to a constant take one branch; any other conditional counts both.

    Raises
    ------
    ExtractError
        On a loop bound that is not a compile-time constant, or past
        ``max_iterations`` unrolled iterations.

    """

    def __init__(self, cfg=EvalConfig(), max_iterations=MAX_UNROLLED_ITERATIONS):
        self.evaluation = Evaluation(cfg)
        self.max_iterations = max_iterations
        self.iterations = 0

    def constant(self, evaluate, node, env):
        bound = {item.var for item in walk(node) if isinstance(item, (AllQuant, AnyQuant, Generator))}
        if any(isinstance(item, Var) and item.name not in bound and item.name not in env for item in walk(node)):
            return False, None
        try:
            return True, evaluate(node, env)
        except (KeyError, EvalError, EvaluationAborted):
            return False, None

    def block(self, statements, env):
        total = 0
        for statement in statements:
            if isinstance(statement, ReturnEngine):
                break
            total += self.statement(statement, env)
        return total

    def statement(self, node, env):
        if isinstance(node, Assign):
            known, value = self.constant(self.evaluation.expr, node.value, env)
            if known:
                env[node.target] = value
            return 0
        if isinstance(node, AddConstraint):
            return 1
        if isinstance(node, ForLoop):
            bounds = [
                self.constant(self.evaluation.expr, bound, env)
                for bound in (node.range.lo or IntLit(0), node.range.hi)
            ]
            if not all(known for known, _ in bounds):
                raise ExtractError("loop bound at {} is not a compile-time constant".format(node.span))
            total = 0
            for value in range(bounds[0][1], bounds[1][1]):
                self.iterations += 1
                if self.iterations > self.max_iterations:
                    raise ExtractError("more than {} unrolled loop iterations".format(self.max_iterations))
                total += self.block(node.body, env.new_child({node.var: value}))
            return total
        if isinstance(node, If):
            known, value = self.constant(self.evaluation.formula, node.cond, env)
            if known:
                if self.evaluation.truth(value):
                    return self.block(node.then, env.new_child())
                return self.block(node.orelse or (), env.new_child())
            return self.block(node.then, env.new_child()) + self.block(node.orelse or (), env.new_child())
        return 0
