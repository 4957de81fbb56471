"""
Canonical pretty printer for ZKSL.

Formulas are printed with the minimal parentheses their precedence needs.
Expressions are printed exactly as they are structured: parentheses only come
from explicit `Paren` nodes, so that printing and re-parsing is the identity.

"""
from zk_coder.constants import ENGINE
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
)


INDENT = "    "

_OR, _AND, _NOT, _ATOM = range(4)


def print_range(range_spec):
    if range_spec.lo is None:
        return "range({})".format(print_expr(range_spec.hi))
    return "range({}, {})".format(print_expr(range_spec.lo), print_expr(range_spec.hi))


def _print_args(args):
    return ", ".join(print_expr(arg) for arg in args)


def print_expr(node):
    if isinstance(node, IntLit):
        return str(node.value)
    if isinstance(node, BoolLit):
        return "True" if node.value else "False"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Paren):
        return "({})".format(print_expr(node.expr))
    if isinstance(node, BinOp):
        return "{} {} {}".format(print_expr(node.lhs), node.op, print_expr(node.rhs))
    if isinstance(node, Neg):
        return "-{}".format(print_expr(node.operand))
    if isinstance(node, Index):
        return "{}[{}]".format(print_expr(node.base), print_expr(node.index))
    if isinstance(node, GadgetExpr):
        return "{}({})".format(node.name, _print_args(node.args))
    if isinstance(node, Generator):
        return "{} for {} in {}".format(print_expr(node.element), node.var, print_range(node.range))
    raise TypeError("not an expression node: {!r}".format(node))


def _precedence(formula):
    if isinstance(formula, Or):
        return _OR
    if isinstance(formula, And):
        return _AND
    if isinstance(formula, Not):
        return _NOT
    return _ATOM


def _print_operand(formula, minimum):
    text = print_formula(formula)
    if _precedence(formula) < minimum:
        return "({})".format(text)
    return text


def print_formula(node):
    if isinstance(node, Or):
        return "{} or {}".format(_print_operand(node.lhs, _OR), _print_operand(node.rhs, _AND))
    if isinstance(node, And):
        return "{} and {}".format(_print_operand(node.lhs, _AND), _print_operand(node.rhs, _NOT))
    if isinstance(node, Not):
        return "not {}".format(_print_operand(node.operand, _NOT))
    if isinstance(node, (AllQuant, AnyQuant)):
        keyword = "all" if isinstance(node, AllQuant) else "any"
        return "{}({} for {} in {})".format(keyword, print_formula(node.body), node.var, print_range(node.range))
    if isinstance(node, Relation):
        return "{} {} {}".format(print_expr(node.lhs), node.op, print_expr(node.rhs))
    if isinstance(node, GadgetCall):
        return "{}({})".format(node.name, _print_args(node.args))
    if isinstance(node, BoolAtom):
        return print_expr(node.expr)
    raise TypeError("not a formula node: {!r}".format(node))


def _print_block(statements, depth, lines):
    for statement in statements:
        _print_statement(statement, depth, lines)


def _print_statement(node, depth, lines):
    prefix = INDENT * depth
    if isinstance(node, Assign):
        lines.append("{}{} = {}".format(prefix, node.target, print_expr(node.value)))
    elif isinstance(node, AddConstraint):
        lines.append("{}{}.add({})".format(prefix, ENGINE, print_formula(node.formula)))
    elif isinstance(node, ForLoop):
        lines.append("{}for {} in {}:".format(prefix, node.var, print_range(node.range)))
        _print_block(node.body, depth + 1, lines)
    elif isinstance(node, If):
        lines.append("{}if {}:".format(prefix, print_formula(node.cond)))
        _print_block(node.then, depth + 1, lines)
        if node.orelse is not None:
            lines.append("{}else:".format(prefix))
            _print_block(node.orelse, depth + 1, lines)
    elif isinstance(node, ReturnEngine):
        lines.append("{}return {}".format(prefix, ENGINE))
    else:
        raise TypeError("not a statement node: {!r}".format(node))


def print_sketch(program):
    """
    Render `program` as canonical ZKSL source (4-space indentation, LF line endings).

    Examples
    --------
    >>> print(print_sketch(parse_sketch("def verify(engine, x: Field):\\n  engine.add(x==3)\\n")))
    def verify(engine, x: Field):
        engine.add(x == 3)

    """
    params = "".join(", {}: {}".format(param.name, param.type) for param in program.params)
    lines = ["def verify({}{}):".format(ENGINE, params)]
    _print_block(program.body, 1, lines)
    return "\n".join(lines) + "\n"
