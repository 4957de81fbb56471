"""
The gadget catalog: the 35 typed constraint gadgets a sketch may use.

Each row is identified by its canonical name, operand types and arity. Several
rows share a canonical name and differ only in typing (logical `XOr` over Bool
versus bitwise `XOr` over Field), so a gadget reference is resolved against
the full triple, never by name alone.

"""
from dataclasses import dataclass
from typing import Tuple, Union

from zk_coder.constants import BOOL, FIELD, VARIADIC
from zk_coder.errors import UnknownOperator


@dataclass(frozen=True)
class CatalogRow:
    label: str
    name: str
    category: str
    operands: Tuple[str, ...]
    result: str
    arity: Union[int, str]

    @property
    def is_variadic(self):
        return self.arity == VARIADIC

    @property
    def key(self):
        return (self.name, self.operands, self.arity)

    def accepts(self, operand_types):
        """True iff this row types a call with the given argument types."""
        operand_types = tuple(operand_types)
        if self.is_variadic:
            return len(operand_types) >= 1 and all(t == self.operands[0] for t in operand_types)
        return operand_types == self.operands

    def accepts_arity(self, arity):
        return self.is_variadic or arity == self.arity

    def signature(self):
        if self.is_variadic:
            return "{} x ... x {} -> {}".format(self.operands[0], self.operands[0], self.result)
        return "{} -> {}".format(" x ".join(self.operands), self.result)


def _fixed(label, name, category, operands, result):
    return CatalogRow(label, name, category, tuple(operands), result, len(operands))


def _variadic(label, name, category, operand, result):
    return CatalogRow(label, name, category, (operand,), result, VARIADIC)


_B, _F = BOOL, FIELD

CATALOG = (
    _fixed("And", "And", "Logical", (_B, _B), _B),
    _variadic("And*", "And", "Logical", _B, _B),
    _fixed("Or", "Or", "Logical", (_B, _B), _B),
    _variadic("Or*", "Or", "Logical", _B, _B),
    _fixed("XOr", "XOr", "Logical", (_B, _B), _B),
    _variadic("XOr*", "XOr", "Logical", _B, _B),
    _fixed("Not", "Not", "Logical", (_B,), _B),
    _fixed("Or◇", "Or", "Bitwise", (_F, _F), _F),
    _variadic("Or◇*", "Or", "Bitwise", _F, _F),
    _fixed("And◇", "And", "Bitwise", (_F, _F), _F),
    _variadic("And◇*", "And", "Bitwise", _F, _F),
    _fixed("XOr◇", "XOr", "Bitwise", (_F, _F), _F),
    _variadic("XOr◇*", "XOr", "Bitwise", _F, _F),
    _fixed("Equal", "Equal", "Comparison", (_F, _F), _B),
    _fixed("NotEqual", "NotEqual", "Comparison", (_F, _F), _B),
    _fixed("LessThan", "LessThan", "Comparison", (_F, _F), _B),
    _fixed("LessThanOrEqual", "LessThanOrEqual", "Comparison", (_F, _F), _B),
    _fixed("GreaterThan", "GreaterThan", "Comparison", (_F, _F), _B),
    _fixed("GreaterThanOrEqual", "GreaterThanOrEqual", "Comparison", (_F, _F), _B),
    _fixed("Add", "Add", "Arithmetic", (_F, _F), _F),
    _fixed("Subtract", "Subtract", "Arithmetic", (_F, _F), _F),
    _fixed("Multiply", "Multiply", "Arithmetic", (_F, _F), _F),
    _fixed("Divide", "Divide", "Arithmetic", (_F, _F), _F),
    _fixed("Modulo", "Modulo", "Arithmetic", (_F, _F), _F),
    _fixed("Power", "Power", "Arithmetic", (_F, _F), _F),
    _fixed("FloorDivide", "FloorDivide", "Arithmetic", (_F, _F), _F),
    _fixed("Negate", "Negate", "Arithmetic", (_F,), _F),
    _fixed("Absolute", "Absolute", "Arithmetic", (_F,), _F),
    _fixed("Inverse", "Inverse", "Arithmetic", (_F,), _F),
    _fixed("Sign", "Sign", "Arithmetic", (_F,), _F),
    _fixed("Conditional", "Conditional", "Composite", (_B, _F, _F), _F),
    _fixed("Conditional◇", "Conditional", "Composite", (_B, _B, _B), _B),
    _variadic("Sum*", "Sum", "Composite", _F, _F),
    _variadic("Product*", "Product", "Composite", _F, _F),
    # Distinct is a predicate; its result is used as a Bool formula.
    _variadic("Distinct*", "Distinct", "Composite", _F, _B),
)

ROWS_BY_LABEL = {row.label: row for row in CATALOG}
ROWS_BY_KEY = {row.key: row for row in CATALOG}
CANONICAL_NAMES = tuple(sorted({row.name for row in CATALOG}))

# Alternative spellings accepted in sketches: surface names from the sketch
# grammar, prose spellings and the template names of the target libraries.
ALIASES = {
    "Xor": "XOr",
    "BitAnd": "And",
    "BitOr": "Or",
    "BitXor": "XOr",
    "BitwiseAnd": "And",
    "BitwiseOr": "Or",
    "BitwiseXor": "XOr",
    "IsEqual": "Equal",
    "Eq": "Equal",
    "IsNotEqual": "NotEqual",
    "NotEq": "NotEqual",
    "Neq": "NotEqual",
    "Lt": "LessThan",
    "LessEqThan": "LessThanOrEqual",
    "Le": "LessThanOrEqual",
    "Gt": "GreaterThan",
    "GreaterEqThan": "GreaterThanOrEqual",
    "Ge": "GreaterThanOrEqual",
    "Sub": "Subtract",
    "Mul": "Multiply",
    "Div": "Divide",
    "Mod": "Modulo",
    "Pow": "Power",
    "FloorDiv": "FloorDivide",
    "IntDiv": "FloorDivide",
    "Neg": "Negate",
    "abs": "Absolute",
    "Abs": "Absolute",
    "Inv": "Inverse",
    "sign": "Sign",
    "select": "Conditional",
    "Select": "Conditional",
    "Mux": "Conditional",
    "Mux1": "Conditional",
    "ite": "Conditional",
    "sum": "Sum",
    "prod": "Product",
    "product": "Product",
    "distinct": "Distinct",
    "AllDifferent": "Distinct",
}

# Grammar operators and the canonical gadget each one denotes.
SURFACE_OPERATORS = {
    "+": "Add",
    "-": "Subtract",
    "*": "Multiply",
    "/": "Divide",
    "%": "Modulo",
    "//": "FloorDivide",
    "**": "Power",
    "neg": "Negate",
    "==": "Equal",
    "!=": "NotEqual",
    "<": "LessThan",
    "<=": "LessThanOrEqual",
    ">": "GreaterThan",
    ">=": "GreaterThanOrEqual",
    "xor": "XOr",
    "and": "And",
    "or": "Or",
    "not": "Not",
    "all": "And",
    "any": "Or",
}


def canonical_name(surface):
    """Canonical gadget name for a gadget identifier, alias or grammar operator, or None."""
    if surface in CANONICAL_NAMES:
        return surface
    if surface in SURFACE_OPERATORS:
        return SURFACE_OPERATORS[surface]
    return ALIASES.get(surface)


def rows_named(name):
    return tuple(row for row in CATALOG if row.name == name)


def resolve(name, operand_types):
    """
    Resolve a canonical name and argument types to a catalog row.

    A fixed-arity row is preferred; otherwise a variadic row of the same name
    and element type applies. Returns None when no row types the call.

    """
    operand_types = tuple(operand_types)
    candidates = rows_named(name)
    for row in candidates:
        if not row.is_variadic and row.accepts(operand_types):
            return row
    for row in candidates:
        if row.is_variadic and row.accepts(operand_types):
            return row
    return None


def resolve_surface(surface, operand_types):
    """
    Resolve a surface form (gadget name, alias or operator) to its catalog row.

    Raises
    ------
    UnknownOperator
        If the surface form is unknown or no row types the call.

    """
    operand_types = tuple(operand_types)
    name = canonical_name(surface)
    row = resolve(name, operand_types) if name else None
    if row is None:
        raise UnknownOperator(surface, operand_types, len(operand_types))
    return row


def gadget_name(identifier):
    """Canonical name for a gadget identifier used in call position, or None."""
    if identifier in CANONICAL_NAMES:
        return identifier
    return ALIASES.get(identifier)
