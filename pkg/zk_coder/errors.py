"""
Exception types.

Checker violations, oracle evaluation errors and pipeline outcomes are plain
data; the exceptions below are reserved for contract violations and
infrastructure failures.

"""


class ZkCoderError(Exception):
    """Base class of all errors raised by this package."""


class ParseFailure(ZkCoderError):
    """A ZKSL document does not conform to the grammar."""

    def __init__(self, message, line, column, production):
        super().__init__(
            "line {}, column {}: {} (in {})".format(line, column, message, production),
        )
        self.message = message
        self.line = line
        self.column = column
        self.production = production


class AssignmentError(ZkCoderError):
    """A concrete assignment does not match the signature of a sketch."""


class ExtractError(ZkCoderError):
    """A checked sketch contains a construct without a catalog row."""


class UnknownOperator(ExtractError):
    """A surface operator or gadget name is outside the catalog and grammar."""

    def __init__(self, surface, operand_types=(), arity=None):
        super().__init__(
            "unknown operator {!r} with operand types ({}) and arity {}".format(
                surface,
                ", ".join(operand_types),
                arity,
            ),
        )
        self.surface = surface
        self.operand_types = tuple(operand_types)
        self.arity = arity


class KbError(ZkCoderError):
    """The gadget knowledge base is inconsistent with the catalog."""

    MISSING_GADGET = "MissingGadget"
    DUPLICATE_TYPING = "DuplicateTyping"
    MISSING_SNIPPET = "MissingSnippet"
    MALFORMED_FILE = "MalformedFile"

    def __init__(self, kind, detail):
        super().__init__("{}: {}".format(kind, detail))
        self.kind = kind
        self.detail = detail


class RetrievalMiss(ZkCoderError):
    """No knowledge base entry matches a constraint primitive exactly."""

    def __init__(self, primitive):
        super().__init__("no gadget entry for {}".format(primitive.display()))
        self.primitive = primitive


class ToolchainMissing(ZkCoderError):
    """A toolchain binary is absent or its version probe fails."""


class ToolchainTimeout(ZkCoderError):
    """A toolchain process exceeded its time limit."""

    def __init__(self, command, timeout):
        super().__init__("{} timed out after {}s".format(command, timeout))
        self.command = command
        self.timeout = timeout


class MalformedInput(ZkCoderError):
    """Test inputs do not match the input signature of a candidate program."""


class LlmTransportError(ZkCoderError):
    """The LLM backend could not be reached after all retries."""


class TaskError(ZkCoderError):
    """A benchmark task is malformed or inconsistent with its oracle."""

    ORACLE_MISMATCH = "OracleMismatch"
    EMPTY_SUITE = "EmptySuite"
    MALFORMED = "Malformed"

    def __init__(self, kind, detail):
        super().__init__("{}: {}".format(kind, detail))
        self.kind = kind
        self.detail = detail


class ConfigError(ZkCoderError, TypeError):
    """Invalid or inconsistent run configuration."""


class EvalError(ZkCoderError):
    """
    The reference interpreter cannot evaluate a sketch on an assignment.

    `kind` is one of the evaluation error kinds in :mod:`zk_coder.constants`
    (DivisionByZero, NonExactDivision, NegativeExponent, ...).

    """

    def __init__(self, kind, detail, span=None):
        super().__init__("{}: {}".format(kind, detail))
        self.kind = kind
        self.detail = detail
        self.span = span
