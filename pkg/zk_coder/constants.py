"""
Constants.

"""

# Sketch types
FIELD = "Field"
BOOL = "Bool"
VEC = "Vec"

# Reserved first parameter of every `verify` function
ENGINE = "engine"

# Marker for variadic catalog rows
VARIADIC = "variadic"

# Gadget categories
VALID_CATEGORY = ("Logical", "Bitwise", "Comparison", "Arithmetic", "Composite")

# Checker violation categories
TYPE_MISMATCH = "TypeMismatch"
ARITY_MISMATCH = "ArityMismatch"
UNKNOWN_GADGET = "UnknownGadget"
UNBOUND_VARIABLE = "UnboundVariable"
UNBOUNDED_LOOP = "UnboundedLoop"
STATEMENT_AFTER_RETURN = "StatementAfterReturn"
SHADOWED_NAME = "ShadowedName"
VALID_VIOLATION = (
    TYPE_MISMATCH,
    ARITY_MISMATCH,
    UNKNOWN_GADGET,
    UNBOUND_VARIABLE,
    UNBOUNDED_LOOP,
    STATEMENT_AFTER_RETURN,
    SHADOWED_NAME,
)

# Oracle evaluation
INTEGER_MODE = "integer"
FIELD_MODE = "field"
VALID_EVAL_MODE = (INTEGER_MODE, FIELD_MODE)

# Scalar field of BN254, the curve Circom compiles to by default
BN254_PRIME = 21888242871839275222246405745257275088548364400416034343698204186575808495617

DEFAULT_MAX_LOOP_ITERATIONS = 2 ** 16

DIVISION_BY_ZERO = "DivisionByZero"
NON_EXACT_DIVISION = "NonExactDivision"
NEGATIVE_EXPONENT = "NegativeExponent"
INDEX_OUT_OF_BOUNDS = "IndexOutOfBounds"
LOOP_GUARD_EXCEEDED = "LoopGuardExceeded"
INVERSE_OF_ZERO = "InverseOfZero"
NEGATIVE_OPERAND = "NegativeOperand"
NO_INTEGER_INVERSE = "NoIntegerInverse"

# Target languages
CIRCOM = "circom"
NOIR = "noir"
VALID_TARGET = (CIRCOM, NOIR)

# Snippet provenance
VALID_PROVENANCE = ("StdLib", "ZkKit", "HandVerified")

# Diagnostic stages
STAGE_PARSE = "Parse"
STAGE_TYPE = "Type"
STAGE_CONSTRAINT = "Constraint"
STAGE_LINK = "Link"
STAGE_UNKNOWN = "Unknown"

# Case verdicts
ACCEPTED = "Accepted"
REJECTED = "Rejected"
EXECUTION_FAILED = "ExecutionFailed"

# Suite polarity
ACCEPT = "accept"
REJECT = "reject"

# Task input roles
ROLE_INPUT = "input"
ROLE_SOLUTION = "solution"
VALID_ROLE = (ROLE_INPUT, ROLE_SOLUTION)

# Pipeline stages, in their fixed order
SKETCH_GEN = "SketchGen"
SKETCH_CHECK_LOOP = "SketchCheckLoop"
EXTRACT = "Extract"
RETRIEVE = "Retrieve"
CODE_GEN = "CodeGen"
COMPILE_LOOP = "CompileLoop"
TEST_GEN = "TestGen"
SEMANTIC_CHECK = "SemanticCheck"
SEMANTIC_REPAIR = "SemanticRepair"
TERMINAL = "Terminal"
PIPELINE_STAGES = (
    SKETCH_GEN,
    SKETCH_CHECK_LOOP,
    EXTRACT,
    RETRIEVE,
    CODE_GEN,
    COMPILE_LOOP,
    TEST_GEN,
    SEMANTIC_CHECK,
    SEMANTIC_REPAIR,
    TERMINAL,
)

# Terminal outcomes
SUCCESS = "Success"
REPAIR_BUDGET_EXCEEDED = "RepairBudgetExceeded"
SKETCH_INCORRECT = "SketchIncorrect"
FALSE_ACCEPT = "FalseAccept"
FALSE_REJECT = "FalseReject"
MIXED_FALSE_ACCEPT_REJECT = "MixedFalseAcceptReject"
INFRA_FAILURE = "InfraFailure"
FAILURE_CLASSES = (
    REPAIR_BUDGET_EXCEEDED,
    SKETCH_INCORRECT,
    FALSE_ACCEPT,
    FALSE_REJECT,
    MIXED_FALSE_ACCEPT_REJECT,
)
VALID_OUTCOME = (SUCCESS,) + FAILURE_CLASSES + (INFRA_FAILURE,)

# Pipeline variants
VARIANT_FULL = "full"
VARIANT_NO_RAG = "no-rag"
VARIANT_NO_SKETCH = "no-sketch"
VARIANT_NO_SYNTAX_REPAIR = "no-syntax-repair"
VARIANT_NO_SEMANTIC_REPAIR = "no-semantic-repair"
VARIANT_ONLY_REPAIR = "only-repair"
VARIANT_BASELINE = "baseline"
VALID_VARIANT = (
    VARIANT_FULL,
    VARIANT_NO_RAG,
    VARIANT_NO_SKETCH,
    VARIANT_NO_SYNTAX_REPAIR,
    VARIANT_NO_SEMANTIC_REPAIR,
    VARIANT_ONLY_REPAIR,
    VARIANT_BASELINE,
)

VALID_BACKEND = ("http", "scripted")
VALID_REPORT_FORMAT = ("table", "structured")

# Pipeline budgets
DEFAULT_SKETCH_ATTEMPTS = 3
DEFAULT_SYNTAX_REPAIRS = 8
DEFAULT_SEMANTIC_REPAIRS = 1
DEFAULT_SAMPLES = 10
DEFAULT_LLM_RETRIES = 3
DEFAULT_COMPILE_TIMEOUT = 120.
DEFAULT_RUN_TIMEOUT = 60.
DEFAULT_GENERATED_CASES = 5

PROMPT_TEMPLATE_VERSION = "v1"

# CLI exit codes
EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_PARSE_FAILURE = 2
EXIT_RETRIEVAL_MISS = 3
EXIT_KB_ERROR = 4
EXIT_TASK_ERROR = 5
EXIT_CONFIG_ERROR = 6
OUTCOME_EXIT_CODES = {
    SUCCESS: 0,
    REPAIR_BUDGET_EXCEEDED: 10,
    SKETCH_INCORRECT: 11,
    FALSE_ACCEPT: 12,
    FALSE_REJECT: 13,
    MIXED_FALSE_ACCEPT_REJECT: 14,
    INFRA_FAILURE: 15,
}
