"""
Unit-tests for compiler diagnostic parsing.

"""
from hamcrest import (
    assert_that,
    contains_exactly,
    contains_string,
    equal_to,
    has_length,
    has_properties,
    is_,
)
from parameterized import parameterized

from zk_coder.constants import (
    STAGE_CONSTRAINT,
    STAGE_LINK,
    STAGE_PARSE,
    STAGE_TYPE,
    STAGE_UNKNOWN,
)
from zk_coder.diagnostics import (
    Diagnostic,
    circom_stage,
    noir_stage,
    parse_diagnostics,
    render_diagnostics,
)


CIRCOM_OUTPUT = """error[P1012]: UnrecognizedToken { token: (61, Token(25, "signal"), 67), expected: [";"] }
   ┌─ "main.circom":4:5
   │
 4 │     signal output out;
   │     ^^^^^^ here

error[T2021]: Undeclared symbol
   ┌─ "main.circom":9:11
   │
 9 │     out <== odd2;
   │             ^^^^ Using unknown symbol

previous errors were found
"""

NOIR_OUTPUT = """error: Expected a ';' separating these two statements but found 'let'
  ┌─ src/main.nr:3:5
  │
3 │     let bit = n % 2;
  │     ---
  │

error: cannot find `odds` in this scope
  ┌─ src/main.nr:4:5
  │
4 │     odds
  │     ----
  │

Aborting due to 2 previous errors
"""


def test_circom_blocks():
    """Test each Circom error block becomes one diagnostic with its location."""
    diagnostics = parse_diagnostics("circom", CIRCOM_OUTPUT)

    assert_that(diagnostics, has_length(2))
    assert_that(diagnostics[0], has_properties(stage=STAGE_PARSE, location=(4, 5)))
    assert_that(diagnostics[1], has_properties(stage=STAGE_TYPE, location=(9, 11), message="Undeclared symbol"))
    assert_that(diagnostics[1].raw, contains_string("Using unknown symbol"))
    assert_that(diagnostics[1].raw, is_(equal_to(diagnostics[1].raw.rstrip())))


def test_noir_blocks():
    """Test Noir error blocks are classified from their message."""
    diagnostics = parse_diagnostics("noir", NOIR_OUTPUT)

    assert_that([diagnostic.stage for diagnostic in diagnostics], contains_exactly(STAGE_PARSE, STAGE_LINK))
    assert_that([diagnostic.location for diagnostic in diagnostics], contains_exactly((3, 5), (4, 5)))


def test_unstructured_output():
    """Test output without error blocks becomes a single Unknown diagnostic."""
    diagnostics = parse_diagnostics("circom", "thread 'main' panicked\nSegmentation fault\n")

    assert_that(diagnostics, contains_exactly(
        has_properties(stage=STAGE_UNKNOWN, message="Segmentation fault", location=None),
    ))


def test_blank_output():
    """Test blank output yields no diagnostics."""
    assert_that(parse_diagnostics("noir", "  \n"), is_(equal_to([])))


@parameterized.expand([
    ("P1014", "The file circomlib/x.circom to be included has not been found", STAGE_LINK),
    ("P1000", "whatever", STAGE_PARSE),
    ("T2011", "Wrong number of arguments", STAGE_TYPE),
    ("T3001", "Non quadratic constraints are not allowed!", STAGE_CONSTRAINT),
    ("CA02", "signal assigned twice", STAGE_CONSTRAINT),
    (None, "Non quadratic constraints are not allowed!", STAGE_CONSTRAINT),
    (None, "Undeclared symbol", STAGE_TYPE),
    (None, "unexpected end of file", STAGE_PARSE),
    (None, "out of memory", STAGE_UNKNOWN),
])
def test_circom_stage(code, message, stage):
    """Test Circom errors are staged by code first and message second."""
    assert_that(circom_stage(code, message), is_(equal_to(stage)))


@parameterized.expand([
    ("could not resolve 'std::hash::poseidon'", STAGE_LINK),
    ("Expected type Field, found type bool", STAGE_TYPE),
    ("Unexpected token '}'", STAGE_PARSE),
    ("Failed constraint", STAGE_CONSTRAINT),
    ("the stars are not aligned", STAGE_UNKNOWN),
])
def test_noir_stage(message, stage):
    """Test Noir errors are staged by message."""
    assert_that(noir_stage(message), is_(equal_to(stage)))


def test_describe_and_render():
    """Test diagnostics describe their location and render their raw text."""
    first = Diagnostic(STAGE_PARSE, "expected ';'", (3, 7), "error: expected ';'")
    second = Diagnostic(STAGE_UNKNOWN, "crash", None, "crash")

    assert_that(first.describe(), is_(equal_to("[Parse] line 3, column 7: expected ';'")))
    assert_that(second.describe(), is_(equal_to("[Unknown] crash")))
    assert_that(render_diagnostics([first, second]), is_(equal_to("error: expected ';'\n\ncrash\n")))
