"""
Unit-tests for the canonical ZKSL printer.

"""
from hamcrest import assert_that, equal_to, is_
from parameterized import parameterized

from zk_coder.parser import parse_sketch
from zk_coder.printer import print_formula, print_sketch
from zk_coder.syntax import (
    And,
    BoolAtom,
    Not,
    Or,
    Var,
)
from zk_coder.tasks import load_tasks
from zk_coder.tests.fixtures import make_random_sketches
from zk_coder.tests.matchers import matches_sketch


RANDOM_STATE = 42


def test_print_canonical_layout():
    """Test the printer normalizes spacing and indentation."""
    program = parse_sketch(
        "def verify(engine,x:Field,ys:Vec[Field]):\n"
        "  for i in range(0,2):\n"
        "     engine.add(ys[i]==x*2)\n"
        "  return engine\n"
    )

    assert_that(print_sketch(program), is_(equal_to(
        "def verify(engine, x: Field, ys: Vec[Field]):\n"
        "    for i in range(0, 2):\n"
        "        engine.add(ys[i] == x * 2)\n"
        "    return engine\n"
    )))


def test_print_minimal_formula_parentheses():
    """Test connectives are parenthesized only where precedence requires it."""
    p, q, r = BoolAtom(Var("p")), BoolAtom(Var("q")), BoolAtom(Var("r"))

    assert_that(print_formula(And(Or(p, q), r)), is_(equal_to("(p or q) and r")))
    assert_that(print_formula(Or(And(p, q), r)), is_(equal_to("p and q or r")))
    assert_that(print_formula(Not(And(p, q))), is_(equal_to("not (p and q)")))
    assert_that(print_formula(And(p, And(q, r))), is_(equal_to("p and (q and r)")))
    assert_that(print_formula(Or(p, Not(q))), is_(equal_to("p or not q")))


@parameterized.expand([(task.task_id, task.reference_sketch) for task in load_tasks()])
def test_reference_sketches_round_trip(name, source):
    """Test the shipped reference sketches survive printing and re-parsing."""
    program = parse_sketch(source)

    assert_that(parse_sketch(print_sketch(program)), matches_sketch(program))


def test_random_sketches_round_trip():
    """Test parse(print(ast)) == ast for randomly generated sketches."""
    for source in make_random_sketches(1000, random_state=RANDOM_STATE):
        program = parse_sketch(source)
        printed = print_sketch(program)

        assert_that(parse_sketch(printed), matches_sketch(program))
        assert_that(print_sketch(parse_sketch(printed)), is_(equal_to(printed)))
