"""
Unit-tests for benchmark task loading.

"""
from os.path import join
from tempfile import TemporaryDirectory

from hamcrest import (
    assert_that,
    calling,
    contains_exactly,
    empty,
    equal_to,
    has_length,
    has_properties,
    is_,
    is_not,
    raises,
)
from parameterized import parameterized

from zk_coder.errors import TaskError
from zk_coder.interp import Interpreter
from zk_coder.tasks import (
    DEFAULT_TASKS_PATH,
    cross_check,
    load_task,
    load_tasks,
)


PARITY = """task_id: parity
description: Decide whether n is odd.
inputs:
  - {name: n, type: Field}
  - {name: odd, type: Bool, role: solution}
reference_sketch: |
  def verify(engine, n: Field, odd: Bool):
      engine.add(Conditional(odd, 1, 0) == n % 2)
      return engine
accepting:
  - {n: 3, odd: true}
rejecting:
  - {n: 3, odd: false}
"""


def write_task(directory, text, filename="task.yaml"):
    path = join(str(directory), filename)
    with open(path, "w") as stream:
        stream.write(text)
    return path


def test_shipped_tasks_load():
    """Test every shipped task loads in file name order with non-empty suites."""
    tasks = load_tasks()

    assert_that(
        [task.task_id for task in tasks],
        contains_exactly("divmod", "is_sorted", "isqrt", "max_element", "parity", "sudoku_4x4"),
    )
    for task in tasks:
        assert_that(task.accepting_cases, is_not(empty()))
        assert_that(task.rejecting_cases, is_not(empty()))


def test_shipped_suites_agree_with_oracle():
    """Test the reference sketch accepts exactly the accepting cases."""
    for task in load_tasks():
        interpreter = Interpreter(task.program)
        for case in task.suite():
            assert_that(interpreter.evaluate(case.assignment).accepted, is_(case.expects_accept))


def test_sudoku_task_shape():
    """Test vector inputs carry their declared dimensions."""
    task = load_task(join(DEFAULT_TASKS_PATH, "sudoku_4x4.yaml"))

    assert_that(task.inputs[0], has_properties(name="grid", dims=(4, 4)))


def test_suite_order_and_labels(tmp_path):
    """Test the suite lists accepting cases first and labels cases by polarity."""
    task = load_task(write_task(tmp_path, PARITY))

    assert_that([case.label() for case in task.suite()], contains_exactly("accepting case #0", "rejecting case #0"))
    assert_that(task.input_names(), contains_exactly("n", "odd"))


def test_oracle_mismatch(tmp_path):
    """Test a suite case the reference sketch disagrees with raises OracleMismatch."""
    path = write_task(tmp_path, PARITY.replace("{n: 3, odd: false}", "{n: 4, odd: false}"))

    assert_that(calling(load_task).with_args(path), raises(TaskError, "OracleMismatch: parity rejecting case #0"))


def test_empty_suite(tmp_path):
    """Test a task without rejecting cases raises EmptySuite."""
    path = write_task(tmp_path, PARITY.replace("rejecting:\n  - {n: 3, odd: false}\n", "rejecting: []\n"))

    assert_that(calling(load_task).with_args(path), raises(TaskError, "EmptySuite"))


@parameterized.expand([
    ("yaml", "task_id: parity", "task_id: [parity"),
    ("field", "description: Decide whether n is odd.\n", ""),
    ("type", "{name: n, type: Field}", "{name: n, type: Integer}"),
    ("role", "role: solution", "role: witness"),
    ("signature", "{name: odd, type: Bool, role: solution}", "{name: even, type: Bool, role: solution}"),
    ("sketch", "== n % 2", "== m % 2"),
    ("grammar", "return engine", "return"),
    ("assignment", "{n: 3, odd: true}", "{n: 3}"),
])
def test_malformed_tasks(name, old, new):
    """Test inconsistent task files raise Malformed."""
    with TemporaryDirectory() as directory:
        path = write_task(directory, PARITY.replace(old, new))

        assert_that(calling(load_task).with_args(path), raises(TaskError, "Malformed"))


def test_duplicate_task_ids(tmp_path):
    """Test two files with the same task id fail the whole load."""
    write_task(tmp_path, PARITY, "a.yaml")
    write_task(tmp_path, PARITY, "b.yaml")

    assert_that(calling(load_tasks).with_args(str(tmp_path)), raises(TaskError, "duplicate task id parity"))


def test_load_tasks_accepts_single_file(tmp_path):
    """Test a file path loads as a one-task list."""
    assert_that(load_tasks(write_task(tmp_path, PARITY)), has_length(1))


def test_cross_check(tmp_path):
    """Test an external oracle that disagrees with a case polarity is reported."""
    task = load_task(write_task(tmp_path, PARITY + "external_oracle: echo accept\n"))

    disagreements = cross_check(task)

    assert_that([case.label() for case in disagreements], contains_exactly("rejecting case #0"))


def test_cross_check_without_oracle(tmp_path):
    """Test tasks without an external oracle never disagree."""
    assert_that(cross_check(load_task(write_task(tmp_path, PARITY))), is_(equal_to([])))
