"""
Benchmark tasks.

A task restates a programming problem as a verification problem: given public
inputs I and a candidate solution S, accept iff S is correct for I. Each task
file carries the input signature, a reference sketch that serves as the
oracle, and an accepting and a rejecting suite. Loading re-evaluates every
suite case on the reference sketch, so a task whose suites disagree with its
oracle never reaches a run.

"""
import json
import subprocess
from dataclasses import dataclass, field
from logging import getLogger
from os import listdir
from os.path import (
    basename,
    dirname,
    isdir,
    join,
)
from typing import Optional, Tuple

import yaml

from zk_coder.checker import check_sketch
from zk_coder.constants import (
    ACCEPT,
    REJECT,
    ROLE_INPUT,
    VALID_ROLE,
)
from zk_coder.errors import AssignmentError, ParseFailure, TaskError
from zk_coder.interp import Interpreter
from zk_coder.parser import parse_sketch
from zk_coder.syntax import SketchType, parse_type


LOG = getLogger(__name__)

DEFAULT_TASKS_PATH = join(dirname(__file__), "data", "tasks")


@dataclass(frozen=True)
class InputSpec:
    """One parameter of a verification problem; `dims` gives the length of each Vec level."""
    name: str
    type: SketchType
    dims: Tuple[int, ...] = ()
    role: str = ROLE_INPUT

    def shape_of(self, value):
        """Lengths of a nested-list value level by level, or None when it is ragged or too shallow."""
        shape = []
        for _ in range(self.type.depth()):
            if not isinstance(value, (list, tuple)):
                return None
            if value and len({len(item) if isinstance(item, (list, tuple)) else -1 for item in value}) > 1:
                return None
            shape.append(len(value))
            value = value[0] if value else []
        return tuple(shape)

    def accepts_shape(self, value):
        shape = self.shape_of(value)
        if shape is None:
            return False
        return not self.dims or shape == self.dims


@dataclass(frozen=True)
class SuiteCase:
    polarity: str
    index: int
    assignment: object

    @property
    def expects_accept(self):
        return self.polarity == ACCEPT

    def label(self):
        return "{} case #{}".format("accepting" if self.expects_accept else "rejecting", self.index)


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    description: str
    inputs: Tuple[InputSpec, ...]
    reference_sketch: str
    program: object = field(compare=False, repr=False)
    accepting_cases: Tuple[object, ...] = ()
    rejecting_cases: Tuple[object, ...] = ()
    external_oracle: Optional[str] = None
    path: Optional[str] = field(default=None, compare=False)

    def suite(self):
        """Every suite case, accepting cases first."""
        return tuple(
            [SuiteCase(ACCEPT, index, case) for index, case in enumerate(self.accepting_cases)]
            + [SuiteCase(REJECT, index, case) for index, case in enumerate(self.rejecting_cases)]
        )

    def input_names(self):
        return tuple(spec.name for spec in self.inputs)


def _malformed(path, reason):
    return TaskError(TaskError.MALFORMED, "{} ({})".format(path, reason))


def _parse_inputs(entries, path):
    if not isinstance(entries, list) or not entries:
        raise _malformed(path, "'inputs' must be a non-empty list")
    inputs = []
    for entry in entries:
        if not isinstance(entry, dict) or "name" not in entry or "type" not in entry:
            raise _malformed(path, "every input needs a name and a type")
        try:
            sketch_type = parse_type(str(entry["type"]))
        except ValueError as error:
            raise _malformed(path, str(error))
        dims = tuple(entry.get("dims") or ())
        if dims and (len(dims) != sketch_type.depth() or any(
            not isinstance(size, int) or size < 0 for size in dims
        )):
            raise _malformed(path, "dims of '{}' do not match type {}".format(entry["name"], sketch_type))
        role = entry.get("role", ROLE_INPUT)
        if role not in VALID_ROLE:
            raise _malformed(path, "role must be one of: {}".format(", ".join(VALID_ROLE)))
        inputs.append(InputSpec(str(entry["name"]), sketch_type, dims, role))
    return tuple(inputs)


def _parse_reference(source, inputs, path):
    try:
        program = parse_sketch(source)
    except ParseFailure as error:
        raise _malformed(path, "reference sketch: {}".format(error))
    report = check_sketch(program)
    if not report.is_empty:
        raise _malformed(path, "reference sketch has {} check violation(s): {}".format(
            len(report),
            "; ".join(violation.message for violation in report),
        ))
    signature = tuple((param.name, param.type) for param in program.params)
    if signature != tuple((spec.name, spec.type) for spec in inputs):
        raise _malformed(path, "reference sketch parameters do not match the declared inputs")
    return program


def _parse_suite(task_id, polarity, cases, inputs, interpreter, path):
    if not cases:
        raise TaskError(TaskError.EMPTY_SUITE, "{} has an empty {} suite".format(
            task_id,
            "accepting" if polarity == ACCEPT else "rejecting",
        ))
    parsed = []
    for index, values in enumerate(cases):
        try:
            assignment = interpreter.assignment(values)
        except AssignmentError as error:
            raise _malformed(path, "case #{}: {}".format(index, error))
        for spec in inputs:
            if spec.type.is_vec and not spec.accepts_shape(assignment.bindings[spec.name]):
                raise _malformed(path, "case #{}: '{}' does not have shape {}".format(index, spec.name, spec.dims))
        verdict = interpreter.evaluate(assignment)
        if verdict.accepted is not (polarity == ACCEPT):
            raise TaskError(TaskError.ORACLE_MISMATCH, "{} {} case #{}: reference sketch gives {}".format(
                task_id,
                "accepting" if polarity == ACCEPT else "rejecting",
                index,
                verdict.describe(),
            ))
        parsed.append(assignment)
    return tuple(parsed)


def load_task(path):
    """
    Load and validate one task file.

    Raises
    ------
    TaskError
        Malformed for an unreadable or inconsistent file, EmptySuite when
        either suite is empty and OracleMismatch when the reference sketch
        disagrees with the polarity of a suite case.

    """
    try:
        with open(path) as stream:
            document = yaml.safe_load(stream)
    except (OSError, yaml.YAMLError) as error:
        raise _malformed(path, str(error))
    if not isinstance(document, dict):
        raise _malformed(path, "top level must be a mapping")
    missing = [key for key in ("task_id", "description", "inputs", "reference_sketch") if key not in document]
    if missing:
        raise _malformed(path, "missing field(s): {}".format(", ".join(missing)))

    task_id = str(document["task_id"])
    inputs = _parse_inputs(document["inputs"], path)
    source = str(document["reference_sketch"])
    program = _parse_reference(source, inputs, path)
    interpreter = Interpreter(program)
    accepting = _parse_suite(task_id, ACCEPT, document.get("accepting"), inputs, interpreter, path)
    rejecting = _parse_suite(task_id, REJECT, document.get("rejecting"), inputs, interpreter, path)

    return TaskSpec(
        task_id=task_id,
        description=" ".join(str(document["description"]).split()),
        inputs=inputs,
        reference_sketch=source,
        program=program,
        accepting_cases=accepting,
        rejecting_cases=rejecting,
        external_oracle=document.get("external_oracle"),
        path=path,
    )


def load_tasks(path=None):
    """
    Load every task file of a directory, or a single task file.

    Loading is atomic: the first inconsistent task aborts the whole load.
    Tasks are returned in file name order.

    """
    path = path or DEFAULT_TASKS_PATH
    if not isdir(path):
        return [load_task(path)]
    tasks = [
        load_task(join(path, filename))
        for filename in sorted(listdir(path))
        if filename.endswith((".yaml", ".yml"))
    ]
    seen = set()
    for task in tasks:
        if task.task_id in seen:
            raise _malformed(basename(task.path), "duplicate task id {}".format(task.task_id))
        seen.add(task.task_id)
    LOG.debug("load_tasks() - loaded %d task(s) from %s", len(tasks), path)
    return tasks


def cross_check(task, timeout=60.):
    """
    Suite cases on which the task's external oracle disagrees with its polarity.

    The oracle command receives one case as a JSON object on standard input
    and prints ``accept`` or ``reject``. Tasks without an external oracle
    yield no disagreements.

    """
    if not task.external_oracle:
        return []
    disagreements = []
    for case in task.suite():
        completed = subprocess.run(
            task.external_oracle,
            shell=True,
            input=json.dumps(case.assignment.serialize()),
            capture_output=True,
            text=True,
            timeout=timeout,
        )
        answer = completed.stdout.strip().lower()
        if answer not in (ACCEPT, REJECT) or (answer == ACCEPT) != case.expects_accept:
            LOG.warning("cross_check() - %s %s: external oracle answered %r", task.task_id, case.label(), answer)
            disagreements.append(case)
    return disagreements
