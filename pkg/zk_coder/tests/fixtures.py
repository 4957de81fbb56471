"""
Unit-test fixtures and factory methods.

"""
from os.path import join

from sklearn.utils import check_random_state

from zk_coder.checker import check_sketch
from zk_coder.config import RunConfig
from zk_coder.constants import (
    ACCEPTED,
    EXECUTION_FAILED,
    REJECTED,
    STAGE_PARSE,
    STAGE_TYPE,
    STAGE_UNKNOWN,
)
from zk_coder.diagnostics import Diagnostic
from zk_coder.errors import AssignmentError, ParseFailure
from zk_coder.interp import Interpreter
from zk_coder.llm import ScriptedBackend, ScriptedResponse
from zk_coder.parser import parse_sketch
from zk_coder.tasks import DEFAULT_TASKS_PATH, load_task
from zk_coder.toolchain import (
    Artifact,
    CompileFail,
    CompileOk,
    RunOutcome,
)


PARITY_ACCEPT_ALL = """def verify(engine, n: Field, odd: Bool):
    engine.add(n == n)
    return engine
"""

PARITY_REJECT_ALL = """def verify(engine, n: Field, odd: Bool):
    engine.add(n != n)
    return engine
"""

PARITY_TRUST_ANSWER = """def verify(engine, n: Field, odd: Bool):
    engine.add(odd)
    return engine
"""

UNPARSEABLE = "this is not a program\n"

RANDOM_PARAMS = (
    ("a", "Field"),
    ("b", "Field"),
    ("c", "Field"),
    ("p", "Bool"),
    ("q", "Bool"),
    ("xs", "Vec[Field]"),
)

# Statements that introduce exactly one violation of the given category into
# a sketch with RANDOM_PARAMS, inserted before its final `return engine`.
MUTATIONS = {
    "UnboundVariable": ["    engine.add(zz == 1)"],
    "UnknownGadget": ["    engine.add(Frobnicate(a) == 1)"],
    "ArityMismatch": ["    engine.add(Conditional(p, a) == 1)"],
    "TypeMismatch": ["    engine.add(p + a == a)"],
    "UnboundedLoop": ["    for kk in range(a):", "        engine.add(kk == kk)"],
    "ShadowedName": ["    a = 1"],
}


def load_sample_task(name):
    """Load one of the shipped benchmark tasks by id."""
    return load_task(join(DEFAULT_TASKS_PATH, "{}.yaml".format(name)))


def make_config(**overrides):
    """Run configuration for scripted runs."""
    return RunConfig(backend="scripted", script_path="script.yaml").with_overrides(**overrides)


def fenced(source, lang="circom"):
    return "```{}\n{}```\n".format(lang, source)


def make_scripted_backend(*answers, **kwargs):
    """Scripted backend answering with `answers` in order."""
    return ScriptedBackend([ScriptedResponse(answer) for answer in answers], **kwargs)


def make_sketch_source(statements, params=RANDOM_PARAMS):
    """Wrap body lines into a `verify` function."""
    header = "def verify(engine{}):".format("".join(", {}: {}".format(name, type_) for name, type_ in params))
    return "\n".join([header] + list(statements) + ["    return engine"]) + "\n"


def mutate(source, category):
    """Insert the statements of MUTATIONS[category] before the final return."""
    lines = source.rstrip("\n").split("\n")
    return "\n".join(lines[:-1] + MUTATIONS[category] + lines[-1:]) + "\n"


class SketchToolchain:
    """
    Toolchain stand-in whose programs are ZKSL sketches.

    Compiling parses and checks the sketch, running a case evaluates it with
    the reference interpreter, so scripted pipeline runs need no external
    compiler.

    """

    def __init__(self):
        self.sketches = {}
        self.compile_calls = 0

    def compile(self, program, workspace):
        self.compile_calls += 1
        try:
            sketch = parse_sketch(program.source)
        except ParseFailure as error:
            return CompileFail((Diagnostic(STAGE_PARSE, error.message, (error.line, error.column), str(error)),))
        report = check_sketch(sketch)
        if not report.is_empty:
            return CompileFail(tuple(
                Diagnostic(STAGE_TYPE, violation.message, None, violation.category)
                for violation in report
            ))
        path = join(workspace, "main.zksl")
        self.sketches[path] = sketch
        return CompileOk(Artifact(program.target, workspace, path, program))

    def run_case(self, artifact, inputs, target=None):
        try:
            verdict = Interpreter(self.sketches[artifact.path]).evaluate(inputs)
        except AssignmentError as error:
            return RunOutcome(EXECUTION_FAILED, 0., Diagnostic(STAGE_UNKNOWN, str(error), None, ""))
        if verdict.is_error:
            return RunOutcome(EXECUTION_FAILED, 0., Diagnostic(STAGE_UNKNOWN, str(verdict.error), None, ""))
        return RunOutcome(ACCEPTED if verdict.accepted else REJECTED, 0.)


class SketchGenerator:
    """
    Random well-formed sketches over RANDOM_PARAMS.

    Vector indices stay below 4, so the sketches evaluate on any assignment
    with a vector of at least four elements.

    """

    RELOPS = ("==", "!=", "<", "<=", ">", ">=")

    def __init__(self, random_state=None, max_depth=3):
        self.random_state = check_random_state(random_state)
        self.max_depth = max_depth
        self.counter = 0

    def choice(self, options):
        return options[self.random_state.randint(len(options))]

    def fresh(self, prefix):
        self.counter += 1
        return "{}{}".format(prefix, self.counter)

    def field(self, scope, indices, depth=0):
        kinds = ["int", "var", "index"]
        if depth < self.max_depth:
            kinds += ["binop", "paren", "neg", "select"]
        kind = self.choice(kinds)
        if kind == "int":
            return str(self.random_state.randint(0, 10))
        if kind == "var":
            return self.choice(scope)
        if kind == "index":
            return "xs[{}]".format(self.choice(indices + [str(self.random_state.randint(0, 4))]))
        if kind == "binop":
            return "{} {} {}".format(
                self.field(scope, indices, depth + 1),
                self.choice(("+", "-", "*")),
                self.field(scope, indices, depth + 1),
            )
        if kind == "paren":
            return "({})".format(self.field(scope, indices, depth + 1))
        if kind == "neg":
            return "-{}".format(self.field(scope, indices, self.max_depth))
        return "Conditional({}, {}, {})".format(
            self.choice(("p", "q", "True", "False")),
            self.field(scope, indices, depth + 1),
            self.field(scope, indices, depth + 1),
        )

    def formula(self, scope, indices, depth=0):
        kinds = ["relation", "relation", "atom"]
        if depth < self.max_depth:
            kinds += ["not", "and", "or", "all", "any"]
        kind = self.choice(kinds)
        if kind == "relation":
            return "{} {} {}".format(
                self.field(scope, indices, depth + 1),
                self.choice(self.RELOPS),
                self.field(scope, indices, depth + 1),
            )
        if kind == "atom":
            return self.choice(("p", "q"))
        if kind == "not":
            return "not ({})".format(self.formula(scope, indices, depth + 1))
        if kind in ("and", "or"):
            template = self.choice(("{} {} {}", "({}) {} ({})"))
            return template.format(
                self.formula(scope, indices, depth + 1),
                kind,
                self.formula(scope, indices, depth + 1),
            )
        var = self.fresh("i")
        return "{}({} for {} in range({}))".format(
            kind,
            self.formula(scope + [var], indices + [var], depth + 1),
            var,
            self.random_state.randint(1, 5),
        )

    def block(self, scope, indices, depth, lines, top_level=False):
        for _ in range(self.random_state.randint(1, 4)):
            kinds = ["add", "add"]
            if depth < 3:
                kinds += ["for", "if"]
            if top_level:
                kinds.append("assign")
            kind = self.choice(kinds)
            prefix = "    " * depth
            if kind == "add":
                lines.append("{}engine.add({})".format(prefix, self.formula(scope, indices)))
            elif kind == "assign":
                name = self.fresh("t")
                lines.append("{}{} = {}".format(prefix, name, self.field(scope, indices)))
                scope = scope + [name]
            elif kind == "for":
                var = self.fresh("i")
                lines.append("{}for {} in range({}):".format(prefix, var, self.random_state.randint(1, 5)))
                self.block(scope + [var], indices + [var], depth + 1, lines)
            else:
                lines.append("{}if {}:".format(prefix, self.formula(scope, indices)))
                self.block(scope, indices, depth + 1, lines)
                if self.random_state.randint(2):
                    lines.append("{}else:".format(prefix))
                    self.block(scope, indices, depth + 1, lines)
        return lines

    def sketch(self):
        """Source text of one random sketch."""
        self.counter = 0
        lines = self.block(["a", "b", "c"], [], 1, [], top_level=True)
        return make_sketch_source(lines)


def make_random_sketches(n, random_state=None):
    generator = SketchGenerator(random_state)
    return [generator.sketch() for _ in range(n)]


def make_random_assignment(random_state=None):
    """Assignment for RANDOM_PARAMS with small values."""
    random_state = check_random_state(random_state)
    return {
        "a": int(random_state.randint(-5, 6)),
        "b": int(random_state.randint(-5, 6)),
        "c": int(random_state.randint(-5, 6)),
        "p": bool(random_state.randint(2)),
        "q": bool(random_state.randint(2)),
        "xs": [int(value) for value in random_state.randint(-5, 6, size=4)],
    }
