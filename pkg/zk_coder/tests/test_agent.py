"""
Unit-tests for the generation pipeline.

Runs use a scripted backend and a toolchain stand-in that compiles and runs
ZKSL sketches, so candidate "programs" below are sketches in a circom fence.

"""
from hamcrest import (
    assert_that,
    calling,
    contains_exactly,
    contains_string,
    equal_to,
    has_entries,
    has_length,
    instance_of,
    is_,
    less_than_or_equal_to,
    raises,
    starts_with,
)
from parameterized import parameterized
from sklearn.utils import check_random_state

from zk_coder.agent import (
    CaseResult,
    CompiledProgram,
    CompileLoopFailure,
    PipelineRun,
    SemanticFailure,
    SemanticSuccess,
    SketchStageFailure,
    TerminalOutcome,
    codegen_stage,
    failure_class,
    run_pipeline,
    semantic_stage,
    sketch_stage,
)
from zk_coder.constants import (
    ACCEPT,
    ACCEPTED,
    CODE_GEN,
    COMPILE_LOOP,
    EXTRACT,
    FALSE_ACCEPT,
    FALSE_REJECT,
    INFRA_FAILURE,
    MIXED_FALSE_ACCEPT_REJECT,
    REJECT,
    REJECTED,
    REPAIR_BUDGET_EXCEEDED,
    RETRIEVE,
    SEMANTIC_CHECK,
    SEMANTIC_REPAIR,
    SKETCH_CHECK_LOOP,
    SKETCH_GEN,
    SKETCH_INCORRECT,
    SUCCESS,
    TERMINAL,
    TEST_GEN,
)
from zk_coder.errors import ParseFailure
from zk_coder.graph import is_valid_path
from zk_coder.kb import load_kb
from zk_coder.tasks import SuiteCase
from zk_coder.tests.fixtures import (
    PARITY_ACCEPT_ALL,
    PARITY_REJECT_ALL,
    PARITY_TRUST_ANSWER,
    UNPARSEABLE,
    SketchToolchain,
    fenced,
    load_sample_task,
    make_config,
    make_scripted_backend,
    mutate,
)
from zk_coder.tests.matchers import ends_in, matches_sketch
from zk_coder.toolchain import RunOutcome
from zk_coder.transcript import (
    COMPILE_RESULT,
    GENERATED_CASES,
    LLM_REQUEST,
    OUTCOME,
    SKETCH_REPORT,
)


RANDOM_STATE = 11

N_SCRIPTS = 500

KB = load_kb()

TASK = load_sample_task("parity")

SKETCH = fenced(TASK.reference_sketch, "zksl")

PROGRAM = fenced(TASK.reference_sketch)

BROKEN = fenced(UNPARSEABLE)


def execute(*answers, **overrides):
    backend = make_scripted_backend(*answers)
    return run_pipeline(TASK, make_config(**overrides), backend, KB, toolchain=SketchToolchain())


def case_result(polarity, verdict):
    return CaseResult(SuiteCase(polarity, 0, None), RunOutcome(verdict, 0.))


def test_success_after_one_syntax_repair():
    """Test a compile failure is repaired within budget and the run succeeds."""
    run = execute(SKETCH, BROKEN, PROGRAM)

    assert_that(run, ends_in(SUCCESS))
    assert_that(run.syntax_budget_used, is_(equal_to(1)))
    assert_that(run.semantic_budget_used, is_(equal_to(0)))
    assert_that(run.sketch_correct, is_(True))
    assert_that(run.llm_calls, is_(equal_to(3)))
    assert_that(run.primitives, contains_exactly(
        "Equal(Field,Field)#0",
        "Conditional(Bool,Field,Field)#1",
        "Modulo(Field,Field)#2",
    ))
    assert_that(run.stages, contains_exactly(
        SKETCH_GEN,
        SKETCH_CHECK_LOOP,
        EXTRACT,
        RETRIEVE,
        CODE_GEN,
        COMPILE_LOOP,
        COMPILE_LOOP,
        TEST_GEN,
        SEMANTIC_CHECK,
        TERMINAL,
    ))


def test_repair_budget_exceeded():
    """Test a program that never compiles exhausts the syntax budget."""
    backend = make_scripted_backend(SKETCH, BROKEN, repeat_last=True)
    toolchain = SketchToolchain()

    run = run_pipeline(TASK, make_config(), backend, KB, toolchain=toolchain)

    assert_that(run, ends_in(REPAIR_BUDGET_EXCEEDED))
    assert_that(run.compiled, is_(False))
    assert_that(run.syntax_budget_used, is_(equal_to(8)))
    assert_that(run.llm_calls, is_(equal_to(10)))
    assert_that(toolchain.compile_calls, is_(equal_to(9)))
    assert_that(run.case_results, is_(equal_to(())))


@parameterized.expand([(0,), (1,), (5,), (8,), (9,), (12,)])
def test_syntax_budget_is_respected(broken):
    """Test the syntax budget bounds the number of repair rounds."""
    run = execute(SKETCH, *([BROKEN] * broken + [PROGRAM]))

    if broken <= 8:
        assert_that(run, ends_in(SUCCESS))
        assert_that(run.syntax_budget_used, is_(equal_to(broken)))
    else:
        assert_that(run, ends_in(REPAIR_BUDGET_EXCEEDED))
        assert_that(run.syntax_budget_used, is_(equal_to(8)))


def test_semantic_repair_needs_a_compile_attempt():
    """Test no semantic repair is requested once every compile attempt is spent."""
    toolchain = SketchToolchain()
    backend = make_scripted_backend(SKETCH, *([BROKEN] * 8 + [fenced(PARITY_TRUST_ANSWER), PROGRAM]))

    run = run_pipeline(TASK, make_config(), backend, KB, toolchain=toolchain)

    assert_that(run, ends_in(MIXED_FALSE_ACCEPT_REJECT))
    assert_that(toolchain.compile_calls, is_(equal_to(9)))
    assert_that(run.semantic_budget_used, is_(equal_to(0)))
    assert_that(run.llm_calls, is_(equal_to(10)))


def random_script(random_state):
    """Answers for one run: failed sketches, the sketch, then broken, wrong or correct programs."""
    answers = [fenced(UNPARSEABLE, "zksl")] * random_state.randint(0, 4) + [SKETCH]
    choices = (BROKEN, PROGRAM, fenced(PARITY_ACCEPT_ALL), fenced(PARITY_REJECT_ALL), fenced(PARITY_TRUST_ANSWER))
    picks = random_state.randint(len(choices), size=random_state.randint(1, 16))
    return answers + [choices[pick] for pick in picks]


def test_budgets_hold_on_random_scripts():
    """Test random scripts never exceed 1+8 compile attempts or one semantic repair."""
    random_state = check_random_state(RANDOM_STATE)
    for _ in range(N_SCRIPTS):
        toolchain = SketchToolchain()
        backend = make_scripted_backend(*random_script(random_state), repeat_last=True)

        run = run_pipeline(TASK, make_config(), backend, KB, toolchain=toolchain)

        assert_that(run.is_finished, is_(True))
        assert_that(toolchain.compile_calls, is_(less_than_or_equal_to(9)))
        assert_that(run.transcript.of_kind(COMPILE_RESULT), has_length(toolchain.compile_calls))
        assert_that(run.syntax_budget_used, is_(less_than_or_equal_to(8)))
        assert_that(run.semantic_budget_used, is_(less_than_or_equal_to(1)))
        assert_that(run.llm_calls, is_(less_than_or_equal_to(run.sketch_attempts + 1 + 8 + 1)))
        assert_that(is_valid_path(run.stages), is_(True))


@parameterized.expand([
    ("accept_all", PARITY_ACCEPT_ALL, FALSE_ACCEPT),
    ("reject_all", PARITY_REJECT_ALL, FALSE_REJECT),
    ("trust_answer", PARITY_TRUST_ANSWER, MIXED_FALSE_ACCEPT_REJECT),
])
def test_semantic_failures(name, program, kind):
    """Test wrong programs are classified by the direction of their errors after one repair."""
    run = execute(SKETCH, fenced(program), fenced(program))

    assert_that(run, ends_in(kind))
    assert_that(run.semantic_budget_used, is_(equal_to(1)))
    assert_that(run.llm_calls, is_(equal_to(3)))
    assert_that(run.stages[-3:], contains_exactly(SEMANTIC_CHECK, SEMANTIC_REPAIR, TERMINAL))


def test_semantic_repair_fixes_program():
    """Test a failing program repaired on its counterexamples ends in success."""
    run = execute(SKETCH, fenced(PARITY_TRUST_ANSWER), PROGRAM)

    assert_that(run, ends_in(SUCCESS))
    assert_that(run.semantic_budget_used, is_(equal_to(1)))
    request = run.transcript.of_kind(LLM_REQUEST)[-1].payload
    assert_that(request["messages"][-1]["content"], contains_string("expected accept, observed reject"))


def test_no_semantic_repair_variant():
    """Test the no-semantic-repair variant stops after the first failing suite run."""
    run = execute(SKETCH, fenced(PARITY_ACCEPT_ALL), variant="no-semantic-repair")

    assert_that(run, ends_in(FALSE_ACCEPT))
    assert_that(run.semantic_budget_used, is_(equal_to(0)))
    assert_that(run.llm_calls, is_(equal_to(2)))


def test_sketch_incorrect_takes_precedence():
    """Test a wrong sketch is blamed before the direction of the program's errors."""
    run = execute(fenced(PARITY_ACCEPT_ALL, "zksl"), fenced(PARITY_ACCEPT_ALL), fenced(PARITY_ACCEPT_ALL))

    assert_that(run, ends_in(SKETCH_INCORRECT))
    assert_that(run.sketch_correct, is_(False))


def test_sketch_feedback_loop():
    """Test checker violations are fed back until the sketch is well-formed."""
    bad = fenced(mutate(TASK.reference_sketch, "UnboundVariable"), "zksl")

    run = execute(bad, SKETCH, PROGRAM)

    assert_that(run, ends_in(SUCCESS))
    assert_that(run.sketch_attempts, is_(equal_to(2)))
    assert_that(run.transcript.of_kind(SKETCH_REPORT), has_length(2))
    feedback = run.transcript.of_kind(LLM_REQUEST)[1].payload["messages"][-1]["content"]
    assert_that(feedback, contains_string("[UnboundVariable]"))


def test_sketch_stage_failure_still_generates_code():
    """Test a sketch that never checks cleanly still reaches code generation without hints."""
    unparseable = fenced(UNPARSEABLE, "zksl")

    run = execute(unparseable, unparseable, unparseable, PROGRAM)

    assert_that(run, ends_in(SUCCESS))
    assert_that(run.sketch_attempts, is_(equal_to(3)))
    assert_that(run.sketch_correct, is_(False))
    assert_that(run.stages[:5], contains_exactly(
        SKETCH_GEN,
        SKETCH_CHECK_LOOP,
        SKETCH_CHECK_LOOP,
        SKETCH_CHECK_LOOP,
        CODE_GEN,
    ))


def test_no_sketch_variant_starts_at_code_generation():
    """Test variants without a sketch stage enter the pipeline at code generation."""
    run = execute(PROGRAM, variant="no-sketch")

    assert_that(run, ends_in(SUCCESS))
    assert_that(run.stages[0], is_(equal_to(CODE_GEN)))
    assert_that(run.sketch_correct, is_(None))
    prompt = run.transcript.of_kind(LLM_REQUEST)[0].payload["messages"][-1]["content"]
    assert_that(prompt, contains_string("Distinct*"))


def test_generated_tests_are_validated_against_the_oracle():
    """Test proposed cases the reference sketch disagrees with are discarded."""
    proposal = fenced(
        "accepting:\n"
        "  - {n: 5, odd: true}\n"
        "  - {n: 5, odd: false}\n"
        "rejecting:\n"
        "  - {n: 4, odd: true}\n",
        "yaml",
    )

    run = execute(SKETCH, PROGRAM, proposal, generate_tests=True)

    assert_that(run, ends_in(SUCCESS))
    event = run.transcript.of_kind(GENERATED_CASES)[0]
    assert_that(event.payload, has_entries(source="generated", count=2, discarded=1))
    assert_that(run.case_results, has_length(len(TASK.suite())))


def test_infrastructure_failure():
    """Test transport errors end the run with InfraFailure instead of raising."""
    run = execute()

    assert_that(run, ends_in(INFRA_FAILURE))
    assert_that(run.outcome.detail, starts_with("LlmTransportError"))
    assert_that(run.stages, contains_exactly(SKETCH_GEN, TERMINAL))


class UnreadableWitnessToolchain(SketchToolchain):

    def run_case(self, artifact, inputs, target=None):
        raise ValueError("case-1/witness.wtns lacks a header or a witness section")


def test_unexpected_toolchain_error_ends_the_run():
    """Test an unexpected exception while running cases ends the run with InfraFailure."""
    backend = make_scripted_backend(SKETCH, PROGRAM)

    run = run_pipeline(TASK, make_config(), backend, KB, toolchain=UnreadableWitnessToolchain())

    assert_that(run, ends_in(INFRA_FAILURE))
    assert_that(run.outcome.detail, starts_with("ValueError"))
    assert_that(run.compiled, is_(True))
    assert_that(is_valid_path(run.stages), is_(True))
    assert_that(run.transcript.of_kind(OUTCOME), has_length(1))


def test_runs_are_reproducible():
    """Test identical scripted runs produce identical transcripts apart from timestamps."""
    first = execute(SKETCH, BROKEN, PROGRAM)
    second = execute(SKETCH, BROKEN, PROGRAM)

    assert_that(first.transcript.deterministic_lines(), is_(equal_to(second.transcript.deterministic_lines())))
    assert_that(first.summary(), is_(equal_to(second.summary())))


def test_stage_paths_are_valid():
    """Test every scenario walks the stage graph from an entry stage to Terminal."""
    scenarios = [
        execute(SKETCH, BROKEN, PROGRAM),
        execute(SKETCH, fenced(PARITY_TRUST_ANSWER), fenced(PARITY_TRUST_ANSWER)),
        execute(SKETCH, fenced(PARITY_TRUST_ANSWER), BROKEN, PROGRAM),
        execute(PROGRAM, variant="baseline"),
        execute(),
    ]
    for run in scenarios:
        assert_that(is_valid_path(run.stages), is_(True))
        assert_that(run.transcript.of_kind(OUTCOME), has_length(1))


def test_summary():
    """Test the run summary reports outcome and budgets."""
    run = execute(SKETCH, PROGRAM)

    assert_that(run.summary(), has_entries(
        run_id="parity/sample-0",
        outcome=SUCCESS,
        passed=True,
        syntax_budget_used=0,
        llm_calls=2,
    ))
    assert_that(run.total_tokens, is_(equal_to(run.prompt_tokens + run.completion_tokens)))


@parameterized.expand([
    ("uncompiled", False, True, [], REPAIR_BUDGET_EXCEEDED),
    ("passed", True, True, [(ACCEPT, ACCEPTED), (REJECT, REJECTED)], None),
    ("sketch", True, False, [(REJECT, ACCEPTED)], SKETCH_INCORRECT),
    ("false_accept", True, None, [(ACCEPT, ACCEPTED), (REJECT, ACCEPTED)], FALSE_ACCEPT),
    ("false_reject", True, True, [(ACCEPT, REJECTED), (REJECT, REJECTED)], FALSE_REJECT),
    ("mixed", True, True, [(ACCEPT, REJECTED), (REJECT, ACCEPTED)], MIXED_FALSE_ACCEPT_REJECT),
    ("sketch_but_passed", True, False, [(ACCEPT, ACCEPTED)], None),
])
def test_failure_class(name, compiled, sketch_correct, verdicts, expected):
    """Test failure classes apply in precedence order."""
    results = [case_result(polarity, verdict) for polarity, verdict in verdicts]

    assert_that(failure_class(compiled, sketch_correct, results), is_(equal_to(expected)))


def test_terminal_outcome():
    """Test outcomes validate their kind and describe their detail."""
    assert_that(TerminalOutcome(INFRA_FAILURE, "boom").describe(), is_(equal_to("InfraFailure(boom)")))
    assert_that(TerminalOutcome(SUCCESS).is_success, is_(True))
    assert_that(calling(TerminalOutcome).with_args("Meh"), raises(ValueError, "'kind' must be set"))


def test_illegal_stage_transition():
    """Test runs refuse moves the stage graph does not allow."""
    run = PipelineRun("parity", "circom", "full", "parity/sample-0")
    run.advance(SKETCH_GEN)

    assert_that(calling(run.advance).with_args(TEST_GEN), raises(ValueError, "SketchGen -> TestGen"))


def test_standalone_stages(tmp_path):
    """Test the stage functions run on their own with the shared toolchain."""
    cfg = make_config()
    toolchain = SketchToolchain()

    sketch = sketch_stage(TASK, make_scripted_backend(SKETCH), cfg)
    assert_that(sketch, matches_sketch(TASK.program))

    compiled = codegen_stage(
        sketch, "", TASK, make_scripted_backend(fenced(PARITY_TRUST_ANSWER)), toolchain, cfg, str(tmp_path / "codegen"),
    )
    assert_that(compiled, instance_of(CompiledProgram))

    failed = semantic_stage(
        compiled, TASK, make_scripted_backend(BROKEN), toolchain, cfg.with_overrides(syntax_repairs=0),
        str(tmp_path / "semantic"),
    )
    assert_that(failed, instance_of(SemanticFailure))
    assert_that(failed.program, is_(compiled))

    repaired = semantic_stage(compiled, TASK, make_scripted_backend(PROGRAM), toolchain, cfg, str(tmp_path / "repair"))
    assert_that(repaired, instance_of(SemanticSuccess))
    assert_that(repaired.results, has_length(len(TASK.suite())))


def test_standalone_stage_failures(tmp_path):
    """Test the stage functions return their failure values."""
    cfg = make_config(sketch_attempts=1, syntax_repairs=1)

    failure = sketch_stage(TASK, make_scripted_backend(fenced(UNPARSEABLE, "zksl")), cfg)
    assert_that(failure, instance_of(SketchStageFailure))
    assert_that(failure.parse_error, instance_of(ParseFailure))

    result = codegen_stage(
        None, "", TASK, make_scripted_backend(BROKEN, BROKEN), SketchToolchain(), cfg, str(tmp_path),
    )
    assert_that(result, instance_of(CompileLoopFailure))
    assert_that(result.diagnostics, has_length(2))
