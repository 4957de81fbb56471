"""
The sketch, retrieve, generate, compile, test and repair pipeline.

A run formulates the task as a ZKSL sketch (with checker feedback), extracts
its constraint primitives, retrieves one library hint per primitive and asks
the model for a program, which is then compiled and tested under fixed repair
budgets. Every prompt, answer, diagnostic and case verdict is recorded in the
run's transcript.

"""
import shutil
from dataclasses import dataclass, field
from os import makedirs
from os.path import join
from tempfile import mkdtemp
from typing import List, Optional, Tuple

import yaml

from zk_coder.checker import check_sketch, render_check_feedback
from zk_coder.constants import (
    ACCEPT,
    CODE_GEN,
    COMPILE_LOOP,
    EXTRACT,
    FALSE_ACCEPT,
    FALSE_REJECT,
    INFRA_FAILURE,
    MIXED_FALSE_ACCEPT_REJECT,
    REJECT,
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
    VALID_OUTCOME,
)
from zk_coder.decorators import logger
from zk_coder.diagnostics import render_diagnostics
from zk_coder.errors import (
    AssignmentError,
    ExtractError,
    ParseFailure,
    ZkCoderError,
)
from zk_coder.extract import extract
from zk_coder.graph import can_transition
from zk_coder.interp import Interpreter
from zk_coder.kb import catalog_hints, render_hints, retrieve
from zk_coder.llm import (
    ROLE_ASSISTANT,
    ROLE_SYSTEM,
    ROLE_USER,
    LlmRequest,
)
from zk_coder.parser import parse_sketch
from zk_coder.printer import print_sketch
from zk_coder.prompts import (
    FENCES,
    TARGET_NAMES,
    PromptLibrary,
    convention_text,
    counterexample_text,
    extract_code,
    gadget_list,
    signature_text,
)
from zk_coder.tasks import SuiteCase
from zk_coder.toolchain import CandidateProgram, Toolchain
from zk_coder.transcript import (
    CASE_RESULT,
    COMPILE_RESULT,
    DIAGNOSTIC,
    ERROR,
    GENERATED_CASES,
    HINTS,
    LLM_REQUEST,
    LLM_RESPONSE,
    OUTCOME,
    PRIMITIVES,
    PROMPT_VERSION,
    SKETCH_REPORT,
    SKETCH_VERDICT,
    STAGE,
    Transcript,
)


PARSE_FAILURE_REMEDY = "rewrite the sketch so that it follows the ZKSL grammar"


@dataclass(frozen=True)
class TerminalOutcome:
    """How a run ended. `detail` explains infrastructure failures."""
    kind: str
    detail: Optional[str] = None

    def __post_init__(self):
        if self.kind not in VALID_OUTCOME:
            raise ValueError("'kind' must be set to one of: {}.".format(", ".join(VALID_OUTCOME)))

    @property
    def is_success(self):
        return self.kind == SUCCESS

    def describe(self):
        return self.kind if self.detail is None else "{}({})".format(self.kind, self.detail)


@dataclass(frozen=True)
class CaseResult:
    """Verdict of a compiled candidate on one suite case."""
    case: SuiteCase
    outcome: object

    @property
    def passed(self):
        return self.outcome.is_accepted == self.case.expects_accept

    @property
    def false_accept(self):
        return not self.case.expects_accept and self.outcome.is_accepted

    @property
    def false_reject(self):
        return self.case.expects_accept and not self.outcome.is_accepted


@dataclass(frozen=True)
class SketchStageFailure:
    """The sketch checker still objected after the last attempt."""
    report: Optional[object]
    source: str
    parse_error: Optional[ParseFailure] = None


@dataclass(frozen=True)
class CompiledProgram:
    program: CandidateProgram
    artifact: object


@dataclass(frozen=True)
class CompileLoopFailure:
    """No compilable program within the syntax repair budget; one diagnostics tuple per attempt."""
    diagnostics: Tuple[Tuple[object, ...], ...]
    program: CandidateProgram


@dataclass(frozen=True)
class SemanticSuccess:
    results: Tuple[CaseResult, ...]
    program: CompiledProgram


@dataclass(frozen=True)
class SemanticFailure:
    results: Tuple[CaseResult, ...]
    program: CompiledProgram


def failure_class(compiled, sketch_correct, case_results):
    """
    Failure class of a finished run, applied in precedence order.

    Returns
    -------
    str or None
        None when the run succeeded: it compiled and passed every case.

    """
    if not compiled:
        return REPAIR_BUDGET_EXCEEDED
    failing = [result for result in case_results if not result.passed]
    if not failing and case_results:
        return None
    if sketch_correct is False:
        return SKETCH_INCORRECT
    false_accepts = any(result.false_accept for result in failing)
    false_rejects = any(result.false_reject for result in failing)
    if false_accepts and false_rejects:
        return MIXED_FALSE_ACCEPT_REJECT
    if false_accepts:
        return FALSE_ACCEPT
    return FALSE_REJECT


@dataclass
class PipelineRun:
    """
    State and record of one pipeline run.

    `stages` lists every stage entered, in order; `sketch_correct` is None
    when the variant has no sketch stage or the run ended before the sketch
    could be judged.

    """
    task_id: str
    target: str
    variant: str
    run_id: str
    uses_sketch: bool = True
    stage: Optional[str] = None
    stages: List[str] = field(default_factory=list)
    transcript: Transcript = field(default_factory=Transcript)
    sketch_attempts: int = 0
    syntax_budget_used: int = 0
    semantic_budget_used: int = 0
    sketch: Optional[str] = None
    sketch_correct: Optional[bool] = None
    primitives: Tuple[str, ...] = ()
    program: Optional[str] = None
    compiled: bool = False
    case_results: Tuple[CaseResult, ...] = ()
    llm_calls: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    outcome: Optional[TerminalOutcome] = None

    def advance(self, stage):
        """
        Enter `stage`.

        Raises
        ------
        ValueError
            If the stage graph has no edge from the current stage to `stage`.

        """
        if not can_transition(self.stage, stage):
            raise ValueError("illegal stage transition {} -> {}".format(self.stage, stage))
        self.stage = stage
        self.stages.append(stage)
        self.transcript.record(stage, STAGE, name=stage)

    @property
    def total_tokens(self):
        return self.prompt_tokens + self.completion_tokens

    @property
    def is_finished(self):
        return self.stage == TERMINAL and self.outcome is not None

    @property
    def passed(self):
        return self.compiled and bool(self.case_results) and all(result.passed for result in self.case_results)

    def finish(self, outcome):
        self.advance(TERMINAL)
        self.outcome = outcome
        self.transcript.record(
            TERMINAL,
            OUTCOME,
            kind=outcome.kind,
            detail=outcome.detail,
            sketch_correct=self.sketch_correct,
            compiled=self.compiled,
            syntax_budget_used=self.syntax_budget_used,
            semantic_budget_used=self.semantic_budget_used,
            llm_calls=self.llm_calls,
            prompt_tokens=self.prompt_tokens,
            completion_tokens=self.completion_tokens,
        )
        return self

    def summary(self):
        return {
            "run_id": self.run_id,
            "task_id": self.task_id,
            "target": self.target,
            "variant": self.variant,
            "outcome": self.outcome.kind if self.outcome else None,
            "detail": self.outcome.detail if self.outcome else None,
            "sketch_correct": self.sketch_correct,
            "compiled": self.compiled,
            "passed": self.passed,
            "syntax_budget_used": self.syntax_budget_used,
            "semantic_budget_used": self.semantic_budget_used,
            "llm_calls": self.llm_calls,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
        }


def _parse_feedback(error):
    return "1. [ParseFailure] line {}, column {}: {} (in {}). Fix: {}.\n".format(
        error.line,
        error.column,
        error.message,
        error.production,
        PARSE_FAILURE_REMEDY,
    )


@logger
class Pipeline:
    """
    Drives one :class:`PipelineRun` through the stage graph.

    Parameters
    ----------
    task : TaskSpec
    cfg : RunConfig
    session : LLM session
        Anything with a ``complete(LlmRequest) -> LlmResponse`` method.
    kb : KnowledgeBase
    toolchain : Toolchain
    prompts : PromptLibrary
    run : PipelineRun, optional
    workspace : str, optional
        Directory holding one sub-directory per compile attempt.

    """

    def __init__(self, task, cfg, session, kb, toolchain, prompts, run=None, workspace=None):
        self.task = task
        self.cfg = cfg
        self.session = session
        self.kb = kb
        self.toolchain = toolchain
        self.prompts = prompts
        self.run = run or PipelineRun(
            task.task_id,
            cfg.target,
            cfg.variant,
            "{}/sample-0".format(task.task_id),
            uses_sketch=cfg.uses_sketch,
        )
        self.workspace = workspace
        self.compile_attempts = 0
        self.codegen_messages = []

    @property
    def languages(self):
        return (FENCES[self.cfg.target], self.cfg.target)

    def system_message(self):
        return (ROLE_SYSTEM, self.prompts.render("system", target_name=TARGET_NAMES[self.cfg.target]))

    def ask(self, messages, stage=None):
        """Send the conversation, record both sides and append the answer to `messages`."""
        stage = stage or self.run.stage
        request = LlmRequest(tuple(messages), self.cfg.temperature, self.cfg.max_tokens)
        self.run.transcript.record(stage, LLM_REQUEST, digest=request.digest(), **request.serialize())
        response = self.session.complete(request)
        self.run.llm_calls += 1
        self.run.prompt_tokens += response.prompt_tokens
        self.run.completion_tokens += response.completion_tokens
        self.run.transcript.record(stage, LLM_RESPONSE, **response.serialize())
        messages.append((ROLE_ASSISTANT, response.content))
        return response.content

    def sketch_stage(self):
        """
        Ask for a sketch and feed checker reports back until it is well-formed.

        Returns
        -------
        SketchProgram or SketchStageFailure

        """
        run = self.run
        run.advance(SKETCH_GEN)
        messages = [
            self.system_message(),
            (ROLE_USER, self.prompts.render(
                "sketch",
                description=self.task.description,
                signature=signature_text(self.task.inputs),
                gadgets=gadget_list(),
            )),
        ]
        source, report, parse_error = "", None, None
        for attempt in range(self.cfg.sketch_attempts):
            answer = self.ask(messages)
            run.sketch_attempts += 1
            run.advance(SKETCH_CHECK_LOOP)
            source = extract_code(answer, ("zksl", "python"))
            report, parse_error = None, None
            try:
                program = parse_sketch(source)
            except ParseFailure as error:
                parse_error = error
                feedback = _parse_feedback(error)
                run.transcript.record(run.stage, SKETCH_REPORT, attempt=attempt, parse_error=str(error))
            else:
                report = check_sketch(program)
                run.transcript.record(
                    run.stage,
                    SKETCH_REPORT,
                    attempt=attempt,
                    violations=[
                        {"category": violation.category, "message": violation.message, "at": violation.location()}
                        for violation in report
                    ],
                )
                if report.is_empty:
                    run.sketch = source
                    self.logger.debug("sketch_stage() - well-formed sketch after %d attempt(s)", attempt + 1)
                    return program
                feedback = render_check_feedback(report)
            if attempt + 1 < self.cfg.sketch_attempts:
                messages.append((ROLE_USER, self.prompts.render("sketch_feedback", feedback=feedback)))
        self.logger.debug("sketch_stage() - no well-formed sketch after %d attempt(s)", self.cfg.sketch_attempts)
        run.sketch = source
        return SketchStageFailure(report, source, parse_error)

    def judge_sketch(self, program):
        """Run the task suites through the sketch; True iff every verdict matches its polarity."""
        interpreter = Interpreter(program)
        cases = []
        correct = True
        for case in self.task.suite():
            try:
                verdict = interpreter.evaluate(case.assignment)
                observed = verdict.describe()
                matches = verdict.accepted is case.expects_accept
            except AssignmentError as error:
                observed, matches = "AssignmentError: {}".format(error), False
            cases.append({"case": case.label(), "observed": observed, "passed": matches})
            correct = correct and matches
        self.run.transcript.record(self.run.stage, SKETCH_VERDICT, correct=correct, cases=cases)
        return correct

    def hints_for(self, program):
        """Extract primitives and retrieve their hints; stages Extract and Retrieve."""
        run = self.run
        run.advance(EXTRACT)
        try:
            primitives = extract(program)
        except ExtractError as error:
            self.logger.warning("hints_for() - extraction failed: %s", error)
            run.transcript.record(run.stage, ERROR, type=error.__class__.__name__, message=str(error))
            run.sketch_correct = self.judge_sketch(program)
            return render_hints([])
        run.primitives = tuple(primitive.display() for primitive in primitives)
        run.transcript.record(run.stage, PRIMITIVES, primitives=list(run.primitives))
        run.sketch_correct = self.judge_sketch(program)
        if not self.cfg.uses_retrieval:
            return render_hints([])
        run.advance(RETRIEVE)
        hints = retrieve(self.kb, primitives, self.cfg.target)
        run.transcript.record(
            run.stage,
            HINTS,
            hints=["{} -> {}".format(hint.primitive.display(), hint.entry.label) for hint in hints],
        )
        return render_hints(hints)

    def candidate(self, answer):
        return CandidateProgram(
            self.cfg.target,
            extract_code(answer, self.languages),
            input_signature=self.task.inputs,
        )

    def codegen_stage(self, sketch_text, hints):
        """
        Ask for a program and repair it against compiler diagnostics.

        Parameters
        ----------
        sketch_text : str or None
            ZKSL text embedded in the prompt; None for runs without a sketch.
        hints : str
            Rendered library hints.

        Returns
        -------
        CompiledProgram or CompileLoopFailure

        """
        self.run.advance(CODE_GEN)
        fields = dict(
            target_name=TARGET_NAMES[self.cfg.target],
            description=self.task.description,
            signature=signature_text(self.task.inputs),
            hints=hints,
            convention=convention_text(self.cfg.target, self.task.inputs),
            fence=FENCES[self.cfg.target],
        )
        if sketch_text is None:
            prompt = self.prompts.render("codegen_direct", **fields)
        else:
            if not sketch_text.endswith("\n"):
                sketch_text += "\n"
            prompt = self.prompts.render("codegen", sketch=sketch_text, **fields)
        self.codegen_messages = [self.system_message(), (ROLE_USER, prompt)]
        answer = self.ask(self.codegen_messages)
        return self.compile_loop(self.candidate(answer), COMPILE_LOOP)

    @property
    def attempts_exhausted(self):
        """True once no further compile attempt fits in ``cfg.max_compile_attempts``."""
        return self.compile_attempts >= self.cfg.max_compile_attempts

    def next_workspace(self):
        directory = join(self.workspace, "attempt-{}".format(self.compile_attempts))
        self.compile_attempts += 1
        makedirs(directory, exist_ok=True)
        return directory

    def compile_loop(self, program, stage):
        """
        Compile `program`, asking for repairs while syntax budget remains.

        Under `stage` CompileLoop every attempt enters the CompileLoop stage;
        after a semantic repair the attempts stay in SemanticRepair and draw on
        what is left of the same budget. No run compiles more than
        ``cfg.max_compile_attempts`` programs.

        """
        run = self.run
        in_loop = stage == COMPILE_LOOP
        if in_loop:
            run.advance(COMPILE_LOOP)
        attempts = []
        while True:
            result = self.toolchain.compile(program, self.next_workspace())
            run.transcript.record(run.stage, COMPILE_RESULT, ok=result.ok, attempt=len(attempts))
            if result.ok:
                run.compiled = True
                run.program = program.source
                return CompiledProgram(program, result.artifact)
            attempts.append(tuple(result.diagnostics))
            for diagnostic in result.diagnostics:
                run.transcript.record(
                    run.stage,
                    DIAGNOSTIC,
                    stage=diagnostic.stage,
                    message=diagnostic.message,
                    location=diagnostic.location,
                )
            if run.syntax_budget_used >= self.cfg.syntax_budget or self.attempts_exhausted:
                self.logger.debug("compile_loop() - syntax budget of %d exhausted", self.cfg.syntax_budget)
                if run.program is None:
                    run.program = program.source
                return CompileLoopFailure(tuple(attempts), program)
            run.syntax_budget_used += 1
            self.codegen_messages.append((ROLE_USER, self.prompts.render(
                "compile_repair",
                target_name=TARGET_NAMES[self.cfg.target],
                diagnostics=render_diagnostics(result.diagnostics),
                fence=FENCES[self.cfg.target],
            )))
            if in_loop:
                run.advance(COMPILE_LOOP)
            answer = self.ask(self.codegen_messages)
            program = self.candidate(answer)

    def generated_cases(self, answer):
        """Suite cases proposed by the model that the reference sketch confirms."""
        try:
            document = yaml.safe_load(extract_code(answer, ("yaml", "yml")))
        except yaml.YAMLError as error:
            self.logger.warning("generated_cases() - unreadable test proposal: %s", error)
            return (), 0
        if not isinstance(document, dict):
            return (), 0
        oracle = Interpreter(self.task.program)
        cases, discarded = [], 0
        for polarity, key in ((ACCEPT, "accepting"), (REJECT, "rejecting")):
            kept = 0
            for values in document.get(key) or ():
                try:
                    assignment = oracle.assignment(values)
                    shaped = all(spec.accepts_shape(assignment.bindings[spec.name]) for spec in self.task.inputs)
                    verdict = oracle.evaluate(assignment) if shaped else None
                except AssignmentError:
                    verdict = None
                if verdict is None or verdict.accepted is not (polarity == ACCEPT):
                    discarded += 1
                    continue
                cases.append(SuiteCase(polarity, kept, assignment))
                kept += 1
        return tuple(cases), discarded

    def test_stage(self):
        """
        Test cases the semantic check runs on.

        The stored suites unless ad-hoc generation is enabled; generated cases
        inconsistent with the reference sketch are discarded, and when none
        survive the stored suites are used after all.

        """
        run = self.run
        run.advance(TEST_GEN)
        stored = self.task.suite()
        if not self.cfg.generate_tests:
            run.transcript.record(run.stage, GENERATED_CASES, source="stored", count=len(stored))
            return stored
        messages = [
            self.system_message(),
            (ROLE_USER, self.prompts.render(
                "testgen",
                description=self.task.description,
                signature=signature_text(self.task.inputs),
                count=self.cfg.generated_cases,
            )),
        ]
        cases, discarded = self.generated_cases(self.ask(messages))
        if discarded:
            self.logger.warning("test_stage() - discarded %d generated case(s) the oracle disagrees with", discarded)
        source = "generated" if cases else "stored"
        run.transcript.record(run.stage, GENERATED_CASES, source=source, count=len(cases or stored),
                              discarded=discarded)
        return cases or stored

    def run_cases(self, compiled, cases):
        results = []
        for case in cases:
            outcome = self.toolchain.run_case(compiled.artifact, case.assignment)
            result = CaseResult(case, outcome)
            self.run.transcript.record(
                self.run.stage,
                CASE_RESULT,
                case=case.label(),
                expected=case.polarity,
                verdict=outcome.verdict,
                passed=result.passed,
                diagnostic=outcome.diagnostic.message if outcome.diagnostic is not None else None,
            )
            results.append(result)
        return tuple(results)

    def semantic_stage(self, compiled, cases):
        """
        Run `cases` on the compiled program and repair once on failure.

        Returns
        -------
        SemanticSuccess or SemanticFailure
            Results on `cases` of the final program. When the repaired program
            does not compile, the results of the original one stand.

        """
        run = self.run
        run.advance(SEMANTIC_CHECK)
        results = self.run_cases(compiled, cases)
        failures = [(result.case, result.outcome) for result in results if not result.passed]
        if not failures:
            return SemanticSuccess(results, compiled)
        if run.semantic_budget_used >= self.cfg.semantic_budget or self.attempts_exhausted:
            return SemanticFailure(results, compiled)

        run.advance(SEMANTIC_REPAIR)
        run.semantic_budget_used += 1
        self.codegen_messages.append((ROLE_USER, self.prompts.render(
            "semantic_repair",
            counterexamples=counterexample_text(failures),
            fence=FENCES[self.cfg.target],
        )))
        answer = self.ask(self.codegen_messages)
        repaired = self.compile_loop(self.candidate(answer), SEMANTIC_REPAIR)
        if isinstance(repaired, CompileLoopFailure):
            self.logger.debug("semantic_stage() - repaired program does not compile, keeping the original results")
            return SemanticFailure(results, compiled)
        results = self.run_cases(repaired, cases)
        if all(result.passed for result in results):
            return SemanticSuccess(results, repaired)
        return SemanticFailure(results, repaired)

    def execute(self):
        """
        Run every stage and classify the outcome.

        Raises
        ------
        ZkCoderError, OSError
            Infrastructure failures; :func:`run_pipeline` turns them into InfraFailure.

        """
        run = self.run
        sketch_text, hints = None, render_hints([])
        if self.cfg.uses_sketch:
            sketched = self.sketch_stage()
            if isinstance(sketched, SketchStageFailure):
                run.sketch_correct = False
                sketch_text = sketched.source
            else:
                sketch_text = print_sketch(sketched)
                hints = self.hints_for(sketched)
        elif self.cfg.uses_catalog_hints:
            hints = render_hints(catalog_hints(self.kb, self.cfg.target))

        compiled = self.codegen_stage(sketch_text, hints)
        if isinstance(compiled, CompileLoopFailure):
            return run.finish(TerminalOutcome(REPAIR_BUDGET_EXCEEDED))

        cases = self.test_stage()
        checked = self.semantic_stage(compiled, cases)
        final = checked.program
        hidden = self.task.suite()
        if tuple(cases) == hidden:
            run.case_results = checked.results
        else:
            run.case_results = self.run_cases(final, hidden)
        run.program = final.program.source
        kind = failure_class(run.compiled, run.sketch_correct, run.case_results)
        return run.finish(TerminalOutcome(kind or SUCCESS))


def run_pipeline(task, cfg, llm, kb, toolchain=None, run_id=None, prompts=None):
    """
    Execute one pipeline run of `task`.

    Parameters
    ----------
    task : TaskSpec
    cfg : RunConfig
    llm : LLM backend
        Provides ``session(run_id)``; each run gets its own session.
    kb : KnowledgeBase
    toolchain : Toolchain, optional
        Built from `cfg` when omitted.
    run_id : str, optional
        Defaults to ``<task_id>/sample-0``.
    prompts : PromptLibrary, optional
        Loaded from ``cfg.prompt_version`` when omitted.

    Returns
    -------
    run : PipelineRun
        Finished run. Infrastructure errors (toolchain, LLM transport,
        filesystem) and any other exception raised while the run executes end
        it with an InfraFailure outcome; they are never raised.

    """
    run = PipelineRun(
        task.task_id,
        cfg.target,
        cfg.variant,
        run_id or "{}/sample-0".format(task.task_id),
        uses_sketch=cfg.uses_sketch,
    )
    entry = SKETCH_GEN if cfg.uses_sketch else CODE_GEN
    run.transcript.record(
        entry,
        PROMPT_VERSION,
        version=cfg.prompt_version,
        task_id=task.task_id,
        target=cfg.target,
        variant=cfg.variant,
    )
    workspace = None
    try:
        prompts = prompts or PromptLibrary(cfg.prompt_version)
        toolchain = toolchain or Toolchain.from_config(cfg)
        if cfg.workspace_root:
            makedirs(cfg.workspace_root, exist_ok=True)
        workspace = mkdtemp(prefix="{}-".format(task.task_id), dir=cfg.workspace_root)
        Pipeline(task, cfg, llm.session(run.run_id), kb, toolchain, prompts, run, workspace).execute()
    except Exception as error:
        if isinstance(error, (ZkCoderError, OSError)):
            Pipeline.logger.error("run_pipeline() - %s: %s", run.run_id, error)
        else:
            Pipeline.logger.exception("run_pipeline() - %s: unexpected error", run.run_id)
        if run.stage is None:
            run.advance(entry)
        run.transcript.record(run.stage, ERROR, type=error.__class__.__name__, message=str(error))
        if not run.is_finished:
            run.finish(TerminalOutcome(INFRA_FAILURE, "{}: {}".format(error.__class__.__name__, error)))
    finally:
        if workspace is not None and not cfg.keep_workspaces:
            shutil.rmtree(workspace, ignore_errors=True)
    return run


def _pipeline(task, llm, cfg, kb=None, toolchain=None, prompts=None, run=None, workspace=None):
    run = run or PipelineRun(
        task.task_id,
        cfg.target,
        cfg.variant,
        "{}/sample-0".format(task.task_id),
        uses_sketch=cfg.uses_sketch,
    )
    return Pipeline(
        task,
        cfg,
        llm.session(run.run_id),
        kb,
        toolchain,
        prompts or PromptLibrary(cfg.prompt_version),
        run,
        workspace,
    )


def sketch_stage(task, llm, cfg, prompts=None, run=None):
    """
    Sketch formulation with checker feedback, as a standalone step.

    Returns
    -------
    SketchProgram or SketchStageFailure

    """
    return _pipeline(task, llm, cfg, prompts=prompts, run=run).sketch_stage()


def codegen_stage(sketch, hints, task, llm, toolchain, cfg, workspace, prompts=None, run=None):
    """
    Code generation and the compile-repair loop, as a standalone step.

    `sketch` is a SketchProgram (or None for direct generation), `hints` the
    rendered hint block.

    Returns
    -------
    CompiledProgram or CompileLoopFailure

    """
    pipeline = _pipeline(task, llm, cfg, toolchain=toolchain, prompts=prompts, run=run, workspace=workspace)
    return pipeline.codegen_stage(None if sketch is None else print_sketch(sketch), hints)


def semantic_stage(compiled, task, llm, toolchain, cfg, workspace, cases=None, prompts=None, run=None):
    """
    Suite check with one repair round, as a standalone step for an already compiled program.

    Returns
    -------
    SemanticSuccess or SemanticFailure

    """
    pipeline = _pipeline(task, llm, cfg, toolchain=toolchain, prompts=prompts, run=run, workspace=workspace)
    if pipeline.run.stage is None:
        for stage in (CODE_GEN, COMPILE_LOOP, TEST_GEN):
            pipeline.run.advance(stage)
    pipeline.codegen_messages = [
        pipeline.system_message(),
        (ROLE_ASSISTANT, "```{}\n{}```\n".format(FENCES[cfg.target], compiled.program.source)),
    ]
    return pipeline.semantic_stage(compiled, tuple(cases or task.suite()))
