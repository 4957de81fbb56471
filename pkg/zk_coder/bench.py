"""
Benchmark runner and reports.

Every task is sampled `cfg.samples` times through the full pipeline; runs fan
out over a bounded thread pool, each run's transcript is written to
``<transcript_dir>/<task_id>/sample-<k>.jsonl`` and the finished runs are
aggregated into a :class:`BenchReport`.

"""
import json
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from os.path import join
from typing import Dict, List, Tuple

import numpy as np

from zk_coder.agent import run_pipeline
from zk_coder.constants import (
    FAILURE_CLASSES,
    INFRA_FAILURE,
    SUCCESS,
    VALID_OUTCOME,
    VALID_REPORT_FORMAT,
)
from zk_coder.decorators import logger
from zk_coder.dummy import DummyProgress
from zk_coder.metrics import (
    STAGE_RATES,
    average_tokens,
    failure_distribution,
    mean_pass_at_k,
    overall_accuracy,
    stage_matrix,
    stage_rates,
    verdict_confusion,
)
from zk_coder.prompts import PromptLibrary
from zk_coder.toolchain import Toolchain
from zk_coder.validation import validate_config


NO_TASKS_MARKER = "(no tasks)"

STAGE_LABELS = OrderedDict((
    ("sketch_correctness", "Sketch correctness"),
    ("repair_pass_rate", "Repair pass rate"),
    ("program_correctness", "Program correctness"),
))


@dataclass(frozen=True)
class TaskRow:
    task_id: str
    samples: int
    successes: int
    infra_failures: int
    pass_at_1: float
    outcomes: Dict[str, int]


@dataclass(frozen=True)
class BenchReport:
    """
    Aggregated results of a benchmark sweep.

    `overall_accuracy` counts the runs that got through all three stages
    (correct sketch, compiled program, all cases passed) and equals the
    product of the stage rates; `end_to_end_pass_rate` counts Success
    outcomes, including those reached from an incorrect sketch.

    """
    target: str
    variant: str
    samples: int
    rows: Tuple[TaskRow, ...]
    stage_rates: Dict[str, float]
    overall_accuracy: float
    end_to_end_pass_rate: float
    pass_at_1: float
    avg_token_cost: float
    failure_counts: Dict[str, int]
    failure_fractions: Dict[str, float]
    case_confusion: List[List[int]]
    total_runs: int
    infra_failures: int
    runs: Tuple[object, ...] = field(default=(), compare=False, repr=False)

    def serialize(self):
        record = asdict(replace(self, runs=()))
        del record["runs"]
        return record

    @classmethod
    def from_dict(cls, record):
        record = dict(record)
        record["rows"] = tuple(TaskRow(**row) for row in record.get("rows") or ())
        record.pop("runs", None)
        return cls(**record)


def summarize(tasks, runs, cfg):
    """
    Aggregate finished runs into a report.

    Parameters
    ----------
    tasks : list of TaskSpec
    runs : list of PipelineRun
    cfg : RunConfig

    """
    by_task = OrderedDict((task.task_id, []) for task in tasks)
    for run in runs:
        by_task.setdefault(run.task_id, []).append(run)

    rows = []
    for task_id, task_runs in by_task.items():
        kinds = [run.outcome.kind for run in task_runs]
        successes = kinds.count(SUCCESS)
        rows.append(TaskRow(
            task_id=task_id,
            samples=len(task_runs),
            successes=successes,
            infra_failures=kinds.count(INFRA_FAILURE),
            pass_at_1=successes / len(task_runs) if task_runs else 0.,
            outcomes=OrderedDict((kind, kinds.count(kind)) for kind in VALID_OUTCOME if kind in kinds),
        ))

    flags = stage_matrix(runs)
    kinds = [run.outcome.kind for run in runs]
    counts, fractions = failure_distribution(kinds)
    confusion = np.zeros((2, 2), dtype=int)
    for run in runs:
        confusion += verdict_confusion(run.case_results)

    return BenchReport(
        target=cfg.target,
        variant=cfg.variant,
        samples=cfg.samples,
        rows=tuple(rows),
        stage_rates=dict(stage_rates(flags)),
        overall_accuracy=overall_accuracy(flags),
        end_to_end_pass_rate=kinds.count(SUCCESS) / len(kinds) if kinds else 0.,
        pass_at_1=mean_pass_at_k([(row.samples, row.successes) for row in rows], k=1),
        avg_token_cost=average_tokens(runs),
        failure_counts=dict(counts),
        failure_fractions=dict(fractions),
        case_confusion=confusion.tolist(),
        total_runs=len(runs),
        infra_failures=kinds.count(INFRA_FAILURE),
        runs=tuple(runs),
    )


@logger
class BenchRunner:
    """
    Runs the samples of a task set concurrently.

    Parameters
    ----------
    cfg : RunConfig
    llm : LLM backend
    kb : KnowledgeBase
    toolchain : Toolchain, optional
    prompts : PromptLibrary, optional
    progress_wrapper : progress generator or None
        If value is set, will attempt to use the given generator to display
        progress of the sweep, e.g. ``tqdm``.

    """

    def __init__(self, cfg, llm, kb, toolchain=None, prompts=None, progress_wrapper=None):
        validate_config(cfg)
        self.cfg = cfg
        self.llm = llm
        self.kb = kb
        self.toolchain = toolchain or Toolchain.from_config(cfg)
        self.prompts = prompts or PromptLibrary(cfg.prompt_version)
        self.progress_wrapper = progress_wrapper

    def transcript_path(self, task_id, sample):
        return join(self.cfg.transcript_dir, task_id, "sample-{}.jsonl".format(sample))

    def sample(self, task, sample):
        run = run_pipeline(
            task,
            self.cfg,
            self.llm,
            self.kb,
            toolchain=self.toolchain,
            run_id="{}/sample-{}".format(task.task_id, sample),
            prompts=self.prompts,
        )
        try:
            run.transcript.write(self.transcript_path(task.task_id, sample))
        except OSError as error:
            self.logger.warning("sample() - cannot write transcript of %s: %s", run.run_id, error)
        return run

    def run(self, tasks):
        jobs = [(task, sample) for task in tasks for sample in range(self.cfg.samples)]
        finished = {}
        successes = 0
        with self._progress(total=len(jobs), desc="bench") as progress:
            with ThreadPoolExecutor(max_workers=self.cfg.max_workers) as executor:
                futures = {
                    executor.submit(self.sample, task, sample): (task.task_id, sample)
                    for task, sample in jobs
                }
                for future in as_completed(futures):
                    run = future.result()
                    finished[futures[future]] = run
                    self.logger.debug("run() - %s finished with %s", run.run_id, run.outcome.describe())
                    successes += run.outcome.is_success
                    progress.set_postfix_str("{} succeeded".format(successes))
                    progress.update(1)
        runs = [finished[(task.task_id, sample)] for task, sample in jobs]
        return summarize(tasks, runs, self.cfg)

    def _progress(self, total, desc, **kwargs):
        if self.progress_wrapper:
            return self.progress_wrapper(total=total, desc=desc)
        else:
            return DummyProgress()


def run_bench(tasks, cfg, llm, kb, toolchain=None, prompts=None, progress_wrapper=None):
    """
    Sample every task `cfg.samples` times and aggregate the runs.

    Individual runs never raise (they end in InfraFailure instead); only an
    invalid configuration aborts the sweep.

    Raises
    ------
    ConfigError

    """
    return BenchRunner(cfg, llm, kb, toolchain, prompts, progress_wrapper).run(tasks)


def percent(value):
    return "{:.2f}%".format(100. * value)


def _table(report):
    lines = [
        "Benchmark: target={} variant={} samples={} tasks={} runs={}".format(
            report.target,
            report.variant,
            report.samples,
            len(report.rows),
            report.total_runs,
        ),
        "",
        "{:<24} {:>6} {:>8} {:>6} {:>8}".format("Task", "Runs", "Success", "Infra", "Pass@1"),
    ]
    if not report.rows:
        lines.append(NO_TASKS_MARKER)
    for row in report.rows:
        lines.append("{:<24} {:>6} {:>8} {:>6} {:>8}".format(
            row.task_id,
            row.samples,
            row.successes,
            row.infra_failures,
            percent(row.pass_at_1),
        ))
    lines += ["", "Stage rates"]
    for name in STAGE_RATES:
        lines.append("  {:<22} {:>8}".format(STAGE_LABELS[name], percent(report.stage_rates.get(name, 0.))))
    lines += [
        "{:<24} {:>8}".format("Overall accuracy", percent(report.overall_accuracy)),
        "{:<24} {:>8}".format("End-to-end pass rate", percent(report.end_to_end_pass_rate)),
        "{:<24} {:>8}".format("Pass@1", percent(report.pass_at_1)),
        "{:<24} {:>8.1f}".format("Average token cost", report.avg_token_cost),
        "",
        "{:<26} {:>6} {:>8}".format("Failure distribution", "Count", "Share"),
    ]
    for kind in FAILURE_CLASSES:
        lines.append("  {:<24} {:>6} {:>8}".format(
            kind,
            report.failure_counts.get(kind, 0),
            percent(report.failure_fractions.get(kind, 0.)),
        ))
    lines.append("  {:<24} {:>6}".format(INFRA_FAILURE, report.infra_failures))
    return "\n".join(lines) + "\n"


def emit_report(report, fmt="table"):
    """
    Render a report as an aligned text table or as JSON.

    Percentages are printed with two decimals; a report without tasks renders
    the table header followed by an explicit no-tasks marker.

    """
    if fmt not in VALID_REPORT_FORMAT:
        raise ValueError("'fmt' must be set to one of: {}.".format(", ".join(VALID_REPORT_FORMAT)))
    if fmt == "structured":
        return json.dumps(report.serialize(), indent=2, sort_keys=True) + "\n"
    return _table(report)


def load_report(path):
    """Read a report written with ``emit_report(report, "structured")``."""
    with open(path) as stream:
        return BenchReport.from_dict(json.load(stream))
