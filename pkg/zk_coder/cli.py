"""
Command-line interface.

    zk-coder check sketch.zksl
    zk-coder extract sketch.zksl --count
    zk-coder hints sketch.zksl --target noir
    zk-coder run zk_coder/data/tasks/sudoku_4x4.yaml --config run.yaml
    zk-coder bench zk_coder/data/tasks --config run.yaml --output report.json
    zk-coder probe
    zk-coder report report.json

"""
import argparse
import json
import logging
import sys
from os.path import join

from zk_coder.agent import run_pipeline
from zk_coder.bench import (
    emit_report,
    load_report,
    run_bench,
    summarize,
)
from zk_coder.checker import check_sketch
from zk_coder.config import load_config
from zk_coder.constants import (
    EXIT_CONFIG_ERROR,
    EXIT_KB_ERROR,
    EXIT_OK,
    EXIT_PARSE_FAILURE,
    EXIT_RETRIEVAL_MISS,
    EXIT_TASK_ERROR,
    EXIT_VIOLATIONS,
    INFRA_FAILURE,
    OUTCOME_EXIT_CODES,
    VALID_BACKEND,
    VALID_REPORT_FORMAT,
    VALID_TARGET,
    VALID_VARIANT,
)
from zk_coder.errors import (
    ConfigError,
    ExtractError,
    KbError,
    ParseFailure,
    RetrievalMiss,
    TaskError,
)
from zk_coder.extract import count_constraints, extract
from zk_coder.kb import load_kb, render_hints, retrieve
from zk_coder.llm import make_backend
from zk_coder.parser import parse_sketch
from zk_coder.tasks import load_task, load_tasks
from zk_coder.toolchain import probe_toolchains
from zk_coder.validation import validate_config


LOG = logging.getLogger("zk_coder.cli")

EXIT_CODES_HELP = """exit codes:
  0   success (run: Success)
  1   check violations or invalid sketch
  2   parse failure
  3   retrieval miss
  4   knowledge base error
  5   task error
  6   configuration error or unreadable report
  10  RepairBudgetExceeded
  11  SketchIncorrect
  12  FalseAccept
  13  FalseReject
  14  MixedFalseAcceptReject
  15  InfraFailure (including unavailable toolchains)
"""


def _out(text):
    sys.stdout.write(text + "\n")


def _error(message):
    sys.stderr.write(message + "\n")


def _read_sketch(path):
    """Parsed sketch, or an exit code after reporting the failure."""
    try:
        with open(path) as stream:
            source = stream.read()
    except OSError as error:
        _error("{}: {}".format(path, error))
        return None, EXIT_PARSE_FAILURE
    try:
        return parse_sketch(source), EXIT_OK
    except ParseFailure as error:
        _error("{}:{}:{}: ParseFailure: {} (in {})".format(path, error.line, error.column, error.message,
                                                            error.production))
        return None, EXIT_PARSE_FAILURE


def _checked_sketch(path, fmt):
    program, status = _read_sketch(path)
    if program is None:
        return None, status
    report = check_sketch(program)
    if fmt == "structured":
        violations = [
            {"category": violation.category, "message": violation.message, "at": violation.location()}
            for violation in report
        ]
    else:
        violations = [
            "{}:{}: [{}] {}".format(path, violation.location(), violation.category, violation.message)
            for violation in report
        ]
    return (program, report, violations), EXIT_OK if report.is_empty else EXIT_VIOLATIONS


def cmd_check(args):
    checked, status = _checked_sketch(args.file, args.format)
    if checked is None:
        return status
    _, _, violations = checked
    if args.format == "structured":
        _out(json.dumps({"file": args.file, "violations": violations}, indent=2))
    else:
        for line in violations:
            _out(line)
        if not violations:
            _out("{}: ok".format(args.file))
    return status


def cmd_extract(args):
    checked, status = _checked_sketch(args.file, args.format)
    if checked is None:
        return status
    program, _, violations = checked
    if status != EXIT_OK:
        for line in violations:
            _error(line if isinstance(line, str) else json.dumps(line))
        return status
    try:
        primitives = [primitive.display() for primitive in extract(program)]
        count = count_constraints(program) if args.count else None
    except ExtractError as error:
        _error("{}: {}".format(args.file, error))
        return EXIT_VIOLATIONS
    if args.format == "structured":
        record = {"primitives": primitives}
        if count is not None:
            record["constraints"] = count
        _out(json.dumps(record, indent=2))
    else:
        for line in primitives:
            _out(line)
        if count is not None:
            _out("constraints: {}".format(count))
    return EXIT_OK


def cmd_hints(args, cfg):
    try:
        kb = load_kb(args.kb or cfg.kb_path)
    except KbError as error:
        _error("knowledge base: {}".format(error))
        return EXIT_KB_ERROR
    checked, status = _checked_sketch(args.file, "table")
    if checked is None:
        return status
    program, _, violations = checked
    if status != EXIT_OK:
        for line in violations:
            _error(line)
        return status
    try:
        hints = retrieve(kb, extract(program), cfg.target)
    except RetrievalMiss as error:
        _error(str(error))
        return EXIT_RETRIEVAL_MISS
    sys.stdout.write(render_hints(hints))
    return EXIT_OK


def _toolchain_ready(cfg):
    report = probe_toolchains(cfg)
    if not report.is_available(cfg.target):
        _error("the {} toolchain is unavailable:\n{}".format(cfg.target, report.describe()))
        return False
    return True


def cmd_run(args, cfg):
    try:
        task = load_task(args.task)
    except TaskError as error:
        _error(str(error))
        return EXIT_TASK_ERROR
    try:
        kb = load_kb(args.kb or cfg.kb_path)
    except KbError as error:
        _error("knowledge base: {}".format(error))
        return EXIT_KB_ERROR
    try:
        llm = make_backend(cfg)
    except ConfigError as error:
        _error("configuration: {}".format(error))
        return EXIT_CONFIG_ERROR
    if not _toolchain_ready(cfg):
        _out("outcome: {}(toolchain unavailable)".format(INFRA_FAILURE))
        return OUTCOME_EXIT_CODES[INFRA_FAILURE]
    run = run_pipeline(task, cfg, llm, kb, run_id="{}/sample-{}".format(task.task_id, args.sample))
    path = run.transcript.write(join(cfg.transcript_dir, task.task_id, "sample-{}.jsonl".format(args.sample)))
    if args.format == "structured":
        _out(json.dumps(dict(run.summary(), transcript=path), indent=2))
    else:
        _out("transcript: {}".format(path))
        _out("outcome: {}".format(run.outcome.describe()))
    return OUTCOME_EXIT_CODES[run.outcome.kind]


def _progress_wrapper(enabled):
    if not enabled:
        return None
    try:
        from tqdm import tqdm
    except ImportError:
        LOG.warning("_progress_wrapper() - tqdm is not installed, install the progress extra for a progress bar")
        return None
    return tqdm


def cmd_bench(args, cfg):
    try:
        tasks = load_tasks(args.tasks)
    except TaskError as error:
        _error(str(error))
        return EXIT_TASK_ERROR
    try:
        kb = load_kb(args.kb or cfg.kb_path)
    except KbError as error:
        _error("knowledge base: {}".format(error))
        return EXIT_KB_ERROR
    if not tasks:
        report = summarize([], [], cfg)
    else:
        try:
            validate_config(cfg)
            llm = make_backend(cfg)
        except ConfigError as error:
            _error("configuration: {}".format(error))
            return EXIT_CONFIG_ERROR
        if not _toolchain_ready(cfg):
            return OUTCOME_EXIT_CODES[INFRA_FAILURE]
        report = run_bench(tasks, cfg, llm, kb, progress_wrapper=_progress_wrapper(args.progress))
    if args.output:
        with open(args.output, "w") as stream:
            stream.write(emit_report(report, "structured"))
    sys.stdout.write(emit_report(report, args.format))
    return EXIT_OK


def cmd_probe(args, cfg):
    report = probe_toolchains(cfg)
    _out(report.describe())
    targets = [args.target] if args.target else list(VALID_TARGET)
    if all(report.is_available(target) for target in targets):
        return EXIT_OK
    return OUTCOME_EXIT_CODES[INFRA_FAILURE]


def cmd_report(args):
    try:
        report = load_report(args.file)
    except (OSError, ValueError, TypeError) as error:
        _error("{}: {}".format(args.file, error))
        return EXIT_CONFIG_ERROR
    sys.stdout.write(emit_report(report, args.format))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kb", help="knowledge base directory (defaults to the shipped one)")
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--format", choices=VALID_REPORT_FORMAT, default="table", help="output format")
    common.add_argument("--verbose", "-v", action="store_true", help="log debug messages")

    run_options = argparse.ArgumentParser(add_help=False)
    run_options.add_argument("--target", choices=VALID_TARGET)
    run_options.add_argument("--variant", choices=VALID_VARIANT)
    run_options.add_argument("--backend", choices=VALID_BACKEND)
    run_options.add_argument("--script", dest="script_path", help="script of the scripted backend")
    run_options.add_argument("--model")
    run_options.add_argument("--endpoint", dest="api_endpoint")
    run_options.add_argument("--temperature", type=float)
    run_options.add_argument("--samples", type=int)
    run_options.add_argument("--workers", dest="max_workers", type=int)
    run_options.add_argument("--transcripts", dest="transcript_dir")
    run_options.add_argument("--workspace", dest="workspace_root")
    run_options.add_argument("--keep-workspaces", action="store_true", default=None)
    run_options.add_argument("--generate-tests", action="store_true", default=None)

    parser = argparse.ArgumentParser(
        prog="zk-coder",
        description="Sketch-guided generation of zero-knowledge verifier programs.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    check = commands.add_parser("check", parents=[common], help="check a ZKSL sketch")
    check.add_argument("file")

    extract_ = commands.add_parser("extract", parents=[common], help="list the constraint primitives of a sketch")
    extract_.add_argument("file")
    extract_.add_argument("--count", action="store_true", help="also count constraints with loops unrolled")

    hints = commands.add_parser("hints", parents=[common], help="render the library hints of a sketch")
    hints.add_argument("file")
    hints.add_argument("--target", choices=VALID_TARGET)

    run = commands.add_parser("run", parents=[common, run_options], help="run the pipeline on one task",
                              epilog=EXIT_CODES_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    run.add_argument("task")
    run.add_argument("--sample", type=int, default=0, help="sample number used in the run id")

    bench = commands.add_parser("bench", parents=[common, run_options], help="sample every task of a directory")
    bench.add_argument("tasks")
    bench.add_argument("--output", help="also write the structured report to this file")
    bench.add_argument("--progress", action="store_true", help="show a progress bar (needs the progress extra)")

    probe = commands.add_parser("probe", parents=[common], help="report toolchain versions")
    probe.add_argument("--target", choices=VALID_TARGET)

    report = commands.add_parser("report", parents=[common], help="re-render a structured bench report")
    report.add_argument("file")
    return parser


_OVERRIDES = (
    "target",
    "variant",
    "backend",
    "script_path",
    "model",
    "api_endpoint",
    "temperature",
    "samples",
    "max_workers",
    "transcript_dir",
    "workspace_root",
    "keep_workspaces",
    "generate_tests",
)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.command == "check":
        return cmd_check(args)
    if args.command == "extract":
        return cmd_extract(args)
    if args.command == "report":
        return cmd_report(args)

    overrides = {name: getattr(args, name, None) for name in _OVERRIDES}
    if overrides.get("script_path") and not overrides.get("backend"):
        overrides["backend"] = "scripted"
    try:
        cfg = load_config(args.config, **overrides)
        if args.command == "run":
            validate_config(cfg)
    except ConfigError as error:
        _error("configuration: {}".format(error))
        return EXIT_CONFIG_ERROR
    LOG.debug("main() - %s with %s", args.command, cfg.serialize())

    if args.command == "hints":
        return cmd_hints(args, cfg)
    if args.command == "probe":
        return cmd_probe(args, cfg)
    if args.command == "run":
        return cmd_run(args, cfg)
    return cmd_bench(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
