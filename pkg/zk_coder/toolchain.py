"""
Adapters around the Circom and Noir toolchains.

Candidate programs are compiled in a caller-provided workspace directory and
executed on concrete test inputs. A candidate exposes its verdict as a single
public output equal to 1 on acceptance; witness generation or execution that
fails on a constraint counts as a rejection as well.

Every external process runs with the workspace as its working directory and
under a semaphore bounding the number of simultaneous toolchain processes.

"""
import json
import re
import struct
import subprocess
import time
from dataclasses import dataclass, field
from os import cpu_count, makedirs
from os.path import (
    abspath,
    basename,
    exists,
    join,
)
from tempfile import mkdtemp, mkstemp
from threading import BoundedSemaphore
from typing import Dict, Optional, Tuple

from zk_coder.constants import (
    ACCEPTED,
    BN254_PRIME,
    CIRCOM,
    DEFAULT_COMPILE_TIMEOUT,
    DEFAULT_RUN_TIMEOUT,
    EXECUTION_FAILED,
    NOIR,
    REJECTED,
    STAGE_UNKNOWN,
    VALID_TARGET,
)
from zk_coder.decorators import logger
from zk_coder.diagnostics import Diagnostic, parse_diagnostics
from zk_coder.errors import MalformedInput, ToolchainMissing, ToolchainTimeout
from zk_coder.interp import Assignment


CIRCOM_SOURCE = "main.circom"
NOIR_PACKAGE = "candidate"

NARGO_MANIFEST = """[package]
name = "{}"
type = "bin"
authors = [""]

[dependencies]
""".format(NOIR_PACKAGE)

_VERSION = re.compile(r"(\d+\.\d+\.\d+(?:[-+.][\w.]+)?)")
_CIRCOM_REJECTION = re.compile(r"Assert Failed|Error in template|Constraint doesn't match", re.IGNORECASE)
_NOIR_REJECTION = re.compile(r"Failed constraint|Failed assertion|assertion failed|Cannot satisfy constraint",
                             re.IGNORECASE)
_NOIR_OUTPUT = re.compile(r"Circuit output:\s*(?P<value>\S+)")


@dataclass(frozen=True)
class CandidateProgram:
    """
    Source code of a candidate verifier.

    `input_signature` lists the task inputs (:class:`~zk_coder.tasks.InputSpec`)
    the program reads, in declaration order.

    """
    target: str
    source: str
    entry_name: str = "main"
    input_signature: Tuple[object, ...] = ()


@dataclass(frozen=True)
class Artifact:
    target: str
    workspace: str
    path: str
    program: CandidateProgram


@dataclass(frozen=True)
class CompileOk:
    artifact: Artifact
    ok = True


@dataclass(frozen=True)
class CompileFail:
    diagnostics: Tuple[Diagnostic, ...]
    ok = False


@dataclass(frozen=True)
class RunOutcome:
    verdict: str
    wall_time: float = field(compare=False)
    diagnostic: Optional[Diagnostic] = None

    @property
    def is_accepted(self):
        return self.verdict == ACCEPTED


@dataclass(frozen=True)
class ToolchainStatus:
    target: str
    available: bool
    version: Optional[str]
    raw: str


@dataclass(frozen=True)
class ToolchainReport:
    statuses: Dict[str, ToolchainStatus]

    def is_available(self, target):
        status = self.statuses.get(target)
        return status is not None and status.available

    def describe(self):
        return "\n".join(
            "{}: {}".format(
                target,
                status.version if status.available else "unavailable ({})".format(status.raw.strip() or "no output"),
            )
            for target, status in sorted(self.statuses.items())
        )


def field_element(value):
    """Decimal text of a scalar as a canonical field element; booleans are 0 and 1."""
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(int(value) % BN254_PRIME)


def _marshal(value, noir_bool=False):
    if isinstance(value, (list, tuple)):
        return [_marshal(item, noir_bool) for item in value]
    if isinstance(value, bool) and noir_bool:
        return value
    return field_element(value)


def _toml_value(value):
    if isinstance(value, list):
        return "[{}]".format(", ".join(_toml_value(item) for item in value))
    if isinstance(value, bool):
        return "true" if value else "false"
    return '"{}"'.format(value)


def circom_input(bindings):
    """Circom input file contents: decimal-string field elements, keys sorted."""
    return json.dumps({name: _marshal(bindings[name]) for name in sorted(bindings)}, indent=2) + "\n"


def prover_toml(bindings):
    """Noir prover file contents, keys sorted."""
    return "".join(
        "{} = {}\n".format(name, _toml_value(_marshal(bindings[name], noir_bool=True)))
        for name in sorted(bindings)
    )


def read_witness(path):
    """
    Field elements of a binary ``.wtns`` witness file.

    The file starts with the magic ``wtns``, a version and a section count;
    section 1 holds the element size and prime, section 2 the witness values
    as little-endian integers.

    """
    with open(path, "rb") as stream:
        data = stream.read()
    if data[:4] != b"wtns":
        raise ValueError("{} is not a witness file".format(path))
    _, sections = struct.unpack_from("<II", data, 4)
    offset = 12
    n8, values = None, None
    for _ in range(sections):
        kind, size = struct.unpack_from("<IQ", data, offset)
        offset += 12
        if kind == 1:
            n8 = struct.unpack_from("<I", data, offset)[0]
        elif kind == 2:
            values = data[offset:offset + size]
        offset += size
    if n8 is None or values is None:
        raise ValueError("{} lacks a header or a witness section".format(path))
    return [int.from_bytes(values[i:i + n8], "little") for i in range(0, len(values), n8)]


def parse_noir_output(text):
    """Verdict printed by ``nargo execute``: True, False or None when absent or not 0/1."""
    match = _NOIR_OUTPUT.search(text)
    if not match:
        return None
    value = match.group("value").strip().strip("\"'").lower()
    if value.startswith("field(") and value.endswith(")"):
        value = value[len("field("):-1]
    if value in ("true", "false"):
        return value == "true"
    try:
        number = int(value, 16 if value.startswith("0x") else 10)
    except ValueError:
        return None
    return number == 1 if number in (0, 1) else None


def check_inputs(program, inputs):
    """
    Raise MalformedInput unless `inputs` provides every signature input with its shape.

    Programs without a declared signature accept any inputs.

    """
    bindings = inputs.bindings if isinstance(inputs, Assignment) else dict(inputs)
    if not program.input_signature:
        return bindings
    expected = [spec.name for spec in program.input_signature]
    missing = [name for name in expected if name not in bindings]
    extra = sorted(name for name in bindings if name not in expected)
    if missing or extra:
        raise MalformedInput("inputs do not match the signature: missing {}, unexpected {}".format(
            ", ".join(missing) or "none",
            ", ".join(extra) or "none",
        ))
    for spec in program.input_signature:
        value = bindings[spec.name]
        if spec.type.is_vec:
            if not spec.accepts_shape(value):
                raise MalformedInput("'{}' does not have shape {}".format(spec.name, spec.dims))
        elif isinstance(value, (list, tuple)):
            raise MalformedInput("'{}' must be a scalar".format(spec.name))
    return bindings


@logger
class Toolchain:
    """
    Compile and execute candidate programs with the external toolchains.

    Parameters
    ----------
    circom_bin, node_bin, nargo_bin : str
        Executables of the Circom compiler, Node.js (witness generation) and
        Noir's package tool.
    circomlib_path : str
        Directory containing the ``circomlib`` package, passed to Circom as a
        library search path.
    compile_timeout, run_timeout : float
        Limits in seconds for one compilation and one test case.
    max_processes : int, optional
        Number of toolchain processes allowed at once; defaults to the number
        of logical processors.

    """

    def __init__(
        self,
        circom_bin="circom",
        node_bin="node",
        nargo_bin="nargo",
        circomlib_path="node_modules",
        compile_timeout=DEFAULT_COMPILE_TIMEOUT,
        run_timeout=DEFAULT_RUN_TIMEOUT,
        max_processes=None,
    ):
        self.circom_bin = circom_bin
        self.node_bin = node_bin
        self.nargo_bin = nargo_bin
        self.circomlib_path = circomlib_path
        self.compile_timeout = compile_timeout
        self.run_timeout = run_timeout
        self.semaphore = BoundedSemaphore(max_processes or cpu_count() or 1)

    @classmethod
    def from_config(cls, cfg):
        return cls(
            circom_bin=cfg.circom_bin,
            node_bin=cfg.node_bin,
            nargo_bin=cfg.nargo_bin,
            circomlib_path=cfg.circomlib_path,
            compile_timeout=cfg.compile_timeout,
            run_timeout=cfg.run_timeout,
            max_processes=cfg.max_processes,
        )

    def _run(self, command, cwd, timeout):
        with self.semaphore:
            self.logger.debug("_run() - %s in %s", " ".join(command), cwd)
            try:
                return subprocess.run(command, cwd=cwd, capture_output=True, text=True, timeout=timeout)
            except FileNotFoundError as error:
                raise ToolchainMissing("{} not found: {}".format(command[0], error))
            except subprocess.TimeoutExpired:
                raise ToolchainTimeout(" ".join(command), timeout)

    def _version(self, command):
        try:
            completed = self._run(command, None, 30)
        except (ToolchainMissing, ToolchainTimeout) as error:
            return None, str(error)
        raw = (completed.stdout or "") + (completed.stderr or "")
        match = _VERSION.search(raw)
        if completed.returncode != 0 or not match:
            return None, raw
        return match.group(1), raw

    def probe(self):
        """Presence and version of each toolchain. Circom also needs Node.js for witness generation."""
        statuses = {}
        circom_version, circom_raw = self._version([self.circom_bin, "--version"])
        node_version, node_raw = self._version([self.node_bin, "--version"])
        statuses[CIRCOM] = ToolchainStatus(
            CIRCOM,
            circom_version is not None and node_version is not None,
            circom_version,
            circom_raw if circom_version is None or node_version is not None else node_raw,
        )
        noir_version, noir_raw = self._version([self.nargo_bin, "--version"])
        statuses[NOIR] = ToolchainStatus(NOIR, noir_version is not None, noir_version, noir_raw)
        for status in statuses.values():
            if not status.available:
                self.logger.warning("probe() - %s toolchain unavailable", status.target)
        return ToolchainReport(statuses)

    def compile(self, program, workspace):
        """
        Compile a candidate in `workspace`.

        Returns
        -------
        CompileOk or CompileFail
            CompileFail carries at least one diagnostic.

        Raises
        ------
        ToolchainMissing, ToolchainTimeout

        """
        if program.target not in VALID_TARGET:
            raise ValueError("'target' must be set to one of: {}.".format(", ".join(VALID_TARGET)))
        workspace = abspath(workspace)
        makedirs(workspace, exist_ok=True)
        if program.target == CIRCOM:
            with open(join(workspace, CIRCOM_SOURCE), "w") as stream:
                stream.write(program.source)
            command = [
                self.circom_bin, CIRCOM_SOURCE, "--r1cs", "--wasm", "-l", abspath(self.circomlib_path), "-o", ".",
            ]
            artifact_path = join(workspace, "main_js", "main.wasm")
        else:
            makedirs(join(workspace, "src"), exist_ok=True)
            with open(join(workspace, "Nargo.toml"), "w") as stream:
                stream.write(NARGO_MANIFEST)
            with open(join(workspace, "src", "main.nr"), "w") as stream:
                stream.write(program.source)
            command = [self.nargo_bin, "compile"]
            artifact_path = join(workspace, "target", "{}.json".format(NOIR_PACKAGE))

        completed = self._run(command, workspace, self.compile_timeout)
        output = (completed.stderr or "") + (completed.stdout or "")
        with open(join(workspace, "compile.log"), "w") as stream:
            stream.write(output)

        if completed.returncode == 0 and exists(artifact_path):
            self.logger.debug("compile() - %s candidate compiled in %s", program.target, workspace)
            return CompileOk(Artifact(program.target, workspace, artifact_path, program))

        diagnostics = parse_diagnostics(program.target, completed.stderr or output)
        if not diagnostics:
            diagnostics = [Diagnostic(
                STAGE_UNKNOWN,
                "compiler exited with status {} and no diagnostics".format(completed.returncode),
                None,
                output,
            )]
        self.logger.debug("compile() - %d diagnostic(s)", len(diagnostics))
        return CompileFail(tuple(diagnostics))

    def run_case(self, artifact, inputs, target=None):
        """
        Execute a compiled candidate on one assignment.

        Raises
        ------
        MalformedInput
            If the inputs do not match the program's input signature.
        ToolchainTimeout

        """
        target = target or artifact.target
        bindings = check_inputs(artifact.program, inputs)
        start = time.monotonic()
        if target == CIRCOM:
            verdict, diagnostic = self._run_circom(artifact, bindings)
        else:
            verdict, diagnostic = self._run_noir(artifact, bindings)
        outcome = RunOutcome(verdict, time.monotonic() - start, diagnostic)
        self.logger.debug("run_case() - %s", outcome.verdict)
        return outcome

    def _failure(self, completed, pattern, target):
        output = (completed.stderr or "") + (completed.stdout or "")
        if pattern.search(output):
            return REJECTED, None
        diagnostics = parse_diagnostics(target, output) or [
            Diagnostic(STAGE_UNKNOWN, "execution failed with status {}".format(completed.returncode), None, output),
        ]
        return EXECUTION_FAILED, diagnostics[0]

    def _run_circom(self, artifact, bindings):
        case_dir = mkdtemp(prefix="case-", dir=artifact.workspace)
        input_path = join(case_dir, "input.json")
        witness_path = join(case_dir, "witness.wtns")
        with open(input_path, "w") as stream:
            stream.write(circom_input(bindings))
        command = [
            self.node_bin,
            join(artifact.workspace, "main_js", "generate_witness.js"),
            artifact.path,
            input_path,
            witness_path,
        ]
        completed = self._run(command, artifact.workspace, self.run_timeout)
        if completed.returncode != 0 or not exists(witness_path):
            return self._failure(completed, _CIRCOM_REJECTION, CIRCOM)
        try:
            witness = read_witness(witness_path)
        except (ValueError, struct.error) as error:
            return EXECUTION_FAILED, Diagnostic(STAGE_UNKNOWN, "unreadable witness: {}".format(error), None, "")
        if len(witness) < 2:
            return EXECUTION_FAILED, Diagnostic(STAGE_UNKNOWN, "the candidate has no verdict output", None, "")
        if witness[1] not in (0, 1):
            return EXECUTION_FAILED, Diagnostic(
                STAGE_UNKNOWN,
                "the verdict output is {}, not 0 or 1".format(witness[1]),
                None,
                "",
            )
        return (ACCEPTED if witness[1] == 1 else REJECTED), None

    def _run_noir(self, artifact, bindings):
        handle, prover_path = mkstemp(prefix="case-", suffix=".toml", dir=artifact.workspace)
        with open(handle, "w") as stream:
            stream.write(prover_toml(bindings))
        prover_name = basename(prover_path)[:-len(".toml")]
        command = [self.nargo_bin, "execute", "--prover-name", prover_name]
        completed = self._run(command, artifact.workspace, self.run_timeout)
        if completed.returncode != 0:
            return self._failure(completed, _NOIR_REJECTION, NOIR)
        verdict = parse_noir_output((completed.stdout or "") + (completed.stderr or ""))
        if verdict is None:
            return EXECUTION_FAILED, Diagnostic(
                STAGE_UNKNOWN,
                "the candidate printed no verdict output",
                None,
                completed.stdout or "",
            )
        return (ACCEPTED if verdict else REJECTED), None


def compile(program, workspace, toolchain=None):
    """Compile `program` in `workspace` with a default-configured toolchain unless one is given."""
    return (toolchain or Toolchain()).compile(program, workspace)


def run_case(artifact, inputs, target=None, toolchain=None):
    return (toolchain or Toolchain()).run_case(artifact, inputs, target)


def probe_toolchains(config=None):
    """
    Probe both toolchains.

    Parameters
    ----------
    config : RunConfig, optional
        Supplies the binary paths; defaults are used otherwise.

    """
    toolchain = Toolchain.from_config(config) if config is not None else Toolchain()
    return toolchain.probe()
