"""
Best-effort parsing of Circom and Noir compiler output into diagnostics.

Both compilers print one block per error: a header line (``error[P1012]: ...``
or ``error: ...``) followed by a source excerpt whose first line carries the
file, line and column. Each block becomes one :class:`Diagnostic` whose `raw`
field is the block verbatim. Output without recognizable blocks becomes a
single diagnostic of stage Unknown.

"""
import re
from dataclasses import dataclass
from typing import Optional, Tuple

from zk_coder.constants import (
    CIRCOM,
    STAGE_CONSTRAINT,
    STAGE_LINK,
    STAGE_PARSE,
    STAGE_TYPE,
    STAGE_UNKNOWN,
)


_HEADER = re.compile(r"^\s*error(?:\[(?P<code>[A-Za-z]+\d*)\])?\s*:\s*(?P<message>.*)$")
_LOCATION = re.compile(r"[\"']?[\w./\\-]+\.(?:circom|nr)[\"']?:(?P<line>\d+):(?P<column>\d+)")
_TRAILER = re.compile(r"^\s*(previous errors were found|Aborting due to|error: Aborting)", re.IGNORECASE)

_CIRCOM_CODE_STAGES = (
    (re.compile(r"^P1014$"), STAGE_LINK),
    (re.compile(r"^P\d+$"), STAGE_PARSE),
    (re.compile(r"^T2\d+$"), STAGE_TYPE),
    (re.compile(r"^(T3\d+|CA\d+)$"), STAGE_CONSTRAINT),
)
_CIRCOM_MESSAGE_STAGES = (
    (re.compile(r"to be included has not been found|include", re.IGNORECASE), STAGE_LINK),
    (re.compile(r"non quadratic|constraint|<--|assigned", re.IGNORECASE), STAGE_CONSTRAINT),
    (re.compile(r"undeclared|not declared|type|dimension|unknown", re.IGNORECASE), STAGE_TYPE),
    (re.compile(r"parse|expected|unexpected|illegal|unrecognized", re.IGNORECASE), STAGE_PARSE),
)
_NOIR_MESSAGE_STAGES = (
    (re.compile(r"could not resolve|unresolved import|cannot find|not found in this scope|no such module",
                re.IGNORECASE), STAGE_LINK),
    (re.compile(r"\btypes?\b|mismatch|cannot be used|no method|not implemented|cast|unsupported",
                re.IGNORECASE), STAGE_TYPE),
    (re.compile(r"expected|unexpected|parse|syntax|unterminated", re.IGNORECASE), STAGE_PARSE),
    (re.compile(r"failed constraint|assertion|unconstrained", re.IGNORECASE), STAGE_CONSTRAINT),
)


@dataclass(frozen=True)
class Diagnostic:
    stage: str
    message: str
    location: Optional[Tuple[int, int]]
    raw: str

    def describe(self):
        where = "line {}, column {}: ".format(*self.location) if self.location else ""
        return "[{}] {}{}".format(self.stage, where, self.message)


def circom_stage(code, message):
    """Stage of a Circom error from its error code, falling back on its message."""
    if code:
        for pattern, stage in _CIRCOM_CODE_STAGES:
            if pattern.match(code):
                return stage
    for pattern, stage in _CIRCOM_MESSAGE_STAGES:
        if pattern.search(message):
            return stage
    return STAGE_UNKNOWN


def noir_stage(message):
    for pattern, stage in _NOIR_MESSAGE_STAGES:
        if pattern.search(message):
            return stage
    return STAGE_UNKNOWN


def _blocks(output):
    blocks, current = [], None
    for line in output.splitlines():
        if _HEADER.match(line):
            if current:
                blocks.append(current)
            current = [line]
        elif _TRAILER.match(line):
            if current:
                blocks.append(current)
            current = None
        elif current is not None:
            current.append(line)
    if current:
        blocks.append(current)
    return blocks


def parse_diagnostics(target, output):
    """
    Diagnostics of a failed compilation.

    Parameters
    ----------
    target : str
        ``"circom"`` or ``"noir"``.
    output : str
        Captured standard error (and standard output) of the compiler.

    Returns
    -------
    list of Diagnostic
        Never empty for non-blank output.

    """
    diagnostics = []
    for block in _blocks(output):
        header = _HEADER.match(block[0])
        message = header.group("message").strip()
        location = None
        for line in block[1:]:
            match = _LOCATION.search(line)
            if match:
                location = (int(match.group("line")), int(match.group("column")))
                break
        if target == CIRCOM:
            stage = circom_stage(header.group("code"), message)
        else:
            stage = noir_stage(message)
        diagnostics.append(Diagnostic(stage, message, location, "\n".join(block).rstrip()))

    if not diagnostics and output.strip():
        lines = [line for line in output.strip().splitlines() if line.strip()]
        match = _LOCATION.search(output)
        location = (int(match.group("line")), int(match.group("column"))) if match else None
        diagnostics.append(Diagnostic(STAGE_UNKNOWN, lines[-1].strip(), location, output.strip()))
    return diagnostics


def render_diagnostics(diagnostics):
    """Compiler feedback for a repair prompt: the raw blocks, separated by blank lines."""
    return "\n\n".join(diagnostic.raw for diagnostic in diagnostics) + "\n"
