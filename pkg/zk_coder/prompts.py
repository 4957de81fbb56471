"""
Prompt construction.

Prompt texts are versioned `string.Template` files under
``zk_coder/data/prompts/<version>/``; this module fills them in and extracts
fenced code from model answers.

"""
import json
import re
from os.path import dirname, isdir, join
from string import Template

from zk_coder.catalog import CANONICAL_NAMES
from zk_coder.constants import (
    ACCEPTED,
    BOOL,
    CIRCOM,
    PROMPT_TEMPLATE_VERSION,
    REJECTED,
)
from zk_coder.errors import ConfigError


PROMPTS_PATH = join(dirname(__file__), "data", "prompts")

TARGET_NAMES = {
    "circom": "Circom",
    "noir": "Noir",
}
FENCES = {
    "circom": "circom",
    "noir": "rust",
}

_FENCED = re.compile(r"```[ \t]*(?P<lang>[\w+-]*)[^\n]*\n(?P<body>.*?)```", re.DOTALL)


class PromptLibrary:
    """
    Prompt templates of one version.

    Parameters
    ----------
    version : str
        Name of the template directory.
    path : str, optional
        Root holding the version directories; defaults to the shipped prompts.

    """

    def __init__(self, version=PROMPT_TEMPLATE_VERSION, path=None):
        self.version = version
        self.root = join(path or PROMPTS_PATH, version)
        if not isdir(self.root):
            raise ConfigError("no prompt templates for version {!r} in {}".format(version, self.root))
        self._templates = {}

    def template(self, name):
        if name not in self._templates:
            with open(join(self.root, "{}.txt".format(name))) as stream:
                self._templates[name] = Template(stream.read())
        return self._templates[name]

    def render(self, name, **fields):
        return self.template(name).substitute(**fields)


def _type_text(spec):
    text = str(spec.type)
    if spec.dims:
        text += " with dimensions {}".format(" x ".join(str(size) for size in spec.dims))
    return text


def signature_text(inputs):
    return "\n".join("- {}: {} ({})".format(spec.name, _type_text(spec), spec.role) for spec in inputs)


def _noir_type(spec):
    scalar = "bool" if spec.type.element().kind == BOOL else "Field"
    for size in reversed(spec.dims or (0,) * spec.type.depth()):
        scalar = "[{}; {}]".format(scalar, size)
    return scalar


def convention_text(target, inputs):
    """Interface rules a candidate program must follow so the harness can run it."""
    if target == CIRCOM:
        signals = ", ".join(
            "{}{}".format(spec.name, "".join("[{}]".format(size) for size in spec.dims)) for spec in inputs
        )
        return (
            "- Write one Circom 2 file with `pragma circom 2.0.0;`.\n"
            "- The main template declares exactly these input signals: {}. Bool inputs are 0/1 signals.\n"
            "- It declares exactly one output signal `valid`, set to 1 when the inputs are accepted and 0 "
            "otherwise.\n"
            "- Include circomlib files as `include \"circomlib/circuits/<file>.circom\";`.\n"
            "- End with `component main = <TemplateName>();`.\n"
        ).format(signals)
    params = ", ".join("{}: {}".format(spec.name, _noir_type(spec)) for spec in inputs)
    return (
        "- Write the contents of src/main.nr of a Noir binary package.\n"
        "- Declare `fn main({}) -> pub bool`.\n"
        "- Return true when the inputs are accepted and false otherwise; do not assert on the verdict.\n"
    ).format(params)


def gadget_list():
    return ", ".join(CANONICAL_NAMES)


def case_text(bindings):
    return json.dumps({name: bindings[name] for name in sorted(bindings)}, default=str)


def counterexample_text(failures):
    """
    One line per failing suite case.

    Parameters
    ----------
    failures : list of (SuiteCase, RunOutcome)

    """
    lines = []
    for number, (case, outcome) in enumerate(failures, start=1):
        observed = {ACCEPTED: "accept", REJECTED: "reject"}.get(outcome.verdict, outcome.verdict)
        if outcome.diagnostic is not None:
            observed = "{} ({})".format(observed, outcome.diagnostic.message)
        lines.append("{}. inputs {}: expected {}, observed {}".format(
            number,
            case_text(case.assignment.serialize()),
            "accept" if case.expects_accept else "reject",
            observed,
        ))
    return "\n".join(lines) + "\n"


def extract_code(text, languages=()):
    """
    Body of the last fenced block tagged with one of `languages`.

    Falls back to the last fenced block of any language, then to the whole
    answer when it holds no fence.

    """
    blocks = [(match.group("lang").lower(), match.group("body")) for match in _FENCED.finditer(text)]
    tagged = [body for lang, body in blocks if lang in languages]
    if tagged:
        return tagged[-1]
    if blocks:
        return blocks[-1][1]
    return text.strip() + "\n"
