"""
Gadget knowledge base and constraint-guided retrieval.

One YAML file per catalog gadget holds the gadget's typing, aliases and a
usage snippet for each target language. Retrieval is an exact lookup on the
(canonical name, operand types, arity) key of a constraint primitive: there is
no fuzzy fallback, a miss means the catalog and the extractor disagree.

"""
from dataclasses import dataclass, field
from logging import getLogger
from os import listdir
from os.path import dirname, isdir, join
from types import MappingProxyType
from typing import (
    Mapping,
    Optional,
    Tuple,
    Union,
)

import yaml

from zk_coder.catalog import CATALOG, ROWS_BY_KEY
from zk_coder.constants import (
    BOOL,
    FIELD,
    VALID_CATEGORY,
    VALID_PROVENANCE,
    VALID_TARGET,
    VARIADIC,
)
from zk_coder.errors import KbError, RetrievalMiss
from zk_coder.extract import ConstraintPrimitive


LOG = getLogger(__name__)

DEFAULT_KB_PATH = join(dirname(__file__), "data", "kb")

NO_HINTS_MARKER = "No library hints apply to this sketch."

_SNIPPET_FIELDS = ("import", "instantiation", "notes", "provenance")


@dataclass(frozen=True)
class UsageSnippet:
    import_or_decl: str
    instantiation: str
    notes: str
    provenance: str


@dataclass(frozen=True)
class GadgetEntry:
    name: str
    label: str
    category: str
    operands: Tuple[str, ...]
    result: str
    arity: Union[int, str]
    aliases: Tuple[str, ...]
    snippets: Mapping[str, UsageSnippet] = field(compare=False)
    path: Optional[str] = field(default=None, compare=False)

    @property
    def key(self):
        return (self.name, self.operands, self.arity)

    def snippet(self, target):
        return self.snippets[target]


@dataclass(frozen=True)
class Hint:
    primitive: ConstraintPrimitive
    entry: GadgetEntry
    snippet: UsageSnippet
    target: str


class KnowledgeBase:
    """
    Immutable collection of gadget entries indexed by their typing key.

    Entries are ordered like the catalog. Lookups never mutate, so one instance
    may be shared by any number of concurrent runs.

    """

    def __init__(self, entries, path=None):
        order = {row.key: position for position, row in enumerate(CATALOG)}
        self._entries = tuple(sorted(entries, key=lambda entry: order[entry.key]))
        self._by_key = MappingProxyType({entry.key: entry for entry in self._entries})
        self._by_label = MappingProxyType({entry.label: entry for entry in self._entries})
        self.path = path

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    @property
    def entries(self):
        return self._entries

    def lookup(self, key):
        return self._by_key.get(tuple(key))

    def entry(self, label):
        return self._by_label[label]


def _malformed(path, reason):
    return KbError(KbError.MALFORMED_FILE, "{} ({})".format(path, reason))


def _parse_arity(value, path):
    if value == VARIADIC:
        return VARIADIC
    if isinstance(value, int) and not isinstance(value, bool) and value > 0:
        return value
    raise _malformed(path, "arity must be a positive integer or 'variadic'")


def _parse_snippets(document, name, path):
    snippets = document.get("snippets") or {}
    if not isinstance(snippets, dict):
        raise _malformed(path, "'snippets' must be a mapping")
    parsed = {}
    for target in VALID_TARGET:
        block = snippets.get(target)
        if block and not isinstance(block, dict):
            raise _malformed(path, "the {} snippet must be a mapping".format(target))
        if not block or not str(block.get("instantiation") or "").strip():
            raise KbError(KbError.MISSING_SNIPPET, "{} has no {} snippet".format(name, target))
        provenance = block.get("provenance")
        if provenance not in VALID_PROVENANCE:
            raise _malformed(path, "provenance of the {} snippet must be one of: {}".format(
                target,
                ", ".join(VALID_PROVENANCE),
            ))
        parsed[target] = UsageSnippet(
            import_or_decl=str(block.get("import") or "").strip(),
            instantiation=str(block["instantiation"]).rstrip() + "\n",
            notes=" ".join(str(block.get("notes") or "").split()),
            provenance=provenance,
        )
    return MappingProxyType(parsed)


def _parse_entry(path):
    try:
        with open(path) as stream:
            document = yaml.safe_load(stream)
    except OSError as error:
        raise _malformed(path, "unreadable: {}".format(error))
    except yaml.YAMLError as error:
        raise _malformed(path, "invalid YAML: {}".format(error))

    if not isinstance(document, dict):
        raise _malformed(path, "top level must be a mapping")
    missing = [key for key in ("name", "label", "category", "typing") if key not in document]
    if missing:
        raise _malformed(path, "missing field(s): {}".format(", ".join(missing)))
    if document["category"] not in VALID_CATEGORY:
        raise _malformed(path, "category must be one of: {}".format(", ".join(VALID_CATEGORY)))

    typing = document["typing"]
    if not isinstance(typing, dict) or not {"operands", "result", "arity"} <= set(typing):
        raise _malformed(path, "typing must give operands, result and arity")
    operands = tuple(typing["operands"] or ())
    if not operands or any(operand not in (FIELD, BOOL) for operand in operands + (typing["result"],)):
        raise _malformed(path, "operand and result types must be Field or Bool")
    arity = _parse_arity(typing["arity"], path)

    name = document["name"]
    row = ROWS_BY_KEY.get((name, operands, arity))
    if row is None:
        raise _malformed(path, "{}({}) arity {} is not a catalog gadget".format(name, ",".join(operands), arity))
    if row.label != document["label"] or row.category != document["category"] or row.result != typing["result"]:
        raise _malformed(path, "label, category or result type disagree with the catalog row {}".format(row.label))

    return GadgetEntry(
        name=name,
        label=row.label,
        category=row.category,
        operands=operands,
        result=row.result,
        arity=arity,
        aliases=tuple(document.get("aliases") or ()),
        snippets=_parse_snippets(document, row.label, path),
        path=path,
    )


def load_kb(path=None):
    """
    Load and validate the gadget knowledge base.

    Parameters
    ----------
    path : str, optional
        Directory holding one ``*.yaml`` file per gadget. Defaults to the
        knowledge base shipped with the package.

    Returns
    -------
    KnowledgeBase

    Raises
    ------
    KbError
        `kind` is MalformedFile for an unreadable or inconsistent file,
        DuplicateTyping when two files claim the same typing, MissingSnippet
        when a gadget lacks a snippet for a target language and MissingGadget
        when a catalog row has no file.

    """
    path = path or DEFAULT_KB_PATH
    if not isdir(path):
        raise KbError(KbError.MALFORMED_FILE, "{} is not a directory".format(path))

    entries = {}
    for filename in sorted(listdir(path)):
        if not filename.endswith((".yaml", ".yml")):
            continue
        entry = _parse_entry(join(path, filename))
        if entry.key in entries:
            raise KbError(KbError.DUPLICATE_TYPING, "{} and {} both define {}".format(
                entries[entry.key].path,
                entry.path,
                entry.label,
            ))
        entries[entry.key] = entry

    for row in CATALOG:
        if row.key not in entries:
            raise KbError(KbError.MISSING_GADGET, row.label)

    LOG.debug("load_kb() - loaded %d gadget entries from %s", len(entries), path)
    return KnowledgeBase(entries.values(), path=path)


def retrieve(kb, primitives, target):
    """
    One hint per constraint primitive, in input order.

    Raises
    ------
    ValueError
        If `target` is not a supported language.
    RetrievalMiss
        If a primitive has no exactly matching entry.

    """
    if target not in VALID_TARGET:
        raise ValueError("'target' must be set to one of: {}.".format(", ".join(VALID_TARGET)))
    hints = []
    for primitive in primitives:
        entry = kb.lookup(primitive.key)
        if entry is None:
            raise RetrievalMiss(primitive)
        hints.append(Hint(primitive, entry, entry.snippet(target), target))
    LOG.debug("retrieve() - %d hint(s) for %s", len(hints), target)
    return hints


def catalog_hints(kb, target):
    """Hints for every gadget in the knowledge base, for runs without a sketch."""
    primitives = [
        ConstraintPrimitive(entry.name, entry.operands, entry.arity, index)
        for index, entry in enumerate(kb)
    ]
    return retrieve(kb, primitives, target)


def render_hints(hints):
    """
    Render hints as the library-hint block of a code generation prompt.

    Each hint becomes one numbered section with the import, the usage excerpt
    and the notes of its snippet.

    """
    if not hints:
        return NO_HINTS_MARKER + "\n"
    sections = []
    for number, hint in enumerate(hints, start=1):
        lines = [
            "### Hint {}: {} [{} gadget {}, {}]".format(
                number,
                hint.primitive.signature(),
                hint.target,
                hint.entry.label,
                hint.snippet.provenance,
            ),
            "Import:",
            hint.snippet.import_or_decl or "(none)",
            "Usage:",
            hint.snippet.instantiation.rstrip(),
        ]
        if hint.snippet.notes:
            lines.append("Notes: {}".format(hint.snippet.notes))
        sections.append("\n".join(lines))
    return "\n\n".join(sections) + "\n"
