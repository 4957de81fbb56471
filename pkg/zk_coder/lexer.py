"""
Tokenizer for the ZKSL concrete syntax.

Blocks are delimited by indentation, as in Python: the lexer emits INDENT and
DEDENT tokens around nested blocks and a NEWLINE token at the end of every
logical line. Line breaks inside brackets do not end a logical line.

"""
import re
from dataclasses import dataclass

from zk_coder.errors import ParseFailure


NAME = "NAME"
INT = "INT"
OP = "OP"
KEYWORD = "KEYWORD"
NEWLINE = "NEWLINE"
INDENT = "INDENT"
DEDENT = "DEDENT"
EOF = "EOF"

KEYWORDS = frozenset((
    "def", "return", "for", "in", "range", "if", "else",
    "and", "or", "not", "xor", "all", "any", "True", "False",
))

_TOKEN = re.compile(r"""
    (?P<ws>[ ]+)
  | (?P<comment>\#.*)
  | (?P<int>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|//|==|!=|<=|>=|[-+*/%<>=()\[\],:.])
""", re.VERBOSE)

_OPEN = "(["
_CLOSE = ")]"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int

    @property
    def end_column(self):
        return self.column + len(self.text)

    def is_(self, kind, text=None):
        return self.kind == kind and (text is None or self.text == text)

    def __str__(self):
        if self.kind in (NEWLINE, INDENT, DEDENT, EOF):
            return self.kind
        return repr(self.text)


def tokenize(source):
    """
    Split ZKSL `source` into a list of tokens, ending with EOF.

    Raises
    ------
    ParseFailure
        On tabs, characters outside the language, unbalanced brackets or
        dedents that do not return to an enclosing indentation level.

    """
    tokens = []
    indents = [0]
    depth = 0
    lines = source.split("\n")
    line_no = 0

    for line_no, raw in enumerate(lines, start=1):
        line = raw[:-1] if raw.endswith("\r") else raw
        if "\t" in line:
            raise ParseFailure(
                "tabs are not allowed, indent with spaces",
                line_no,
                line.index("\t") + 1,
                "indentation",
            )
        stripped = line.lstrip(" ")
        if depth == 0:
            if not stripped or stripped.startswith("#"):
                continue
            width = len(line) - len(stripped)
            if width > indents[-1]:
                indents.append(width)
                tokens.append(Token(INDENT, "", line_no, 1))
            else:
                while width < indents[-1]:
                    indents.pop()
                    tokens.append(Token(DEDENT, "", line_no, 1))
                if width != indents[-1]:
                    raise ParseFailure(
                        "unindent does not match any outer indentation level",
                        line_no,
                        width + 1,
                        "indentation",
                    )

        position = 0
        while position < len(line):
            match = _TOKEN.match(line, position)
            if not match:
                raise ParseFailure(
                    "unexpected character {!r}".format(line[position]),
                    line_no,
                    position + 1,
                    "token",
                )
            kind = match.lastgroup
            text = match.group()
            column = position + 1
            position = match.end()
            if kind in ("ws", "comment"):
                continue
            if kind == "int":
                tokens.append(Token(INT, text, line_no, column))
            elif kind == "name":
                tokens.append(Token(KEYWORD if text in KEYWORDS else NAME, text, line_no, column))
            else:
                if text in _OPEN:
                    depth += 1
                elif text in _CLOSE:
                    depth -= 1
                    if depth < 0:
                        raise ParseFailure("unbalanced {!r}".format(text), line_no, column, "token")
                tokens.append(Token(OP, text, line_no, column))

        if depth == 0 and tokens and tokens[-1].kind not in (NEWLINE, INDENT, DEDENT):
            tokens.append(Token(NEWLINE, "", line_no, len(line) + 1))

    if depth > 0:
        raise ParseFailure("unclosed bracket at end of input", line_no, 1, "token")

    end_line = line_no + 1
    for _ in indents[1:]:
        tokens.append(Token(DEDENT, "", end_line, 1))
    tokens.append(Token(EOF, "", end_line, 1))
    return tokens
