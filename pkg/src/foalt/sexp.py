"""S-expression reader with source positions.

Used by the automaton/frontend file formats and the SMT-LIB server.
Atoms are kept as strings; quoted symbols ``|...|`` and string literals
``"..."`` are supported, ``;`` starts a comment running to end of line.
"""

from __future__ import annotations

from dataclasses import dataclass


class SexpError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Atom:
    text: str
    line: int = 0
    col: int = 0

    def __repr__(self):
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int = 0
    col: int = 0

    def __repr__(self):
        return "(" + " ".join(repr(i) for i in self.items) + ")"

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]


def tokenize(text: str):
    line, col = 1, 0
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 0
            i += 1
        elif c.isspace():
            col += 1
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield (c, line, col)
            col += 1
            i += 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SexpError("unterminated |symbol|", line, col)
            yield (text[i + 1 : j], line, col)
            col += j - i + 1
            i = j + 1
        elif c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise SexpError("unterminated string", line, col)
            yield (text[i : j + 1], line, col)
            col += j - i + 1
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();|":
                j += 1
            yield (text[i:j], line, col)
            col += j - i
            i = j


def parse_all(text: str) -> list:
    """Parse every top-level form in ``text``."""
    stack: list[list] = []
    top: list = []
    opens: list[tuple[int, int]] = []
    for tok, line, col in tokenize(text):
        if tok == "(":
            stack.append([])
            opens.append((line, col))
        elif tok == ")":
            if not stack:
                raise SexpError("unbalanced ')'", line, col)
            items = stack.pop()
            oline, ocol = opens.pop()
            node = SList(tuple(items), oline, ocol)
            (stack[-1] if stack else top).append(node)
        else:
            node = Atom(tok, line, col)
            (stack[-1] if stack else top).append(node)
    if stack:
        oline, ocol = opens[-1]
        raise SexpError("unclosed '('", oline, ocol)
    return top


def parse_one(text: str):
    forms = parse_all(text)
    if len(forms) != 1:
        raise SexpError(f"expected exactly one form, got {len(forms)}")
    return forms[0]
