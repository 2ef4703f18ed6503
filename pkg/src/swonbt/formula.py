"""Formula AST, concrete syntax, and fragment classification.

The core AST has exactly eight node kinds: atoms, falsum, negation,
conjunction, the next and last moment operators, and the strong and weak
necessity boxes.  Everything else (``true``, ``|``, ``->``, ``<->``,
``<S>``, ``<W>``) is parser sugar and is expanded at construction time,
so downstream evaluators and rewriters only ever see the primitives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator


class Formula:
    """Base class for all formulas. Instances are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Bottom(Formula):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula

    def __str__(self):
        return "~" + str(self.sub)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return "({} & {})".format(self.left, self.right)


@dataclass(frozen=True)
class Next(Formula):
    sub: Formula

    def __str__(self):
        return "X " + str(self.sub)


@dataclass(frozen=True)
class Yesterday(Formula):
    sub: Formula

    def __str__(self):
        return "Y " + str(self.sub)


@dataclass(frozen=True)
class StrongNec(Formula):
    sub: Formula

    def __str__(self):
        return "[S] " + str(self.sub)


@dataclass(frozen=True)
class WeakNec(Formula):
    sub: Formula

    def __str__(self):
        return "[W] " + str(self.sub)


FALSE = Bottom()


def true_() -> Formula:
    return Not(FALSE)


def disj(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def implies(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


def diamond_s(a: Formula) -> Formula:
    return Not(StrongNec(Not(a)))


def diamond_w(a: Formula) -> Formula:
    return Not(WeakNec(Not(a)))


def conj_all(parts: list[Formula]) -> Formula:
    """Right-nested conjunction of ``parts``; ``~false`` when empty."""
    if not parts:
        return true_()
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj_all(parts: list[Formula]) -> Formula:
    """Right-nested disjunction of ``parts``; ``false`` when empty."""
    if not parts:
        return FALSE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = disj(p, out)
    return out


def size(phi: Formula) -> int:
    """Number of AST nodes."""
    if isinstance(phi, (Atom, Bottom)):
        return 1
    if isinstance(phi, And):
        return 1 + size(phi.left) + size(phi.right)
    return 1 + size(phi.sub)


def subformulas(phi: Formula) -> Iterator[Formula]:
    """All subformula occurrences, preorder."""
    yield phi
    if isinstance(phi, And):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif not isinstance(phi, (Atom, Bottom)):
        yield from subformulas(phi.sub)


def atoms(phi: Formula) -> set[str]:
    return {f.name for f in subformulas(phi) if isinstance(f, Atom)}


def x_depth(phi: Formula) -> int:
    """Maximum nesting of the next-moment operator."""
    if isinstance(phi, (Atom, Bottom)):
        return 0
    if isinstance(phi, And):
        return max(x_depth(phi.left), x_depth(phi.right))
    d = x_depth(phi.sub)
    return d + 1 if isinstance(phi, Next) else d


def y_depth(phi: Formula) -> int:
    """Maximum nesting of the last-moment operator."""
    if isinstance(phi, (Atom, Bottom)):
        return 0
    if isinstance(phi, And):
        return max(y_depth(phi.left), y_depth(phi.right))
    d = y_depth(phi.sub)
    return d + 1 if isinstance(phi, Yesterday) else d


def temporal_depth(phi: Formula) -> int:
    """Maximum nesting of temporal operators of either direction."""
    if isinstance(phi, (Atom, Bottom)):
        return 0
    if isinstance(phi, And):
        return max(temporal_depth(phi.left), temporal_depth(phi.right))
    d = temporal_depth(phi.sub)
    return d + 1 if isinstance(phi, (Next, Yesterday)) else d


# ---------------------------------------------------------------------------
# Fragments


class Fragment(Enum):
    SWONBT = "swonbt"
    SWXXYY = "swxxyy"
    XXYY = "xxyy"
    SW1 = "sw1"
    PROPOSITIONAL = "propositional"


def is_propositional(phi: Formula) -> bool:
    """True iff the formula contains no temporal or modal operators."""
    return all(isinstance(f, (Atom, Bottom, Not, And)) for f in subformulas(phi))


def _is_prefixed_leaf(phi: Formula) -> bool:
    # A homogeneous stack of X (or of Y) over an atom or falsum; bare
    # atoms and falsum count as stacks of height zero.
    f = phi
    if isinstance(f, Next):
        while isinstance(f, Next):
            f = f.sub
    elif isinstance(f, Yesterday):
        while isinstance(f, Yesterday):
            f = f.sub
    return isinstance(f, (Atom, Bottom))


def is_xxyy(phi: Formula) -> bool:
    """Membership in the modality-free prefixed-literal fragment."""
    if _is_prefixed_leaf(phi):
        return True
    if isinstance(phi, Not):
        return is_xxyy(phi.sub)
    if isinstance(phi, And):
        return is_xxyy(phi.left) and is_xxyy(phi.right)
    return False


def is_swxxyy(phi: Formula) -> bool:
    """Like :func:`is_xxyy` but with the two boxes allowed at any depth."""
    if _is_prefixed_leaf(phi):
        return True
    if isinstance(phi, Not):
        return is_swxxyy(phi.sub)
    if isinstance(phi, And):
        return is_swxxyy(phi.left) and is_swxxyy(phi.right)
    if isinstance(phi, (StrongNec, WeakNec)):
        return is_swxxyy(phi.sub)
    return False


def is_sw1(phi: Formula) -> bool:
    """Boolean combinations of prefixed literals and unnested boxes."""
    if is_xxyy(phi):
        return True
    if isinstance(phi, Not):
        return is_sw1(phi.sub)
    if isinstance(phi, And):
        return is_sw1(phi.left) and is_sw1(phi.right)
    if isinstance(phi, (StrongNec, WeakNec)):
        return is_xxyy(phi.sub)
    return False


def classify(phi: Formula) -> set[Fragment]:
    """Every fragment tag whose grammar the formula satisfies."""
    tags = {Fragment.SWONBT}
    if is_swxxyy(phi):
        tags.add(Fragment.SWXXYY)
    if is_xxyy(phi):
        tags.add(Fragment.XXYY)
    if is_sw1(phi):
        tags.add(Fragment.SW1)
    if is_propositional(phi):
        tags.add(Fragment.PROPOSITIONAL)
    return tags


def is_closed(phi: Formula) -> bool:
    """True iff every branch bottoms out in a box before any atom.

    Closed formulas are generated by ``chi ::= [S]phi | [W]phi | ~chi |
    (chi & chi)``; their truth value does not depend on the evaluation
    timeline.
    """
    if isinstance(phi, (StrongNec, WeakNec)):
        return True
    if isinstance(phi, Not):
        return is_closed(phi.sub)
    if isinstance(phi, And):
        return is_closed(phi.left) and is_closed(phi.right)
    return False


# ---------------------------------------------------------------------------
# Concrete syntax


class ParseError(ValueError):
    def __init__(self, message, line, column):
        super().__init__("{} (line {}, column {})".format(message, line, column))
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lbox>\[S\]|\[W\])
  | (?P<ldia><S>|<W>)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<op>[&|~()])
  | (?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"false", "true", "X", "Y"}


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("unknown token {!r}".format(text[pos]), line, col)
        value = m.group(0)
        if m.lastgroup != "ws":
            if m.lastgroup == "ident" and value in _KEYWORDS:
                tokens.append((value, value, line, col))
            else:
                tokens.append((m.lastgroup, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message):
        kind, value, line, col = self.peek()
        raise ParseError(message, line, col)

    def expect(self, value):
        kind, got, line, col = self.next()
        if got != value:
            raise ParseError("expected {!r}, got {!r}".format(value, got), line, col)

    def parse(self):
        phi = self.parse_iff()
        if self.peek()[0] != "eof":
            self.error("unexpected token {!r} after formula".format(self.peek()[1]))
        return phi

    def parse_iff(self):
        left = self.parse_imp()
        while self.peek()[1] == "<->":
            self.next()
            left = iff(left, self.parse_imp())
        return left

    def parse_imp(self):
        left = self.parse_or()
        if self.peek()[1] == "->":
            self.next()
            return implies(left, self.parse_imp())
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.peek()[1] == "|":
            self.next()
            left = disj(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_unary()
        while self.peek()[1] == "&":
            self.next()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self):
        kind, value, line, col = self.peek()
        if value == "~":
            self.next()
            return Not(self.parse_unary())
        if value == "X":
            self.next()
            return Next(self.parse_unary())
        if value == "Y":
            self.next()
            return Yesterday(self.parse_unary())
        if value == "[S]":
            self.next()
            return StrongNec(self.parse_unary())
        if value == "[W]":
            self.next()
            return WeakNec(self.parse_unary())
        if value == "<S>":
            self.next()
            return diamond_s(self.parse_unary())
        if value == "<W>":
            self.next()
            return diamond_w(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        kind, value, line, col = self.next()
        if value == "false":
            return FALSE
        if value == "true":
            return true_()
        if kind == "ident":
            return Atom(value)
        if value == "(":
            phi = self.parse_iff()
            self.expect(")")
            return phi
        raise ParseError("expected a formula, got {!r}".format(value or "end of input"), line, col)


def parse(text: str) -> Formula:
    """Parse concrete syntax into a sugar-free AST."""
    return _Parser(text).parse()


def print_formula(phi: Formula) -> str:
    """Canonical rendering; ``parse(print_formula(phi))`` equals ``phi``."""
    return str(phi)
