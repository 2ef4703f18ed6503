"""Ontic-rule contexts and the accepted/expected timeline computation.

A context holds named rules (each a set of timelines, referenced by leaf
id), a strict priority order between rule names, and a set of
undefeatable rule names.  Rules are layered into a hierarchy by
repeatedly taking the maximal elements; the accepted set is what the
undefeatable rules jointly enable, the expected set is what the longest
non-conflicting prefix of the hierarchy enables.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .model import TreeModel


class ContextValidationError(ValueError):
    pass


class ReflexiveOrder(ContextValidationError):
    pass


class UnknownRule(ContextValidationError):
    pass


class UnknownTimeline(ContextValidationError):
    pass


class UndefeatableNotMaximal(ContextValidationError):
    pass


class EmptyAccepted(ContextValidationError):
    pass


@dataclass(frozen=True)
class Context:
    """Rules map names to timeline sets (leaf ids); ``order`` is strict."""

    rules: dict[str, frozenset[str]]
    order: frozenset[tuple[str, str]]
    undefeatable: frozenset[str]

    def rule_names(self) -> list[str]:
        return sorted(self.rules)


@dataclass(frozen=True)
class Hierarchy:
    layers: tuple[frozenset[str], ...]


EMPTY_CONTEXT = Context({}, frozenset(), frozenset())


def _transitive_closure(pairs: set[tuple[str, str]]) -> set[tuple[str, str]]:
    closure = set(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c, d in list(closure):
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
    return closure


def make_context(rules: dict[str, frozenset[str]],
                 order_pairs: set[tuple[str, str]],
                 undefeatable: set[str],
                 model: TreeModel | None = None) -> Context:
    """Validate and build a context; the order is transitively closed."""
    for a, b in order_pairs:
        for name in (a, b):
            if name not in rules:
                raise UnknownRule("order mentions unknown rule {!r}".format(name))
    closure = _transitive_closure(order_pairs)
    for a, b in closure:
        if a == b:
            raise ReflexiveOrder("priority order puts {!r} above itself".format(a))
    for name in undefeatable:
        if name not in rules:
            raise UnknownRule("undefeatable set mentions unknown rule {!r}".format(name))
    maximal = {name for name in rules
               if not any(b == name for _, b in closure)}
    stray = set(undefeatable) - maximal
    if stray:
        raise UndefeatableNotMaximal(
            "undefeatable rules must be maximal; {} are not".format(", ".join(sorted(stray))))
    if model is not None:
        leaves = set(model.leaves)
        for name, members in rules.items():
            unknown = members - leaves
            if unknown:
                raise UnknownTimeline(
                    "rule {!r} names unknown timelines {}".format(
                        name, ", ".join(sorted(unknown))))
    by_content: dict[frozenset[str], str] = {}
    for name in sorted(rules):
        content = rules[name]
        if content in by_content:
            warnings.warn(
                "rules {!r} and {!r} have identical timeline sets".format(
                    by_content[content], name))
        else:
            by_content[content] = name
    return Context(dict(rules), frozenset(closure), frozenset(undefeatable))


def hierarchy(c: Context) -> Hierarchy:
    """Layer the rules by iterated maximal elements.

    The result is never the empty sequence: a context with no rules
    yields the one-layer hierarchy whose layer is empty.
    """
    remaining = set(c.rules)
    layers: list[frozenset[str]] = []
    if not remaining:
        return Hierarchy((frozenset(),))
    while remaining:
        layer = frozenset(
            name for name in remaining
            if not any(a in remaining and b == name for a, b in c.order))
        layers.append(layer)
        remaining -= layer
    return Hierarchy(tuple(layers))


def en(rule_sets: list[frozenset[str]], m: TreeModel) -> frozenset[str]:
    """Timelines enabled by a set of rules: the intersection of the rules,
    or every timeline when there are no rules."""
    enabled = frozenset(m.leaves)
    for members in rule_sets:
        enabled &= members
    return enabled


def accepted(c: Context, m: TreeModel) -> frozenset[str]:
    """Timelines enabled by the undefeatable rules."""
    return en([c.rules[name] for name in c.undefeatable], m)


def expected(c: Context, m: TreeModel) -> frozenset[str]:
    """Timelines enabled by the longest initial segment of the hierarchy
    whose running intersection is nonempty; empty if even the top layer
    enables nothing."""
    layers = hierarchy(c).layers
    running = en([c.rules[name] for name in layers[0]], m)
    if not running:
        return frozenset()
    result = running
    for layer in layers[1:]:
        running = running & en([c.rules[name] for name in layer], m)
        if not running:
            break
        result = running
    return result


def context_from_ae(at: frozenset[str], et: frozenset[str],
                    model: TreeModel | None = None) -> Context:
    """Build a context whose accepted set is ``at`` and expected set is ``et``.

    When ``et`` is nonempty, two ordered rules do the job; when it is
    empty, an empty rule placed next to ``at`` in the top layer forces the
    expected set empty without touching the accepted set.
    """
    if not at:
        raise EmptyAccepted("the accepted set of timelines must be nonempty")
    if not et <= at:
        raise ContextValidationError("expected timelines must be accepted")
    if et:
        rules = {"accept": frozenset(at), "expect": frozenset(et)}
        return make_context(rules, {("accept", "expect")}, {"accept"}, model)
    rules = {"accept": frozenset(at), "veto": frozenset()}
    return make_context(rules, set(), {"accept"}, model)


# ---------------------------------------------------------------------------
# File format


def parse_context_text(text: str, model: TreeModel | None = None) -> Context:
    rules: dict[str, frozenset[str]] = {}
    order_pairs: set[tuple[str, str]] = set()
    undefeatable: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("rule "):
            rest = line[len("rule "):]
            if "=" not in rest:
                raise ContextValidationError(
                    "line {}: expected 'rule <name> = {{...}}'".format(lineno))
            name, body = rest.split("=", 1)
            name = name.strip()
            body = body.strip()
            if not (body.startswith("{") and body.endswith("}")):
                raise ContextValidationError(
                    "line {}: expected '{{leafId, ...}}'".format(lineno))
            inner = body[1:-1].strip()
            members = frozenset(x.strip() for x in inner.split(",") if x.strip()) \
                if inner else frozenset()
            if name in rules:
                raise ContextValidationError(
                    "line {}: rule {!r} declared twice".format(lineno, name))
            rules[name] = members
        elif line.startswith("order "):
            rest = line[len("order "):]
            if ">" not in rest:
                raise ContextValidationError(
                    "line {}: expected 'order <name> > <name>'".format(lineno))
            a, b = rest.split(">", 1)
            order_pairs.add((a.strip(), b.strip()))
        elif line.startswith("undefeatable"):
            rest = line[len("undefeatable"):].strip()
            if not (rest.startswith("{") and rest.endswith("}")):
                raise ContextValidationError(
                    "line {}: expected 'undefeatable {{...}}'".format(lineno))
            inner = rest[1:-1].strip()
            if inner:
                undefeatable |= {x.strip() for x in inner.split(",") if x.strip()}
        else:
            raise ContextValidationError(
                "line {}: unrecognized declaration {!r}".format(lineno, line))
    return make_context(rules, order_pairs, undefeatable, model)


def load_context(path: str, model: TreeModel | None = None) -> Context:
    with open(path, encoding="utf-8") as fh:
        return parse_context_text(fh.read(), model)


def context_to_text(c: Context) -> str:
    lines = []
    for name in sorted(c.rules):
        lines.append("rule {} = {{{}}}".format(name, ", ".join(sorted(c.rules[name]))))
    for a, b in sorted(c.order):
        lines.append("order {} > {}".format(a, b))
    lines.append("undefeatable {{{}}}".format(", ".join(sorted(c.undefeatable))))
    return "\n".join(lines) + "\n"
