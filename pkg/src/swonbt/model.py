"""Finite tree presentations of branching-time models.

A model is a finite rooted tree of states with a valuation.  Each leaf is
conceptually followed by an infinite chain of copies of itself, so every
root-to-leaf path names one infinite timeline and the clock is total:
``state_at(t, i)`` returns the leaf for every position past the explicit
path.  Timelines are identified by their leaf id and ordered by it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class ModelValidationError(ValueError):
    pass


class MultipleRoots(ModelValidationError):
    pass


class Cycle(ModelValidationError):
    pass


class UnreachableState(ModelValidationError):
    pass


class DuplicateStateId(ModelValidationError):
    pass


class UnknownParent(ModelValidationError):
    pass


@dataclass(frozen=True)
class RawState:
    """One ``state`` declaration before validation."""

    id: str
    parent: str | None
    atoms: frozenset[str]


@dataclass(frozen=True)
class Timeline:
    """A root-anchored maximal path, named by its leaf."""

    leaf: str
    path: tuple[str, ...]

    def state_at(self, i: int) -> str:
        if i < 0:
            raise ValueError("clock positions are natural numbers")
        return self.path[min(i, len(self.path) - 1)]

    def __str__(self):
        return self.leaf


@dataclass(frozen=True)
class TreeModel:
    root: str
    parent: dict[str, str]
    valuation: dict[str, frozenset[str]]
    children: dict[str, tuple[str, ...]] = field(repr=False, default_factory=dict)
    _timelines: tuple[Timeline, ...] = field(repr=False, default=())

    @property
    def states(self) -> list[str]:
        return sorted(self.valuation)

    @property
    def leaves(self) -> list[str]:
        return [t.leaf for t in self._timelines]

    def timelines(self) -> tuple[Timeline, ...]:
        """One timeline per leaf, ordered by leaf id."""
        return self._timelines

    def timeline(self, leaf: str) -> Timeline:
        for t in self._timelines:
            if t.leaf == leaf:
                return t
        raise KeyError("no timeline with leaf {!r}".format(leaf))

    def depth(self) -> int:
        return max(len(t.path) for t in self._timelines) - 1

    def holds(self, state: str, atom: str) -> bool:
        return atom in self.valuation[state]


def validate_model(raw: list[RawState]) -> TreeModel:
    """Check the tree invariants and build a :class:`TreeModel`.

    Exactly one declared state may be the root; every other state must
    reach it through a unique acyclic parent chain.
    """
    if not raw:
        raise ModelValidationError("a model needs at least one state")
    seen = set()
    for st in raw:
        if st.id in seen:
            raise DuplicateStateId("state {!r} declared twice".format(st.id))
        seen.add(st.id)
    roots = [st.id for st in raw if st.parent is None]
    if len(roots) > 1:
        raise MultipleRoots("states {} all claim to be the root".format(", ".join(roots)))
    if not roots:
        raise ModelValidationError("no root state declared")
    root = roots[0]
    parent = {st.id: st.parent for st in raw if st.parent is not None}
    for sid, pid in parent.items():
        if pid not in seen:
            raise UnknownParent("state {!r} has unknown parent {!r}".format(sid, pid))
    # Walk each parent chain; a chain that revisits a state never reaches
    # the root.  States on the loop itself form a cycle, states hanging
    # off the loop are merely unreachable from the root.
    for st in raw:
        chain = []
        pos = {}
        cur = st.id
        while cur != root:
            if cur in pos:
                loop = set(chain[pos[cur]:])
                if st.id in loop:
                    raise Cycle("state {!r} lies on a parent cycle".format(st.id))
                raise UnreachableState(
                    "state {!r} never reaches the root {!r}".format(st.id, root))
            pos[cur] = len(chain)
            chain.append(cur)
            cur = parent[cur]
    valuation = {st.id: st.atoms for st in raw}
    children: dict[str, list[str]] = {st.id: [] for st in raw}
    for sid, pid in parent.items():
        children[pid].append(sid)
    children_t = {k: tuple(sorted(v)) for k, v in children.items()}
    leaves = sorted(sid for sid, kids in children_t.items() if not kids)
    timelines = []
    for leaf in leaves:
        path = [leaf]
        while path[-1] != root:
            path.append(parent[path[-1]])
        timelines.append(Timeline(leaf, tuple(reversed(path))))
    return TreeModel(root, parent, valuation, children_t, tuple(timelines))


# ---------------------------------------------------------------------------
# File formats


def parse_model_text(text: str) -> list[RawState]:
    raw = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) < 3 or parts[0] != "state":
            raise ModelValidationError("line {}: expected 'state <id> ...'".format(lineno))
        sid = parts[1]
        rest = parts[2].strip()
        if rest.startswith("root"):
            parent = None
            rest = rest[len("root"):].strip()
        elif rest.startswith("parent="):
            rest_parts = rest[len("parent="):].split(None, 1)
            parent = rest_parts[0]
            rest = rest_parts[1].strip() if len(rest_parts) > 1 else ""
        else:
            raise ModelValidationError(
                "line {}: expected 'root' or 'parent=<id>'".format(lineno))
        if not (rest.startswith("{") and rest.endswith("}")):
            raise ModelValidationError("line {}: expected '{{atom, ...}}'".format(lineno))
        body = rest[1:-1].strip()
        atoms = frozenset(a.strip() for a in body.split(",") if a.strip()) if body else frozenset()
        raw.append(RawState(sid, parent, atoms))
    return raw


def parse_model_json(text: str) -> list[RawState]:
    data = json.loads(text)
    raw = []
    for entry in data["states"]:
        raw.append(RawState(entry["id"], entry.get("parent"),
                            frozenset(entry.get("atoms", []))))
    return raw


def load_model(path: str) -> TreeModel:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).endswith(".json"):
        return validate_model(parse_model_json(text))
    return validate_model(parse_model_text(text))


def model_to_text(model: TreeModel) -> str:
    lines = []
    order = [model.root] + [s for s in model.states if s != model.root]
    for sid in order:
        atoms = ", ".join(sorted(model.valuation[sid]))
        where = "root" if sid == model.root else "parent={}".format(model.parent[sid])
        lines.append("state {} {} {{{}}}".format(sid, where, atoms))
    return "\n".join(lines) + "\n"
