"""Satisfiability and validity decisions with replayable witnesses.

The decision path flattens the query, splits it into disjuncts, merges
each into a core formula, and enumerates atomic sequences.  A sequence
is realizable iff its slots admit a common evaluation clock at which all
constraints landing on the shared origin are jointly consistent; the
witness is then a star of private branches under one root, with a
one-rule context that makes exactly the weak-witness branches expected
(or an empty-rule context when nothing may be expected).  Every witness
is re-checked by the evaluator before it is returned.

The brute-force oracle is independent of that path: it enumerates small
models directly and evaluates the original formula.  Models are swept in
a quotient representation (each timeline reduced to its label sequence,
cut off at the depth bound and constant past it), which leaves the
verdict unchanged because truth only ever reads timeline labels.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import context as ctx
from . import rewrite
from .formula import (
    And,
    Atom,
    Bottom,
    Formula,
    Next,
    Not,
    StrongNec,
    WeakNec,
    Yesterday,
    atoms,
    subformulas,
    temporal_depth,
    x_depth,
    y_depth,
)
from .model import RawState, TreeModel, validate_model
from .rewrite import AtomicSequence, CombinatorialLimit, PrefixedElement
from .semantics import ContextualizedPoint, check


class WitnessVerificationError(RuntimeError):
    pass


class BoundsTooLarge(RuntimeError):
    pass


def default_enum_cap() -> int:
    value = os.environ.get("SWONBT_ENUM_CAP")
    return int(value) if value else rewrite.DEFAULT_ENUM_CAP


# ---------------------------------------------------------------------------
# Feasibility of single atomic-sequence slots


@dataclass(frozen=True)
class Feasibility:
    """Clock window and per-position assignments for one slot.

    A slot is realizable on a private branch exactly at the clocks in
    ``[min_clock, max_clock_excl)``; future reads and bound past reads
    never collide because they land on opposite sides of the clock.
    """

    satisfiable: bool
    min_clock: int
    max_clock_excl: int | None
    element: PrefixedElement | None

    def feasible_at(self, clock: int) -> bool:
        if not self.satisfiable or clock < self.min_clock:
            return False
        return self.max_clock_excl is None or clock < self.max_clock_excl

    def assignments(self, clock: int) -> dict[int, dict[str, bool]]:
        """Absolute position -> atom -> sign, for an evaluation at ``clock``."""
        out: dict[int, dict[str, bool]] = {}
        assert self.element is not None
        for h, atom, sign in self.element.future:
            out.setdefault(clock + h, {})[atom] = sign
        for j, atom, sign in self.element.past:
            if clock >= j:
                out.setdefault(clock - j, {})[atom] = sign
        return out

    def origin_literals(self, clock: int) -> dict[str, bool]:
        """The literals this slot pins on the shared origin at ``clock``."""
        assert self.element is not None
        if clock == 0:
            return {atom: sign for h, atom, sign in self.element.future if h == 0}
        return {atom: sign for j, atom, sign in self.element.past if j == clock}


def atom_feasibility(element: PrefixedElement | None) -> Feasibility:
    """Feasible clocks for a prefixed-literal conjunction.

    ``None`` stands for a conjunction with clashing same-position reads,
    which is unsatisfiable outright.
    """
    if element is None:
        return Feasibility(False, 0, 0, None)
    ub = element.past_bot
    sat = ub is None or element.min_clock < ub
    return Feasibility(sat, element.min_clock, ub, element)


# ---------------------------------------------------------------------------
# Joint realizability of an atomic sequence


@dataclass(frozen=True)
class WitnessPlan:
    clock: int
    root_atoms: frozenset[str]
    roles: tuple[str, ...]
    branch_assignments: tuple[tuple[tuple[int, tuple[tuple[str, bool], ...]], ...], ...]


def sequence_satisfiable(seq: AtomicSequence) -> WitnessPlan | None:
    """A common clock and branch plan realizing every slot, or ``None``.

    Candidate clocks run from the slots' joint lower bound to one past
    the deepest backward reach; beyond that no slot pins anything on the
    origin, so later clocks cannot help.
    """
    feas = [atom_feasibility(e.merged) for e in seq.elements]
    if not all(f.satisfiable for f in feas):
        return None
    lb = max(f.min_clock for f in feas)
    ubs = [f.max_clock_excl for f in feas if f.max_clock_excl is not None]
    max_past = max(f.element.max_past_depth() for f in feas)
    hi = max_past + 1
    if ubs:
        hi = min(hi, min(ubs) - 1)
    for clock in range(lb, hi + 1):
        joint: dict[str, bool] = {}
        ok = True
        for f in feas:
            for atom, sign in f.origin_literals(clock).items():
                if joint.get(atom, sign) != sign:
                    ok = False
                    break
                joint[atom] = sign
            if not ok:
                break
        if not ok:
            continue
        branches = []
        for f in feas:
            assign = f.assignments(clock)
            branch = tuple(sorted(
                (pos, tuple(sorted(assign[pos].items())))
                for pos in assign if pos >= 1))
            branches.append(branch)
        root_atoms = frozenset(a for a, sign in joint.items() if sign)
        roles = tuple(e.role for e in seq.elements)
        return WitnessPlan(clock, root_atoms, roles, tuple(branches))
    return None


def build_witness(plan: WitnessPlan) -> tuple[TreeModel, ctx.Context, str, int]:
    """Materialize a plan as a star-shaped model with one branch per slot."""
    raw = [RawState("w0", None, plan.root_atoms)]
    leaves = []
    for idx, branch in enumerate(plan.branch_assignments):
        by_pos = dict(branch)
        length = max([plan.clock, 1] + [pos for pos in by_pos])
        prev = "w0"
        for pos in range(1, length + 1):
            sid = "t{}_{}".format(idx, pos)
            positives = frozenset(
                a for a, sign in by_pos.get(pos, ()) if sign)
            raw.append(RawState(sid, prev, positives))
            prev = sid
        leaves.append(prev)
    model = validate_model(raw)
    expected_leaves = frozenset(
        leaf for leaf, role in zip(leaves, plan.roles) if role == "w_witness")
    if expected_leaves:
        witness_context = ctx.make_context(
            {"expect": expected_leaves}, set(), set(), model)
    else:
        witness_context = ctx.make_context(
            {"veto": frozenset()}, set(), set(), model)
    present = leaves[plan.roles.index("present")]
    return model, witness_context, present, plan.clock


# ---------------------------------------------------------------------------
# Top-level decisions


@dataclass(frozen=True)
class Witness:
    model: TreeModel
    context: ctx.Context
    timeline: str
    clock: int


@dataclass(frozen=True)
class Verdict:
    satisfiable: bool
    witness: Witness | None


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    counter_model: Witness | None


def _solve_disjunct(disjunct: Formula, cap: int) -> WitnessPlan | None:
    core = rewrite.to_core(disjunct)
    for seq in rewrite.atomic_sequences(core, cap):
        plan = sequence_satisfiable(seq)
        if plan is not None:
            return plan
    return None


def satisfiable(phi: Formula, cap: int | None = None, jobs: int = 1) -> Verdict:
    """Decide satisfiability; a positive verdict carries a re-verified
    witness point."""
    cap = default_enum_cap() if cap is None else cap
    flattened = rewrite.gamma(rewrite.delta(phi))
    disjuncts = rewrite.sw1_disjuncts(flattened)
    plan = None
    if jobs > 1 and len(disjuncts) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_solve_disjunct, d, cap) for d in disjuncts]
            for fut in futures:
                result = fut.result()
                if result is not None:
                    plan = result
                    break
    else:
        for disjunct in disjuncts:
            plan = _solve_disjunct(disjunct, cap)
            if plan is not None:
                break
    if plan is None:
        return Verdict(False, None)
    model, witness_context, leaf, clock = build_witness(plan)
    point = ContextualizedPoint(model, witness_context, leaf, clock)
    if not check(point, phi):
        raise WitnessVerificationError(
            "internal error: witness failed re-verification for {}".format(phi))
    return Verdict(True, Witness(model, witness_context, leaf, clock))


def valid(phi: Formula, cap: int | None = None, jobs: int = 1) -> ValidityResult:
    """Decide validity; an invalid formula comes with a counter-model,
    a point at which it is false."""
    verdict = satisfiable(Not(phi), cap, jobs)
    if verdict.satisfiable:
        return ValidityResult(False, verdict.witness)
    return ValidityResult(True, None)


# ---------------------------------------------------------------------------
# Brute-force oracle


@dataclass(frozen=True)
class OracleBounds:
    max_depth: int
    max_leaves: int
    max_clock: int
    budget: int = 50_000_000


def bounds_for(phi: Formula) -> OracleBounds:
    """Bounds large enough to find a witness whenever one exists: room
    for every diamond-style witness branch plus the evaluation timeline,
    depth past the whole temporal window (a backward bound can force a
    late clock, pushing forward reads past the forward depth alone), and
    clocks past the point where truth stabilizes."""
    diamonds = sum(1 for _ in _negative_box_occurrences(phi))
    depth = x_depth(phi) + y_depth(phi) + 1
    return OracleBounds(
        max_depth=depth,
        max_leaves=diamonds + 2,
        max_clock=depth + y_depth(phi),
    )


def _negative_box_occurrences(phi: Formula):
    stack = [(phi, True, frozenset({0}))]
    while stack:
        f, positive, offsets = stack.pop()
        if isinstance(f, (Atom, Bottom)):
            continue
        if isinstance(f, Not):
            stack.append((f.sub, not positive, offsets))
        elif isinstance(f, And):
            stack.append((f.left, positive, offsets))
            stack.append((f.right, positive, offsets))
        elif isinstance(f, Next):
            stack.append((f.sub, positive, frozenset(o + 1 for o in offsets)))
        elif isinstance(f, Yesterday):
            stack.append((f.sub, positive, frozenset(o - 1 for o in offsets)))
        else:
            if not positive:
                yield f, offsets
            stack.append((f.sub, positive, offsets))


def _selection_bound(phi: Formula) -> int:
    # If some model satisfies the formula, so does its restriction to the
    # evaluation timeline plus one witness per falsified box occurrence
    # and reachable clock; boxes in positive position may only become
    # easier to satisfy when timelines are dropped.
    return 1 + sum(len(offs) for _, offs in _negative_box_occurrences(phi))


def _atom_read_offsets(phi: Formula) -> frozenset[int]:
    out: set[int] = set()

    def walk(f, offsets):
        if isinstance(f, Atom):
            out.update(offsets)
        elif isinstance(f, Bottom):
            pass
        elif isinstance(f, And):
            walk(f.left, offsets)
            walk(f.right, offsets)
        elif isinstance(f, Next):
            walk(f.sub, frozenset(o + 1 for o in offsets))
        elif isinstance(f, Yesterday):
            walk(f.sub, frozenset(o - 1 for o in offsets))
        else:
            walk(f.sub, offsets)

    walk(phi, frozenset({0}))
    return frozenset(out)


class _Node:
    __slots__ = ("kind", "payload", "left", "right")

    def __init__(self, kind, payload=None, left=None, right=None):
        self.kind = kind
        self.payload = payload
        self.left = left
        self.right = right


def _compile(phi: Formula, atom_index: dict[str, int]) -> _Node:
    if isinstance(phi, Atom):
        return _Node("atom", atom_index[phi.name])
    if isinstance(phi, Bottom):
        return _Node("bottom")
    if isinstance(phi, Not):
        return _Node("not", left=_compile(phi.sub, atom_index))
    if isinstance(phi, And):
        return _Node("and", left=_compile(phi.left, atom_index),
                     right=_compile(phi.right, atom_index))
    if isinstance(phi, Next):
        return _Node("next", left=_compile(phi.sub, atom_index))
    if isinstance(phi, Yesterday):
        return _Node("yesterday", left=_compile(phi.sub, atom_index))
    if isinstance(phi, StrongNec):
        return _Node("strong", left=_compile(phi.sub, atom_index))
    return _Node("weak", left=_compile(phi.sub, atom_index))


def _eval_batch(node: _Node, truth: np.ndarray, et_mask: np.ndarray) -> np.ndarray:
    # truth: [batch, slots, natoms, horizon]; result: [batch, slots, horizon]
    if node.kind == "atom":
        return truth[:, :, node.payload, :]
    if node.kind == "bottom":
        b, s, _, h = truth.shape
        return np.zeros((b, s, h), dtype=bool)
    if node.kind == "not":
        return ~_eval_batch(node.left, truth, et_mask)
    if node.kind == "and":
        return _eval_batch(node.left, truth, et_mask) & _eval_batch(node.right, truth, et_mask)
    if node.kind == "next":
        child = _eval_batch(node.left, truth, et_mask)
        return np.concatenate([child[:, :, 1:], child[:, :, -1:]], axis=2)
    if node.kind == "yesterday":
        child = _eval_batch(node.left, truth, et_mask)
        first = np.ones_like(child[:, :, :1])
        return np.concatenate([first, child[:, :, :-1]], axis=2)
    child = _eval_batch(node.left, truth, et_mask)
    if node.kind == "weak":
        child = child | ~et_mask[None, :, None]
    out = child.all(axis=1, keepdims=True)
    return np.broadcast_to(out, child.shape)


def brute_force_satisfiable(phi: Formula, bounds: OracleBounds) -> bool:
    """Exhaustive search for a satisfying point within the bounds.

    Sweeps every model with at most ``max_leaves`` timelines and
    ``max_depth`` explicit levels (labels constant past the last level),
    every expected-subset choice, every evaluation timeline, and every
    clock up to ``max_clock``.  Timelines are enumerated as label
    sequences and deduplicated on the positions the formula can read,
    neither of which changes the verdict.
    """
    names = sorted(atoms(phi))
    atom_index = {a: i for i, a in enumerate(names)}
    natoms = len(names)
    nlabels = 1 << natoms
    depth = max(1, bounds.max_depth)
    cmax = bounds.max_clock
    horizon = cmax + x_depth(phi) + 1

    offsets = _atom_read_offsets(phi)
    read_positions = {min(c + o, depth)
                      for c in range(cmax + 1) for o in offsets if c + o >= 0}
    tail_positions = sorted(p for p in read_positions if p >= 1)
    ntails = nlabels ** len(tail_positions)

    has_weak = any(isinstance(f, WeakNec) for f in _all_nodes(phi))
    kmax = min(bounds.max_leaves, _selection_bound(phi))

    total = 0
    for k in range(1, kmax + 1):
        total += nlabels * _ncombos(ntails, k) * (2 ** k if has_weak else 1)
    if total * horizon > bounds.budget:
        raise BoundsTooLarge(
            "enumeration of about {} points exceeds the budget".format(total * horizon))

    tails_arr = np.array(
        list(itertools.product(range(nlabels), repeat=len(tail_positions))),
        dtype=np.int64).reshape(max(ntails, 1), len(tail_positions))
    pos_of_clock = [0] + [min(c, depth) for c in range(1, horizon)]
    col_index = {p: i for i, p in enumerate(tail_positions)}
    node = _compile(phi, atom_index)

    for root_label in range(nlabels):
        label_at = np.zeros((max(ntails, 1), horizon), dtype=np.int64)
        for c in range(horizon):
            p = pos_of_clock[c]
            if p == 0:
                label_at[:, c] = root_label
            elif p in col_index:
                label_at[:, c] = tails_arr[:, col_index[p]]
        # atom truth per tail: [ntails, natoms, horizon]
        tail_truth = np.zeros((max(ntails, 1), max(natoms, 1), horizon), dtype=bool)
        for a in range(natoms):
            tail_truth[:, a, :] = (label_at >> a) & 1
        for k in range(1, kmax + 1):
            if _sweep_sets(node, tail_truth, ntails, k, has_weak, cmax):
                return True
    return False


def _all_nodes(phi: Formula):
    return subformulas(phi)


def _ncombos(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def _sweep_sets(node, tail_truth, ntails, k, has_weak, cmax,
                chunk_size: int = 8192) -> bool:
    if ntails < k:
        return False
    masks = [np.array(bits, dtype=bool)
             for bits in itertools.product([False, True], repeat=k)] \
        if has_weak else [np.zeros(k, dtype=bool)]
    combo_iter = itertools.combinations(range(ntails), k)
    while True:
        block = list(itertools.islice(combo_iter, chunk_size))
        if not block:
            return False
        idx = np.array(block, dtype=np.int64)  # [batch, k]
        truth = tail_truth[idx]  # [batch, k, natoms, horizon]
        for mask in masks:
            result = _eval_batch(node, truth, mask)
            if result[:, :, :cmax + 1].any():
                return True
