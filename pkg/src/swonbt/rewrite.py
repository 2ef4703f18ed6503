"""Normal-form pipeline: temporal pushdown, box flattening, and cores.

``delta`` moves X and Y inward until they only stack directly over atoms
and falsum.  ``gamma`` then removes nested boxes by converting each
offending box body to clausal form and pulling the closed disjuncts out,
which is validity-preserving because boxed formulas are insensitive to
the evaluation timeline.  ``dnf_xxyy`` decomposes a modality-free
formula into prefixed-literal conjunctions; those feed the core-formula
and atomic-sequence constructions used by the decision procedure.

One representational note: the negation of a ``Y``-stacked falsum means
"the clock is at least j", which no positive prefixed literal can say.
Disjuncts therefore carry an explicit origin lower bound alongside the
usual upper bound contributed by ``Y^j false``.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass

from .formula import (
    FALSE,
    And,
    Atom,
    Bottom,
    Formula,
    Next,
    Not,
    StrongNec,
    WeakNec,
    Yesterday,
    conj_all,
    disj,
    disj_all,
    is_swxxyy,
    is_xxyy,
    true_,
)


# Flattened intermediates share subtrees heavily; walkers recurse to the
# sharing depth, which outgrows the default interpreter limit.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 50_000))


class FragmentError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class CombinatorialLimit(RuntimeError):
    pass


DEFAULT_ENUM_CAP = 10 ** 6


# ---------------------------------------------------------------------------
# delta: push temporal operators inward


def _push_x(f: Formula) -> Formula:
    if isinstance(f, Not):
        return Not(_push_x(f.sub))
    if isinstance(f, And):
        return And(_push_x(f.left), _push_x(f.right))
    if isinstance(f, Yesterday):
        return f.sub
    if isinstance(f, StrongNec):
        return StrongNec(_push_x(f.sub))
    if isinstance(f, WeakNec):
        return WeakNec(_push_x(f.sub))
    return Next(f)


def _push_y(f: Formula) -> Formula:
    if isinstance(f, Not):
        return disj(Yesterday(FALSE), Not(_push_y(f.sub)))
    if isinstance(f, And):
        return And(_push_y(f.left), _push_y(f.right))
    if isinstance(f, Next):
        return disj(Yesterday(FALSE), f.sub)
    if isinstance(f, StrongNec):
        return StrongNec(_push_y(f.sub))
    if isinstance(f, WeakNec):
        return WeakNec(_push_y(f.sub))
    return Yesterday(f)


def delta(phi: Formula) -> Formula:
    """Equivalent formula with temporal operators only over atoms/falsum."""
    if isinstance(phi, (Atom, Bottom)):
        return phi
    if isinstance(phi, Not):
        return Not(delta(phi.sub))
    if isinstance(phi, And):
        return And(delta(phi.left), delta(phi.right))
    if isinstance(phi, StrongNec):
        return StrongNec(delta(phi.sub))
    if isinstance(phi, WeakNec):
        return WeakNec(delta(phi.sub))
    if isinstance(phi, Next):
        return _push_x(delta(phi.sub))
    return _push_y(delta(phi.sub))


# ---------------------------------------------------------------------------
# Prefixed-literal elements and DNF over the modality-free fragment


@dataclass(frozen=True)
class PrefixedElement:
    """A conjunction of clock-relative literals.

    ``future`` holds (offset, atom, sign) with offset >= 0, reading at
    clock + offset; bare literals are offset 0.  ``past`` holds
    (depth, atom, sign) with depth >= 1, reading at clock - depth and
    vacuously true when the clock is below the depth.  ``past_bot``
    (from ``Y^j false``) caps the clock strictly below j; ``min_clock``
    (from ``~Y^j false``) forces the clock to at least j.
    """

    future: tuple[tuple[int, str, bool], ...] = ()
    past: tuple[tuple[int, str, bool], ...] = ()
    past_bot: int | None = None
    min_clock: int = 0

    def max_past_depth(self) -> int:
        depths = [j for j, _, _ in self.past]
        if self.past_bot is not None:
            depths.append(self.past_bot)
        depths.append(self.min_clock)
        return max(depths, default=0)

    def max_future_offset(self) -> int:
        return max((h for h, _, _ in self.future), default=0)

    def to_formula(self) -> Formula:
        def stack(op, n, base):
            for _ in range(n):
                base = op(base)
            return base

        parts: list[Formula] = []
        for h, atom, sign in self.future:
            lit = Atom(atom) if sign else Not(Atom(atom))
            parts.append(stack(Next, h, lit))
        for j, atom, sign in self.past:
            lit = Atom(atom) if sign else Not(Atom(atom))
            parts.append(stack(Yesterday, j, lit))
        if self.past_bot is not None:
            parts.append(stack(Yesterday, self.past_bot, FALSE))
        if self.min_clock > 0:
            parts.append(Not(stack(Yesterday, self.min_clock, FALSE)))
        return conj_all(parts)


def _normalize_element(future: dict[tuple[int, str], bool],
                       past: dict[tuple[int, str], bool],
                       past_bot: int | None,
                       min_clock: int) -> PrefixedElement | None:
    if past_bot is not None:
        if min_clock >= past_bot:
            return None
        past = {(j, a): s for (j, a), s in past.items() if j < past_bot}
    fut = tuple(sorted((h, a, s) for (h, a), s in future.items()))
    pst = tuple(sorted((j, a, s) for (j, a), s in past.items()))
    return PrefixedElement(fut, pst, past_bot, min_clock)


def _merge_elements(a: PrefixedElement, b: PrefixedElement) -> PrefixedElement | None:
    future: dict[tuple[int, str], bool] = {(h, x): s for h, x, s in a.future}
    for h, x, s in b.future:
        if future.get((h, x), s) != s:
            return None
        future[(h, x)] = s
    past_bot = a.past_bot
    if b.past_bot is not None:
        past_bot = b.past_bot if past_bot is None else min(past_bot, b.past_bot)
    past: dict[tuple[int, str], bool] = {(j, x): s for j, x, s in a.past}
    for j, x, s in b.past:
        if past.get((j, x), s) != s:
            # Conflicting reads of the same past position only leave the
            # clocks where both are vacuous.
            past_bot = j if past_bot is None else min(past_bot, j)
            del past[(j, x)]
        else:
            past[(j, x)] = s
    return _normalize_element(future, past, past_bot, max(a.min_clock, b.min_clock))


TOP_ELEMENT = PrefixedElement()


def _leaf_elements(phi: Formula, positive: bool) -> list[PrefixedElement]:
    kind = None
    depth = 0
    f = phi
    if isinstance(f, Next):
        while isinstance(f, Next):
            kind, depth, f = "x", depth + 1, f.sub
    elif isinstance(f, Yesterday):
        while isinstance(f, Yesterday):
            kind, depth, f = "y", depth + 1, f.sub
    if isinstance(f, Atom):
        if kind != "y":
            elem = _normalize_element({(depth, f.name): positive}, {}, None, 0)
            return [elem]
        if positive:
            return [_normalize_element({}, {(depth, f.name): True}, None, 0)]
        return [_normalize_element({}, {(depth, f.name): False}, None, depth)]
    if isinstance(f, Bottom):
        if kind != "y":
            return [] if positive else [TOP_ELEMENT]
        if positive:
            return [_normalize_element({}, {}, depth, 0)]
        return [_normalize_element({}, {}, None, depth)]
    raise ShapeError("not a prefixed literal: {}".format(phi))


def _dnf_elements(phi: Formula, positive: bool) -> list[PrefixedElement]:
    if isinstance(phi, Not):
        return _dnf_elements(phi.sub, not positive)
    if isinstance(phi, And):
        left = _dnf_elements(phi.left, positive)
        right = _dnf_elements(phi.right, positive)
        if positive:
            out = []
            for a in left:
                for b in right:
                    merged = _merge_elements(a, b)
                    if merged is not None:
                        out.append(merged)
            return _dedup(out)
        return _dedup(left + right)
    return _dnf_elements_leaf(phi, positive)


def _dnf_elements_leaf(phi, positive):
    return [e for e in _leaf_elements(phi, positive) if e is not None]


def _dedup(elements: list[PrefixedElement]) -> list[PrefixedElement]:
    seen = set()
    out = []
    for e in elements:
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


def dnf_xxyy(alpha: Formula) -> list[PrefixedElement]:
    """The disjuncts of the disjunctive normal form of a modality-free
    formula, as prefixed-literal conjunctions.

    Contradictory disjuncts are pruned, so an unsatisfiable input yields
    an empty list.
    """
    if not is_xxyy(alpha):
        raise FragmentError("not in the modality-free fragment: {}".format(alpha))
    return _dnf_elements(alpha, True)


# ---------------------------------------------------------------------------
# gamma: flatten nested boxes

_MAX_FLATTEN_VARS = 20


class _XxyyCache:
    """Per-pass memo for fragment checks over shared subtrees."""

    def __init__(self):
        self.memo: dict[int, tuple[Formula, bool]] = {}

    def check(self, phi: Formula) -> bool:
        hit = self.memo.get(id(phi))
        if hit is not None:
            return hit[1]
        if isinstance(phi, Not):
            out = self.check(phi.sub)
        elif isinstance(phi, And):
            out = self.check(phi.left) and self.check(phi.right)
        else:
            out = is_xxyy(phi)
        self.memo[id(phi)] = (phi, out)
        return out


def _is_true(f: Formula) -> bool:
    return isinstance(f, Not) and isinstance(f.sub, Bottom)


def _snot(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.sub
    return Not(f)


def _sdisj(parts: list[Formula]) -> Formula:
    # Deduplicating disjunction with constant absorption.
    seen = []
    for p in parts:
        if isinstance(p, Bottom):
            continue
        if _is_true(p):
            return true_()
        if p not in seen:
            seen.append(p)
    return disj_all(seen)


def _sconj(parts: list[Formula]) -> Formula:
    seen = []
    for p in parts:
        if _is_true(p):
            continue
        if isinstance(p, Bottom):
            return FALSE
        if p not in seen:
            seen.append(p)
    return conj_all(seen)


def _find_deep_box(phi: Formula, memo: dict[int, object], cache: _XxyyCache):
    # Innermost box whose body still contains a box; results cached per
    # object because intermediates share subtrees.
    if id(phi) in memo:
        return memo[id(phi)][1]
    if isinstance(phi, (Atom, Bottom)):
        found = None
    elif isinstance(phi, And):
        found = _find_deep_box(phi.left, memo, cache) \
            or _find_deep_box(phi.right, memo, cache)
    else:
        found = _find_deep_box(phi.sub, memo, cache)
        if found is None and isinstance(phi, (StrongNec, WeakNec)) \
                and not cache.check(phi.sub):
            found = phi
    memo[id(phi)] = (phi, found)
    return found


def _replace_node(phi: Formula, target: Formula, replacement: Formula,
                  memo: dict[int, object]) -> Formula:
    # Rebuild with sharing preserved; unfolding shared subtrees would
    # grow the result exponentially across flattening rounds.
    if phi is target:
        return replacement
    hit = memo.get(id(phi))
    if hit is not None:
        return hit[1]
    if isinstance(phi, (Atom, Bottom)):
        new = phi
    elif isinstance(phi, And):
        left = _replace_node(phi.left, target, replacement, memo)
        right = _replace_node(phi.right, target, replacement, memo)
        new = phi if left is phi.left and right is phi.right else And(left, right)
    else:
        sub = _replace_node(phi.sub, target, replacement, memo)
        new = phi if sub is phi.sub else type(phi)(sub)
    memo[id(phi)] = (phi, new)
    return new


def _dag_size(phi: Formula) -> int:
    seen = {}
    stack = [phi]
    while stack:
        f = stack.pop()
        if id(f) in seen:
            continue
        seen[id(f)] = f
        if isinstance(f, And):
            stack.append(f.left)
            stack.append(f.right)
        elif not isinstance(f, (Atom, Bottom)):
            stack.append(f.sub)
    return len(seen)


def _skeleton_vars(phi: Formula, table: dict[Formula, int], order: list[Formula],
                   memo: dict[int, object] | None = None,
                   cache: _XxyyCache | None = None):
    # Boolean skeleton over maximal modality-free parts and box nodes.
    # Intermediates share subtrees, so results are cached per object.
    if memo is None:
        memo = {}
    if cache is None:
        cache = _XxyyCache()
    cached = memo.get(id(phi))
    if cached is not None:
        return cached[1]
    if cache.check(phi) or isinstance(phi, (StrongNec, WeakNec)):
        if phi not in table:
            table[phi] = len(order)
            order.append(phi)
        sk = ("var", table[phi])
    elif isinstance(phi, Not):
        sk = ("not", _skeleton_vars(phi.sub, table, order, memo, cache))
    elif isinstance(phi, And):
        sk = ("and", _skeleton_vars(phi.left, table, order, memo, cache),
              _skeleton_vars(phi.right, table, order, memo, cache))
    else:
        raise ShapeError("unexpected node in box body: {}".format(phi))
    memo[id(phi)] = (phi, sk)
    return sk


_MAX_CLAUSES = 200_000


def _cnf(sk, positive, memo=None) -> list[tuple[tuple[int, bool], ...]]:
    if memo is None:
        memo = {}
    key = (id(sk), positive)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if sk[0] == "var":
        out = [((sk[1], positive),)]
        memo[key] = (sk, out)
        return out
    if sk[0] == "not":
        out = _cnf(sk[1], not positive, memo)
        memo[key] = (sk, out)
        return out
    left, right = sk[1], sk[2]
    if positive:
        clauses = _cnf(left, True, memo) + _cnf(right, True, memo)
    else:
        a, b = _cnf(left, False, memo), _cnf(right, False, memo)
        if len(a) * len(b) > _MAX_CLAUSES:
            raise CombinatorialLimit("clausal conversion grows past the cap")
        clauses = [ca + cb for ca in a for cb in b]
    out = []
    seen = set()
    for clause in clauses:
        lits: dict[int, bool] = {}
        tautology = False
        for var, sign in clause:
            if lits.get(var, sign) != sign:
                tautology = True
                break
            lits[var] = sign
        if tautology:
            continue
        norm = tuple(sorted(lits.items()))
        if norm not in seen:
            seen.add(norm)
            out.append(norm)
    memo[key] = (sk, out)
    return out


def _dnf_over_vars(sk, positive, memo=None):
    # Dual of _cnf; disjuncts are conjunctions of signed variables.
    if memo is None:
        memo = {}
    key = (id(sk), positive)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if sk[0] == "var":
        out = [((sk[1], positive),)]
        memo[key] = (sk, out)
        return out
    if sk[0] == "not":
        out = _dnf_over_vars(sk[1], not positive, memo)
        memo[key] = (sk, out)
        return out
    left, right = sk[1], sk[2]
    if positive:
        a, b = _dnf_over_vars(left, True, memo), _dnf_over_vars(right, True, memo)
        if len(a) * len(b) > _MAX_CLAUSES:
            raise CombinatorialLimit("normal-form conversion grows past the cap")
        terms = [ta + tb for ta in a for tb in b]
    else:
        terms = _dnf_over_vars(left, False, memo) + _dnf_over_vars(right, False, memo)
    out = []
    seen = set()
    for term in terms:
        lits: dict[int, bool] = {}
        contradictory = False
        for var, sign in term:
            if lits.get(var, sign) != sign:
                contradictory = True
                break
            lits[var] = sign
        if contradictory:
            continue
        norm = tuple(sorted(lits.items()))
        if norm not in seen:
            seen.add(norm)
            out.append(norm)
    memo[key] = (sk, out)
    return out


def _flatten_box(box: Formula, cache: _XxyyCache | None = None) -> Formula:
    op = type(box)
    table: dict[Formula, int] = {}
    order: list[Formula] = []
    sk = _skeleton_vars(box.sub, table, order, cache=cache)
    if len(order) > _MAX_FLATTEN_VARS:
        raise CombinatorialLimit(
            "clausal conversion over {} distinct parts".format(len(order)))
    clauses = _cnf(sk, True)
    clauses = _prune_subsumed(clauses)
    if not clauses:
        return true_()
    conjuncts = []
    for clause in clauses:
        closed_parts = []
        plain_parts = []
        for var, sign in clause:
            f = order[var]
            signed = f if sign else _snot(f)
            if isinstance(f, (StrongNec, WeakNec)):
                closed_parts.append(signed)
            else:
                plain_parts.append(signed)
        boxed = op(_sdisj(plain_parts))
        conjuncts.append(_sdisj(closed_parts + [boxed]))
    return _sconj(conjuncts)


def _prune_subsumed(clauses):
    if len(clauses) > 2000:
        return clauses
    sets = [frozenset(c) for c in clauses]
    keep = []
    for i, c in enumerate(sets):
        if any(j != i and sets[j] < c for j in range(len(sets))) or \
           any(sets[j] == c for j in range(i)):
            continue
        keep.append(clauses[i])
    return keep


_MAX_DAG_NODES = 200_000


def gamma(phi: Formula) -> Formula:
    """Equivalent formula with no box nested inside another box."""
    if not is_swxxyy(phi):
        raise FragmentError("input must have temporal operators pushed down first")
    while True:
        cache = _XxyyCache()
        target = _find_deep_box(phi, {}, cache)
        if target is None:
            return phi
        phi = _replace_node(phi, target, _flatten_box(target, cache), {})
        if _dag_size(phi) > _MAX_DAG_NODES:
            raise CombinatorialLimit("flattening grows past the structural cap")


# ---------------------------------------------------------------------------
# Core formulas


@dataclass(frozen=True)
class CoreFormula:
    """Canonical conjunction driving satisfiability.

    ``full`` cores carry at least one weak-diamond witness; ``partial``
    cores carry none and are satisfied with an empty expected set.
    """

    kind: str
    h: Formula
    i_list: tuple[Formula, ...]
    j: Formula
    k_list: tuple[Formula, ...]
    l: Formula

    def to_formula(self) -> Formula:
        parts = [StrongNec(self.h)]
        parts += [Not(StrongNec(Not(i))) for i in self.i_list]
        parts.append(WeakNec(self.j))
        parts += [Not(WeakNec(Not(k))) for k in self.k_list]
        parts.append(self.l)
        return conj_all(parts)


def _conjuncts(phi: Formula) -> list[Formula]:
    if isinstance(phi, And):
        return _conjuncts(phi.left) + _conjuncts(phi.right)
    return [phi]


def to_core(disjunct: Formula) -> CoreFormula:
    """Merge a conjunction of modal literals and plain parts into a core.

    Box conjuncts of the same modality merge into one body; missing
    groups are padded with vacuous truths so the slot shapes below are
    always inhabited.
    """
    h_parts: list[Formula] = []
    i_parts: list[Formula] = []
    j_parts: list[Formula] = []
    k_parts: list[Formula] = []
    l_parts: list[Formula] = []
    for part in _conjuncts(disjunct):
        if isinstance(part, StrongNec):
            if not is_xxyy(part.sub):
                raise ShapeError("strong box over a non-flattened body: {}".format(part))
            h_parts.append(part.sub)
        elif isinstance(part, WeakNec):
            if not is_xxyy(part.sub):
                raise ShapeError("weak box over a non-flattened body: {}".format(part))
            j_parts.append(part.sub)
        elif isinstance(part, Not) and isinstance(part.sub, StrongNec):
            if not is_xxyy(part.sub.sub):
                raise ShapeError("strong box over a non-flattened body: {}".format(part))
            i_parts.append(Not(part.sub.sub))
        elif isinstance(part, Not) and isinstance(part.sub, WeakNec):
            if not is_xxyy(part.sub.sub):
                raise ShapeError("weak box over a non-flattened body: {}".format(part))
            k_parts.append(Not(part.sub.sub))
        elif is_xxyy(part):
            l_parts.append(part)
        else:
            raise ShapeError("not a modal literal or plain part: {}".format(part))
    h = conj_all(h_parts) if h_parts else true_()
    j = conj_all(j_parts) if j_parts else true_()
    l = conj_all(l_parts) if l_parts else true_()
    i_list = tuple(i_parts) if i_parts else (true_(),)
    kind = "full" if k_parts else "partial"
    return CoreFormula(kind, h, i_list, j, tuple(k_parts), l)


def basic_sequence(core: CoreFormula) -> list[Formula]:
    """Per-slot obligations: strong witnesses, weak witnesses, present."""
    seq = [And(core.h, i) for i in core.i_list]
    if core.kind == "full":
        seq += [And(core.h, And(core.j, k)) for k in core.k_list]
    seq.append(And(core.h, core.l))
    return seq


@dataclass(frozen=True)
class SequenceElement:
    role: str  # "s_witness", "w_witness", or "present"
    parts: tuple[PrefixedElement, ...]
    merged: PrefixedElement | None

    def to_formula(self) -> Formula:
        return conj_all([p.to_formula() for p in self.parts])


@dataclass(frozen=True)
class AtomicSequence:
    elements: tuple[SequenceElement, ...]

    def to_formulas(self) -> list[Formula]:
        return [e.to_formula() for e in self.elements]


def _merge_many(parts):
    merged = TOP_ELEMENT
    for p in parts:
        merged = _merge_elements(merged, p)
        if merged is None:
            return None
    return merged


def atomic_sequences(core: CoreFormula, cap: int = DEFAULT_ENUM_CAP):
    """Enumerate atomic sequences: one normal-form disjunct substituted
    into every slot of the basic sequence, all combinations.

    Raises :class:`CombinatorialLimit` when the cross product exceeds
    ``cap``.
    """
    dj_h = dnf_xxyy(core.h)
    dj_i = [dnf_xxyy(i) for i in core.i_list]
    dj_j = dnf_xxyy(core.j)
    dj_k = [dnf_xxyy(k) for k in core.k_list]
    dj_l = dnf_xxyy(core.l)

    slot_choices: list[tuple[str, list[list[PrefixedElement]]]] = []
    for djx in dj_i:
        slot_choices.append(("s_witness", [dj_h, djx]))
    for djx in dj_k:
        slot_choices.append(("w_witness", [dj_h, dj_j, djx]))
    slot_choices.append(("present", [dj_h, dj_l]))

    total = 1
    for _, groups in slot_choices:
        for group in groups:
            total *= len(group)
        if total > cap:
            raise CombinatorialLimit(
                "atomic sequence enumeration exceeds the cap of {}".format(cap))
    if total == 0:
        return iter(())

    def generate():
        per_slot = [list(itertools.product(*groups)) for _, groups in slot_choices]
        for combo in itertools.product(*per_slot):
            elements = []
            for (role, _), parts in zip(slot_choices, combo):
                elements.append(SequenceElement(role, tuple(parts), _merge_many(parts)))
            yield AtomicSequence(tuple(elements))

    return generate()


def count_atomic_sequences(core: CoreFormula) -> int:
    dj_h = len(dnf_xxyy(core.h))
    dj_j = len(dnf_xxyy(core.j))
    n = len(dnf_xxyy(core.l)) * dj_h
    for i in core.i_list:
        n *= dj_h * len(dnf_xxyy(i))
    for k in core.k_list:
        n *= dj_h * dj_j * len(dnf_xxyy(k))
    return n


# ---------------------------------------------------------------------------
# Boolean-level DNF used to split a flattened formula into core disjuncts


def sw1_disjuncts(phi: Formula) -> list[Formula]:
    """Split a flattened formula into a disjunction of conjunctions of
    modal literals and modality-free parts; contradictory combinations
    at the literal level are dropped."""
    table: dict[Formula, int] = {}
    order: list[Formula] = []
    sk = _skeleton_vars(phi, table, order, cache=_XxyyCache())
    terms = _dnf_over_vars(sk, True)
    out = []
    for term in terms:
        parts = [order[var] if sign else Not(order[var]) for var, sign in term]
        out.append(conj_all(parts))
    return out
