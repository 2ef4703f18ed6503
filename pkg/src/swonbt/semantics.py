"""Truth evaluation over contextualized and AE pointed models.

Evaluation points carry a timeline and a clock position.  The strong box
quantifies over the accepted timelines at the same clock, the weak box
over the expected timelines (vacuously true when no timeline is
expected).  The last-moment operator is vacuously true at clock zero;
``Y false`` therefore marks the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import context as ctx
from .formula import And, Atom, Bottom, Formula, Next, Not, StrongNec, WeakNec, Yesterday, temporal_depth
from .model import Timeline, TreeModel


class TimelineNotAccepted(ValueError):
    pass


class BadAEPoint(ValueError):
    pass


@dataclass(frozen=True)
class ContextualizedPoint:
    model: TreeModel
    context: ctx.Context
    timeline: str
    clock: int

    def __post_init__(self):
        if self.clock < 0:
            raise ValueError("the clock starts at zero")
        if self.timeline not in ctx.accepted(self.context, self.model):
            raise TimelineNotAccepted(
                "timeline {!r} is not accepted in this context".format(self.timeline))


@dataclass(frozen=True)
class AEPoint:
    model: TreeModel
    at: frozenset[str]
    et: frozenset[str]
    timeline: str
    clock: int

    def __post_init__(self):
        if self.clock < 0:
            raise ValueError("the clock starts at zero")
        leaves = set(self.model.leaves)
        if not self.at:
            raise BadAEPoint("the accepted set must be nonempty")
        if not self.at <= leaves:
            raise BadAEPoint("accepted set names unknown timelines")
        if not self.et <= self.at:
            raise BadAEPoint("expected timelines must be accepted")
        if self.timeline not in self.at:
            raise BadAEPoint("the evaluation timeline must be accepted")


def _eval(phi: Formula, model: TreeModel, at: frozenset[str], et: frozenset[str],
          leaf: str, clock: int, memo: dict) -> bool:
    key = (id(phi), leaf, clock)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(phi, Atom):
        tl = model.timeline(leaf)
        out = phi.name in model.valuation[tl.state_at(clock)]
    elif isinstance(phi, Bottom):
        out = False
    elif isinstance(phi, Not):
        out = not _eval(phi.sub, model, at, et, leaf, clock, memo)
    elif isinstance(phi, And):
        out = (_eval(phi.left, model, at, et, leaf, clock, memo)
               and _eval(phi.right, model, at, et, leaf, clock, memo))
    elif isinstance(phi, Next):
        out = _eval(phi.sub, model, at, et, leaf, clock + 1, memo)
    elif isinstance(phi, Yesterday):
        out = clock == 0 or _eval(phi.sub, model, at, et, leaf, clock - 1, memo)
    elif isinstance(phi, StrongNec):
        out = all(_eval(phi.sub, model, at, et, other, clock, memo)
                  for other in sorted(at))
    elif isinstance(phi, WeakNec):
        out = all(_eval(phi.sub, model, at, et, other, clock, memo)
                  for other in sorted(et))
    else:
        raise TypeError("not a formula: {!r}".format(phi))
    memo[key] = out
    return out


def check(pt: ContextualizedPoint, phi: Formula) -> bool:
    """Truth of ``phi`` at a contextualized point."""
    at = ctx.accepted(pt.context, pt.model)
    et = ctx.expected(pt.context, pt.model)
    return _eval(phi, pt.model, at, et, pt.timeline, pt.clock, {})


def check_ae(pt: AEPoint, phi: Formula) -> bool:
    """Truth of ``phi`` at an AE point (accepted and expected sets given
    directly instead of through a context)."""
    return _eval(phi, pt.model, pt.at, pt.et, pt.timeline, pt.clock, {})


def ae_of(pt: ContextualizedPoint) -> AEPoint:
    """The AE point a contextualized point determines."""
    return AEPoint(pt.model,
                   ctx.accepted(pt.context, pt.model),
                   ctx.expected(pt.context, pt.model),
                   pt.timeline, pt.clock)


def find_counterpoint(model: TreeModel, c: ctx.Context,
                      phi: Formula) -> tuple[str, int] | None:
    """Some accepted point falsifying ``phi``, or ``None``.

    Clocks beyond the explicit tree depth plus the formula's forward
    horizon only revisit leaf clones, so the search is finite.
    """
    at = ctx.accepted(c, model)
    et = ctx.expected(c, model)
    bound = model.depth() + temporal_depth(phi)
    for leaf in sorted(at):
        for clock in range(bound + 1):
            if not _eval(phi, model, at, et, leaf, clock, {}):
                return leaf, clock
    return None


def holds_on_model(model: TreeModel, c: ctx.Context, phi: Formula) -> bool:
    """True iff ``phi`` holds at every accepted point of the model."""
    return find_counterpoint(model, c, phi) is None
