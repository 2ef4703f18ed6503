"""Hilbert-style derivation checking.

A derivation is a numbered list of formulas, each justified as a
propositional tautology instance, an instance of one of the named axiom
schemas, or an application of modus ponens, operator generalization, or
replacement of one designated equivalent subformula.  Schema matching is
structural unification against templates; the two disjunction schemas
carry a closedness side condition and the origin schema a propositional
one.
"""

from __future__ import annotations

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
    diamond_s,
    disj,
    iff,
    implies,
    is_closed,
    is_propositional,
    parse,
    true_,
)


class ProofParseError(ValueError):
    pass


_P = Atom("?phi")
_Q = Atom("?psi")
_CHI = Atom("?chi")
_ALPHA = Atom("?alpha")

AXIOM_SCHEMAS: dict[str, tuple[Formula, dict[str, object]]] = {
    "ax2a": (iff(Next(Not(_P)), Not(Next(_P))), {}),
    "ax2b": (iff(Next(And(_P, _Q)), And(Next(_P), Next(_Q))), {}),
    "ax2c": (iff(Next(Yesterday(_P)), _P), {}),
    "ax2d": (iff(Next(StrongNec(_P)), StrongNec(Next(_P))), {}),
    "ax2e": (iff(Next(WeakNec(_P)), WeakNec(Next(_P))), {}),
    "ax2f": (Not(Next(Not(true_()))), {}),
    "ax3a": (iff(Yesterday(Not(_P)), disj(Yesterday(FALSE), Not(Yesterday(_P)))), {}),
    "ax3b": (iff(Yesterday(And(_P, _Q)), And(Yesterday(_P), Yesterday(_Q))), {}),
    "ax3c": (iff(Yesterday(Next(_P)), disj(Yesterday(FALSE), _P)), {}),
    "ax3d": (iff(Yesterday(StrongNec(_P)), StrongNec(Yesterday(_P))), {}),
    "ax3e": (iff(Yesterday(WeakNec(_P)), WeakNec(Yesterday(_P))), {}),
    "ax3f": (implies(diamond_s(Yesterday(FALSE)), implies(diamond_s(_ALPHA), _ALPHA)),
             {"?alpha": is_propositional}),
    "ax4a": (implies(StrongNec(implies(_P, _Q)),
                     implies(StrongNec(_P), StrongNec(_Q))), {}),
    "ax4b": (iff(StrongNec(disj(_CHI, _P)), disj(_CHI, StrongNec(_P))),
             {"?chi": is_closed}),
    "ax4c": (implies(StrongNec(_P), _P), {}),
    "ax5a": (implies(WeakNec(implies(_P, _Q)),
                     implies(WeakNec(_P), WeakNec(_Q))), {}),
    "ax5b": (iff(WeakNec(disj(_CHI, _P)), disj(_CHI, WeakNec(_P))),
             {"?chi": is_closed}),
    "ax6": (implies(StrongNec(_P), WeakNec(_P)), {}),
}


def _match(template: Formula, phi: Formula, binding: dict[str, Formula]) -> bool:
    if isinstance(template, Atom) and template.name.startswith("?"):
        bound = binding.get(template.name)
        if bound is None:
            binding[template.name] = phi
            return True
        return bound == phi
    if type(template) is not type(phi):
        return False
    if isinstance(template, Atom):
        return template.name == phi.name
    if isinstance(template, Bottom):
        return True
    if isinstance(template, And):
        return _match(template.left, phi.left, binding) and \
            _match(template.right, phi.right, binding)
    return _match(template.sub, phi.sub, binding)


def match_schema(axiom_id: str, phi: Formula):
    """Substitution making the named schema equal to ``phi``, checking
    side conditions; ``None`` if the shape does not match, ``False`` if
    only a side condition fails."""
    template, conditions = AXIOM_SCHEMAS[axiom_id]
    binding: dict[str, Formula] = {}
    if not _match(template, phi, binding):
        return None
    for var, condition in conditions.items():
        if not condition(binding[var]):
            return False
    return binding


def is_tautology_instance(phi: Formula) -> bool:
    """True iff the propositional skeleton of ``phi`` is a tautology.

    Temporal and modal subformulas are abstracted as opaque variables;
    equal subformulas share a variable.
    """
    table: dict[Formula, int] = {}

    def skel(f):
        if isinstance(f, (Next, Yesterday, StrongNec, WeakNec, Atom)):
            if f not in table:
                table[f] = len(table)
            return ("var", table[f])
        if isinstance(f, Bottom):
            return ("false",)
        if isinstance(f, Not):
            return ("not", skel(f.sub))
        return ("and", skel(f.left), skel(f.right))

    sk = skel(phi)
    nvars = len(table)
    if nvars > 20:
        raise ProofParseError("too many distinct parts for a truth-table check")

    def ev(s, assignment):
        if s[0] == "var":
            return bool(assignment >> s[1] & 1)
        if s[0] == "false":
            return False
        if s[0] == "not":
            return not ev(s[1], assignment)
        return ev(s[1], assignment) and ev(s[2], assignment)

    return all(ev(sk, assignment) for assignment in range(1 << nvars))


def match_axiom(phi: Formula):
    """Some axiom schema and substitution matching ``phi``, or ``None``.

    Named schemas are tried first, the tautology catch-all last.
    """
    for axiom_id in AXIOM_SCHEMAS:
        binding = match_schema(axiom_id, phi)
        if isinstance(binding, dict):
            return axiom_id, binding
    if is_tautology_instance(phi):
        return "taut", {}
    return None


# ---------------------------------------------------------------------------
# Derivations


@dataclass(frozen=True)
class Tautology:
    pass


@dataclass(frozen=True)
class AxiomInstance:
    axiom_id: str


@dataclass(frozen=True)
class ModusPonens:
    premise: int
    implication: int


@dataclass(frozen=True)
class Generalization:
    operator: str  # "X", "Y", "S", or "W"
    source: int


@dataclass(frozen=True)
class Replacement:
    equivalence: int
    target: int
    path: tuple[int, ...]


Justification = object


@dataclass(frozen=True)
class Derivation:
    lines: tuple[tuple[Formula, Justification], ...]


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    line: int | None = None
    kind: str | None = None  # BadReference, SideConditionViolated, RuleMismatch
    reason: str | None = None

    def __bool__(self):
        return self.ok


_GEN_OPS = {"X": Next, "Y": Yesterday, "S": StrongNec, "W": WeakNec}


def _split_iff(phi: Formula):
    # (a -> b) & (b -> a) with -> expanded; returns (a, b) or None.
    if not isinstance(phi, And):
        return None
    left, right = phi.left, phi.right
    if not (isinstance(left, Not) and isinstance(left.sub, And)
            and isinstance(left.sub.right, Not)):
        return None
    if not (isinstance(right, Not) and isinstance(right.sub, And)
            and isinstance(right.sub.right, Not)):
        return None
    a1, b1 = left.sub.left, left.sub.right.sub
    b2, a2 = right.sub.left, right.sub.right.sub
    if a1 == a2 and b1 == b2:
        return a1, b1
    return None


def _subtree_at(phi: Formula, path: tuple[int, ...]):
    for step in path:
        if isinstance(phi, And):
            if step == 0:
                phi = phi.left
            elif step == 1:
                phi = phi.right
            else:
                return None
        elif isinstance(phi, (Not, Next, Yesterday, StrongNec, WeakNec)):
            if step != 0:
                return None
            phi = phi.sub
        else:
            return None
    return phi


def _replace_at(phi: Formula, path: tuple[int, ...], replacement: Formula) -> Formula:
    if not path:
        return replacement
    step, rest = path[0], path[1:]
    if isinstance(phi, And):
        if step == 0:
            return And(_replace_at(phi.left, rest, replacement), phi.right)
        return And(phi.left, _replace_at(phi.right, rest, replacement))
    return type(phi)(_replace_at(phi.sub, rest, replacement))


def check_derivation(derivation: Derivation) -> CheckResult:
    """Verify every line; the first failing line is reported."""
    lines = derivation.lines
    for n, (phi, just) in enumerate(lines):

        def fail(kind, reason):
            return CheckResult(False, n + 1, kind, reason)

        def ref(i):
            return lines[i][0] if 0 <= i < n else None

        if isinstance(just, Tautology):
            if not is_tautology_instance(phi):
                return fail("RuleMismatch", "not a tautology instance")
        elif isinstance(just, AxiomInstance):
            if just.axiom_id not in AXIOM_SCHEMAS:
                return fail("RuleMismatch", "unknown axiom {!r}".format(just.axiom_id))
            binding = match_schema(just.axiom_id, phi)
            if binding is None:
                return fail("RuleMismatch",
                            "does not match schema {}".format(just.axiom_id))
            if binding is False:
                return fail("SideConditionViolated",
                            "side condition of {} fails".format(just.axiom_id))
        elif isinstance(just, ModusPonens):
            prem = ref(just.premise)
            impl = ref(just.implication)
            if prem is None or impl is None:
                return fail("BadReference", "premises must be earlier lines")
            if impl != implies(prem, phi):
                return fail("RuleMismatch",
                            "line {} is not the implication from line {} to this"
                            .format(just.implication + 1, just.premise + 1))
        elif isinstance(just, Generalization):
            src = ref(just.source)
            if src is None:
                return fail("BadReference", "premise must be an earlier line")
            op = _GEN_OPS.get(just.operator)
            if op is None or phi != op(src):
                return fail("RuleMismatch",
                            "not the {}-generalization of line {}"
                            .format(just.operator, just.source + 1))
        elif isinstance(just, Replacement):
            equiv = ref(just.equivalence)
            target = ref(just.target)
            if equiv is None or target is None:
                return fail("BadReference", "premises must be earlier lines")
            pair = _split_iff(equiv)
            if pair is None:
                return fail("RuleMismatch",
                            "line {} is not an equivalence".format(just.equivalence + 1))
            old, new = pair
            if _subtree_at(target, just.path) != old:
                return fail("RuleMismatch",
                            "path {} of line {} is not the left side of the equivalence"
                            .format(".".join(map(str, just.path)) or "(root)",
                                    just.target + 1))
            if phi != _replace_at(target, just.path, new):
                return fail("RuleMismatch", "replacement result differs from this line")
        else:
            return fail("RuleMismatch", "unknown justification")
    return CheckResult(True)


# ---------------------------------------------------------------------------
# Proof file format


def parse_justification(text: str) -> Justification:
    parts = text.split()
    if not parts:
        raise ProofParseError("empty justification")
    head = parts[0]
    if head == "taut" and len(parts) == 1:
        return Tautology()
    if head in AXIOM_SCHEMAS and len(parts) == 1:
        return AxiomInstance(head)
    if head == "mp" and len(parts) == 3:
        return ModusPonens(int(parts[1]) - 1, int(parts[2]) - 1)
    if head in ("genX", "genY", "genS", "genW") and len(parts) == 2:
        return Generalization(head[3], int(parts[1]) - 1)
    if head == "repl" and len(parts) == 5 and parts[3] == "at":
        path = tuple(int(x) for x in parts[4].split(".")) if parts[4] != "root" else ()
        return Replacement(int(parts[1]) - 1, int(parts[2]) - 1, path)
    raise ProofParseError("unrecognized justification {!r}".format(text))


def parse_derivation(text: str) -> Derivation:
    lines = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(".")
        if not head.strip().isdigit():
            raise ProofParseError("line {}: expected '<n>. <formula> ; <rule>'".format(lineno))
        number = int(head)
        if number != len(lines) + 1:
            raise ProofParseError("line {}: steps must be numbered consecutively".format(lineno))
        formula_text, sep, rule_text = rest.partition(";")
        if not sep:
            raise ProofParseError("line {}: missing '; <rule>'".format(lineno))
        phi = parse(formula_text.strip())
        just = parse_justification(rule_text.strip())
        lines.append((phi, just))
    return Derivation(tuple(lines))


def load_derivation(path: str) -> Derivation:
    with open(path, encoding="utf-8") as fh:
        return parse_derivation(fh.read())
