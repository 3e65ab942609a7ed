"""Shared vocabulary for epistemic planning domains.

Fluents, signed literals, conditional effects, sensing declarations,
actions, exclusive-or initial constraints, goals, and the domain record
that ties them together.  No inference lives here; the engine, oracle,
and emitter all build on these value types.
"""

from __future__ import annotations

from dataclasses import dataclass

# A fluent is just an identifier.  Keeping it a plain string keeps the
# rest of the code light; validate_domain checks the naming rules.
Fluent = str


@dataclass(frozen=True, order=True)
class Literal:
    """A fluent or its negation."""

    fluent: Fluent
    positive: bool = True

    def __str__(self) -> str:
        return self.fluent if self.positive else f"-{self.fluent}"


def pos(fluent: Fluent) -> Literal:
    return Literal(fluent, True)


def neg(fluent: Fluent) -> Literal:
    return Literal(fluent, False)


def complement(literal: Literal) -> Literal:
    """Flip the sign of a literal; an involution."""
    return Literal(literal.fluent, not literal.positive)


def positify(literal: Literal) -> Literal:
    """Strip the sign: positify(-f) == positify(f) == f."""
    return Literal(literal.fluent, True)


@dataclass(frozen=True)
class EffectProposition:
    """A conditional effect: when all `conditions` hold, `effect` holds after.

    Ids are synthesized as "<action-name>_<ordinal>" so that effect
    bookkeeping (which proposition fired where) and rule emission have a
    stable handle.
    """

    id: str
    effect: Literal
    conditions: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class KnowledgeProposition:
    """Declares that an action senses the runtime value of one fluent."""

    fluent: Fluent


@dataclass(frozen=True)
class Action:
    name: str
    effect_props: tuple[EffectProposition, ...] = ()
    knowledge_props: tuple[KnowledgeProposition, ...] = ()
    executability: tuple[Literal, ...] = ()

    @property
    def is_sensing(self) -> bool:
        return bool(self.knowledge_props)


@dataclass(frozen=True)
class OneofConstraint:
    """Exactly one of `literals` holds initially."""

    literals: tuple[Literal, ...]


@dataclass(frozen=True)
class GoalProposition:
    """kind is "weak" (one branch suffices) or "strong" (every branch)."""

    kind: str
    literals: tuple[Literal, ...]


@dataclass(frozen=True)
class PlanningDomain:
    fluents: tuple[Fluent, ...] = ()
    actions: tuple[Action, ...] = ()
    init: tuple[Literal, ...] = ()
    oneofs: tuple[OneofConstraint, ...] = ()
    goals: tuple[GoalProposition, ...] = ()
    static_fluents: frozenset[Fluent] = frozenset()

    def action(self, name: str) -> Action:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def goal_literals(self, kind: str) -> tuple[Literal, ...]:
        """All literals of the given goal kind, conjoined across propositions."""
        seen: list[Literal] = []
        for g in self.goals:
            if g.kind == kind:
                for lit in g.literals:
                    if lit not in seen:
                        seen.append(lit)
        return tuple(seen)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def _is_identifier(name: str) -> bool:
    if not name:
        return False
    if name[0].isdigit():
        return False
    return all(ch.isalnum() or ch == "_" for ch in name)


def validate_domain(domain: PlanningDomain) -> ValidationReport:
    """Check every structural invariant; returns a report, never raises."""
    problems: list[str] = []
    declared = set(domain.fluents)

    def check_literal(lit: Literal, where: str) -> None:
        if lit.fluent not in declared:
            problems.append(f"undeclared fluent '{lit.fluent}' in {where}")

    if len(declared) != len(domain.fluents):
        problems.append("duplicate fluent declaration")
    for f in domain.fluents:
        if not _is_identifier(f):
            problems.append(f"bad fluent name '{f}'")

    seen_actions: set[str] = set()
    ep_ids: set[str] = set()
    for a in domain.actions:
        if not _is_identifier(a.name):
            problems.append(f"bad action name '{a.name}'")
        if a.name in seen_actions:
            problems.append(f"duplicate action name '{a.name}'")
        seen_actions.add(a.name)
        if a.knowledge_props and a.effect_props:
            problems.append(f"mixed sensing/physical action '{a.name}'")
        if len(a.knowledge_props) > 1:
            problems.append(f"action '{a.name}' senses more than one fluent")
        for kp in a.knowledge_props:
            if kp.fluent not in declared:
                problems.append(
                    f"undeclared fluent '{kp.fluent}' sensed by '{a.name}'"
                )
            if kp.fluent in domain.static_fluents:
                problems.append(f"static fluent '{kp.fluent}' sensed by '{a.name}'")
        for lit in a.executability:
            check_literal(lit, f"executability of '{a.name}'")
        for ep in a.effect_props:
            if ep.id in ep_ids:
                problems.append(f"duplicate effect proposition id '{ep.id}'")
            ep_ids.add(ep.id)
            check_literal(ep.effect, f"effect of '{ep.id}'")
            if ep.effect.fluent in domain.static_fluents:
                problems.append(f"static fluent '{ep.effect.fluent}' in effect of '{ep.id}'")
            fluents_pos = {c.fluent for c in ep.conditions if c.positive}
            fluents_neg = {c.fluent for c in ep.conditions if not c.positive}
            for f in fluents_pos & fluents_neg:
                problems.append(f"contradictory condition on '{f}' in '{ep.id}'")
            for lit in ep.conditions:
                check_literal(lit, f"conditions of '{ep.id}'")

    by_fluent: dict[Fluent, bool] = {}
    for lit in domain.init:
        check_literal(lit, "init")
        if by_fluent.get(lit.fluent, lit.positive) != lit.positive:
            problems.append(f"inconsistent init on '{lit.fluent}'")
        by_fluent[lit.fluent] = lit.positive

    for oo in domain.oneofs:
        if len(oo.literals) < 2:
            problems.append("oneof with fewer than two literals")
        if len(set(oo.literals)) != len(oo.literals):
            problems.append("oneof with repeated literals")
        for lit in oo.literals:
            check_literal(lit, "oneof")

    for g in domain.goals:
        if g.kind not in ("weak", "strong"):
            problems.append(f"unknown goal kind '{g.kind}'")
        for lit in g.literals:
            check_literal(lit, f"{g.kind} goal")

    for f in domain.static_fluents:
        if f not in declared:
            problems.append(f"undeclared static fluent '{f}'")
        if f not in by_fluent:
            problems.append(f"static fluent '{f}' has no init value")

    return ValidationReport(tuple(problems))
