"""Brute-force possible-worlds semantics, used as ground truth.

A world is the frozenset of fluents true in it.  A belief state (sigma)
is a set of worlds.  Physical actions map each world pointwise through
add/delete effects whose conditions are evaluated on that world's
pre-state; sensing filters sigma down to the worlds that agree with the
observed value.

Queries use hindsight semantics: "was l true at time t" is answered
from the initial worlds that survive *all* observations along the whole
trace, evolved forward t steps.  This is deliberately exponential and
simple — it exists to cross-check the polynomial engine, so it shares
no inference code with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from hindsight.model import Fluent, Literal, PlanningDomain

if TYPE_CHECKING:  # pragma: no cover
    from hindsight.engine import EpistemicState

# 2**16 worlds is the most the exhaustive enumeration will attempt.
MAX_ORACLE_FLUENTS = 16

WorldState = frozenset


class OracleCapacityError(Exception):
    """Domain too large for exhaustive world enumeration."""


@dataclass(frozen=True)
class TraceStep:
    """One time step of a branch: actions taken plus observations made.

    Observations are (fluent, value) pairs evaluated on the step's
    pre-state; a sensing action reports the value the world had when it
    looked, even when a physical action fires in the same step.
    """

    actions: tuple[str, ...] = ()
    observations: tuple[tuple[Fluent, bool], ...] = ()


def _holds(literal: Literal, world: WorldState) -> bool:
    return (literal.fluent in world) == literal.positive


def initial_sigma(domain: PlanningDomain) -> frozenset:
    """All worlds consistent with the init literals and oneof constraints."""
    fluents = domain.fluents
    if len(fluents) > MAX_ORACLE_FLUENTS:
        raise OracleCapacityError(
            f"{len(fluents)} fluents exceeds the {MAX_ORACLE_FLUENTS}-fluent "
            "cap for exhaustive world enumeration"
        )
    worlds = []
    for bits in range(1 << len(fluents)):
        world = frozenset(f for k, f in enumerate(fluents) if bits >> k & 1)
        if not all(_holds(lit, world) for lit in domain.init):
            continue
        if not all(
            sum(_holds(lit, world) for lit in oo.literals) == 1
            for oo in domain.oneofs
        ):
            continue
        worlds.append(world)
    return frozenset(worlds)


def result_state(domain: PlanningDomain, world: WorldState, actions: Iterable[str]) -> WorldState:
    """Pointwise transition: conditions on the pre-state, effects folded.

    Simultaneous actions all read the same pre-state; their add and
    delete sets are unioned, deletes applied last.
    """
    adds: set[Fluent] = set()
    dels: set[Fluent] = set()
    for name in actions:
        for ep in domain.action(name).effect_props:
            if all(_holds(c, world) for c in ep.conditions):
                (adds if ep.effect.positive else dels).add(ep.effect.fluent)
    return frozenset((world | adds) - dels)


def apply_step(domain: PlanningDomain, sigma: Iterable, step: TraceStep) -> frozenset:
    """One trace step over a belief state: observation filter, then effects."""
    out = []
    for world in sigma:
        if all((f in world) == value for f, value in step.observations):
            out.append(result_state(domain, world, step.actions))
    return frozenset(out)


def entails(sigma: frozenset, literal: Literal) -> bool:
    """True when the literal holds in every world.  Empty sigma is an error."""
    if not sigma:
        raise ValueError("entailment query against an empty belief state")
    return all(_holds(literal, world) for world in sigma)


def tqs_timeline(domain: PlanningDomain, steps: tuple) -> tuple:
    """Hindsight belief states along a trace.

    Element t is the set of time-t states of those initial worlds that
    survive every observation in the *entire* trace — so later sensing
    sharpens what is known about earlier times.  All elements are empty
    when the observations contradict each other.
    """
    n = len(steps)
    timelines = []
    for w0 in initial_sigma(domain):
        history = [w0]
        world = w0
        alive = True
        for step in steps:
            if not all((f in world) == value for f, value in step.observations):
                alive = False
                break
            world = result_state(domain, world, step.actions)
            history.append(world)
        if alive:
            timelines.append(history)
    return tuple(
        frozenset(history[t] for history in timelines) for t in range(n + 1)
    )


def tqs_entails(domain: PlanningDomain, steps: tuple, literal: Literal, t: int) -> bool:
    """Was `literal` true at time t, given everything the trace revealed?"""
    if not 0 <= t <= len(steps):
        raise ValueError(f"query time {t} outside trace of length {len(steps)}")
    return entails(tqs_timeline(domain, steps)[t], literal)


# ---------------------------------------------------------------------------
# Cross-checking the engine


@dataclass(frozen=True)
class SoundnessReport:
    """Outcome of replaying an engine state against the world semantics."""

    checked: int = 0
    violations: tuple[str, ...] = ()
    vacuous_branches: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def branch_trace(state: EpistemicState, branch_id: int) -> tuple:
    """Reconstruct the action/observation timeline a branch lived through.

    A branch shares its ancestors' history: steps before an ancestor
    split belong to that ancestor, and at the split step the child's
    timeline records the opposite observation the parent continued with.
    """
    lineage = []
    b: int | None = branch_id
    while b is not None:
        lineage.append(b)
        b = state.branches[b].parent
    lineage.reverse()

    steps = []
    for t in range(state.horizon):
        owner = lineage[0]
        holder = lineage[0]
        for b in lineage:
            created = state.branches[b].created_at
            if created < t:
                owner = b
            if created <= t:
                holder = b
        actions = state.branches[owner].occurrences.get(t, ())
        obs = state.branches[holder].observations.get(t)
        steps.append(TraceStep(tuple(actions), (obs,) if obs is not None else ()))
    return tuple(steps)


def soundness_check(state: EpistemicState) -> SoundnessReport:
    """Verify every final-stage knowledge claim against the world semantics.

    Only the final evaluation stage is checked: knowledge never shrinks
    as evaluation advances, so the final stage covers all earlier ones.
    Branches whose observation sequence no world can realize are
    vacuously sound and reported separately.
    """
    if state.inconsistent:
        raise ValueError("cannot soundness-check an inconsistent state")
    domain = state.domain
    checked = 0
    violations: list[str] = []
    vacuous: list[int] = []
    for br in sorted(state.branches):
        steps = branch_trace(state, br)
        timeline = tqs_timeline(domain, steps)
        if not timeline[0]:
            vacuous.append(br)
            continue
        for t in range(state.horizon + 1):
            for lit in sorted(state.known_literals(br, t)):
                checked += 1
                if not entails(timeline[t], lit):
                    violations.append(
                        f"branch {br}: claims {lit} at time {t}, "
                        f"but worlds {sorted(map(sorted, timeline[t]))} disagree"
                    )
    return SoundnessReport(checked, tuple(violations), tuple(vacuous))
