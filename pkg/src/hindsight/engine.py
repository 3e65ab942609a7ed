"""Polynomial-time knowledge tracking with branching on sensing.

The state records, per branch, a triangular family of knowledge layers:
layer t1 holds everything established about each time point t <= t1
after t1 steps have been evaluated.  Layers only ever grow — later
sensing can sharpen what is known about the past (postdiction), never
retract it.  Literals are interned as bit positions so a layer is one
int per time point and the closure rules become mask arithmetic.

Each step advances every branch simultaneously: record occurrences,
check executability against current knowledge, split a branch when it
senses a fluent it does not know, then close the new layer under the
inference rules:

* causation: an applied effect whose conditions are all known produces
  knowledge of the effect at the next time point;
* positive postdiction: if the effect is known after but its complement
  was known before, the conditions must have held;
* negative postdiction: if the complement of the effect is known after
  and all conditions but one were known, the remaining one failed;
* forward/backward persistence: a literal carries across a step unless
  some applied effect could have interfered with it;
* initial-state exclusivity: "exactly one of" constraints eliminate
  and conclude alternatives as their siblings are ruled in or out.

A branch split copies the parent's newest layer and its applied-effect
history, so the child re-evaluates the shared past under its own
sensing outcome.  Branches never communicate after the split.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from hindsight.model import (
    EffectProposition,
    Literal,
    PlanningDomain,
    validate_domain,
)

CHECKS_ENV_VAR = "HINDSIGHT_CHECK"


class EngineError(Exception):
    """Base class for rejected steps and internal failures."""


class ConcurrencyError(EngineError):
    """Simultaneous occurrences violate an interference rule."""


class ExecutabilityError(EngineError):
    """An action occurred whose executability condition is not known."""


class BranchBudgetError(EngineError):
    """Sensing would create a branch index beyond the allowed maximum."""


class StepBudgetError(EngineError):
    """The state has already reached its step horizon."""


@dataclass(frozen=True)
class BranchEvent:
    """A sensing split: `child` continues with the sensed fluent false."""

    step: int
    parent: int
    child: int
    fluent: str


class Branch:
    """Per-branch bookkeeping.  Internal, but read by the cross-checker."""

    __slots__ = (
        "parent",
        "created_at",
        "layers",
        "applied",
        "occurrences",
        "observations",
        "sensing_results",
    )

    def __init__(self, parent: int | None, created_at: int):
        self.parent = parent
        self.created_at = created_at
        # layers[t1][t]: bitmask of literals known about time t after t1 steps
        self.layers: list[list[int]] = []
        # applied[t]: effect propositions of the actions that occurred at t
        self.applied: list[tuple[EffectProposition, ...]] = []
        self.occurrences: dict[int, tuple[str, ...]] = {}
        # observations[t]: (fluent, value) this timeline saw at step t
        self.observations: dict[int, tuple[str, bool]] = {}
        # sensing_results[t]: like observations, but only when the engine
        # derived knowledge from the sensing (a known-false look derives none)
        self.sensing_results: dict[int, tuple[str, bool]] = {}

    @property
    def used_from(self) -> int:
        return self.created_at + 1

    def copy(self) -> Branch:
        b = Branch(self.parent, self.created_at)
        b.layers = [list(row) for row in self.layers]
        b.applied = list(self.applied)
        b.occurrences = dict(self.occurrences)
        b.observations = dict(self.observations)
        b.sensing_results = dict(self.sensing_results)
        return b


class EpistemicState:
    """Immutable-by-convention knowledge state; step() returns a new one."""

    def __init__(
        self,
        domain: PlanningDomain,
        max_steps: int,
        max_branches: int,
        checks: bool | None = None,
    ):
        report = validate_domain(domain)
        if not report.ok:
            raise EngineError("invalid domain: " + "; ".join(report.violations))
        if max_steps < 0 or max_branches < 0:
            raise EngineError("budgets must be non-negative")
        self.domain = domain
        self.max_steps = max_steps
        self.max_branches = max_branches
        if checks is None:
            checks = os.environ.get(CHECKS_ENV_VAR, "") not in ("", "0")
        self.checks = checks

        self._findex = {f: i for i, f in enumerate(domain.fluents)}
        nbits = 2 * len(domain.fluents)
        self._even = sum(1 << b for b in range(0, nbits, 2))
        self._oneof_bits = tuple(
            tuple(self._bit(lit) for lit in oo.literals) for oo in domain.oneofs
        )

        self.horizon = 0
        self.inconsistent = False
        self.events: tuple[BranchEvent, ...] = ()
        root = Branch(parent=None, created_at=-1)
        init_mask = 0
        for lit in domain.init:
            init_mask |= 1 << self._bit(lit)
        root.layers = [[init_mask]]
        self.branches: dict[int, Branch] = {0: root}
        self._close_layer(root, 0)
        self.inconsistent = self._scan_inconsistent()
        if self.checks:
            self._run_checks(previous=None)

    # -- literal interning ---------------------------------------------------

    def _bit(self, lit: Literal) -> int:
        return self._findex[lit.fluent] * 2 + (0 if lit.positive else 1)

    def _lit_of_bit(self, bit: int) -> Literal:
        return Literal(self.domain.fluents[bit // 2], bit % 2 == 0)

    def _complement_mask(self, mask: int) -> int:
        """Swap each literal bit with its complement's bit."""
        return ((mask & self._even) << 1) | ((mask >> 1) & self._even)

    # -- queries ---------------------------------------------------------------

    def knows(self, lit: Literal, t: int, branch: int, t1: int | None = None) -> bool:
        """Is `lit` known to hold at time t, judged after t1 steps?"""
        if t1 is None:
            t1 = self.horizon
        if not 0 <= t <= t1 <= self.horizon:
            return False
        return bool(self.branches[branch].layers[t1][t] >> self._bit(lit) & 1)

    def known_literals(self, branch: int, t: int, t1: int | None = None) -> frozenset:
        """Every literal known about time t, judged after t1 steps."""
        if t1 is None:
            t1 = self.horizon
        mask = self.branches[branch].layers[t1][t]
        out = []
        while mask:
            low = mask & -mask
            out.append(self._lit_of_bit(low.bit_length() - 1))
            mask ^= low
        return frozenset(out)

    def sensing_outcome(self, branch: int, fluent: str) -> bool | None:
        """Current knowledge of a fluent at the horizon: True/False/None."""
        h = self.horizon
        if self.knows(Literal(fluent, True), h, branch, h):
            return True
        if self.knows(Literal(fluent, False), h, branch, h):
            return False
        return None

    def is_executable(self, branch: int, action_name: str) -> bool:
        a = self.domain.action(action_name)
        h = self.horizon
        return all(self.knows(lit, h, branch, h) for lit in a.executability)

    # -- stepping ---------------------------------------------------------------

    def step(self, occurrences: Mapping[int, Sequence[str]] | None = None) -> EpistemicState:
        """Advance one time step; `occurrences` maps branch -> action names.

        Branches absent from the mapping idle.  Raises on budget,
        executability, and interference violations; an inconsistent
        *knowledge* outcome is not an exception but flags the returned
        state, which cannot be stepped further.
        """
        if self.inconsistent:
            raise EngineError("cannot step an inconsistent state")
        h = self.horizon
        if h >= self.max_steps:
            raise StepBudgetError(f"step horizon {self.max_steps} reached")

        nxt = self._copy()
        occ = {br: tuple(names) for br, names in (occurrences or {}).items()}
        for br in occ:
            if br not in nxt.branches:
                raise EngineError(f"unknown branch {br}")

        # 1. validate and record the occurrences of every acting branch
        pending_sensing: list[tuple[int, str]] = []
        for br in sorted(occ):
            names = occ[br]
            if not names:
                continue
            if len(set(names)) != len(names):
                raise ConcurrencyError(f"repeated action in one step on branch {br}")
            try:
                actions = [self.domain.action(n) for n in names]
            except KeyError as exc:
                raise EngineError(f"unknown action {exc.args[0]!r}") from None
            sensors = [a for a in actions if a.is_sensing]
            if len(sensors) > 1:
                raise ConcurrencyError(
                    f"two sensing actions at step {h} on branch {br}"
                )
            for a in actions:
                for lit in a.executability:
                    if not self.knows(lit, h, br, h):
                        raise ExecutabilityError(
                            f"'{a.name}' at step {h} on branch {br} "
                            f"requires {lit} to be known"
                        )
            eps = tuple(ep for a in actions for ep in a.effect_props)
            self._check_interference(eps, h, br)
            b = nxt.branches[br]
            b.occurrences[h] = names
            b.applied.append(eps)
            if sensors:
                pending_sensing.append((br, sensors[0].knowledge_props[0].fluent))

        for br, b in nxt.branches.items():
            if len(b.applied) == h:  # idling branch
                b.applied.append(())

        # 2. resolve sensing: known value is recorded; unknown splits the branch
        for br, fluent in pending_sensing:
            parent = nxt.branches[br]
            known = self.sensing_outcome(br, fluent)
            if known is True:
                parent.observations[h] = (fluent, True)
                parent.sensing_results[h] = (fluent, True)
            elif known is False:
                # the look changes nothing: its outcome was already known
                parent.observations[h] = (fluent, False)
            else:
                child_id = br + 1
                while child_id in nxt.branches:
                    child_id += 1
                if child_id > self.max_branches:
                    raise BranchBudgetError(
                        f"sensing on branch {br} needs branch {child_id}, "
                        f"but only {self.max_branches} are allowed"
                    )
                child = Branch(parent=br, created_at=h)
                child.layers = [[0] * (t1 + 1) for t1 in range(h)]
                child.layers.append(list(parent.layers[h]))
                child.applied = list(parent.applied)
                nxt.branches[child_id] = child
                nxt.events = nxt.events + (BranchEvent(h, br, child_id, fluent),)
                parent.observations[h] = (fluent, True)
                parent.sensing_results[h] = (fluent, True)
                child.observations[h] = (fluent, False)
                child.sensing_results[h] = (fluent, False)

        # 3. open layer h+1 (persistence seed), add sensing knowledge, close it
        for br, b in nxt.branches.items():
            b.layers.append(list(b.layers[h]) + [0])
            res = b.sensing_results.get(h)
            if res is not None:
                fluent, value = res
                b.layers[h + 1][h] |= 1 << self._bit(Literal(fluent, value))
        nxt.horizon = h + 1
        for b in nxt.branches.values():
            nxt._close_layer(b, h + 1)

        nxt.inconsistent = nxt._scan_inconsistent()
        if nxt.checks:
            nxt._run_checks(previous=self)
        return nxt

    def _copy(self) -> EpistemicState:
        clone = object.__new__(EpistemicState)
        clone.domain = self.domain
        clone.max_steps = self.max_steps
        clone.max_branches = self.max_branches
        clone.checks = self.checks
        clone._findex = self._findex
        clone._even = self._even
        clone._oneof_bits = self._oneof_bits
        clone.horizon = self.horizon
        clone.inconsistent = self.inconsistent
        clone.events = self.events
        clone.branches = {br: b.copy() for br, b in self.branches.items()}
        return clone

    def _check_interference(
        self, eps: tuple[EffectProposition, ...], step: int, branch: int
    ) -> None:
        """Reject effect pairs that could clash within one step."""
        for i, ep in enumerate(eps):
            for ep1 in eps[i + 1 :]:
                if ep.effect == ep1.effect:
                    raise ConcurrencyError(
                        f"'{ep.id}' and '{ep1.id}' both produce {ep.effect} "
                        f"at step {step} on branch {branch}"
                    )
                if ep.effect.fluent == ep1.effect.fluent:
                    # opposite signs; tolerated only when their conditions
                    # are mutually exclusive on some fluent
                    down = ep if not ep.effect.positive else ep1
                    up = ep1 if down is ep else ep
                    exclusive = any(
                        Literal(c.fluent, True) in down.conditions
                        and Literal(c.fluent, False) in up.conditions
                        for c in down.conditions
                    )
                    if not exclusive:
                        raise ConcurrencyError(
                            f"'{ep.id}' and '{ep1.id}' clash on "
                            f"'{ep.effect.fluent}' at step {step} on branch {branch}"
                        )

    # -- closure ---------------------------------------------------------------

    def _possibly_fired(self, b: Branch, t: int, row: int) -> int:
        """Mask of effect literals some applied proposition at step t may
        have produced, judging its conditions by knowledge `row`."""
        mask = 0
        for ep in b.applied[t]:
            for c in ep.conditions:
                if row >> (self._bit(c) ^ 1) & 1:
                    break  # a condition is known false: cannot have fired
            else:
                mask |= 1 << self._bit(ep.effect)
        return mask

    def _close_layer(self, b: Branch, s: int) -> None:
        """Least fixpoint of the inference rules on layer s of one branch."""
        masks = b.layers[s]
        steps = range(min(len(b.applied), s))
        while True:
            changed = False

            # persistence, forward then backward, against possible interference
            fired = [self._possibly_fired(b, t, masks[t]) for t in steps]
            for t in steps:
                add = masks[t] & ~self._complement_mask(fired[t]) & ~masks[t + 1]
                if add:
                    masks[t + 1] |= add
                    changed = True
            for t in range(len(fired), 0, -1):
                add = masks[t] & ~fired[t - 1] & ~masks[t - 1]
                if add:
                    masks[t - 1] |= add
                    changed = True

            # exactly-one initial constraints: rule in / rule out alternatives
            for bits in self._oneof_bits:
                for i, bi in enumerate(bits):
                    if masks[0] >> bi & 1:
                        for j, bj in enumerate(bits):
                            if j != i and not masks[0] >> (bj ^ 1) & 1:
                                masks[0] |= 1 << (bj ^ 1)
                                changed = True
                    elif all(masks[0] >> (bj ^ 1) & 1 for j, bj in enumerate(bits) if j != i):
                        masks[0] |= 1 << bi
                        changed = True

            # causation and the two postdiction directions
            for t in steps:
                for ep in b.applied[t]:
                    eb = self._bit(ep.effect)
                    cbits = [self._bit(c) for c in ep.conditions]
                    if all(masks[t] >> cb & 1 for cb in cbits) and not masks[t + 1] >> eb & 1:
                        masks[t + 1] |= 1 << eb
                        changed = True
                    if masks[t + 1] >> eb & 1 and masks[t] >> (eb ^ 1) & 1:
                        for cb in cbits:
                            if not masks[t] >> cb & 1:
                                masks[t] |= 1 << cb
                                changed = True
                    if masks[t + 1] >> (eb ^ 1) & 1:
                        for i, cb in enumerate(cbits):
                            others_known = all(
                                masks[t] >> cj & 1
                                for j, cj in enumerate(cbits)
                                if j != i
                            )
                            if others_known and not masks[t] >> (cb ^ 1) & 1:
                                masks[t] |= 1 << (cb ^ 1)
                                changed = True

            if not changed:
                return

    def _scan_inconsistent(self) -> bool:
        for b in self.branches.values():
            for row in b.layers[self.horizon]:
                if row & (row >> 1) & self._even:
                    return True
        return False

    # -- atom dump ---------------------------------------------------------------

    def all_atoms(self) -> list[str]:
        """Every derived atom, rendered and sorted; the trace format."""
        out: list[str] = []
        for bid in sorted(self.branches):
            b = self.branches[bid]
            for t1, row in enumerate(b.layers):
                for t, mask in enumerate(row):
                    m = mask
                    while m:
                        low = m & -m
                        lit = self._lit_of_bit(low.bit_length() - 1)
                        out.append(f"knows({lit},{t},{t1},{bid})")
                        m ^= low
            for t, names in sorted(b.occurrences.items()):
                sensing = False
                for n in names:
                    out.append(f"occ({n},{t},{bid})")
                    sensing = sensing or self.domain.action(n).is_sensing
                if sensing:
                    out.append(f"sOcc({t},{bid})")
            for t, eps in enumerate(b.applied):
                for ep in eps:
                    out.append(f"apply({ep.id},{t},{bid})")
            for t, (fluent, value) in sorted(b.sensing_results.items()):
                lit = Literal(fluent, value)
                out.append(f"sRes({lit},{t},{bid})")
            for t in range(b.used_from, self.horizon + 1):
                out.append(f"uBr({t},{bid})")
            for t1 in range(max(b.used_from, 0), self.horizon + 1):
                for t in range(min(t1 + 1, len(b.applied))):
                    fired = self._possibly_fired(b, t, b.layers[t1][t])
                    for f in self.domain.fluents:
                        pos_bit = self._bit(Literal(f, True))
                        if not fired >> pos_bit & 1:
                            out.append(f"kNotInit({f},{t},{t1},{bid})")
                        if not fired >> (pos_bit ^ 1) & 1:
                            out.append(f"kNotTerm({f},{t},{t1},{bid})")
        for ev in self.events:
            out.append(f"nextBr({ev.step},{ev.parent},{ev.child})")
        return sorted(out)

    def knows_atoms(self) -> Iterator[tuple[Literal, int, int, int]]:
        """(literal, t, t1, branch) for every knowledge atom."""
        for bid in sorted(self.branches):
            for t1, row in enumerate(self.branches[bid].layers):
                for t, mask in enumerate(row):
                    m = mask
                    while m:
                        low = m & -m
                        yield self._lit_of_bit(low.bit_length() - 1), t, t1, bid
                        m ^= low

    # -- assertion-checked build ------------------------------------------------

    def _run_checks(self, previous: EpistemicState | None) -> None:
        """Internal invariants; violations are engine bugs, hence asserts."""
        for bid, b in self.branches.items():
            assert len(b.layers) == self.horizon + 1, "layer count mismatch"
            for t1, row in enumerate(b.layers):
                assert len(row) == t1 + 1, "layer shape mismatch"
            for t1 in range(self.horizon):
                for t in range(t1 + 1):
                    assert b.layers[t1][t] & ~b.layers[t1 + 1][t] == 0, (
                        f"knowledge shrank on branch {bid} at ({t},{t1})"
                    )
            assert len(b.applied) == self.horizon, "applied-step count mismatch"
            if b.parent is not None:
                assert b.parent in self.branches, "dangling parent"
                assert b.parent < bid, "child index not above parent"
                assert self.branches[b.parent].created_at < b.created_at
            # idempotence: closing the final layer again must add nothing
            snapshot = [list(row) for row in b.layers]
            self._close_layer(b, self.horizon)
            assert [list(row) for row in b.layers] == snapshot, (
                f"final layer of branch {bid} was not closed"
            )
        for ev in self.events:
            parent = self.branches[ev.parent]
            child = self.branches[ev.child]
            assert child.layers[ev.step] == parent.layers[ev.step], (
                "split layer diverged from parent"
            )
            assert self.knows(Literal(ev.fluent, True), ev.step, ev.parent, ev.step + 1)
            assert self.knows(Literal(ev.fluent, False), ev.step, ev.child, ev.step + 1)
        if previous is not None:
            for bid, old in previous.branches.items():
                new = self.branches[bid]
                for t1 in range(previous.horizon + 1):
                    assert new.layers[t1] == old.layers[t1], (
                        f"closed layer {t1} of branch {bid} changed"
                    )
        assert self.inconsistent == self._scan_inconsistent()


def initial_state(
    domain: PlanningDomain,
    max_steps: int,
    max_branches: int,
    checks: bool | None = None,
) -> EpistemicState:
    """Knowledge state at time zero: the init literals, closed under the
    exactly-one constraints."""
    return EpistemicState(domain, max_steps, max_branches, checks)
