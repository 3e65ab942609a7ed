"""Conditional plans and the searches that produce them.

A plan is a tree: physical steps have one continuation, sensing steps
either split (outcome unknown at plan time) or continue straight when
the value was already known.  Search runs depth-first over one timeline
at a time — after a split the two sides share no knowledge, so each is
solved independently against the same engine state, the strong goal
owed by both sides and the weak goal by at least one.  Horizons are
iteratively deepened, so the first plan found uses the fewest steps;
minimum-occurrence search adds an outer action-count budget.

Every plan returned by a search is replayed through the engine from
scratch by verify_plan, which is also the public checker for plans
from any other source.
"""

from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterator, Union

from hindsight.engine import (
    BranchBudgetError,
    ConcurrencyError,
    EngineError,
    EpistemicState,
    initial_state,
)
from hindsight.model import PlanningDomain


class PlanFormatError(Exception):
    """Plan atoms that do not describe a well-formed plan tree."""


class PlanSearchError(Exception):
    """Internal failure: a found plan did not survive replay."""


@dataclass(frozen=True)
class Leaf:
    """No further actions on this timeline."""


@dataclass(frozen=True)
class Step:
    """One time step of a plan timeline.

    `actions` may be empty (a deliberate wait).  `sensed` names the
    fluent observed this step, if any.  A sensing step with `on_false`
    set splits: `on_true`/`on_false` continue the two outcomes.  With
    `on_false` unset the continuation is always `on_true` and `outcome`
    records the value believed at plan time.
    """

    actions: tuple[str, ...]
    sensed: str | None = None
    outcome: bool | None = None
    on_true: ConditionalPlan = Leaf()
    on_false: ConditionalPlan | None = None


ConditionalPlan = Union[Leaf, Step]


def count_occurrences(plan: ConditionalPlan) -> int:
    if isinstance(plan, Leaf):
        return 0
    n = len(plan.actions) + count_occurrences(plan.on_true)
    if plan.on_false is not None:
        n += count_occurrences(plan.on_false)
    return n


def plan_depth(plan: ConditionalPlan) -> int:
    if isinstance(plan, Leaf):
        return 0
    sides = [plan_depth(plan.on_true)]
    if plan.on_false is not None:
        sides.append(plan_depth(plan.on_false))
    return 1 + max(sides)


# ---------------------------------------------------------------------------
# Plan <-> atoms


def extract_atoms(plan: ConditionalPlan) -> list[str]:
    """occ/nextBr/sRes atoms of a plan, with canonical branch numbering.

    Children take the smallest unused index above their parent, parents
    resolved in ascending order per step — the same rule the engine
    uses, so replaying the plan yields these exact atoms.
    """
    atoms: list[str] = []
    active: dict[int, ConditionalPlan] = {0: plan}
    used = {0}
    t = 0
    while any(isinstance(node, Step) for node in active.values()):
        advanced: dict[int, ConditionalPlan] = {}
        for br in sorted(active):
            node = active[br]
            if isinstance(node, Leaf):
                advanced[br] = node
                continue
            for name in node.actions:
                atoms.append(f"occ({name},{t},{br})")
            if node.sensed is not None and node.on_false is not None:
                child = br + 1
                while child in used:
                    child += 1
                used.add(child)
                atoms.append(f"nextBr({t},{br},{child})")
                atoms.append(f"sRes({node.sensed},{t},{br})")
                atoms.append(f"sRes(-{node.sensed},{t},{child})")
                advanced[br] = node.on_true
                advanced[child] = node.on_false
            else:
                if node.sensed is not None and node.outcome:
                    atoms.append(f"sRes({node.sensed},{t},{br})")
                advanced[br] = node.on_true
        active = advanced
        t += 1
    return sorted(atoms)


_ATOM_RE = re.compile(r"^(\w+)\(([^()]*)\)$")


def parse_atoms(domain: PlanningDomain, atoms) -> ConditionalPlan:
    """Rebuild a plan tree from occ/nextBr/sRes atoms.

    Other predicates (knows, uBr, ...) are ignored, so a full trace
    parses too.  Idle gaps between a branch's occurrences become
    explicit wait steps; trailing idles are never reconstructed.
    """
    occ: dict[int, dict[int, list[str]]] = {}
    splits: dict[tuple[int, int], int] = {}
    sres: set[tuple[str, int, int]] = set()
    for raw in atoms:
        raw = raw.strip()
        if not raw:
            continue
        m = _ATOM_RE.match(raw)
        if m is None:
            raise PlanFormatError(f"unreadable atom {raw!r}")
        name, args = m.group(1), [a.strip() for a in m.group(2).split(",")]
        try:
            if name == "occ":
                action, t, br = args[0], int(args[1]), int(args[2])
                occ.setdefault(br, {}).setdefault(t, []).append(action)
            elif name == "nextBr":
                t, parent, child = (int(a) for a in args)
                if (t, parent) in splits:
                    raise PlanFormatError(f"two splits at step {t} on branch {parent}")
                splits[(t, parent)] = child
            elif name == "sRes":
                sres.add((args[0], int(args[1]), int(args[2])))
        except (ValueError, IndexError):
            raise PlanFormatError(f"malformed atom {raw!r}") from None

    children = {child: (t, parent) for (t, parent), child in splits.items()}
    for child, (t, _parent) in children.items():
        if any(step <= t for step in occ.get(child, {})):
            raise PlanFormatError(f"branch {child} acts before its split at step {t}")
    for br in set(occ) | {p for (_, p) in splits}:
        if br != 0 and br not in children:
            raise PlanFormatError(f"branch {br} is never created by a split")

    def sensing_fluent(names: tuple[str, ...], t: int, br: int) -> str | None:
        sensors = []
        for n in names:
            try:
                action = domain.action(n)
            except KeyError:
                raise PlanFormatError(f"unknown action {n!r}") from None
            if action.is_sensing:
                sensors.append(action)
        if len(sensors) > 1:
            raise PlanFormatError(f"two sensing actions at step {t} on branch {br}")
        return sensors[0].knowledge_props[0].fluent if sensors else None

    def build(br: int, t: int) -> ConditionalPlan:
        branch_occ = occ.get(br, {})
        future = [s for s in branch_occ if s >= t]
        future += [s for (s, p) in splits if p == br and s >= t]
        if not future:
            return Leaf()
        target = min(future)
        if target > t:
            return Step((), None, None, build(br, t + 1), None)
        names = tuple(sorted(branch_occ.get(t, ())))
        fluent = sensing_fluent(names, t, br)
        child = splits.get((t, br))
        if child is not None:
            if fluent is None:
                raise PlanFormatError(
                    f"split at step {t} on branch {br} without a sensing occurrence"
                )
            if (fluent, t, br) not in sres or (f"-{fluent}", t, child) not in sres:
                raise PlanFormatError(
                    f"split at step {t} on branch {br} lacks its two sensing results"
                )
            return Step(names, fluent, None, build(br, t + 1), build(child, t + 1))
        if fluent is not None:
            return Step(names, fluent, (fluent, t, br) in sres, build(br, t + 1), None)
        return Step(names, None, None, build(br, t + 1), None)

    return build(0, 0)


def plan_records(plan: ConditionalPlan) -> list[dict]:
    """One record per action occurrence, for line-oriented output."""
    records: list[dict] = []
    active: dict[int, ConditionalPlan] = {0: plan}
    used = {0}
    t = 0
    while any(isinstance(node, Step) for node in active.values()):
        advanced: dict[int, ConditionalPlan] = {}
        for br in sorted(active):
            node = active[br]
            if isinstance(node, Leaf):
                advanced[br] = node
                continue
            child: int | None = None
            if node.sensed is not None and node.on_false is not None:
                child = br + 1
                while child in used:
                    child += 1
                used.add(child)
            for name in node.actions:
                records.append(
                    {
                        "action": name,
                        "step": t,
                        "branch": br,
                        "sensed": node.sensed,
                        "then_branch": br if node.sensed is not None else None,
                        "else_branch": child,
                    }
                )
            advanced[br] = node.on_true
            if child is not None:
                advanced[child] = node.on_false
        active = advanced
        t += 1
    return records


def format_plan(plan: ConditionalPlan) -> str:
    """Human-readable tree rendering."""
    lines: list[str] = []

    def walk(node: ConditionalPlan, t: int, indent: str) -> None:
        if isinstance(node, Leaf):
            if not lines or lines[-1].endswith(":"):
                lines.append(f"{indent}(nothing to do)")
            return
        label = " + ".join(node.actions) if node.actions else "(wait)"
        if node.sensed is not None and node.on_false is not None:
            lines.append(f"{indent}{t}: {label}")
            lines.append(f"{indent}if {node.sensed}:")
            walk(node.on_true, t + 1, indent + "  ")
            lines.append(f"{indent}if -{node.sensed}:")
            walk(node.on_false, t + 1, indent + "  ")
        else:
            lines.append(f"{indent}{t}: {label}")
            walk(node.on_true, t + 1, indent)

    walk(plan, 0, "")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Replay verification


@dataclass(frozen=True)
class VerificationReport:
    plan_found: bool
    weak_branches: tuple[int, ...]
    strong_failures: tuple[int, ...]
    errors: tuple[str, ...]
    occurrences: int
    state: EpistemicState | None

    @property
    def ok(self) -> bool:
        return self.plan_found and not self.errors


def _shape_errors(domain: PlanningDomain, plan: ConditionalPlan) -> list[str]:
    problems: list[str] = []

    def walk(node: ConditionalPlan) -> None:
        if isinstance(node, Leaf):
            return
        if len(set(node.actions)) != len(node.actions):
            problems.append(f"repeated action in step {node.actions}")
        sensors = []
        for name in node.actions:
            try:
                action = domain.action(name)
            except KeyError:
                problems.append(f"unknown action {name!r}")
                continue
            if action.is_sensing:
                sensors.append(action)
        if len(sensors) > 1:
            problems.append(f"two sensing actions in step {node.actions}")
        elif sensors and node.sensed != sensors[0].knowledge_props[0].fluent:
            problems.append(
                f"step {node.actions} senses '{sensors[0].knowledge_props[0].fluent}' "
                f"but is labelled {node.sensed!r}"
            )
        elif not sensors and node.sensed is not None:
            problems.append(f"step {node.actions} is labelled as sensing {node.sensed!r}")
        if node.on_false is not None and node.sensed is None:
            problems.append("split without a sensed fluent")
        walk(node.on_true)
        if node.on_false is not None:
            walk(node.on_false)

    walk(plan)
    return problems


def verify_plan(
    domain: PlanningDomain,
    plan: ConditionalPlan,
    max_steps: int,
    max_branches: int,
    checks: bool | None = None,
) -> VerificationReport:
    """Replay a plan through the engine and judge the goals.

    The replay drives all branches simultaneously, exactly as execution
    would; once every timeline is done the remaining steps idle, which
    never loses knowledge.  The weak goal must hold on some branch at
    the final step and the strong goal on all of them.
    """
    errors = _shape_errors(domain, plan)
    state = initial_state(domain, max_steps, max_branches, checks)
    if not errors:
        active: dict[int, ConditionalPlan] = {0: plan}
        for t in range(max_steps):
            occurrences = {
                br: node.actions
                for br, node in active.items()
                if isinstance(node, Step) and node.actions
            }
            before = state
            try:
                state = state.step(occurrences)
            except EngineError as exc:
                errors.append(f"step {t}: {exc}")
                break
            if state.inconsistent:
                errors.append(f"step {t}: knowledge became contradictory")
                break
            new_children = {
                ev.parent: ev for ev in state.events[len(before.events):]
            }
            advanced: dict[int, ConditionalPlan] = {}
            for br, node in active.items():
                if isinstance(node, Leaf):
                    advanced[br] = node
                    continue
                event = new_children.get(br)
                if node.sensed is None:
                    advanced[br] = node.on_true
                elif event is not None:
                    if node.on_false is None:
                        errors.append(
                            f"step {t}: sensing '{node.sensed}' on branch {br} "
                            "came out unknown but the plan has one continuation"
                        )
                    advanced[br] = node.on_true
                    advanced[event.child] = (
                        node.on_false if node.on_false is not None else Leaf()
                    )
                else:
                    if node.on_false is not None:
                        errors.append(
                            f"step {t}: the plan splits on '{node.sensed}' at "
                            f"branch {br}, but its value was already known"
                        )
                        known = before.sensing_outcome(br, node.sensed)
                        advanced[br] = node.on_true if known else node.on_false
                    else:
                        advanced[br] = node.on_true
            active = advanced
        if not errors:
            leftover = sorted(
                br for br, node in active.items() if isinstance(node, Step)
            )
            if leftover:
                errors.append(
                    f"plan continues past the {max_steps}-step budget "
                    f"on branches {leftover}"
                )

    weak = domain.goal_literals("weak")
    strong = domain.goal_literals("strong")
    weak_branches: list[int] = []
    strong_failures: list[int] = []
    if not errors:
        h = state.horizon
        for br in sorted(state.branches):
            if all(state.knows(lit, h, br) for lit in weak):
                weak_branches.append(br)
            if not all(state.knows(lit, h, br) for lit in strong):
                strong_failures.append(br)
    occurrences = sum(
        len(names)
        for b in state.branches.values()
        for names in b.occurrences.values()
    )
    found = not errors and bool(weak_branches) and not strong_failures
    return VerificationReport(
        plan_found=found,
        weak_branches=tuple(weak_branches),
        strong_failures=tuple(strong_failures),
        errors=tuple(errors),
        occurrences=occurrences,
        state=state if not errors else None,
    )


# ---------------------------------------------------------------------------
# Search


def _candidates(
    state: EpistemicState, branch: int, concurrent: bool, prune: bool = False
) -> list[tuple[str, ...]]:
    """Occurrence sets to try, cheapest-informative first, waiting last.

    Sensing a fluent whose value is already known derives nothing and
    is skipped.  Concurrent mode enumerates action subsets smallest
    first with at most one sensor each.

    With `prune`, physical actions whose every effect literal is
    already known true are also skipped.  That loses completeness in
    one contrived corner — re-firing a known effect un-anchors it from
    inertia, and sensing it afterwards can reveal the effect's
    condition via postdiction — so it stays opt-in.
    """
    h = state.horizon
    names = []
    for action in state.domain.actions:
        if not state.is_executable(branch, action.name):
            continue
        if action.is_sensing and (
            state.sensing_outcome(branch, action.knowledge_props[0].fluent) is not None
        ):
            continue
        if (
            prune
            and action.effect_props
            and all(
                state.knows(ep.effect, h, branch, h) for ep in action.effect_props
            )
        ):
            continue
        names.append(action.name)
    names.sort()
    if not concurrent:
        return [(n,) for n in names] + [()]
    subsets: list[tuple[str, ...]] = []
    for size in range(1, len(names) + 1):
        for combo in combinations(names, size):
            sensors = sum(1 for n in combo if state.domain.action(n).is_sensing)
            if sensors <= 1:
                subsets.append(combo)
    return subsets + [()]


def _make_solver(domain: PlanningDomain, concurrent: bool, prune: bool = False) -> Callable:
    """Build the recursive timeline solver for one domain.

    solve(state, branch, t, weak_required, occ_budget, split_budget)
    yields (plan, occurrence_count, split_count) in search order; the
    budgets are None for unbounded.
    """
    strong = domain.goal_literals("strong")
    weak = domain.goal_literals("weak")

    def solve(
        state: EpistemicState,
        branch: int,
        t: int,
        weak_required: bool,
        occ_budget: int | None,
        split_budget: int | None,
    ) -> Iterator[tuple[ConditionalPlan, int, int]]:
        required = strong + (weak if weak_required else ())
        if all(state.knows(lit, t, branch) for lit in required):
            yield Leaf(), 0, 0
            return
        if t >= state.max_steps:
            return
        for acts in _candidates(state, branch, concurrent, prune):
            yield from expand(state, branch, t, acts, weak_required, occ_budget, split_budget)

    def expand(
        state: EpistemicState,
        branch: int,
        t: int,
        acts: tuple[str, ...],
        weak_required: bool,
        occ_budget: int | None,
        split_budget: int | None,
    ) -> Iterator[tuple[ConditionalPlan, int, int]]:
        cost = len(acts)
        if occ_budget is not None and cost > occ_budget:
            return
        try:
            nxt = state.step({branch: acts} if acts else {})
        except (ConcurrencyError, BranchBudgetError):
            return
        if nxt.inconsistent:
            return
        remaining = None if occ_budget is None else occ_budget - cost
        new_events = nxt.events[len(state.events):]
        if new_events:
            event = new_events[0]
            if split_budget is not None and split_budget < 1:
                return
            splits_left = None if split_budget is None else split_budget - 1
            if weak_required and weak:
                orders = ((True, False), (False, True))
            else:
                orders = ((False, False),)
            for parent_weak, child_weak in orders:
                for p_plan, p_cost, p_splits in solve(
                    nxt, branch, t + 1, parent_weak, remaining, splits_left
                ):
                    rem2 = None if remaining is None else remaining - p_cost
                    sb2 = None if splits_left is None else splits_left - p_splits
                    for c_plan, c_cost, c_splits in solve(
                        nxt, event.child, t + 1, child_weak, rem2, sb2
                    ):
                        yield (
                            Step(acts, event.fluent, None, p_plan, c_plan),
                            cost + p_cost + c_cost,
                            1 + p_splits + c_splits,
                        )
        else:
            for sub, sub_cost, sub_splits in solve(
                nxt, branch, t + 1, weak_required, remaining, split_budget
            ):
                yield Step(acts, None, None, sub, None), cost + sub_cost, sub_splits

    solve.expand = expand  # reused by the parallel root fan-out
    return solve


def _first_plan_at_horizon(
    domain: PlanningDomain,
    horizon: int,
    max_branches: int,
    concurrent: bool,
    checks: bool | None,
    occ_budget: int | None = None,
    jobs: int | None = None,
    prune: bool = False,
) -> ConditionalPlan | None:
    state0 = initial_state(domain, horizon, max_branches, checks)
    solve = _make_solver(domain, concurrent, prune)
    if jobs and jobs > 1 and horizon > 0:
        required = domain.goal_literals("strong") + domain.goal_literals("weak")
        if all(state0.knows(lit, 0, 0) for lit in required):
            return Leaf()
        return _parallel_root(
            domain, horizon, max_branches, concurrent, checks, occ_budget, jobs, prune
        )
    for plan, _cost, _splits in solve(state0, 0, 0, True, occ_budget, max_branches):
        return plan
    return None


def _parallel_worker(args) -> ConditionalPlan | None:
    domain, horizon, max_branches, concurrent, checks, occ_budget, index, prune = args
    state0 = initial_state(domain, horizon, max_branches, checks)
    solve = _make_solver(domain, concurrent, prune)
    acts = _candidates(state0, 0, concurrent, prune)[index]
    for plan, _cost, _splits in solve.expand(
        state0, 0, 0, acts, True, occ_budget, max_branches
    ):
        return plan
    return None


def _parallel_root(
    domain: PlanningDomain,
    horizon: int,
    max_branches: int,
    concurrent: bool,
    checks: bool | None,
    occ_budget: int | None,
    jobs: int,
    prune: bool = False,
) -> ConditionalPlan | None:
    """Fan the root candidates out to worker processes; first success in
    candidate order wins, so the result matches the serial search."""
    state0 = initial_state(domain, horizon, max_branches, checks)
    count = len(_candidates(state0, 0, concurrent, prune))
    if count == 0:
        return None
    args = [
        (domain, horizon, max_branches, concurrent, checks, occ_budget, i, prune)
        for i in range(count)
    ]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_parallel_worker, a) for a in args]
        try:
            for future in futures:
                plan = future.result()
                if plan is not None:
                    return plan
        finally:
            for future in futures:
                future.cancel()
    return None


def find_plan(
    domain: PlanningDomain,
    max_steps: int,
    max_branches: int,
    *,
    concurrent: bool = False,
    deepen: bool = True,
    checks: bool | None = None,
    jobs: int | None = None,
    prune: bool = False,
) -> ConditionalPlan | None:
    """First plan found, at the smallest workable horizon.

    With `deepen` the horizon grows from zero, so the returned plan is
    as shallow as possible; without it only `max_steps` is tried, which
    is faster when the needed depth is known.  The plan is replayed at
    the full budgets before being returned.
    """
    horizons = range(max_steps + 1) if deepen else [max_steps]
    for horizon in horizons:
        plan = _first_plan_at_horizon(
            domain, horizon, max_branches, concurrent, checks, jobs=jobs, prune=prune
        )
        if plan is not None:
            report = verify_plan(domain, plan, max_steps, max_branches, checks)
            if not report.ok:
                raise PlanSearchError(
                    f"found plan fails replay: {'; '.join(report.errors) or 'goals unmet'}"
                )
            return plan
    return None


def find_optimal_plan(
    domain: PlanningDomain,
    max_steps: int,
    max_branches: int,
    *,
    concurrent: bool = False,
    checks: bool | None = None,
    jobs: int | None = None,
    prune: bool = False,
) -> ConditionalPlan | None:
    """Plan with the fewest action occurrences within the budgets.

    Outer loop over an occurrence budget, inner loop over horizons:
    the first plan found is optimal because every smaller budget was
    exhausted first.
    """
    per_step = len(domain.actions) if concurrent else 1
    most = max_steps * (max_branches + 1) * per_step
    for budget in range(most + 1):
        for horizon in range(max_steps + 1):
            plan = _first_plan_at_horizon(
                domain,
                horizon,
                max_branches,
                concurrent,
                checks,
                occ_budget=budget,
                jobs=jobs,
                prune=prune,
            )
            if plan is not None:
                report = verify_plan(domain, plan, max_steps, max_branches, checks)
                if not report.ok:
                    raise PlanSearchError(
                        f"found plan fails replay: {'; '.join(report.errors) or 'goals unmet'}"
                    )
                return plan
    return None
