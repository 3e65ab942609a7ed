"""Plan search, replay verification, and plan/atom round-trips.

The door-domain expectations (exact plan tree, exact atoms) were worked
out by hand before the search existed; the optimal-search test uses a
domain built so that the first plan found is strictly more expensive
than the cheapest one.
"""

from __future__ import annotations

import dataclasses
import pathlib

import pytest

from hindsight.model import (
    Action,
    EffectProposition,
    GoalProposition,
    KnowledgeProposition,
    PlanningDomain,
    neg,
    pos,
)
from hindsight.oracle import soundness_check
from hindsight.parser import parse_domain
from hindsight.search import (
    Leaf,
    PlanFormatError,
    Step,
    count_occurrences,
    extract_atoms,
    find_optimal_plan,
    find_plan,
    format_plan,
    parse_atoms,
    plan_depth,
    plan_records,
    verify_plan,
)

DATA = pathlib.Path(__file__).parent / "data"


def door_domain() -> PlanningDomain:
    return parse_domain((DATA / "smarthome.hpx").read_text(encoding="utf-8"))


DOOR_PLAN = Step(
    ("open_door",),
    None,
    None,
    Step(
        ("sense_open",),
        "open",
        None,
        Step(("drive",), None, None, Leaf(), None),
        Leaf(),
    ),
    None,
)


def yale_goal_domain() -> PlanningDomain:
    return PlanningDomain(
        fluents=("loaded", "alive"),
        actions=(
            Action(
                "shoot",
                effect_props=(
                    EffectProposition("shoot_1", neg("alive"), (pos("loaded"),)),
                    EffectProposition("shoot_2", neg("loaded")),
                ),
            ),
            Action("sense_bang", knowledge_props=(KnowledgeProposition("loaded"),)),
        ),
        init=(pos("alive"),),
        goals=(GoalProposition("weak", (neg("alive"),)),),
    )


def detour_domain() -> PlanningDomain:
    """First plan found is dearer than the cheapest one.

    The sensing route (3 occurrences) is tried before the two-step
    physical route (2 occurrences) because of candidate order, and
    deepening alone cannot tell them apart: both need two steps.
    """
    return PlanningDomain(
        fluents=("f", "q", "g"),
        actions=(
            Action("a_sense", knowledge_props=(KnowledgeProposition("f"),)),
            Action("bigfix", effect_props=(EffectProposition("bigfix_1", pos("g")),), executability=(pos("q"),)),
            Action("fix_f", effect_props=(EffectProposition("fix_f_1", pos("g"), (pos("f"),)),)),
            Action("fix_nf", effect_props=(EffectProposition("fix_nf_1", pos("g"), (neg("f"),)),)),
            Action("mkq", effect_props=(EffectProposition("mkq_1", pos("q")),)),
        ),
        init=(neg("g"), neg("q")),
        goals=(GoalProposition("strong", (pos("g"),)),),
    )


# ---------------------------------------------------------------------------
# find_plan


def test_door_plan_has_the_expected_shape():
    plan = find_plan(door_domain(), max_steps=4, max_branches=1, checks=True)
    assert plan == DOOR_PLAN
    assert count_occurrences(plan) == 3
    assert plan_depth(plan) == 3  # deepening stopped below the 4-step budget


def test_door_plan_replays_cleanly():
    report = verify_plan(door_domain(), DOOR_PLAN, max_steps=4, max_branches=1, checks=True)
    assert report.ok
    assert report.plan_found
    assert report.errors == ()
    assert report.occurrences == 3
    assert report.weak_branches == (0,)
    assert report.strong_failures == ()
    assert report.state is not None and report.state.horizon == 4
    assert soundness_check(report.state).ok


def test_door_plan_without_deepening_fills_the_horizon():
    plan = find_plan(door_domain(), max_steps=4, max_branches=1, deepen=False)
    report = verify_plan(door_domain(), plan, max_steps=4, max_branches=1)
    assert report.ok
    # the fixed-horizon search pads with a second (useless) door push
    assert count_occurrences(plan) == 4


def test_no_plan_when_the_step_budget_is_too_small():
    assert find_plan(door_domain(), max_steps=2, max_branches=1) is None


def test_no_plan_when_branching_is_forbidden():
    assert find_plan(door_domain(), max_steps=4, max_branches=0) is None


def test_trivial_goal_yields_the_empty_plan():
    d = door_domain()
    trivial = dataclasses.replace(d, goals=(GoalProposition("weak", (neg("in_liv"),)),))
    plan = find_plan(trivial, max_steps=2, max_branches=1)
    assert plan == Leaf()
    assert verify_plan(trivial, plan, 2, 1).ok


def test_parallel_root_search_agrees_with_the_serial_result():
    plan = find_plan(door_domain(), max_steps=4, max_branches=1, jobs=2)
    assert plan == DOOR_PLAN


def test_concurrent_shot_while_listening_is_found_and_sound():
    d = yale_goal_domain()
    plan = find_plan(d, max_steps=1, max_branches=1, concurrent=True, checks=True)
    assert plan == Step(("sense_bang", "shoot"), "loaded", None, Leaf(), Leaf())
    report = verify_plan(d, plan, max_steps=1, max_branches=1, checks=True)
    assert report.ok
    # the bang branch learns the gun was loaded and the victim is gone
    assert report.state.knows(pos("loaded"), 0, branch=0)
    assert report.state.knows(neg("alive"), 1, branch=0)
    assert soundness_check(report.state).ok
    # one action per step can never manage this within one step
    assert find_plan(d, max_steps=1, max_branches=1, concurrent=False) is None


# ---------------------------------------------------------------------------
# find_optimal_plan


def test_optimal_search_beats_the_first_found_plan():
    d = detour_domain()
    first = find_plan(d, max_steps=2, max_branches=1)
    assert first == Step(
        ("a_sense",),
        "f",
        None,
        Step(("fix_f",), None, None, Leaf(), None),
        Step(("fix_nf",), None, None, Leaf(), None),
    )
    assert count_occurrences(first) == 3
    best = find_optimal_plan(d, max_steps=2, max_branches=1)
    assert best == Step(
        ("mkq",),
        None,
        None,
        Step(("bigfix",), None, None, Leaf(), None),
        None,
    )
    assert count_occurrences(best) == 2
    assert verify_plan(d, best, 2, 1).ok


def test_optimal_search_on_the_door_domain_matches_the_first_plan():
    best = find_optimal_plan(door_domain(), max_steps=4, max_branches=1)
    assert best == DOOR_PLAN


def test_optimal_search_reports_unsolvable_domains():
    assert find_optimal_plan(door_domain(), max_steps=2, max_branches=1) is None


# ---------------------------------------------------------------------------
# verify_plan diagnostics


def test_replay_rejects_a_plan_that_splits_on_a_known_value():
    d = door_domain()
    opened = dataclasses.replace(d, init=(neg("in_liv"), pos("open")))
    plan = Step(("sense_open",), "open", None, Leaf(), Leaf())
    report = verify_plan(opened, plan, 2, 1)
    assert not report.ok
    assert any("already known" in e for e in report.errors)


def test_replay_rejects_a_plan_missing_the_surprise_continuation():
    plan = Step(
        ("open_door",),
        None,
        None,
        Step(("sense_open",), "open", True, Leaf(), None),
        None,
    )
    report = verify_plan(door_domain(), plan, 3, 1)
    assert any("came out unknown" in e for e in report.errors)


def test_replay_rejects_a_plan_that_overruns_the_step_budget():
    report = verify_plan(door_domain(), DOOR_PLAN, max_steps=2, max_branches=1)
    assert any("continues past" in e for e in report.errors)


def test_replay_rejects_a_plan_with_an_inexecutable_action():
    plan = Step(("drive",), None, None, Leaf(), None)
    report = verify_plan(door_domain(), plan, 2, 1)
    assert any("requires" in e for e in report.errors)


def test_replay_surfaces_goal_failure_without_errors():
    report = verify_plan(door_domain(), Leaf(), 2, 1)
    assert not report.plan_found
    assert report.errors == ()
    assert report.weak_branches == ()


@pytest.mark.parametrize(
    "plan, fragment",
    [
        (Step(("fly",), None, None, Leaf(), None), "unknown action"),
        (Step(("open_door", "open_door"), None, None, Leaf(), None), "repeated action"),
        (Step(("open_door",), "open", None, Leaf(), Leaf()), "is labelled as sensing"),
        (Step(("sense_open",), "in_liv", None, Leaf(), Leaf()), "but is labelled"),
        (Step(("open_door",), None, None, Leaf(), Leaf()), "split without a sensed fluent"),
    ],
)
def test_malformed_plan_shapes_are_reported(plan, fragment):
    report = verify_plan(door_domain(), plan, 3, 1)
    assert not report.ok
    assert any(fragment in e for e in report.errors), report.errors


# ---------------------------------------------------------------------------
# atoms round-trip


def test_door_plan_atoms_are_exactly_the_expected_ones():
    assert extract_atoms(DOOR_PLAN) == sorted(
        [
            "occ(open_door,0,0)",
            "occ(sense_open,1,0)",
            "nextBr(1,0,1)",
            "sRes(open,1,0)",
            "sRes(-open,1,1)",
            "occ(drive,2,0)",
        ]
    )


def test_atoms_round_trip_through_parse():
    d = door_domain()
    assert parse_atoms(d, extract_atoms(DOOR_PLAN)) == DOOR_PLAN


def test_engine_trace_parses_back_to_the_plan():
    d = door_domain()
    report = verify_plan(d, DOOR_PLAN, 3, 1)
    assert report.ok
    assert parse_atoms(d, report.state.all_atoms()) == DOOR_PLAN


def test_idle_gaps_survive_the_round_trip():
    lazy = Step(
        ("open_door",),
        None,
        None,
        Step(
            (),
            None,
            None,
            Step(
                ("sense_open",),
                "open",
                None,
                Step(("drive",), None, None, Leaf(), None),
                Leaf(),
            ),
            None,
        ),
        None,
    )
    d = door_domain()
    assert verify_plan(d, lazy, 4, 1).ok
    assert parse_atoms(d, extract_atoms(lazy)) == lazy


def test_known_value_sensing_round_trips_with_its_outcome():
    d = door_domain()
    opened = dataclasses.replace(d, init=(neg("in_liv"), pos("open")))
    watch = Step(("sense_open",), "open", True, Leaf(), None)
    assert extract_atoms(watch) == sorted(["occ(sense_open,0,0)", "sRes(open,0,0)"])
    assert parse_atoms(opened, extract_atoms(watch)) == watch
    # with the door known shut, the look records no sensing result
    glance = Step(("sense_open",), "open", False, Leaf(), None)
    assert extract_atoms(glance) == ["occ(sense_open,0,0)"]
    assert parse_atoms(d, extract_atoms(glance)) == glance


def test_trailing_idles_are_not_reconstructed():
    idle_only = Step((), None, None, Leaf(), None)
    assert extract_atoms(idle_only) == []
    assert parse_atoms(door_domain(), []) == Leaf()


@pytest.mark.parametrize(
    "atoms, fragment",
    [
        (["nextBr(1,0,1)", "sRes(open,1,0)", "sRes(-open,1,1)"], "without a sensing occurrence"),
        (["occ(sense_open,0,0)", "nextBr(0,0,1)"], "lacks its two sensing results"),
        (["occ(open_door,0,2)"], "never created by a split"),
        (
            [
                "occ(sense_open,0,0)",
                "nextBr(0,0,1)",
                "sRes(open,0,0)",
                "sRes(-open,0,1)",
                "occ(open_door,0,1)",
            ],
            "acts before its split",
        ),
        (["occ(open_door,zero,0)"], "malformed atom"),
        (["what!"], "unreadable atom"),
        (["nextBr(1,0,1)", "nextBr(1,0,2)"], "two splits"),
        (["occ(fly,0,0)"], "unknown action"),
    ],
)
def test_bad_atom_sets_are_rejected(atoms, fragment):
    with pytest.raises(PlanFormatError, match=fragment):
        parse_atoms(door_domain(), atoms)


# ---------------------------------------------------------------------------
# presentation helpers


def test_plan_records_list_every_occurrence_in_order():
    assert plan_records(DOOR_PLAN) == [
        {
            "action": "open_door",
            "step": 0,
            "branch": 0,
            "sensed": None,
            "then_branch": None,
            "else_branch": None,
        },
        {
            "action": "sense_open",
            "step": 1,
            "branch": 0,
            "sensed": "open",
            "then_branch": 0,
            "else_branch": 1,
        },
        {
            "action": "drive",
            "step": 2,
            "branch": 0,
            "sensed": None,
            "then_branch": None,
            "else_branch": None,
        },
    ]


def test_format_plan_draws_the_branching_tree():
    text = format_plan(DOOR_PLAN)
    assert "0: open_door" in text
    assert "1: sense_open" in text
    assert "if open:" in text
    assert "if -open:" in text
    assert "2: drive" in text
    assert "(nothing to do)" in text
