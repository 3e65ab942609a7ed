"""Benchmark domain families: disarming, ring of rooms, diagnosis.

The sources name these domains without fixing the exact propositions,
so each generator documents its encoding here and in the README:

* ``generate_bomb(n)`` — exactly one of n packages holds the bomb
  (an exclusive-or over ``armed_i``; for n=1 plain initial knowledge);
  ``dunk_i`` unconditionally disarms package i; strong goal: every
  package disarmed.  No sensing, so no branching is ever needed.
* ``generate_rings(n)`` — n rooms in a ring, adjacency as static
  relations ``adj_i_j`` (declared only for ring edges, both
  directions, all initially true); ``move_i_j`` along edges,
  ``close_i``/``lock_i`` on the window in the current room (locking
  needs the window known closed), ``sense_window_i`` observes it;
  window states start unknown; strong goal: every window locked.
  Closing unconditionally makes the window closed, so the shortest
  strategy closes and locks room by room and never senses.
* ``generate_sickness(n)`` — exactly one of n diseases; a paper test
  (``dip``) turns test color i on exactly when disease i is present,
  one boolean color per disease for the first n-1 diseases (the last
  disease is the one left over when every color is known off);
  ``sense_color_i`` reads one color; ``medicate_i`` cures but is only
  executable once disease i is known.  Strong goal: cured.  Reading a
  color as on identifies the disease by positive postdiction; reading
  it as off rules the disease out by negative postdiction.

``benchmark_bounds`` gives step/branch budgets that fit the intended
solutions: dunk-all needs n steps; close+lock every room plus n-1
moves needs 3n-1; dip, up to n-1 sensing steps, and one medication
need n+1 steps and n-1 splits.
"""

from __future__ import annotations

from .model import (
    Action,
    EffectProposition,
    GoalProposition,
    KnowledgeProposition,
    OneofConstraint,
    PlanningDomain,
    neg,
    pos,
)

__all__ = [
    "generate_bomb",
    "generate_rings",
    "generate_sickness",
    "benchmark_bounds",
]


def generate_bomb(n: int) -> PlanningDomain:
    """n packages, one armed; dunking disarms; goal: all disarmed."""
    if n < 1:
        raise ValueError(f"bomb needs at least 1 package, got {n}")
    armed = [f"armed_{i}" for i in range(1, n + 1)]
    actions = tuple(
        Action(
            name=f"dunk_{i}",
            effect_props=(EffectProposition(f"dunk_{i}_1", neg(f)),),
        )
        for i, f in enumerate(armed, start=1)
    )
    if n == 1:
        init: tuple = (pos(armed[0]),)
        oneofs: tuple = ()
    else:
        init = ()
        oneofs = (OneofConstraint(tuple(pos(f) for f in armed)),)
    return PlanningDomain(
        fluents=tuple(armed),
        actions=actions,
        init=init,
        oneofs=oneofs,
        goals=(GoalProposition("strong", tuple(neg(f) for f in armed)),),
    )


def generate_rings(n: int) -> PlanningDomain:
    """n rooms in a ring; close and lock every window."""
    if n < 2:
        raise ValueError(f"rings needs at least 2 rooms, got {n}")
    rooms = range(1, n + 1)
    edges: list[tuple[int, int]] = []
    for i in rooms:
        j = i % n + 1
        for pair in ((i, j), (j, i)):
            if pair not in edges:
                edges.append(pair)
    adj = {pair: f"adj_{pair[0]}_{pair[1]}" for pair in edges}
    fluents = (
        [f"pos_{i}" for i in rooms]
        + [f"closed_{i}" for i in rooms]
        + [f"locked_{i}" for i in rooms]
        + [adj[pair] for pair in edges]
    )
    actions: list[Action] = []
    for i, j in edges:
        name = f"move_{i}_{j}"
        actions.append(
            Action(
                name=name,
                effect_props=(
                    EffectProposition(f"{name}_1", neg(f"pos_{i}")),
                    EffectProposition(f"{name}_2", pos(f"pos_{j}")),
                ),
                executability=(pos(f"pos_{i}"), pos(adj[(i, j)])),
            )
        )
    for i in rooms:
        actions.append(
            Action(
                name=f"close_{i}",
                effect_props=(EffectProposition(f"close_{i}_1", pos(f"closed_{i}")),),
                executability=(pos(f"pos_{i}"),),
            )
        )
        actions.append(
            Action(
                name=f"lock_{i}",
                effect_props=(EffectProposition(f"lock_{i}_1", pos(f"locked_{i}")),),
                executability=(pos(f"pos_{i}"), pos(f"closed_{i}")),
            )
        )
        actions.append(
            Action(
                name=f"sense_window_{i}",
                knowledge_props=(KnowledgeProposition(f"closed_{i}"),),
                executability=(pos(f"pos_{i}"),),
            )
        )
    init = (
        [pos("pos_1")]
        + [neg(f"pos_{i}") for i in rooms if i != 1]
        + [pos(adj[pair]) for pair in edges]
    )
    return PlanningDomain(
        fluents=tuple(fluents),
        actions=tuple(actions),
        init=tuple(init),
        goals=(GoalProposition("strong", tuple(pos(f"locked_{i}") for i in rooms)),),
        static_fluents=frozenset(adj.values()),
    )


def generate_sickness(n: int) -> PlanningDomain:
    """One of n diseases; identify it by paper color, then medicate."""
    if n < 2:
        raise ValueError(f"sickness needs at least 2 diseases, got {n}")
    diseases = [f"disease_{i}" for i in range(1, n + 1)]
    colors = [f"color_{i}" for i in range(1, n)]
    dip = Action(
        name="dip",
        effect_props=tuple(
            EffectProposition(f"dip_{i}", pos(colors[i - 1]), (pos(diseases[i - 1]),))
            for i in range(1, n)
        ),
    )
    sensors = tuple(
        Action(
            name=f"sense_color_{i}",
            knowledge_props=(KnowledgeProposition(colors[i - 1]),),
        )
        for i in range(1, n)
    )
    medicates = tuple(
        Action(
            name=f"medicate_{i}",
            effect_props=(
                EffectProposition(f"medicate_{i}_1", pos("cured"), (pos(d),)),
            ),
            executability=(pos(d),),
        )
        for i, d in enumerate(diseases, start=1)
    )
    return PlanningDomain(
        fluents=tuple(diseases + colors + ["cured"]),
        actions=(dip,) + sensors + medicates,
        init=tuple(neg(c) for c in colors) + (neg("cured"),),
        oneofs=(OneofConstraint(tuple(pos(d) for d in diseases)),),
        goals=(GoalProposition("strong", (pos("cured"),)),),
    )


def benchmark_bounds(kind: str, n: int) -> tuple[int, int]:
    """Recommended (max_steps, max_branches) for a benchmark instance."""
    if kind == "bomb":
        return n, 0
    if kind == "rings":
        return 3 * n - 1, 0
    if kind == "sickness":
        return n + 1, n - 1
    raise ValueError(f"unknown benchmark family {kind!r}")
