"""Render a planning domain as a ground-ready answer-set program.

The emitted program has two halves:

* a foundational theory — domain-independent rules for effect
  application, interference, inertia, knowledge propagation, branching
  on sensing, goal verification, and plan generation, with the step and
  branch bounds baked into the text; and
* domain rules — facts and rules compiled from one concrete domain:
  declarations, initial knowledge, effect/sensing wiring, executability
  constraints, causation and postdiction rules, and goal definitions.

Each emitted statement carries a ``template_id`` naming which rule
schema produced it.  Domain templates are named T1..T8b after the role
they play (declarations, initial knowledge, exclusivity closure and
elimination, executability, effect wiring, causation, positive and
negative postdiction, sensing wiring, strong/weak goal definition).
Foundational statements are named F-listing-line-<k> by their position
in the reference listing of the theory; gaps in the numbering are
headings or wrapped continuations in that listing, not missing rules.

Dialect notes (shared with the engine; divergences are deliberate):

* ``knows``/``-knows`` use predicate-level strong negation; fluent
  arguments inside ``hasEff``/``sRes`` use term-level ``-f`` instead.
* The sequential generation rule is a 0..1 choice (idling allowed), so
  shorter-than-horizon plans exist; the minimize statement still drives
  occurrence counts down.
* Interference guards compare positive effects symmetrically; the
  similarity constraint (at most one applied proposition per positive
  effect) keeps the single-blocker postdiction rules sound.

With ``optimize=True``, fluents listed in ``domain.static_fluents``
are compiled to ``holds/1`` facts instead of knowledge atoms, and
executability checks on them test ``holds`` directly — they drop out
of the four-argument knowledge machinery entirely.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    Literal,
    PlanningDomain,
    complement,
    validate_domain,
)

__all__ = [
    "EmissionError",
    "RuleTemplateInstance",
    "emit_foundational_theory",
    "emit_domain_rules",
    "emit_program",
    "ground_instance_count",
]


class EmissionError(Exception):
    """Raised when a domain or bound cannot be rendered as a program."""


@dataclass(frozen=True)
class RuleTemplateInstance:
    """One emitted statement plus the template that produced it."""

    template_id: str
    text: str


def _knows(lit: Literal, t: str, t1: str, br: str) -> str:
    head = "knows" if lit.positive else "-knows"
    return f"{head}({lit.fluent},{t},{t1},{br})"


def _holds(lit: Literal) -> str:
    head = "holds" if lit.positive else "-holds"
    return f"{head}({lit.fluent})"


def _term(lit: Literal) -> str:
    return lit.fluent if lit.positive else f"-{lit.fluent}"


def emit_foundational_theory(
    max_steps: int, max_branches: int, mode: str = "sequential"
) -> list[RuleTemplateInstance]:
    """Domain-independent rules with the bounds baked in.

    ``mode`` picks the plan-generation rule: "sequential" allows at most
    one occurrence per used branch and step, "concurrent" allows any
    set of occurrences (still at most one of them sensing).
    """
    if max_steps < 1:
        raise EmissionError(f"step bound must be at least 1, got {max_steps}")
    if max_branches < 0:
        raise EmissionError(f"branch bound must be at least 0, got {max_branches}")
    if mode not in ("sequential", "concurrent"):
        raise EmissionError(f"unknown mode {mode!r}")
    s = max_steps
    inst = [
        ("F-listing-line-1", f"s(0..{s}). ss(0..{s - 1}). br(0..{max_branches})."),
        ("F-listing-line-3", "apply(EP,T,BR) :- hasEP(A,EP), occ(A,T,BR)."),
        ("F-listing-line-4", "contra(EP1,EP) :- hasPC(EP1,F), hasNC(EP,F)."),
        (
            "F-listing-line-5",
            ":- 2 { apply(EP,T,BR) : hasEff(EP,F) }, br(BR), s(T), fluent(F).",
        ),
        (
            "F-listing-line-6",
            ":- apply(EP,T,BR), hasEff(EP,F), apply(EP1,T,BR), hasEff(EP1,-F), "
            "EP != EP1, not contra(EP1,EP), fluent(F).",
        ),
        ("F-listing-line-9", "initApp(F,T,BR) :- apply(EP,T,BR), hasEff(EP,F)."),
        (
            "F-listing-line-10",
            "kNotInit(F,T,T1,BR) :- not initApp(F,T,BR), uBr(T1,BR), s(T), fluent(F).",
        ),
        (
            "F-listing-line-10",
            "kNotTerm(F,T,T1,BR) :- not initApp(-F,T,BR), uBr(T1,BR), s(T), fluent(F).",
        ),
        (
            "F-listing-line-11",
            "kNotInit(F,T,T1,BR) :- apply(EP,T,BR), hasPC(EP,F1), hasEff(EP,F), "
            "-knows(F1,T,T1,BR), T1 >= T, fluent(F).",
        ),
        (
            "F-listing-line-11",
            "kNotInit(F,T,T1,BR) :- apply(EP,T,BR), hasNC(EP,F1), hasEff(EP,F), "
            "knows(F1,T,T1,BR), T1 >= T, fluent(F).",
        ),
        (
            "F-listing-line-11",
            "kNotTerm(F,T,T1,BR) :- apply(EP,T,BR), hasPC(EP,F1), hasEff(EP,-F), "
            "-knows(F1,T,T1,BR), T1 >= T.",
        ),
        (
            "F-listing-line-11",
            "kNotTerm(F,T,T1,BR) :- apply(EP,T,BR), hasNC(EP,F1), hasEff(EP,-F), "
            "knows(F1,T,T1,BR), T1 >= T.",
        ),
        (
            "F-listing-line-13",
            "knows(F,T+1,T1,BR) :- knows(F,T,T1,BR), kNotTerm(F,T,T1,BR), T < T1, s(T).",
        ),
        (
            "F-listing-line-13",
            "-knows(F,T+1,T1,BR) :- -knows(F,T,T1,BR), kNotInit(F,T,T1,BR), T < T1, s(T).",
        ),
        (
            "F-listing-line-14",
            "knows(F,T-1,T1,BR) :- knows(F,T,T1,BR), kNotInit(F,T-1,T1,BR), T > 0, "
            "T1 >= T, s(T).",
        ),
        (
            "F-listing-line-14",
            "-knows(F,T-1,T1,BR) :- -knows(F,T,T1,BR), kNotTerm(F,T-1,T1,BR), T > 0, "
            "T1 >= T, s(T).",
        ),
        (
            "F-listing-line-16",
            f"knows(F,T,T1+1,BR) :- knows(F,T,T1,BR), T1 < {s}, s(T1).",
        ),
        (
            "F-listing-line-16",
            f"-knows(F,T,T1+1,BR) :- -knows(F,T,T1,BR), T1 < {s}, s(T1).",
        ),
        ("F-listing-line-17", "uBr(0,0)."),
        ("F-listing-line-17", "uBr(T+1,BR) :- uBr(T,BR), s(T)."),
        ("F-listing-line-18", "kw(F,T,T1,BR) :- knows(F,T,T1,BR)."),
        ("F-listing-line-19", "kw(F,T,T1,BR) :- -knows(F,T,T1,BR)."),
        ("F-listing-line-20", "sOcc(T,BR) :- occ(A,T,BR), hasKP(A,_)."),
        ("F-listing-line-21", "leq(BR,BR1) :- BR <= BR1, br(BR), br(BR1)."),
        ("F-listing-line-22", "1 { nextBr(T,BR,BR1) : leq(BR,BR1) } 1 :- sOcc(T,BR)."),
        ("F-listing-line-23", ":- 2 { nextBr(T,BR,BR1) : br(BR), s(T) }, br(BR1)."),
        ("F-listing-line-24", "uBr(T+1,BR) :- sRes(-F,T,BR)."),
        (
            "F-listing-line-25",
            "sRes(F,T,BR) :- occ(A,T,BR), hasKP(A,F), not -knows(F,T,T,BR).",
        ),
        (
            "F-listing-line-27",
            "sRes(-F,T,BR1) :- occ(A,T,BR), hasKP(A,F), not kw(F,T,T,BR), "
            "nextBr(T,BR,BR1).",
        ),
        ("F-listing-line-29", "knows(F,T,T+1,BR) :- sRes(F,T,BR), fluent(F)."),
        ("F-listing-line-29", "-knows(F,T,T+1,BR) :- sRes(-F,T,BR)."),
        (
            "F-listing-line-30",
            "knows(F,T,T1,BR1) :- sOcc(T1,BR), nextBr(T1,BR,BR1), knows(F,T,T1,BR), "
            "T1 >= T.",
        ),
        (
            "F-listing-line-30",
            "-knows(F,T,T1,BR1) :- sOcc(T1,BR), nextBr(T1,BR,BR1), -knows(F,T,T1,BR), "
            "T1 >= T.",
        ),
        (
            "F-listing-line-31",
            "apply(EP,T,BR1) :- sOcc(T1,BR), nextBr(T1,BR,BR1), uBr(T1,BR), "
            "apply(EP,T,BR), T1 >= T.",
        ),
        ("F-listing-line-33", ":- 2 { occ(A,T,BR) : hasKP(A,_) }, br(BR), s(T)."),
        ("F-listing-line-34", f"allWGsAchieved :- uBr({s},BR), wGoal({s},BR)."),
        ("F-listing-line-35", f"notAllSGAchieved :- uBr({s},BR), not sGoal({s},BR)."),
        ("F-listing-line-36", "planFound :- allWGsAchieved, not notAllSGAchieved."),
        ("F-listing-line-37", ":- not planFound."),
        ("F-listing-line-38", "notGoal(T,BR) :- not wGoal(T,BR), uBr(T,BR)."),
        ("F-listing-line-38", "notGoal(T,BR) :- not sGoal(T,BR), uBr(T,BR)."),
    ]
    if mode == "sequential":
        inst.append(
            (
                "F-listing-line-39",
                "% idling allowed: zero or one occurrence per used branch and step\n"
                "0 { occ(A,T,BR) : action(A) } 1 :- uBr(T,BR), notGoal(T,BR), "
                "br(BR), ss(T).",
            )
        )
    else:
        inst.append(
            (
                "F-listing-line-40",
                "{ occ(A,T,BR) : action(A) } :- uBr(T,BR), notGoal(T,BR), "
                "br(BR), ss(T).",
            )
        )
    inst.append(("F-listing-line-41", "#minimize { 1@1,A,T,BR : occ(A,T,BR) }."))
    return [RuleTemplateInstance(tid, text) for tid, text in inst]


def emit_domain_rules(
    domain: PlanningDomain, optimize: bool = False
) -> list[RuleTemplateInstance]:
    """Facts and rules compiled from one domain, grouped and sorted.

    Fact groups come first (T1 declarations, T2 initial knowledge,
    T5 effect wiring, T7 sensing wiring), then rule groups (T3a/T3b
    exclusivity, T4 executability, T6a causation, T6b/T6c postdiction,
    T8a/T8b goals); statements are sorted lexically within each group.
    """
    report = validate_domain(domain)
    if not report.ok:
        raise EmissionError(
            "cannot emit an invalid domain: " + "; ".join(report.violations)
        )
    statics = domain.static_fluents if optimize else frozenset()
    if optimize:
        for a in domain.actions:
            for ep in a.effect_props:
                for c in ep.conditions:
                    if c.fluent in statics:
                        raise EmissionError(
                            f"static fluent '{c.fluent}' conditions effect "
                            f"'{ep.id}'; statics may appear only in "
                            "executability when optimize is on"
                        )

    groups: dict[str, list[str]] = {
        tid: []
        for tid in ("T1", "T2", "T5", "T7", "T3a", "T3b", "T4", "T6a", "T6b", "T6c")
    }

    for f in domain.fluents:
        if f not in statics:
            groups["T1"].append(f"fluent({f}).")
    for a in domain.actions:
        groups["T1"].append(f"action({a.name}).")

    for lit in domain.init:
        if lit.fluent in statics:
            groups["T2"].append(f"{_holds(lit)}.")
        else:
            groups["T2"].append(f"{_knows(lit, '0', '0', '0')}.")

    for a in domain.actions:
        for ep in a.effect_props:
            groups["T5"].append(f"hasEP({a.name},{ep.id}).")
            groups["T5"].append(f"hasEff({ep.id},{_term(ep.effect)}).")
            for c in ep.conditions:
                rel = "hasPC" if c.positive else "hasNC"
                groups["T5"].append(f"{rel}({ep.id},{c.fluent}).")
        for kp in a.knowledge_props:
            groups["T7"].append(f"hasKP({a.name},{kp.fluent}).")

    for oo in domain.oneofs:
        for i, lit in enumerate(oo.literals):
            others = [o for j, o in enumerate(oo.literals) if j != i]
            body = ", ".join(
                _knows(complement(o), "0", "T", "BR") for o in others
            )
            groups["T3a"].append(
                f"{_knows(lit, '0', 'T', 'BR')} :- {body}, s(T), br(BR)."
            )
            for o in others:
                groups["T3b"].append(
                    f"{_knows(complement(o), '0', 'T', 'BR')} :- "
                    f"{_knows(lit, '0', 'T', 'BR')}, s(T), br(BR)."
                )

    for a in domain.actions:
        for lit in a.executability:
            if lit.fluent in statics:
                guard = f"not {_holds(lit)}"
            else:
                guard = f"not {_knows(lit, 'T', 'T', 'BR')}"
            groups["T4"].append(f":- occ({a.name},T,BR), {guard}.")

    for a in domain.actions:
        for ep in a.effect_props:
            body = [f"apply({ep.id},T,BR)", "T1 > T"]
            body += [_knows(c, "T", "T1", "BR") for c in ep.conditions]
            body.append("s(T1)")
            groups["T6a"].append(
                f"{_knows(ep.effect, 'T+1', 'T1', 'BR')} :- {', '.join(body)}."
            )
            for c in ep.conditions:
                groups["T6b"].append(
                    f"{_knows(c, 'T', 'T1', 'BR')} :- apply({ep.id},T,BR), "
                    f"{_knows(ep.effect, 'T+1', 'T1', 'BR')}, "
                    f"{_knows(complement(ep.effect), 'T', 'T1', 'BR')}."
                )
            for i, c in enumerate(ep.conditions):
                body = [
                    f"apply({ep.id},T,BR)",
                    _knows(complement(ep.effect), "T+1", "T1", "BR"),
                ]
                body += [
                    _knows(o, "T", "T1", "BR")
                    for j, o in enumerate(ep.conditions)
                    if j != i
                ]
                groups["T6c"].append(
                    f"{_knows(complement(c), 'T', 'T1', 'BR')} :- {', '.join(body)}."
                )

    out = [
        RuleTemplateInstance(tid, text)
        for tid in ("T1", "T2", "T5", "T7")
        for text in sorted(groups[tid])
    ]
    out += [
        RuleTemplateInstance(tid, text)
        for tid in ("T3a", "T3b", "T4", "T6a", "T6b", "T6c")
        for text in sorted(groups[tid])
    ]
    for tid, kind in (("T8a", "strong"), ("T8b", "weak")):
        name = "sGoal" if kind == "strong" else "wGoal"
        body = [_knows(lit, "T", "T", "BR") for lit in domain.goal_literals(kind)]
        body += ["s(T)", "br(BR)"]
        out.append(
            RuleTemplateInstance(tid, f"{name}(T,BR) :- {', '.join(body)}.")
        )
    return out


def emit_program(
    domain: PlanningDomain,
    max_steps: int,
    max_branches: int,
    mode: str = "sequential",
    optimize: bool = False,
) -> str:
    """Complete program text: foundational theory, then domain rules.

    One statement per line; a ``%`` comment announces each run of
    statements sharing a template id.
    """
    instances = emit_foundational_theory(max_steps, max_branches, mode)
    instances += emit_domain_rules(domain, optimize=optimize)
    lines: list[str] = []
    previous = None
    for inst in instances:
        if inst.template_id != previous:
            lines.append(f"% {inst.template_id}")
            previous = inst.template_id
        lines.append(inst.text)
    return "\n".join(lines) + "\n"


# Per-statement grounding estimate.  Time and branch variables range over
# their full sorts.  Variables that a grounder would bind by joining the
# effect-description fact tables (hasEff / hasPC / hasNC) are counted by
# enumerating that join rather than the full sort product, which is how a
# grounder instantiates a rule bottom-up from its facts: an effect's fluent
# is determined by its proposition, so it never multiplies the count by the
# whole fluent sort.  Comparisons, inequalities, and negated literals never
# shrink the estimate, so it stays an upper bound on the true instance count.
_VARIABLE_PATTERN = re.compile(r"\b(T1|BR1|F1|EP1|T|BR|F|EP|A)\b")
_FACT_LITERAL_PATTERN = re.compile(r"(?<!not )\b(hasEff|hasPC|hasNC)\((EP1?),(-?)(F1?)\)")


def _effect_fact_tables(domain: PlanningDomain) -> dict[str, list[tuple[int, Literal]]]:
    tables: dict[str, list[tuple[int, Literal]]] = {
        "hasEff": [],
        "hasPC": [],
        "hasNC": [],
    }
    for index, ep in enumerate(
        ep for a in domain.actions for ep in a.effect_props
    ):
        tables["hasEff"].append((index, ep.effect))
        for cond in ep.conditions:
            key = "hasPC" if cond.positive else "hasNC"
            row = (index, Literal(cond.fluent, True))  # bare term; sign is the table
            if row not in tables[key]:
                tables[key].append(row)
    return tables


def _fact_join_size(
    fact_literals: list[tuple[str, str, str, str]],
    tables: dict[str, list[tuple[int, Literal]]],
) -> tuple[int, set[str]]:
    """Rows in the natural join of the statement's fact literals.

    Returns the row count and the set of variables the join binds.
    """
    bound: set[str] = set()
    rows: list[dict[str, object]] = [{}]
    for table_name, ep_var, sign, f_var in fact_literals:
        bound.update((ep_var, f_var))
        extended: list[dict[str, object]] = []
        for partial in rows:
            for ep_index, lit in tables[table_name]:
                if lit.positive == (sign == "-"):
                    continue  # hasEff(EP,-F) only matches negative effects
                if partial.get(ep_var, ep_index) != ep_index:
                    continue
                if partial.get(f_var, lit.fluent) != lit.fluent:
                    continue
                extended.append({**partial, ep_var: ep_index, f_var: lit.fluent})
        rows = extended
    return len(rows), bound


def ground_instance_count(
    instances: list[RuleTemplateInstance],
    domain: PlanningDomain,
    max_steps: int,
    max_branches: int,
) -> int:
    """Closed-form count of ground instances of the statements."""
    n_eps = sum(len(a.effect_props) for a in domain.actions)
    ranges = {
        "T": max_steps + 1,
        "T1": max_steps + 1,
        "BR": max_branches + 1,
        "BR1": max_branches + 1,
        "F": len(domain.fluents),
        "F1": len(domain.fluents),
        "A": len(domain.actions),
        "EP": n_eps,
        "EP1": n_eps,
    }
    tables = _effect_fact_tables(domain)
    total = 0
    for inst in instances:
        statement = " ".join(
            ln for ln in inst.text.split("\n") if not ln.lstrip().startswith("%")
        )
        fact_literals = _FACT_LITERAL_PATTERN.findall(statement)
        count, bound = _fact_join_size(fact_literals, tables)
        for v in set(_VARIABLE_PATTERN.findall(statement)) - bound:
            count *= ranges[v]
        total += count
    return total
