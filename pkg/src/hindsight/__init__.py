"""Epistemic conditional planner with sensing, branching, and postdiction.

The planner maintains knowledge histories — what is known, at each
evaluation step, about each past step, in each branch of a conditional
plan — and closes them under causation, postdiction, inertia, and
inheritance.  A brute-force possible-worlds oracle provides independent
ground truth for soundness testing.

Layers, bottom up: `model` (domain vocabulary), `parser` (surface
syntax), `oracle` (possible-worlds ground truth), `engine` (knowledge
closure and stepping), `search` (conditional-plan search and
verification), `emitter` (answer-set program rendering), `generators`
(benchmark families), `cli` (command line).
"""

from hindsight.emitter import (
    EmissionError,
    RuleTemplateInstance,
    emit_domain_rules,
    emit_foundational_theory,
    emit_program,
    ground_instance_count,
)
from hindsight.engine import (
    BranchBudgetError,
    ConcurrencyError,
    EngineError,
    EpistemicState,
    ExecutabilityError,
    StepBudgetError,
    initial_state,
)
from hindsight.generators import (
    benchmark_bounds,
    generate_bomb,
    generate_rings,
    generate_sickness,
)
from hindsight.model import (
    Action,
    EffectProposition,
    GoalProposition,
    KnowledgeProposition,
    Literal,
    OneofConstraint,
    PlanningDomain,
    ValidationReport,
    complement,
    neg,
    pos,
    validate_domain,
)
from hindsight.oracle import (
    OracleCapacityError,
    SoundnessReport,
    TraceStep,
    soundness_check,
    tqs_entails,
)
from hindsight.parser import ParseError, parse_domain, render_domain
from hindsight.search import (
    ConditionalPlan,
    Leaf,
    PlanFormatError,
    PlanSearchError,
    Step,
    VerificationReport,
    count_occurrences,
    extract_atoms,
    find_optimal_plan,
    find_plan,
    format_plan,
    parse_atoms,
    plan_records,
    verify_plan,
)

__all__ = [
    "Action",
    "BranchBudgetError",
    "ConcurrencyError",
    "ConditionalPlan",
    "EffectProposition",
    "EmissionError",
    "EngineError",
    "EpistemicState",
    "ExecutabilityError",
    "GoalProposition",
    "KnowledgeProposition",
    "Leaf",
    "Literal",
    "OneofConstraint",
    "OracleCapacityError",
    "ParseError",
    "PlanFormatError",
    "PlanSearchError",
    "PlanningDomain",
    "RuleTemplateInstance",
    "SoundnessReport",
    "Step",
    "StepBudgetError",
    "TraceStep",
    "ValidationReport",
    "VerificationReport",
    "benchmark_bounds",
    "complement",
    "count_occurrences",
    "emit_domain_rules",
    "emit_foundational_theory",
    "emit_program",
    "extract_atoms",
    "find_optimal_plan",
    "find_plan",
    "format_plan",
    "generate_bomb",
    "generate_rings",
    "generate_sickness",
    "ground_instance_count",
    "initial_state",
    "neg",
    "parse_atoms",
    "parse_domain",
    "plan_records",
    "pos",
    "render_domain",
    "soundness_check",
    "tqs_entails",
    "validate_domain",
]

__version__ = "0.1.0"
