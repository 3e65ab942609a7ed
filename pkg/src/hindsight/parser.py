"""S-expression front end for planning domains.

The dialect, by example::

    (:fluents open ab_open in_liv)            ; optional declaration block
    (:init -in_liv -open (:static adj))       ; literals; :static marks fixed relations
    (oneof armed_1 armed_2)                   ; exactly one holds initially
    (:goal weak in_liv)                       ; or: (:goal strong (and a -b))
    (:action open_door :effect when -ab_open open)
    (:action drive :executable (and open -in_liv) :effect in_liv)
    (:action sense_open :observe open)

Negation is written ``-f``, ``¬f``, or ``(not f)``.  ``;`` starts a
comment.  Undeclared fluents are collected in first-use order.  Parsing
is total: any input produces either a domain or a ParseError carrying a
source position — never a crash.
"""

from __future__ import annotations

from dataclasses import dataclass

from hindsight.model import (
    Action,
    EffectProposition,
    GoalProposition,
    KnowledgeProposition,
    Literal,
    OneofConstraint,
    PlanningDomain,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


# ---------------------------------------------------------------------------
# Lexing and reading


@dataclass(frozen=True)
class _Atom:
    text: str
    span: SourceSpan


@dataclass(frozen=True)
class _List:
    items: tuple
    span: SourceSpan


def _is_symbol_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def _tokenize(text: str) -> list:
    tokens: list = []
    line, col = 1, 1
    i = 0
    n = len(text)

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                advance()
            continue
        if ch.isspace():
            advance()
            continue
        span = SourceSpan(line, col)
        if ch in "()":
            tokens.append(_Atom(ch, span))
            advance()
            continue
        if ch in "-¬":
            advance()
            start = i
            while i < n and _is_symbol_char(text[i]):
                advance()
            if i > start:
                tokens.append(_Atom("-" + text[start:i], span))
            else:
                # standalone sign, e.g. "¬ in_liv"; glue to the next symbol
                tokens.append(_Atom("-", span))
            continue
        if ch == ":":
            advance()
            start = i
            while i < n and _is_symbol_char(text[i]):
                advance()
            if i == start:
                raise ParseError("':' must start a keyword", span)
            tokens.append(_Atom(":" + text[start:i], span))
            continue
        if _is_symbol_char(ch):
            start = i
            while i < n and _is_symbol_char(text[i]):
                advance()
            tokens.append(_Atom(text[start:i], span))
            continue
        raise ParseError(f"unexpected character {ch!r}", span)
    return tokens


def _read_forms(tokens: list) -> list:
    """Group a token stream into nested lists; checks paren balance."""
    forms: list = []
    stack: list = []
    for tok in tokens:
        if tok.text == "(":
            stack.append(([], tok.span))
        elif tok.text == ")":
            if not stack:
                raise ParseError("unbalanced ')'", tok.span)
            items, span = stack.pop()
            node = _List(tuple(items), span)
            if stack:
                stack[-1][0].append(node)
            else:
                forms.append(node)
        else:
            if stack:
                stack[-1][0].append(tok)
            else:
                forms.append(tok)
    if stack:
        raise ParseError("unbalanced '('", stack[-1][1])
    return forms


# ---------------------------------------------------------------------------
# Domain parsing


class _DomainBuilder:
    def __init__(self) -> None:
        self.fluent_order: dict[str, None] = {}
        self.init: list[Literal] = []
        self.oneofs: list[OneofConstraint] = []
        self.goals: list[GoalProposition] = []
        self.actions: list[Action] = []
        self.statics: set[str] = set()

    def touch(self, fluent: str) -> None:
        self.fluent_order.setdefault(fluent, None)


def _symbol(node, what: str) -> _Atom:
    if not isinstance(node, _Atom):
        raise ParseError(f"expected {what}, got a list", node.span)
    return node


def _parse_literal(nodes: list, pos_: int, builder: _DomainBuilder, what: str) -> tuple[Literal, int]:
    """Parse one literal starting at nodes[pos_]; returns (literal, next index)."""
    if pos_ >= len(nodes):
        raise ParseError(f"missing {what}", SourceSpan(1, 1))
    node = nodes[pos_]
    if isinstance(node, _List):
        if len(node.items) == 2 and isinstance(node.items[0], _Atom) and node.items[0].text == "not":
            inner = _symbol(node.items[1], "fluent")
            # (not -f) double negation is rejected rather than simplified
            if inner.text.startswith("-"):
                raise ParseError("negation inside (not ...)", inner.span)
            if not inner.text:
                raise ParseError("empty fluent name", inner.span)
            builder.touch(inner.text)
            return Literal(inner.text, False), pos_ + 1
        raise ParseError(f"expected {what}", node.span)
    text = node.text
    if text == "-":
        # standalone sign produced by "¬ f"; applies to the next symbol
        lit, nxt = _parse_literal(nodes, pos_ + 1, builder, what)
        if not lit.positive:
            raise ParseError("double negation", node.span)
        return Literal(lit.fluent, False), nxt
    if text.startswith("-"):
        name = text[1:]
        if not name:
            raise ParseError("empty fluent name", node.span)
        builder.touch(name)
        return Literal(name, False), pos_ + 1
    builder.touch(text)
    return Literal(text, True), pos_ + 1


def _parse_literal_node(node, builder: _DomainBuilder, what: str) -> Literal:
    lit, nxt = _parse_literal([node], 0, builder, what)
    if nxt != 1:
        raise ParseError(f"malformed {what}", node.span)
    return lit


def _parse_condition(node, builder: _DomainBuilder) -> tuple[Literal, ...]:
    """A condition is either a single literal or (and lit ...)."""
    if isinstance(node, _List) and node.items and isinstance(node.items[0], _Atom) and node.items[0].text == "and":
        lits: list[Literal] = []
        rest = list(node.items[1:])
        i = 0
        while i < len(rest):
            lit, i = _parse_literal(rest, i, builder, "condition literal")
            lits.append(lit)
        return tuple(lits)
    return (_parse_literal_node(node, builder, "condition"),)


_ACTION_KEYWORDS = {":effect", ":observe", ":executable", "executable"}


def _parse_action(form: _List, builder: _DomainBuilder) -> Action:
    items = list(form.items[1:])
    if not items:
        raise ParseError("missing action name", form.span)
    name_atom = _symbol(items[0], "action name")
    name = name_atom.text
    if name.startswith("-") or not name:
        raise ParseError("bad action name", name_atom.span)

    effects: list[EffectProposition] = []
    observes: list[KnowledgeProposition] = []
    executability: list[Literal] = []
    i = 1
    while i < len(items):
        head = items[i]
        key = head.text if isinstance(head, _Atom) else None
        if key in (":executable", "executable"):
            if i + 1 >= len(items):
                raise ParseError("missing executability condition", head.span)
            executability.extend(_parse_condition(items[i + 1], builder))
            i += 2
        elif key == ":observe":
            if i + 1 >= len(items):
                raise ParseError("missing sensed fluent", head.span)
            fl = _symbol(items[i + 1], "sensed fluent")
            if fl.text.startswith("-"):
                raise ParseError("sensed fluent must be unsigned", fl.span)
            if observes:
                raise ParseError("more than one :observe in an action", head.span)
            builder.touch(fl.text)
            observes.append(KnowledgeProposition(fl.text))
            i += 2
        elif key == ":effect":
            i += 1
            saw_item = False
            while i < len(items):
                node = items[i]
                if isinstance(node, _Atom) and node.text in _ACTION_KEYWORDS:
                    break
                if isinstance(node, _Atom) and node.text == "when":
                    if i + 2 >= len(items):
                        raise ParseError("truncated conditional effect", node.span)
                    conds = _parse_condition(items[i + 1], builder)
                    eff = _parse_literal_node(items[i + 2], builder, "effect literal")
                    effects.append(EffectProposition("", eff, conds))
                    i += 3
                elif isinstance(node, _List) and node.items and isinstance(node.items[0], _Atom) and node.items[0].text == "when":
                    if len(node.items) != 3:
                        raise ParseError("conditional effect needs a condition and a literal", node.span)
                    conds = _parse_condition(node.items[1], builder)
                    eff = _parse_literal_node(node.items[2], builder, "effect literal")
                    effects.append(EffectProposition("", eff, conds))
                    i += 1
                else:
                    eff = _parse_literal_node(node, builder, "effect literal")
                    effects.append(EffectProposition("", eff, ()))
                    i += 1
                saw_item = True
            if not saw_item:
                raise ParseError("empty :effect clause", head.span)
        else:
            span = head.span if isinstance(head, (_Atom, _List)) else form.span
            raise ParseError(f"unknown action clause {key or '(...)'!r}", span)

    numbered = tuple(
        EffectProposition(f"{name}_{k}", ep.effect, ep.conditions)
        for k, ep in enumerate(effects, start=1)
    )
    return Action(name, numbered, tuple(observes), tuple(executability))


def parse_domain(text: str) -> PlanningDomain:
    """Parse a domain description; raises ParseError with a source span."""
    try:
        forms = _read_forms(_tokenize(text))
    except ParseError:
        raise
    except RecursionError:
        raise ParseError("input too deeply nested", SourceSpan(1, 1)) from None

    builder = _DomainBuilder()
    declared: list[str] = []
    seen_action_names: dict[str, SourceSpan] = {}

    for form in forms:
        if not isinstance(form, _List):
            raise ParseError(f"unexpected toplevel token {form.text!r}", form.span)
        if not form.items:
            raise ParseError("empty form", form.span)
        head = form.items[0]
        if not isinstance(head, _Atom):
            raise ParseError("form must start with a keyword", form.span)
        key = head.text

        if key == ":fluents":
            for node in form.items[1:]:
                at = _symbol(node, "fluent name")
                if at.text.startswith("-"):
                    raise ParseError("fluent declaration must be unsigned", at.span)
                declared.append(at.text)
                builder.touch(at.text)
        elif key == ":init":
            rest = list(form.items[1:])
            i = 0
            while i < len(rest):
                node = rest[i]
                if isinstance(node, _List) and node.items and isinstance(node.items[0], _Atom) and node.items[0].text == ":static":
                    for sub in node.items[1:]:
                        at = _symbol(sub, "static fluent name")
                        if at.text.startswith("-"):
                            raise ParseError("static declaration must be unsigned", at.span)
                        builder.touch(at.text)
                        builder.statics.add(at.text)
                    i += 1
                else:
                    lit, i = _parse_literal(rest, i, builder, "init literal")
                    builder.init.append(lit)
        elif key == "oneof":
            rest = list(form.items[1:])
            lits: list[Literal] = []
            i = 0
            while i < len(rest):
                lit, i = _parse_literal(rest, i, builder, "oneof literal")
                lits.append(lit)
            builder.oneofs.append(OneofConstraint(tuple(lits)))
        elif key == ":goal":
            if len(form.items) < 3:
                raise ParseError(":goal needs a kind and literals", form.span)
            kind_atom = _symbol(form.items[1], "goal kind")
            if kind_atom.text not in ("weak", "strong"):
                raise ParseError(f"unknown goal kind {kind_atom.text!r}", kind_atom.span)
            rest = list(form.items[2:])
            lits = []
            if len(rest) == 1 and isinstance(rest[0], _List):
                lits = list(_parse_condition(rest[0], builder))
            else:
                i = 0
                while i < len(rest):
                    lit, i = _parse_literal(rest, i, builder, "goal literal")
                    lits.append(lit)
            builder.goals.append(GoalProposition(kind_atom.text, tuple(lits)))
        elif key == ":action":
            action = _parse_action(form, builder)
            if action.name in seen_action_names:
                raise ParseError(f"duplicate action name '{action.name}'", form.span)
            seen_action_names[action.name] = form.span
            builder.actions.append(action)
        else:
            raise ParseError(f"unknown keyword {key!r}", head.span)

    # declared fluents first (in declaration order), then first-use order
    order: dict[str, None] = {}
    for f in declared:
        order.setdefault(f, None)
    for f in builder.fluent_order:
        order.setdefault(f, None)

    return PlanningDomain(
        fluents=tuple(order),
        actions=tuple(builder.actions),
        init=tuple(builder.init),
        oneofs=tuple(builder.oneofs),
        goals=tuple(builder.goals),
        static_fluents=frozenset(builder.statics),
    )


# ---------------------------------------------------------------------------
# Rendering


def _render_literal(lit: Literal) -> str:
    return str(lit)


def _render_condition(lits: tuple[Literal, ...]) -> str:
    if len(lits) == 1:
        return _render_literal(lits[0])
    return "(and " + " ".join(_render_literal(l) for l in lits) + ")"


def render_domain(domain: PlanningDomain) -> str:
    """Render a domain so that parse_domain(render_domain(d)) == d."""
    lines: list[str] = []
    if domain.fluents:
        lines.append("(:fluents " + " ".join(domain.fluents) + ")")
    if domain.init or domain.static_fluents:
        parts = [_render_literal(l) for l in domain.init]
        if domain.static_fluents:
            parts.append("(:static " + " ".join(sorted(domain.static_fluents)) + ")")
        lines.append("(:init " + " ".join(parts) + ")")
    for oo in domain.oneofs:
        lines.append("(oneof " + " ".join(_render_literal(l) for l in oo.literals) + ")")
    for a in domain.actions:
        chunk = f"(:action {a.name}"
        if a.executability:
            chunk += " :executable " + _render_condition(a.executability)
        if a.effect_props:
            rendered = []
            for ep in a.effect_props:
                if ep.conditions:
                    rendered.append(f"(when {_render_condition(ep.conditions)} {_render_literal(ep.effect)})")
                else:
                    rendered.append(_render_literal(ep.effect))
            chunk += " :effect " + " ".join(rendered)
        for kp in a.knowledge_props:
            chunk += f" :observe {kp.fluent}"
        chunk += ")"
        lines.append(chunk)
    for g in domain.goals:
        if len(g.literals) == 1:
            lines.append(f"(:goal {g.kind} {_render_literal(g.literals[0])})")
        else:
            lines.append(f"(:goal {g.kind} (and " + " ".join(_render_literal(l) for l in g.literals) + "))")
    return "\n".join(lines) + ("\n" if lines else "")
