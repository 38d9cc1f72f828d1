"""Small expression language for KPI formulas over a graph snapshot.

The language gives a registered KPI something to say beyond the built-in
catalog: set selectors lift the composition queries into expressions,
aggregates fold sets into numbers, and arithmetic combines them. One
variable, ``subject``, is bound implicitly at evaluation time; any other
bare name is a parameter supplied by the caller.

    ratio(count(services_by(subject, process)), count(services(process)))
    avg(relations(subject, trust), weight)
    sum(events(subject), cost)

Grammar (full EBNF in docs/grammar.md):

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | primary
    primary := NUMBER | IDENT "(" [expr ("," expr)*] ")" | IDENT | "(" expr ")"

Undefined results (zero denominators, empty means, selectors that need
live events during anticipation) raise :class:`NotComputable`; the
evaluator never produces NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import (
    ExpressionSyntaxError,
    ExpressionTypeError,
    NotComputable,
    UnknownIdentifierError,
)
from .graph import (
    EntityId,
    EntityKind,
    PartnerNode,
    ProcessNode,
    Relation,
    RelationType,
    ServiceNode,
    SovobeGraph,
    VBENode,
    VONode,
)

# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Union[Literal, Var, BinOp, Neg, Call]


# -- tokenizer -----------------------------------------------------------------

_OPS = set("+-*/(),")


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | one of + - * / ( ) , | "eof"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            tokens.append(_Token("number", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r}", position=i)
    tokens.append(_Token("eof", "", n))
    return tokens


# -- parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def eat(self, kind: str) -> _Token:
        tok = self.cur
        if tok.kind != kind:
            raise ExpressionSyntaxError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}", position=tok.pos
            )
        self.i += 1
        return tok

    def parse(self) -> Expr:
        expr = self.expr()
        if self.cur.kind != "eof":
            raise ExpressionSyntaxError(
                f"trailing input {self.cur.text!r}", position=self.cur.pos
            )
        return expr

    def expr(self) -> Expr:
        node = self.term()
        while self.cur.kind in ("+", "-"):
            op = self.eat(self.cur.kind).kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.cur.kind in ("*", "/"):
            op = self.eat(self.cur.kind).kind
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.cur.kind == "-":
            self.eat("-")
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Expr:
        tok = self.cur
        if tok.kind == "number":
            self.eat("number")
            return Literal(float(tok.text))
        if tok.kind == "(":
            self.eat("(")
            node = self.expr()
            self.eat(")")
            return node
        if tok.kind == "ident":
            self.eat("ident")
            if self.cur.kind == "(":
                self.eat("(")
                args: list[Expr] = []
                if self.cur.kind != ")":
                    args.append(self.expr())
                    while self.cur.kind == ",":
                        self.eat(",")
                        args.append(self.expr())
                self.eat(")")
                return Call(tok.text, tuple(args))
            return Var(tok.text)
        raise ExpressionSyntaxError(
            f"expected a value, found {tok.text or 'end of input'!r}", position=tok.pos
        )


# -- type checking ----------------------------------------------------------
#
# Types: number, entity, entity-set, event-set, relation-set, symbol.
# "set" in a signature accepts any of the three set types; "symbol" demands
# a bare identifier (attribute / outcome / relation-type name). A trailing
# "?" marks the argument optional.

_SIGNATURES: dict[str, tuple[list[str], str]] = {
    "services": (["entity"], "entity-set"),
    "processes": (["entity"], "entity-set"),
    "partners": (["entity"], "entity-set"),
    "vos": (["entity"], "entity-set"),
    "providers": (["entity"], "entity-set"),
    "services_by": (["entity", "entity"], "entity-set"),
    "events": (["entity", "symbol?"], "event-set"),
    "relations": (["entity", "symbol"], "relation-set"),
    "count": (["set"], "number"),
    "sum": (["set", "symbol"], "number"),
    "avg": (["set", "symbol"], "number"),
    "min": (["set", "symbol"], "number"),
    "max": (["set", "symbol"], "number"),
    "ratio": (["number", "number"], "number"),
}

_SET_TYPES = {"entity-set", "event-set", "relation-set"}


def _infer(node: Expr, var_types: dict[str, str]) -> str:
    if isinstance(node, Literal):
        return "number"
    if isinstance(node, Var):
        # Unconstrained variables default to numbers; selector positions
        # constrain them to entities below.
        return var_types.setdefault(node.name, "number")
    if isinstance(node, Neg):
        _expect(node.operand, "number", var_types)
        return "number"
    if isinstance(node, BinOp):
        _expect(node.left, "number", var_types)
        _expect(node.right, "number", var_types)
        return "number"
    assert isinstance(node, Call)
    sig = _SIGNATURES.get(node.func)
    if sig is None:
        raise UnknownIdentifierError(f"unknown function {node.func!r}")
    specs, ret = sig
    required = [s for s in specs if not s.endswith("?")]
    if not (len(required) <= len(node.args) <= len(specs)):
        raise ExpressionTypeError(
            f"{node.func} takes {len(required)}"
            + (f" to {len(specs)}" if len(specs) != len(required) else "")
            + f" arguments, got {len(node.args)}"
        )
    for spec, arg in zip(specs, node.args):
        _expect(arg, spec.rstrip("?"), var_types)
    return ret


def _expect(node: Expr, expected: str, var_types: dict[str, str]) -> None:
    if expected == "symbol":
        if not isinstance(node, Var):
            raise ExpressionTypeError("expected a bare name (attribute or tag)")
        return
    if expected == "entity":
        if not isinstance(node, Var):
            raise ExpressionTypeError("selectors take an entity variable")
        prior = var_types.get(node.name)
        if prior not in (None, "entity"):
            raise ExpressionTypeError(f"variable {node.name!r} used as both entity and number")
        var_types[node.name] = "entity"
        return
    actual = _infer(node, var_types)
    if expected == "set":
        if actual not in _SET_TYPES:
            raise ExpressionTypeError(f"expected a set, got {actual}")
        return
    if actual != expected:
        raise ExpressionTypeError(f"expected {expected}, got {actual}")
    if expected == "number" and isinstance(node, Var) and var_types.get(node.name) == "entity":
        raise ExpressionTypeError(f"variable {node.name!r} used as both entity and number")


def parse(text: str) -> Expr:
    """Parse and type-check; raises syntax-error / type-error with position."""
    ast = _Parser(_tokenize(text)).parse()
    var_types: dict[str, str] = {"subject": "entity"}
    if _infer(ast, var_types) != "number":
        raise ExpressionTypeError("a KPI expression must produce a number")
    return ast


def free_params(node: Expr) -> set[str]:
    """Variables besides ``subject``, bound from the params bag at eval time."""
    out: set[str] = set()
    _collect_vars(node, out)
    out.discard("subject")
    return out


def _collect_vars(node: Expr, out: set[str]) -> None:
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, Neg):
        _collect_vars(node.operand, out)
    elif isinstance(node, BinOp):
        _collect_vars(node.left, out)
        _collect_vars(node.right, out)
    elif isinstance(node, Call):
        sig = _SIGNATURES.get(node.func)
        for i, arg in enumerate(node.args):
            # Symbol positions are tags, not variables.
            if sig and i < len(sig[0]) and sig[0][i].rstrip("?") == "symbol":
                continue
            _collect_vars(arg, out)


# -- evaluation ----------------------------------------------------------------
#
# The context is duck-typed to avoid importing the indicator engine here:
# it must expose .graph (SovobeGraph) and .events_for(entity, outcome) ->
# sequence of CollaborationEvent within the context window/mode.

_ENTITY_ATTRS = {
    "unit_cost": lambda node: getattr(node, "unit_cost", None),
    "declared_response_time": lambda node: getattr(node, "declared_response_time", None),
    "declared_failure_rate": lambda node: getattr(node, "declared_failure_rate", None),
    "contracted_capacity": lambda node: getattr(node, "contracted_capacity", None),
    "maximum_capacity": lambda node: getattr(node, "maximum_capacity", None),
}


def _event_attr(event, attr: str):
    if attr == "cost":
        return event.cost
    if attr == "response_time":
        if event.completed_at is None:
            return None
        return event.completed_at - event.requested_at
    raise UnknownIdentifierError(f"events have no attribute {attr!r}")


def evaluate(expr: Expr, subject: EntityId, ctx, params: Optional[dict] = None) -> float:
    """Evaluate to a finite float; pure relative to (snapshot, context)."""
    value = _eval(expr, ctx, {"subject": subject, **(params or {})})
    if not isinstance(value, (int, float)):
        raise ExpressionTypeError("expression did not produce a number")
    return float(value)


def _resolve_entity(value, graph: SovobeGraph) -> EntityId:
    if isinstance(value, EntityId):
        eid = value
    elif isinstance(value, str):
        eid = EntityId.parse(value)
    else:
        raise ExpressionTypeError(f"expected an entity, got {value!r}")
    graph.entity(eid)  # raises unknown-entity
    return eid


def _eval(node: Expr, ctx, env: dict):
    if isinstance(node, Literal):
        return node.value
    if isinstance(node, Var):
        if node.name not in env:
            raise UnknownIdentifierError(f"unbound variable {node.name!r}")
        return env[node.name]
    if isinstance(node, Neg):
        return -_as_number(_eval(node.operand, ctx, env))
    if isinstance(node, BinOp):
        left = _as_number(_eval(node.left, ctx, env))
        right = _as_number(_eval(node.right, ctx, env))
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if right == 0:
            raise NotComputable("division by zero")
        return left / right
    assert isinstance(node, Call)
    return _eval_call(node, ctx, env)


def _as_number(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ExpressionTypeError(f"expected a number, got {value!r}")
    return float(value)


def _symbol(node: Expr) -> str:
    assert isinstance(node, Var)
    return node.name


def _eval_call(node: Call, ctx, env: dict):
    graph: SovobeGraph = ctx.graph
    name = node.func

    if name in ("services", "processes", "partners", "vos", "providers"):
        eid = _resolve_entity(_eval(node.args[0], ctx, env), graph)
        return _select(name, eid, graph)
    if name == "services_by":
        partner = _resolve_entity(_eval(node.args[0], ctx, env), graph)
        process = _resolve_entity(_eval(node.args[1], ctx, env), graph)
        proc = graph.entity(process)
        if not isinstance(proc, ProcessNode):
            raise SubjectError(f"services_by needs a process, got {process}")
        return frozenset(
            sid
            for sid in proc.services
            if isinstance(graph.entity(sid), ServiceNode)
            and graph.entity(sid).provider == partner
        )
    if name == "events":
        eid = _resolve_entity(_eval(node.args[0], ctx, env), graph)
        outcome = _symbol(node.args[1]) if len(node.args) > 1 else None
        return tuple(ctx.events_for(eid, outcome))
    if name == "relations":
        eid = _resolve_entity(_eval(node.args[0], ctx, env), graph)
        rel_type = RelationType(_symbol(node.args[1]))
        return tuple(graph.inbound_relations(eid, rel_type))
    if name == "count":
        return float(len(_eval(node.args[0], ctx, env)))
    if name in ("sum", "avg", "min", "max"):
        elements = _eval(node.args[0], ctx, env)
        attr = _symbol(node.args[1])
        values = _attr_values(elements, attr, graph)
        if name == "sum":
            return float(sum(values))
        if not values:
            raise NotComputable(f"{name} over an empty value set")
        if name == "avg":
            return sum(values) / len(values)
        return float(min(values) if name == "min" else max(values))
    if name == "ratio":
        numerator = _as_number(_eval(node.args[0], ctx, env))
        denominator = _as_number(_eval(node.args[1], ctx, env))
        if denominator == 0:
            raise NotComputable("ratio with zero denominator")
        return numerator / denominator
    raise UnknownIdentifierError(f"unknown function {name!r}")


class SubjectError(ExpressionTypeError):
    pass


def _select(name: str, eid: EntityId, graph: SovobeGraph) -> frozenset[EntityId]:
    node = graph.entity(eid)
    if name == "services":
        if isinstance(node, ProcessNode):
            return frozenset(node.services)
        if isinstance(node, PartnerNode):
            return frozenset(s.id for s in graph.services() if s.provider == eid)
    elif name == "processes":
        if isinstance(node, VONode):
            return frozenset(node.processes)
        if isinstance(node, PartnerNode):
            provided = {s.id for s in graph.services() if s.provider == eid}
            return frozenset(
                p.id for p in graph.processes() if provided.intersection(p.services)
            )
    elif name == "partners":
        if isinstance(node, VONode):
            return frozenset(node.partners)
        if isinstance(node, VBENode):
            return frozenset(node.partners)
    elif name == "vos":
        if isinstance(node, VBENode):
            return frozenset(node.vos)
    elif name == "providers":
        if isinstance(node, ServiceNode):
            return frozenset({node.provider})
        if isinstance(node, ProcessNode):
            return frozenset(
                graph.entity(sid).provider
                for sid in node.services
                if isinstance(graph.entity(sid), ServiceNode)
            )
    raise SubjectError(f"{name}() is not defined for {eid.kind.value} subjects")


def _attr_values(elements, attr: str, graph: SovobeGraph) -> list[float]:
    """Attribute values present on the elements; missing ones are skipped."""
    values: list[float] = []
    for element in elements:
        if isinstance(element, EntityId):
            getter = _ENTITY_ATTRS.get(attr)
            if getter is None:
                raise UnknownIdentifierError(f"entities have no attribute {attr!r}")
            v = getter(graph.entity(element))
        elif isinstance(element, Relation):
            if attr != "weight":
                raise UnknownIdentifierError(f"relations have no attribute {attr!r}")
            v = element.weight
        else:
            v = _event_attr(element, attr)
        if v is not None:
            values.append(float(v))
    return values
