"""Multi-agent influence diagrams with finite domains and tabular CPDs.

A :class:`Maid` is an immutable DAG of chance, decision and utility nodes.
Assigning decision rules through :func:`induce` turns decisions into chance
nodes; once every decision is assigned the diagram is a Bayesian network and
:func:`joint_distribution` enumerates it exactly.

Tables are stored flat and row-major over the declared parent order, the
last parent varying fastest.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Hashable

from .errors import (
    CptRowNotNormalized,
    CycleDetected,
    InvalidNode,
    MissingCptRow,
    ParseError,
    PartialProfile,
    RuleDomainMismatch,
    UnassignedDecision,
    UnknownAgent,
    UnknownParent,
    UtilityHasChild,
)

CHANCE = "chance"
DECISION = "decision"
UTILITY = "utility"
KINDS = (CHANCE, DECISION, UTILITY)

# Value a pre-decision node emits when it leaves the committed decision free.
PASS = "<pass>"

ROW_TOL = 1e-12
PROB_TOL = 1e-9

Value = Hashable


@dataclass(frozen=True)
class NodeDecl:
    """Declaration of a single node.

    ``owners`` holds exactly one agent for a decision. A utility node may be
    shared by several agents (team rewards) or by none, in which case it is
    an aggregate that counts towards the total utility only. ``commit`` names
    a parent of a decision whose non-:data:`PASS` values pin the action.
    """

    id: str
    kind: str
    parents: tuple[str, ...] = ()
    domain: tuple[Value, ...] = ()
    table: tuple[float, ...] = ()
    owners: tuple[str, ...] = ()
    guidance: bool = False
    commit: str | None = None

    @property
    def owner(self) -> str | None:
        return self.owners[0] if len(self.owners) == 1 else None


class Maid:
    """Validated, immutable multi-agent influence diagram."""

    def __init__(self, agents: Iterable[str], nodes: Iterable[NodeDecl]):
        self.agents: tuple[str, ...] = tuple(agents)
        decls = tuple(nodes)
        self._nodes: dict[str, NodeDecl] = {}
        for decl in decls:
            if decl.id in self._nodes:
                raise InvalidNode(f"duplicate node id {decl.id!r}")
            self._nodes[decl.id] = decl
        self.order: tuple[str, ...] = tuple(d.id for d in decls)
        self._position = {n: i for i, n in enumerate(self.order)}
        self._children: dict[str, list[str]] = {n: [] for n in self.order}
        self._validate_structure()
        self.topological_order: tuple[str, ...] = self._toposort()
        self._validate_tables()
        self._hash: int | None = None

    # -- validation -------------------------------------------------------

    def _validate_structure(self) -> None:
        if len(set(self.agents)) != len(self.agents):
            raise InvalidNode("duplicate agent ids")
        for decl in self._nodes.values():
            if decl.kind not in KINDS:
                raise InvalidNode(f"{decl.id}: unknown kind {decl.kind!r}")
            if len(set(decl.parents)) != len(decl.parents):
                raise InvalidNode(f"{decl.id}: repeated parent")
            for p in decl.parents:
                if p not in self._nodes:
                    raise UnknownParent(f"{decl.id}: unknown parent {p!r}")
                if self._nodes[p].kind == UTILITY:
                    raise UtilityHasChild(f"utility node {p!r} is a parent of {decl.id!r}")
                self._children[p].append(decl.id)
            for a in decl.owners:
                if a not in self.agents:
                    raise UnknownAgent(f"{decl.id}: unknown agent {a!r}")
            if decl.kind == DECISION and len(decl.owners) != 1:
                raise InvalidNode(f"decision {decl.id!r} must have exactly one owner")
            if decl.kind == CHANCE and decl.owners:
                raise InvalidNode(f"chance node {decl.id!r} cannot be owned")
            if decl.kind != UTILITY:
                if not decl.domain:
                    raise InvalidNode(f"{decl.id}: empty domain")
                if len(set(decl.domain)) != len(decl.domain):
                    raise InvalidNode(f"{decl.id}: repeated domain value")
            if decl.guidance and decl.kind != CHANCE:
                raise InvalidNode(f"{decl.id}: only chance nodes can be guidance signals")
            if decl.commit is not None:
                if decl.kind != DECISION or decl.commit not in decl.parents:
                    raise InvalidNode(f"{decl.id}: commit must name a parent of a decision")

    def _toposort(self) -> tuple[str, ...]:
        # Kahn's algorithm, ties resolved by declaration order.
        indegree = {n: len(self._nodes[n].parents) for n in self.order}
        ready = [n for n in self.order if indegree[n] == 0]
        out: list[str] = []
        while ready:
            ready.sort(key=self._position.__getitem__)
            n = ready.pop(0)
            out.append(n)
            for c in self._children[n]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    ready.append(c)
        if len(out) != len(self.order):
            stuck = sorted(set(self.order) - set(out), key=self._position.__getitem__)
            raise CycleDetected(f"cycle through {stuck}")
        return tuple(out)

    def _validate_tables(self) -> None:
        for decl in self._nodes.values():
            rows = self.num_rows(decl.id)
            if decl.kind == DECISION:
                if decl.table:
                    raise InvalidNode(f"decision {decl.id!r} cannot carry a table")
                continue
            width = 1 if decl.kind == UTILITY else len(decl.domain)
            if len(decl.table) != rows * width:
                raise MissingCptRow(
                    f"{decl.id}: expected {rows * width} table entries, got {len(decl.table)}"
                )
            if decl.kind == UTILITY:
                for v in decl.table:
                    if not math.isfinite(v):
                        raise InvalidNode(f"{decl.id}: non-finite utility {v!r}")
                continue
            for r in range(rows):
                row = decl.table[r * width:(r + 1) * width]
                if any(not (0.0 <= p <= 1.0) for p in row):
                    raise CptRowNotNormalized(f"{decl.id}: row {r} has entries outside [0, 1]")
                if abs(math.fsum(row) - 1.0) > ROW_TOL:
                    raise CptRowNotNormalized(f"{decl.id}: row {r} sums to {math.fsum(row)!r}")

    # -- accessors --------------------------------------------------------

    def __getitem__(self, node: str) -> NodeDecl:
        return self._nodes[node]

    def __contains__(self, node: object) -> bool:
        return node in self._nodes

    def __iter__(self) -> Iterator[NodeDecl]:
        return (self._nodes[n] for n in self.order)

    def __len__(self) -> int:
        return len(self.order)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Maid):
            return NotImplemented
        return self.agents == other.agents and list(self) == list(other)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.agents, tuple(self)))
        return self._hash

    def __repr__(self) -> str:
        return (f"Maid(agents={list(self.agents)}, chance={len(self.chance_nodes)}, "
                f"decision={len(self.decisions)}, utility={len(self.utilities)})")

    @property
    def decisions(self) -> tuple[str, ...]:
        return tuple(n for n in self.order if self._nodes[n].kind == DECISION)

    @property
    def chance_nodes(self) -> tuple[str, ...]:
        return tuple(n for n in self.order if self._nodes[n].kind == CHANCE)

    @property
    def utilities(self) -> tuple[str, ...]:
        return tuple(n for n in self.order if self._nodes[n].kind == UTILITY)

    @property
    def guidance_nodes(self) -> tuple[str, ...]:
        return tuple(n for n in self.order if self._nodes[n].guidance)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple((p, n) for n in self.order for p in self._nodes[n].parents)

    def position(self, node: str) -> int:
        return self._position[node]

    def parents(self, node: str) -> tuple[str, ...]:
        return self._nodes[node].parents

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(self._children[node])

    def descendants(self, node: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self._children[node])
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(self._children[n])
        return seen

    def ancestors(self, node: str) -> set[str]:
        seen: set[str] = set()
        stack = list(self._nodes[node].parents)
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(self._nodes[n].parents)
        return seen

    def domain(self, node: str) -> tuple[Value, ...]:
        decl = self._nodes[node]
        if decl.kind == UTILITY:
            return tuple(sorted(set(decl.table)))
        return decl.domain

    def decisions_of(self, agent: str) -> tuple[str, ...]:
        if agent not in self.agents:
            raise UnknownAgent(agent)
        return tuple(d for d in self.decisions if self._nodes[d].owners == (agent,))

    def utilities_of(self, agent: str) -> tuple[str, ...]:
        if agent not in self.agents:
            raise UnknownAgent(agent)
        return tuple(u for u in self.utilities if agent in self._nodes[u].owners)

    def num_rows(self, node: str) -> int:
        return math.prod(len(self._nodes[p].domain) for p in self._nodes[node].parents)

    def parent_instantiations(self, node: str) -> list[tuple[Value, ...]]:
        """Parent value tuples in row order."""
        return list(itertools.product(*(self._nodes[p].domain for p in self._nodes[node].parents)))

    def row_index(self, node: str, assignment: Mapping[str, Value]) -> int:
        idx = 0
        for p in self._nodes[node].parents:
            dom = self._nodes[p].domain
            idx = idx * len(dom) + dom.index(assignment[p])
        return idx

    def cpd_row(self, node: str, row: int) -> tuple[float, ...]:
        decl = self._nodes[node]
        if decl.kind != CHANCE:
            raise InvalidNode(f"{node} is not a chance node")
        w = len(decl.domain)
        return decl.table[row * w:(row + 1) * w]

    def utility_value(self, node: str, row: int) -> float:
        return self._nodes[node].table[row]

    def replace_nodes(self, nodes: Iterable[NodeDecl], agents: Iterable[str] | None = None) -> Maid:
        """Return a new diagram with the given declarations (validated afresh)."""
        return Maid(self.agents if agents is None else agents, nodes)

    def digest(self) -> str:
        """Content hash of the canonical serialization."""
        import hashlib

        return hashlib.sha256(dumps_maid(self).encode()).hexdigest()


# -- strategies ---------------------------------------------------------------

@dataclass(frozen=True)
class DecisionRule:
    """Conditional distribution over a decision's domain for each parent row."""

    decision: str
    table: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        for r, row in enumerate(self.table):
            if any(not (0.0 <= p <= 1.0) for p in row) or abs(math.fsum(row) - 1.0) > ROW_TOL:
                raise CptRowNotNormalized(f"rule for {self.decision}: row {r} is not a distribution")

    @classmethod
    def deterministic(cls, maid: Maid, decision: str,
                      choice: Value | Sequence[Value] | Callable[[dict[str, Value]], Value]) -> DecisionRule:
        """Pure rule: one action for every row, one action per row, or a function of the parents."""
        decl = _decision_decl(maid, decision)
        rows = maid.parent_instantiations(decision)
        if callable(choice):
            actions = [choice(dict(zip(decl.parents, pa))) for pa in rows]
        elif isinstance(choice, (list, tuple)) and len(choice) == len(rows) and not (
                choice in decl.domain):
            actions = list(choice)
        else:
            actions = [choice] * len(rows)
        table = []
        for a in actions:
            if a not in decl.domain:
                raise RuleDomainMismatch(f"{a!r} is not in dom({decision})")
            table.append(tuple(1.0 if v == a else 0.0 for v in decl.domain))
        return cls(decision, tuple(table))

    @classmethod
    def uniform(cls, maid: Maid, decision: str) -> DecisionRule:
        decl = _decision_decl(maid, decision)
        k = len(decl.domain)
        return cls(decision, tuple((1.0 / k,) * k for _ in range(maid.num_rows(decision))))

    @property
    def is_deterministic(self) -> bool:
        return all(max(row) == 1.0 for row in self.table)

    def actions(self, maid: Maid) -> list[Value]:
        """Most likely action per row (the action itself for pure rules)."""
        dom = maid[self.decision].domain
        return [dom[max(range(len(row)), key=row.__getitem__)] for row in self.table]


def _decision_decl(maid: Maid, decision: str) -> NodeDecl:
    if decision not in maid or maid[decision].kind != DECISION:
        raise RuleDomainMismatch(f"{decision!r} is not a decision node")
    return maid[decision]


class StrategyProfile(Mapping[str, DecisionRule]):
    """Immutable assignment of decision rules to decision nodes."""

    __slots__ = ("_rules", "_hash")

    def __init__(self, rules: Mapping[str, DecisionRule] | Iterable[DecisionRule] = ()):
        if isinstance(rules, Mapping):
            items = dict(rules)
        else:
            items = {r.decision: r for r in rules}
        for k, r in items.items():
            if r.decision != k:
                raise RuleDomainMismatch(f"rule for {r.decision!r} stored under {k!r}")
        self._rules = items
        self._hash: int | None = None

    def __getitem__(self, key: str) -> DecisionRule:
        return self._rules[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._rules)

    def __len__(self) -> int:
        return len(self._rules)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._rules.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, StrategyProfile):
            return self._rules == other._rules
        return NotImplemented

    def __repr__(self) -> str:
        return f"StrategyProfile({sorted(self._rules)})"

    def merged(self, other: Mapping[str, DecisionRule] | Iterable[DecisionRule]) -> StrategyProfile:
        extra = other if isinstance(other, Mapping) else {r.decision: r for r in other}
        return StrategyProfile({**self._rules, **extra})

    def restricted(self, keys: Iterable[str]) -> StrategyProfile:
        keys = set(keys)
        return StrategyProfile({k: v for k, v in self._rules.items() if k in keys})

    def without(self, keys: Iterable[str]) -> StrategyProfile:
        keys = set(keys)
        return StrategyProfile({k: v for k, v in self._rules.items() if k not in keys})

    def is_full(self, maid: Maid) -> bool:
        return set(maid.decisions) <= set(self._rules)


# -- induced diagrams and inference -------------------------------------------

def induce(maid: Maid, profile: Mapping[str, DecisionRule]) -> Maid:
    """Replace every assigned decision by a chance node carrying its rule."""
    new_nodes = []
    for decl in maid:
        rule = profile.get(decl.id)
        if rule is None:
            new_nodes.append(decl)
            continue
        if decl.kind != DECISION:
            raise RuleDomainMismatch(f"{decl.id!r} is not a decision node")
        rows = maid.num_rows(decl.id)
        width = len(decl.domain)
        if len(rule.table) != rows or any(len(r) != width for r in rule.table):
            raise RuleDomainMismatch(
                f"rule for {decl.id} has shape {len(rule.table)}x? but node needs {rows}x{width}")
        table = [list(r) for r in rule.table]
        if decl.commit is not None:
            _pin_committed_rows(maid, decl, table)
        flat = tuple(p for row in table for p in row)
        new_nodes.append(NodeDecl(decl.id, CHANCE, decl.parents, decl.domain, flat))
    for d in profile:
        if d not in maid:
            raise RuleDomainMismatch(f"profile assigns unknown node {d!r}")
    return Maid(maid.agents, new_nodes)


def _pin_committed_rows(maid: Maid, decl: NodeDecl, table: list[list[float]]) -> None:
    k = decl.parents.index(decl.commit)
    for r, pa in enumerate(maid.parent_instantiations(decl.id)):
        v = pa[k]
        if v != PASS and v in decl.domain:
            table[r] = [1.0 if x == v else 0.0 for x in decl.domain]


def committed_rows(maid: Maid, decision: str) -> list[int | None]:
    """For each row, the pinned action index or ``None`` when the agent is free."""
    decl = maid[decision]
    rows = maid.parent_instantiations(decision)
    if decl.commit is None:
        return [None] * len(rows)
    k = decl.parents.index(decl.commit)
    return [decl.domain.index(pa[k]) if pa[k] != PASS and pa[k] in decl.domain else None
            for pa in rows]


@dataclass(frozen=True)
class JointDistribution:
    """Exact joint over all variables as a list of outcomes with positive probability.

    Each outcome is a tuple of values in declaration order, utility nodes
    included.
    """

    variables: tuple[str, ...]
    outcomes: tuple[tuple[tuple[Value, ...], float], ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.variables)})

    def __len__(self) -> int:
        return len(self.outcomes)

    def total(self) -> float:
        return math.fsum(p for _, p in self.outcomes)

    def probability(self, event: Mapping[str, Value] | Callable[[dict[str, Value]], bool]) -> float:
        if callable(event):
            return math.fsum(p for vals, p in self.outcomes
                             if event(dict(zip(self.variables, vals))))
        idx = [(self._index[k], v) for k, v in event.items()]
        return math.fsum(p for vals, p in self.outcomes if all(vals[i] == v for i, v in idx))

    def marginal(self, names: Sequence[str]) -> dict[tuple[Value, ...], float]:
        idx = [self._index[n] for n in names]
        groups: dict[tuple[Value, ...], list[float]] = {}
        for vals, p in self.outcomes:
            groups.setdefault(tuple(vals[i] for i in idx), []).append(p)
        return {k: math.fsum(v) for k, v in groups.items()}

    def expectation(self, fn: Callable[[dict[str, Value]], float]) -> float:
        return math.fsum(p * fn(dict(zip(self.variables, vals))) for vals, p in self.outcomes)


def joint_distribution(maid: Maid) -> JointDistribution:
    """Enumerate the Bayesian network obtained once every decision is assigned.

    Zero-probability branches are pruned. Each outcome's probability is the
    product of its CPD entries taken in declaration order, so inserting a
    node whose entry is exactly 1 never perturbs the other outcomes.
    """
    if maid.decisions:
        raise UnassignedDecision(f"unassigned decisions: {list(maid.decisions)}")
    n = len(maid.order)
    pos = {name: i for i, name in enumerate(maid.order)}
    plan = []
    for name in maid.topological_order:
        decl = maid[name]
        ppos = [pos[p] for p in decl.parents]
        sizes = [len(maid[p].domain) for p in decl.parents]
        if decl.kind == UTILITY:
            plan.append((pos[name], ppos, sizes, None, decl.table))
        else:
            w = len(decl.domain)
            rows = [
                [(j, decl.domain[j], decl.table[r * w + j]) for j in range(w)
                 if decl.table[r * w + j] > 0.0]
                for r in range(len(decl.table) // w)
            ]
            plan.append((pos[name], ppos, sizes, rows, None))

    values: list[Value] = [None] * n
    indices = [0] * n
    factors = [1.0] * n
    out: list[tuple[tuple[Value, ...], float]] = []

    def row_of(ppos: list[int], sizes: list[int]) -> int:
        r = 0
        for p, s in zip(ppos, sizes):
            r = r * s + indices[p]
        return r

    def visit(k: int) -> None:
        if k == len(plan):
            out.append((tuple(values), math.prod(factors)))
            return
        i, ppos, sizes, rows, utable = plan[k]
        r = row_of(ppos, sizes)
        if rows is None:
            values[i] = utable[r]
            factors[i] = 1.0
            visit(k + 1)
            return
        for j, v, p in rows[r]:
            values[i] = v
            indices[i] = j
            factors[i] = p
            visit(k + 1)
        factors[i] = 1.0

    visit(0)
    return JointDistribution(maid.order, tuple(out))


def _require_full(maid: Maid, profile: Mapping[str, DecisionRule]) -> None:
    missing = [d for d in maid.decisions if d not in profile]
    if missing:
        raise PartialProfile(f"profile leaves {missing} unassigned")


def expected_utility(maid: Maid, profile: Mapping[str, DecisionRule], agent: str) -> float:
    """Sum over the agent's utility outcomes of their probability times their total."""
    if agent not in maid.agents:
        raise UnknownAgent(agent)
    _require_full(maid, profile)
    joint = joint_distribution(induce(maid, profile))
    return _eu_from_joint(joint, maid.utilities_of(agent))


def _eu_from_joint(joint: JointDistribution, utilities: Sequence[str]) -> float:
    if not utilities:
        return 0.0
    marg = joint.marginal(utilities)
    return math.fsum(p * math.fsum(u) for u, p in marg.items())


def agent_utilities(maid: Maid, profile: Mapping[str, DecisionRule]) -> dict[str, float]:
    """Expected utility of every agent from a single joint enumeration."""
    _require_full(maid, profile)
    joint = joint_distribution(induce(maid, profile))
    return {a: _eu_from_joint(joint, maid.utilities_of(a)) for a in maid.agents}


def total_utility_distribution(maid: Maid, profile: Mapping[str, DecisionRule]) -> dict[float, float]:
    """Distribution of the sum of all utility nodes."""
    _require_full(maid, profile)
    return utility_total_distribution(joint_distribution(induce(maid, profile)), maid.utilities)


def utility_total_distribution(joint: JointDistribution, utilities: Sequence[str]) -> dict[float, float]:
    idx = [joint.variables.index(u) for u in utilities]
    groups: dict[float, list[float]] = {}
    for vals, p in joint.outcomes:
        total = math.fsum(vals[i] for i in idx) if idx else 0.0
        groups.setdefault(total, []).append(p)
    return {k: math.fsum(v) for k, v in sorted(groups.items())}


# -- file format --------------------------------------------------------------

def build_maid(spec: Mapping[str, Any]) -> Maid:
    """Build a diagram from a structured description (the parsed file format)."""
    try:
        agents = spec.get("agents", [])
        nodes = []
        for raw in spec["nodes"]:
            kind = raw["kind"]
            owner = raw.get("owner")
            if owner is None:
                owners: tuple[str, ...] = ()
            elif isinstance(owner, (list, tuple)):
                owners = tuple(owner)
            else:
                owners = (owner,)
            nodes.append(NodeDecl(
                id=raw["id"],
                kind=kind,
                parents=tuple(raw.get("parents", ())),
                domain=tuple(_freeze(v) for v in raw.get("domain", ())),
                table=tuple(float(x) for x in raw.get("table", ())),
                owners=owners,
                guidance=bool(raw.get("guidance", False)),
                commit=raw.get("commit"),
            ))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed MAID description: {exc}") from exc
    return Maid(agents, nodes)


def _freeze(v: Any) -> Value:
    return tuple(v) if isinstance(v, list) else v


def maid_to_dict(maid: Maid) -> dict[str, Any]:
    nodes = []
    for decl in maid:
        d: dict[str, Any] = {"id": decl.id, "kind": decl.kind}
        if decl.kind == DECISION:
            d["owner"] = decl.owners[0]
        elif decl.kind == UTILITY:
            d["owner"] = decl.owners[0] if len(decl.owners) == 1 else list(decl.owners)
        if decl.guidance:
            d["guidance"] = True
        if decl.commit is not None:
            d["commit"] = decl.commit
        d["parents"] = list(decl.parents)
        if decl.kind != UTILITY:
            d["domain"] = [list(v) if isinstance(v, tuple) else v for v in decl.domain]
        if decl.kind != DECISION:
            d["table"] = list(decl.table)
        nodes.append(d)
    return {"agents": list(maid.agents), "nodes": nodes}


def dumps_maid(maid: Maid) -> str:
    return dumps_canonical(maid_to_dict(maid))


def loads_maid(text: str) -> Maid:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc
    return build_maid(data)


def load_maid(path: str | Path) -> Maid:
    return loads_maid(Path(path).read_text())


def save_maid(maid: Maid, path: str | Path) -> None:
    Path(path).write_text(dumps_maid(maid))


def dumps_canonical(obj: Any) -> str:
    """Stable text form shared by every file this package writes."""
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def rule_to_list(rule: DecisionRule) -> list[list[float]]:
    return [list(r) for r in rule.table]


def profile_to_dict(profile: Mapping[str, DecisionRule], maid: Maid) -> dict[str, list[list[float]]]:
    return {d: rule_to_list(profile[d]) for d in maid.decisions if d in profile}


def profile_from_dict(data: Mapping[str, Sequence[Sequence[float]]]) -> StrategyProfile:
    return StrategyProfile({d: DecisionRule(d, tuple(tuple(float(x) for x in r) for r in rows))
                            for d, rows in data.items()})


def with_node(maid: Maid, decl: NodeDecl, *, before: str | None = None) -> Maid:
    """Insert a declaration, optionally right before an existing node."""
    nodes = list(maid)
    if before is None:
        nodes.append(decl)
    else:
        i = maid.position(before)
        nodes.insert(i, decl)
    return Maid(maid.agents, nodes)


def updated(decl: NodeDecl, **changes: Any) -> NodeDecl:
    return replace(decl, **changes)
