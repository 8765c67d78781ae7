"""Distributed offline monitoring from partial state knowledge.

An observer agent holds a knowledge mask saying which (subject, time) states
it can see; graph topology is always fully known. Verdicts are three-valued:
0, 1, or ? (undetermined), with ? represented as None in signal values.

The monitor is sound: a 0/1 verdict always agrees with the centralized
verdict on the full run. Atoms over masked states yield ? even when the
expression would be constant in the masked components; Boolean and temporal
operators follow the strong Kleene tables; graph operators decide from the
counts of satisfying and non-violating neighbor verdicts, weighted by edge
multiplicity. Count sets with several intervals take the three-valued OR of
the per-interval verdicts; since achievable counts form a contiguous range
and canonical count sets keep their intervals non-adjacent, this is exact
with respect to completion enumeration of the neighbor verdicts. Parallel
edges are the one source of imprecision: a hidden neighbor contributes its
whole multiplicity at once, and the scalar count bounds cannot express the
resulting gaps, so some determined-by-enumeration cases report ?.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import formula as F
from .central import InsufficientTraceError, clamp_window
from .formula import (
    INF,
    build_operator_tree,
    contains_atom,
    eval_expr,
    expand_graph_quantifier,
    horizon,
    lower,
    push_negations,
)
from .model import MasRun, TimeOutOfRangeError, agent_neighbors, neighbor_multiplicities


def k_not(a):
    return None if a is None else 1 - a


def k_and(a, b):
    if a == 0 or b == 0:
        return 0
    if a is None or b is None:
        return None
    return 1


def k_or(a, b):
    if a == 1 or b == 1:
        return 1
    if a is None or b is None:
        return None
    return 0


@dataclass(frozen=True)
class KnowledgeMask:
    """Which (subject, time) states an observer can see.

    Self-knowledge is total: the observer always knows its own state, so
    ``known`` only needs to carry other agents' visible samples.
    """

    observer: int
    known: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.observer < 1:
            raise ValueError("agent indices start at 1")
        object.__setattr__(
            self,
            "known",
            frozenset((int(j), int(t)) for j, t in self.known),
        )

    def knows(self, subject: int, t: int) -> bool:
        return subject == self.observer or (subject, t) in self.known

    @classmethod
    def self_only(cls, observer: int) -> KnowledgeMask:
        return cls(observer, frozenset())

    @classmethod
    def full(cls, observer: int, num_agents: int, length: int) -> KnowledgeMask:
        pairs = frozenset(
            (j, t) for j in range(1, num_agents + 1) for t in range(length + 1)
        )
        return cls(observer, pairs)


def refine(mask: KnowledgeMask, additions) -> KnowledgeMask:
    """Extend a mask with more visible states; knowledge only ever grows.

    ``additions`` is an iterable of (subject, t) pairs or (subject, t_from,
    t_to) ranges, or another KnowledgeMask for the same observer that is
    pointwise at least as knowledgeable.
    """
    if isinstance(additions, KnowledgeMask):
        if additions.observer != mask.observer:
            raise ValueError("refine cannot change the observer")
        if not mask.known <= additions.known:
            raise ValueError("refine cannot hide previously known states")
        return additions
    pairs = set(mask.known)
    for entry in additions:
        entry = tuple(entry)
        if len(entry) == 2:
            j, t = entry
            pairs.add((int(j), int(t)))
        elif len(entry) == 3:
            j, t_from, t_to = entry
            if t_from > t_to:
                raise ValueError(f"mask range reversed: {entry}")
            pairs.update((int(j), t) for t in range(int(t_from), int(t_to) + 1))
        else:
            raise ValueError(f"mask entry must be (subject, t) or (subject, t0, t1): {entry}")
    return KnowledgeMask(mask.observer, frozenset(pairs))


@dataclass(frozen=True)
class TernarySignal:
    """Per-time verdicts over {0, 1, ?}; ? is stored as None."""

    t0: int
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("signal domain must be non-empty")
        if any(v not in (0, 1, None) for v in self.values):
            raise ValueError("ternary signal values must be 0, 1, or None")

    @property
    def t1(self) -> int:
        return self.t0 + len(self.values) - 1

    def value_at(self, t: int):
        if not self.t0 <= t <= self.t1:
            raise TimeOutOfRangeError("time out of range")
        return self.values[t - self.t0]

    def has_unknown(self) -> bool:
        return any(v is None for v in self.values)


def graph_op_verdict(counts: F.CountSet, n_sat: int, n_nviol: int):
    """Three-valued verdict of a counting operator from neighbor verdicts.

    For one interval [e1, e2]: 1 when even the pessimistic count fits
    (n_sat >= e1 and n_nviol <= e2), 0 when no completion can fit
    (n_nviol < e1 or n_sat > e2), otherwise ?. Several intervals combine by
    three-valued OR.
    """
    out = 0
    for e1, e2 in counts.intervals:
        if n_sat >= e1 and n_nviol <= e2:
            v = 1
        elif n_nviol < e1 or n_sat > e2:
            v = 0
        else:
            v = None
        out = k_or(out, v)
        if out == 1:
            return 1
    return out


def prepare_for_distributed(f: F.LocalFormula) -> F.LocalFormula:
    """Lower to the core with single-graph operators and no negations
    directly above them."""
    return push_negations(lower(expand_graph_quantifier(f)))


class DistributedEvaluator:
    """Kleene-style bottom-up evaluation under a knowledge mask."""

    def __init__(self, run: MasRun, mask: KnowledgeMask, strict: bool = False):
        self.run = run
        self.mask = mask
        self.length = run.length
        self.strict = strict
        self._memo: dict = {}

    def _window(self, t: int, interval: F.TimeInterval) -> tuple[int, int]:
        if self.strict and interval.hi != INF and t + interval.hi > self.length:
            raise InsufficientTraceError(
                f"insufficient trace: window [{t + interval.lo}, "
                f"{t + int(interval.hi)}] exceeds length {self.length}"
            )
        return clamp_window(t, interval, self.length)

    def eval(self, f: F.LocalFormula, agent: int, t: int):
        key = (id(f), agent, t)
        if key in self._memo:
            return self._memo[key]
        v = self._eval(f, agent, t)
        self._memo[key] = v
        return v

    def _eval(self, f: F.LocalFormula, agent: int, t: int):
        if isinstance(f, F.Truth):
            return 1
        if isinstance(f, F.Atom):
            if not self.mask.knows(agent, t):
                return None
            state = self.run.trajectory.state(agent, t)
            return 1 if eval_expr(f.expr, local_state=state) >= 0 else 0
        if isinstance(f, F.Not):
            return k_not(self.eval(f.child, agent, t))
        if isinstance(f, F.And):
            return k_and(self.eval(f.left, agent, t), self.eval(f.right, agent, t))
        if isinstance(f, F.Until):
            lo, hi = self._window(t, f.interval)
            acc = 0
            prefix = 1
            prefix_next = t
            for t2 in range(lo, hi + 1):
                while prefix_next <= t2:
                    prefix = k_and(prefix, self.eval(f.left, agent, prefix_next))
                    prefix_next += 1
                if prefix == 0:
                    return acc
                acc = k_or(acc, k_and(prefix, self.eval(f.right, agent, t2)))
                if acc == 1:
                    return 1
            return acc
        if isinstance(f, F.GraphOp):
            if len(f.graphs) != 1:
                raise ValueError("expand graphs first")
            mult = neighbor_multiplicities(
                self.run, f.graphs[0], t, agent, f.direction, f.weights.bounds
            )
            n_sat = 0
            n_nviol = 0
            for j, m in mult.items():
                v = self.eval(f.child, j, t)
                if v == 1:
                    n_sat += m
                    n_nviol += m
                elif v is None:
                    n_nviol += m
            return graph_op_verdict(f.counts, n_sat, n_nviol)
        raise TypeError(
            f"distributed monitor requires a prepared core formula, got {type(f).__name__}"
        )


def monitor_dist(
    run: MasRun,
    mask: KnowledgeMask,
    f: F.LocalFormula,
    subject: int,
    T: int,
    strict: bool = False,
) -> TernarySignal:
    """Three-valued satisfaction signal of f at the subject agent, as seen by
    the mask's observer. The observer may monitor a subject other than
    itself; the mask governs what is visible, the subject selects where the
    formula is imposed."""
    from .central import validate_local

    validate_local(run, f)
    if not 1 <= subject <= run.num_agents:
        raise ValueError(f"unknown agent {subject}")
    if not 0 <= T <= run.length:
        raise TimeOutOfRangeError("time out of range")
    _, t_max = horizon(f)
    if strict:
        if t_max != INF and T + t_max > run.length:
            raise InsufficientTraceError(
                f"insufficient trace: need length {T + int(t_max)}, have {run.length}"
            )
        end = T
    else:
        end = int(min(T + t_max, run.length))
    prepared = prepare_for_distributed(f)
    ev = DistributedEvaluator(run, mask, strict)
    return TernarySignal(0, tuple(ev.eval(prepared, subject, t) for t in range(end + 1)))


# ---------------------------------------------------------------------------
# determinability analysis


@dataclass(frozen=True)
class LeafFailure:
    """One (leaf, time) pair where neither determinability condition holds."""

    leaf_index: int
    time: int
    unknown_states: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class DeterminabilityReport:
    determinable: bool
    failures: tuple[LeafFailure, ...]
    tree: F.GraphOpTree


def is_determinable(
    run: MasRun,
    mask: KnowledgeMask,
    f: F.LocalFormula,
    subject: int,
    T: int,
) -> DeterminabilityReport:
    """Sufficient per-leaf, per-time check that the distributed verdict will
    be 0/1 at every time in [0, T].

    A leaf passes at time t when either (a) it reads no state at all, or the
    observer knows the states of every agent in the leaf's composed neighbor
    set, across the leaf's own time window; or (b) the nested neighbor
    counts along the leaf's ancestor chain fall short of the chain's minimum
    count thresholds, so the outermost operator is determined regardless of
    any state. Counts are weighted by edge multiplicity.

    For ancestor chains that touch a time-varying graph, the neighbor sets
    and counts are over-approximated by their union (respectively, maximum)
    across all times: temporal operators between nested graph operators can
    shift evaluation to instants where the topology differs, so the
    single-instant composition would not be sufficient there.
    """
    from .central import validate_local

    validate_local(run, f)
    if not 1 <= subject <= run.num_agents:
        raise ValueError(f"unknown agent {subject}")
    if not 0 <= T <= run.length:
        raise TimeOutOfRangeError("time out of range")
    _, t_max = horizon(f)
    end = int(min(T + t_max, run.length))
    prepared = prepare_for_distributed(f)
    tree = build_operator_tree(prepared)
    ops = {node.index: node for node in tree.operators}
    static_tags = run.graphs.static_types
    failures: list[LeafFailure] = []

    for leaf in tree.leaves:
        if not contains_atom(leaf.formula):
            continue
        _, leaf_t_max = horizon(leaf.formula)
        exact = all(ops[p].graph in static_tags for p in leaf.ancestors)
        for t in range(end + 1):
            agents = frozenset((subject,))
            for p in leaf.ancestors:
                agents = _level_neighbors(run, ops[p], agents, t if exact else None)
            w_end = run.length if leaf_t_max == INF else int(min(t + leaf_t_max, run.length))
            missing = tuple(
                (j, u)
                for j in sorted(agents)
                for u in range(t, w_end + 1)
                if not mask.knows(j, u)
            )
            if not missing:
                continue
            if leaf.ancestors:
                count = _chain_count(
                    run, subject, leaf.ancestors, t if exact else None, ops
                )
                if count < ops[leaf.ancestors[0]].counts.min_value():
                    continue
            failures.append(LeafFailure(leaf.index, t, missing))

    return DeterminabilityReport(not failures, tuple(failures), tree)


def _level_neighbors(run: MasRun, node, agents, t) -> frozenset[int]:
    """Neighbor set one operator level out; t=None unions over all times."""
    if t is not None:
        return agent_neighbors(run, node.graph, t, agents, node.direction, node.weights.bounds)
    out: set[int] = set()
    for u in range(run.length + 1):
        out |= agent_neighbors(run, node.graph, u, agents, node.direction, node.weights.bounds)
    return frozenset(out)


def _level_multiplicities(run: MasRun, node, agent: int, t) -> dict[int, int]:
    """Per-neighbor parallel-edge counts; t=None takes the maximum over times."""
    if t is not None:
        return neighbor_multiplicities(
            run, node.graph, t, agent, node.direction, node.weights.bounds
        )
    out: dict[int, int] = {}
    for u in range(run.length + 1):
        for j, m in neighbor_multiplicities(
            run, node.graph, u, agent, node.direction, node.weights.bounds
        ).items():
            out[j] = max(out.get(j, 0), m)
    return out


def _chain_count(run: MasRun, agent: int, chain: tuple[int, ...], t, ops) -> int:
    """Edges at the chain's first operator leading to agents whose own nested
    counts reach the downstream minimum thresholds."""
    node = ops[chain[0]]
    mult = _level_multiplicities(run, node, agent, t)
    if len(chain) == 1:
        return sum(mult.values())
    threshold = ops[chain[1]].counts.min_value()
    total = 0
    for j, m in mult.items():
        if _chain_count(run, j, chain[1:], t, ops) >= threshold:
            total += m
    return total
