"""Centralized offline monitoring: Boolean satisfaction signals, bottom-up.

Two evaluation routes live here on purpose. ``monitor_local`` and
``monitor_global`` run the production evaluator: formulas are lowered to the
core fragment and evaluated with a memo table per (subformula, agent, time).
``oracle_eval`` / ``oracle_eval_global`` are deliberately separate: a plain,
memo-free recursive transcription of the semantics that also interprets
sugar directly. The oracle is the reference the monitor is tested against
and must not share evaluation logic with it.

Finite traces: by default a window reaching past the trace end is clamped
to the available samples; for an unbounded interval the window becomes
[min(t + lo, L), L], so "always" over [0, inf] means "at every available
sample". With ``strict=True`` any bounded interval extending past L raises
InsufficientTraceError instead, and the returned signal covers [0, T] only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import formula as F
from .formula import INF, eval_expr, expr_vars, horizon, lower
from .model import MasRun, TimeOutOfRangeError, neighbors


class InsufficientTraceError(ValueError):
    """Raised in strict mode when the trace is too short for a bounded window."""


@dataclass(frozen=True)
class BoolSignal:
    """Boolean satisfaction signal over the contiguous domain t0..t0+len-1."""

    t0: int
    values: tuple[int, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("signal domain must be non-empty")
        if any(v not in (0, 1) for v in self.values):
            raise ValueError("Boolean signal values must be 0 or 1")

    @property
    def t1(self) -> int:
        return self.t0 + len(self.values) - 1

    def value_at(self, t: int) -> int:
        if not self.t0 <= t <= self.t1:
            raise TimeOutOfRangeError("time out of range")
        return self.values[t - self.t0]


@dataclass(frozen=True)
class SignalTable:
    """Signals of every core subformula, per agent (or None for system level)."""

    entries: dict

    def signal(self, subformula, agent=None) -> BoolSignal:
        return self.entries[(subformula, agent)]


def validate_local(run: MasRun, f: F.LocalFormula):
    """Check state accessors against a run before evaluation."""
    for expr in _formula_exprs(f):
        for var in expr_vars(expr):
            if isinstance(var, F.AgentStateVar):
                raise ValueError("agent-indexed accessor inside an agent-local formula")
            if var.index >= run.trajectory.state_dim:
                raise ValueError(
                    f"state component {var.index} out of range "
                    f"(state_dim={run.trajectory.state_dim})"
                )


def validate_global(run: MasRun, f: F.GlobalFormula):
    """Check agent references and state accessors against a run."""
    for agent, local in F.local_subformulas(f):
        if agent is not None and agent > run.num_agents:
            raise ValueError(f"agent {agent} out of range (N={run.num_agents})")
        validate_local(run, local)
    for expr in _formula_exprs(f):
        for var in expr_vars(expr):
            if isinstance(var, F.AgentStateVar):
                if not 1 <= var.agent <= run.num_agents:
                    raise ValueError(
                        f"agent {var.agent} out of range (N={run.num_agents})"
                    )
            if var.index >= run.trajectory.state_dim:
                raise ValueError(
                    f"state component {var.index} out of range "
                    f"(state_dim={run.trajectory.state_dim})"
                )


def _formula_exprs(f) -> Iterable[F.Expr]:
    if isinstance(f, (F.Atom, F.GlobalAtom)):
        yield f.expr
    elif isinstance(f, (F.Not, F.GNot, F.Eventually, F.Always, F.GEventually,
                        F.GAlways, F.GraphOp, F.AgentBind, F.ForAllAgents,
                        F.ExistsAgent)):
        yield from _formula_exprs(f.child)
    elif isinstance(f, (F.And, F.Or, F.Implies, F.Until, F.GAnd, F.GOr,
                        F.GImplies, F.GUntil)):
        yield from _formula_exprs(f.left)
        yield from _formula_exprs(f.right)


def clamp_window(t: int, interval: F.TimeInterval, length: int) -> tuple[int, int]:
    """The evaluation window (t + I) intersected with the available trace.

    Unbounded intervals clamp to [min(t + lo, L), L]; bounded intervals may
    come out empty (lo > hi) when they start past the trace end.
    """
    if interval.hi == INF:
        return (min(t + interval.lo, length), length)
    return (t + interval.lo, min(t + int(interval.hi), length))


class CentralEvaluator:
    """Memoized bottom-up evaluation of core formulas over one run.

    The memo table is written once per (subformula, agent, time) cell;
    inputs are immutable, so distinct agents' signals may be computed
    concurrently by separate evaluators.
    """

    def __init__(self, run: MasRun, strict: bool = False):
        self.run = run
        self.length = run.length
        self.strict = strict
        self._memo: dict = {}
        self._nbrs: dict = {}

    # -- window handling ---------------------------------------------------

    def _window(self, t: int, interval: F.TimeInterval) -> tuple[int, int]:
        if self.strict and interval.hi != INF and t + interval.hi > self.length:
            raise InsufficientTraceError(
                f"insufficient trace: window [{t + interval.lo}, "
                f"{t + int(interval.hi)}] exceeds length {self.length}"
            )
        return clamp_window(t, interval, self.length)

    # -- agent-local layer ---------------------------------------------------

    def eval_local(self, f: F.LocalFormula, agent: int, t: int) -> int:
        key = (id(f), agent, t)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        v = self._eval_local(f, agent, t)
        self._memo[key] = v
        return v

    def _eval_local(self, f: F.LocalFormula, agent: int, t: int) -> int:
        if isinstance(f, F.Truth):
            return 1
        if isinstance(f, F.Atom):
            state = self.run.trajectory.state(agent, t)
            return 1 if eval_expr(f.expr, local_state=state) >= 0 else 0
        if isinstance(f, F.Not):
            return 1 - self.eval_local(f.child, agent, t)
        if isinstance(f, F.And):
            if self.eval_local(f.left, agent, t) == 0:
                return 0
            return self.eval_local(f.right, agent, t)
        if isinstance(f, F.Until):
            # phi1 must hold on all of [t, t2], inclusive of the witness time
            lo, hi = self._window(t, f.interval)
            prefix_next = t
            for t2 in range(lo, hi + 1):
                while prefix_next <= t2:
                    if self.eval_local(f.left, agent, prefix_next) == 0:
                        return 0
                    prefix_next += 1
                if self.eval_local(f.right, agent, t2) == 1:
                    return 1
            return 0
        if isinstance(f, F.GraphOp):
            results = []
            for tag in f.graphs:
                count = 0
                for j in self._neighbor_endpoints(tag, t, agent, f.direction, f.weights):
                    count += self.eval_local(f.child, j, t)
                results.append(f.counts.contains(count))
            ok = any(results) if f.quantifier == "exists" else all(results)
            return 1 if ok else 0
        raise TypeError(f"monitor requires a lowered core formula, got {type(f).__name__}")

    def _neighbor_endpoints(self, tag, t, agent, direction, weights) -> tuple[int, ...]:
        """Opposite endpoints, one entry per parallel edge in the window."""
        key = (tag, t, agent, direction, weights.lo, weights.hi)
        hit = self._nbrs.get(key)
        if hit is None:
            edges = neighbors(self.run, tag, t, agent, direction, weights.bounds)
            hit = tuple(e.src if direction == "in" else e.dst for e in edges)
            self._nbrs[key] = hit
        return hit

    # -- system layer --------------------------------------------------------

    def eval_global(self, f: F.GlobalFormula, t: int) -> int:
        key = (id(f), None, t)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        v = self._eval_global(f, t)
        self._memo[key] = v
        return v

    def _eval_global(self, f: F.GlobalFormula, t: int) -> int:
        if isinstance(f, F.GTruth):
            return 1
        if isinstance(f, F.GlobalAtom):
            full = self.run.trajectory.full_state(t)
            return 1 if eval_expr(f.expr, full_state=full) >= 0 else 0
        if isinstance(f, F.AgentBind):
            return self.eval_local(f.child, f.agent, t)
        if isinstance(f, F.GNot):
            return 1 - self.eval_global(f.child, t)
        if isinstance(f, F.GAnd):
            if self.eval_global(f.left, t) == 0:
                return 0
            return self.eval_global(f.right, t)
        if isinstance(f, F.GUntil):
            lo, hi = self._window(t, f.interval)
            prefix_next = t
            for t2 in range(lo, hi + 1):
                while prefix_next <= t2:
                    if self.eval_global(f.left, prefix_next) == 0:
                        return 0
                    prefix_next += 1
                if self.eval_global(f.right, t2) == 1:
                    return 1
            return 0
        raise TypeError(f"monitor requires a lowered core formula, got {type(f).__name__}")


def _signal_domain_end(f, T: int, length: int, strict: bool) -> int:
    _, t_max = horizon(f)
    if strict:
        if t_max != INF and T + t_max > length:
            raise InsufficientTraceError(
                f"insufficient trace: need length {T + int(t_max)}, have {length}"
            )
        return T
    return int(min(T + t_max, length))


def monitor_local(
    run: MasRun, f: F.LocalFormula, agent: int, T: int, strict: bool = False
) -> BoolSignal:
    """Boolean satisfaction signal of an agent-local formula at one agent.

    The signal covers [0, min(T + T_f, L)] (or [0, T] in strict mode); its
    value at t is 1 exactly when the run satisfies f at (agent, t).
    """
    validate_local(run, f)
    if not 1 <= agent <= run.num_agents:
        raise ValueError(f"unknown agent {agent}")
    if not 0 <= T <= run.length:
        raise TimeOutOfRangeError("time out of range")
    end = _signal_domain_end(f, T, run.length, strict)
    core = lower(f)
    ev = CentralEvaluator(run, strict)
    return BoolSignal(0, tuple(ev.eval_local(core, agent, t) for t in range(end + 1)))


def monitor_global(
    run: MasRun, f: F.GlobalFormula, T: int, strict: bool = False
) -> BoolSignal:
    """Boolean satisfaction signal of a system-level formula."""
    validate_global(run, f)
    if not 0 <= T <= run.length:
        raise TimeOutOfRangeError("time out of range")
    end = _signal_domain_end(f, T, run.length, strict)
    core = lower(f)
    ev = CentralEvaluator(run, strict)
    return BoolSignal(0, tuple(ev.eval_global(core, t) for t in range(end + 1)))


def signal_table(
    run: MasRun, f: F.LocalFormula | F.GlobalFormula, T: int, strict: bool = False
) -> SignalTable:
    """Signals of every core subformula over [0, min(T + T_f, L)].

    Local subformulas get one signal per agent; system-level subformulas one
    signal under the agent key None.
    """
    if isinstance(f, F.LocalFormula):
        validate_local(run, f)
    else:
        validate_global(run, f)
    end = _signal_domain_end(f, T, run.length, strict)
    core = lower(f)
    ev = CentralEvaluator(run, strict)
    entries: dict = {}

    def add_local(sub: F.LocalFormula):
        for agent in range(1, run.num_agents + 1):
            entries[(sub, agent)] = BoolSignal(
                0, tuple(ev.eval_local(sub, agent, t) for t in range(end + 1))
            )
        if isinstance(sub, (F.Not, F.GraphOp)):
            add_local(sub.child)
        elif isinstance(sub, (F.And, F.Until)):
            add_local(sub.left)
            add_local(sub.right)

    def add_global(sub: F.GlobalFormula):
        entries[(sub, None)] = BoolSignal(
            0, tuple(ev.eval_global(sub, t) for t in range(end + 1))
        )
        if isinstance(sub, F.AgentBind):
            add_local(sub.child)
        elif isinstance(sub, F.GNot):
            add_global(sub.child)
        elif isinstance(sub, (F.GAnd, F.GUntil)):
            add_global(sub.left)
            add_global(sub.right)

    if isinstance(core, F.LocalFormula):
        add_local(core)
    else:
        add_global(core)
    return SignalTable(entries)


# ---------------------------------------------------------------------------
# independent semantics oracle
#
# A direct recursive transcription of the satisfaction relation. No memo, no
# lowering: sugar is interpreted through its defining semantics. Kept free of
# the evaluator machinery above so the two routes can check each other.


def oracle_eval(run: MasRun, f: F.LocalFormula, agent: int, t: int) -> int:
    """1 iff the run satisfies the agent-local formula at (agent, t)."""
    if isinstance(f, F.Truth):
        return 1
    if isinstance(f, F.Atom):
        return 1 if eval_expr(f.expr, local_state=run.trajectory.state(agent, t)) >= 0 else 0
    if isinstance(f, F.Not):
        return 1 - oracle_eval(run, f.child, agent, t)
    if isinstance(f, F.And):
        return min(oracle_eval(run, f.left, agent, t), oracle_eval(run, f.right, agent, t))
    if isinstance(f, F.Or):
        return max(oracle_eval(run, f.left, agent, t), oracle_eval(run, f.right, agent, t))
    if isinstance(f, F.Implies):
        return max(1 - oracle_eval(run, f.left, agent, t), oracle_eval(run, f.right, agent, t))
    if isinstance(f, F.Until):
        lo, hi = _oracle_window(t, f.interval, run.length)
        for t2 in range(lo, hi + 1):
            if oracle_eval(run, f.right, agent, t2) == 1 and all(
                oracle_eval(run, f.left, agent, u) == 1 for u in range(t, t2 + 1)
            ):
                return 1
        return 0
    if isinstance(f, F.Eventually):
        lo, hi = _oracle_window(t, f.interval, run.length)
        return 1 if any(
            oracle_eval(run, f.child, agent, t2) == 1 for t2 in range(lo, hi + 1)
        ) else 0
    if isinstance(f, F.Always):
        lo, hi = _oracle_window(t, f.interval, run.length)
        return 1 if all(
            oracle_eval(run, f.child, agent, t2) == 1 for t2 in range(lo, hi + 1)
        ) else 0
    if isinstance(f, F.GraphOp):
        per_graph = []
        for tag in f.graphs:
            snap = run.graphs.at(tag, t)
            count = 0
            for e in snap.oriented_edges(agent, f.direction):
                if f.weights.contains(e.weight):
                    j = e.src if f.direction == "in" else e.dst
                    count += oracle_eval(run, f.child, j, t)
            per_graph.append(f.counts.contains(count))
        ok = any(per_graph) if f.quantifier == "exists" else all(per_graph)
        return 1 if ok else 0
    raise TypeError(f"not a local formula: {f!r}")


def oracle_eval_global(run: MasRun, f: F.GlobalFormula, t: int) -> int:
    """1 iff the run satisfies the system-level formula at time t."""
    if isinstance(f, F.GTruth):
        return 1
    if isinstance(f, F.GlobalAtom):
        return 1 if eval_expr(f.expr, full_state=run.trajectory.full_state(t)) >= 0 else 0
    if isinstance(f, F.AgentBind):
        return oracle_eval(run, f.child, f.agent, t)
    if isinstance(f, F.GNot):
        return 1 - oracle_eval_global(run, f.child, t)
    if isinstance(f, F.GAnd):
        return min(oracle_eval_global(run, f.left, t), oracle_eval_global(run, f.right, t))
    if isinstance(f, F.GOr):
        return max(oracle_eval_global(run, f.left, t), oracle_eval_global(run, f.right, t))
    if isinstance(f, F.GImplies):
        return max(1 - oracle_eval_global(run, f.left, t), oracle_eval_global(run, f.right, t))
    if isinstance(f, F.GUntil):
        lo, hi = _oracle_window(t, f.interval, run.length)
        for t2 in range(lo, hi + 1):
            if oracle_eval_global(run, f.right, t2) == 1 and all(
                oracle_eval_global(run, f.left, u) == 1 for u in range(t, t2 + 1)
            ):
                return 1
        return 0
    if isinstance(f, F.GEventually):
        lo, hi = _oracle_window(t, f.interval, run.length)
        return 1 if any(
            oracle_eval_global(run, f.child, t2) == 1 for t2 in range(lo, hi + 1)
        ) else 0
    if isinstance(f, F.GAlways):
        lo, hi = _oracle_window(t, f.interval, run.length)
        return 1 if all(
            oracle_eval_global(run, f.child, t2) == 1 for t2 in range(lo, hi + 1)
        ) else 0
    if isinstance(f, F.ForAllAgents):
        return 1 if all(oracle_eval(run, f.child, a, t) == 1 for a in f.agents) else 0
    if isinstance(f, F.ExistsAgent):
        return 1 if any(oracle_eval(run, f.child, a, t) == 1 for a in f.agents) else 0
    raise TypeError(f"not a global formula: {f!r}")


def _oracle_window(t: int, interval: F.TimeInterval, length: int) -> tuple[int, int]:
    # same finite-trace convention as the monitor, transcribed separately
    if interval.hi == INF:
        return (min(t + interval.lo, length), length)
    return (t + interval.lo, min(t + int(interval.hi), length))
