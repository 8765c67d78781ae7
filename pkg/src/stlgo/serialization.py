"""JSON file formats, all under the versioned schema tag "stlgo/1".

Run file:    {"schema", "num_agents", "state_dim", "length", "states"[t][i][k]}
Graph file:  {"schema", "types": {tag: {"directed", "static"?, "snapshots":
             [{"t"?, "edges": [[src, dst, u, w]]}]}}}
Mask file:   {"schema", "observer", "known": [[subject, t_from, t_to]]}
Signal file: {"schema", "t0", "values": [0 | 1 | "?"]}
Label file:  {"schema", "labels": {agent: [label, ...]}}

Infinite edge weights serialize as the strings "inf" / "-inf" (JSON has no
infinity literal); everything else is plain numbers. Files written here
re-read to identical in-memory values.
"""

from __future__ import annotations

import json
import math
from typing import Iterable

from .distributed import KnowledgeMask, TernarySignal
from .central import BoolSignal
from .model import Edge, GraphTrajectory, MasRun, MasTrajectory, MultigraphSnapshot

SCHEMA = "stlgo/1"


class SchemaError(ValueError):
    """Raised when a file does not match its expected stlgo/1 schema."""


def _check_schema(doc, path, *required):
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise SchemaError(f"{path}: expected schema {SCHEMA!r}")
    for key in required:
        if key not in doc:
            raise SchemaError(f"{path}: missing field {key!r}")


def _load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _dump(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _weight_out(w: float):
    if w == math.inf:
        return "inf"
    if w == -math.inf:
        return "-inf"
    return w


def _weight_in(raw, path):
    if raw == "inf":
        return math.inf
    if raw == "-inf":
        return -math.inf
    if isinstance(raw, (int, float)) and not math.isnan(raw):
        return float(raw)
    raise SchemaError(f"{path}: bad edge weight {raw!r}")


# -- trajectory ------------------------------------------------------------


def save_trajectory(traj: MasTrajectory, path):
    _dump(
        {
            "schema": SCHEMA,
            "num_agents": traj.num_agents,
            "state_dim": traj.state_dim,
            "length": traj.length,
            "states": [[list(vec) for vec in slice_] for slice_ in traj.states],
        },
        path,
    )


def load_trajectory(path) -> MasTrajectory:
    doc = _load(path)
    _check_schema(doc, path, "num_agents", "state_dim", "length", "states")
    traj = MasTrajectory.from_states(doc["states"])
    for key in ("num_agents", "state_dim", "length"):
        if getattr(traj, key) != doc[key]:
            raise SchemaError(
                f"{path}: declared {key}={doc[key]} but states imply {getattr(traj, key)}"
            )
    return traj


# -- graphs ------------------------------------------------------------------


def save_graphs(graphs: GraphTrajectory, path):
    types = {}
    for tag in sorted(graphs.static):
        snap = graphs.static[tag]
        types[tag] = {
            "directed": snap.directed,
            "static": True,
            "snapshots": [{"edges": _edges_out(snap)}],
        }
    for tag in sorted(graphs.dynamic):
        snaps = graphs.dynamic[tag]
        types[tag] = {
            "directed": snaps[0].directed,
            "snapshots": [
                {"t": t, "edges": _edges_out(snap)} for t, snap in enumerate(snaps)
            ],
        }
    _dump({"schema": SCHEMA, "types": types}, path)


def _edges_out(snap: MultigraphSnapshot):
    return [[e.src, e.dst, e.index, _weight_out(e.weight)] for e in sorted(snap.edges)]


def load_graphs(path, length: int) -> GraphTrajectory:
    doc = _load(path)
    _check_schema(doc, path, "types")
    static = {}
    dynamic = {}
    for tag, entry in doc["types"].items():
        if "directed" not in entry or "snapshots" not in entry:
            raise SchemaError(f"{path}: graph {tag!r}: need 'directed' and 'snapshots'")
        directed = bool(entry["directed"])
        snaps = entry["snapshots"]
        if entry.get("static"):
            if len(snaps) != 1:
                raise SchemaError(f"{path}: static graph {tag!r} needs exactly one snapshot")
            static[tag] = _snapshot_in(tag, directed, snaps[0], path)
        else:
            by_t = {}
            for entry in snaps:
                if "t" not in entry:
                    raise SchemaError(f"{path}: graph {tag!r}: dynamic snapshot without 't'")
                if entry["t"] in by_t:
                    raise SchemaError(f"{path}: graph {tag!r}: duplicate snapshot t={entry['t']}")
                by_t[entry["t"]] = _snapshot_in(tag, directed, entry, path)
            missing = [t for t in range(length + 1) if t not in by_t]
            if missing:
                raise SchemaError(f"{path}: graph {tag!r}: missing snapshots for t={missing}")
            extra = sorted(t for t in by_t if not 0 <= t <= length)
            if extra:
                raise SchemaError(
                    f"{path}: graph {tag!r}: snapshots at t={extra} exceed run length {length}"
                )
            dynamic[tag] = tuple(by_t[t] for t in range(length + 1))
    return GraphTrajectory(length, static, dynamic)


def _snapshot_in(tag, directed, entry, path) -> MultigraphSnapshot:
    edges = []
    for raw in entry.get("edges", []):
        if len(raw) != 4:
            raise SchemaError(f"{path}: graph {tag!r}: edge must be [src, dst, u, w]")
        src, dst, u, w = raw
        edges.append(Edge(int(src), int(dst), int(u), _weight_in(w, path)))
    return MultigraphSnapshot.make(tag, directed, edges)


def load_run(trajectory_path, graphs_path) -> MasRun:
    traj = load_trajectory(trajectory_path)
    graphs = load_graphs(graphs_path, traj.length)
    return MasRun(traj, graphs)


def save_run(run: MasRun, trajectory_path, graphs_path):
    save_trajectory(run.trajectory, trajectory_path)
    save_graphs(run.graphs, graphs_path)


# -- masks -------------------------------------------------------------------


def save_mask(mask: KnowledgeMask, path):
    # collapse per-subject known times into maximal ranges
    by_subject: dict[int, list[int]] = {}
    for j, t in sorted(mask.known):
        by_subject.setdefault(j, []).append(t)
    ranges = []
    for j, times in sorted(by_subject.items()):
        start = prev = times[0]
        for t in times[1:]:
            if t == prev + 1:
                prev = t
                continue
            ranges.append([j, start, prev])
            start = prev = t
        ranges.append([j, start, prev])
    _dump({"schema": SCHEMA, "observer": mask.observer, "known": ranges}, path)


def load_mask(path) -> KnowledgeMask:
    doc = _load(path)
    _check_schema(doc, path, "observer", "known")
    pairs = set()
    for entry in doc["known"]:
        if len(entry) != 3:
            raise SchemaError(f"{path}: mask entry must be [subject, t_from, t_to]")
        j, t_from, t_to = entry
        if t_from > t_to:
            raise SchemaError(f"{path}: mask range reversed: {entry}")
        pairs.update((int(j), t) for t in range(int(t_from), int(t_to) + 1))
    return KnowledgeMask(int(doc["observer"]), frozenset(pairs))


# -- signals -----------------------------------------------------------------


def save_signal(signal: BoolSignal | TernarySignal, path):
    values = ["?" if v is None else v for v in signal.values]
    _dump({"schema": SCHEMA, "t0": signal.t0, "values": values}, path)


def load_signal(path) -> TernarySignal:
    doc = _load(path)
    _check_schema(doc, path, "t0", "values")
    values = []
    for v in doc["values"]:
        if v == "?":
            values.append(None)
        elif v in (0, 1):
            values.append(int(v))
        else:
            raise SchemaError(f"{path}: signal values must be 0, 1, or '?'")
    return TernarySignal(int(doc["t0"]), tuple(values))


# -- labels -----------------------------------------------------------------


def save_labels(labels: dict[int, Iterable[str]], path):
    _dump(
        {
            "schema": SCHEMA,
            "labels": {str(a): sorted(ls) for a, ls in sorted(labels.items())},
        },
        path,
    )


def load_labels(path) -> dict[int, frozenset[str]]:
    doc = _load(path)
    _check_schema(doc, path, "labels")
    return {int(a): frozenset(ls) for a, ls in doc["labels"].items()}
