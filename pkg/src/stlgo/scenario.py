"""Seeded scenario generators and CSV ingestion for station data.

Both generators are deterministic: equal configs and seeds give identical
runs, bit for bit. The drone generator's motion model (dispatch to a region,
surveil, return to the station) is incidental; what the tests pin down are
the graph constructions: the distance graph carries pairwise Euclidean
distances, the communication graph links same-category drones, and the
sensing graph links same-category drones within the sensing radius.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass

from .model import (
    Edge,
    GraphTrajectory,
    MasRun,
    MasTrajectory,
    MultigraphSnapshot,
)


@dataclass(frozen=True)
class DroneScenarioConfig:
    sigma: int
    seed: int = 0
    horizon: int = 80
    region_count: int = 5
    station_positions: tuple[tuple[float, float], ...] | None = None
    speeds: tuple[float, float] = (0.6, 0.4)
    sensing_radius: float = 1.0
    area: float = 8.0
    categories: tuple[int, ...] | None = None  # default: first floor(sigma/2) agents

    def __post_init__(self):
        if self.sigma < 2:
            raise ValueError("need at least 2 drones")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.sensing_radius <= 0:
            raise ValueError("sensing radius must be positive")
        if self.region_count < 1:
            raise ValueError("need at least one region")
        if self.categories is not None and len(self.categories) != self.sigma:
            raise ValueError("categories must list one category per drone")

    def category(self, agent: int) -> int:
        if self.categories is not None:
            return self.categories[agent - 1]
        return 0 if agent <= self.sigma // 2 else 1


def gen_drone(cfg: DroneScenarioConfig) -> MasRun:
    """Drone-surveillance run with distance (d), communication (c), and
    sensing (s) graphs. State is the 2D position."""
    rng = random.Random(cfg.seed)
    sigma, L = cfg.sigma, cfg.horizon

    if cfg.station_positions is not None:
        stations = [
            cfg.station_positions[i % len(cfg.station_positions)] for i in range(sigma)
        ]
    else:
        stations = [
            (rng.uniform(0, cfg.area), rng.uniform(0, cfg.area)) for _ in range(sigma)
        ]
    regions = [(rng.uniform(0, cfg.area), rng.uniform(0, cfg.area)) for _ in range(cfg.region_count)]

    pos = [list(p) for p in stations]
    target: list[tuple[float, float] | None] = [None] * sigma
    dwell = [rng.randrange(0, 3) for _ in range(sigma)]
    returning = [False] * sigma
    positions: list[list[tuple[float, float]]] = []

    for _ in range(L + 1):
        positions.append([(x, y) for x, y in pos])
        for i in range(sigma):
            speed = cfg.speeds[cfg.category(i + 1) % len(cfg.speeds)]
            if target[i] is None:
                if dwell[i] > 0:
                    dwell[i] -= 1
                else:
                    target[i] = regions[rng.randrange(len(regions))]
                    returning[i] = False
                continue
            tx, ty = target[i]
            dx, dy = tx - pos[i][0], ty - pos[i][1]
            dist = math.hypot(dx, dy)
            if dist <= speed:
                pos[i][0], pos[i][1] = tx, ty
                if returning[i]:
                    target[i] = None
                    dwell[i] = rng.randrange(1, 4)
                else:
                    target[i] = stations[i]
                    returning[i] = True
            else:
                pos[i][0] += speed * dx / dist
                pos[i][1] += speed * dy / dist

    trajectory = MasTrajectory.from_states(
        [[(x, y) for x, y in slice_] for slice_ in positions]
    )

    def euclid(t: int, i: int, j: int) -> float:
        (x1, y1), (x2, y2) = positions[t][i - 1], positions[t][j - 1]
        return math.hypot(x1 - x2, y1 - y2)

    d_snaps = []
    s_snaps = []
    for t in range(L + 1):
        d_edges = [
            Edge(i, j, 1, euclid(t, i, j))
            for i in range(1, sigma + 1)
            for j in range(i + 1, sigma + 1)
        ]
        d_snaps.append(MultigraphSnapshot.make("d", False, d_edges))
        s_edges = [
            Edge(i, j, 1, 1.0)
            for i in range(1, sigma + 1)
            for j in range(i + 1, sigma + 1)
            if cfg.category(i) == cfg.category(j)
            and euclid(t, i, j) <= cfg.sensing_radius
        ]
        s_snaps.append(MultigraphSnapshot.make("s", False, s_edges))
    c_edges = [
        Edge(i, j, 1, 1.0)
        for i in range(1, sigma + 1)
        for j in range(i + 1, sigma + 1)
        if cfg.category(i) == cfg.category(j)
    ]
    graphs = GraphTrajectory(
        L,
        static={"c": MultigraphSnapshot.make("c", False, c_edges)},
        dynamic={"d": tuple(d_snaps), "s": tuple(s_snaps)},
    )
    return MasRun(trajectory, graphs)


@dataclass(frozen=True)
class BikeScenarioConfig:
    stations: int
    seed: int = 0
    hours: int = 24
    capacity: tuple[int, int] = (0, 30)
    flow_max: int = 8
    d_density: float = 0.35
    mt_density: float = 0.35
    distance_range: tuple[float, float] = (0.2, 5.0)
    transit_range: tuple[float, float] = (3.0, 20.0)
    walk_range: tuple[float, float] = (5.0, 45.0)

    def __post_init__(self):
        if self.stations < 1:
            raise ValueError("need at least one station")
        if self.hours < 1:
            raise ValueError("need at least one hour")


def gen_bike(cfg: BikeScenarioConfig) -> MasRun:
    """Bike-share run: states [n, n_in, n_out] with the conservation update
    n(t+1) = n(t) + n_in(t) - n_out(t), a static directed distance graph d,
    and a static directed multigraph mt carrying transit time (edge 1) and
    walking time (edge 2) per connected pair."""
    rng = random.Random(cfg.seed)
    n_st, L = cfg.stations, cfg.hours

    d_edges = []
    mt_edges = []
    for i in range(1, n_st + 1):
        for j in range(1, n_st + 1):
            if i == j:
                continue
            if rng.random() < cfg.d_density:
                d_edges.append(Edge(i, j, 1, round(rng.uniform(*cfg.distance_range), 2)))
            if rng.random() < cfg.mt_density:
                mt_edges.append(Edge(i, j, 1, round(rng.uniform(*cfg.transit_range), 1)))
                mt_edges.append(Edge(i, j, 2, round(rng.uniform(*cfg.walk_range), 1)))

    counts = [rng.randint(*cfg.capacity) for _ in range(n_st)]
    slices = []
    for t in range(L + 1):
        slice_ = []
        next_counts = []
        for i in range(n_st):
            inflow = rng.randint(0, cfg.flow_max)
            outflow = min(rng.randint(0, cfg.flow_max), counts[i] + inflow)
            slice_.append((float(counts[i]), float(inflow), float(outflow)))
            next_counts.append(counts[i] + inflow - outflow)
        slices.append(slice_)
        counts = next_counts

    trajectory = MasTrajectory.from_states(slices)
    graphs = GraphTrajectory(
        L,
        static={
            "d": MultigraphSnapshot.make("d", True, d_edges),
            "mt": MultigraphSnapshot.make("mt", True, mt_edges),
        },
    )
    return MasRun(trajectory, graphs)


# ---------------------------------------------------------------------------
# CSV ingestion

STATES_HEADER = ["station", "hour", "n", "n_in", "n_out"]
DISTANCES_HEADER = ["src", "dst", "miles"]
TIMES_HEADER = ["src", "dst", "transit_min", "walk_min"]


def _read_rows(path, expected_header: list[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if [h.strip() for h in header] != expected_header:
            raise ValueError(
                f"{path}: header must be {','.join(expected_header)!r}, "
                f"got {','.join(header)!r}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise ValueError(f"{path}: row {lineno}: expected {len(expected_header)} fields")
            rows.append({k: v.strip() for k, v in zip(expected_header, row)})
        return rows


def _num(path, lineno_hint: str, column: str, raw: str, integral: bool = False) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ValueError(f"{path}: {lineno_hint}: column {column!r}: not a number: {raw!r}") from None
    if math.isnan(v):
        raise ValueError(f"{path}: {lineno_hint}: column {column!r}: NaN rejected")
    if integral and v != int(v):
        raise ValueError(f"{path}: {lineno_hint}: column {column!r}: expected integer")
    return v


def ingest_station_csv(states_path, distances_path, times_path) -> MasRun:
    """Assemble a bike-share-shaped run from three CSV files.

    Stations must be 1..N contiguous and every (station, hour) cell present
    for hours 0..L; gaps, duplicates, and NaN values are schema errors with
    row diagnostics.
    """
    cells: dict[tuple[int, int], tuple[float, float, float]] = {}
    for k, row in enumerate(_read_rows(states_path, STATES_HEADER), start=2):
        hint = f"row {k}"
        station = int(_num(states_path, hint, "station", row["station"], integral=True))
        hour = int(_num(states_path, hint, "hour", row["hour"], integral=True))
        if station < 1:
            raise ValueError(f"{states_path}: {hint}: station ids are 1-indexed")
        if hour < 0:
            raise ValueError(f"{states_path}: {hint}: negative hour")
        if (station, hour) in cells:
            raise ValueError(f"{states_path}: {hint}: duplicate (station {station}, hour {hour})")
        cells[(station, hour)] = (
            _num(states_path, hint, "n", row["n"]),
            _num(states_path, hint, "n_in", row["n_in"]),
            _num(states_path, hint, "n_out", row["n_out"]),
        )
    if not cells:
        raise ValueError(f"{states_path}: no data rows")
    stations = {s for s, _ in cells}
    num_agents = max(stations)
    if stations != set(range(1, num_agents + 1)):
        missing = sorted(set(range(1, num_agents + 1)) - stations)
        raise ValueError(f"{states_path}: station ids not contiguous; missing {missing}")
    length = max(t for _, t in cells)
    for s in range(1, num_agents + 1):
        for t in range(length + 1):
            if (s, t) not in cells:
                raise ValueError(f"{states_path}: station {s}: missing hour {t}")

    trajectory = MasTrajectory.from_states(
        [[cells[(s, t)] for s in range(1, num_agents + 1)] for t in range(length + 1)]
    )

    def station_pair(path, hint, row) -> tuple[int, int]:
        src = int(_num(path, hint, "src", row["src"], integral=True))
        dst = int(_num(path, hint, "dst", row["dst"], integral=True))
        for v in (src, dst):
            if not 1 <= v <= num_agents:
                raise ValueError(f"{path}: {hint}: station {v} out of range 1..{num_agents}")
        return src, dst

    d_edges = []
    for k, row in enumerate(_read_rows(distances_path, DISTANCES_HEADER), start=2):
        hint = f"row {k}"
        src, dst = station_pair(distances_path, hint, row)
        d_edges.append(Edge(src, dst, 1, _num(distances_path, hint, "miles", row["miles"])))

    mt_edges = []
    for k, row in enumerate(_read_rows(times_path, TIMES_HEADER), start=2):
        hint = f"row {k}"
        src, dst = station_pair(times_path, hint, row)
        mt_edges.append(Edge(src, dst, 1, _num(times_path, hint, "transit_min", row["transit_min"])))
        mt_edges.append(Edge(src, dst, 2, _num(times_path, hint, "walk_min", row["walk_min"])))

    graphs = GraphTrajectory(
        length,
        static={
            "d": MultigraphSnapshot.make("d", True, d_edges),
            "mt": MultigraphSnapshot.make("mt", True, mt_edges),
        },
    )
    return MasRun(trajectory, graphs)


def export_station_csv(run: MasRun, states_path, distances_path, times_path):
    """Inverse of ingestion for bike-shaped runs (static d and mt graphs);
    re-ingesting the written files reproduces the run exactly."""
    traj = run.trajectory
    if traj.state_dim != 3:
        raise ValueError("station export expects [n, n_in, n_out] states")
    with open(states_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(STATES_HEADER)
        for t in range(traj.length + 1):
            for s in range(1, traj.num_agents + 1):
                n, n_in, n_out = traj.state(s, t)
                w.writerow([s, t, repr(n), repr(n_in), repr(n_out)])
    d = run.graphs.at("d", 0)
    with open(distances_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(DISTANCES_HEADER)
        for e in sorted(d.edges):
            w.writerow([e.src, e.dst, repr(e.weight)])
    mt = run.graphs.at("mt", 0)
    by_pair: dict[tuple[int, int], dict[int, float]] = {}
    for e in mt.edges:
        by_pair.setdefault((e.src, e.dst), {})[e.index] = e.weight
    with open(times_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TIMES_HEADER)
        for (src, dst), pair in sorted(by_pair.items()):
            if set(pair) != {1, 2}:
                raise ValueError(f"pair ({src}, {dst}) must carry edges 1 and 2")
            w.writerow([src, dst, repr(pair[1]), repr(pair[2])])
