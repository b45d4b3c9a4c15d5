"""Setup-phase planning: sensor partitioning and probe-scheme generation.

The partition grows each sensor greedily around a kernel router (highest
degree first); the probe scheme then connects sensor pairs with roundtrip
probes whose one-way length is exactly ``probes_length`` hops under the
baseline routing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .topology import RoutingState, Topology, TopologyError, recompute_routes


class PlanError(ValueError):
    """Invalid planning input."""


@dataclass(frozen=True)
class Sensor:
    sensor_id: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class SensorMap:
    sensors: tuple[Sensor, ...]

    def __post_init__(self):
        by_router: dict[str, str] = {}
        for s in self.sensors:
            for m in s.members:
                if m in by_router:
                    raise PlanError(f"router {m} assigned to two sensors")
                by_router[m] = s.sensor_id
        object.__setattr__(self, "_by_router", by_router)

    def sensor_of(self, router: str) -> str:
        try:
            return self._by_router[router]
        except KeyError:
            raise PlanError(f"router {router} not in any sensor") from None

    def members_of(self, sensor_id: str) -> tuple[str, ...]:
        for s in self.sensors:
            if s.sensor_id == sensor_id:
                return s.members
        raise PlanError(f"unknown sensor {sensor_id}")

    @property
    def sensor_ids(self) -> tuple[str, ...]:
        return tuple(s.sensor_id for s in self.sensors)


@dataclass(frozen=True)
class ProbeSpec:
    probe_id: str
    src: str
    dst: str
    path: tuple[str, ...]  # roundtrip: src ... dst ... src

    @property
    def one_way_hops(self) -> int:
        return (len(self.path) - 1) // 2

    @property
    def routers_on_path(self) -> frozenset[str]:
        return frozenset(self.path)


@dataclass(frozen=True)
class ProbeScheme:
    probes: tuple[ProbeSpec, ...]

    def __len__(self) -> int:
        return len(self.probes)

    def by_id(self, probe_id: str) -> ProbeSpec:
        for p in self.probes:
            if p.probe_id == probe_id:
                return p
        raise PlanError(f"unknown probe {probe_id}")


@dataclass(frozen=True)
class ProbeTimingConfig:
    t_prs: float
    t_cl: float
    probe_size: int = 64

    def __post_init__(self):
        if self.t_prs <= 0 or self.t_cl <= 0:
            raise PlanError("t_prs and t_cl must be positive")
        if self.t_cl < 10 * self.t_prs:
            raise PlanError("t_cl must be >= 10 * t_prs")
        if self.probe_size <= 0:
            raise PlanError("probe_size must be positive")


def partition_sensors(topology: Topology, max_routers: int) -> SensorMap:
    """Greedy degree-based partition into disjoint connected sensors.

    Routers are ordered by descending degree (id ascending on ties).  Each
    round pops the first remaining router as kernel and pulls the kernel's
    remaining neighbor with the highest current degree (degree within the
    still-unassigned subgraph, id ascending on ties) until the sensor holds
    ``max_routers`` routers or the kernel's neighborhood is exhausted.
    """
    if max_routers < 1:
        raise PlanError("max_routers must be >= 1")
    if not topology.routers:
        raise PlanError("empty topology")
    order = sorted(topology.routers, key=lambda r: (-topology.degree(r), r))
    remaining = set(topology.routers)
    sensors: list[Sensor] = []
    for kernel in order:
        if kernel not in remaining:
            continue
        remaining.discard(kernel)
        members = [kernel]
        while len(members) < max_routers:
            cands = [n for n in topology.neighbors(kernel) if n in remaining]
            if not cands:
                break
            cands.sort(
                key=lambda n: (
                    -sum(1 for x in topology.neighbors(n) if x in remaining),
                    n,
                )
            )
            picked = cands[0]
            remaining.discard(picked)
            members.append(picked)
        sensors.append(Sensor(f"S{len(sensors) + 1}", tuple(members)))
    return SensorMap(tuple(sensors))


def routers_at_distance(
    topology: Topology, r: str, d: int, routing: RoutingState | None = None
) -> set[str]:
    """Routers whose baseline-route hop distance from ``r`` equals ``d``."""
    if r not in topology:
        raise TopologyError(f"unknown router {r}")
    if d < 0:
        raise PlanError("distance must be non-negative")
    routing = routing or recompute_routes(topology)
    return {c for c in topology.routers if routing.hop_distance(r, c) == d}


def generate_probe_scheme(
    topology: Topology,
    sensors: SensorMap,
    probes_length: int,
    routing: RoutingState | None = None,
) -> ProbeScheme:
    """Emit at most one probe per router and per unordered sensor pair.

    Routers are visited in ascending id order; candidates at exactly
    ``probes_length`` hops are scanned in ascending id order, and the first
    one in a different sensor without an existing probe between the two
    sensors wins.  A router with no eligible candidate emits nothing.
    """
    if probes_length < 1:
        raise PlanError("probes_length must be >= 1")
    routing = routing or recompute_routes(topology)
    used_pairs: set[frozenset[str]] = set()
    probes: list[ProbeSpec] = []
    for r in topology.routers:
        src_sensor = sensors.sensor_of(r)
        for c in sorted(routers_at_distance(topology, r, probes_length, routing)):
            dst_sensor = sensors.sensor_of(c)
            pair = frozenset((src_sensor, dst_sensor))
            if dst_sensor == src_sensor or pair in used_pairs:
                continue
            out = routing.route(r, c)
            roundtrip = out.routers + out.reversed().routers[1:]
            probes.append(ProbeSpec(f"{r}->{c}", r, c, roundtrip))
            used_pairs.add(pair)
            break
    return ProbeScheme(tuple(probes))


@dataclass(frozen=True)
class OverheadReport:
    probes_per_sec: float
    bytes_per_sec: float
    pct_of_bandwidth: float


def probe_traffic_report(
    scheme: ProbeScheme, timing: ProbeTimingConfig, topology: Topology
) -> OverheadReport:
    """Aggregate probe traffic volume relative to total link bandwidth."""
    pps = len(scheme) / timing.t_prs
    bps = pps * timing.probe_size
    total = topology.total_capacity_bps()
    pct = 100.0 * bps * 8.0 / total if total > 0 else 0.0
    return OverheadReport(probes_per_sec=pps, bytes_per_sec=bps, pct_of_bandwidth=pct)


def sensors_to_text(sensors: SensorMap) -> str:
    out = ["# sensors v1"]
    for s in sensors.sensors:
        out.append(f"sensor {s.sensor_id} " + " ".join(s.members))
    return "\n".join(out) + "\n"


def sensors_from_text(text: str) -> SensorMap:
    sensors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "sensor" or len(parts) < 3:
            raise PlanError(f"line {lineno}: expected 'sensor <id> <routers...>'")
        sensors.append(Sensor(parts[1], tuple(parts[2:])))
    return SensorMap(tuple(sensors))


def scheme_to_text(scheme: ProbeScheme) -> str:
    out = ["# probes v1"]
    for p in scheme.probes:
        out.append(f"probe {p.probe_id} {p.src} {p.dst} " + " ".join(p.path))
    return "\n".join(out) + "\n"


def scheme_from_text(text: str) -> ProbeScheme:
    probes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "probe" or len(parts) < 5:
            raise PlanError(f"line {lineno}: expected 'probe <id> <src> <dst> <path...>'")
        probes.append(ProbeSpec(parts[1], parts[2], parts[3], tuple(parts[4:])))
    return ProbeScheme(tuple(probes))
