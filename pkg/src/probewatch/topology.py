"""Network topology model and shortest-path routing.

A topology is an undirected graph of routers with weighted links.  Routing
is all-pairs shortest path under the effective weights (base weights plus
overrides) restricted to the enabled links.  Equal-cost ties are broken by
the lexicographically smallest router-id sequence, applied in the canonical
direction (smaller endpoint id first) so that routes stay symmetric.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass


class TopologyError(ValueError):
    """Malformed or inconsistent topology input."""


def link_key(a: str, b: str) -> tuple[str, str]:
    """Canonical unordered-pair key for a link."""
    return (a, b) if a <= b else (b, a)


def link_name(key: tuple[str, str]) -> str:
    return f"{key[0]}-{key[1]}"


def parse_link_name(text: str) -> tuple[str, str]:
    a, sep, b = text.partition("-")
    if not sep or not a or not b:
        raise TopologyError(f"bad link name {text!r}, expected <a>-<b>")
    return link_key(a, b)


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    weight: float
    capacity_bps: float
    prop_delay_s: float
    buffer_pkts: int

    @property
    def key(self) -> tuple[str, str]:
        return link_key(self.a, self.b)


@dataclass(frozen=True)
class Path:
    routers: tuple[str, ...]

    @property
    def hop_count(self) -> int:
        return len(self.routers) - 1

    def reversed(self) -> "Path":
        return Path(tuple(reversed(self.routers)))


class Topology:
    """Immutable validated topology."""

    def __init__(self, routers, links):
        routers = tuple(sorted(set(routers)))
        if not routers:
            raise TopologyError("topology has no routers")
        seen: dict[tuple[str, str], Link] = {}
        for ln in links:
            if ln.a == ln.b:
                raise TopologyError(f"self-loop on {ln.a}")
            for end in (ln.a, ln.b):
                if end not in routers:
                    raise TopologyError(f"link references unknown router {end}")
            if ln.key in seen:
                raise TopologyError(f"duplicate link {link_name(ln.key)}")
            if ln.weight <= 0 or ln.capacity_bps <= 0 or ln.prop_delay_s <= 0:
                raise TopologyError(
                    f"link {link_name(ln.key)}: weight/capacity/delay must be positive"
                )
            if ln.buffer_pkts < 1:
                raise TopologyError(f"link {link_name(ln.key)}: buffer must be >= 1")
            seen[ln.key] = ln
        self.routers = routers
        self.links = {k: seen[k] for k in sorted(seen)}
        adj: dict[str, list[str]] = {r: [] for r in routers}
        for (a, b) in self.links:
            adj[a].append(b)
            adj[b].append(a)
        self._adj = {r: tuple(sorted(ns)) for r, ns in adj.items()}
        if len(routers) > 1 and not self._connected():
            raise TopologyError("graph is not connected")

    def _connected(self) -> bool:
        seen = {self.routers[0]}
        stack = [self.routers[0]]
        while stack:
            for n in self._adj[stack.pop()]:
                if n not in seen:
                    seen.add(n)
                    stack.append(n)
        return len(seen) == len(self.routers)

    def neighbors(self, r: str) -> tuple[str, ...]:
        return self._adj[r]

    def degree(self, r: str) -> int:
        return len(self._adj[r])

    def incident_links(self, r: str) -> list[tuple[str, str]]:
        return [link_key(r, n) for n in self._adj[r]]

    def total_capacity_bps(self) -> float:
        return sum(ln.capacity_bps for ln in self.links.values())

    def __contains__(self, router: str) -> bool:
        return router in self._adj


def parse_topology(text: str) -> Topology:
    """Parse the plain-text topology format.

    Grammar (one record per line, '#' starts a comment):
        node <id>
        link <idA> <idB> <weight> <capacity_bps> <prop_delay_s> <buffer_pkts>
    """
    routers: list[str] = []
    links: list[Link] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "node":
            if len(parts) != 2:
                raise TopologyError(f"line {lineno}: expected 'node <id>'")
            routers.append(parts[1])
        elif kind == "link":
            if len(parts) != 7:
                raise TopologyError(
                    f"line {lineno}: expected 'link <a> <b> <weight> "
                    f"<capacity_bps> <prop_delay_s> <buffer_pkts>'"
                )
            try:
                links.append(
                    Link(
                        a=parts[1],
                        b=parts[2],
                        weight=float(parts[3]),
                        capacity_bps=float(parts[4]),
                        prop_delay_s=float(parts[5]),
                        buffer_pkts=int(parts[6]),
                    )
                )
            except ValueError as exc:
                raise TopologyError(f"line {lineno}: {exc}") from exc
        else:
            raise TopologyError(f"line {lineno}: unknown record {kind!r}")
    return Topology(routers, links)


def topology_to_text(topo: Topology) -> str:
    out = ["# topology v1"]
    for r in topo.routers:
        out.append(f"node {r}")
    for key in sorted(topo.links):
        ln = topo.links[key]
        out.append(
            f"link {ln.a} {ln.b} {ln.weight!r} {ln.capacity_bps!r} "
            f"{ln.prop_delay_s!r} {ln.buffer_pkts}"
        )
    return "\n".join(out) + "\n"


_REL_TOL = 1e-9


class RoutingState:
    """All-pairs shortest paths under effective weights and enabled links.

    Pure value: recomputing with the same inputs yields the identical route
    table.  Unroutable pairs map to ``None``.
    """

    def __init__(self, base: Topology, weight_overrides=None, disabled_links=None):
        self.base = base
        self.weight_overrides = dict(weight_overrides or {})
        self.disabled_links = frozenset(disabled_links or ())
        for k in list(self.weight_overrides) + list(self.disabled_links):
            if k not in base.links:
                raise TopologyError(f"unknown link {link_name(k)}")
        for k, w in self.weight_overrides.items():
            if w <= 0:
                raise TopologyError(f"override weight for {link_name(k)} must be positive")
        self._routes: dict[tuple[str, str], Path | None] = {}
        self._compute()

    def effective_weight(self, key: tuple[str, str]) -> float:
        return self.weight_overrides.get(key, self.base.links[key].weight)

    def enabled(self, key: tuple[str, str]) -> bool:
        return key not in self.disabled_links

    def _adjacency(self) -> dict[str, list[tuple[str, float]]]:
        adj: dict[str, list[tuple[str, float]]] = {r: [] for r in self.base.routers}
        for key in self.base.links:
            if key in self.disabled_links:
                continue
            w = self.effective_weight(key)
            a, b = key
            adj[a].append((b, w))
            adj[b].append((a, w))
        for r in adj:
            adj[r].sort()
        return adj

    def _compute(self) -> None:
        routers = self.base.routers
        adj = self._adjacency()
        dist = {r: self._dijkstra(r, adj) for r in routers}
        for i, s in enumerate(routers):
            self._routes[(s, s)] = Path((s,))
            for d in routers[i + 1:]:
                if math.isinf(dist[s][d]):
                    self._routes[(s, d)] = None
                    self._routes[(d, s)] = None
                    continue
                path = self._lex_path(s, d, dist, adj)
                self._routes[(s, d)] = path
                self._routes[(d, s)] = path.reversed()

    @staticmethod
    def _dijkstra(src: str, adj) -> dict[str, float]:
        dist = {r: math.inf for r in adj}
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in adj[u]:
                nd = d + w
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist

    @staticmethod
    def _lex_path(s: str, d: str, dist, adj) -> Path:
        # Greedy front-first construction: at each node take the smallest
        # neighbor that still lies on some shortest s->d path.  Front-minimal
        # choices minimize the whole sequence lexicographically.
        total = dist[s][d]
        tol = _REL_TOL * (1.0 + abs(total))
        path = [s]
        u = s
        done = 0.0
        while u != d:
            for v, w in adj[u]:  # sorted by id
                if abs(done + w + dist[v][d] - total) <= tol:
                    path.append(v)
                    done += w
                    u = v
                    break
            else:
                raise RuntimeError("shortest-path reconstruction failed")
        return Path(tuple(path))

    def route(self, src: str, dst: str) -> Path | None:
        if src not in self.base._adj or dst not in self.base._adj:
            raise TopologyError(f"unknown router in pair ({src}, {dst})")
        return self._routes[(src, dst)]

    def cost(self, src: str, dst: str) -> float | None:
        path = self.route(src, dst)
        if path is None:
            return None
        return sum(
            self.effective_weight(link_key(a, b))
            for a, b in zip(path.routers, path.routers[1:])
        )

    def hop_distance(self, src: str, dst: str) -> int | None:
        path = self.route(src, dst)
        return None if path is None else path.hop_count

    @property
    def routes(self) -> dict[tuple[str, str], Path | None]:
        return dict(self._routes)


def recompute_routes(topology: Topology, overrides=None, disabled=None) -> RoutingState:
    """Pure routing recomputation; unroutable pairs are data, not errors."""
    return RoutingState(topology, overrides, disabled)
