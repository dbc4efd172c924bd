"""Embedded simple plane graphs via rotation systems.

A plane graph is stored as a rotation system: for every vertex, the
counterclockwise cyclic sequence of its neighbours (as seen from outside
the sphere).  Faces are the orbits of the face-tracing permutation
``dart -> reverse dart, then next in rotation``; with counterclockwise
rotations this traces every face exactly once.  Construction checks
simplicity, connectivity and the Euler formula V - E + F = 2, so a
rotation table that encodes a higher-genus embedding is rejected.

Vertices are opaque strings.  Darts are ordered pairs ``(tail, head)``;
every edge contributes two darts.  All values are immutable after
construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import Disconnected, NotSimple, NotSpherical, Unreachable

Dart = tuple[str, str]
Edge = frozenset


def edge_key(u: str, v: str) -> frozenset:
    """Undirected edge as a frozenset of its two endpoints."""
    return frozenset((u, v))


class PlaneGraph:
    """Simple connected graph with a sphere embedding given by rotations."""

    __slots__ = ("vertices", "rotation", "adj", "edges", "faces",
                 "dart_face", "_nbr_pos")

    def __init__(self, rotation_table: Mapping[str, Sequence[str]]):
        rotation: dict[str, tuple[str, ...]] = {}
        for v, nbrs in rotation_table.items():
            v = str(v)
            nbrs = tuple(str(w) for w in nbrs)
            if v in nbrs:
                raise NotSimple(f"loop at vertex {v!r}")
            if len(set(nbrs)) != len(nbrs):
                raise NotSimple(f"parallel edge at vertex {v!r}")
            rotation[v] = nbrs
        for v, nbrs in rotation.items():
            for w in nbrs:
                if w not in rotation:
                    raise NotSimple(f"dart {v!r}->{w!r} points outside the vertex set")
                if v not in rotation[w]:
                    raise NotSimple(f"dart {v!r}->{w!r} has no reverse dart")
        # rotations are cyclic: store the representative starting at the
        # least neighbour so equal embeddings serialize identically
        for v, nbrs in rotation.items():
            if nbrs:
                k = nbrs.index(min(nbrs))
                rotation[v] = nbrs[k:] + nbrs[:k]

        self.vertices: tuple[str, ...] = tuple(sorted(rotation))
        self.rotation: dict[str, tuple[str, ...]] = rotation
        self.adj: dict[str, frozenset] = {v: frozenset(n) for v, n in rotation.items()}
        self.edges: frozenset = frozenset(edge_key(v, w)
                                          for v in rotation for w in rotation[v])
        self._nbr_pos: dict[str, dict[str, int]] = {
            v: {w: i for i, w in enumerate(nbrs)} for v, nbrs in rotation.items()
        }

        if not self.vertices:
            raise Disconnected("empty graph")
        self._check_connected()
        self.faces, self.dart_face = self._trace_faces()

        v_count, e_count, f_count = len(self.vertices), len(self.edges), len(self.faces)
        if v_count - e_count + f_count != 2:
            raise NotSpherical(
                f"V - E + F = {v_count} - {e_count} + {f_count} != 2")

    # -- construction helpers -------------------------------------------------

    def _check_connected(self) -> None:
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for w in self.rotation[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self.vertices):
            raise Disconnected(f"{len(self.vertices) - len(seen)} vertices unreachable")

    def next_in_face(self, dart: Dart) -> Dart:
        """Face-tracing step: reverse the dart, then next in rotation."""
        u, v = dart
        nbrs = self.rotation[v]
        return (v, nbrs[(self._nbr_pos[v][u] + 1) % len(nbrs)])

    def _trace_faces(self) -> tuple[tuple[tuple[Dart, ...], ...], dict[Dart, int]]:
        remaining = {(v, w) for v in self.rotation for w in self.rotation[v]}
        faces = []
        while remaining:
            start = min(remaining)
            cycle = [start]
            remaining.discard(start)
            d = self.next_in_face(start)
            while d != start:
                cycle.append(d)
                remaining.discard(d)
                d = self.next_in_face(d)
            faces.append(canonical_cycle(cycle))
        faces.sort()
        dart_face = {}
        for i, f in enumerate(faces):
            for d in f:
                dart_face[d] = i
        return tuple(faces), dart_face

    # -- queries ---------------------------------------------------------------

    def degree(self, v: str) -> int:
        return len(self.rotation[v])

    def has_edge(self, u: str, v: str) -> bool:
        return v in self.adj.get(u, frozenset())

    def darts(self) -> Iterable[Dart]:
        for v in self.vertices:
            for w in self.rotation[v]:
                yield (v, w)

    def face_of_dart(self, dart: Dart) -> int:
        return self.dart_face[dart]

    def serialize(self) -> str:
        """Canonical sorted serialization; equality proxy."""
        parts = [f"{v}:({','.join(self.rotation[v])})" for v in self.vertices]
        return ";".join(parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, PlaneGraph) and self.serialize() == other.serialize()

    def __hash__(self) -> int:
        return hash(self.serialize())

    def __repr__(self) -> str:
        return (f"PlaneGraph(V={len(self.vertices)}, E={len(self.edges)}, "
                f"F={len(self.faces)})")

    def to_rotation_dict(self) -> dict[str, list[str]]:
        return {v: list(self.rotation[v]) for v in self.vertices}


def build_plane_graph(vertex_list: Iterable[str],
                      rotation_table: Mapping[str, Sequence[str]]) -> PlaneGraph:
    """Build a PlaneGraph and verify it is simple, connected and spherical.

    ``vertex_list`` fixes the vertex set; isolated vertices are rejected by
    the connectivity check (except the trivial one-vertex graph, which has
    no darts and is not representable; we reject it as Disconnected).
    """
    vertices = [str(v) for v in vertex_list]
    if len(set(vertices)) != len(vertices):
        raise NotSimple("duplicate vertex identifiers")
    table = {v: tuple(rotation_table.get(v, ())) for v in vertices}
    extra = set(rotation_table) - set(vertices)
    if extra:
        raise NotSimple(f"rotation table mentions unknown vertices {sorted(extra)}")
    if any(len(nbrs) == 0 for nbrs in table.values()) and len(vertices) > 1:
        raise Disconnected("isolated vertex")
    return PlaneGraph(table)


def canonical_cycle(darts: Sequence[Dart]) -> tuple[Dart, ...]:
    """Rotate a dart cycle so the lexicographically least dart comes first."""
    k = darts.index(min(darts))
    return tuple(darts[k:]) + tuple(darts[:k])


# -- embedded cycles ----------------------------------------------------------

class EmbeddedCycle:
    """A simple closed curve in a plane graph, compared as an edge set."""

    __slots__ = ("vertices", "edge_set")

    def __init__(self, vertex_cycle: Sequence[str]):
        seq = tuple(vertex_cycle)
        if len(seq) < 3 or len(set(seq)) != len(seq):
            raise ValueError(f"not a simple cycle: {seq}")
        self.vertices = _canonical_vertex_cycle(seq)
        self.edge_set = frozenset(edge_key(seq[i], seq[(i + 1) % len(seq)])
                                  for i in range(len(seq)))

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, edge) -> bool:
        return edge in self.edge_set

    def __eq__(self, other) -> bool:
        return isinstance(other, EmbeddedCycle) and self.edge_set == other.edge_set

    def __hash__(self) -> int:
        return hash(self.edge_set)

    def __repr__(self) -> str:
        return "Cycle(" + "-".join(self.vertices) + ")"


def _canonical_vertex_cycle(seq: tuple[str, ...]) -> tuple[str, ...]:
    n = len(seq)
    best = None
    for rotated in (seq, tuple(reversed(seq))):
        k = rotated.index(min(rotated))
        cand = rotated[k:] + rotated[:k]
        if best is None or cand < best:
            best = cand
    return best


# -- distances and colourings --------------------------------------------------

def graph_distance(g: PlaneGraph, u: str, v: str) -> int:
    """BFS distance in the edge metric."""
    if u not in g.adj or v not in g.adj:
        raise Unreachable(f"vertex not in graph: {u!r} or {v!r}")
    if u == v:
        return 0
    dist = {u: 0}
    frontier = [u]
    while frontier:
        nxt = []
        for x in frontier:
            for y in sorted(g.adj[x]):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    if y == v:
                        return dist[y]
                    nxt.append(y)
        frontier = nxt
    raise Unreachable(f"no path from {u!r} to {v!r}")


def bfs_distances(g: PlaneGraph, source: str) -> dict[str, int]:
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for x in frontier:
            for y in sorted(g.adj[x]):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    nxt.append(y)
        frontier = nxt
    return dist


@dataclass(frozen=True)
class BipartiteVerdict:
    bipartite: bool
    coloring: Optional[dict[str, int]]       # vertex -> 0/1 when bipartite
    odd_cycle: Optional[EmbeddedCycle]       # witness otherwise


def is_bipartite(g: PlaneGraph) -> BipartiteVerdict:
    """Two-colour by BFS; on failure return an odd-cycle witness."""
    color: dict[str, int] = {}
    parent: dict[str, Optional[str]] = {}
    root = g.vertices[0]
    color[root] = 0
    parent[root] = None
    frontier = [root]
    while frontier:
        nxt = []
        for x in frontier:
            for y in sorted(g.adj[x]):
                if y not in color:
                    color[y] = 1 - color[x]
                    parent[y] = x
                    nxt.append(y)
                elif color[y] == color[x]:
                    return BipartiteVerdict(False, None, _odd_cycle(parent, x, y))
        frontier = nxt
    return BipartiteVerdict(True, color, None)


def _odd_cycle(parent: Mapping[str, Optional[str]], x: str, y: str) -> EmbeddedCycle:
    def path_to_root(v: str) -> list[str]:
        out = [v]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return out

    px, py = path_to_root(x), path_to_root(y)
    sx, sy = set(px), set(py)
    meet = next(v for v in px if v in sy)
    cyc = px[:px.index(meet) + 1] + list(reversed(py[:py.index(meet)]))
    return EmbeddedCycle(cyc)


# -- cycle searches -------------------------------------------------------------

@dataclass(frozen=True)
class CycleSearchResult:
    cycles: tuple[EmbeddedCycle, ...]   # through the requested edge
    minimal_length: Optional[int]       # None when the edge lies on no cycle
    girth: Optional[int]                # over the whole graph


def shortest_cycles_through_edge(g: PlaneGraph, e: tuple[str, str],
                                 max_len: int,
                                 all_up_to_max: bool = False) -> CycleSearchResult:
    """All simple cycles through ``e`` of minimal length, deduplicated as edge sets.

    With ``all_up_to_max`` the result contains every simple cycle through
    ``e`` of length <= ``max_len`` instead.  ``max_len`` always caps the
    search depth.
    """
    if max_len < 3:
        raise ValueError("max_len must be >= 3")
    u, v = str(e[0]), str(e[1])
    if not g.has_edge(u, v):
        raise ValueError(f"edge {e} not in graph")

    found: dict[frozenset, EmbeddedCycle] = {}
    # paths v -> u avoiding the edge itself, of length <= max_len - 1
    limit = max_len - 1
    path = [v]
    on_path = {v}

    def extend(x: str) -> None:
        if len(path) - 1 >= limit:
            return
        for y in sorted(g.adj[x]):
            if y == u and len(path) >= 2:
                cyc = EmbeddedCycle([u] + path[::-1])
                found.setdefault(cyc.edge_set, cyc)
                continue
            if y in on_path or y == u:
                continue
            path.append(y)
            on_path.add(y)
            extend(y)
            path.pop()
            on_path.discard(y)

    extend(v)
    cycles = sorted(found.values(), key=lambda c: (len(c), c.vertices))
    minimal = len(cycles[0]) if cycles else None
    if cycles and not all_up_to_max:
        cycles = [c for c in cycles if len(c) == minimal]
    return CycleSearchResult(tuple(cycles), minimal, girth(g))


def girth(g: PlaneGraph, cap: Optional[int] = None) -> Optional[int]:
    """Length of a shortest cycle, or None for an acyclic graph.

    With ``cap``, BFS trees are cut off at the depth needed to detect any
    cycle of length < cap, so the result is ``min(girth, cap)``: a return
    value of ``cap`` certifies that no strictly shorter cycle exists.
    """
    best: Optional[int] = cap
    for root in g.vertices:
        dist = {root: 0}
        parent = {root: None}
        frontier = [root]
        while frontier:
            if best is not None and dist[frontier[0]] >= (best + 1) // 2:
                break
            nxt = []
            for x in frontier:
                for y in sorted(g.adj[x]):
                    if y == parent[x]:
                        continue
                    if y in dist:
                        cand = dist[x] + dist[y] + 1
                        if best is None or cand < best:
                            best = cand
                    else:
                        dist[y] = dist[x] + 1
                        parent[y] = x
                        nxt.append(y)
            frontier = nxt
    return best


def all_simple_cycles(g: PlaneGraph, max_len: Optional[int] = None) -> set[frozenset]:
    """Brute-force enumeration of all simple cycles as edge sets.

    Exponential; intended as an oracle on small graphs.
    """
    cap = max_len if max_len is not None else len(g.vertices)
    out: set[frozenset] = set()
    for e in sorted(g.edges, key=sorted):
        u, v = sorted(e)
        res = shortest_cycles_through_edge(g, (u, v), max(cap, 3), all_up_to_max=True)
        for c in res.cycles:
            out.add(c.edge_set)
    return out


# -- embedded automorphisms -----------------------------------------------------

def embedded_automorphisms(g: PlaneGraph,
                           pins: Optional[Mapping[str, str]] = None) -> list[dict[str, str]]:
    """All automorphisms extending ``pins`` that preserve every rotation.

    Orientation-preserving convention: the cyclic order of darts around a
    vertex must map to the cyclic order around its image (vacuous at
    degree <= 2).  Backtracking with constraint propagation: once a vertex
    of degree >= 3 has a mapped neighbour, the rotation forces the images
    of all its other neighbours, and a mapped vertex with a single unmapped
    neighbour forces that neighbour too.
    """
    pins = {str(k): str(v) for k, v in (pins or {}).items()}
    for k, v in pins.items():
        if k not in g.adj or v not in g.adj:
            raise ValueError(f"pin {k!r}->{v!r} not in graph")
    if len(set(pins.values())) != len(pins):
        raise ValueError("pins not injective")

    profile = {v: (g.degree(v), tuple(sorted(g.degree(w) for w in g.adj[v])))
               for v in g.vertices}
    candidates = {v: tuple(w for w in g.vertices if profile[w] == profile[v])
                  for v in g.vertices}

    def propagate(mapping: dict[str, str], inverse: dict[str, str],
                  queue: list[str]) -> bool:
        while queue:
            v = queue.pop()
            w = mapping[v]
            if profile[v] != profile[w]:
                return False
            for n in g.adj[v]:
                if n in mapping and not g.has_edge(w, mapping[n]):
                    return False
            for m in g.adj[w]:
                if m in inverse and not g.has_edge(v, inverse[m]):
                    return False

            def put(x: str, y: str) -> Optional[bool]:
                if x in mapping:
                    return mapping[x] == y
                if y in inverse:
                    return False
                mapping[x] = y
                inverse[y] = x
                queue.append(x)
                queue.extend(n for n in g.adj[x] if n in mapping)
                return None

            if g.degree(v) >= 3:
                anchor = next((n for n in g.adj[v] if n in mapping), None)
                if anchor is not None:
                    rv, rw = g.rotation[v], g.rotation[w]
                    if len(rv) != len(rw):
                        return False
                    aw = mapping[anchor]
                    if aw not in g.adj[w]:
                        return False
                    i0, j0 = rv.index(anchor), rw.index(aw)
                    for t in range(1, len(rv)):
                        res = put(rv[(i0 + t) % len(rv)], rw[(j0 + t) % len(rw)])
                        if res is False:
                            return False
            un_v = [n for n in g.adj[v] if n not in mapping]
            un_w = [m for m in g.adj[w] if m not in inverse]
            if len(un_v) != len(un_w):
                return False
            if len(un_v) == 1:
                if put(un_v[0], un_w[0]) is False:
                    return False
        return True

    results: list[dict[str, str]] = []

    def search(mapping: dict[str, str], inverse: dict[str, str]) -> None:
        if len(mapping) == len(g.vertices):
            results.append(dict(mapping))
            return
        v = next(x for x in g.vertices if x not in mapping)
        for w in candidates[v]:
            if w in inverse:
                continue
            m2, i2 = dict(mapping), dict(inverse)
            m2[v] = w
            i2[w] = v
            seeds = [v] + [n for n in g.adj[v] if n in m2]
            if propagate(m2, i2, seeds):
                search(m2, i2)

    mapping = dict(pins)
    inverse = {v: k for k, v in pins.items()}
    if propagate(mapping, inverse, sorted(pins)):
        search(mapping, inverse)

    results.sort(key=lambda phi: sorted(phi.items()))
    out = []
    for phi in results:
        if _is_embedded_automorphism(g, phi, pins):
            out.append(phi)
    return out


def _is_embedded_automorphism(g: PlaneGraph, phi: Mapping[str, str],
                              pins: Mapping[str, str]) -> bool:
    """Direct recheck: adjacency, rotations and pins all preserved."""
    if set(phi) != set(g.vertices) or set(phi.values()) != set(g.vertices):
        return False
    if any(phi[k] != v for k, v in pins.items()):
        return False
    for u in g.vertices:
        if {phi[w] for w in g.adj[u]} != set(g.adj[phi[u]]):
            return False
        if g.degree(u) > 2:
            image = [phi[w] for w in g.rotation[u]]
            target = list(g.rotation[phi[u]])
            k = target.index(image[0])
            n = len(target)
            if any(target[(k + i) % n] != image[i] for i in range(n)):
                return False
    return True


def _recheck_automorphism(g: PlaneGraph, phi: Mapping[str, str],
                          pins: Mapping[str, str]) -> None:
    assert set(phi) == set(g.vertices)
    assert set(phi.values()) == set(g.vertices)
    for k, v in pins.items():
        assert phi[k] == v
    for u in g.vertices:
        assert {phi[w] for w in g.adj[u]} == set(g.adj[phi[u]])
        if g.degree(u) > 2:
            image = [phi[w] for w in g.rotation[u]]
            target = list(g.rotation[phi[u]])
            k = target.index(image[0])
            n = len(target)
            assert all(target[(k + i) % n] == image[i] for i in range(n))


# -- induced subgraphs and region assignment ------------------------------------

def induced_plane_subgraph(g: PlaneGraph, edges: Iterable[frozenset]) -> PlaneGraph:
    """Plane subgraph spanned by ``edges``, rotations induced from ``g``."""
    edge_set = set(edges)
    keep: dict[str, list[str]] = {}
    for e in edge_set:
        u, v = sorted(e)
        keep.setdefault(u, [])
        keep.setdefault(v, [])
    for v in keep:
        keep[v] = [w for w in g.rotation[v] if edge_key(v, w) in edge_set]
    return PlaneGraph(keep)


def assign_faces_to_regions(fine: PlaneGraph, coarse: PlaneGraph) -> dict[int, int]:
    """Map each face of ``fine`` to the face of ``coarse`` containing it.

    ``coarse`` must be an embedded subgraph of ``fine`` (same vertex names,
    rotations induced).  Seeds come from shared darts; regions grow across
    edges of ``fine`` missing from ``coarse``.
    """
    region: dict[int, int] = {}
    for d in coarse.dart_face:
        f = fine.dart_face.get(d)
        if f is None:
            raise ValueError(f"coarse dart {d} missing from fine graph")
        r = coarse.dart_face[d]
        if region.setdefault(f, r) != r:
            raise ValueError(f"inconsistent region seed at face {f}")
    # adjacency across new edges
    pending = list(region)
    side: dict[Dart, int] = dict(fine.dart_face)
    while pending:
        f = pending.pop()
        for d in fine.faces[f]:
            u, v = d
            if edge_key(u, v) in coarse.edges:
                continue
            g2 = side[(v, u)]
            if g2 not in region:
                region[g2] = region[f]
                pending.append(g2)
            elif region[g2] != region[f]:
                raise ValueError("region propagation conflict")
    if len(region) != len(fine.faces):
        raise ValueError("region assignment incomplete")
    return region


# -- exports --------------------------------------------------------------------

def to_dot(g: PlaneGraph, coloring: Optional[Mapping[str, int]] = None,
           highlight_edge: Optional[tuple[str, str]] = None) -> str:
    """Graphviz DOT export; bipartite classes as two fill colours."""
    lines = ["graph plane_graph {", "  node [style=filled];"]
    palette = {0: "lightblue", 1: "lightsalmon"}
    for v in g.vertices:
        fill = palette.get(coloring.get(v), "white") if coloring else "white"
        lines.append(f'  "{v}" [fillcolor={fill}];')
    hl = edge_key(*highlight_edge) if highlight_edge else None
    for e in sorted(g.edges, key=sorted):
        u, v = sorted(e)
        attr = " [color=red, penwidth=2.5]" if hl == e else ""
        lines.append(f'  "{u}" -- "{v}"{attr};')
    lines.append("}")
    return "\n".join(lines)
