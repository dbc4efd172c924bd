"""Finite cores of simplicial branched coverings and iterated pullback.

A core is a pair of embedded graphs g0 <= g1 together with a vertex map
g1 -> g0 and local degrees.  The map is the restriction of a degree-d
branched covering of the sphere whose critical points are vertices, so
pulling the top level back through the covering refines each face by a
copy of the pattern found in its image face.  Towers built this way obey
exact count recursions: E' = d*E, V' = d*V - (2d - 2), F' = d*F.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import (EdgeNotAbsorbed, MultipleFixedEdges, NoFixedEdge, NoLift,
                     PatternMismatch)
from .plane_graph import (Dart, PlaneGraph, assign_faces_to_regions,
                          canonical_cycle, edge_key)


@dataclass(frozen=True)
class CoreSpec:
    """Finite core F: g1 -> g0 of a degree-d simplicial branched covering."""

    name: str
    degree: int
    g0: PlaneGraph
    g1: PlaneGraph
    vertex_map: dict[str, str]
    local_degree: dict[str, int]
    fixed_edge: tuple[str, str]

    def map_vertex(self, v: str) -> str:
        return self.vertex_map[v]

    def map_edge(self, e: frozenset) -> frozenset:
        u, v = tuple(e)
        return edge_key(self.vertex_map[u], self.vertex_map[v])

    def map_dart(self, d: Dart) -> Dart:
        return (self.vertex_map[d[0]], self.vertex_map[d[1]])

    def fibers(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {u: [] for u in self.g0.vertices}
        for v in self.g1.vertices:
            u = self.vertex_map.get(v)
            if u in out:
                out[u].append(v)
        for u in out:
            out[u].sort()
        return out

    def e0(self) -> frozenset:
        return edge_key(*self.fixed_edge)


# ---------------------------------------------------------------------------
# validation

RULES = (
    ("containment", "(i) g0 is an embedded subgraph of g1"),
    ("simplicial", "(ii) edges map to edges with distinct endpoints"),
    ("degree_counts", "(iii) Riemann-Hurwitz and fiber saturation"),
    ("rotation_faces", "(iv) rotations and faces compatible with the covering"),
    ("fixed_edge", "(v) the designated edge is fixed by the edge map"),
    ("absorption", "(vi) every edge reaches the fixed edge under iteration"),
    ("critical_cycles", "(vii) both fixed-edge endpoints lie on critical cycles"),
    ("slit_connected", "(viii) g1 minus the open fixed edge stays connected"),
)

ERROR_CODES = {
    "containment": "NotContained",
    "simplicial": "NotSimplicial",
    "degree_counts": "DegreeCountViolation",
    "rotation_faces": "RotationFaceViolation",
    "fixed_edge": "FixedEdgeViolation",
    "absorption": "EdgeNotAbsorbed",
    "critical_cycles": "CriticalCycleViolation",
    "slit_connected": "LevyObstruction",
}


@dataclass
class ValidationReport:
    core_name: str
    results: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)

    def record(self, rule: str, ok: bool, detail: str = "") -> None:
        self.results[rule] = self.results.get(rule, True) and ok
        if not ok and detail:
            self.details[rule] = detail

    @property
    def ok(self) -> bool:
        return all(self.results.values())

    def error_codes(self) -> list[str]:
        return [ERROR_CODES[rule] for rule, good in self.results.items() if not good]

    def to_dict(self) -> dict:
        return {
            "core": self.core_name,
            "passed": self.ok,
            "rules": {rule: {"passed": self.results[rule],
                             "description": desc,
                             **({"detail": self.details[rule]}
                                if rule in self.details else {})}
                      for rule, desc in RULES},
            "errors": self.error_codes(),
        }


def validate_core(spec: CoreSpec) -> ValidationReport:
    """Check the hypotheses the pullback construction relies on, rule by rule."""
    rep = ValidationReport(spec.name)
    g0, g1, f = spec.g0, spec.g1, spec.vertex_map
    d = spec.degree

    # (i) embedded containment: vertices, edges, induced rotations
    ok = set(g0.vertices) <= set(g1.vertices) and g0.edges <= g1.edges
    detail = "" if ok else "vertex or edge of g0 missing from g1"
    if ok:
        for u in g0.vertices:
            induced = tuple(w for w in g1.rotation[u] if edge_key(u, w) in g0.edges)
            if not _cyclic_equal(induced, g0.rotation[u]):
                ok, detail = False, f"rotation of g0 at {u!r} not induced from g1"
                break
    rep.record("containment", ok, detail)

    # (ii) simpliciality
    ok, detail = True, ""
    missing = [v for v in g1.vertices if v not in f or f[v] not in g0.adj]
    if missing:
        ok, detail = False, f"vertex map undefined or off-target at {missing[:3]}"
    else:
        for e in g1.edges:
            u, v = tuple(e)
            if f[u] == f[v]:
                ok, detail = False, f"edge {sorted(e)} collapses to a vertex"
                break
            if not g0.has_edge(f[u], f[v]):
                ok, detail = False, f"edge {sorted(e)} maps outside g0"
                break
    rep.record("simplicial", ok, detail)
    if not rep.ok:
        for rule, _ in RULES:
            rep.results.setdefault(rule, False)
            rep.details.setdefault(rule, "skipped: structural rules failed")
        return rep

    # (iii) Riemann-Hurwitz and fiber saturation
    branching = sum(spec.local_degree.get(v, 1) - 1 for v in g1.vertices)
    rep.record("degree_counts", branching == 2 * d - 2,
               f"sum of (local degree - 1) = {branching}, expected {2 * d - 2}")
    fib = spec.fibers()
    for u in g0.vertices:
        total = sum(spec.local_degree.get(v, 1) for v in fib[u])
        rep.record("degree_counts", total == d,
                   f"fiber of {u!r} has total local degree {total}, expected {d}")

    # (iv) rotation compatibility and face covering
    for v in g1.vertices:
        e_v = spec.local_degree.get(v, 1)
        base = g0.rotation[f[v]]
        image = tuple(f[w] for w in g1.rotation[v])
        if len(image) != e_v * len(base):
            rep.record("rotation_faces", False,
                       f"degree at {v!r} is {len(image)}, expected {e_v}x{len(base)}")
            continue
        rep.record("rotation_faces", _cyclic_equal(image, base * e_v),
                   f"rotation at {v!r} does not cover rotation at {f[v]!r} "
                   f"{e_v} times")
    face_pre: dict[int, int] = {i: 0 for i in range(len(g0.faces))}
    for cyc in g1.faces:
        img = [spec.map_dart(dart) for dart in cyc]
        target = g0.dart_face.get(img[0])
        if target is None or canonical_cycle(img) != g0.faces[target]:
            rep.record("rotation_faces", False,
                       f"face {cyc[0]}... does not map bijectively onto a face of g0")
        else:
            face_pre[target] += 1
    for i, count in face_pre.items():
        rep.record("rotation_faces", count == d,
                   f"face {i} of g0 has {count} preimage faces, expected {d}")

    # (v) fixed edge
    e0 = spec.e0()
    if e0 not in g0.edges or e0 not in g1.edges:
        rep.record("fixed_edge", False, "designated fixed edge not present")
    else:
        rep.record("fixed_edge", spec.map_edge(e0) == e0,
                   "designated edge is not fixed by the induced edge map")

    # (vi) absorption
    if rep.results.get("fixed_edge", False):
        try:
            dyn = edge_dynamics(spec)
            rep.record("absorption", True)
        except (NoFixedEdge, MultipleFixedEdges, EdgeNotAbsorbed) as exc:
            rep.record("absorption", False, exc.message)
    else:
        rep.record("absorption", False, "skipped: no fixed edge")

    # (vii) critical cycles
    for endpoint in spec.fixed_edge:
        cyc = _vertex_cycle_through(f, endpoint)
        if cyc is None:
            rep.record("critical_cycles", False,
                       f"{endpoint!r} is not on a cycle of the vertex map")
        else:
            rep.record("critical_cycles",
                       any(spec.local_degree.get(v, 1) >= 2 for v in cyc),
                       f"cycle of {endpoint!r} contains no critical vertex")

    # (viii) g1 - Int(E0) connected
    rep.record("slit_connected", _connected_without_edge(g1, e0),
               "g1 minus the open fixed edge is disconnected (Levy cycle)")
    return rep


def _cyclic_equal(a: Sequence, b: Sequence) -> bool:
    if len(a) != len(b):
        return False
    if not a:
        return True
    n = len(a)
    doubled = tuple(b) + tuple(b)
    first = a[0]
    for k in range(n):
        if doubled[k] == first and doubled[k:k + n] == tuple(a):
            return True
    return False


def _vertex_cycle_through(f: Mapping[str, str], v: str) -> Optional[list[str]]:
    """The periodic cycle of the vertex map through v, or None if v is strictly
    pre-periodic."""
    seen = {v: 0}
    orbit = [v]
    cur = v
    while True:
        cur = f.get(cur)
        if cur is None:
            return None
        if cur in seen:
            cycle = orbit[seen[cur]:]
            return cycle if v in cycle else None
        seen[cur] = len(orbit)
        orbit.append(cur)


def _connected_without_edge(g: PlaneGraph, e: frozenset) -> bool:
    u, v = tuple(e)
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        for y in g.adj[x]:
            if edge_key(x, y) == e:
                continue
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(g.vertices)


# ---------------------------------------------------------------------------
# edge dynamics

@dataclass(frozen=True)
class EdgeDynamics:
    edge_map: dict[frozenset, frozenset]
    steps_to_fixed: dict[frozenset, int]
    fixed_edge: frozenset

    def to_dict(self) -> dict:
        def fmt(e):
            return sorted(e)
        return {
            "fixed_edge": fmt(self.fixed_edge),
            "steps": {"-".join(fmt(e)): n for e, n in
                      sorted(self.steps_to_fixed.items(),
                             key=lambda kv: (kv[1], sorted(kv[0])))},
        }


def edge_dynamics(spec: CoreSpec) -> EdgeDynamics:
    """Induced map on edges, absorption step counts, unique fixed edge."""
    emap = {e: spec.map_edge(e) for e in spec.g1.edges}
    fixed = sorted((e for e in emap if emap[e] == e), key=sorted)
    if not fixed:
        raise NoFixedEdge(f"core {spec.name}: no fixed edge")
    if len(fixed) > 1:
        raise MultipleFixedEdges(
            f"core {spec.name}: fixed edges {[sorted(e) for e in fixed]}")
    e0 = fixed[0]
    bound = len(spec.g1.edges)
    steps: dict[frozenset, int] = {}
    for e in spec.g1.edges:
        cur, n = e, 0
        while cur != e0:
            if n > bound:
                raise EdgeNotAbsorbed(
                    f"edge {sorted(e)} not absorbed within {bound} steps")
            cur = emap.get(cur)
            if cur is None:
                raise EdgeNotAbsorbed(f"edge {sorted(e)} leaves the edge set")
            n += 1
        steps[e] = n
    return EdgeDynamics(emap, steps, e0)


# ---------------------------------------------------------------------------
# graph towers and pullback

@dataclass
class GraphTower:
    """Levels G^0 <= G^1 <= ... with one global covering map on vertices.

    ``vertex_map`` sends every vertex of level j+1 to its image in level j
    (on shared vertices the restrictions agree, so one dict suffices).  New
    vertices receive itinerary addresses ``<face id>|<source vertex>``.
    """

    core: CoreSpec
    levels: list[PlaneGraph]
    vertex_map: dict[str, str]
    local_degree: dict[str, int]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level(self, k: int) -> PlaneGraph:
        return self.levels[k]

    def map_vertex(self, v: str) -> str:
        return self.vertex_map[v]

    def map_dart(self, dart: Dart) -> Dart:
        return (self.vertex_map[dart[0]], self.vertex_map[dart[1]])

    def map_edge(self, e: frozenset) -> frozenset:
        u, v = tuple(e)
        return edge_key(self.vertex_map[u], self.vertex_map[v])

    def edge_fiber(self, e: frozenset, k: int) -> list[frozenset]:
        """Edges of level k mapping onto ``e`` (an edge of level k-1)."""
        return [e1 for e1 in self.levels[k].edges if self.map_edge(e1) == e]

    def truncate(self, k: int) -> "GraphTower":
        """View of the tower up to level k (maps keep their extra entries)."""
        if not 1 <= k <= self.depth:
            raise ValueError(f"cannot truncate to depth {k}")
        return GraphTower(core=self.core, levels=self.levels[:k + 1],
                          vertex_map=self.vertex_map,
                          local_degree=self.local_degree)

    def serialize(self) -> str:
        return "||".join(g.serialize() for g in self.levels)


def start_tower(spec: CoreSpec) -> GraphTower:
    return GraphTower(core=spec,
                      levels=[spec.g0, spec.g1],
                      vertex_map=dict(spec.vertex_map),
                      local_degree={v: spec.local_degree.get(v, 1)
                                    for v in spec.g1.vertices})


@dataclass(frozen=True)
class _Pattern:
    """Contents of one coarse face: what a covering sheet must receive."""
    walk: tuple[Dart, ...]                       # dart cycle of the face
    interior_vertices: frozenset
    corner_of_dart: dict[Dart, int]              # fine dart -> walk position
    corner_darts: dict[int, tuple[Dart, ...]]    # position -> ccw fine darts


def pullback(t: GraphTower) -> GraphTower:
    """Extend the tower one level: G^{k+1} = F^{-1}(G^k) by face substitution."""
    coarse = t.levels[-2]
    fine = t.levels[-1]
    d = t.core.degree
    k = t.depth

    region = _regions_or_mismatch(fine, coarse)
    patterns = _extract_patterns(fine, coarse, region)

    new_rotation: dict[str, list[str]] = {v: list(fine.rotation[v])
                                          for v in fine.vertices}
    insertions: dict[Dart, list[str]] = {}
    new_vmap: dict[str, str] = {}

    for u_idx, u_cycle in enumerate(fine.faces):
        image = [t.map_dart(dart) for dart in u_cycle]
        target = coarse.dart_face.get(image[0])
        if target is None or canonical_cycle(image) != coarse.faces[target]:
            raise PatternMismatch(
                f"face L{k}F{u_idx} does not map bijectively onto a coarse face")
        _paste_sheet(fine, u_cycle, f"L{k}F{u_idx}", patterns[target],
                     image[0], new_rotation, insertions, new_vmap)

    for (v, w), extra in insertions.items():
        rot = new_rotation[v]
        idx = rot.index(w)                     # anchors are old darts, unique
        new_rotation[v] = rot[:idx + 1] + extra + rot[idx + 1:]

    try:
        nxt = PlaneGraph({v: tuple(ns) for v, ns in new_rotation.items()})
    except Exception as exc:
        raise PatternMismatch(f"pullback produced an invalid graph: {exc}") from exc

    v0, e0, f0 = len(fine.vertices), len(fine.edges), len(fine.faces)
    v1, e1, f1 = len(nxt.vertices), len(nxt.edges), len(nxt.faces)
    if (e1, v1, f1) != (d * e0, d * v0 - (2 * d - 2), d * f0):
        raise PatternMismatch(
            f"count recursion failed: got (V,E,F)=({v1},{e1},{f1}) from "
            f"({v0},{e0},{f0}) at degree {d}")

    vm = dict(t.vertex_map)
    vm.update(new_vmap)
    ld = dict(t.local_degree)
    for nv in new_vmap:
        ld[nv] = 1
    return GraphTower(core=t.core, levels=t.levels + [nxt],
                      vertex_map=vm, local_degree=ld)


def _paste_sheet(fine: PlaneGraph, u_cycle: tuple[Dart, ...], face_id: str,
                 pat: _Pattern, image0: Dart,
                 new_rotation: dict[str, list[str]],
                 insertions: dict[Dart, list[str]],
                 new_vmap: dict[str, str]) -> None:
    """Copy one pattern into the sheet whose walk covers the pattern's face."""
    m = len(pat.walk)
    offset = pat.walk.index(image0)            # sheet position j <-> walk j+offset

    def resolve(dart: Dart) -> str:
        """Sheet vertex receiving the lift of the pattern dart's tail."""
        tail = dart[0]
        if tail in pat.interior_vertices:
            return f"{face_id}|{tail}"
        pos = pat.corner_of_dart.get(dart)
        if pos is None:
            raise PatternMismatch(f"pattern dart {dart} has no corner on the walk")
        return u_cycle[(pos - offset) % m][1]

    for x in sorted(pat.interior_vertices):
        nv = f"{face_id}|{x}"
        new_vmap[nv] = x
        new_rotation[nv] = [resolve((z, x)) for z in fine.rotation[x]]

    for pos, darts in pat.corner_darts.items():
        if not darts:
            continue
        u_dart = u_cycle[(pos - offset) % m]
        anchor = (u_dart[1], u_dart[0])        # corner sits ccw after this dart
        lifted = [resolve((z, p)) for (p, z) in darts]
        insertions.setdefault(anchor, []).extend(lifted)


def _regions_or_mismatch(fine: PlaneGraph, coarse: PlaneGraph) -> dict[int, int]:
    try:
        return assign_faces_to_regions(fine, coarse)
    except ValueError as exc:
        raise PatternMismatch(str(exc)) from exc


def _extract_patterns(fine: PlaneGraph, coarse: PlaneGraph,
                      region: dict[int, int]) -> dict[int, _Pattern]:
    walk_vertices: dict[int, set[str]] = {
        i: {dart[1] for dart in cyc} for i, cyc in enumerate(coarse.faces)}

    interior_v: dict[int, set[str]] = {i: set() for i in range(len(coarse.faces))}
    for f_idx, r_idx in region.items():
        for dart in fine.faces[f_idx]:
            u, v = dart
            if edge_key(u, v) in coarse.edges:
                continue
            for x in (u, v):
                if x not in walk_vertices[r_idx]:
                    if x in coarse.adj:
                        raise PatternMismatch(
                            f"old vertex {x!r} strays into face {r_idx}")
                    interior_v[r_idx].add(x)

    patterns: dict[int, _Pattern] = {}
    for i, cyc in enumerate(coarse.faces):
        corner_of_dart: dict[Dart, int] = {}
        corner_darts: dict[int, tuple[Dart, ...]] = {}
        m = len(cyc)
        for pos in range(m):
            p = cyc[pos][1]                 # corner vertex at this walk position
            x = cyc[pos][0]                 # entered from x
            y = cyc[(pos + 1) % m][1]       # leaves toward y
            darts = _corner_scan(fine.rotation[p], x, y, p, coarse)
            corner_darts[pos] = darts
            for dd in darts:
                corner_of_dart[dd] = pos
        patterns[i] = _Pattern(
            walk=cyc,
            interior_vertices=frozenset(interior_v[i]),
            corner_of_dart=corner_of_dart,
            corner_darts=corner_darts,
        )
    return patterns


def _corner_scan(rot: Sequence[str], x: str, y: str, p: str,
                 coarse: PlaneGraph) -> tuple[Dart, ...]:
    """Fine darts at p strictly between (p,x) and (p,y) in ccw order."""
    n = len(rot)
    start = rot.index(x)
    out = []
    for step in range(1, n):
        z = rot[(start + step) % n]
        if z == y and edge_key(p, z) in coarse.edges:
            break
        if edge_key(p, z) in coarse.edges:
            # another coarse dart before reaching y: would mean corners overlap
            raise PatternMismatch(
                f"coarse dart ({p!r},{z!r}) interrupts corner ({x!r}->{y!r})")
        out.append((p, z))
    else:
        if x != y:
            raise PatternMismatch(f"corner at {p!r} never closed")
    return tuple(out)


# ---------------------------------------------------------------------------
# path lifting

def lift_path(t: GraphTower, path: Sequence[str], start: str,
              level: Optional[int] = None) -> list[str]:
    """The lift of ``path`` (in level k) through the covering, starting at
    ``start`` (a vertex of level k+1 over the first path vertex).

    At a branch vertex the continuation is the first preimage dart met
    counterclockwise from the incoming dart, which matches the dart
    correspondence of the covering.
    """
    path = [str(v) for v in path]
    if not path:
        raise NoLift("empty path")
    if level is None:
        level = t.depth
    if not 1 <= level <= t.depth:
        raise NoLift(f"no level {level} in this tower")
    upstairs = t.levels[level]
    downstairs = t.levels[level - 1]
    for i in range(len(path) - 1):
        if not downstairs.has_edge(path[i], path[i + 1]):
            raise NoLift(f"({path[i]!r},{path[i + 1]!r}) is not an edge downstairs")
    if start not in upstairs.adj:
        raise NoLift(f"start {start!r} not in level {level}")
    if t.vertex_map.get(start) != path[0]:
        raise NoLift(f"start {start!r} is not in the fiber of {path[0]!r}")
    lifted = [start]
    for i in range(len(path) - 1):
        v, w = path[i], path[i + 1]
        cur = lifted[-1]
        options = [z for z in upstairs.rotation[cur] if t.vertex_map[z] == w]
        if not options:
            raise NoLift(f"no continuation over edge ({v!r},{w!r}) at {cur!r}")
        if len(options) == 1 or len(lifted) == 1:
            nxt = options[0]
        else:
            rot = upstairs.rotation[cur]
            prev = lifted[-2]
            j = rot.index(prev)
            nxt = next(rot[(j + s) % len(rot)] for s in range(1, len(rot) + 1)
                       if t.vertex_map[rot[(j + s) % len(rot)]] == w)
        lifted.append(nxt)
    return lifted


def project_path(t: GraphTower, path: Sequence[str]) -> list[str]:
    return [t.vertex_map[v] for v in path]
