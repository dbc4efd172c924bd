"""Finite-depth analysis of shortest anchored cycles, gaps and symmetry.

Everything here works on a truncation G^k of the infinite preimage graph,
so results carry the depth they were computed at, and quantities that live
on the infinite graph are reported as approximations together with a
stabilization flag (the value agrees with the previous depth).

A cycle through the fixed edge is "resolved" at depth k when its full
one-level preimage is already present, which for a nested tower means the
cycle lies in level k-1.  Sibling verdicts only quantify over resolved
cycles; the boundary cycles are listed separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .branched_cover import GraphTower, lift_path, pullback, start_tower
from .errors import (Inconsistent, LimitExceeded, NotEnoughCycles, OrbitEscape,
                     PatternViolation)
from .per2 import (GasketType, Per2Core, classify_type, critical_loop,
                   loop_labels)
from .plane_graph import (EmbeddedCycle, PlaneGraph, assign_faces_to_regions,
                          edge_key, embedded_automorphisms,
                          induced_plane_subgraph, shortest_cycles_through_edge)


# ---------------------------------------------------------------------------
# anchored shortest cycles

@dataclass(frozen=True)
class AnchoredCycleSet:
    depth: int
    half_length: int
    cycles: tuple[EmbeddedCycle, ...]     # sorted by (orbit index, vertices)
    orbit_index: tuple[int, ...]          # iterations to reach the critical loop
    resolved: tuple[bool, ...]            # full one-level preimage present
    sibling_pairs: tuple[tuple[int, int], ...]

    @property
    def count(self) -> int:
        return len(self.cycles)

    def loop_position(self) -> int:
        return self.orbit_index.index(0)

    def siblings_of(self, i: int) -> list[int]:
        out = []
        for p, q in self.sibling_pairs:
            if p == i:
                out.append(q)
            elif q == i:
                out.append(p)
        return sorted(out)


def shortest_anchored_cycles(t: GraphTower, core: Per2Core) -> AnchoredCycleSet:
    """All shortest cycles through the fixed edge of the top tower level.

    Each found cycle is pushed forward through the covering until it lands
    on the critical loop; a cycle that fails to land there within the depth
    signals an invalid core.
    """
    if t.depth < 1:
        raise NotEnoughCycles("tower must have depth >= 1")
    loop, half = critical_loop(core)
    g = t.level(t.depth)
    found = shortest_cycles_through_edge(g, core.spec.fixed_edge, 2 * half,
                                         all_up_to_max=True)
    cycles = [c for c in found.cycles if len(c) == 2 * half]
    e0 = core.spec.e0()

    indexed = []
    for cyc in cycles:
        j = _orbit_index(t, cyc, loop, limit=t.depth)
        indexed.append((j, cyc))
    indexed.sort(key=lambda item: (item[0], item[1].vertices))

    prev_edges = t.level(t.depth - 1).edges
    resolved = tuple(all(e in prev_edges for e in cyc.edge_set)
                     for _, cyc in indexed)
    pairs = []
    for i in range(len(indexed)):
        for j2 in range(i + 1, len(indexed)):
            meet = indexed[i][1].edge_set & indexed[j2][1].edge_set
            if e0 in meet and len(meet) > 1:
                pairs.append((i, j2))
    return AnchoredCycleSet(
        depth=t.depth, half_length=half,
        cycles=tuple(c for _, c in indexed),
        orbit_index=tuple(j for j, _ in indexed),
        resolved=resolved,
        sibling_pairs=tuple(pairs))


def _orbit_index(t: GraphTower, cyc: EmbeddedCycle, loop: EmbeddedCycle,
                 limit: int) -> int:
    edges = cyc.edge_set
    for j in range(limit + 1):
        if edges == loop.edge_set:
            return j
        edges = frozenset(t.map_edge(e) for e in edges)
        if len(edges) != len(cyc.edge_set):
            raise OrbitEscape(f"iterate {j + 1} of {cyc} is not a cycle")
    raise OrbitEscape(f"{cyc} does not reach the critical loop in {limit} steps")


# ---------------------------------------------------------------------------
# sibling verdicts

@dataclass(frozen=True)
class SiblingReport:
    gasket_type: GasketType
    depth: int
    loop_sibling_count: int
    expected_loop_siblings: int
    pair_count: int
    boundary_cycles: tuple[int, ...]          # unresolved cycle positions
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "type": self.gasket_type.value,
            "depth": self.depth,
            "critical_loop_siblings": self.loop_sibling_count,
            "expected_loop_siblings": self.expected_loop_siblings,
            "sibling_pairs": self.pair_count,
            "boundary_cycles": list(self.boundary_cycles),
            "violations": list(self.violations),
            "passed": self.ok,
        }


_EXPECTED_LOOP_SIBLINGS = {GasketType.I: 0, GasketType.IIA: 1, GasketType.IIB: 2}


def sibling_report(s: AnchoredCycleSet, gasket_type: GasketType,
                   strict: bool = False) -> SiblingReport:
    """Compare the sibling structure against the pattern of the map's type.

    Checked pattern, restricted to resolved cycles (boundary cycles are
    excluded and listed):

    * the critical loop has 0 / 1 / 2 siblings for Types I / IIA / IIB;
    * Type I: no two cycles are siblings at all;
    * Type IIA: a non-loop resolved cycle has a sibling of strictly smaller
      orbit index exactly when it is a direct preimage of the loop (and then
      exactly one);
    * Type IIB: every non-loop resolved cycle has exactly one sibling of
      strictly smaller orbit index.

    Counting only toward smaller orbit index makes the verdict stable under
    deepening: at any finite depth the outward sibling of a cycle may or may
    not be visible yet, while its inward sibling is.
    """
    loop_pos = s.loop_position()
    violations = []
    expected_loop = _EXPECTED_LOOP_SIBLINGS[gasket_type]
    loop_sibs = s.siblings_of(loop_pos)
    if len(loop_sibs) != expected_loop:
        violations.append(
            f"critical loop has {len(loop_sibs)} siblings, expected {expected_loop}")
    if gasket_type is GasketType.I and s.sibling_pairs:
        p, q = s.sibling_pairs[0]
        violations.append(
            f"type I admits no siblings, found pair ({p}, {q})")
    if gasket_type in (GasketType.IIA, GasketType.IIB):
        for i in range(s.count):
            if i == loop_pos or not s.resolved[i]:
                continue
            inward = [j for j in s.siblings_of(i)
                      if s.orbit_index[j] < s.orbit_index[i]]
            want = 1 if (gasket_type is GasketType.IIB or s.orbit_index[i] == 1) \
                else 0
            if len(inward) != want:
                violations.append(
                    f"cycle {i} (orbit index {s.orbit_index[i]}) has "
                    f"{len(inward)} inward siblings, expected {want}")
    report = SiblingReport(
        gasket_type=gasket_type, depth=s.depth,
        loop_sibling_count=len(loop_sibs),
        expected_loop_siblings=expected_loop,
        pair_count=len(s.sibling_pairs),
        boundary_cycles=tuple(i for i in range(s.count) if not s.resolved[i]),
        violations=tuple(violations))
    if strict and violations:
        raise PatternViolation("; ".join(violations))
    return report


# ---------------------------------------------------------------------------
# gaps

@dataclass(frozen=True)
class GapDecomposition:
    depth: int
    union_graph: PlaneGraph
    gap_walks: tuple[tuple, ...]            # dart cycles of the union graph
    r0: int                                  # position of R0 in the ccw fan
    fan: tuple[int, ...]                     # gap indices ccw at the critical point
    face_gap: dict[int, int]                 # face of G^k -> gap index
    vertex_gaps: dict[str, frozenset]
    edge_gaps: dict[frozenset, frozenset]

    def gap_label(self, gap_index: int) -> str:
        return f"R{(self.fan.index(gap_index) - self.fan.index(self.r0)) % len(self.fan)}"

    def interior_vertices(self, gap_index: int) -> set[str]:
        walk = {d[1] for d in self.gap_walks[gap_index]}
        return {v for v, gaps in self.vertex_gaps.items()
                if gaps == frozenset((gap_index,)) and v not in walk}

    def closure_edges(self, gap_index: int) -> set[frozenset]:
        return {e for e, gaps in self.edge_gaps.items() if gap_index in gaps}


def gap_decomposition(t: GraphTower, s: AnchoredCycleSet,
                      core: Per2Core) -> GapDecomposition:
    """Faces of the union of anchored shortest cycles, labelled ccw at a.

    R0 is the gap bounded by the critical loop and its direct preimage; the
    remaining labels follow the counterclockwise order of the fan of gaps
    around the periodic critical point.
    """
    if s.count < 2:
        raise NotEnoughCycles(f"need at least 2 anchored cycles, have {s.count}")
    if classify_type(core) is not GasketType.I:
        raise Inconsistent("gap decomposition is defined for Type I cores")
    g = t.level(s.depth)
    union_edges = set()
    for cyc in s.cycles:
        union_edges |= cyc.edge_set
    u = induced_plane_subgraph(g, union_edges)

    loop_pos = s.loop_position()
    partner = [i for i in range(s.count) if s.orbit_index[i] == 1]
    if len(partner) != 1:
        raise Inconsistent(f"expected a unique direct preimage cycle, "
                           f"got {len(partner)}")
    c0, c1 = s.cycles[loop_pos], s.cycles[partner[0]]
    r0 = _lens_between(u, c0, c1, core.spec.e0())

    a = core.a0
    fan = []
    rot = u.rotation[a]
    for w in rot:
        fan.append(u.dart_face[(w, a)])
    if sorted(fan) != list(range(len(u.faces))):
        raise Inconsistent("gap fan at the critical point is not a clean cycle")

    face_gap = assign_faces_to_regions(g, u)
    vertex_gaps: dict[str, set[int]] = {v: set() for v in g.vertices}
    edge_gaps: dict[frozenset, set[int]] = {e: set() for e in g.edges}
    for f_idx, gap in face_gap.items():
        for dart in g.faces[f_idx]:
            vertex_gaps[dart[1]].add(gap)
            edge_gaps[edge_key(*dart)].add(gap)

    dec = GapDecomposition(
        depth=s.depth, union_graph=u,
        gap_walks=u.faces, r0=r0, fan=tuple(fan),
        face_gap=face_gap,
        vertex_gaps={v: frozenset(gs) for v, gs in vertex_gaps.items()},
        edge_gaps={e: frozenset(gs) for e, gs in edge_gaps.items()})

    b = core.b0
    for walk in u.faces:
        touched = {d[1] for d in walk}
        if not {a, b} <= touched:
            raise Inconsistent("a gap boundary misses an endpoint of the fixed edge")
    return dec


def _lens_between(u: PlaneGraph, c0: EmbeddedCycle, c1: EmbeddedCycle,
                  e0: frozenset) -> int:
    """The face bounded by both cycles' free arcs, away from the fixed edge."""
    allowed = c0.edge_set | c1.edge_set
    hits = []
    for i, walk in enumerate(u.faces):
        edges = {edge_key(*d) for d in walk}
        if (edges <= allowed and e0 not in edges
                and edges & (c0.edge_set - c1.edge_set)
                and edges & (c1.edge_set - c0.edge_set)):
            hits.append(i)
    if len(hits) != 1:
        raise Inconsistent(f"expected one lens between the first two cycles, "
                           f"found {len(hits)}")
    return hits[0]


# ---------------------------------------------------------------------------
# local geodesics

def local_geodesics(g: PlaneGraph, u: str, v: str, max_len: int,
                    node_budget: int = 2_000_000) -> list[list[str]]:
    """All chord-free paths from u to v of length <= max_len.

    A path is chord-free when vertices at index distance >= 2 are never
    adjacent in the ambient graph.  DFS with incremental adjacency pruning;
    the budget guards against exponential blowups.
    """
    if u == v:
        raise ValueError("endpoints must differ")
    if max_len < 1 or max_len > 64:
        raise LimitExceeded(f"max_len {max_len} out of the supported range")
    out: list[list[str]] = []
    path = [u]
    expansions = 0

    def extend(x: str) -> None:
        nonlocal expansions
        for y in sorted(g.adj[x]):
            expansions += 1
            if expansions > node_budget:
                raise LimitExceeded("local geodesic search budget exhausted")
            # chord check: y may touch only the current endpoint x
            if any(g.has_edge(y, p) for p in path[:-1]):
                continue
            if y == v:
                out.append(path + [y])
                continue
            if y in path:
                continue
            if len(path) >= max_len:
                continue
            path.append(y)
            extend(y)
            path.pop()

    extend(u)
    return sorted(out, key=lambda p: (len(p), p))


def brute_force_local_geodesics(g: PlaneGraph, u: str, v: str,
                                max_len: int) -> list[list[str]]:
    """Oracle: enumerate all simple paths, then filter by the chord rule."""
    out = []
    stack = [[u]]
    while stack:
        p = stack.pop()
        if p[-1] == v:
            if _is_local_geodesic(g, p):
                out.append(p)
            continue
        if len(p) - 1 >= max_len:
            continue
        for w in g.adj[p[-1]]:
            if w not in p:
                stack.append(p + [w])
    return sorted(out, key=lambda p: (len(p), p))


def _is_local_geodesic(g: PlaneGraph, path: Sequence[str]) -> bool:
    n = len(path)
    return all(not g.has_edge(path[i], path[j])
               for i in range(n) for j in range(i + 2, n))


# ---------------------------------------------------------------------------
# gap arcs: the N <= K + 2l - 1 data

@dataclass(frozen=True)
class GapArcReport:
    depth: int
    half_length: int
    k_value: Optional[int]                  # shortest qualifying geodesic length
    n_value: Optional[int]                  # shortest qualifying gap arc length
    bound_holds: Optional[bool]             # N <= K + 2l - 1 when both exist
    k_witness: Optional[tuple[str, ...]]
    n_witness: Optional[tuple[str, ...]]
    stabilized: bool                        # values agree with depth-1 run

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "K": self.k_value,
            "N": self.n_value,
            "bound": (None if self.bound_holds is None
                      else bool(self.bound_holds)),
            "bound_statement": "N <= K + 2l - 1",
            "stabilized": self.stabilized,
            "K_witness": list(self.k_witness) if self.k_witness else None,
            "N_witness": list(self.n_witness) if self.n_witness else None,
        }


def r0_arc_search(t: GraphTower, core: Per2Core,
                  with_stabilization: bool = True) -> GapArcReport:
    """Shortest constrained geodesics of the first gap, with the length bound.

    K is the length of the shortest chord-free path from the far critical
    point to an interior vertex of the preimage cycle, staying inside the
    open gap, with no interior vertex adjacent to the periodic critical
    point.  N is the length of the shortest gap arc from the far critical
    point to the periodic one whose lift joins the corresponding fiber
    vertices.  Both are depth-limited approximations.
    """
    k_val, n_val, k_wit, n_wit = _r0_values(t, core)
    stabilized = False
    if with_stabilization and t.depth >= 2:
        try:
            prev_k, prev_n, _, _ = _r0_values(t.truncate(t.depth - 1), core)
            stabilized = (prev_k, prev_n) == (k_val, n_val) and k_val is not None
        except (NotEnoughCycles, Inconsistent):
            stabilized = False
    bound = None
    if k_val is not None and n_val is not None:
        bound = n_val <= k_val + 2 * core_half(core) - 1
    return GapArcReport(depth=t.depth, half_length=core_half(core),
                        k_value=k_val, n_value=n_val, bound_holds=bound,
                        k_witness=tuple(k_wit) if k_wit else None,
                        n_witness=tuple(n_wit) if n_wit else None,
                        stabilized=stabilized)


def core_half(core: Per2Core) -> int:
    return critical_loop(core)[1]


def _r0_values(t: GraphTower, core: Per2Core):
    s = shortest_anchored_cycles(t, core)
    dec = gap_decomposition(t, s, core)
    g = t.level(t.depth)
    half = s.half_length

    labels = loop_labels(core)               # a_0 ... a_{2l-2}, b_0
    a0, b0, al = labels[0], labels[-1], labels[half]
    partner = s.cycles[[i for i in range(s.count)
                        if s.orbit_index[i] == 1][0]]
    fiber_label = {}                          # b_i names on the preimage cycle
    for v in partner.vertices:
        img = t.vertex_map[v]
        if img in labels and v not in (a0, b0):
            fiber_label[labels.index(img)] = v
    b_targets = [fiber_label[i] for i in range(1, 2 * half - 1)
                 if i in fiber_label]
    b_l = fiber_label.get(half)

    interior = dec.interior_vertices(dec.r0)
    closure_vertices = interior | {d[1] for d in dec.gap_walks[dec.r0]}
    loop_vertices = set(labels)

    # K: chord-free path a_l -> b_i, interior strictly inside the gap,
    # no interior vertex adjacent to a_0
    k_val, k_wit = None, None
    cap = min(len(closure_vertices), 40)
    for length in range(1, cap + 1):
        hits = []
        for target in b_targets:
            hits.extend(_constrained_geodesics(
                g, al, target, length,
                allowed_interior=lambda x: x in interior and not g.has_edge(x, a0)))
        if hits:
            best = min(hits, key=lambda p: (len(p), p))
            k_val, k_wit = len(best) - 1, best
            break

    # N: gap arc a_l -> a_0 with interior off the critical loop, whose lift
    # starts at b_l and ends at the second preimage of a_0
    n_val = n_wit = None
    if b_l is not None:
        deep = pullback(t)
        a1 = labels[1]
        n_cap = min(len(closure_vertices),
                    (k_val + 2 * half - 1 + 2 * half) if k_val else 40)
        for length in range(1, n_cap + 1):
            arcs = _constrained_geodesics(
                g, al, a0, length,
                allowed_interior=lambda x: (x in closure_vertices
                                            and x not in loop_vertices))
            for arc in sorted(arcs, key=lambda p: (len(p), p)):
                lifted = lift_path(deep, arc, b_l, level=deep.depth)
                if lifted[-1] == a1:
                    n_val, n_wit = len(arc) - 1, arc
                    break
            if n_val is not None:
                break
    return k_val, n_val, k_wit, n_wit


def _constrained_geodesics(g: PlaneGraph, u: str, v: str, exact_len: int,
                           allowed_interior) -> list[list[str]]:
    """Chord-free u-v paths of exactly the given length with interior filter."""
    out: list[list[str]] = []
    path = [u]

    def extend(x: str) -> None:
        if len(path) - 1 == exact_len:
            if x == v:
                out.append(list(path))
            return
        for y in sorted(g.adj[x]):
            if any(g.has_edge(y, p) for p in path[:-1]):
                continue
            if y == v:
                if len(path) == exact_len:
                    out.append(path + [y])
                continue
            if y in path or not allowed_interior(y):
                continue
            path.append(y)
            extend(y)
            path.pop()

    extend(u)
    return out


# ---------------------------------------------------------------------------
# gap symmetry

@dataclass(frozen=True)
class GapSymmetryVerdict:
    depth: int
    symmetric: bool
    witness: Optional[dict[str, str]]
    trivial: bool                  # no interior vertices: boundary-only check

    def to_dict(self) -> dict:
        return {"depth": self.depth,
                "verdict": "Symmetric" if self.symmetric else "NoSymmetry",
                "trivial_search": self.trivial,
                "witness": dict(self.witness) if self.witness else None}


def gap_symmetry_test(t: GraphTower, core: Per2Core) -> GapSymmetryVerdict:
    """Search the closed first gap for an orientation-preserving swap of a, b.

    The boundary behaviour of such a map is forced: it must exchange the two
    boundary arcs as ordered sequences.  That pins every boundary vertex, and
    the interior is searched exhaustively under rotation preservation.
    """
    s = shortest_anchored_cycles(t, core)
    dec = gap_decomposition(t, s, core)
    g = t.level(t.depth)
    half = s.half_length
    labels = loop_labels(core)

    partner = s.cycles[[i for i in range(s.count)
                        if s.orbit_index[i] == 1][0]]
    fiber_label = {}
    for v in partner.vertices:
        img = t.vertex_map[v]
        if img in labels and v not in (labels[0], labels[-1]):
            fiber_label[labels.index(img)] = v
    pins = {labels[0]: labels[-1], labels[-1]: labels[0]}
    for i in range(1, 2 * half - 1):
        if i not in fiber_label:
            raise Inconsistent("preimage cycle does not cover the loop labels")
        pins[labels[i]] = fiber_label[i]
        pins[fiber_label[i]] = labels[i]

    h = induced_plane_subgraph(g, dec.closure_edges(dec.r0))
    interior = dec.interior_vertices(dec.r0)
    autos = embedded_automorphisms(h, pins=pins)
    witness = autos[0] if autos else None
    return GapSymmetryVerdict(depth=t.depth, symmetric=bool(autos),
                              witness=witness, trivial=not interior)


def grid_disk_control(n: int = 3) -> tuple[PlaneGraph, dict[str, str]]:
    """Planted-symmetry control: an n x n grid disk with pinned corner swap.

    The 180-degree rotation is orientation preserving, swaps the two
    opposite corners and exchanges the boundary arcs, so the pinned search
    must find it.
    """
    def name(i: int, j: int) -> str:
        return f"g{i}_{j}"

    rot = {}
    for i in range(n + 1):
        for j in range(n + 1):
            nbrs = []
            # counterclockwise: east, north, west, south
            for di, dj in ((1, 0), (0, 1), (-1, 0), (0, -1)):
                if 0 <= i + di <= n and 0 <= j + dj <= n:
                    nbrs.append(name(i + di, j + dj))
            rot[name(i, j)] = nbrs
    g = PlaneGraph(rot)

    def rot180(i: int, j: int) -> str:
        return name(n - i, n - j)

    pins = {}
    for i in (0, n):
        for j in range(n + 1):
            pins[name(i, j)] = rot180(i, j)
            pins[name(j, i)] = rot180(j, i)
    return g, pins


# ---------------------------------------------------------------------------
# certificates

def build_certificate(core: Per2Core, depth: int,
                      symmetry_depths: Optional[Sequence[int]] = None) -> dict:
    """Machine-readable summary of the finite-depth graph-theoretic facts."""
    from .plane_graph import girth, is_bipartite

    gtype = classify_type(core)
    _, half = critical_loop(core)
    t = start_tower(core.spec)
    towers = {1: t}
    for k in range(2, depth + 1):
        t = pullback(t)
        towers[k] = t
    top = towers[depth].level(depth)
    verdict = is_bipartite(top)

    counts = {}
    sib = None
    for k in sorted(towers):
        s = shortest_anchored_cycles(towers[k], core)
        counts[k] = s.count
        sib = sibling_report(s, gtype)

    cert = {
        "core": core.spec.name,
        "degree": core.spec.degree,
        "type": gtype.value,
        "critical_distance": half,
        "depth": depth,
        # the critical loop bounds the girth by 2l, so the cap is exact here
        "girth": girth(top, cap=2 * half),
        "bipartite": verdict.bipartite,
        "anchored_cycle_counts": counts,
        "sibling_report": sib.to_dict() if sib else None,
        "gap_arcs": None,
        "gap_symmetry": None,
    }
    if gtype is GasketType.I and depth >= 2:
        cert["gap_arcs"] = r0_arc_search(towers[depth], core).to_dict()
        depths = list(symmetry_depths or [depth])
        cert["gap_symmetry"] = {
            str(k): gap_symmetry_test(towers[k], core).to_dict()
            for k in depths if 2 <= k <= depth}
    return cert
