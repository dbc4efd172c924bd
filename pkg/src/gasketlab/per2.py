"""Canonical cores for quadratic captured-type maps with a period-2 cycle.

The canonical level-0 graph of such a map is the tree of iterated
fixed-edge preimages up to the pre-period of the free critical point; the
level-1 graph adds one more preimage and contains exactly one simple
closed curve, the critical loop.  For degree 2 these trees are rigid:
given the pre-period q, the tree is forced up to isomorphism, and a core
is determined by where the free critical value sits plus the cyclic order
of edges at the periodic critical point.  The enumerator walks exactly
that parameter space and keeps whatever survives full validation.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .branched_cover import CoreSpec, GraphTower, validate_core
from .errors import (DistanceMismatch, Inconsistent, LimitExceeded, NotUnique,
                     SchemaError)
from .plane_graph import (EmbeddedCycle, PlaneGraph, build_plane_graph,
                          edge_key, graph_distance, induced_plane_subgraph)

ENUMERATION_CAP = 64  # largest allowed g1 vertex count for exhaustive search


class GasketType(enum.Enum):
    I = "I"
    IIA = "IIA"
    IIB = "IIB"


@dataclass(frozen=True)
class Per2Core:
    """A degree-2 core with designated critical vertices and orbit data."""

    spec: CoreSpec
    a0: str                    # periodic critical point, on the 2-cycle
    b0: str                    # its partner across the fixed edge
    c: str                     # strictly pre-periodic critical point
    q: int                     # pre-period of c
    orbit: tuple[str, ...]     # c, f(c), ..., ending at the first hit of {a0,b0}

    @property
    def name(self) -> str:
        return self.spec.name


def make_per2_core(spec: CoreSpec, a0: str, c: str,
                   name: Optional[str] = None) -> Per2Core:
    """Attach the quadratic bookkeeping to a validated degree-2 core."""
    if spec.degree != 2:
        raise Inconsistent(f"degree {spec.degree} core passed to per2")
    e0 = set(spec.fixed_edge)
    if a0 not in e0:
        raise Inconsistent(f"designated {a0!r} is not an endpoint of the fixed edge")
    b0 = next(v for v in e0 if v != a0)
    if spec.local_degree.get(a0, 1) < 2 or spec.local_degree.get(c, 1) < 2:
        raise Inconsistent("designated critical vertices are not critical")
    orbit = [c]
    while orbit[-1] not in (a0, b0):
        orbit.append(spec.vertex_map[orbit[-1]])
        if len(orbit) > len(spec.g1.vertices) + 1:
            raise Inconsistent(f"orbit of {c!r} never reaches the fixed edge")
    if name is not None:
        spec = CoreSpec(name=name, degree=spec.degree, g0=spec.g0, g1=spec.g1,
                        vertex_map=spec.vertex_map,
                        local_degree=spec.local_degree,
                        fixed_edge=spec.fixed_edge)
    return Per2Core(spec=spec, a0=a0, b0=b0, c=c,
                    q=len(orbit) - 1, orbit=tuple(orbit))


# ---------------------------------------------------------------------------
# critical loop and type

def find_unique_cycle(g: PlaneGraph) -> list[str]:
    """The unique simple cycle of a connected graph with E = V."""
    if len(g.edges) - len(g.vertices) + 1 != 1:
        raise NotUnique(
            f"graph has cyclomatic number {len(g.edges) - len(g.vertices) + 1}")
    degree = {v: g.degree(v) for v in g.vertices}
    alive = set(g.vertices)
    queue = [v for v in g.vertices if degree[v] == 1]
    while queue:
        v = queue.pop()
        alive.discard(v)
        for w in g.adj[v]:
            if w in alive:
                degree[w] -= 1
                if degree[w] == 1:
                    queue.append(w)
    start = min(alive)
    cyc = [start]
    prev = None
    while True:
        nxt = min(w for w in g.adj[cyc[-1]] if w in alive and w != prev)
        if nxt == start:
            return cyc
        prev = cyc[-1]
        cyc.append(nxt)


def critical_loop(core: Per2Core,
                  tower: Optional[GraphTower] = None) -> tuple[EmbeddedCycle, int]:
    """The unique simple closed curve of g1 and half its length.

    Verifies that the loop maps onto a simple path of half its length and
    that this equals the graph distance between the two critical points.
    """
    g1 = tower.level(1) if tower is not None else core.spec.g1
    cyc = find_unique_cycle(g1)
    loop = EmbeddedCycle(cyc)
    if len(loop) % 2 != 0:
        raise NotUnique(f"critical loop has odd length {len(loop)}")
    half = len(loop) // 2
    image = {core.spec.map_edge(e) for e in loop.edge_set}
    if len(image) != half or not _edges_form_simple_path(core.spec.g0, image):
        raise DistanceMismatch("loop image is not a simple path of half length")
    dist = graph_distance(g1, core.a0, core.c)
    if dist != half:
        raise DistanceMismatch(
            f"critical distance {dist} != half loop length {half}")
    return loop, half


def _edges_form_simple_path(g: PlaneGraph, edges: set) -> bool:
    degree: dict[str, int] = {}
    for e in edges:
        for v in e:
            degree[v] = degree.get(v, 0) + 1
    if sorted(degree.values()).count(1) != 2:
        return False
    if any(d > 2 for d in degree.values()):
        return False
    return len(degree) == len(edges) + 1


def loop_labels(core: Per2Core) -> list[str]:
    """Loop vertices in order a_0, a_1, ..., a_{2l-2}, b_0.

    The walk starts at the periodic critical point and moves away from the
    fixed edge; its first step lands on the other preimage of a_0.
    """
    loop, _ = critical_loop(core)
    cyc = list(loop.vertices)
    i = cyc.index(core.a0)
    cyc = cyc[i:] + cyc[:i]
    if cyc[1] == core.b0:
        cyc = [cyc[0]] + cyc[:0:-1]
    assert cyc[-1] == core.b0, "fixed edge missing from the critical loop"
    assert core.spec.vertex_map[cyc[1]] == core.a0
    return cyc


def classify_type(core: Per2Core) -> GasketType:
    """Trichotomy by how the critical loop meets its image."""
    loop, _ = critical_loop(core)
    image = {core.spec.map_edge(e) for e in loop.edge_set}
    meet = loop.edge_set & image
    e0 = core.spec.e0()
    if e0 not in meet:
        raise Inconsistent("loop/image intersection misses the fixed edge")
    if meet == {e0}:
        return GasketType.I
    if meet == image:
        return GasketType.IIB
    return GasketType.IIA


# ---------------------------------------------------------------------------
# constructive enumeration of canonical cores

@dataclass
class _AbstractCore:
    """Graph-and-map data before an embedding is chosen."""
    adj: dict[str, set[str]]
    tree_edges: set[frozenset]          # edges of g0
    vmap: dict[str, str]
    local_degree: dict[str, int]
    levels: dict[str, int]
    c: str


def _grow_tree(q: int) -> tuple[dict[str, set[str]], dict[str, str],
                                dict[str, int], dict[str, list[str]], list[str]]:
    """Canonical degree-2 preimage tree with q levels above the fixed edge.

    Level 1 is special: the fixed edge is one of its own preimages, so it
    contributes a single new vertex (the second preimage of the periodic
    critical point).  After that, every frontier edge pulls back to one
    fresh leaf per local-degree slot of the parent's fiber.
    """
    adj: dict[str, set[str]] = {"a0": {"b0", "a1"}, "b0": {"a0"}, "a1": {"a0"}}
    vmap = {"a0": "b0", "b0": "a0", "a1": "a0"}
    levels = {"a0": 0, "b0": 0, "a1": 1}
    fibers: dict[str, list[str]] = {"a0": ["b0", "a1"], "b0": ["a0"], "a1": []}
    frontier = [("a1", "a0")]           # edges (child, parent) added last round
    counter = 0

    def fresh() -> str:
        nonlocal counter
        counter += 1
        return f"p{counter}"

    local_degree = {"a0": 2}
    for level in range(2, q):
        new_frontier = []
        for child, parent in frontier:
            for u in fibers[parent]:
                for _ in range(local_degree.get(u, 1)):
                    nv = fresh()
                    vmap[nv] = child
                    levels[nv] = level
                    adj.setdefault(nv, set()).add(u)
                    adj[u].add(nv)
                    fibers.setdefault(child, []).append(nv)
                    new_frontier.append((nv, u))
        frontier = new_frontier
    deepest = [child for child, _ in frontier]
    return adj, vmap, levels, fibers, deepest


def _abstract_core(q: int, w1: str, tree) -> Optional[_AbstractCore]:
    """Adjoin the level-q preimages, with the free critical point over w1."""
    adj0, vmap0, levels0, fibers0, deepest = tree
    adj = {v: set(ns) for v, ns in adj0.items()}
    vmap = dict(vmap0)
    levels = dict(levels0)
    fibers = {v: list(ns) for v, ns in fibers0.items()}
    tree_edges = {edge_key(u, v) for u in adj0 for v in adj0[u]}
    local_degree = {v: 1 for v in adj}
    local_degree["a0"] = 2

    counter = 0

    def fresh() -> str:
        nonlocal counter
        counter += 1
        return f"c{counter}"

    q_edges = [(child, parent) for child, parent in _frontier_edges(adj0, levels0, q)]
    c_name = "cc"
    for child, parent in q_edges:
        targets = [u for u in fibers[parent]
                   for _ in range(local_degree.get(u, 1))]
        if child == w1:
            if len(set(targets)) < 2:
                return None                      # parallel edges at the loop
            for u in targets:
                if c_name in adj.get(u, ()):
                    return None
                adj.setdefault(c_name, set()).add(u)
                adj[u].add(c_name)
            vmap[c_name] = child
            levels[c_name] = q
            local_degree[c_name] = 2
        else:
            for u in targets:
                nv = fresh()
                vmap[nv] = child
                levels[nv] = q
                local_degree[nv] = 1
                adj.setdefault(nv, set()).add(u)
                adj[u].add(nv)
    return _AbstractCore(adj=adj, tree_edges=tree_edges, vmap=vmap,
                         local_degree=local_degree, levels=levels, c=c_name)


def _frontier_edges(adj: dict[str, set[str]], levels: dict[str, int],
                    q: int) -> list[tuple[str, str]]:
    out = []
    for v in sorted(adj):
        if levels[v] == q - 1:
            parent = min(u for u in adj[v] if levels[u] < q - 1)
            out.append((v, parent))
    return out


def _complete_rotations(ab: _AbstractCore,
                        a0_rotation: Sequence[str]) -> Optional[dict[str, tuple[str, ...]]]:
    """Propagate the rotation at a0 through the covering; None on conflict.

    Away from the periodic critical point every rotation is the pullback of
    the rotation at the image vertex, so a single cyclic choice at a0
    determines the embedding.
    """
    rot: dict[str, tuple[str, ...]] = {"a0": tuple(a0_rotation)}

    # rotation of g0 at u = g1 rotation restricted to tree edges
    def g0_rotation(u: str) -> tuple[str, ...]:
        return tuple(w for w in rot[u] if edge_key(u, w) in ab.tree_edges)

    order = sorted(ab.adj, key=lambda v: (_ddepth(ab, v), v))
    for v in order:
        if v == "a0":
            continue
        base_vertex = ab.vmap[v]
        base = g0_rotation(base_vertex)
        nbrs = ab.adj[v]
        images = {}
        for z in nbrs:
            images.setdefault(ab.vmap[z], []).append(z)
        if ab.local_degree[v] == 1:
            if len(nbrs) != len(base) or any(len(g) != 1 for g in images.values()):
                return None
            if set(images) != set(base):
                return None
            rot[v] = tuple(images[x][0] for x in base)
        else:
            # degree-2 critical point: neighbours pair up over the base
            if len(nbrs) != 2 * len(base):
                return None
            if any(len(g) != 2 for g in images.values()) or set(images) != set(base):
                return None
            seq = []
            for rep in range(2):
                for x in base:
                    seq.append(images[x][rep])
            rot[v] = tuple(seq)
    return rot


def _ddepth(ab: _AbstractCore, v: str) -> int:
    n, cur = 0, v
    while cur not in ("a0", "b0"):
        cur = ab.vmap[cur]
        n += 1
    return n


def _a0_rotation_candidates(ab: _AbstractCore) -> list[tuple[str, ...]]:
    """Cyclic orders at a0 whose image reads the base rotation twice."""
    nbrs = sorted(ab.adj["a0"])
    pairs: dict[str, list[str]] = {}
    for z in nbrs:
        pairs.setdefault(ab.vmap[z], []).append(z)
    if any(len(g) != 2 for g in pairs.values()):
        return []
    classes = sorted(pairs)
    m = len(nbrs)
    half = m // 2
    first = nbrs[0]
    first_class = ab.vmap[first]
    out = []
    rest = [cl for cl in classes if cl != first_class]
    for perm in itertools.permutations(rest):
        half_classes = [first_class, *perm]
        for flips in itertools.product((0, 1), repeat=half):
            seq = [None] * m
            ok = True
            for i, cl in enumerate(half_classes):
                a, b = pairs[cl]
                if flips[i]:
                    a, b = b, a
                if i == 0 and a != first:
                    ok = False
                    break
                seq[i], seq[i + half] = a, b
            if ok:
                out.append(tuple(seq))
    return out


def _assemble(ab: _AbstractCore, rot: dict[str, tuple[str, ...]],
              name: str) -> Optional[Per2Core]:
    try:
        g1 = build_plane_graph(list(ab.adj), rot)
        g0 = induced_plane_subgraph(g1, ab.tree_edges)
    except Exception:
        return None
    spec = CoreSpec(name=name, degree=2, g0=g0, g1=g1,
                    vertex_map=dict(ab.vmap),
                    local_degree=dict(ab.local_degree),
                    fixed_edge=("a0", "b0"))
    if not validate_core(spec).ok:
        return None
    try:
        core = make_per2_core(spec, "a0", ab.c)
        critical_loop(core)
        classify_type(core)
    except Exception:
        return None
    # level-0 graph must be a tree with a single face
    if len(g0.edges) != len(g0.vertices) - 1 or len(g0.faces) != 1:
        return None
    return core


def canonical_core(core: Per2Core, name: Optional[str] = None) -> Per2Core:
    """Relabel by a rotation-respecting traversal from the fixed-edge dart.

    Two cores are embedded-isomorphic (orientation preserved, fixed edge to
    fixed edge, critical points to critical points) exactly when their
    canonical forms serialize identically.
    """
    g1 = core.spec.g1
    label = {core.a0: "a0", core.b0: "b0"}
    order = [core.a0, core.b0]
    queue = [(core.a0, core.b0), (core.b0, core.a0)]
    seen_darts = set()
    while queue:
        v, entry = queue.pop(0)
        rot = g1.rotation[v]
        i = rot.index(entry)
        for step in range(len(rot)):
            w = rot[(i + step) % len(rot)]
            if w not in label:
                label[w] = f"v{len(order):02d}"
                order.append(w)
            if (v, w) not in seen_darts:
                seen_darts.add((v, w))
                queue.append((w, v))
    rot1 = {label[v]: tuple(label[w] for w in g1.rotation[v]) for v in g1.vertices}
    new_g1 = build_plane_graph(list(rot1), rot1)
    new_g0 = induced_plane_subgraph(
        new_g1, {edge_key(label[u], label[v])
                 for e in core.spec.g0.edges for u, v in [tuple(e)]})
    spec = CoreSpec(
        name=name or core.spec.name, degree=2, g0=new_g0, g1=new_g1,
        vertex_map={label[v]: label[core.spec.vertex_map[v]] for v in g1.vertices},
        local_degree={label[v]: core.spec.local_degree.get(v, 1)
                      for v in g1.vertices},
        fixed_edge=("a0", "b0"))
    return make_per2_core(spec, "a0", label[core.c], name=spec.name)


def core_sort_key(core: Per2Core) -> tuple:
    return (len(core.spec.g1.vertices), len(core.spec.g0.edges),
            serialize_core(core))


def serialize_core(core: Per2Core) -> str:
    s = core.spec
    return ";".join([
        s.g1.serialize(),
        ",".join(f"{v}>{s.vertex_map[v]}" for v in sorted(s.vertex_map)),
        ",".join(f"{v}:{s.local_degree.get(v, 1)}" for v in sorted(s.g1.vertices)),
        f"crit:{core.a0}+{core.c}",
    ])


def enumerate_small_cores(max_vertices_g1: int) -> list[Per2Core]:
    """All valid canonical degree-2 cores with at most the given g1 size.

    Exhausts pre-periods, critical-value placements and embeddings;
    results are deduplicated up to embedded isomorphism and returned in
    canonical order (fewest g1 vertices, then fewest g0 edges, then
    lexicographic serialization).  Mirror images count as distinct unless
    embedded-isomorphic.
    """
    if max_vertices_g1 > ENUMERATION_CAP:
        raise LimitExceeded(
            f"max_vertices_g1 = {max_vertices_g1} exceeds cap {ENUMERATION_CAP}")
    found: dict[str, Per2Core] = {}
    q = 2
    while 2 ** q <= max_vertices_g1:
        tree = _grow_tree(q)
        deepest = tree[4]
        for w1 in deepest:
            ab = _abstract_core(q, w1, tree)
            if ab is None:
                continue
            for rot_a0 in _a0_rotation_candidates(ab):
                rot = _complete_rotations(ab, rot_a0)
                if rot is None:
                    continue
                core = _assemble(ab, rot, name=f"core_q{q}")
                if core is None:
                    continue
                canon = canonical_core(core)
                found.setdefault(serialize_core(canon), canon)
        q += 1
    return sorted(found.values(), key=core_sort_key)


# ---------------------------------------------------------------------------
# bundled cores

def _iib_l2() -> Per2Core:
    g0 = build_plane_graph(["a0", "a1", "b0"],
                           {"b0": ["a0"], "a0": ["b0", "a1"], "a1": ["a0"]})
    g1 = build_plane_graph(
        ["a0", "a1", "a2", "b0"],
        {"a0": ["a1", "b0"], "a1": ["a2", "a0"],
         "a2": ["b0", "a1"], "b0": ["a0", "a2"]})
    spec = CoreSpec(
        name="iib_l2", degree=2, g0=g0, g1=g1,
        vertex_map={"a0": "b0", "b0": "a0", "a1": "a0", "a2": "a1"},
        local_degree={"a0": 2, "a2": 2, "a1": 1, "b0": 1},
        fixed_edge=("a0", "b0"))
    return make_per2_core(spec, "a0", "a2")


@lru_cache(maxsize=1)
def bundled_cores() -> dict[str, Per2Core]:
    """The fixed small Type IIB core plus the minimal Type I and IIA cores.

    The minimal Type I core needs 16 level-1 vertices and the minimal
    Type IIA core 32, so the search ranges over enumeration sizes 16 and
    32 and picks the canonical minimum of each type.
    """
    cores = {"iib_l2": _iib_l2()}
    by_type: dict[GasketType, list[Per2Core]] = {t: [] for t in GasketType}
    for core in enumerate_small_cores(32):
        by_type[classify_type(core)].append(core)
    for gtype, key in ((GasketType.I, "typeI_min"), (GasketType.IIA, "typeIIA_min")):
        if not by_type[gtype]:
            raise Inconsistent(f"enumeration found no core of type {gtype.value}")
        best = min(by_type[gtype], key=core_sort_key)
        cores[key] = canonical_core(best, name=key)
    return cores


# ---------------------------------------------------------------------------
# JSON schema shared with user-supplied cores

_GRAPH_KEYS = {"vertices", "rotation"}
_CORE_KEYS = {"name", "degree", "g0", "g1", "vertex_map", "local_degree",
              "fixed_edge", "critical"}


def core_to_dict(core: Per2Core) -> dict:
    s = core.spec
    return {
        "name": s.name,
        "degree": s.degree,
        "g0": {"vertices": list(s.g0.vertices),
               "rotation": s.g0.to_rotation_dict()},
        "g1": {"vertices": list(s.g1.vertices),
               "rotation": s.g1.to_rotation_dict()},
        "vertex_map": {v: s.vertex_map[v] for v in sorted(s.vertex_map)},
        "local_degree": {v: s.local_degree.get(v, 1) for v in sorted(s.g1.vertices)},
        "fixed_edge": list(s.fixed_edge),
        "critical": [core.a0, core.c],
    }


def corespec_from_dict(data: dict) -> tuple[CoreSpec, tuple[str, str]]:
    """Strict parser: unknown fields are rejected to catch typos.

    Returns the core together with the declared critical pair; degree-2
    cores can then be upgraded with :func:`make_per2_core`.
    """
    if not isinstance(data, dict):
        raise SchemaError("core document must be a JSON object")
    unknown = set(data) - _CORE_KEYS
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)}")
    missing = _CORE_KEYS - set(data)
    if missing:
        raise SchemaError(f"missing fields {sorted(missing)}")
    for part in ("g0", "g1"):
        block = data[part]
        if not isinstance(block, dict) or set(block) != _GRAPH_KEYS:
            raise SchemaError(f"{part} must have exactly keys {sorted(_GRAPH_KEYS)}")
    if not isinstance(data["degree"], int) or data["degree"] < 2:
        raise SchemaError("degree must be an integer >= 2")
    if (not isinstance(data["fixed_edge"], list) or len(data["fixed_edge"]) != 2):
        raise SchemaError("fixed_edge must be a two-element list")
    if (not isinstance(data["critical"], list) or len(data["critical"]) != 2):
        raise SchemaError("critical must be [periodic, pre-periodic]")
    try:
        g0 = build_plane_graph(data["g0"]["vertices"], data["g0"]["rotation"])
        g1 = build_plane_graph(data["g1"]["vertices"], data["g1"]["rotation"])
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(f"invalid graph data: {exc}") from exc
    if not isinstance(data["local_degree"], dict) or not all(
            isinstance(v, int) and v >= 1 for v in data["local_degree"].values()):
        raise SchemaError("local_degree must map vertices to positive integers")
    spec = CoreSpec(name=str(data["name"]), degree=data["degree"], g0=g0, g1=g1,
                    vertex_map={str(k): str(v)
                                for k, v in data["vertex_map"].items()},
                    local_degree={str(k): int(v)
                                  for k, v in data["local_degree"].items()},
                    fixed_edge=(str(data["fixed_edge"][0]),
                                str(data["fixed_edge"][1])))
    return spec, (str(data["critical"][0]), str(data["critical"][1]))


def core_from_dict(data: dict) -> Per2Core:
    spec, crit = corespec_from_dict(data)
    return make_per2_core(spec, crit[0], crit[1])


def load_core(path: str) -> Per2Core:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    return core_from_dict(data)


def dump_core(core: Per2Core, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(core_to_dict(core), fh, indent=2, sort_keys=True)
        fh.write("\n")
