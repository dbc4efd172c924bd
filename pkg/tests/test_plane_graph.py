import pytest
from hypothesis import given, settings, strategies as st

from gasketlab.errors import Disconnected, NotSimple, NotSpherical
from gasketlab.plane_graph import (
    EmbeddedCycle,
    all_simple_cycles,
    assign_faces_to_regions,
    bfs_distances,
    build_plane_graph,
    edge_key,
    embedded_automorphisms,
    girth,
    graph_distance,
    induced_plane_subgraph,
    is_bipartite,
    shortest_cycles_through_edge,
    to_dot,
)


def triangle():
    return build_plane_graph("xyz", {"x": ["y", "z"], "y": ["z", "x"], "z": ["x", "y"]})


def path3():
    # b0 - a0 - a1
    return build_plane_graph(["b0", "a0", "a1"],
                             {"b0": ["a0"], "a0": ["b0", "a1"], "a1": ["a0"]})


def square():
    rot = {"a0": ["a1", "b0"], "a1": ["a2", "a0"],
           "a2": ["b0", "a1"], "b0": ["a0", "a2"]}
    return build_plane_graph(["a0", "a1", "a2", "b0"], rot)


class TestConstruction:
    def test_triangle_counts(self):
        g = triangle()
        assert (len(g.vertices), len(g.edges), len(g.faces)) == (3, 3, 2)

    def test_tree_has_one_face(self):
        g = path3()
        assert (len(g.vertices), len(g.edges), len(g.faces)) == (3, 2, 1)

    def test_square_counts(self):
        g = square()
        assert len(g.faces) == 2
        assert len(g.vertices) - len(g.edges) + len(g.faces) == 2

    def test_face_degrees_partition_darts(self):
        for g in (triangle(), path3(), square()):
            assert sum(len(f) for f in g.faces) == 2 * len(g.edges)

    def test_loop_rejected(self):
        with pytest.raises(NotSimple):
            build_plane_graph("ab", {"a": ["a", "b"], "b": ["a"]})

    def test_parallel_edge_rejected(self):
        with pytest.raises(NotSimple):
            build_plane_graph("ab", {"a": ["b", "b"], "b": ["a", "a"]})

    def test_disconnected_rejected(self):
        with pytest.raises(Disconnected):
            build_plane_graph("abcd", {"a": ["b"], "b": ["a"], "c": ["d"], "d": ["c"]})

    def test_nonplanar_rotation_rejected(self):
        # K4 with all-same cyclic order at each vertex embeds on the torus:
        # 4 - 6 + F = 2 would need F = 4, this rotation gives fewer faces.
        rot = {"1": ["2", "3", "4"], "2": ["3", "4", "1"],
               "3": ["4", "1", "2"], "4": ["1", "2", "3"]}
        with pytest.raises(NotSpherical):
            build_plane_graph("1234", rot)

    def test_k4_planar_rotation_accepted(self):
        # planar K4: outer triangle 1,2,3 with 4 in the middle
        rot = {"1": ["2", "4", "3"], "2": ["3", "4", "1"],
               "3": ["1", "4", "2"], "4": ["1", "2", "3"]}
        g = build_plane_graph("1234", rot)
        assert len(g.faces) == 4

    def test_serialization_roundtrip(self):
        g = square()
        h = build_plane_graph(g.vertices, g.to_rotation_dict())
        assert g == h and hash(g) == hash(h)


class TestDistancesAndColoring:
    def test_distance_examples(self):
        g = square()
        assert graph_distance(g, "a0", "a2") == 2
        assert graph_distance(g, "a0", "b0") == 1
        assert graph_distance(g, "a0", "a0") == 0

    def test_bfs_distances(self):
        d = bfs_distances(square(), "a0")
        assert d == {"a0": 0, "a1": 1, "b0": 1, "a2": 2}

    def test_square_bipartite_classes(self):
        verdict = is_bipartite(square())
        assert verdict.bipartite
        cls = {v for v in verdict.coloring if verdict.coloring[v] == verdict.coloring["a0"]}
        assert cls == {"a0", "a2"}

    def test_triangle_odd_cycle_witness(self):
        verdict = is_bipartite(triangle())
        assert not verdict.bipartite
        assert len(verdict.odd_cycle) == 3

    def test_witness_parity(self):
        g = build_plane_graph(
            "abcde",
            {"a": ["b", "e"], "b": ["c", "a"], "c": ["d", "b"],
             "d": ["e", "c"], "e": ["a", "d"]})
        verdict = is_bipartite(g)
        assert not verdict.bipartite
        assert len(verdict.odd_cycle) % 2 == 1


class TestCycleSearch:
    def test_square_through_edge(self):
        res = shortest_cycles_through_edge(square(), ("a0", "b0"), 8)
        assert len(res.cycles) == 1
        assert len(res.cycles[0]) == 4
        assert res.girth == 4

    def test_triangle_through_edge(self):
        res = shortest_cycles_through_edge(triangle(), ("x", "y"), 6)
        assert len(res.cycles) == 1 and len(res.cycles[0]) == 3
        assert res.girth == 3

    def test_acyclic_edge(self):
        res = shortest_cycles_through_edge(path3(), ("a0", "b0"), 5)
        assert res.cycles == ()
        assert res.minimal_length is None
        assert res.girth is None

    def test_matches_bruteforce_on_theta(self):
        # theta graph: two vertices joined by three paths of lengths 2,2,3
        rot = {"u": ["p", "q", "r"], "v": ["r2", "q", "p"],
               "p": ["u", "v"], "q": ["u", "v"], "r": ["u", "r2"], "r2": ["r", "v"]}
        g = build_plane_graph("uvpqrr2"[:0] or ["u", "v", "p", "q", "r", "r2"], rot)
        cycles = all_simple_cycles(g)
        assert len(cycles) == 3
        res = shortest_cycles_through_edge(g, ("u", "p"), 10, all_up_to_max=True)
        through = {c for c in cycles if edge_key("u", "p") in c}
        assert {c.edge_set for c in res.cycles} == through


class TestAutomorphisms:
    def test_claw_rotations_only(self):
        g = build_plane_graph(
            ["h", "1", "2", "3"],
            {"h": ["1", "2", "3"], "1": ["h"], "2": ["h"], "3": ["h"]})
        autos = embedded_automorphisms(g)
        assert len(autos) == 3  # leaf rotations; reflections reverse cyclic order
        images = {tuple(phi[x] for x in "123") for phi in autos}
        assert images == {("1", "2", "3"), ("2", "3", "1"), ("3", "1", "2")}

    def test_square_dihedral(self):
        autos = embedded_automorphisms(square())
        assert len(autos) == 8  # degree-2 rotations are unconstrained

    def test_identity_pins(self):
        g = square()
        autos = embedded_automorphisms(g, pins={v: v for v in g.vertices})
        assert autos == [{v: v for v in g.vertices}]

    def test_pins_restrict(self):
        autos = embedded_automorphisms(square(), pins={"a0": "a1"})
        assert len(autos) == 2
        for phi in autos:
            assert phi["a0"] == "a1"


class TestRegions:
    def test_square_plus_diagonal_path(self):
        # square with a path a0 - m - a2 drawn inside one face
        rot = {"a0": ["a1", "m", "b0"], "a1": ["a2", "a0"],
               "a2": ["b0", "m", "a1"], "b0": ["a0", "a2"],
               "m": ["a0", "a2"]}
        fine = build_plane_graph(["a0", "a1", "a2", "b0", "m"], rot)
        coarse = induced_plane_subgraph(
            fine, [edge_key(*p) for p in
                   (("a0", "a1"), ("a1", "a2"), ("a2", "b0"), ("b0", "a0"))])
        assert len(coarse.faces) == 2
        region = assign_faces_to_regions(fine, coarse)
        assert len(region) == len(fine.faces) == 3
        # the two faces split by the path share a region; count per region: 2 + 1
        from collections import Counter
        counts = sorted(Counter(region.values()).values())
        assert counts == [1, 2]


class TestDot:
    def test_dot_output(self):
        g = square()
        verdict = is_bipartite(g)
        dot = to_dot(g, verdict.coloring, highlight_edge=("a0", "b0"))
        assert '"a0" -- "b0" [color=red' in dot
        assert dot.count("--") == 4


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7), st.randoms(use_true_random=False))
def test_random_rotation_systems_euler_or_rejected(n, rng):
    """Any rotation table either builds with V-E+F=2 or raises a typed error."""
    verts = [f"v{i}" for i in range(n)]
    pairs = [(a, b) for i, a in enumerate(verts) for b in verts[i + 1:]]
    chosen = [p for p in pairs if rng.random() < 0.55]
    table = {v: [] for v in verts}
    for a, b in chosen:
        table[a].append(b)
        table[b].append(a)
    for v in table:
        rng.shuffle(table[v])
    try:
        g = build_plane_graph(verts, table)
    except (NotSimple, NotSpherical, Disconnected):
        return
    assert len(g.vertices) - len(g.edges) + len(g.faces) == 2
    assert sum(len(f) for f in g.faces) == 2 * len(g.edges)
