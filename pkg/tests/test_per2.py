import json

import pytest

from gasketlab.branched_cover import pullback, start_tower, validate_core
from gasketlab.errors import Inconsistent, LimitExceeded, SchemaError
from gasketlab.per2 import (
    GasketType,
    bundled_cores,
    canonical_core,
    classify_type,
    core_from_dict,
    core_to_dict,
    critical_loop,
    dump_core,
    enumerate_small_cores,
    load_core,
    loop_labels,
    serialize_core,
)
from gasketlab.plane_graph import edge_key, girth, graph_distance


@pytest.fixture(scope="module")
def cores():
    return bundled_cores()


class TestBundled:
    def test_all_bundled_pass_validation(self, cores):
        for name, core in cores.items():
            rep = validate_core(core.spec)
            assert rep.ok, (name, rep.to_dict())

    def test_iib_l2_loop_and_distance(self, cores):
        core = cores["iib_l2"]
        loop, half = critical_loop(core)
        assert half == 2
        assert loop.edge_set == {
            edge_key("a0", "a1"), edge_key("a1", "a2"),
            edge_key("a2", "b0"), edge_key("b0", "a0")}

    def test_iib_l2_image_path(self, cores):
        core = cores["iib_l2"]
        loop, _ = critical_loop(core)
        image = {core.spec.map_edge(e) for e in loop.edge_set}
        assert image == {edge_key("a0", "b0"), edge_key("a0", "a1")}

    def test_iib_l2_type(self, cores):
        assert classify_type(cores["iib_l2"]) is GasketType.IIB

    def test_loop_length_even(self, cores):
        for core in cores.values():
            loop, half = critical_loop(core)
            assert len(loop) == 2 * half

    def test_types_as_named(self, cores):
        assert classify_type(cores["typeI_min"]) is GasketType.I
        assert classify_type(cores["typeIIA_min"]) is GasketType.IIA

    def test_g0_is_tree(self, cores):
        for core in cores.values():
            g0 = core.spec.g0
            assert len(g0.edges) == len(g0.vertices) - 1
            assert len(g0.faces) == 1

    def test_loop_labels_walk(self, cores):
        for core in cores.values():
            labels = loop_labels(core)
            assert labels[0] == core.a0 and labels[-1] == core.b0
            _, half = critical_loop(core)
            assert labels[half] == core.c
            assert core.spec.vertex_map[labels[1]] == core.a0


class TestTowerInvariants:
    @pytest.mark.parametrize("name", ["iib_l2", "typeI_min", "typeIIA_min"])
    def test_girth_and_distance_across_levels(self, cores, name):
        core = cores[name]
        _, half = critical_loop(core)
        t = start_tower(core.spec)
        for _ in range(3):
            t = pullback(t)
        last = None
        for k in range(1, t.depth + 1):
            g = t.level(k)
            assert girth(g) == 2 * half
            d = graph_distance(g, core.a0, core.c)
            assert d == half
            if last is not None:
                assert d <= last
            last = d


class TestEnumeration:
    def test_max_zero_empty(self):
        assert enumerate_small_cores(0) == []

    def test_cap(self):
        with pytest.raises(LimitExceeded):
            enumerate_small_cores(65)

    def test_size4_is_exactly_iib_l2(self, cores):
        found = enumerate_small_cores(4)
        assert len(found) == 1
        assert serialize_core(found[0]) == serialize_core(
            canonical_core(cores["iib_l2"]))
        assert all(classify_type(c) is not GasketType.I for c in found)

    def test_size16_types(self):
        found = enumerate_small_cores(16)
        types = sorted(classify_type(c).value for c in found)
        assert types.count("I") == 2       # mirror pair, kept distinct
        assert "IIA" not in types

    def test_classification_invariant_under_relabeling(self, cores):
        for core in cores.values():
            relabeled = canonical_core(core)
            assert classify_type(relabeled) is classify_type(core)
            _, l1 = critical_loop(relabeled)
            _, l2 = critical_loop(core)
            assert l1 == l2

    def test_results_are_valid_and_sorted(self):
        found = enumerate_small_cores(16)
        sizes = [len(c.spec.g1.vertices) for c in found]
        assert sizes == sorted(sizes)
        for c in found:
            assert validate_core(c.spec).ok


class TestJson:
    def test_roundtrip(self, cores, tmp_path):
        for name, core in cores.items():
            path = tmp_path / f"{name}.json"
            dump_core(core, str(path))
            back = load_core(str(path))
            assert serialize_core(back) == serialize_core(core)

    def test_unknown_field_rejected(self, cores):
        doc = core_to_dict(cores["iib_l2"])
        doc["extra"] = 1
        with pytest.raises(SchemaError):
            core_from_dict(doc)

    def test_missing_field_rejected(self, cores):
        doc = core_to_dict(cores["iib_l2"])
        del doc["vertex_map"]
        with pytest.raises(SchemaError):
            core_from_dict(doc)

    def test_garbage_graph_rejected(self, cores):
        doc = core_to_dict(cores["iib_l2"])
        doc["g1"]["rotation"]["a0"] = ["a0", "b0"]  # loop
        with pytest.raises(SchemaError):
            core_from_dict(doc)

    def test_bad_critical_rejected(self, cores):
        doc = core_to_dict(cores["iib_l2"])
        doc["critical"] = ["a1", "a2"]  # a1 is not on the fixed edge
        with pytest.raises(Inconsistent):
            core_from_dict(doc)

    def test_shipped_files_match_construction(self, cores):
        from importlib import resources
        for name, core in cores.items():
            ref = resources.files("gasketlab").joinpath(f"cores/{name}.json")
            data = json.loads(ref.read_text())
            assert serialize_core(core_from_dict(data)) == serialize_core(core)
