import math

import numpy as np
import pytest

from prunerl.errors import CommunityFileError, DeadEdgeError, EdgeListParseError, PruneRLError
from prunerl.graph import Graph, load_communities, load_edge_list
from prunerl.metrics import shortest_path_distance

from conftest import complete_graph, make_graph, path_graph


class TestLoadEdgeList:
    def test_karate_counts(self, karate):
        assert karate.node_count == 34
        assert karate.edge_count == 78
        assert karate.original_edge_count == 78

    def test_duplicate_collapse(self, tmp_path):
        p = tmp_path / "dup.txt"
        p.write_text("0 1\n1 0\n")
        g = load_edge_list(p)
        assert g.edge_count == 1
        assert g.dropped_duplicates == 1

    def test_self_loop_dropped(self, tmp_path):
        p = tmp_path / "loop.txt"
        p.write_text("0 1\n3 3\n")
        g = load_edge_list(p)
        assert g.edge_count == 1
        assert g.dropped_self_loops == 1

    def test_malformed_line_names_line_number(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0 1\nnot-an-edge\n")
        with pytest.raises(EdgeListParseError, match=":2:"):
            load_edge_list(p)

    def test_empty_edge_set_rejected(self, tmp_path):
        p = tmp_path / "empty.txt"
        p.write_text("# only comments\n")
        with pytest.raises(PruneRLError, match="empty edge set"):
            load_edge_list(p)

    def test_sparse_ids_compacted_with_map(self, tmp_path):
        p = tmp_path / "sparse.txt"
        p.write_text("100 205\n205 999\n")
        g = load_edge_list(p)
        assert g.node_count == 3
        assert set(g.id_map) == {100, 205, 999}
        assert sorted(g.id_map.values()) == [0, 1, 2]

    def test_round_trip_identity(self, tmp_path, karate, rng):
        karate.random_prune(20, rng)
        out = tmp_path / "sparse_karate.txt"
        karate.save_edge_list(out, header_lines=["provenance test"])
        again = load_edge_list(out)
        assert again.live_edge_set() == karate.live_edge_set()


class TestLoadCommunities:
    def test_two_lines(self, tmp_path):
        g = make_graph(5, [(0, 1), (1, 2), (3, 4)])
        p = tmp_path / "comm.txt"
        p.write_text("0 1 2\n3 4\n")
        assert load_communities(p, g) == {0: 0, 1: 0, 2: 0, 3: 1, 4: 1}

    def test_overlap_rejected(self, tmp_path):
        g = make_graph(3, [(0, 1), (1, 2)])
        p = tmp_path / "comm.txt"
        p.write_text("0 1\n1 2\n")
        with pytest.raises(CommunityFileError):
            load_communities(p, g)

    def test_unknown_node_named(self, tmp_path):
        g = make_graph(2, [(0, 1)])
        p = tmp_path / "comm.txt"
        p.write_text("0 1 7\n")
        with pytest.raises(CommunityFileError, match="7"):
            load_communities(p, g)


class TestPruning:
    def test_triangle_degrees(self):
        g = make_graph(3, [(0, 1), (1, 2), (0, 2)])
        g.prune_edge(g.edge_ref(g.edge_id(0, 1)))
        assert [g.degree_of(i) for i in range(3)] == [1, 1, 2]

    def test_path_becomes_unreachable(self):
        g = path_graph(3)
        g.prune_edge(g.edge_ref(g.edge_id(0, 1)))
        assert g.degree_of(0) == 0
        assert shortest_path_distance(g, 0, 2) == math.inf

    def test_double_prune_is_error(self):
        g = make_graph(2, [(0, 1)])
        e = g.edge_ref(0)
        g.prune_edge(e)
        with pytest.raises(DeadEdgeError):
            g.prune_edge(e)

    def test_directed_degrees(self):
        g = make_graph(3, [(0, 1), (1, 2)], directed=True)
        assert g.degree_of(1) == (1, 1)
        g.prune_edge(g.edge_ref(g.edge_id(0, 1)))
        assert g.degree_of(1) == (0, 1)

    def test_degrees_match_adjacency_after_prune_sequence(self, karate, rng):
        for _ in range(40):
            karate.random_prune(1, rng)
            for n in range(karate.node_count):
                assert karate.degree_of(n) == len(karate.adj[n])

    def test_copy_is_independent(self, karate):
        clone = karate.copy()
        clone.prune_edge(clone.edge_ref(0))
        assert karate.is_alive(0)
        assert not clone.is_alive(0)


class TestRandomPrune:
    def test_zero_is_noop(self, karate, rng):
        before = karate.live_edge_set()
        karate.random_prune(0, rng)
        assert karate.live_edge_set() == before

    def test_all_empties_graph(self, rng):
        g = complete_graph(4)
        g.random_prune(6, rng)
        assert g.edge_count == 0
        assert g.edge_kept_ratio() == 0.0

    def test_too_many_rejected(self, rng):
        g = complete_graph(4)
        with pytest.raises(PruneRLError):
            g.random_prune(7, rng)

    def test_k4_uniform(self, rng):
        # each of the 6 edges removed with frequency 1/6 +- 0.02 when count=1
        counts = np.zeros(6)
        trials = 10_000
        base = complete_graph(4)
        for _ in range(trials):
            g = base.copy()
            g.random_prune(1, rng)
            dead = set(range(6)) - set(int(e) for e in g.live_edge_ids())
            counts[dead.pop()] += 1
        assert np.all(np.abs(counts / trials - 1 / 6) < 0.02)


class TestSampleSubgraph:
    def test_oversized_returns_all(self, rng):
        g = complete_graph(4)
        sub = g.sample_subgraph(100, rng)
        assert len(sub) == 6
        assert sorted(e.eid for e in sub.edges) == list(range(6))

    def test_k4_uniform_single(self, rng):
        counts = np.zeros(6)
        trials = 10_000
        g = complete_graph(4)
        for _ in range(trials):
            sub = g.sample_subgraph(1, rng)
            counts[sub.edges[0].eid] += 1
        assert np.all(np.abs(counts / trials - 1 / 6) < 0.02)

    def test_edge_ratio_snapshot(self, rng):
        g = make_graph(8, [(i, (i + 1) % 8) for i in range(8)])
        g.random_prune(2, rng)
        sub = g.sample_subgraph(3, rng)
        assert sub.edge_ratio == 0.75

    def test_no_dead_or_duplicate_edges(self, karate, rng):
        karate.random_prune(30, rng)
        for _ in range(50):
            sub = karate.sample_subgraph(16, rng)
            eids = [e.eid for e in sub.edges]
            assert len(set(eids)) == len(eids)
            assert all(karate.is_alive(eid) for eid in eids)

    def test_zero_live_edges_rejected(self, rng):
        g = make_graph(2, [(0, 1)])
        g.prune_edge(g.edge_ref(0))
        with pytest.raises(PruneRLError):
            g.sample_subgraph(1, rng)

    def test_degree_snapshot_survives_later_prunes(self, rng):
        g = complete_graph(4)
        sub = g.sample_subgraph(6, rng)
        g.random_prune(5, rng)
        assert np.all(sub.degrees == 3.0)


class TestEdgeKeptRatio:
    def test_fresh_graph(self, karate):
        assert karate.edge_kept_ratio() == 1.0

    def test_partial(self, rng):
        g = make_graph(8, [(i, (i + 1) % 8) for i in range(8)])
        g.random_prune(2, rng)
        assert g.edge_kept_ratio() == 0.75
