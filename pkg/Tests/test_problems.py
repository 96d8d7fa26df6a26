"""
Tests for graphs, problem instances and cost tables.
"""

import itertools

import numpy as np
import pytest

from problems import (Graph, GraphError, complete_graph, coloring_conflicts, cost_table, cycle_graph,
                      disruption_network, graph_coloring_instance, load_graph, maxcut_instance, maxcut_value,
                      onehot_groups, path_graph, problem_cost, random_weighted_graph, ring_graph, ring_of_disagrees,
                      save_graph)


def test_maxcut_single_edge():
    g = Graph(2, ((0, 1, 1.0),))
    assert maxcut_value(g, "01") == 1.0
    assert maxcut_value(g, "11") == 0.0


def test_ring_alternating_cut():
    g = ring_graph(4)
    assert maxcut_value(g, "0101") == 4.0
    assert maxcut_value(g, "0000") == 0.0


def test_bitstring_length_checked():
    with pytest.raises(GraphError):
        maxcut_value(ring_graph(4), "010")


@pytest.mark.parametrize("n", [3, 5, 2])
def test_ring_needs_even_size(n):
    with pytest.raises(GraphError):
        ring_graph(n)


def test_graph_rejects_self_loop():
    with pytest.raises(GraphError):
        Graph(3, ((1, 1, 1.0),))


def test_graph_rejects_duplicate_edge():
    with pytest.raises(GraphError):
        Graph(3, ((0, 1, 1.0), (1, 0, 2.0)))


def test_graph_rejects_vertex_out_of_range():
    with pytest.raises(GraphError):
        Graph(2, ((0, 2, 1.0),))


def test_cost_table_matches_bitstring_cost():
    g = random_weighted_graph(5, 0.7, np.random.default_rng(3))
    problem = maxcut_instance(g)
    table = cost_table(problem)
    for x in range(32):
        bits = [(x >> k) & 1 for k in range(5)]
        assert table.values[x] == pytest.approx(-problem_cost(problem, bits))


def test_ring_cost_table_extremes():
    table = cost_table(ring_of_disagrees(6))
    assert table.min() == -6.0
    assert table.values[0b010101] == -6.0
    assert table.mean() == pytest.approx(-3.0)


def test_ring_cost_table_is_negated_cut():
    table = cost_table(ring_of_disagrees(4))
    # index 0b0101: qubits 0 and 2 set
    assert table.values[0b0101] == -4.0
    assert table.values[0b0011] == -2.0


def test_coloring_instance_layout():
    instance = graph_coloring_instance(path_graph(3), 2)
    assert instance.n_qubits == 6
    assert onehot_groups(instance) == [[0, 1], [2, 3], [4, 5]]


def test_coloring_conflicts_counts_monochromatic_edges():
    instance = graph_coloring_instance(path_graph(3), 2)
    # vertex colors 0, 0, 1
    assert coloring_conflicts(instance, [1, 0, 1, 0, 0, 1]) == 1.0
    assert coloring_conflicts(instance, [1, 0, 0, 1, 1, 0]) == 0.0


def test_coloring_cost_table_is_not_negated():
    instance = graph_coloring_instance(path_graph(3), 2)
    table = cost_table(instance)
    x = 0b000101  # vertices 0 and 1 both color 0
    assert table.values[x] == 1.0


def test_coloring_instance_size_limit():
    with pytest.raises(GraphError):
        graph_coloring_instance(complete_graph(9), 3)


def test_complete_graph_weights_order():
    g = complete_graph(3, [1.0, 2.0, 3.0])
    assert g.weight(0, 1) == 1.0
    assert g.weight(0, 2) == 2.0
    assert g.weight(2, 1) == 3.0


def test_disruption_network_drops_station_links():
    g = disruption_network(4, inside=[2, 3])
    assert g.n_vertices == 5
    assert g.neighbors(0) == [1, 4]
    assert g.degree(2) == 3
    assert g.is_connected()


def test_disconnected_graph_detected():
    g = Graph(4, ((0, 1, 1.0), (2, 3, 1.0)))
    assert not g.is_connected()
    assert cycle_graph(4).is_connected()


def test_graph_json_round_trip(tmp_path):
    g = complete_graph(4, [1, 2, 3, 4, 5, 6])
    path = tmp_path / "g.json"
    save_graph(g, path)
    assert load_graph(path) == g


def test_graph_json_default_weight():
    g = Graph.from_dict({"n": 3, "edges": [[0, 1], [1, 2, 2.5]]})
    assert g.edges == ((0, 1, 1.0), (1, 2, 2.5))


def test_path_graph_has_no_cycle():
    g = path_graph(5)
    assert g.n_edges == 4
    assert all(maxcut_value(g, bits) <= 4 for bits in itertools.product([0, 1], repeat=5))
