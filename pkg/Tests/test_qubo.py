"""
Tests for the spanning-tree QUBO: polynomial algebra, ancilla reduction, decoding,
exhaustive soundness on small graphs and the classical solvers.
"""

import itertools
import json

import networkx as nx
import numpy as np
import pytest

from problems import Graph, complete_graph, cycle_graph, path_graph
from qubo import (AnnealSchedule, DegreeError, DisconnectedGraphError, OversizeError, Pubo, Qubo,
                  SpanningTreeOptions, anneal_restarts, bits_to_string, brute_force_minimize, complete_ancillas,
                  decode_tree, default_penalty, load_encoding, load_qubo, quadratize, save_encoding,
                  simulated_annealing, spanning_tree_pubo, spanning_tree_qubo, tree_weight)
from statevector import MAX_QUBITS


def assignment(enc, labels):
    """Full bit vector with the named base variables set and ancillas made consistent"""
    index = enc.var_index
    base = np.zeros(enc.n_base_vars, dtype=np.int64)
    for label in labels:
        base[index[label]] = 1
    return complete_ancillas(base, enc)


def undirected(edges):
    return frozenset(frozenset(e) for e in edges)


# --- polynomials -----------------------------------------------------------

def test_pubo_merges_and_drops_terms():
    p = Pubo(3)
    p.add_term((1, 0), 2.0)
    p.add_term((0, 1), 1.5)
    assert p.terms == {(0, 1): 3.5}
    p.add_term((0, 1), -3.5)
    assert p.terms == {}
    p.add_term((2, 2), 4.0)
    assert p.terms == {(2,): 4.0}


def test_pubo_rejects_unknown_variable():
    with pytest.raises(ValueError):
        Pubo(2).add_term((0, 2), 1.0)


def test_pubo_energies_match_energy():
    p = Pubo(3, {(): 1.0, (0,): -2.0, (0, 1, 2): 5.0, (1, 2): 0.5})
    rows = np.array(list(itertools.product([0, 1], repeat=3)))
    np.testing.assert_allclose(p.energies(rows), [p.energy(r) for r in rows])


def test_cubic_pubo_is_not_a_qubo():
    with pytest.raises(DegreeError):
        Pubo(3, {(0, 1, 2): 1.0}).to_qubo()


def test_qubo_validation():
    with pytest.raises(ValueError):
        Qubo(2, [0.0, 0.0], {(1, 0): 1.0})
    with pytest.raises(ValueError):
        Qubo(2, [0.0])
    with pytest.raises(ValueError):
        Qubo(1, [np.inf])


def test_qubo_energy():
    q = Qubo(3, [1.0, -2.0, 0.5], {(0, 2): 3.0}, offset=0.25)
    assert q.energy("101") == pytest.approx(1.0 + 0.5 + 3.0 + 0.25)
    assert q.energy([0, 1, 0]) == pytest.approx(-1.75)


def test_qubo_json(tmp_path):
    q = Qubo(3, [1.0, -2.0, 0.5], {(0, 2): 3.0}, offset=0.25)
    path = tmp_path / "q.json"
    path.write_text(json.dumps(q.to_dict()))
    loaded = load_qubo(path)
    assert loaded.quadratic == q.quadratic
    np.testing.assert_array_equal(loaded.linear, q.linear)
    assert loaded.offset == 0.25
    with pytest.raises(ValueError):
        Qubo.from_dict({"n": 2})


# --- quadratization ---------------------------------------------------------

def test_quadratize_keeps_quadratic_input():
    p = Pubo(2, {(): 3.0, (0,): 1.0, (0, 1): 2.0})
    q, ancillas = quadratize(p, 10.0)
    assert ancillas == {}
    assert q.n_vars == 2
    np.testing.assert_array_equal(q.linear, [1.0, 0.0])
    assert q.quadratic == {(0, 1): 2.0}
    assert q.offset == 3.0


def test_quadratize_cubic_truth_table():
    q, ancillas = quadratize(Pubo(3, {(0, 1, 2): 5.0}), 10.0)
    assert ancillas == {(0, 1): 3}
    for x0, x1, x2 in itertools.product([0, 1], repeat=3):
        energies = [q.energy([x0, x1, x2, w]) for w in (0, 1)]
        assert min(energies) == pytest.approx(5.0 * x0 * x1 * x2)
        assert int(np.argmin(energies)) == x0 * x1


def test_quadratize_shares_ancillas():
    p = Pubo(4, {(0, 1, 2): 1.0, (0, 1, 3): 2.0})
    q, ancillas = quadratize(p, 10.0)
    assert ancillas == {(0, 1): 4}
    assert q.n_vars == 5


def test_quadratize_rejects_quartic():
    with pytest.raises(DegreeError):
        quadratize(Pubo(4, {(0, 1, 2, 3): 1.0}), 10.0)


def test_quadratize_needs_positive_penalty():
    with pytest.raises(ValueError):
        quadratize(Pubo(3, {(0, 1, 2): 1.0}), 0.0)


# --- encoding ---------------------------------------------------------------

def test_single_edge_encoding():
    q, enc = spanning_tree_qubo(path_graph(2))
    assert enc.labels == ["x:0-1", "y:1@2"]
    energy, argmins = brute_force_minimize(q)
    assert energy == pytest.approx(1.0)
    assert argmins == ["11"]
    assert decode_tree(argmins[0], enc).edges == [(0, 1)]


def test_triangle_variable_counts():
    q, enc = spanning_tree_qubo(complete_graph(3))
    assert enc.n_base_vars == 8
    assert q.n_vars == enc.n_vars == 12
    assert len(enc.ancillas) == 4
    # at delta=1 the root takes one child and no other vertex takes any: no spare units
    _, enc_deg = spanning_tree_qubo(complete_graph(3), SpanningTreeOptions(delta=1))
    assert enc_deg.slacks == {}
    assert enc_deg.n_vars == 12
    _, enc_deg = spanning_tree_qubo(complete_graph(3), SpanningTreeOptions(delta=2))
    assert list(enc_deg.slacks) == [(0, 1)]
    assert enc_deg.n_vars == 13


def test_variable_counts_for_larger_graphs():
    q, enc = spanning_tree_qubo(cycle_graph(4))
    assert enc.n_base_vars == 15
    assert q.n_vars == 27
    q, _ = spanning_tree_qubo(complete_graph(4), SpanningTreeOptions(delta=2))
    assert q.n_vars == 37


def test_triangle_ground_states_are_its_trees():
    q, enc = spanning_tree_qubo(complete_graph(3))
    energy, argmins = brute_force_minimize(q)
    assert energy == pytest.approx(2.0)
    # the star at the root admits four level assignments, each path exactly one
    assert len(argmins) == 6
    decoded = [decode_tree(bits, enc) for bits in argmins]
    assert all(d.feasible for d in decoded)
    trees = {undirected(d.edges) for d in decoded}
    expected = {undirected(t.edges()) for t in nx.SpanningTreeIterator(complete_graph(3).to_networkx())}
    assert trees == expected
    assert len(trees) == 3


def test_triangle_with_degree_one_has_no_valid_tree():
    q, enc = spanning_tree_qubo(complete_graph(3), SpanningTreeOptions(delta=1))
    energy, argmins = brute_force_minimize(q)
    assert energy > 2.0 * enc.objective_B + enc.penalty_A / 2
    assert not any(decode_tree(bits, enc).feasible for bits in argmins)


def test_four_cycle_zero_penalty_assignments_are_spanning_trees():
    graph = Graph(4, ((0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (0, 3, 4.0)))
    q, enc = spanning_tree_qubo(graph)
    idx = np.arange(1 << enc.n_base_vars, dtype=np.int64)
    base = (idx[:, None] >> np.arange(enc.n_base_vars)[None, :]) & 1
    rows = complete_ancillas(base, enc)
    energies = q.energies(rows)

    weights = np.zeros(enc.n_vars)
    for (u, v), i in enc.parents.items():
        weights[i] = graph.weight(u, v)
    objective = enc.objective_B * (rows @ weights)
    zero_penalty = np.abs(energies - objective) < 1e-9
    assert np.all(energies >= objective - 1e-9)

    trees = set()
    for row in rows[zero_penalty]:
        decoded = decode_tree(row, enc)
        assert decoded.feasible
        trees.add(undirected(decoded.edges))
    expected = {undirected(t.edges()) for t in nx.SpanningTreeIterator(graph.to_networkx())}
    assert trees == expected
    assert energies.min() == pytest.approx(6.0)


def test_degree_bound_penalizes_star_on_k4():
    graph = complete_graph(4, [1.0, 1.0, 1.0, 5.0, 5.0, 1.0])
    pubo, enc = spanning_tree_pubo(graph, SpanningTreeOptions(delta=2))
    # star at 0 costs 3 but breaks the bound; the path 1-0-2-3 costs 3 as well
    star = ["x:0-1", "x:0-2", "x:0-3", "y:1@2", "y:2@2", "y:3@2"]
    path = ["x:0-1", "x:0-2", "x:2-3", "y:1@2", "y:2@2", "y:3@3"]
    index = enc.var_index
    star_bits = np.zeros(enc.n_vars, dtype=np.int64)
    star_bits[[index[label] for label in star]] = 1
    path_bits = np.zeros(enc.n_vars, dtype=np.int64)
    path_bits[[index[label] for label in path]] = 1
    assert pubo.energy(path_bits) == pytest.approx(3.0)
    assert pubo.energy(star_bits) >= 3.0 + enc.penalty_A


def test_disconnected_graph_rejected():
    with pytest.raises(DisconnectedGraphError):
        spanning_tree_qubo(Graph(4, ((0, 1, 1.0), (2, 3, 1.0))))


def test_degree_bound_must_be_positive():
    with pytest.raises(ValueError):
        spanning_tree_qubo(complete_graph(3), SpanningTreeOptions(delta=0))


def test_low_penalty_warns(caplog):
    with caplog.at_level("WARNING", logger="qubo"):
        spanning_tree_qubo(complete_graph(3), SpanningTreeOptions(penalty_A=0.5))
    assert any("below" in r.message for r in caplog.records)


def test_default_rosenberg_penalty():
    _, enc = spanning_tree_qubo(cycle_graph(4))
    assert enc.penalty_A == pytest.approx(5.0)
    assert enc.rosenberg_penalty == pytest.approx(6.0)


def all_rows(n):
    idx = np.arange(1 << n, dtype=np.int64)
    return (idx[:, None] >> np.arange(n)[None, :]) & 1


@pytest.mark.parametrize("delta", [None, 2])
def test_infeasible_triangle_assignments_cost_more_than_any_tree(delta):
    graph = complete_graph(3, [2.0, 3.0, 5.0])
    q, enc = spanning_tree_qubo(graph, SpanningTreeOptions(delta=delta))
    rows = all_rows(enc.n_vars)
    energies = q.energies(rows)
    feasible = np.array([decode_tree(row, enc).feasible for row in rows])
    assert feasible.sum() > 0
    assert energies[feasible].max() < energies[~feasible].min()
    assert energies[feasible].max() == pytest.approx(8.0)


@pytest.mark.parametrize("n", [4, 5])
def test_sampled_infeasible_assignments_cost_more_than_any_tree(n, rng):
    graph = complete_graph(n, rng.integers(1, 10, size=n * (n - 1) // 2))
    q, enc = spanning_tree_qubo(graph, SpanningTreeOptions(delta=2))
    worst_tree = max(tree.size(weight="weight") for tree in nx.SpanningTreeIterator(graph.to_networkx())
                     if max(d for _, d in tree.degree()) <= 2)
    for _ in range(10):
        rows = rng.integers(0, 2, size=(10_000, enc.n_vars))
        energies = q.energies(rows)
        for row in rows[energies <= enc.objective_B * worst_tree]:
            assert decode_tree(row, enc).feasible


def ancilla_minimum(q, enc):
    """Per base assignment, the QUBO energy minimized over the ancillas"""
    energies = q.energies(all_rows(enc.n_vars))
    # ancillas are the high variables, so each row of the reshape fixes them
    return energies.reshape(1 << len(enc.ancillas), 1 << enc.n_base_vars).min(axis=0)


def test_quadratized_triangle_matches_cubic_energy():
    graph = complete_graph(3, [2.0, 3.0, 5.0])
    pubo, _ = spanning_tree_pubo(graph)
    base = all_rows(pubo.n_vars)
    A = default_penalty(graph)
    q, enc = spanning_tree_qubo(graph, SpanningTreeOptions(rosenberg_penalty=2 * A))
    assert enc.n_base_vars == pubo.n_vars
    np.testing.assert_allclose(ancilla_minimum(q, enc), pubo.energies(base), atol=1e-9)

    # the default penalty agrees wherever no vertex holds two levels
    q, enc = spanning_tree_qubo(graph)
    one_level = np.array([all(sum(row[enc.levels[(v, lvl)]] for lvl in (2, 3)) <= 1 for v in (1, 2))
                          for row in base])
    np.testing.assert_allclose(ancilla_minimum(q, enc)[one_level], pubo.energies(base)[one_level], atol=1e-9)
    assert np.all(ancilla_minimum(q, enc) >= pubo.energies(base).min())


@pytest.mark.parametrize("penalty_factor", [None, 2.0])
def test_quadratized_triangle_keeps_cubic_argmins(penalty_factor):
    graph = complete_graph(3, [2.0, 3.0, 5.0])
    pubo, _ = spanning_tree_pubo(graph)
    A = default_penalty(graph)
    options = SpanningTreeOptions(rosenberg_penalty=None if penalty_factor is None else penalty_factor * A)
    q, enc = spanning_tree_qubo(graph, options)

    base = all_rows(pubo.n_vars)
    cubic = pubo.energies(base)
    cubic_argmins = {bits_to_string(row) for row in base[cubic == cubic.min()]}
    energy, argmins = brute_force_minimize(q)
    assert energy == pytest.approx(cubic.min())
    assert {bits[:enc.n_base_vars] for bits in argmins} == cubic_argmins
    assert len(argmins) == len(cubic_argmins)

    from_qubo = {undirected(decode_tree(bits, enc).edges) for bits in argmins}
    from_cubic = {undirected(decode_tree(complete_ancillas(np.array([int(c) for c in bits]), enc), enc).edges)
                  for bits in cubic_argmins}
    assert from_qubo == from_cubic == {undirected([(0, 1), (0, 2)])}


def test_tree_schedule_scales_with_penalty():
    _, enc = spanning_tree_qubo(complete_graph(4, [1, 2, 3, 4, 5, 6]), SpanningTreeOptions(delta=2))
    schedule = enc.anneal_schedule(300)
    assert enc.penalty_A == 22.0
    assert schedule.t_start == pytest.approx(11.0)
    assert schedule.t_end == pytest.approx(1.1)
    assert schedule.sweeps == 300


# --- decoding ---------------------------------------------------------------

def test_decode_valid_tree():
    _, enc = spanning_tree_qubo(complete_graph(3))
    decoded = decode_tree(assignment(enc, ["x:0-1", "x:1-2", "y:1@2", "y:2@3"]), enc)
    assert decoded.feasible
    assert decoded.edges == [(0, 1), (1, 2)]
    assert tree_weight(enc.graph, decoded.edges) == 2.0


def test_decode_empty_assignment():
    _, enc = spanning_tree_qubo(complete_graph(3))
    decoded = decode_tree(np.zeros(enc.n_vars, dtype=np.int64), enc)
    assert not decoded.feasible
    kinds = {v.split(":")[0] for v in decoded.violations}
    assert kinds == {"parent_count", "level_count"}


def test_decode_reports_level_order():
    _, enc = spanning_tree_qubo(complete_graph(3))
    decoded = decode_tree(assignment(enc, ["x:0-2", "x:2-1", "y:1@2", "y:2@3"]), enc)
    assert [v.split(":")[0] for v in decoded.violations] == ["level_order"]


def test_decode_reports_inconsistent_ancilla():
    _, enc = spanning_tree_qubo(complete_graph(3))
    bits = assignment(enc, ["x:0-2", "x:2-1", "y:2@2", "y:1@3"])
    w = enc.var_index["z:2-1@2"]
    assert bits[w] == 1
    bits[w] = 0
    decoded = decode_tree(bits, enc)
    assert [v.split(":")[0] for v in decoded.violations] == ["ancilla"]


def test_decode_reports_degree():
    _, enc = spanning_tree_qubo(complete_graph(3), SpanningTreeOptions(delta=1))
    bits = assignment(enc, ["x:0-1", "x:0-2", "y:1@2", "y:2@2"])
    decoded = decode_tree(bits, enc)
    assert [v.split(":")[0] for v in decoded.violations] == ["degree"]


def test_encoding_sidecar_round_trip(tmp_path):
    _, enc = spanning_tree_qubo(complete_graph(4), SpanningTreeOptions(delta=2))
    path = tmp_path / "q.encoding.json"
    save_encoding(enc, path)
    loaded = load_encoding(path)
    assert loaded.labels == enc.labels
    assert loaded.parents == enc.parents
    assert loaded.levels == enc.levels
    assert loaded.slacks == enc.slacks
    assert loaded.ancillas == enc.ancillas
    assert loaded.delta == 2
    assert loaded.penalty_A == enc.penalty_A
    assert loaded.graph == enc.graph


def test_unknown_label_rejected():
    _, enc = spanning_tree_qubo(path_graph(2))
    with pytest.raises(ValueError):
        enc.register("q:1")


# --- solvers ----------------------------------------------------------------

def test_brute_force_ties_sorted():
    energy, argmins = brute_force_minimize(Qubo(2, [-1.0, -1.0], {(0, 1): 2.0}))
    assert energy == -1.0
    assert argmins == ["01", "10"]


def test_brute_force_empty_qubo():
    assert brute_force_minimize(Qubo(0, [], offset=2.5)) == (2.5, [""])


def test_brute_force_oversize():
    with pytest.raises(OversizeError):
        brute_force_minimize(Qubo(MAX_QUBITS + 1, np.zeros(MAX_QUBITS + 1)))


def test_brute_force_across_chunks(rng):
    # 18 variables span several enumeration chunks
    n = 18
    q = Qubo(n, rng.normal(size=n), {(i, i + 1): rng.normal() for i in range(n - 1)})
    energy, argmins = brute_force_minimize(q)
    assert q.energy(argmins[0]) == pytest.approx(energy)
    assert energy <= min(q.energy(rng.integers(0, 2, size=n)) for _ in range(200))


def test_brute_force_minimum_is_exact_across_chunks():
    # the only difference sits in the top bit, which separates the two 2^16 chunks
    q = Qubo(17, [1.0] * 16 + [-1e-12], offset=5.0)
    energy, argmins = brute_force_minimize(q)
    assert energy == 5.0 - 1e-12
    assert argmins == ["0" * 16 + "1"]


def test_brute_force_keeps_exact_ties_across_chunks():
    q = Qubo(17, [1.0] * 16 + [0.0], offset=5.0)
    energy, argmins = brute_force_minimize(q)
    assert energy == 5.0
    assert argmins == ["0" * 17, "0" * 16 + "1"]


def test_annealing_is_deterministic():
    q, _ = spanning_tree_qubo(complete_graph(3))
    schedule = AnnealSchedule(sweeps=200)
    assert simulated_annealing(q, schedule, seed=3) == simulated_annealing(q, schedule, seed=3)


def test_annealing_sets_all_negative_fields():
    energy, bits = simulated_annealing(Qubo(10, -np.ones(10)), AnnealSchedule(sweeps=200), seed=1)
    assert bits == "1" * 10
    assert energy == -10.0


def test_annealing_reported_energy_matches_bits(rng):
    q = Qubo(8, rng.normal(size=8), {(i, j): rng.normal() for i in range(8) for j in range(i + 1, 8)})
    energy, bits = simulated_annealing(q, AnnealSchedule(sweeps=100), seed=5)
    assert energy == q.energy(bits)


def test_annealing_schedule_validation():
    q = Qubo(2, [1.0, -1.0])
    with pytest.raises(ValueError):
        AnnealSchedule(sweeps=0).temperatures(q)
    with pytest.raises(ValueError):
        AnnealSchedule(t_start=0.001, t_end=0.01).temperatures(q)
    temps = AnnealSchedule(t_start=1.0, t_end=0.01, sweeps=4).temperatures(q)
    np.testing.assert_allclose(temps, [1.0, 0.01 ** 0.25, 0.01 ** 0.5, 0.01 ** 0.75])


def test_annealing_matches_brute_force_on_random_instances(rng):
    matches = 0
    for _ in range(20):
        n = 16
        quadratic = {(i, j): rng.normal() for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5}
        q = Qubo(n, rng.normal(size=n), quadratic)
        exact, _ = brute_force_minimize(q)
        energy, _, _ = anneal_restarts(q, AnnealSchedule(sweeps=1000), seeds=range(8))
        assert energy >= exact - 1e-9
        matches += abs(energy - exact) <= 1e-9 * max(1.0, abs(exact))
    assert matches >= 19


def test_restarts_report_best_seed():
    q, _ = spanning_tree_qubo(complete_graph(3))
    schedule = AnnealSchedule(sweeps=50)
    energy, bits, seed = anneal_restarts(q, schedule, seeds=[4, 9, 11], threads=2)
    assert simulated_annealing(q, schedule, seed) == (energy, bits)
    assert energy == min(simulated_annealing(q, schedule, s)[0] for s in (4, 9, 11))
    with pytest.raises(ValueError):
        anneal_restarts(q, schedule, seeds=[])


def test_annealing_never_undercuts_degree_bounded_optimum():
    q, _ = spanning_tree_qubo(complete_graph(5), SpanningTreeOptions(delta=2))
    energy, _, _ = anneal_restarts(q, AnnealSchedule(sweeps=200), seeds=range(4))
    # the cheapest degree-2 spanning tree of unit-weight K5 is a 4-edge path
    assert energy >= 4.0 - 1e-9


def test_annealing_finds_cheap_path_through_root():
    # 3-1-0-2-4 is the only degree-2 tree avoiding the weight-9 edges
    graph = complete_graph(5, [1, 1, 9, 9, 9, 1, 9, 9, 1, 9])
    q, enc = spanning_tree_qubo(graph, SpanningTreeOptions(delta=2))
    energy, bits, _ = anneal_restarts(q, enc.anneal_schedule(2000), seeds=range(16))
    decoded = decode_tree(bits, enc)
    assert energy == pytest.approx(4.0)
    assert decoded.feasible
    assert undirected(decoded.edges) == undirected([(0, 1), (0, 2), (1, 3), (2, 4)])


def cheapest_bounded_tree(graph, delta):
    best = None
    for tree in nx.SpanningTreeIterator(graph.to_networkx()):
        if max(d for _, d in tree.degree()) <= delta:
            weight = tree.size(weight="weight")
            best = weight if best is None else min(best, weight)
    return best


@pytest.mark.slow
def test_annealing_finds_degree_bounded_trees():
    rng = np.random.default_rng(2024)
    hits = 0
    for batch in range(100):
        n = 4 if batch % 2 == 0 else 5
        graph = complete_graph(n, rng.integers(1, 10, size=n * (n - 1) // 2))
        q, enc = spanning_tree_qubo(graph, SpanningTreeOptions(delta=2))
        expected = cheapest_bounded_tree(graph, 2)
        seeds = range(batch * 64, (batch + 1) * 64)
        energy, bits, _ = anneal_restarts(q, enc.anneal_schedule(2000), seeds=seeds)
        decoded = decode_tree(bits, enc)
        assert energy >= expected - 1e-9
        if decoded.feasible and energy == pytest.approx(expected):
            hits += 1
    assert hits >= 95
