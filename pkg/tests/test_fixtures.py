import numpy as np
import pytest

from dagplace.fixtures import (
    chain_graph,
    diamond_chain_graph,
    dominant_device_fixture,
    hand_solved_fixture,
    inception_like,
    random_cost_model,
    random_dag,
    split_fixture,
)
from dagplace.graph import validate
from dagplace.simulator import brute_force_optimal, simulate


def test_chain_graph_shape():
    g = chain_graph(7)
    assert g.num_nodes == 7
    assert g.edges == tuple((i, i + 1) for i in range(6))
    with pytest.raises(ValueError):
        chain_graph(0)


def test_chain_graph_seeded():
    assert chain_graph(5, seed=3) == chain_graph(5, seed=3)
    assert chain_graph(5, seed=3) != chain_graph(5, seed=4)


def test_diamond_chain_sizes():
    g = diamond_chain_graph(4)
    assert g.num_nodes == 4 and g.num_edges == 4
    g = diamond_chain_graph(10)
    assert g.num_nodes == 10 and g.num_edges == 12
    # requested sizes round to the nearest 1 + 3k
    assert diamond_chain_graph(11).num_nodes == 10
    assert diamond_chain_graph(12).num_nodes == 13


def test_random_dag_edge_counts():
    g = random_dag(40, seed=0)
    assert g.num_nodes == 40
    assert g.num_edges == round(1.05 * 40)
    assert random_dag(30, seed=1, num_edges=44).num_edges == 44
    # requests beyond the complete DAG clamp to it
    assert random_dag(3, seed=2, num_edges=10).num_edges == 3


def test_random_dag_is_validated_and_seeded():
    g = random_dag(25, seed=9)
    validate(g)
    assert g == random_dag(25, seed=9)
    assert g != random_dag(25, seed=10)


def test_inception_like_degree_band():
    for seed in range(20):
        g = inception_like(60, seed=seed)
        validate(g)
        assert g.num_nodes >= 60
        avg = g.num_edges / g.num_nodes
        assert 1.0 <= avg < 1.2, (seed, avg)


def test_random_cost_model_structure():
    cm = random_cost_model(8, num_devices=3, seed=0)
    assert cm.compute.shape == (8, 3)
    assert cm.transfer.shape == (3, 3)
    assert ((0.5 <= cm.compute[:, 0]) & (cm.compute[:, 0] < 2.0)).all()
    assert np.array_equal(cm.transfer, cm.transfer.T)
    assert not np.diag(cm.transfer).any()
    off = cm.transfer[0, 1]
    assert 0.005 <= off < 0.02
    for d in (1, 2):
        faster = cm.compute[:, d] < cm.compute[:, 0]
        assert faster.sum() == 4  # half of the op types
    with pytest.raises(ValueError):
        random_cost_model(0)
    with pytest.raises(ValueError):
        random_cost_model(4, num_devices=1)


def test_dominant_device_fixture_optimum_is_all_device_one():
    g, cm = dominant_device_fixture()
    placement, latency = brute_force_optimal(g, cm)
    assert np.array_equal(placement, np.ones(6))
    assert latency == pytest.approx(3.75, abs=1e-12)


def test_split_fixture_optimum_splits_the_arms():
    g, cm = split_fixture()
    placement, latency = brute_force_optimal(g, cm)
    assert np.array_equal(placement, [0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    assert latency == pytest.approx(5.1, abs=1e-12)
    assert simulate(g, np.zeros(10, dtype=np.intp), cm) == pytest.approx(13.0)
    assert simulate(g, np.ones(10, dtype=np.intp), cm) == pytest.approx(13.0)


def test_hand_solved_fixture_matches_its_annotation():
    g, cm, optimal, latency = hand_solved_fixture()
    assert simulate(g, optimal, cm) == pytest.approx(latency, abs=1e-12)
    found, best = brute_force_optimal(g, cm)
    assert np.array_equal(found, optimal)
    assert best == pytest.approx(latency, abs=1e-12)
