import numpy as np
import pytest

from dagplace.fixtures import (
    chain_graph,
    dominant_device_fixture,
    hand_solved_fixture,
    random_cost_model,
    random_dag,
    split_fixture,
)
from dagplace.graph import make_graph, topo_sort
from dagplace.simulator import (
    BRUTE_FORCE_LIMIT,
    CostModel,
    MissingCost,
    NonPositiveLatency,
    TooLarge,
    brute_force_optimal,
    load_cost_model,
    reward,
    save_cost_model,
    simulate,
    speedup,
    volume,
)
from helpers import longest_path_latency


def two_device_cm():
    return CostModel(
        compute=[[1.0, 2.0], [3.0, 1.0]],
        transfer=[[0.0, 0.5], [0.5, 0.0]],
    )


def test_cost_model_validation():
    with pytest.raises(ValueError):
        CostModel(compute=np.zeros(3), transfer=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        CostModel(compute=np.zeros((2, 2)), transfer=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        CostModel(compute=np.zeros((2, 3)), transfer=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        CostModel(compute=[[np.inf, 1.0]], transfer=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        CostModel(compute=[[-1.0, 1.0]], transfer=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        CostModel(compute=[[1.0, 1.0]], transfer=[[0.1, 0.0], [0.0, 0.0]])
    cm = two_device_cm()
    assert cm.num_devices == 2 and cm.num_op_types == 2


def test_cost_model_round_trip(tmp_path):
    cm = two_device_cm()
    path = tmp_path / "cm.json"
    save_cost_model(cm, path)
    loaded = load_cost_model(path)
    assert np.array_equal(loaded.compute, cm.compute)
    assert np.array_equal(loaded.transfer, cm.transfer)


def test_volume():
    assert volume(()) == 1.0
    assert volume((5,)) == 5.0
    assert volume((2, 3, 4)) == 24.0
    assert volume((2, 0)) == 0.0


def test_simulate_single_node():
    g = make_graph([(0, 1, (3,))], [], num_op_types=2)
    cm = two_device_cm()
    assert simulate(g, [0], cm) == 3.0
    assert simulate(g, [1], cm) == 1.0


def test_simulate_chain_with_transfer():
    g = make_graph([(0, 0, (4,)), (1, 1, ())], [(0, 1)], num_op_types=2)
    cm = two_device_cm()
    # same device: 1 + 3
    assert simulate(g, [0, 0], cm) == 4.0
    # cross device: 1 + 0.5 * volume(4) + 1
    assert simulate(g, [0, 1], cm) == 4.0
    assert simulate(g, [1, 0], cm) == 2.0 + 0.5 * 4 + 3.0


def test_simulate_diamond_takes_slowest_branch(diamond):
    cm = CostModel(
        compute=[[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]],
        transfer=[[0.0, 0.0], [0.0, 0.0]],
    )
    # branches cost 1 and 2; the merge waits for the slower one
    assert simulate(diamond, [0, 0, 0, 0], cm) == 4.0


def test_simulate_parallel_branches_ignore_each_other():
    g = make_graph(
        [(0, 0, ()), (1, 0, ()), (2, 0, ())], [(0, 1), (0, 2)], num_op_types=1
    )
    cm = CostModel(compute=[[2.0, 2.0]], transfer=[[0.0, 0.0], [0.0, 0.0]])
    # both leaves run concurrently after the root
    assert simulate(g, [0, 0, 1], cm) == 4.0


def test_simulate_accepts_precomputed_order():
    g, cm = split_fixture()
    placement = np.zeros(10, dtype=np.intp)
    assert simulate(g, placement, cm, topo_sort(g)) == simulate(g, placement, cm)


def test_simulate_rejects_wrong_placement_length():
    g, cm = split_fixture()
    with pytest.raises(ValueError):
        simulate(g, [0, 1], cm)


def test_simulate_missing_cost():
    g = make_graph([(0, 4, ())], [], num_op_types=5)
    cm = two_device_cm()  # only 2 op types
    with pytest.raises(MissingCost):
        simulate(g, [0], cm)
    g2 = make_graph([(0, 0, ())], [], num_op_types=1)
    with pytest.raises(MissingCost):
        simulate(g2, [3], cm)


def test_simulate_matches_recursive_oracle():
    rng = np.random.default_rng(0)
    for trial in range(100):
        n = int(rng.integers(2, 18))
        g = random_dag(n, seed=trial, num_edges=int(rng.integers(1, 2 * n)))
        d = int(rng.integers(2, 4))
        cm = random_cost_model(8, num_devices=d, seed=trial)
        placement = rng.integers(0, d, size=n)
        ours = simulate(g, placement, cm)
        ref = longest_path_latency(g, placement, cm)
        assert ours == pytest.approx(ref, abs=1e-12)


def test_zero_transfer_latency_is_placement_free_on_identical_devices():
    g = random_dag(12, seed=3)
    compute = np.tile(np.random.default_rng(1).uniform(0.5, 2.0, size=(8, 1)), (1, 2))
    cm = CostModel(compute=compute, transfer=np.zeros((2, 2)))
    rng = np.random.default_rng(2)
    base = simulate(g, np.zeros(12, dtype=np.intp), cm)
    for _ in range(10):
        assert simulate(g, rng.integers(0, 2, size=12), cm) == pytest.approx(base)


def test_raising_compute_cost_never_helps():
    g, cm = split_fixture()
    placement = np.array([0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    base = simulate(g, placement, cm)
    bumped = CostModel(cm.compute + 0.3, cm.transfer)
    assert simulate(g, placement, bumped) >= base


def test_reward_and_speedup():
    assert reward(4.0) == 0.25
    with pytest.raises(NonPositiveLatency):
        reward(0.0)
    assert speedup(2.0, 1.0) == 50.0
    assert speedup(1.0, 2.0) == -100.0
    assert speedup(5.0, 5.0) == 0.0
    with pytest.raises(NonPositiveLatency):
        speedup(0.0, 1.0)


def test_brute_force_single_node_picks_cheapest_device():
    g = make_graph([(0, 1, ())], [], num_op_types=2)
    placement, latency = brute_force_optimal(g, two_device_cm())
    assert np.array_equal(placement, [1]) and latency == 1.0


def test_brute_force_lex_smallest_on_ties():
    g = chain_graph(3, seed=0)
    compute = np.ones((8, 2))
    cm = CostModel(compute, np.zeros((2, 2)))
    placement, latency = brute_force_optimal(g, cm)
    assert np.array_equal(placement, [0, 0, 0])
    assert latency == 3.0


def test_brute_force_guard():
    g = chain_graph(25, seed=0)
    cm = random_cost_model(8, num_devices=2, seed=0)
    assert 2**25 > BRUTE_FORCE_LIMIT
    with pytest.raises(TooLarge):
        brute_force_optimal(g, cm)


def test_brute_force_matches_hand_solved_fixture():
    g, cm, optimal, latency = hand_solved_fixture()
    placement, found = brute_force_optimal(g, cm)
    assert np.array_equal(placement, optimal)
    assert found == pytest.approx(latency, abs=1e-12)
    assert simulate(g, optimal, cm) == pytest.approx(latency, abs=1e-12)


def test_brute_force_dominates_random_placements():
    g, cm = dominant_device_fixture()
    _, best = brute_force_optimal(g, cm)
    rng = np.random.default_rng(7)
    for _ in range(200):
        lat = simulate(g, rng.integers(0, 2, size=g.num_nodes), cm)
        assert lat >= best - 1e-12


def test_brute_force_respects_device_override():
    g = make_graph([(0, 0, ())], [], num_op_types=1)
    cm = CostModel(
        compute=[[3.0, 2.0, 1.0]],
        transfer=np.zeros((3, 3)),
    )
    placement, latency = brute_force_optimal(g, cm, num_devices=2)
    assert np.array_equal(placement, [1]) and latency == 2.0
