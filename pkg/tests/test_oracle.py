import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pairoverlap.engine import Assignment, FitConfig, assign_all, assign_element, fit, objective
from pairoverlap.oracle import brute_force_assign, membership_cost, naive_objective, reference_kmeans

from conftest import M_VALUES, random_dataset


def test_brute_force_single_cluster():
    assert brute_force_assign([3.0, 4.0], [[0.0, 0.0]], 2.0) == Assignment(0)


def test_brute_force_three_way_tie_prefers_first_singleton():
    # costs: {0} 0.25, {1} 0.25, {0,1} (0.25 + 0.25) / 2 = 0.25
    assert brute_force_assign([0.5], [[0.0], [1.0]], 1.0) == Assignment(0)
    assert membership_cost([0.5], [[0.0], [1.0]], (0, 1), 1.0) == 0.25


def test_brute_force_errors():
    with pytest.raises(ValueError):
        brute_force_assign([1.0], [], 2.0)
    with pytest.raises(ValueError):
        brute_force_assign([1.0, 2.0], [[1.0]], 2.0)


def test_brute_force_finds_dual_membership():
    assert brute_force_assign([0.5], [[0.0], [1.0], [7.0]], math.log2(5)) == Assignment(0, 1)


@settings(max_examples=500, deadline=None)
@given(
    st.integers(1, 6).flatmap(
        lambda k: st.integers(1, 4).flatmap(
            lambda n: st.tuples(
                arrays(np.float64, (n,), elements=st.floats(-5, 5)),
                arrays(np.float64, (k, n), elements=st.floats(-5, 5)),
            )
        )
    ),
    st.floats(1.0, 4.0),
)
def test_engine_assignment_attains_brute_force_minimum(x_means, m):
    # hypothesis readily produces exact ties, so compare costs rather than memberships
    x, means = x_means
    engine = assign_element(x, means, m)
    oracle = brute_force_assign(x, means, m)
    assert membership_cost(x, means, engine.clusters, m) == membership_cost(x, means, oracle.clusters, m)


def test_naive_objective_examples():
    points = np.array([[1.0], [2.0]])
    assert naive_objective(points, [Assignment(0), Assignment(1)], points, 3.0) == 0.0
    # dual element at m = 2: (d1 + d2) / 4
    assert naive_objective([[0.5, 0.0]], [Assignment(0, 1)], [[0.0, 0.0], [2.0, 0.0]], 2.0) == pytest.approx(
        (0.25 + 2.25) / 4
    )


def test_naive_objective_shape_errors():
    with pytest.raises(ValueError):
        naive_objective([[0.0]], [Assignment(0), Assignment(0)], [[0.0]], 2.0)
    with pytest.raises(ValueError):
        naive_objective([[0.0, 1.0]], [Assignment(0)], [[0.0]], 2.0)


def test_naive_objective_matches_engine(rng):
    for _ in range(50):
        points, k = random_dataset(rng, max_n_points=80)
        m = float(rng.choice(M_VALUES))
        means = points[rng.choice(points.shape[0], k, replace=False)] + rng.normal(scale=0.3, size=(k, points.shape[1]))
        assignments = assign_all(points, means, m)
        expected = naive_objective(points, assignments, means, m)
        assert objective(points, assignments, means, m) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_reference_kmeans_k_distinct_points(rng):
    points = rng.normal(size=(4, 3))
    model = reference_kmeans(points, points, 50)
    assert model.objective == 0.0
    assert model.primary.tolist() == [0, 1, 2, 3]


def test_reference_kmeans_identical_points():
    points = np.full((6, 2), 3.0)
    model = reference_kmeans(points, points[:2], 50)
    assert model.iterations == 1 and model.converged
    assert set(model.primary.tolist()) == {0}


def test_reference_kmeans_matches_m1_engine(rng):
    for _ in range(15):
        points, k = random_dataset(rng, max_n_points=120)
        init = points[rng.choice(points.shape[0], k, replace=False)]
        ref_trace, eng_trace = [], []
        ref = reference_kmeans(points, init, 500, trace=ref_trace)
        eng = fit(points, FitConfig(k=k, m=1.0), initial_means=init, trace=eng_trace)
        eng_labels = [r.primary.tolist() for r in eng_trace if r.stage == "assign"]
        assert all((r.secondary < 0).all() for r in eng_trace)
        assert eng_labels == ref_trace
        np.testing.assert_allclose(eng.means, ref.means, rtol=1e-12, atol=1e-12)
