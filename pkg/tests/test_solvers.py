import numpy as np
import pytest

from dope.energy import NonSubmodularError, SparseWeights
from dope.solvers import (EXHAUSTIVE, ICM, MAXFLOW, BlockSolverKind,
                          exhaustive_minimize, icm_sweep, pairwise_energy,
                          solve_block)

from oracles import enumerate_minimum


def no_pairs(n):
    return SparseWeights(n, np.zeros(0, int), np.zeros(0, int), np.zeros(0))


@pytest.mark.parametrize("kind", [MAXFLOW, EXHAUSTIVE, ICM])
def test_single_variable_all_kinds(kind):
    labels = solve_block(kind, np.array([-2.0]), no_pairs(1), 1.0)
    assert labels.tolist() == [1]


def test_kind_validation():
    with pytest.raises(ValueError):
        BlockSolverKind("simulated-annealing")
    with pytest.raises(ValueError):
        BlockSolverKind("icm", max_sweeps=0)


def test_exhaustive_empty_instance():
    labels, energy = exhaustive_minimize(np.zeros(0), no_pairs(0), 1.0)
    assert labels.size == 0 and energy == 0.0


def test_exhaustive_unary_only():
    labels, energy = exhaustive_minimize(np.array([1.0, 1.0]), no_pairs(2), 1.0)
    assert labels.tolist() == [0, 0] and energy == 0.0


def test_exhaustive_tie_break_lexicographic():
    # all labelings tie at zero: the lexicographically smallest wins
    labels, energy = exhaustive_minimize(np.zeros(3), no_pairs(3), 1.0)
    assert labels.tolist() == [0, 0, 0] and energy == 0.0


def test_exhaustive_matches_per_labeling_scan(rng):
    for _ in range(25):
        m = int(rng.integers(1, 6))
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)
                 if rng.random() < 0.6]
        if pairs:
            r, c = zip(*pairs)
            w = SparseWeights(m, r, c, rng.normal(size=len(pairs)),
                              allow_negative=True)
        else:
            w = no_pairs(m)
        linear = rng.normal(size=m)
        lam = float(rng.uniform(0, 2))
        labels, energy = exhaustive_minimize(linear, w, lam)
        _, e_oracle = enumerate_minimum(linear, w, lam)
        assert energy == pytest.approx(e_oracle, abs=1e-12)
        assert pairwise_energy(linear, w, lam, labels) == pytest.approx(energy)


def test_exhaustive_size_limit():
    with pytest.raises(ValueError):
        exhaustive_minimize(np.zeros(25), no_pairs(25), 1.0)


def test_maxflow_equals_exhaustive_on_submodular(rng):
    for _ in range(40):
        m = int(rng.integers(2, 15))
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)
                 if rng.random() < 0.3]
        if pairs:
            r, c = zip(*pairs)
            w = SparseWeights(m, r, c, rng.random(len(pairs)))
        else:
            w = no_pairs(m)
        linear = rng.uniform(-4, 4, m)
        lam = float(rng.uniform(0, 2))
        e_mf = pairwise_energy(linear, w, lam,
                               solve_block(MAXFLOW, linear, w, lam))
        e_ex = pairwise_energy(linear, w, lam,
                               solve_block(EXHAUSTIVE, linear, w, lam))
        assert e_mf == pytest.approx(e_ex, abs=1e-9)


def test_maxflow_equals_exhaustive_up_to_twenty_vars(rng):
    for m in (18, 19, 20):
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)
                 if rng.random() < 0.2]
        r, c = zip(*pairs)
        w = SparseWeights(m, r, c, rng.random(len(pairs)))
        linear = rng.uniform(-4, 4, m)
        e_mf = pairwise_energy(linear, w, 1.0,
                               solve_block(MAXFLOW, linear, w, 1.0))
        _, e_ex = exhaustive_minimize(linear, w, 1.0)
        assert e_mf == pytest.approx(e_ex, abs=1e-9)


def test_maxflow_kind_rejects_negative_weights():
    w = SparseWeights(2, [0], [1], [-1.0], allow_negative=True)
    with pytest.raises(NonSubmodularError):
        solve_block(MAXFLOW, np.zeros(2), w, 1.0)


def test_icm_fixed_point_at_optimum(rng):
    m = 6
    pairs = [(i, i + 1) for i in range(m - 1)]
    r, c = zip(*pairs)
    w = SparseWeights(m, r, c, rng.random(len(pairs)))
    linear = rng.uniform(-2, 2, m)
    opt = solve_block(EXHAUSTIVE, linear, w, 1.0)
    labels, improved = icm_sweep(opt, linear, w, 1.0)
    assert not improved
    assert np.array_equal(labels, opt)


def test_icm_sweep_flips_bad_single_variable():
    labels, improved = icm_sweep(np.array([1]), np.array([5.0]), no_pairs(1), 1.0)
    assert improved and labels.tolist() == [0]


def test_icm_nonsubmodular_two_variable():
    # disagreement is rewarded; greedy descent from (0,0) must reach it
    w = SparseWeights(2, [0], [1], [-1.0], allow_negative=True)
    linear = np.zeros(2)
    lab_ex, e_ex = exhaustive_minimize(linear, w, 1.0)
    assert e_ex == -1.0 and sorted(lab_ex.tolist()) == [0, 1]
    labels = solve_block(ICM, linear, w, 1.0, init=np.zeros(2, dtype=np.int8))
    assert pairwise_energy(linear, w, 1.0, labels) == -1.0


def test_icm_sweep_never_increases_energy(rng):
    for _ in range(20):
        m = 9
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)
                 if rng.random() < 0.4]
        r, c = zip(*pairs)
        vals = rng.normal(size=len(pairs))
        w = SparseWeights(m, r, c, vals, allow_negative=True)
        linear = rng.normal(size=m)
        labels = rng.integers(0, 2, m).astype(np.int8)
        e0 = pairwise_energy(linear, w, 1.0, labels)
        labels2, _ = icm_sweep(labels, linear, w, 1.0)
        e1 = pairwise_energy(linear, w, 1.0, labels2)
        assert e1 <= e0 + 1e-12


def test_icm_terminates_within_max_sweeps(rng):
    m = 16
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m) if rng.random() < 0.3]
    r, c = zip(*pairs)
    w = SparseWeights(m, r, c, rng.normal(size=len(pairs)), allow_negative=True)
    linear = rng.normal(size=m)
    kind = BlockSolverKind("icm", max_sweeps=3)
    labels = solve_block(kind, linear, w, 1.0)
    assert labels.shape == (m,)


def test_icm_restarts_pick_best(rng):
    w = SparseWeights(2, [0], [1], [-2.0], allow_negative=True)
    linear = np.array([0.1, 0.1])
    # from all-ones, flipping either variable helps; restarts explore more
    kind = BlockSolverKind("icm", restarts=3)
    labels = solve_block(kind, linear, w, 1.0, init=np.ones(2, dtype=np.int8))
    e = pairwise_energy(linear, w, 1.0, labels)
    _, e_best = exhaustive_minimize(linear, w, 1.0)
    assert e == pytest.approx(e_best)


@pytest.mark.parametrize("kind", [MAXFLOW, EXHAUSTIVE, ICM])
def test_solver_totality(kind, rng):
    for _ in range(10):
        m = int(rng.integers(1, 10))
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)
                 if rng.random() < 0.5]
        if pairs:
            r, c = zip(*pairs)
            w = SparseWeights(m, r, c, rng.random(len(pairs)))
        else:
            w = no_pairs(m)
        labels = solve_block(kind, rng.normal(size=m), w, 1.0)
        assert labels.shape == (m,)
        assert set(labels.tolist()) <= {0, 1}
