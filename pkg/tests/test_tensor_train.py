import json
import tracemalloc

import numpy as np
import pytest

from ttpricer import (
    CapacityError,
    TensorTrain,
    pointwise_oracle,
    tt_evaluate,
    tt_evaluate_many,
    tt_inner,
    tt_load_json,
    tt_rand_sample_diff,
    tt_save_json,
    tt_to_dense,
)
from conftest import random_tt


def brute_force_inner(bra, ket):
    total = 0.0 + 0.0j
    for idx in np.ndindex(*bra.phys_dims):
        total += np.conj(tt_evaluate(bra, idx)) * tt_evaluate(ket, idx)
    return total


class TestConstruction:
    def test_bond_mismatch_rejected(self):
        a = np.zeros((1, 2, 3), dtype=complex)
        b = np.zeros((4, 2, 1), dtype=complex)
        with pytest.raises(ValueError, match="bond mismatch"):
            TensorTrain([a, b])

    def test_boundary_bonds_must_be_one(self):
        with pytest.raises(ValueError, match="boundary"):
            TensorTrain([np.zeros((2, 3, 1), dtype=complex)])

    def test_cores_are_read_only(self):
        tt = random_tt(np.random.default_rng(0), (3, 3), 2)
        with pytest.raises(ValueError):
            tt.cores[0][0, 0, 0] = 1.0

    def test_shape_properties(self):
        tt = random_tt(np.random.default_rng(0), (4, 5, 6), 3)
        assert tt.d == 3
        assert tt.phys_dims == (4, 5, 6)
        assert tt.bond_dims == (1, 3, 3, 1)
        assert tt.n_entries == 120


class TestEvaluate:
    def test_single_core_lookup(self):
        tt = TensorTrain([np.array([[[1.0 + 0j], [2.0 + 0j]]]).reshape(1, 2, 1)])
        assert tt_evaluate(tt, [1]) == 2.0 + 0j

    def test_rank_one_separability(self):
        a = np.array([1.0 + 1j, 2.0, -0.5j])
        b = np.array([3.0, -1.0 + 2j])
        tt = TensorTrain([a.reshape(1, 3, 1), b.reshape(1, 2, 1)])
        for i in range(3):
            for j in range(2):
                assert tt_evaluate(tt, (i, j)) == pytest.approx(a[i] * b[j])

    def test_matches_dense_entry(self):
        tt = random_tt(np.random.default_rng(5), (4, 4, 4), 3)
        dense = tt_to_dense(tt)
        rng = np.random.default_rng(1)
        for _ in range(20):
            idx = tuple(rng.integers(0, 4, size=3))
            v = tt_evaluate(tt, idx)
            assert abs(v - dense[idx]) <= 1e-12 * max(abs(v), 1.0)

    def test_out_of_range_names_axis(self):
        tt = random_tt(np.random.default_rng(0), (3, 4), 2)
        with pytest.raises(IndexError, match="axis 1"):
            tt_evaluate(tt, (0, 4))
        with pytest.raises(IndexError, match="axis 0"):
            tt_evaluate_many(tt, np.array([[0, 0], [-1, 0]]))

    def test_evaluate_many_matches_scalar(self):
        tt = random_tt(np.random.default_rng(2), (3, 5, 2), 4)
        rng = np.random.default_rng(3)
        idx = np.column_stack([rng.integers(0, n, 50) for n in tt.phys_dims])
        batch = tt_evaluate_many(tt, idx)
        for row, val in zip(idx, batch):
            assert val == pytest.approx(tt_evaluate(tt, row), rel=1e-12)


class TestInner:
    def test_all_ones_counts_entries(self):
        ones = TensorTrain(
            [np.ones((1, 3, 1), dtype=complex), np.ones((1, 3, 1), dtype=complex)]
        )
        assert tt_inner(ones, ones) == pytest.approx(9.0 + 0j)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        bra = random_tt(rng, (5, 5, 5), 4)
        ket = random_tt(rng, (5, 5, 5), 4)
        fast = tt_inner(bra, ket)
        slow = brute_force_inner(bra, ket)
        assert abs(fast - slow) <= 1e-10 * abs(slow)

    def test_conjugates_the_bra(self):
        # bra stores i at index (0, 0), ket stores 1 there; zero elsewhere
        core_i = np.zeros((1, 2, 1), dtype=complex)
        core_i[0, 0, 0] = 1j
        core_one = np.zeros((1, 2, 1), dtype=complex)
        core_one[0, 0, 0] = 1.0
        basis = np.zeros((1, 2, 1), dtype=complex)
        basis[0, 0, 0] = 1.0
        bra = TensorTrain([core_i, basis])
        ket = TensorTrain([core_one, basis])
        assert tt_inner(bra, ket) == pytest.approx(-1j)

    def test_shape_mismatch_lists_shapes(self):
        a = random_tt(np.random.default_rng(0), (3, 4), 2)
        b = random_tt(np.random.default_rng(0), (3, 5), 2)
        with pytest.raises(ValueError, match=r"\[3, 4\].*\[3, 5\]"):
            tt_inner(a, b)

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(11)
        a = random_tt(rng, (4, 3, 5), 3)
        b = random_tt(rng, (4, 3, 5), 3)
        ab, ba = tt_inner(a, b), tt_inner(b, a)
        assert abs(ab - np.conj(ba)) <= 1e-12 * abs(ab)

    def test_self_inner_real_nonnegative(self):
        for seed in range(4):
            a = random_tt(np.random.default_rng(seed), (3, 4, 3), 3)
            val = tt_inner(a, a)
            assert abs(val.imag) <= 1e-12 * abs(val)
            assert val.real >= 0

    def test_linear_in_core_scaling(self):
        rng = np.random.default_rng(13)
        bra = random_tt(rng, (3, 4), 3)
        ket = random_tt(rng, (3, 4), 3)
        c = 0.7 - 1.9j
        scaled_cores = [ket.cores[0] * c, ket.cores[1]]
        scaled = TensorTrain(scaled_cores)
        lhs = tt_inner(bra, scaled)
        rhs = c * tt_inner(bra, ket)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)

    def test_no_dense_allocation_on_large_train(self):
        # 51^15 entries dense; the contraction must stay in megabytes
        rng = np.random.default_rng(17)
        bra = random_tt(rng, (51,) * 15, 25, scale=0.1)
        ket = random_tt(rng, (51,) * 15, 25, scale=0.1)
        tracemalloc.start()
        val = tt_inner(bra, ket)
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert np.isfinite(val.real) and np.isfinite(val.imag)
        assert peak < 200 * 1024 * 1024


class TestToDense:
    def test_single_core_is_vector(self):
        vec = np.array([1 + 2j, -3.0, 0.5j])
        tt = TensorTrain([vec.reshape(1, 3, 1)])
        np.testing.assert_allclose(tt_to_dense(tt), vec)

    def test_rank_one_outer_product(self):
        a = np.array([1.0, 2.0, 3.0 + 1j])
        b = np.array([-1.0j, 4.0])
        tt = TensorTrain([a.reshape(1, 3, 1), b.reshape(1, 2, 1)])
        np.testing.assert_allclose(tt_to_dense(tt), np.outer(a, b))

    def test_spot_check_against_evaluate(self):
        tt = random_tt(np.random.default_rng(23), (6, 6, 6, 6), 5)
        dense = tt_to_dense(tt)
        rng = np.random.default_rng(29)
        for _ in range(100):
            idx = tuple(rng.integers(0, 6, size=4))
            assert dense[idx] == pytest.approx(tt_evaluate(tt, idx), rel=1e-12)

    def test_capacity_error_states_sizes(self):
        tt = random_tt(np.random.default_rng(0), (10, 10, 10), 2)
        with pytest.raises(CapacityError, match="1000.*500"):
            tt_to_dense(tt, max_entries=500)


class TestRandSampleDiff:
    def test_zero_when_oracle_matches(self):
        tt = random_tt(np.random.default_rng(31), (4, 5), 3)

        def oracle(idx):
            return tt_evaluate_many(tt, idx)

        assert tt_rand_sample_diff(tt, oracle, 500, seed=0) == 0.0

    def test_ratio_forced_to_one(self):
        zero = TensorTrain([np.zeros((1, 3, 1), dtype=complex)] * 2)

        def ones(idx):
            return np.ones(len(idx), dtype=complex)

        assert tt_rand_sample_diff(zero, ones, 200, seed=1) == pytest.approx(1.0)

    def test_matches_exhaustive_recomputation(self):
        # small grid: recompute the sampled sums with independent arithmetic
        tt = random_tt(np.random.default_rng(37), (2, 2), 2)
        dense = tt_to_dense(tt)
        bump = 0.25 - 0.1j

        def oracle(idx):
            return np.array([dense[tuple(row)] + bump for row in idx])

        m, seed = 4000, 5
        got = tt_rand_sample_diff(tt, oracle, m, seed)
        rng = np.random.default_rng(seed)
        idx = np.empty((m, 2), dtype=np.int64)
        for axis in range(2):
            idx[:, axis] = rng.integers(0, 2, size=m)
        num = sum(abs(bump) for _ in range(m))
        den = sum(abs(dense[tuple(row)] + bump) for row in idx)
        assert got == pytest.approx(num / den, rel=1e-12)

    def test_deterministic_in_seed(self):
        tt = random_tt(np.random.default_rng(41), (3, 3, 3), 2)

        def oracle(idx):
            return np.ones(len(idx), dtype=complex)

        a = tt_rand_sample_diff(tt, oracle, 300, seed=9)
        b = tt_rand_sample_diff(tt, oracle, 300, seed=9)
        assert a == b

    def test_pointwise_oracle_attaches_failing_index(self):
        tt = random_tt(np.random.default_rng(43), (3, 3), 2)

        def bad(idx_tuple):
            if idx_tuple == (1, 1):
                raise RuntimeError("boom")
            return 1.0

        with pytest.raises(RuntimeError, match=r"\(1, 1\)"):
            tt_rand_sample_diff(tt, pointwise_oracle(bad), 200, seed=0)

    def test_rejects_bad_sample_count(self):
        tt = random_tt(np.random.default_rng(0), (3,), 1)
        with pytest.raises(ValueError):
            tt_rand_sample_diff(tt, lambda i: np.ones(len(i)), 0, seed=0)


class TestSerialization:
    def test_roundtrip_exact(self, tmp_path):
        tt = random_tt(np.random.default_rng(47), (4, 3, 5), 3)
        path = tmp_path / "train.json"
        tt_save_json(tt, path)
        back = tt_load_json(path)
        assert back.phys_dims == tt.phys_dims
        assert back.bond_dims == tt.bond_dims
        for a, b in zip(tt.cores, back.cores):
            np.testing.assert_array_equal(a, b)

    def test_container_is_self_describing(self, tmp_path):
        tt = random_tt(np.random.default_rng(0), (2, 2), 2)
        path = tmp_path / "train.json"
        tt_save_json(tt, path)
        payload = json.loads(path.read_text())
        assert payload["format"] == "tensor-train"
        assert payload["phys_dims"] == [2, 2]
        # row-major re/im pairs: core 0 has 1*2*2 complex entries -> 8 floats
        assert len(payload["cores"][0]) == 8

    def test_rejects_foreign_payload(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text(json.dumps({"format": "something-else"}))
        with pytest.raises(ValueError, match="not a tensor-train"):
            tt_load_json(path)
