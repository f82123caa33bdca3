"""Tests for the boundary (bit) and assignment (index) feature maps."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sik import (
    NO_SPHERE,
    ShapeError,
    SphereEnsemble,
    build_partitioning,
    fit_ensemble,
    ik_dense_bits_per_point,
    ik_map,
    ik_map_batch,
    ik_store_bytes_per_point,
    locate,
    sik_map,
    sik_map_batch,
    sik_store_bits_per_point,
    sik_store_bytes_per_point,
)
from sik.features import pack_bits, unpack_bits


def _rng(seed=0):
    return np.random.default_rng(seed)


def two_partitioning_ensemble():
    """t=2, psi=3 construction in 1-D.

    First partitioning: spheres at 0, 10, 20, all with radius 10.
    Second partitioning: spheres at 100, 110, 120, all with radius 10.
    The probe point 10.0 sits at the second sphere's center of the first
    partitioning and outside everything in the second.
    """
    data = np.array([[0.0], [10.0], [20.0], [100.0], [110.0], [120.0]])
    p1 = build_partitioning(data, [0, 1, 2])
    p2 = build_partitioning(data, [3, 4, 5])
    return SphereEnsemble.from_partitionings([p1, p2], seed=0)


class TestWorkedExample:
    def test_assignment_feature_dense_expansion(self):
        ens = two_partitioning_ensemble()
        feature = ik_map(ens, np.array([10.0]))
        assert feature.assignments.tolist() == [1, NO_SPHERE]
        assert feature.dense().tolist() == [0, 1, 0, 0, 0, 0]

    def test_boundary_feature(self):
        ens = two_partitioning_ensemble()
        assert sik_map(ens, np.array([10.0])).bits().tolist() == [0, 1]

    def test_single_partitioning_inside_and_outside(self):
        data = np.array([[0.0], [10.0], [20.0]])
        ens = SphereEnsemble.from_partitionings([build_partitioning(data, [0, 1, 2])])
        assert sik_map(ens, np.array([3.0])).bits().tolist() == [0]
        assert sik_map(ens, np.array([55.0])).bits().tolist() == [1]


class TestSikMap:
    def test_center_in_every_partitioning_is_all_zero(self):
        data = _rng(1).standard_normal((12, 4))
        # psi = n: every point is a center of every partitioning
        ens = fit_ensemble(data, psi=12, t=8, seed=3)
        assert sik_map(ens, data[5]).popcount() == 0

    def test_remote_point_is_all_one(self):
        data = _rng(2).standard_normal((30, 4))
        ens = fit_ensemble(data, psi=8, t=6, seed=0)
        far = np.full(4, 1e6)
        f = sik_map(ens, far)
        assert f.bits().tolist() == [1] * 6
        assert f.popcount() == 6

    def test_dimension_mismatch(self):
        ens = fit_ensemble(_rng().standard_normal((10, 3)), psi=4, t=2, seed=0)
        with pytest.raises(ShapeError):
            sik_map(ens, np.zeros(4))


class TestIkMap:
    def test_sampled_center_maps_to_its_own_index(self):
        data = _rng(3).standard_normal((20, 2))
        ens = fit_ensemble(data, psi=6, t=4, seed=1)
        center0 = ens.centers[0][0]
        assert ik_map(ens, center0).assignments[0] == 0

    def test_matches_locate_per_partitioning(self):
        data = _rng(4).standard_normal((25, 3))
        ens = fit_ensemble(data, psi=7, t=5, seed=2)
        for x in _rng(5).standard_normal((10, 3)) * 2:
            feature = ik_map(ens, x)
            for i in range(ens.t):
                expected = locate(ens.partitioning(i), x)
                got = int(feature.assignments[i])
                assert got == (NO_SPHERE if expected is None else expected)


class TestBatches:
    def test_singleton_batch_equals_single_map(self):
        data = _rng(6).standard_normal((30, 5))
        ens = fit_ensemble(data, psi=6, t=9, seed=4)
        x = data[3]
        sik_batch = sik_map_batch(ens, x[None, :])
        ik_batch = ik_map_batch(ens, x[None, :])
        assert len(sik_batch) == 1 and len(ik_batch) == 1
        assert np.array_equal(sik_batch[0].words, sik_map(ens, x).words)
        assert np.array_equal(ik_batch[0].assignments, ik_map(ens, x).assignments)

    def test_permuting_rows_permutes_outputs(self):
        data = _rng(7).standard_normal((40, 3))
        ens = fit_ensemble(data, psi=5, t=6, seed=5)
        queries = _rng(8).standard_normal((15, 3))
        perm = _rng(9).permutation(15)
        direct_ik = ik_map_batch(ens, queries).assignments
        permuted_ik = ik_map_batch(ens, queries[perm]).assignments
        assert np.array_equal(permuted_ik, direct_ik[perm])
        direct_sik = sik_map_batch(ens, queries).words
        permuted_sik = sik_map_batch(ens, queries[perm]).words
        assert np.array_equal(permuted_sik, direct_sik[perm])

    def test_batch_equals_per_point_loop(self):
        data = _rng(10).standard_normal((60, 4))
        ens = fit_ensemble(data, psi=8, t=11, seed=6)
        queries = _rng(11).standard_normal((200, 4)) * 1.5
        batch_sik = sik_map_batch(ens, queries)
        batch_ik = ik_map_batch(ens, queries)
        for i, x in enumerate(queries):
            assert np.array_equal(batch_sik[i].words, sik_map(ens, x).words)
            assert np.array_equal(batch_ik[i].assignments, ik_map(ens, x).assignments)

    def test_dimension_mismatch(self):
        ens = fit_ensemble(_rng().standard_normal((10, 3)), psi=4, t=2, seed=0)
        with pytest.raises(ShapeError):
            sik_map_batch(ens, np.zeros((5, 2)))
        with pytest.raises(ShapeError):
            ik_map_batch(ens, np.zeros((5, 2)))


class TestConsistency:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_outside_bit_iff_no_assignment(self, seed):
        rng = np.random.default_rng(seed)
        data = rng.standard_normal((18, 3))
        ens = fit_ensemble(data, psi=5, t=6, seed=seed % 997)
        queries = rng.standard_normal((12, 3)) * 2.5
        bits = sik_map_batch(ens, queries).bits()
        assignments = ik_map_batch(ens, queries).assignments
        assert np.array_equal(bits == 1, assignments == NO_SPHERE)

    def test_training_centers_are_covered(self):
        # Every point used as a center of partitioning i must have bit i = 0,
        # including duplicated rows that produce zero-radius spheres.
        base = _rng(12).standard_normal((6, 2))
        data = np.vstack([base, base[:3]])
        ens = fit_ensemble(data, psi=9, t=5, seed=7)
        for i in range(ens.t):
            bits = sik_map_batch(ens, ens.centers[i]).bits()
            assert (bits[:, i] == 0).all()

    def test_idempotent(self):
        data = _rng(13).standard_normal((20, 3))
        ens = fit_ensemble(data, psi=6, t=4, seed=8)
        x = data[0] * 1.1
        assert np.array_equal(sik_map(ens, x).words, sik_map(ens, x).words)
        assert np.array_equal(ik_map(ens, x).assignments, ik_map(ens, x).assignments)


class TestEncodings:
    def test_packed_size_and_reduction_factor(self):
        for psi, t in [(32, 200), (256, 200), (16, 7), (512, 65)]:
            assert sik_store_bits_per_point(t) == t
            assert sik_store_bytes_per_point(t) == (t + 7) // 8
            assert ik_dense_bits_per_point(psi, t) == psi * t
            # dense-to-boundary reduction factor is exactly psi
            assert ik_dense_bits_per_point(psi, t) // sik_store_bits_per_point(t) == psi

    def test_stored_words_match_declared_size(self):
        data = _rng(14).standard_normal((40, 2))
        for t in (1, 63, 64, 65, 200):
            ens = fit_ensemble(data, psi=4, t=t, seed=9)
            batch = sik_map_batch(ens, data)
            assert batch.words.shape == (40, (t + 63) // 64)
            assert batch.words.dtype == np.uint64

    def test_compact_assignment_store_is_below_dense(self):
        for psi, t in [(16, 200), (64, 200), (512, 100)]:
            compact_bits = ik_store_bytes_per_point(psi, t) * 8
            assert compact_bits < ik_dense_bits_per_point(psi, t)

    @given(
        st.integers(1, 130),
        st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=40, deadline=None)
    def test_pack_unpack_round_trip(self, t, seed):
        bits = (np.random.default_rng(seed).random((5, t)) < 0.5).astype(np.uint8)
        assert np.array_equal(unpack_bits(pack_bits(bits), t), bits)

    def test_dense_expansion_has_at_most_one_bit_per_block(self):
        data = _rng(15).standard_normal((30, 3))
        ens = fit_ensemble(data, psi=5, t=7, seed=10)
        for x in _rng(16).standard_normal((8, 3)) * 2:
            f = ik_map(ens, x)
            dense = f.dense().reshape(ens.t, ens.psi)
            assert (dense.sum(axis=1) <= 1).all()
            assert int(dense.sum()) == ens.t - f.outside_count()
