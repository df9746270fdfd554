import numpy as np
import pytest

from dope.grid import GridShape
from dope.partition import (make_partition, near_isotropic_factors, reconstruct,
                            scatter_add, select)

from oracles import dense_selection


def brute_counts(shape, partition):
    """Oracle: per-pixel membership count from the block extents."""
    counts = np.zeros(shape.n, dtype=int)
    for i in range(shape.n):
        coords = np.unravel_index(i, shape.dims)
        for b in partition.blocks:
            if all(lo <= c < hi for c, (lo, hi) in zip(coords, b.extent)):
                counts[i] += 1
    return counts


def test_exact_tiling_no_overlap():
    shape = GridShape((8, 8))
    p = make_partition(shape, (2, 2), 0)
    assert p.k == 4
    assert all(b.size == 16 for b in p.blocks)
    assert np.all(p.counts == 1)
    assert p.blocks[0].extent == ((0, 4), (0, 4))
    assert p.blocks[3].extent == ((4, 8), (4, 8))


def test_identity_partition():
    shape = GridShape((8, 8))
    for overlap in (0, 10, 25):
        p = make_partition(shape, (1, 1), overlap)
        assert p.k == 1
        assert np.array_equal(p.blocks[0].pixels, np.arange(64))
        assert np.all(p.counts == 1)


def test_overlap_25_membership_counts():
    # base length 4, growth ceil(0.25*4/2) = 1 per side
    shape = GridShape((8, 8))
    p = make_partition(shape, (2, 2), 25)
    counts = p.counts.reshape(8, 8)
    assert np.array_equal(p.counts, brute_counts(shape, p))
    center = counts[3:5, 3:5]
    assert np.all(center == 4)
    assert counts[3, 0] == 2 and counts[0, 3] == 2
    assert counts[0, 0] == 1 and counts[7, 7] == 1


def test_overlap_10_grows_small_blocks():
    # ceil keeps the overlap non-trivial even for short ranges
    shape = GridShape((8, 8))
    p = make_partition(shape, (2, 2), 10)
    assert (p.counts > 1).any()


@pytest.mark.parametrize("dims,k_per_axis,overlap", [
    ((6, 7), (2, 3), 0), ((6, 7), (3, 2), 10), ((9, 5), (2, 2), 25),
    ((4, 5, 6), (2, 1, 3), 10), ((4, 4, 4), (2, 2, 2), 25),
])
def test_counts_match_brute_force(dims, k_per_axis, overlap):
    shape = GridShape(dims)
    p = make_partition(shape, k_per_axis, overlap)
    assert np.array_equal(p.counts, brute_counts(shape, p))
    assert p.counts.min() >= 1


def test_block_pixels_are_extent_linearization():
    shape = GridShape((5, 6))
    p = make_partition(shape, (2, 2), 25)
    for b in p.blocks:
        expected = [r * 6 + c
                    for r in range(b.extent[0][0], b.extent[0][1])
                    for c in range(b.extent[1][0], b.extent[1][1])]
        assert np.array_equal(b.pixels, expected)
        assert np.all(np.diff(b.pixels) > 0)


def test_partition_errors():
    with pytest.raises(ValueError):
        make_partition(GridShape((2, 2)), (3, 3), 0)   # K > n and k > dim
    with pytest.raises(ValueError):
        make_partition(GridShape((8, 8)), (2, 2), 15)  # unsupported overlap
    with pytest.raises(ValueError):
        make_partition(GridShape((8, 8)), (2,), 0)     # axis count mismatch


def test_select_identity_block():
    shape = GridShape((4, 4))
    p = make_partition(shape, (1, 1), 0)
    v = np.arange(16.0)
    assert np.array_equal(select(p.blocks[0], v), v)


def test_select_gathers_pixel_indices():
    shape = GridShape((4, 4))
    p = make_partition(shape, (2, 2), 0)
    v = np.arange(16.0)
    for b in p.blocks:
        assert np.array_equal(select(b, v), b.pixels.astype(float))


def test_select_matches_dense_matrix(rng):
    shape = GridShape((6, 8))
    p = make_partition(shape, (2, 3), 25)
    v = rng.normal(size=shape.n)
    for b in p.blocks:
        s = dense_selection(b, shape.n)
        assert np.allclose(select(b, v), s @ v)


def test_select_length_mismatch():
    p = make_partition(GridShape((4, 4)), (2, 2), 0)
    with pytest.raises(ValueError):
        select(p.blocks[3], np.zeros(10))


def test_scatter_add_matches_dense_transpose(rng):
    shape = GridShape((6, 8))
    p = make_partition(shape, (3, 2), 10)
    for b in p.blocks:
        w = rng.normal(size=b.size)
        acc = rng.normal(size=shape.n)
        expected = acc + dense_selection(b, shape.n).T @ w
        assert np.allclose(scatter_add(b, w, acc.copy()), expected)


def test_scatter_add_identity_and_zero():
    shape = GridShape((3, 3))
    p = make_partition(shape, (1, 1), 0)
    acc = np.zeros(9)
    scatter_add(p.blocks[0], np.arange(9.0), acc)
    assert np.array_equal(acc, np.arange(9.0))
    scatter_add(p.blocks[0], np.zeros(9), acc)
    assert np.array_equal(acc, np.arange(9.0))
    with pytest.raises(ValueError):
        scatter_add(p.blocks[0], np.zeros(5), acc)


def test_reconstruct_single_block():
    shape = GridShape((3, 4))
    p = make_partition(shape, (1, 1), 0)
    y = np.arange(12.0) / 11.0
    assert np.array_equal(reconstruct(p, [y]), y)


def test_reconstruct_consistent_overlap_exact():
    shape = GridShape((8, 8))
    p = make_partition(shape, (2, 2), 25)
    y = np.ones(64)
    rec = reconstruct(p, [select(b, y) for b in p.blocks])
    assert np.array_equal(rec, y)


def test_reconstruct_disagreement_averages():
    shape = GridShape((1, 3))
    p = make_partition(shape, (1, 2), 25)   # two blocks overlapping mid-pixel
    overlap_pixels = set(p.blocks[0].pixels) & set(p.blocks[1].pixels)
    assert overlap_pixels
    labels = [np.zeros(p.blocks[0].size), np.ones(p.blocks[1].size)]
    rec = reconstruct(p, labels)
    for pix in overlap_pixels:
        assert rec[pix] == pytest.approx(0.5)


def test_reconstruct_select_identity_randomized(rng):
    # binary labelings survive the gather/average round-trip exactly
    for _ in range(50):
        dims = tuple(int(rng.integers(1, 9)) for _ in range(2))
        shape = GridShape(dims)
        k = tuple(int(rng.integers(1, d + 1)) for d in dims)
        p = make_partition(shape, k, int(rng.choice([0, 10, 25])))
        y = rng.integers(0, 2, shape.n).astype(float)
        rec = reconstruct(p, [select(b, y) for b in p.blocks])
        assert np.array_equal(rec, y)


def test_counts_equal_scattered_ones():
    shape = GridShape((7, 6))
    p = make_partition(shape, (3, 2), 25)
    acc = np.zeros(shape.n)
    for b in p.blocks:
        scatter_add(b, np.ones(b.size), acc)
    assert np.array_equal(acc, p.counts.astype(float))


def test_complement_operator_identity(rng):
    # sum over other blocks of S'S equals diag(counts) - S_k'S_k
    shape = GridShape((6, 6))
    p = make_partition(shape, (2, 2), 25)
    mats = [dense_selection(b, shape.n) for b in p.blocks]
    q = np.diag(p.counts.astype(float))
    for k, b in enumerate(p.blocks):
        others = sum(m.T @ m for i, m in enumerate(mats) if i != k)
        assert np.allclose(others, q - mats[k].T @ mats[k])


@pytest.mark.parametrize("k_total,dims,expected", [
    (32, (2000, 3000), (4, 8)),
    (64, (2000, 3000), (8, 8)),
    (128, (3000, 2000), (16, 8)),
    (32, (200, 200, 100), (4, 4, 2)),
    (64, (200, 200, 100), (4, 4, 4)),
    (128, (200, 200, 100), (4, 8, 4)),
])
def test_near_isotropic_factors(k_total, dims, expected):
    got = near_isotropic_factors(k_total, dims)
    assert int(np.prod(got)) == k_total
    assert got == expected


def test_near_isotropic_factors_respects_axis_limits():
    # the short axis caps its factor; the long axis absorbs the rest
    assert near_isotropic_factors(8, (2, 100)) == (1, 8)
    with pytest.raises(ValueError):
        near_isotropic_factors(64, (2, 2))
