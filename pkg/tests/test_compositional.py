import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bdarch.compositional import (
    CompositionError, CompositionalSeries, PartitionError, alr, alr_change_matrix, alr_inv, as_composition,
    clr, clr_inv, close, ilr, pivot_partition, validate_partition,
)


def test_alr_equal_shares_is_zero():
    np.testing.assert_array_equal(alr(np.full(4, 0.25), ref=3), np.zeros(3))


def test_alr_direct_ratio():
    np.testing.assert_allclose(alr([0.5, 0.25, 0.25], ref=2), [np.log(2), 0.0], atol=1e-15)


def test_alr_default_reference_is_last():
    c = np.array([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(alr(c), np.log(c[:3] / c[3]))


def test_alr_keeps_order_when_dropping_reference():
    c = np.array([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(alr(c, ref=1), np.log(np.array([0.1, 0.3, 0.4]) / 0.2))


def test_alr_inv_examples():
    np.testing.assert_allclose(alr_inv(np.zeros(3), ref=3), np.full(4, 0.25))
    np.testing.assert_allclose(alr_inv([np.log(2), 0.0], ref=2), [0.5, 0.25, 0.25])


def test_roundtrip_1000_random_any_reference(rng):
    for J in (2, 3, 5, 8):
        c = rng.dirichlet(np.ones(J), size=250)
        for ref in range(J):
            np.testing.assert_allclose(alr_inv(alr(c, ref), ref), c, atol=1e-12, rtol=0)


def test_alr_zero_component_rejected():
    with pytest.raises(CompositionError):
        alr([0.0, 0.5, 0.5])


def test_alr_inv_guards_overflow_and_never_hits_boundary():
    out = alr_inv(np.array([800.0, -800.0, 0.0]))
    assert np.all(out > 0) and np.all(out < 1)
    assert abs(out.sum() - 1) < 1e-15


def test_alr_inv_nonfinite_rejected():
    with pytest.raises(CompositionError):
        alr_inv([np.nan, 0.0])


def test_alr_scale_invariance(rng):
    raw = rng.uniform(0.1, 3, size=6)
    np.testing.assert_allclose(alr(close(7.3 * raw)), alr(close(raw)), atol=1e-13)


def test_clr_zero_sum_and_equal_shares():
    np.testing.assert_allclose(clr(np.full(5, 0.2)), 0.0, atol=1e-15)
    assert abs(clr([0.5, 0.25, 0.25]).sum()) < 1e-10


def test_clr_is_linear_in_alr(rng):
    J = 5
    c = rng.dirichlet(np.ones(J), size=20)
    # clr = H [alr; 0] with H the centering matrix
    H = np.eye(J) - np.full((J, J), 1.0 / J)
    padded = np.hstack([alr(c), np.zeros((20, 1))])
    np.testing.assert_allclose(clr(c), padded @ H.T, atol=1e-12)
    np.testing.assert_allclose(clr_inv(clr(c)), c, atol=1e-12)


def test_alr_change_of_reference(rng):
    c = rng.dirichlet(np.ones(5), size=10)
    M = alr_change_matrix(5, 4, 1)
    np.testing.assert_allclose(alr(c, 4) @ M.T, alr(c, 1), atol=1e-12)


def test_ilr_two_parts_and_equal_shares():
    np.testing.assert_allclose(ilr([0.5, 0.5]), [0.0], atol=1e-15)
    for J in (3, 4, 6):
        np.testing.assert_allclose(ilr(np.full(J, 1.0 / J)), 0.0, atol=1e-14)
    part = [((0, 2), (1, 3)), ((0,), (2,)), ((1,), (3,))]
    np.testing.assert_allclose(ilr(np.full(4, 0.25), part), 0.0, atol=1e-14)


def test_ilr_pivot_matches_brute_force_and_is_isometric(rng):
    J = 5
    c = rng.dirichlet(np.ones(J), size=30)
    z = ilr(c)
    logc = np.log(c)
    expect = np.empty((30, J - 1))
    for j in range(J - 1):
        r = J - j - 1
        expect[:, j] = np.sqrt(r / (r + 1)) * (logc[:, j] - logc[:, j + 1:].mean(axis=1))
    np.testing.assert_allclose(z, expect, atol=1e-12)
    # isometry: ilr distances equal clr (Aitchison) distances
    d_ilr = np.linalg.norm(z[1:] - z[:-1], axis=1)
    d_clr = np.linalg.norm(clr(c[1:]) - clr(c[:-1]), axis=1)
    np.testing.assert_allclose(d_ilr, d_clr, atol=1e-12)


def test_invalid_partition_rejected():
    with pytest.raises(PartitionError):
        validate_partition([((0,), (1,))], 3)
    with pytest.raises(PartitionError):
        ilr(np.full(3, 1 / 3), [((0,), (1,)), ((0,), (2,))])
    validate_partition(pivot_partition(6), 6)


def test_close_examples_and_errors(rng):
    np.testing.assert_allclose(close(np.ones(5)), np.full(5, 0.2))
    np.testing.assert_allclose(close([2, 1, 1]), [0.5, 0.25, 0.25])
    assert abs(close(rng.uniform(0.01, 5, 9)).sum() - 1) < 1e-15
    with pytest.raises(CompositionError):
        close([1.0, 0.0, 2.0])


def test_as_composition_tolerance():
    c = as_composition([0.5, 0.25, 0.25 + 5e-10])
    assert abs(c.sum() - 1) < 1e-15
    with pytest.raises(CompositionError):
        as_composition([0.5, 0.25, 0.26])
    with pytest.raises(CompositionError):
        as_composition([1.0])


def test_series_validation():
    s = CompositionalSeries(np.full((3, 2), 0.5), [1, 2, 5])
    assert (s.T, s.J) == (3, 2)
    assert s[1:].time_index == [2, 5]
    with pytest.raises(CompositionError):
        CompositionalSeries(np.full((3, 2), 0.5), [1, 3, 2])
    with pytest.raises(CompositionError):
        CompositionalSeries(np.full((2, 2), 0.5), [1])


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(2, 7), elements=st.floats(-10, 10)), st.integers(0, 6))
def test_property_alr_inv_then_alr(v, ref):
    J = v.size + 1
    ref = ref % J
    c = alr_inv(v, ref)
    assert abs(c.sum() - 1) < 1e-12 and np.all(c > 0)
    np.testing.assert_allclose(alr(c, ref), v, atol=1e-9)
