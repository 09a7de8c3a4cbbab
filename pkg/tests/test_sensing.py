import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from asinlab.exceptions import DimensionError, MethodMismatchError
from asinlab.sensing import (
    AsinMatrix,
    AsinMethod,
    MeasurementProcess,
    apply_asin,
    apply_measurement,
    crude_process,
    design_asin_matrix,
    identity_process,
)


def test_identity_process_returns_scene():
    e = np.array([0.5, -1.0, 3.0])
    np.testing.assert_array_equal(apply_measurement(identity_process(3), e, 0), e)


def test_zero_scene_zero_measurement():
    proc = crude_process(10, 4, 1.5)
    assert np.all(apply_measurement(proc, np.zeros(10), 5) == 0)


def test_hand_matrix_vector_product():
    proc = MeasurementProcess(np.array([[1.0, 2.0], [0.0, 1.0]]))
    np.testing.assert_array_equal(apply_measurement(proc, np.array([3.0, 4.0]), 0), [11.0, 4.0])


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_measurement(identity_process(3), np.zeros(4), 0)
    asin = AsinMatrix(np.eye(2))
    with pytest.raises(DimensionError):
        apply_asin(asin, identity_process(3), np.zeros(3), 0)


def test_noise_is_seeded():
    proc = identity_process(5, noise_std=0.2)
    e = np.ones(5)
    a, b = apply_measurement(proc, e, 17), apply_measurement(proc, e, 17)
    c = apply_measurement(proc, e, 18)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)


def test_asin_identity_and_zero():
    proc = identity_process(4, noise_std=0.3)
    e = np.arange(4.0)
    s = apply_measurement(proc, e, 3)
    np.testing.assert_array_equal(apply_asin(AsinMatrix(np.eye(4)), proc, e, 3), s)
    assert np.all(apply_asin(AsinMatrix(np.zeros((2, 4))), proc, e, 3) == 0)


def test_asin_hand_value():
    asin = AsinMatrix(np.array([[1.0, 1.0]]))
    np.testing.assert_array_equal(apply_asin(asin, identity_process(2), np.array([3.0, 4.0]), 0), [7.0])


def test_asin_rejects_inflation():
    with pytest.raises(DimensionError):
        AsinMatrix(np.ones((3, 2)))


def test_crude_rows_sum_to_one():
    P = crude_process(64, 16, 2.0).P
    np.testing.assert_allclose(P.sum(axis=1), 1.0, rtol=1e-12)


def test_composition_exact():
    rng = np.random.default_rng(0)
    for i in range(50):
        proc = MeasurementProcess(rng.normal(size=(6, 9)), noise_std=0.4)
        asin = AsinMatrix(rng.normal(size=(3, 6)))
        e = rng.normal(size=9)
        s = apply_measurement(proc, e, i)
        assert apply_asin(asin, proc, e, i).tobytes() == (asin.P_asin @ s).tobytes()


@settings(max_examples=100, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10),
       e1=arrays(float, 7, elements=st.floats(-100, 100)),
       e2=arrays(float, 7, elements=st.floats(-100, 100)))
def test_linearity(a, b, e1, e2):
    proc = crude_process(7, 4, 1.2)
    lhs = apply_measurement(proc, a * e1 + b * e2, 0)
    rhs = a * apply_measurement(proc, e1, 0) + b * apply_measurement(proc, e2, 0)
    scale = np.abs(a) * np.abs(proc.P) @ np.abs(e1) + np.abs(b) * np.abs(proc.P) @ np.abs(e2)
    assert np.all(np.abs(lhs - rhs) <= 1e-9 * np.maximum(scale, 1e-300) + 1e-300)


def test_identity_design_passthrough():
    S = np.random.default_rng(1).normal(size=(10, 5))
    P = design_asin_matrix("identity", S, None, 5).P_asin
    np.testing.assert_array_equal(S @ P.T, S)
    np.testing.assert_array_equal(design_asin_matrix("identity", S, None, 3).P_asin, np.eye(3, 5))


def test_random_projection_seeded():
    S = np.zeros((1, 16))
    a = design_asin_matrix(AsinMethod.RANDOM_PROJECTION, S, None, 4, seed=3).P_asin
    b = design_asin_matrix(AsinMethod.RANDOM_PROJECTION, S, None, 4, seed=3).P_asin
    c = design_asin_matrix(AsinMethod.RANDOM_PROJECTION, S, None, 4, seed=4).P_asin
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)
    # entries ~ N(0, 1/m)
    big = design_asin_matrix(AsinMethod.RANDOM_PROJECTION, np.zeros((1, 400)), None, 400, 0).P_asin
    assert big.std() == pytest.approx(1 / np.sqrt(400), rel=0.02)


def test_energy_bands_rows():
    P = design_asin_matrix("energy_bands", np.zeros((1, 12)), None, 3).P_asin
    expected = np.zeros((3, 12))
    for i in range(3):
        expected[i, 4 * i:4 * i + 4] = 0.25
    np.testing.assert_array_equal(P, expected)
    # uneven split still averages contiguous bands
    P = design_asin_matrix("energy_bands", np.zeros((1, 10)), None, 3).P_asin
    np.testing.assert_allclose(P.sum(axis=1), 1.0)


def _two_gaussians(n, m, d, seed):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    S = rng.normal(size=(n, m))
    S[:, 0] += d * y
    return S, y


def test_fisher_direction_recovers_mean_shift_axis():
    S, y = _two_gaussians(2000, 6, 1.5, 0)
    P = design_asin_matrix("fisher_discriminant", S, y, 1).P_asin
    assert abs(P[0, 0]) / np.linalg.norm(P[0]) >= 0.99
    assert P[0, 0] > 0


def test_fisher_rows_orthonormal():
    S, y = _two_gaussians(300, 8, 1.0, 1)
    P = design_asin_matrix("fisher_discriminant", S, y, 5, seed=2).P_asin
    np.testing.assert_allclose(P @ P.T, np.eye(5), atol=1e-9)
    # first row is the discriminant direction itself
    w = design_asin_matrix("fisher_discriminant", S, y, 1).P_asin[0]
    np.testing.assert_allclose(P[0], w, atol=1e-12)


def test_fisher_rejects_non_binary():
    S = np.random.default_rng(0).normal(size=(10, 3))
    with pytest.raises(MethodMismatchError):
        design_asin_matrix("fisher_discriminant", S, np.linspace(0, 1, 10), 1)


def test_k_larger_than_m_rejected():
    with pytest.raises(DimensionError):
        design_asin_matrix("identity", np.zeros((1, 3)), None, 4)


@settings(max_examples=50, deadline=None)
@given(s=arrays(float, 8, elements=st.floats(-1e3, 1e3)), seed=st.integers(0, 1000))
def test_orthonormal_rows_do_not_inflate_energy(s, seed):
    S, y = _two_gaussians(60, 8, 1.0, seed)
    P = design_asin_matrix("fisher_discriminant", S, y, 4, seed=seed).P_asin
    assert np.linalg.norm(P @ s) <= np.linalg.norm(s) + 1e-9


def test_matrix_file_round_trip(tmp_path):
    P = np.random.default_rng(5).normal(size=(3, 4)) / 7
    asin = AsinMatrix(P, AsinMethod.RANDOM_PROJECTION, 1)
    asin.save(tmp_path / "m.txt")
    lines = (tmp_path / "m.txt").read_text().splitlines()
    assert lines[0] == "3 4"
    assert len(lines) == 4
    assert AsinMatrix.load(tmp_path / "m.txt").P_asin.tobytes() == asin.P_asin.tobytes()
