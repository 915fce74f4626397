import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from enn import activation as A
from enn.activation import (DctActivation, FourierSeries, Linear, ReLU, Sigmoid, Sine, basis_matrix,
                            baseline_eval, baseline_grad, dct_eval, dct_grad_coeffs, dct_grad_input,
                            project_function, scale_input)


def naive_dct(F, zbar, N):
    total = 0.0
    for q in range(1, len(F) + 1):
        total += F[q - 1] * math.cos(math.pi * (2 * q - 1) * (2 * zbar - 1) / (2 * N))
    return total


def central(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


@pytest.mark.parametrize("z,expect", [(-1.0, 0.0), (0.0, 256.0), (1.0, 512.0)])
def test_scale_input_endpoints(z, expect):
    assert scale_input(z, 512) == expect


def test_scale_input_outside_range_not_clipped():
    assert scale_input(2.0, 10) == 15.0


def test_zero_coefficients_give_zero():
    act = DctActivation(np.zeros(6), 512)
    z = np.linspace(-100, 700, 50)
    assert np.all(dct_eval(act, z) == 0.0)
    assert np.all(dct_grad_input(act, z) == 0.0)


def test_zero_phase_point():
    act = DctActivation(np.eye(6)[0], 512)
    assert dct_eval(act, 0.5) == pytest.approx(1.0, abs=1e-15)
    assert dct_grad_input(act, 0.5) == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(dct_grad_coeffs(act, 0.5), np.ones(6), atol=1e-15)


def test_eval_matches_naive_summation(rng):
    F = rng.normal(size=6)
    act = DctActivation(F, 512)
    z = rng.uniform(-200, 700, 1000)
    expect = np.array([naive_dct(F, v, 512) for v in z])
    np.testing.assert_allclose(dct_eval(act, z), expect, rtol=0, atol=1e-12)


def test_harmonic_recurrence_matches_direct(rng):
    z = rng.uniform(-2000, 2000, 500)
    c, s = A.harmonics(z, 12, 64)
    for q in range(12):
        arg = np.pi * (2 * q + 1) * (2 * z - 1) / 128
        np.testing.assert_allclose(c[q], np.cos(arg), atol=1e-11)
        np.testing.assert_allclose(s[q], np.sin(arg), atol=1e-11)


def test_input_gradient_formula(rng):
    F = rng.normal(size=6)
    act = DctActivation(F, 512)
    for z in rng.uniform(0, 512, 20):
        expect = -sum(F[q] * math.pi * (2 * q + 1) / 512 * math.sin(math.pi * (2 * q + 1) * (2 * z - 1) / 1024)
                      for q in range(6))
        assert dct_grad_input(act, z) == pytest.approx(expect, rel=1e-12, abs=1e-15)


def test_gradients_match_finite_differences(rng):
    # 1000 random (F, zbar) draws, relative gap below 1e-6
    for _ in range(1000):
        Q = int(rng.integers(1, 9))
        N = int(rng.choice([8, 64, 512]))
        F = rng.normal(size=Q)
        z = float(rng.uniform(-N, 2 * N))
        act = DctActivation(F, N)
        g = dct_grad_input(act, z)
        fd = central(lambda v: naive_dct(F, v, N), z)
        assert abs(g - fd) <= 1e-6 * max(abs(fd), 1.0)
        gc = dct_grad_coeffs(act, z)
        for q in range(Q):
            e = np.eye(Q)[q]
            fdq = (naive_dct(F + 1e-5 * e, z, N) - naive_dct(F - 1e-5 * e, z, N)) / 2e-5
            assert abs(gc[q] - fdq) <= 1e-6 * max(abs(fdq), 1.0)


def test_masked_coefficients_are_zero_and_have_zero_gradient(rng):
    F = rng.normal(size=6)
    mask = np.array([True, False, True, False, False, True])
    act = DctActivation(F.copy(), 512, mask)
    assert np.all(act.coeffs[~mask] == 0.0)
    g = dct_grad_coeffs(act, rng.uniform(0, 512, 7))
    assert np.all(g[..., ~mask] == 0.0)
    full = DctActivation(F.copy(), 512, np.zeros(6, bool))
    assert np.all(dct_grad_coeffs(full, 3.3) == 0.0)


def test_activation_validation():
    with pytest.raises(ValueError):
        DctActivation(np.zeros(0), 512)
    with pytest.raises(ValueError):
        DctActivation(np.zeros(3), 1)
    with pytest.raises(ValueError):
        DctActivation(np.zeros(3), 8, np.ones(4, bool))


def test_layer_broadcast_matches_per_neuron(rng):
    F = rng.normal(size=(5, 6))
    act = DctActivation(F, 512)
    z = rng.uniform(0, 512, (11, 5))
    out = dct_eval(act, z)
    for m in range(5):
        np.testing.assert_allclose(out[:, m], act.neuron(m).value(z[:, m]), rtol=0, atol=1e-14)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8), st.floats(-1000, 1000), st.sampled_from([4, 64, 512]))
def test_periodic_with_period_2N(F, z, N):
    act = DctActivation(np.array(F), N)
    assert abs(dct_eval(act, z) - dct_eval(act, z + 2 * N)) < 1e-9


def test_basis_matrix_entries():
    B = basis_matrix(6, 512)
    assert B.shape == (512, 6)
    assert B[0, 0] == pytest.approx(math.cos(math.pi / 1024))
    small = basis_matrix(2, 4)
    hand = [[math.cos(math.pi * (2 * q - 1) * (2 * n + 1) / 8) for q in (1, 2)] for n in range(4)]
    np.testing.assert_allclose(small, hand, atol=1e-15)


@pytest.mark.parametrize("Q,N", [(6, 512), (3, 64), (1, 2), (8, 16)])
def test_basis_orthogonality(Q, N):
    B = basis_matrix(Q, N)
    gram = np.array([[sum(B[n, i] * B[n, j] for n in range(N)) for j in range(Q)] for i in range(Q)])
    assert np.abs(gram - N / 2 * np.eye(Q)).max() <= 1e-9 * N


def test_basis_columns_are_activation_on_grid():
    # column q is the q-th basis function sampled at zbar = n + 1
    B = basis_matrix(4, 32)
    for q in range(4):
        act = DctActivation(np.eye(4)[q], 32)
        np.testing.assert_allclose(dct_eval(act, np.arange(1, 33)), B[:, q], atol=1e-14)


def test_project_basis_element_and_zero():
    B = basis_matrix(6, 512)
    np.testing.assert_allclose(project_function(B[:, 0], 6, 512), np.eye(6)[0], atol=1e-9)
    assert np.all(project_function(np.zeros(512), 6, 512) == 0.0)
    with pytest.raises(ValueError):
        project_function(np.zeros(10), 6, 512)


def test_projection_beats_every_shorter_truncation():
    N, Q = 512, 6
    u = (2 * np.arange(N) + 1) / N - 1
    f = np.clip(2 * u, -1, 1)
    B = basis_matrix(Q, N)
    F = project_function(f, Q, N)
    mse = np.mean((B @ F - f) ** 2)
    for drop in range(Q):
        keep = [q for q in range(Q) if q != drop]
        Fs = project_function(f, Q, N)[keep]
        assert mse < np.mean((B[:, keep] @ Fs - f) ** 2)
    # least squares: no other coefficient vector does better
    best = np.linalg.lstsq(B, f, rcond=None)[0]
    np.testing.assert_allclose(F, best, atol=1e-12)


def test_dropping_one_coefficient_costs_its_energy(rng):
    N, Q = 512, 6
    F = rng.normal(size=Q)
    B = basis_matrix(Q, N)
    grid = np.arange(1, N + 1)
    full = dct_eval(DctActivation(F, N), grid)
    for q in range(Q):
        mask = np.ones(Q, bool)
        mask[q] = False
        pruned = dct_eval(DctActivation(F.copy(), N, mask), grid)
        np.testing.assert_allclose(full - pruned, F[q] * B[:, q], atol=1e-12)
        assert np.sum((full - pruned) ** 2) == pytest.approx(N / 2 * F[q] ** 2, abs=1e-9)


def test_sigmoid_ramp_projection_is_increasing():
    F = project_function(A.sigmoid_ramp(512), 6, 512)
    curve = dct_eval(DctActivation(F, 512), np.linspace(0, 512, 200))
    assert curve[0] < -0.9 and curve[-1] > 0.9
    assert np.all(np.diff(curve[20:-20]) > 0)


def test_relu():
    r = ReLU()
    assert baseline_eval(r, -2.0) == 0.0
    assert baseline_eval(r, 3.0) == 3.0
    np.testing.assert_array_equal(baseline_grad(r, np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 1.0])


def test_sine():
    s = Sine(30.0)
    assert baseline_eval(s, 0.0) == 0.0
    assert baseline_grad(s, 0.0) == 30.0
    with pytest.raises(ValueError):
        Sine(0.0)


def test_linear_and_sigmoid(rng):
    z = rng.normal(size=20)
    np.testing.assert_array_equal(baseline_eval(Linear(), z), z)
    sg = Sigmoid()
    assert sg.value(0.0) == 0.0
    np.testing.assert_allclose(sg.value(z), np.tanh(z / 2), atol=1e-15)
    for v in z:
        assert sg.grad(v) == pytest.approx(central(sg.value, v), rel=1e-6)


def test_fourier_series_definition_and_gradients(rng):
    a, b = rng.normal(size=3), rng.normal(size=3)
    fs = FourierSeries.from_ab(a, b, period=2.0)
    for z in rng.uniform(-3, 3, 200):
        expect = sum(a[q] * math.cos(2 * math.pi * (q + 1) * z / 2) + b[q] * math.sin(2 * math.pi * (q + 1) * z / 2)
                     for q in range(3))
        assert baseline_eval(fs, z) == pytest.approx(expect, abs=1e-12)
        fd = central(fs.value, z)
        assert abs(baseline_grad(fs, z) - fd) <= 1e-6 * max(abs(fd), 1.0)
    with pytest.raises(ValueError):
        FourierSeries.from_ab(np.ones(2), np.ones(3))
    with pytest.raises(ValueError):
        FourierSeries(np.ones(3))
