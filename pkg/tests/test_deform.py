"""Truncated-Fourier deformation fields and image resampling."""

import math

import numpy as np
import pytest

import reference
from rstcnn import (
    DeformationField,
    GroupElement,
    act_on_image,
    apply_deformation,
    make_tau,
    make_tau_targeting_grad,
    tau_norms,
)

from conftest import interior_image


def random_field(seed=0, max_freq=3, height=17, width=19, amplitude=2.0):
    return make_tau(seed, amplitude, max_freq, height, width)


def test_evaluate_matches_loop_oracle():
    rng = np.random.default_rng(1)
    coeffs = rng.standard_normal((2, 4, 4, 4))
    f = DeformationField(coeffs, 15, 21)
    xs = rng.uniform(-10.0, 10.0, size=15)
    ys = rng.uniform(-7.0, 7.0, size=15)
    vals = f.evaluate(xs, ys)
    for i, (x, y) in enumerate(zip(xs, ys)):
        for comp in (0, 1):
            want = reference.fourier_field_value(coeffs, f.box, comp, x, y)
            assert vals[comp, i] == pytest.approx(want, abs=1e-12)


def test_evaluate_preserves_point_shape():
    f = random_field()
    X, Y = np.meshgrid(np.linspace(-2, 2, 5), np.linspace(-1, 1, 3))
    assert f.evaluate(X, Y).shape == (2, 3, 5)
    assert f.samples.shape == (2, f.height, f.width)


def test_jacobian_matches_finite_differences():
    f = random_field(seed=4)
    rng = np.random.default_rng(2)
    xs = rng.uniform(-8.0, 8.0, size=12)
    ys = rng.uniform(-7.0, 7.0, size=12)
    J = f.jacobian(xs, ys)
    h = 1e-5
    fd_x = (f.evaluate(xs + h, ys) - f.evaluate(xs - h, ys)) / (2 * h)
    fd_y = (f.evaluate(xs, ys + h) - f.evaluate(xs, ys - h)) / (2 * h)
    np.testing.assert_allclose(J[:, 0], fd_x, atol=1e-7)
    np.testing.assert_allclose(J[:, 1], fd_y, atol=1e-7)


def test_sup_bound_dominates_measured_supremum():
    for seed in range(5):
        f = random_field(seed=seed, amplitude=1.0 + seed)
        sup_tau, _ = tau_norms(f)
        assert sup_tau <= f.sup_bound() + 1e-12


def test_make_tau_hits_requested_amplitude():
    f = make_tau(3, 0.75, 2, 15, 15)
    assert f.sup_bound() == pytest.approx(0.75, rel=1e-12)
    g = make_tau(3, 1.5, 2, 15, 15)
    np.testing.assert_allclose(g.coeffs, 2.0 * f.coeffs, rtol=1e-14)
    z = make_tau(3, 0.0, 2, 15, 15)
    assert np.all(z.coeffs == 0.0) and np.all(z.samples == 0.0)


def test_targeting_hits_requested_gradient():
    for level in (0.02, 0.05, 0.1):
        f = make_tau_targeting_grad([7, 4242], level, 3, 29, 29)
        _, sup_grad = tau_norms(f)
        assert sup_grad == pytest.approx(level, rel=1e-12)


def test_tau_norms_constant_field():
    c = np.zeros((2, 2, 2, 4))
    c[0, 0, 0, 0] = 3.0
    c[1, 0, 0, 0] = -4.0
    f = DeformationField(c, 11, 11)
    sup_tau, sup_grad = tau_norms(f)
    assert sup_tau == pytest.approx(5.0, abs=1e-12)
    assert sup_grad == pytest.approx(0.0, abs=1e-12)


def test_apply_zero_field_is_identity():
    x = interior_image(height=13, width=13, margin=4, seed=1)
    out = apply_deformation(DeformationField(np.zeros((2, 1, 1, 4)), 13, 13), x)
    np.testing.assert_array_equal(out.values, x.values)


def test_apply_constant_field_equals_translation_action():
    x = interior_image(height=17, width=17, margin=5, seed=2)
    c = np.zeros((2, 1, 1, 4))
    c[0, 0, 0, 0] = 1.3
    c[1, 0, 0, 0] = -0.7
    deformed = apply_deformation(DeformationField(c, 17, 17), x)
    translated = act_on_image(GroupElement(0.0, 0.0, (1.3, -0.7)), x)
    np.testing.assert_array_equal(deformed.values, translated.values)


def test_apply_matches_pointwise_bilinear_oracle():
    x = interior_image(height=15, width=18, margin=4, seed=5, channels=2)
    f = random_field(seed=6, height=15, width=18, amplitude=1.5)
    out = apply_deformation(f, x)
    H, W = 15, 18
    rng = np.random.default_rng(8)
    for _ in range(10):
        i, j = rng.integers(H), rng.integers(W)
        xq = (j - (W - 1) / 2.0) - f.samples[0, i, j]
        yq = (i - (H - 1) / 2.0) - f.samples[1, i, j]
        row, col = yq + (H - 1) / 2.0, xq + (W - 1) / 2.0
        for ch in (0, 1):
            want = reference.naive_bilinear(x.values[ch], row, col)
            assert out.values[ch, i, j] == pytest.approx(want, abs=1e-10)


def test_error_paths():
    with pytest.raises(ValueError):
        DeformationField(np.zeros((2, 2, 3, 4)), 5, 5)
    with pytest.raises(ValueError):
        DeformationField(np.zeros((3, 2, 2, 4)), 5, 5)
    with pytest.raises(ValueError):
        DeformationField(np.full((2, 1, 1, 4), np.nan), 5, 5)
    with pytest.raises(ValueError):
        DeformationField(np.zeros((2, 1, 1, 4)), 0, 5)
    with pytest.raises(ValueError):
        make_tau(0, -1.0, 2, 9, 9)
    with pytest.raises(ValueError):
        make_tau_targeting_grad(0, -0.5, 2, 9, 9)
    with pytest.raises(ValueError):
        make_tau_targeting_grad(0, 0.1, 0, 9, 9)
    x = interior_image(height=9, width=9, margin=3)
    with pytest.raises(ValueError):
        apply_deformation(random_field(height=8, width=9), x)
