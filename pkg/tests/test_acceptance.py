"""Acceptance gate: ten end-to-end checks with explicit tolerances.

 1. Basis health: Gram deviation < 1e-2 and Laplacian residual < 5e-2 for
    both spatial families at K = 10, each report in < 10 s.
 2. Bessel zeros: |J_m(j_{m,q})| < 1e-9 for m <= 8, q <= 8, and j_{0,1}
    within 1e-9 of 2.4048255577.
 3. Exact lattice equivariance of a single lifting layer: integer
    translation and quarter rotation errors < 1e-6, each measured in < 1 s.
 4. Five-layer sweep orderings over 5 seeds: at the final layer the K = 5
    median error is <= the K = 10 median (L_alpha = 1), L_alpha = 1 medians
    are <= L_alpha = 3 medians for both K, and >= 4/5 seeds per cell have
    errors nondecreasing with depth; the whole sweep finishes in < 300 s.
 5. Non-expansiveness: worst pairwise layer ratio <= 1 + 1e-3 over 20
    random input pairs through a 5-layer network, and the zero-input
    response is constant per channel to < 1e-10.
 6. Feature-action isometry: ||D_g f|| deviates from 2^beta ||f|| by < 2e-2
    relative, for beta in {-0.5, 0, 0.25} x eta in {0, -pi/2, pi/4} x 3
    random smooth features.
 7. Stability certificates: 20 trials of a 3-layer network with
    sup|grad tau| cycling {0.02, 0.05, 0.1} at beta = -0.5 all satisfy
    lhs <= rhs + allowance, and a violated certificate exits nonzero.
 8. Filter-norm bounds: quadrature B, C, 2^j D <= 1.02 A for 10 random
    A2-normalized draws (5 lifting + 5 joint).
 9. Both convolutions match their defining sums on inputs no larger than
    7x7 at 10 random output positions each, to 1e-10.
10. Determinism: sweep CSV and stability JSON reruns are byte-identical,
    containers round-trip bit-exactly, and IDX encode/decode is exact.
"""

import math
import struct
import time

import numpy as np
import pytest

from conftest import interior_image, small_net
from rstcnn import (
    DeformationField,
    ExperimentConfig,
    FeatureMap,
    GroupElement,
    ImageTensor,
    LayerSpec,
    bessel_j,
    bessel_zero,
    build_network,
    dump_bank,
    dump_idx_images,
    dump_idx_labels,
    equivariance_error,
    fig3_config,
    init_coeffs,
    isometry_deviation,
    joint_conv,
    lifting_conv,
    nonexpansiveness_report,
    parse_idx_images,
    parse_idx_labels,
    parse_sweep_csv,
    read_bank,
    run_bounds_report,
    run_basis_validate,
    run_equivariance_sweep,
    run_stability_trials,
    save_bank,
    stability_config,
    stability_json,
)
from rstcnn.cli import main as cli_main
from rstcnn.net import layer_bank

import reference


# -- 1: basis health ---------------------------------------------------------


@pytest.mark.parametrize("kind", ["fb", "sl"])
def test_criterion_01_basis_health(kind):
    t0 = time.perf_counter()
    report = run_basis_validate(
        ExperimentConfig(kind="basis-validate", k_list=(10,), spatial_kind=kind)
    )
    elapsed = time.perf_counter() - t0
    assert report["max_gram_deviation"] < 1e-2
    assert report["max_laplacian_residual"] < 5e-2
    assert report["ok"] is True
    assert elapsed < 10.0


# -- 2: Bessel zeros ---------------------------------------------------------


def test_criterion_02_bessel_zeros():
    for m in range(9):
        for q in range(1, 9):
            assert abs(float(bessel_j(m, bessel_zero(m, q)))) < 1e-9
    assert abs(bessel_zero(0, 1) - 2.4048255577) < 1e-9


# -- 3: exact lattice equivariance, one layer --------------------------------


def test_criterion_03_translation_exact():
    net = small_net(layers=1)
    coeffs = init_coeffs(net, seed=2)
    x = interior_image(height=25, width=25, margin=8, seed=1)
    g = GroupElement(0.0, 0.0, (2.0, -1.0))
    t0 = time.perf_counter()
    err = equivariance_error(net, coeffs, x, g, layer=1)
    elapsed = time.perf_counter() - t0
    assert err < 1e-6
    assert elapsed < 1.0


def test_criterion_03_quarter_rotation_exact():
    net = small_net(layers=1, n_rotations=8)
    coeffs = init_coeffs(net, seed=3)
    x = interior_image(height=21, width=21, margin=6, seed=2)
    g = GroupElement(-math.pi / 2.0, 0.0, (0.0, 0.0))
    t0 = time.perf_counter()
    err = equivariance_error(net, coeffs, x, g, layer=1)
    elapsed = time.perf_counter() - t0
    assert err < 1e-6
    assert elapsed < 1.0


# -- 4: five-layer sweep orderings -------------------------------------------


def _nondecreasing(errs):
    return all(b >= a - 1e-12 for a, b in zip(errs, errs[1:]))


def test_criterion_04_sweep_orderings():
    cfg = fig3_config()
    t0 = time.perf_counter()
    rows = parse_sweep_csv(run_equivariance_sweep(cfg))
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    assert len(rows) == len(cfg.k_list) * len(cfg.l_alpha_list) * len(cfg.seeds) * cfg.layers

    curves = {}  # (K, L_alpha, seed) -> [error per layer]
    for K, la, seed, layer, err in rows:
        curves.setdefault((K, la, seed), [0.0] * cfg.layers)[layer - 1] = err

    def final_median(K, la):
        return float(np.median([curves[(K, la, s)][-1] for s in cfg.seeds]))

    # (a) stronger truncation is never worse at the final layer
    assert final_median(5, 1) <= final_median(10, 1)
    # (b) one scale tap is never worse than three
    assert final_median(5, 1) <= final_median(5, 3)
    assert final_median(10, 1) <= final_median(10, 3)
    # (c) error grows with depth for >= 4/5 seeds in every cell
    for K in cfg.k_list:
        for la in cfg.l_alpha_list:
            n_mono = sum(_nondecreasing(curves[(K, la, s)]) for s in cfg.seeds)
            assert n_mono >= 4, (K, la, n_mono)
    # the one-tap curves stay finite through all five layers
    for K in cfg.k_list:
        for s in cfg.seeds:
            assert all(math.isfinite(e) for e in curves[(K, 1, s)])


# -- 5: non-expansiveness ----------------------------------------------------


def test_criterion_05_nonexpansive_and_constant_on_zero():
    net = build_network(fig3_config(), K=5, L_alpha=1, seed=0)
    coeffs = init_coeffs(net, seed=0)
    report = nonexpansiveness_report(net, coeffs, n_trials=20, seed=0)
    assert report.n_trials == 20
    assert report.worst_ratio <= 1.0 + 1e-3
    assert report.constancy_dev < 1e-10


# -- 6: feature-action isometry ----------------------------------------------


def test_criterion_06_feature_action_isometry():
    from rstcnn.data import smooth_feature_values

    grid = np.linspace(-1.0, 1.0, 9)
    for seed in range(3):
        vals = smooth_feature_values(2, 8, grid, 41, 41, np.random.default_rng([seed, 5]))
        feat = FeatureMap(vals, 2.0 * math.pi / 8.0, grid)
        for beta in (-0.5, 0.0, 0.25):
            for eta in (0.0, -math.pi / 2.0, math.pi / 4.0):
                g = GroupElement(eta, beta, (0.0, 0.0))
                assert isometry_deviation(feat, g) < 2e-2, (seed, beta, eta)


# -- 7: stability certificates -----------------------------------------------


def test_criterion_07_stability_certificates_hold():
    reports, violated = run_stability_trials(stability_config())
    assert len(reports) == 20
    assert violated is False
    for r in reports:
        assert r.lhs <= r.rhs + r.allowance
        assert r.beta == -0.5
    assert any(not r.vacuous for r in reports)


def test_criterion_07_violation_exits_nonzero(tmp_path, monkeypatch):
    from rstcnn import experiments
    from rstcnn.analysis import StabilityReport

    bad = StabilityReport(
        lhs=2.0, rhs=1.0, beta=-0.5, L=3, j_L=1.0, sup_tau=0.1, sup_grad_tau=0.05,
        per_layer_errors=(1.0, 1.5, 2.0), allowance=0.1, violation=True, vacuous=False,
    )
    monkeypatch.setattr(experiments, "run_stability_trials", lambda cfg: ([bad], True))
    code = cli_main(["stab", "trials", "--trials", "1", "--out", str(tmp_path / "s.json")])
    assert code != 0


# -- 8: filter-norm bounds ---------------------------------------------------


def test_criterion_08_filter_bounds():
    report = run_bounds_report(
        ExperimentConfig(kind="bounds-report", seeds=tuple(range(5)))
    )
    assert len(report["draws"]) == 5
    for draw in report["draws"]:
        assert draw["lifting"]["ratio"] <= 1.02
        assert draw["joint"]["ratio"] <= 1.02
    assert report["worst_ratio"] <= 1.02
    assert report["ok"] is True


# -- 9: convolution oracles --------------------------------------------------


def test_criterion_09_lifting_conv_matches_defining_sum():
    rng = np.random.default_rng(91)
    x = rng.standard_normal((2, 7, 7))
    filters = rng.standard_normal((2, 3, 4, 3, 5, 5))
    bias = rng.standard_normal(3)
    out = lifting_conv(ImageTensor(x), filters, bias, np.linspace(-1.0, 1.0, 3))
    for _ in range(10):
        o, r, s = rng.integers(3), rng.integers(4), rng.integers(3)
        y, x0 = rng.integers(7), rng.integers(7)
        want = reference.naive_lifting_at(x, filters, bias, o, r, s, y, x0)
        assert out.values[o, r, s, y, x0] == pytest.approx(want, abs=1e-10)


def test_criterion_09_joint_conv_matches_defining_sum():
    rng = np.random.default_rng(92)
    spec = LayerSpec(2, 3, 3, 5, L_theta=2, L_alpha=2, max_angular=2, n_scale=2)
    feat = FeatureMap(
        rng.standard_normal((2, 4, 3, 6, 7)), math.pi / 2.0, np.linspace(-1.0, 1.0, 3)
    )
    filters = rng.standard_normal((2, 3, 4, 2, 3, 2, 5, 5))
    bias = rng.standard_normal(3)
    out = joint_conv(feat, filters, bias, spec)
    for _ in range(10):
        o, r, s = rng.integers(3), rng.integers(4), rng.integers(3)
        y, x0 = rng.integers(6), rng.integers(7)
        want = reference.naive_joint_at(feat.values, filters, bias, o, r, s, y, x0)
        assert out.values[o, r, s, y, x0] == pytest.approx(want, abs=1e-10)


# -- 10: determinism ---------------------------------------------------------


def _tiny_sweep():
    return ExperimentConfig(
        kind="equivariance-sweep", layers=2, channels=1, k_list=(3,), l_alpha_list=(1,),
        seeds=(0, 1), n_rotations=4, n_scales=3, L_theta=2, stencil=5,
        eta=-math.pi / 2.0, beta=-1.0, height=24, width=24,
    )


def test_criterion_10_sweep_rerun_is_byte_identical():
    cfg = _tiny_sweep()
    assert run_equivariance_sweep(cfg) == run_equivariance_sweep(cfg)


def test_criterion_10_stability_rerun_is_byte_identical():
    cfg = stability_config(
        layers=2, channels=1, k_list=(3,), seeds=(0,), n_rotations=4, n_scales=5,
        L_theta=2, stencil=5, height=29, width=29,
    )
    first = stability_json(cfg, run_stability_trials(cfg)[0])
    second = stability_json(cfg, run_stability_trials(cfg)[0])
    assert first == second


def test_criterion_10_container_round_trip_bit_exact(tmp_path):
    net = small_net(layers=2, channels=2)
    bank = layer_bank(net, 1)
    coeffs = init_coeffs(net, seed=4)
    tau = DeformationField(np.random.default_rng(4).standard_normal((2, 3, 3, 4)), 9, 9)
    meta = {"layer": 1, "seed": 4}
    path = tmp_path / "bank.rst"
    save_bank(path, bank, coeffs=[coeffs[1]], tau=tau, meta=meta)
    raw = path.read_bytes()
    arc = read_bank(path)
    assert dump_bank(arc.bank, coeffs=arc.coeffs, tau=arc.tau, meta=arc.meta) == raw
    assert np.array_equal(arc.coeffs[0].a, coeffs[1].a)
    assert np.array_equal(arc.tau.coeffs, tau.coeffs)


def test_criterion_10_idx_round_trip_exact():
    images = struct.pack(">4I", 0x803, 2, 3, 4) + bytes(range(24))
    labels = struct.pack(">2I", 0x801, 2) + bytes([1, 9])
    assert dump_idx_images(parse_idx_images(images)) == images
    assert dump_idx_labels(parse_idx_labels(labels)) == labels
