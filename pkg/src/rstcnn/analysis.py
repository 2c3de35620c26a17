"""Equivariance, stability, and filter-bound measurements.

Everything here measures a trained-free network against the group action:
the relative equivariance error on the (theta=0, alpha=0) slice, the
deformation-stability certificate lhs <= 2^(beta+1) (4 L |grad tau| +
2^(-j_L) |tau|) ||x||, non-expansiveness of the layer stack, and quadrature
values of the filter integral bounds B, C, D against the amplitude bound A.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .basis import eval_angular, eval_spatial, eval_spatial_grad
from .deform import apply_deformation, tau_norms
from .group import ImageTensor, act_on_feature, act_on_image
from .net import filter_amplitude, forward, layer_basis
from .norms import fb_norm, fb_norm_joint, feature_norm


class UndefinedEquivarianceError(ArithmeticError):
    """The reference slice has zero norm; the relative error is undefined."""


class AssumptionError(ValueError):
    """A certificate precondition failed; the message names the assumption."""


def _slice_error(feat_direct, feat_reference, n_scales, margin):
    mid = n_scales // 2
    sl = slice(margin, -margin) if margin > 0 else slice(None)
    a = feat_direct.values[:, 0, mid, sl, sl]
    b = feat_reference.values[:, 0, mid, sl, sl]
    den = float(np.linalg.norm(b))
    num = float(np.linalg.norm(a - b))
    return num, den


def equivariance_error(net, coeffs, x, g, layer, margin=4):
    """Relative L2 error of Eq.-style equivariance at one layer.

    ||(x^(l)[D_g x] - D_g x^(l)[x])|| / ||D_g x^(l)[x]|| on the spatial slice
    at rotation index 0 and the middle scale channel, restricted to an
    interior margin (pixels) to exclude padding artifacts.  layer is
    1-indexed.  Raises UndefinedEquivarianceError when the reference slice
    is identically zero.
    """
    if not 1 <= layer <= net.depth:
        raise ValueError(f"layer must be in 1..{net.depth}, got {layer}")
    direct = forward(net, coeffs, act_on_image(g, x), return_all=True)[layer - 1]
    reference = act_on_feature(g, forward(net, coeffs, x, return_all=True)[layer - 1])
    num, den = _slice_error(direct, reference, net.n_scales, margin)
    if den == 0.0:
        raise UndefinedEquivarianceError(
            f"reference slice is zero at layer {layer}; the relative error is undefined"
        )
    return num / den


@dataclass(frozen=True)
class EquivarianceCurve:
    """Per-layer relative errors (1..L) with the configuration echoed.

    Layers whose reference slice vanishes carry math.inf (the deviation is
    positive while the reference is zero).
    """

    errors: tuple
    K: int
    L_alpha: int
    L_theta: int
    group_element: tuple

    def __post_init__(self):
        if any(e < 0 for e in self.errors):
            raise ValueError("errors must be nonnegative")


def equivariance_curve(net, coeffs, x, g, margin=4):
    """Per-layer equivariance errors from a single forward pass pair."""
    direct_all = forward(net, coeffs, act_on_image(g, x), return_all=True)
    plain_all = forward(net, coeffs, x, return_all=True)
    errors = []
    for direct, plain in zip(direct_all, plain_all):
        num, den = _slice_error(direct, act_on_feature(g, plain), net.n_scales, margin)
        errors.append(num / den if den > 0.0 else math.inf)
    joint = net.layers[-1] if net.depth == 1 else net.layers[1]
    return EquivarianceCurve(
        tuple(errors),
        K=net.layers[0].K,
        L_alpha=joint.L_alpha,
        L_theta=joint.L_theta,
        group_element=(g.eta, g.beta, tuple(g.v)),
    )


@dataclass(frozen=True)
class StabilityReport:
    """Measured deviation vs. the deformation-stability bound for one trial."""

    lhs: float
    rhs: float
    beta: float
    L: int
    j_L: float
    sup_tau: float
    sup_grad_tau: float
    per_layer_errors: tuple
    allowance: float
    violation: bool
    vacuous: bool

    @property
    def margin(self):
        return self.rhs - self.lhs

    def to_dict(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "beta": self.beta,
            "L": self.L,
            "j_L": self.j_L,
            "sup_tau": self.sup_tau,
            "sup_grad_tau": self.sup_grad_tau,
            "per_layer_errors": list(self.per_layer_errors),
            "allowance": self.allowance,
            "violation": self.violation,
            "vacuous": self.vacuous,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


GRAD_TAU_LIMIT = 0.2


def stability_certificate(net, coeffs, x, g, tau, allowance_rel=0.1, allowance_abs=1e-3):
    """Certify ||x^(L)[D_g D_tau x] - D_g x^(L)[x]|| against the stability bound.

    The bound is 2^(beta+1) (4 L |grad tau|_inf + 2^(-j_L) |tau|_inf) ||x||.
    Preconditions: every layer's amplitude bound A_l <= 1 (raise naming (A2))
    and |grad tau|_inf < 1/5 (raise naming (A3)); the nonlinearity is the
    ReLU throughout, satisfying (A1).  A zero bound cannot separate
    discretization error from instability, so the report is then flagged
    vacuous rather than compared.
    """
    for idx, spec in enumerate(net.layers):
        amp = filter_amplitude(coeffs[idx], layer_basis(net, idx), spec)
        if amp > 1.0 + 1e-9:
            raise AssumptionError(
                f"(A2) violated: filter amplitude bound A_l = {amp:.6g} > 1 at layer {idx + 1}"
            )
    sup_tau, sup_grad = tau_norms(tau)
    if sup_grad >= GRAD_TAU_LIMIT:
        raise AssumptionError(
            f"(A3) violated: |grad tau|_inf = {sup_grad:.6g} >= 1/5"
        )

    deformed = act_on_image(g, apply_deformation(tau, x))
    got = forward(net, coeffs, deformed, return_all=True)
    plain = forward(net, coeffs, x, return_all=True)
    per_layer = tuple(
        feature_norm(f.values - act_on_feature(g, p).values) for f, p in zip(got, plain)
    )
    lhs = per_layer[-1]

    L = net.depth
    j_last = net.layers[-1].resolved_scale
    rhs = (
        2.0 ** (g.beta + 1.0)
        * (4.0 * L * sup_grad + 2.0 ** (-j_last) * sup_tau)
        * feature_norm(x)
    )
    allowance = allowance_rel * rhs + allowance_abs
    vacuous = rhs == 0.0
    violation = (not vacuous) and lhs > rhs + allowance
    return StabilityReport(
        lhs=lhs,
        rhs=rhs,
        beta=g.beta,
        L=L,
        j_L=j_last,
        sup_tau=sup_tau,
        sup_grad_tau=sup_grad,
        per_layer_errors=per_layer,
        allowance=allowance,
        violation=violation,
        vacuous=vacuous,
    )


@dataclass(frozen=True)
class NonexpansivenessReport:
    """Worst-case layer ratios over random input pairs.

    worst_ratio: max over trials and layers of ||x^(l)[x1] - x^(l)[x2]|| /
    ||x1 - x2||.  centered_worst: max per-layer growth ratio of the centered
    features (zero-input response subtracted).  constancy_dev: max over
    channels of (max - min) of the zero-input features.
    """

    worst_ratio: float
    per_layer_worst: tuple
    centered_worst: float
    constancy_dev: float
    n_trials: int


def nonexpansiveness_report(net, coeffs, n_trials, seed, height=28, width=28):
    """Measure layer non-expansiveness plus zero-input constancy and contraction.

    Pairs are uniform [0, 1] images drawn per trial from (seed, trial)
    streams.  Identical pairs (never produced by the generator, but guarded)
    are skipped rather than scored as 0/0.
    """
    zero = np.zeros((net.layers[0].in_channels, height, width))
    zero_feats = forward(net, coeffs, ImageTensor(zero), return_all=True)
    constancy = 0.0
    for f in zero_feats:
        flat = f.values.reshape(f.values.shape[0], -1)
        constancy = max(constancy, float((flat.max(axis=1) - flat.min(axis=1)).max()))

    per_layer = [0.0] * net.depth
    centered_worst = 0.0
    scored = 0
    for t in range(n_trials):
        rng = np.random.default_rng([seed, t])
        x1 = rng.uniform(0.0, 1.0, size=zero.shape)
        x2 = rng.uniform(0.0, 1.0, size=zero.shape)
        d0 = feature_norm(x1 - x2)
        if d0 == 0.0:
            continue
        scored += 1
        f1 = forward(net, coeffs, ImageTensor(x1), return_all=True)
        f2 = forward(net, coeffs, ImageTensor(x2), return_all=True)
        for l in range(net.depth):
            ratio = feature_norm(f1[l].values - f2[l].values) / d0
            per_layer[l] = max(per_layer[l], ratio)
        prev = feature_norm(x1)
        for l in range(net.depth):
            cur = feature_norm(f1[l].values - zero_feats[l].values)
            if prev > 0.0:
                centered_worst = max(centered_worst, cur / prev)
            prev = cur
    return NonexpansivenessReport(
        worst_ratio=max(per_layer) if per_layer else 0.0,
        per_layer_worst=tuple(per_layer),
        centered_worst=centered_worst,
        constancy_dev=constancy,
        n_trials=scored,
    )


@dataclass(frozen=True)
class FilterBoundReport:
    """Quadrature values of the filter integral bounds for one layer.

    B = integral of |W|, C of |u| |grad W|, D of |grad W| (per pair, then
    aggregated over channels the same way as the amplitude bound A); all on
    the unit-scale filter, so the scale-invariant comparison is
    B, C, 2^j D <= A.
    """

    B: float
    C: float
    D: float
    A: float
    layer_scale: float

    @property
    def scaled_D(self):
        return 2.0**self.layer_scale * self.D

    def to_dict(self):
        return {
            "B": self.B,
            "C": self.C,
            "D": self.D,
            "scaled_D": self.scaled_D,
            "A": self.A,
            "layer_scale": self.layer_scale,
        }


def _unit_disk_quadrature(basis, grid_n):
    xs = np.linspace(-1.0, 1.0, grid_n)
    X, Y = np.meshgrid(xs, xs)
    pts = np.stack([X, Y], axis=-1)
    h2 = (xs[1] - xs[0]) ** 2
    vals = np.stack([eval_spatial(e, pts) for e in basis.spatial])
    grads = np.stack([eval_spatial_grad(e, pts) for e in basis.spatial])
    grads = np.moveaxis(grads, -1, 1)  # [K, 2, n, n]
    radius = np.sqrt(X * X + Y * Y)
    return vals, grads, radius, h2


def filter_bound_report(coeffs, basis, spec, grid_n=301, n_theta=64):
    """Quadrature B, C, D aggregates for one layer against its amplitude bound.

    Spatial integrals on a grid_n x grid_n grid over the unit square (the
    basis is supported on the unit disk); joint layers integrate over theta
    with the normalized S^1 measure on n_theta uniform samples.  Gradients
    come from the analytic basis derivatives.
    """
    vals, grads, radius, h2 = _unit_disk_quadrature(basis, grid_n)
    a = coeffs.a
    m_in, m_out = a.shape[0], a.shape[1]
    j = spec.resolved_scale

    if coeffs.is_lifting:
        W = np.einsum("abk,kxy->abxy", a, vals)
        G = np.einsum("abk,kdxy->abdxy", a, grads)
        gmag = np.sqrt(G[:, :, 0] ** 2 + G[:, :, 1] ** 2)
        b_pair = np.abs(W).sum(axis=(2, 3)) * h2
        c_pair = (radius * gmag).sum(axis=(2, 3)) * h2
        d_pair = gmag.sum(axis=(2, 3)) * h2
        per_pair = [b_pair, c_pair, d_pair]
        aggregated = [
            max(p.sum(axis=0).max(), (m_in / m_out) * p.sum(axis=1).max()) for p in per_pair
        ]
    else:
        thetas = 2.0 * math.pi * np.arange(n_theta) / n_theta
        phi = np.stack([eval_angular(e, thetas) for e in basis.angular])  # [n_ang, n_theta]
        # Accumulate the normalized-S^1 theta average in chunks: the full
        # [a, b, n, n_theta, grid, grid] tensors would run to gigabytes.
        shape = (m_in, m_out, a.shape[4])
        b_pair = np.zeros(shape)
        c_pair = np.zeros(shape)
        d_pair = np.zeros(shape)
        for t0 in range(0, n_theta, 8):
            ph = phi[:, t0 : t0 + 8]
            Wt = np.einsum("abkmn,kxy,mt->abntxy", a, vals, ph, optimize=True)
            Gt = np.einsum("abkmn,kdxy,mt->abndtxy", a, grads, ph, optimize=True)
            gmag = np.sqrt(Gt[:, :, :, 0] ** 2 + Gt[:, :, :, 1] ** 2)  # [a,b,n,t,x,y]
            b_pair += np.abs(Wt).sum(axis=(3, 4, 5))
            c_pair += (radius * gmag).sum(axis=(3, 4, 5))
            d_pair += gmag.sum(axis=(3, 4, 5))
        b_pair *= h2 / n_theta
        c_pair *= h2 / n_theta
        d_pair *= h2 / n_theta
        per_pair = [b_pair, c_pair, d_pair]
        aggregated = [
            max(
                p.sum(axis=2).sum(axis=0).max(),
                (2.0 * m_in / m_out) * p.sum(axis=1).max(axis=0).sum(),
            )
            for p in per_pair
        ]

    B, C, Du = aggregated
    A = filter_amplitude(coeffs, basis, spec)
    return FilterBoundReport(B=float(B), C=float(C), D=float(Du) * 2.0**-j, A=A, layer_scale=j)


def isometry_deviation(feat, g):
    """Relative deviation of ||D_g feat|| from 2^beta ||feat||."""
    base = feature_norm(feat)
    if base == 0.0:
        raise ValueError("zero feature has no isometry ratio")
    moved = feature_norm(act_on_feature(g, feat))
    target = 2.0**g.beta * base
    return abs(moved - target) / target
