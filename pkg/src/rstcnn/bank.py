"""Sampling steerable basis functions into a discrete filter bank.

The bank stores every rotated and rescaled spatial basis function
2^{-2(alpha+j)} psi_k(2^{-(alpha+j)} R_{-theta} u') on an L x L stencil,
for theta on the N_r-point rotation grid and alpha on the N_s-point scale
grid over [-T, T].  Stencil tap (row i, col t) sits at spatial offset
u' = pitch * (t - (L-1)/2, i - (L-1)/2) where pitch = 2 * 2^j / (L - 1),
i.e. the unrotated, unrescaled basis support 2^j D exactly spans the
stencil.  With the default layer scale j = log2((L-1)/2) the pitch is one
pixel, so stencil offsets coincide with pixel offsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisSet, eval_spatial


def default_layer_scale(stencil):
    """The j that makes an L-point stencil sample its support at 1-pixel pitch."""
    return math.log2((stencil - 1) / 2.0)


def scale_channel_grid(n_scales, scale_range):
    """Uniform log2-scale grid over [-T, T] (a single channel sits at 0)."""
    if n_scales == 1:
        return np.array([0.0])
    return np.linspace(-scale_range, scale_range, n_scales)


@dataclass(frozen=True)
class FilterBank:
    """Sampled basis stack: values[k, r, s, row, col], immutable after build."""

    spatial_kind: str
    values: np.ndarray
    scale_grid: np.ndarray
    rotation_step: float
    layer_scale: float
    pitch: float

    @property
    def K(self):
        return self.values.shape[0]

    @property
    def n_rotations(self):
        return self.values.shape[1]

    @property
    def n_scales(self):
        return self.values.shape[2]

    @property
    def stencil(self):
        return self.values.shape[3]


def sample_filter_bank(basis, n_rotations, n_scales, scale_range, stencil, layer_scale=None):
    """Sample a BasisSet's spatial elements onto the [K, N_r, N_s, L, L] bank.

    layer_scale=None selects the pitch-1 default log2((L-1)/2).  Sample
    points that fall on or outside the (rescaled) domain boundary are
    exactly zero.
    """
    if stencil < 1 or stencil % 2 == 0:
        raise ValueError(f"stencil width must be odd, got {stencil}")
    if n_rotations < 1 or n_scales < 1:
        raise ValueError("n_rotations and n_scales must be >= 1")
    j = default_layer_scale(stencil) if layer_scale is None else float(layer_scale)
    pitch = 2.0 * (2.0**j) / (stencil - 1)
    grid = scale_channel_grid(n_scales, scale_range)
    rot_step = 2.0 * math.pi / n_rotations

    offs = (np.arange(stencil) - (stencil - 1) / 2.0) * pitch
    X, Y = np.meshgrid(offs, offs, indexing="xy")  # X[i,t]=offs[t], Y[i,t]=offs[i]
    pts = np.stack([X, Y], axis=-1)  # [L, L, 2]

    # args[r, s, i, t, 2] = 2^{-(alpha_s + j)} R_{-theta_r} u'
    args = np.empty((n_rotations, n_scales, stencil, stencil, 2))
    for r in range(n_rotations):
        th = r * rot_step
        c, s = math.cos(th), math.sin(th)
        rx = c * pts[..., 0] + s * pts[..., 1]
        ry = -s * pts[..., 0] + c * pts[..., 1]
        for si in range(n_scales):
            f = 2.0 ** (-grid[si] - j)
            args[r, si, ..., 0] = f * rx
            args[r, si, ..., 1] = f * ry

    K = basis.n_spatial
    values = np.empty((K, n_rotations, n_scales, stencil, stencil))
    amp = (2.0 ** (-2.0 * grid - 2.0 * j))[None, :, None, None]
    for k in range(K):
        values[k] = amp * eval_spatial(basis.spatial[k], args)
    return FilterBank(basis.spatial_kind, values, grid, rot_step, j, pitch)
