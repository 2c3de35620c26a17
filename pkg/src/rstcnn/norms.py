"""Norms used by the equivariance and stability measurements.

Images x(u, lambda): ||x|| = (1/M sum_lambda sum_u |x|^2 Delta^2)^{1/2} with
pixel pitch Delta = 1.  Feature maps x(u, theta, alpha, lambda): the rotation
axis is averaged (normalized S^1 measure), the scale axis is reduced by a
supremum, so ||x|| = max_s (1/M sum_lambda (1/N_r) sum_r sum_u |x|^2)^{1/2}.
"""

from __future__ import annotations

import numpy as np


def _values(x):
    return x.values if hasattr(x, "values") else np.asarray(x, dtype=np.float64)


def feature_norm(x):
    """Norm of an image ([M, H, W]) or feature map ([M, N_r, N_s, H, W])."""
    v = _values(x)
    if v.ndim == 3:
        return float(np.sqrt(np.sum(v * v) / v.shape[0]))
    if v.ndim == 5:
        m, n_r = v.shape[0], v.shape[1]
        per_scale = np.sum(v * v, axis=(0, 1, 3, 4)) / (m * n_r)
        return float(np.sqrt(np.max(per_scale)))
    raise ValueError(f"expected 3-d image or 5-d feature values, got shape {v.shape}")


def fb_norm(a, eigenvalues):
    """Eigenvalue-weighted coefficient norm sqrt(sum_k mu_k a(k)^2).

    a[..., K]: the last axis is contracted against eigenvalues; leading axes
    are preserved.
    """
    a = np.asarray(a, dtype=np.float64)
    mu = np.asarray(eigenvalues, dtype=np.float64)
    if a.shape[-1] != mu.shape[0]:
        raise ValueError(f"coefficient axis {a.shape[-1]} != eigenvalue count {mu.shape[0]}")
    return np.sqrt(np.sum(a * a * mu, axis=-1))


def fb_norm_joint(a, eigenvalues):
    """Joint-filter variant: a[..., K, n_angular] contracted over (k, m)."""
    a = np.asarray(a, dtype=np.float64)
    mu = np.asarray(eigenvalues, dtype=np.float64)
    if a.shape[-2] != mu.shape[0]:
        raise ValueError(f"coefficient axis {a.shape[-2]} != eigenvalue count {mu.shape[0]}")
    return np.sqrt(np.einsum("...km,k->...", a * a, mu))
