"""Second-order transforms: AdaIN, whitening, coloring and WCT.

Whitening and coloring use ZCA-style kernels ``Q diag(lambda**p) Q^T`` built
from the eigendecomposition of a population covariance.  Eigenvalues at or
below ``eps * max_eigenvalue`` are dropped, so rank-deficient inputs are
transformed on their retained subspace instead of producing NaNs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMap, as_feature_map, channel_stats, covariance

__all__ = [
    "EIG_EPSILON",
    "TransformKernels",
    "adain",
    "sym_eig",
    "jacobi_eig",
    "whitening_kernel",
    "coloring_kernel",
    "whiten",
    "color",
    "wct",
    "transform_kernels",
]

EIG_EPSILON = 1e-8


@dataclass(frozen=True, eq=False)
class TransformKernels:
    whitening: np.ndarray | None
    coloring: np.ndarray | None
    source_mean: np.ndarray | None
    target_mean: np.ndarray | None
    retained: int


def _check_channels(a: FeatureMap, b: FeatureMap, what=("content", "style")):
    if a.channels != b.channels:
        raise ValueError(
            f"channel count mismatch: {what[0]} has {a.channels}, {what[1]} has {b.channels}"
        )


def adain(content: FeatureMap, style: FeatureMap) -> FeatureMap:
    """Renormalize each content channel to the style channel's mean and std.

    A constant content channel maps to the constant style mean.
    """
    content = as_feature_map(content)
    style = as_feature_map(style)
    _check_channels(content, style)
    sc = channel_stats(content)
    ss = channel_stats(style)
    x = content.matrix().astype(np.float64)
    scale = np.divide(ss.std, sc.std, out=np.zeros_like(sc.std), where=sc.std > 0)
    out = scale[:, None] * (x - sc.mean[:, None]) + ss.mean[:, None]
    return FeatureMap(out.reshape(content.shape))


def _symmetrize_checked(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-6 * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return 0.5 * (m + m.T)


def _canonical(w: np.ndarray, q: np.ndarray):
    idx = np.argsort(-w, kind="stable")
    w = w[idx]
    q = q[:, idx]
    # largest-magnitude component of each eigenvector made positive
    lead = np.argmax(np.abs(q), axis=0)
    signs = np.sign(q[lead, np.arange(q.shape[1])])
    signs[signs == 0] = 1.0
    return w, q * signs


def jacobi_eig(m, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Slower than LAPACK but self-contained; kept as an independent route.
    """
    a = _symmetrize_checked(m).copy()
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(1.0, np.linalg.norm(a)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/cols p and q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return _canonical(np.diag(a).copy(), v)


def sym_eig(m, method: str = "lapack"):
    """Eigenvalues (descending) and orthonormal eigenvectors (columns).

    Each eigenvector's largest-magnitude component is positive.  ``method``
    is ``"lapack"`` (default) or ``"jacobi"``.
    """
    if method == "jacobi":
        return jacobi_eig(m)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    a = _symmetrize_checked(m)
    w, q = np.linalg.eigh(a)
    return _canonical(w, q)


def _kernel(cov, power: float, eps: float):
    w, q = sym_eig(cov)
    top = w[0] if w.size else 0.0
    keep = (w > eps * top) & (w > 0)
    qk = q[:, keep]
    return (qk * w[keep] ** power) @ qk.T, int(keep.sum())


def whitening_kernel(cov, eps: float = EIG_EPSILON):
    """``(Q diag(lambda^-1/2) Q^T, retained)`` on the retained eigenvalues."""
    return _kernel(cov, -0.5, eps)


def coloring_kernel(cov, eps: float = EIG_EPSILON):
    """``(Q diag(lambda^1/2) Q^T, retained)`` on the retained eigenvalues."""
    return _kernel(cov, 0.5, eps)


def whiten(f: FeatureMap, eps: float = EIG_EPSILON) -> tuple[FeatureMap, TransformKernels]:
    """Center ``f`` and decorrelate its channels to unit variance.

    Returns the whitened map and partial kernels (no coloring side).
    """
    f = as_feature_map(f)
    x = f.matrix().astype(np.float64)
    mu = x.mean(axis=1)
    wk, retained = whitening_kernel(covariance(f), eps)
    out = wk @ (x - mu[:, None])
    kernels = TransformKernels(
        whitening=wk, coloring=None, source_mean=mu, target_mean=None, retained=retained
    )
    return FeatureMap(out.reshape(f.shape)), kernels


def color(f_white: FeatureMap, style: FeatureMap, eps: float = EIG_EPSILON) -> FeatureMap:
    """Impose the style covariance and mean on an (assumed white) map."""
    f_white = as_feature_map(f_white)
    style = as_feature_map(style)
    _check_channels(f_white, style, ("input", "style"))
    ck, _ = coloring_kernel(covariance(style), eps)
    mu = style.matrix().astype(np.float64).mean(axis=1)
    out = ck @ f_white.matrix().astype(np.float64) + mu[:, None]
    return FeatureMap(out.reshape(f_white.shape))


def wct(content: FeatureMap, style: FeatureMap, eps: float = EIG_EPSILON) -> FeatureMap:
    content = as_feature_map(content)
    style = as_feature_map(style)
    _check_channels(content, style)
    white, _ = whiten(content, eps)
    return color(white, style, eps)


def transform_kernels(
    source: FeatureMap, target: FeatureMap, eps: float = EIG_EPSILON
) -> TransformKernels:
    """Whitening kernel of ``source`` and coloring kernel of ``target``."""
    source = as_feature_map(source)
    target = as_feature_map(target)
    _check_channels(source, target, ("source", "target"))
    wk, r_src = whitening_kernel(covariance(source), eps)
    ck, r_tgt = coloring_kernel(covariance(target), eps)
    return TransformKernels(
        whitening=wk,
        coloring=ck,
        source_mean=source.matrix().astype(np.float64).mean(axis=1),
        target_mean=target.matrix().astype(np.float64).mean(axis=1),
        retained=min(r_src, r_tgt),
    )
