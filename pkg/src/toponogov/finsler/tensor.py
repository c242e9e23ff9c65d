"""Fundamental tensor and convexity margins.

The tensor g_v is half the v-Hessian of F^2.  Families with a closed
form short-circuit the finite differences; everything else gets a
symmetrized central-difference Hessian with steps scaled to F(v), which
keeps the stencil honest across charts whose vectors live on very
different scales.  The stencil broadcasts over leading axes so fan
integration can evaluate whole batches in one F call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTensor
from .charts import FinslerChart

__all__ = [
    "FundamentalTensorValue",
    "fundamental_tensor",
    "tensor_matrix",
    "batched_tensor",
    "uniform_convexity_margin",
    "direction_samples",
]

_EIG_FLOOR = 1e-10


@dataclass(frozen=True)
class FundamentalTensorValue:
    """g_ij at a flagpole (x, v), with the inner product it induces."""

    x: np.ndarray
    v: np.ndarray
    matrix: np.ndarray

    def inner(self, a, b) -> float:
        return float(np.asarray(a, float) @ self.matrix @ np.asarray(b, float))

    def norm(self, a) -> float:
        return math.sqrt(max(self.inner(a, a), 0.0))


def _fd_half_hessian(chart: FinslerChart, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Central second differences of F^2 / 2 in v; batched over leading axes."""
    n = chart.dim
    base = np.asarray(chart.F(x, v), dtype=float)
    h = 1e-4 * base
    hh = h[..., None]
    eye = np.eye(n)
    pts = [v]
    for i in range(n):
        pts.append(v + hh * eye[i])
        pts.append(v - hh * eye[i])
    for i in range(n):
        for j in range(i + 1, n):
            pts.append(v + hh * (eye[i] + eye[j]))
            pts.append(v + hh * (eye[i] - eye[j]))
            pts.append(v - hh * (eye[i] - eye[j]))
            pts.append(v - hh * (eye[i] + eye[j]))
    vals = np.asarray(chart.F(x[None], np.stack(pts)), dtype=float) ** 2
    g = np.empty(base.shape + (n, n))
    h2 = h * h
    for i in range(n):
        g[..., i, i] = (vals[1 + 2 * i] - 2.0 * vals[0] + vals[2 + 2 * i]) / h2
    k = 1 + 2 * n
    for i in range(n):
        for j in range(i + 1, n):
            gij = (vals[k] - vals[k + 1] - vals[k + 2] + vals[k + 3]) / (4.0 * h2)
            g[..., i, j] = gij
            g[..., j, i] = gij
            k += 4
    return 0.5 * g


def tensor_matrix(
    chart: FinslerChart, x, v, *, force_fd: bool = False
) -> np.ndarray:
    """g_ij(x, v) without the definiteness gate (margins need raw values)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if float(np.max(np.abs(v))) == 0.0:
        raise ValueError("fundamental tensor needs v != 0")
    if chart.analytic_tensor is not None and not force_fd:
        g = np.asarray(chart.analytic_tensor(x, v), dtype=float)
    else:
        g = _fd_half_hessian(chart, x, v)
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def batched_tensor(chart: FinslerChart, x, v) -> np.ndarray:
    """g at broadcast (x, v): metric fast path, else batched differences."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    x, v = np.broadcast_arrays(x, v)
    n = chart.dim
    if chart.metric_matrix is not None:
        g = np.asarray(chart.metric_matrix(x), dtype=float)
        return np.broadcast_to(g, x.shape[:-1] + (n, n)).copy()
    if chart.analytic_tensor is not None and x.ndim == 1:
        return np.asarray(chart.analytic_tensor(x, v), dtype=float)
    return _fd_half_hessian(chart, x, v)


def fundamental_tensor(
    chart: FinslerChart, x, v, *, force_fd: bool = False
) -> FundamentalTensorValue:
    """Positive-definite g_v or DegenerateTensor; see tensor_matrix."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    g = tensor_matrix(chart, x, v, force_fd=force_fd)
    eigs = np.linalg.eigvalsh(g)
    scale = float(np.max(np.abs(eigs))) or 1.0
    if float(eigs[0]) <= _EIG_FLOOR * scale:
        raise DegenerateTensor(
            f"{chart.name}: min eigenvalue {eigs[0]:.3e} at v={v.tolist()}"
        )
    return FundamentalTensorValue(x=x, v=v, matrix=g)


def direction_samples(dim: int, count: int = 64) -> np.ndarray:
    """Deterministic unit directions: uniform circle or golden spiral."""
    if dim == 2:
        ang = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False) + 0.013
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    if dim == 3:
        k = np.arange(count, dtype=float) + 0.5
        z = 1.0 - 2.0 * k / count
        r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        golden = math.pi * (3.0 - math.sqrt(5.0))
        ang = golden * k
        return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=-1)
    raise ValueError(f"no direction sampler for dimension {dim}")


def uniform_convexity_margin(
    chart: FinslerChart,
    x,
    v,
    w_samples=None,
    *,
    mode: str = "forward",
) -> float:
    """min over w of g_v(w, w) - F(w)^2 (or the reverse, mode='reversed').

    A nonnegative margin certifies the convexity comparison on the
    sample set; the raw (possibly negative) minimum comes back either
    way so callers can report how badly the inequality fails.
    """
    if mode not in ("forward", "reversed"):
        raise ValueError(f"unknown mode {mode!r}")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if w_samples is None:
        w_samples = direction_samples(chart.dim)
    w_samples = np.asarray(w_samples, dtype=float)
    g = tensor_matrix(chart, x, v)
    quad = np.einsum("ki,ij,kj->k", w_samples, g, w_samples)
    norms = np.asarray(chart.F(x, w_samples), dtype=float) ** 2
    diffs = quad - norms if mode == "forward" else norms - quad
    return float(np.min(diffs))
