"""Small dense kernels: 4x4 matrix exponential, 3x3 inverse, adaptive
Gauss-Kronrod quadrature and a power-of-two FFT pair.

Every routine accepts a leading batch dimension where that makes sense, so
the scattering sweep can push all spectral nodes through one call.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AccuracyError, InvalidInputError, SingularMatrixError

SQUARING_THRESHOLD = 0.5
SINGULARITY_FLOOR = 1e-12

_EPS = np.finfo(float).eps


def _check_finite(m, name="matrix"):
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name} has non-finite entries")


def _taylor_degree(theta):
    """Smallest degree whose Taylor remainder for norm ``theta`` is below eps/8."""
    if theta == 0.0:
        return 1
    term = 1.0
    for k in range(1, 60):
        term *= theta / k
        if term * theta / (k + 1) < _EPS / 8:
            return k
    return 60


def expm4(m):
    """Matrix exponential of a 4x4 complex matrix (or a stack of them).

    Scaling and squaring around a Taylor core: each matrix is scaled by
    ``2**-s`` until its 1-norm is at most 0.5, exponentiated by a truncated
    Taylor series evaluated in Horner form, then squared ``s`` times.
    """
    a = np.asarray(m, dtype=complex)
    if a.shape[-2:] != (4, 4):
        raise InvalidInputError(f"expected (..., 4, 4) array, got shape {a.shape}")
    _check_finite(a)
    norms = np.abs(a).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(norms > SQUARING_THRESHOLD,
                     np.ceil(np.log2(np.maximum(norms, 1e-300) / SQUARING_THRESHOLD)), 0)
    s = s.astype(int)
    scaled = a / (2.0 ** s)[..., None, None]
    theta = float(np.max(norms / 2.0 ** s)) if a.ndim > 2 else float(norms / 2.0 ** s)
    deg = _taylor_degree(theta)

    eye = np.broadcast_to(np.eye(4, dtype=complex), a.shape)
    e = eye.copy()
    for k in range(deg, 0, -1):
        e = eye + (scaled @ e) / k

    smax = int(np.max(s)) if s.size else 0
    for j in range(smax):
        sq = e @ e
        if np.ndim(s) == 0:
            e = sq
        else:
            e = np.where((s > j)[..., None, None], sq, e)
    return e


def det3(m):
    m = np.asarray(m)
    return (m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
            - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
            + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]))


def inv3(m, floor=SINGULARITY_FLOOR):
    """Inverse of a 3x3 complex matrix (or a stack), refusing near-singular input.

    Raises SingularMatrixError carrying the smallest ``|det m|`` seen.
    """
    a = np.asarray(m, dtype=complex)
    if a.shape[-2:] != (3, 3):
        raise InvalidInputError(f"expected (..., 3, 3) array, got shape {a.shape}")
    _check_finite(a)
    d = np.abs(det3(a))
    dmin = float(np.min(d))
    if dmin <= floor:
        raise SingularMatrixError(f"|det| = {dmin:.3e} is below the floor {floor:.1e}", dmin)
    return np.linalg.inv(a)


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error_estimate: float
    evaluations: int


# 15-point Kronrod extension of the 7-point Gauss rule (nodes on [0, 1) of the
# symmetric half; the last node is the centre).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG_FULL = np.zeros(15)
_WG_FULL[1:7:2] = _WG[:3]
_WG_FULL[7] = _WG[3]
_WG_FULL[9:15:2] = _WG[2::-1]


def _gk15(g, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    fx = np.asarray(g(mid + half * _NODES), dtype=complex)
    k = half * np.dot(_WK, fx)
    gs = half * np.dot(_WG_FULL, fx)
    return k, abs(k - gs)


def quad_adaptive(f: Callable, a: float, b: float, tol: float = 1e-10,
                  max_intervals: int = 4000) -> QuadResult:
    """Globally adaptive G7/K15 quadrature of a vectorised integrand.

    ``a`` may be ``-inf``; the range is then mapped to [0, 1) with
    xi = b - u/(1-u). Reversed limits return the negated integral.
    Raises AccuracyError (with ``best`` set) if the budget runs out.
    """
    if b == -math.inf or math.isnan(a) or math.isnan(b) or b == math.inf:
        raise InvalidInputError("upper limit must be finite")
    if a == b:
        return QuadResult(0j, 0.0, 0)
    if a == -math.inf:
        def g(u):
            w = 1.0 - u
            return f(b - u / w) / (w * w)
        lo, hi, sign = 0.0, 1.0, 1.0
    else:
        g = f
        lo, hi, sign = (a, b, 1.0) if a < b else (b, a, -1.0)

    val, err = _gk15(g, lo, hi)
    heap = [(-err, lo, hi, val)]
    total, total_err, n = val, err, 1
    while total_err > tol:
        if n >= max_intervals:
            raise AccuracyError(
                f"quadrature did not reach tol={tol:.1e} (estimate {total_err:.1e})",
                best=QuadResult(sign * complex(total), float(total_err), 15 * n))
        negerr, l, h, v = heapq.heappop(heap)
        m = 0.5 * (l + h)
        v1, e1 = _gk15(g, l, m)
        v2, e2 = _gk15(g, m, h)
        total += v1 + v2 - v
        heapq.heappush(heap, (-e1, l, m, v1))
        heapq.heappush(heap, (-e2, m, h, v2))
        n += 1
        total_err += e1 + e2 + negerr
    total = sum(item[3] for item in heap)
    return QuadResult(sign * complex(total), float(total_err), 15 * (2 * n - 1))


def _check_pow2(v):
    n = np.shape(v)[-1]
    if n < 1 or n & (n - 1):
        raise InvalidInputError(f"FFT length must be a power of two, got {n}")


def fft(v):
    """Unnormalised forward DFT along the last axis (power-of-two length)."""
    _check_pow2(v)
    return np.fft.fft(v)


def ifft(v):
    _check_pow2(v)
    return np.fft.ifft(v)
