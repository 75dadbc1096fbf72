"""Direct scattering for the 4x4 Manakov spectral problem at t = 0.

The x-part of the Lax pair is psi_x = (i lam sigma + U) psi with
sigma = diag(-1, 1, 1, 1) and U = i [[0, q], [q^dagger, 0]]. The normalised
Jost solution mu_- = psi exp(-i lam x sigma) starts from the identity at the
left edge of the truncated support and is advanced with a frozen-coefficient
fourth-order Magnus step (two Gauss points). The exponent stays in the Lie
algebra of the symmetry group, so every step is exactly unitary with unit
determinant in exact arithmetic.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (NonGenericDataError, ProfileError, RangeError,
                     ResolutionError, SingularMatrixError)
from .numerics import SINGULARITY_FLOOR, det3, expm4, inv3

SIGMA = np.diag([-1.0, 1.0, 1.0, 1.0]).astype(complex)
MAX_PHASE_STEP = 0.25
DEFAULT_X_STEP = 0.01
DEFAULT_CUTOFF = 20.0
CSV_HEADER = ["x", "q1_re", "q1_im", "q2_re", "q2_im", "q3_re", "q3_im"]

KINDS = ("sech", "gaussian", "sampled")


def sech(u):
    e = np.exp(-np.abs(u))
    return 2 * e / (1 + e * e)


def _as_complex3(values):
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            v = complex(v[0], v[1])
        elif isinstance(v, dict):
            v = complex(v.get("re", 0.0), v.get("im", 0.0))
        out.append(complex(v))
    if len(out) != 3:
        raise ProfileError(f"expected 3 amplitudes, got {len(out)}")
    return tuple(out)


@dataclass(frozen=True)
class InitialProfile:
    """Vector initial datum q0(x) = (q1, q2, q3)(x, 0).

    Analytic kinds are ``amplitudes * sech((x - center) / width)`` and
    ``amplitudes * exp(-(x - center)^2 / (2 width^2))``. A sampled profile is
    interpolated by cubic splines and is zero outside its sample range.
    The datum is truncated to [-support_cutoff, support_cutoff].
    """

    kind: str = "sech"
    amplitudes: tuple = (0j, 0j, 0j)
    width: float = 1.0
    center: float = 0.0
    samples: Optional[tuple] = None  # (x, q) with q of shape (n, 3)
    support_cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProfileError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "amplitudes", _as_complex3(self.amplitudes))
        if not (self.support_cutoff > 0 and math.isfinite(self.support_cutoff)):
            raise ProfileError("support_cutoff must be a positive finite number")
        if self.kind == "sampled":
            if self.samples is None:
                raise ProfileError("sampled profile needs samples")
            x, q = self.samples
            x = np.asarray(x, dtype=float)
            q = np.asarray(q, dtype=complex)
            if x.ndim != 1 or q.shape != (x.size, 3) or x.size < 4:
                raise ProfileError("samples must be x of shape (n,) and q of shape (n, 3), n >= 4")
            if not np.all(np.diff(x) > 0):
                raise ProfileError("sample abscissae must be strictly increasing")
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(q))):
                raise ProfileError("samples contain non-finite values")
            object.__setattr__(self, "samples", (x, q))
        elif not (self.width > 0 and math.isfinite(self.width) and math.isfinite(self.center)):
            raise ProfileError("width must be positive and center finite")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in self.amplitudes):
            raise ProfileError("amplitudes must be finite")

    @classmethod
    def zero(cls):
        return cls("sech", (0, 0, 0))

    @classmethod
    def from_csv(cls, path, support_cutoff=DEFAULT_CUTOFF):
        """Read a sampled profile with header x,q1_re,q1_im,q2_re,q2_im,q3_re,q3_im."""
        try:
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                header = [h.strip() for h in next(reader)]
                if header != CSV_HEADER:
                    raise ProfileError(f"{path}: bad header {header}, expected {CSV_HEADER}")
                rows = []
                for lineno, row in enumerate(reader, start=2):
                    if not row:
                        continue
                    if len(row) != 7:
                        raise ProfileError(f"{path}:{lineno}: expected 7 columns, got {len(row)}")
                    try:
                        rows.append([float(v) for v in row])
                    except ValueError as exc:
                        raise ProfileError(f"{path}:{lineno}: {exc}") from None
        except StopIteration:
            raise ProfileError(f"{path}: empty file") from None
        except UnicodeDecodeError as exc:
            raise ProfileError(f"{path}: not a text CSV ({exc})") from None
        data = np.array(rows, dtype=float).reshape(-1, 7)
        q = data[:, 1::2] + 1j * data[:, 2::2]
        return cls("sampled", (0, 0, 0), samples=(data[:, 0], q), support_cutoff=support_cutoff)

    def to_dict(self):
        d = {
            "kind": self.kind,
            "amplitudes": [[c.real, c.imag] for c in self.amplitudes],
            "width": self.width,
            "center": self.center,
            "support_cutoff": self.support_cutoff,
        }
        if self.kind == "sampled":
            x, q = self.samples
            d["samples"] = {"x": x.tolist(), "q_re": q.real.tolist(), "q_im": q.imag.tolist()}
        return d

    @classmethod
    def from_dict(cls, d):
        samples = None
        if d.get("kind") == "sampled":
            s = d["samples"]
            samples = (np.asarray(s["x"]), np.asarray(s["q_re"]) + 1j * np.asarray(s["q_im"]))
        return cls(d.get("kind", "sech"), d.get("amplitudes", (0, 0, 0)),
                   float(d.get("width", 1.0)), float(d.get("center", 0.0)), samples,
                   float(d.get("support_cutoff", DEFAULT_CUTOFF)))

    def fingerprint(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @cached_property
    def _splines(self):
        x, q = self.samples
        return [CubicSpline(x, q[:, j]) for j in range(3)]

    def untruncated(self, x):
        """q0 at ``x`` without the support cutoff; shape (len(x), 3)."""
        x = np.asarray(x, dtype=float)
        amps = np.array(self.amplitudes)
        if self.kind == "sech":
            return np.outer(sech((x - self.center) / self.width), amps)
        if self.kind == "gaussian":
            return np.outer(np.exp(-0.5 * ((x - self.center) / self.width) ** 2), amps)
        xs = self.samples[0]
        out = np.zeros((x.size, 3), dtype=complex)
        inside = (x >= xs[0]) & (x <= xs[-1])
        for j, sp in enumerate(self._splines):
            out[inside, j] = sp(x[inside])
        return out

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = self.untruncated(x)
        out[np.abs(x) > self.support_cutoff] = 0
        return out

    @property
    def is_zero(self):
        if self.kind == "sampled":
            return not np.any(self.samples[1])
        return not any(self.amplitudes)

    def tail_bound(self):
        """Integral of |q0| over |x| > support_cutoff (what truncation drops)."""
        L = self.support_cutoff
        norm = float(np.linalg.norm(np.array(self.amplitudes)))
        if self.kind == "sampled":
            x, q = self.samples
            outside = np.abs(x) > L
            if not np.any(outside):
                return 0.0
            mag = np.where(outside, np.linalg.norm(q, axis=1), 0.0)
            return float(np.trapezoid(mag, x))
        w, c = self.width, self.center
        if self.kind == "sech":
            def upper(a):  # int_a^inf sech(u) du
                return math.pi / 2 - 2 * math.atan(math.tanh(a / 2))
            return norm * w * (upper((L - c) / w) + upper((L + c) / w))
        return norm * w * math.sqrt(math.pi / 2) * (
            math.erfc((L - c) / (w * math.sqrt(2))) + math.erfc((L + c) / (w * math.sqrt(2))))

    def weighted_l1(self, n=4001):
        """(1 + |x|)|q0| integrated over the truncated support."""
        x = np.linspace(-self.support_cutoff, self.support_cutoff, n)
        return float(np.trapezoid((1 + np.abs(x)) * np.linalg.norm(self(x), axis=1), x))


@dataclass(frozen=True)
class LaxAssembly:
    profile: InitialProfile
    sigma: np.ndarray = field(default_factory=lambda: SIGMA.copy())

    def u_of_x(self, x):
        """Potential matrices U(x), shape (len(x), 4, 4)."""
        q = self.profile(x)
        u = np.zeros((q.shape[0], 4, 4), dtype=complex)
        u[:, 0, 1:] = 1j * q
        u[:, 1:, 0] = 1j * np.conj(q)
        return u


def assemble_lax(profile: InitialProfile) -> LaxAssembly:
    if not math.isfinite(profile.weighted_l1()):
        raise ProfileError("profile is not integrable against (1 + |x|)")
    return LaxAssembly(profile)


def default_x_grid(lax: LaxAssembly, step=DEFAULT_X_STEP):
    L = lax.profile.support_cutoff
    n = int(math.ceil(2 * L / step))
    return np.linspace(-L, L, n + 1)


def _check_resolution(x_grid, lambdas):
    h = float(np.max(np.diff(x_grid))) if x_grid.size > 1 else 0.0
    lam = float(np.max(np.abs(lambdas))) if np.size(lambdas) else 0.0
    if h * lam > MAX_PHASE_STEP:
        raise ResolutionError(
            f"x step {h:.3g} too coarse for |lambda| = {lam:.3g} (need h*|lambda| <= {MAX_PHASE_STEP})")


def _propagate(lax, lambdas, x_grid, keep_path=False):
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.ndim != 1 or x_grid.size < 2 or not np.all(np.diff(x_grid) > 0):
        raise ResolutionError("x grid must be strictly increasing with at least two points")
    _check_resolution(x_grid, lambdas)
    h = np.diff(x_grid)
    mid = 0.5 * (x_grid[1:] + x_grid[:-1])
    off = h * (math.sqrt(3.0) / 6.0)
    u1 = lax.u_of_x(mid - off)
    u2 = lax.u_of_x(mid + off)
    diag = 1j * np.diag(SIGMA)
    lam_sigma = lambdas[:, None, None] * (1j * SIGMA)
    mu = np.broadcast_to(np.eye(4, dtype=complex), (lambdas.size, 4, 4)).copy()
    path = [mu.copy()] if keep_path else None
    c2 = math.sqrt(3.0) / 12.0
    live = np.any(u1 != 0, axis=(1, 2)) | np.any(u2 != 0, axis=(1, 2))
    for n in range(h.size):
        if not live[n]:
            # U = 0 on the step: the propagator is exactly the identity
            if keep_path:
                path.append(mu.copy())
            continue
        du = u1[n] - u2[n]
        # [A2, A1] with A_i = i lam sigma + U_i
        comm = (lam_sigma @ du - du @ lam_sigma) + (u2[n] @ u1[n] - u1[n] @ u2[n])
        omega = h[n] * (lam_sigma + 0.5 * (u1[n] + u2[n])) + (c2 * h[n] ** 2) * comm
        # mu_{n+1} = exp(omega) mu_n exp(-i lam h sigma)
        mu = (expm4(omega) @ mu) * np.exp(-h[n] * lambdas[:, None] * diag[None, :])[:, None, :]
        if keep_path:
            path.append(mu.copy())
    return (mu, np.stack(path, axis=1)) if keep_path else mu


def jost_mu_minus(lax: LaxAssembly, lam: float, x_grid) -> np.ndarray:
    """mu_-(x; lam) at every point of ``x_grid``, shape (len(x_grid), 4, 4)."""
    _, path = _propagate(lax, [lam], x_grid, keep_path=True)
    return path[0]


def _conjugate_out(mu_end, lambdas, x_end):
    phase = np.exp(-1j * np.outer(lambdas, np.diag(SIGMA).real) * x_end)  # e^{-i lam x sigma}
    return phase[:, :, None] * mu_end * np.conj(phase)[:, None, :]


def scattering_matrices(lax: LaxAssembly, lambdas, x_grid=None) -> np.ndarray:
    """s(lam) for a batch of real lam, shape (len(lambdas), 4, 4)."""
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if x_grid is None:
        x_grid = default_x_grid(lax)
    x_grid = np.asarray(x_grid, dtype=float)
    mu = _propagate(lax, lambdas, x_grid)
    return _conjugate_out(mu, lambdas, x_grid[-1])


def scattering_matrix(lax: LaxAssembly, lam: float, x_grid=None) -> np.ndarray:
    return scattering_matrices(lax, [lam], x_grid)[0]


def adjugate3(m):
    """Classical adjugate (transposed cofactor matrix) of 3x3 matrices."""
    m = np.asarray(m)
    c = np.empty_like(m)
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != i]
            s = [k for k in range(3) if k != j]
            minor = m[..., r[0], s[0]] * m[..., r[1], s[1]] - m[..., r[0], s[1]] * m[..., r[1], s[0]]
            c[..., j, i] = (-1) ** (i + j) * minor
    return c


def reflection_gamma(s, floor=SINGULARITY_FLOOR):
    """Split s into a (3x3), b (1x3) and gamma = b a^{-1}.

    Works on a single matrix or a stack. Raises NonGenericDataError when
    det a is too small to invert.
    """
    s = np.asarray(s, dtype=complex)
    a = s[..., 1:, 1:]
    b = s[..., 0, 1:]
    try:
        ainv = inv3(a, floor)
    except SingularMatrixError as exc:
        raise NonGenericDataError(
            f"non-generic data: min |det a| = {exc.abs_det:.3e}", exc.abs_det) from None
    gamma = np.einsum("...i,...ij->...j", b, ainv)
    return a, b, gamma


def symmetry_defects(s):
    """(|det s - 1|, ||s^dagger s - I||_F) per matrix."""
    s = np.asarray(s)
    det = np.linalg.det(s)
    gram = np.conj(np.swapaxes(s, -1, -2)) @ s
    uni = np.linalg.norm(gram - np.eye(4), axis=(-2, -1))
    return np.abs(det - 1), uni


@dataclass(frozen=True)
class ScatteringData:
    lambda_grid: np.ndarray
    a: np.ndarray  # (n, 3, 3)
    b: np.ndarray  # (n, 3)
    gamma: np.ndarray  # (n, 3)
    unitarity_defect: np.ndarray
    det_s_defect: np.ndarray
    min_abs_det_a: float
    profile_fingerprint: str = ""
    tail_bound: float = 0.0
    x_step: float = DEFAULT_X_STEP

    @property
    def lambda_min(self):
        return float(self.lambda_grid[0])

    @property
    def lambda_max(self):
        return float(self.lambda_grid[-1])

    @cached_property
    def _gamma_splines(self):
        g = self.gamma
        return (CubicSpline(self.lambda_grid, g.real, axis=0),
                CubicSpline(self.lambda_grid, g.imag, axis=0))

    def gamma_interp(self, lam, extrapolate_zero=False):
        lam = np.asarray(lam, dtype=float)
        re, im = self._gamma_splines
        out = re(lam) + 1j * im(lam)
        if extrapolate_zero:
            out = np.where(((lam < self.lambda_min) | (lam > self.lambda_max))[..., None], 0, out)
        return out

    def gamma_derivative(self, lam):
        re, im = self._gamma_splines
        return re(lam, 1) + 1j * im(lam, 1)

    def to_json(self):
        doc = {
            "lambda": self.lambda_grid.tolist(),
            "a_re": self.a.real.tolist(), "a_im": self.a.imag.tolist(),
            "b_re": self.b.real.tolist(), "b_im": self.b.imag.tolist(),
            "gamma_re": self.gamma.real.tolist(), "gamma_im": self.gamma.imag.tolist(),
            "defects": {
                "unitarity": self.unitarity_defect.tolist(),
                "det_s": self.det_s_defect.tolist(),
                "min_abs_det_a": self.min_abs_det_a,
                "tail_bound": self.tail_bound,
            },
            "x_step": self.x_step,
            "profile_fingerprint": self.profile_fingerprint,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        arr = np.asarray
        return cls(
            lambda_grid=arr(d["lambda"], dtype=float),
            a=arr(d["a_re"]) + 1j * arr(d["a_im"]),
            b=arr(d["b_re"]) + 1j * arr(d["b_im"]),
            gamma=arr(d["gamma_re"]) + 1j * arr(d["gamma_im"]),
            unitarity_defect=arr(d["defects"]["unitarity"], dtype=float),
            det_s_defect=arr(d["defects"]["det_s"], dtype=float),
            min_abs_det_a=float(d["defects"]["min_abs_det_a"]),
            profile_fingerprint=d.get("profile_fingerprint", ""),
            tail_bound=float(d["defects"].get("tail_bound", 0.0)),
            x_step=float(d.get("x_step", DEFAULT_X_STEP)),
        )

    def save(self, path):
        _atomic_write(path, self.to_json())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


def _atomic_write(path, text):
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def scattering_grid(lax: LaxAssembly, lambda_min=-4.0, lambda_max=4.0, n=257,
                    x_step=DEFAULT_X_STEP, chunk=512) -> ScatteringData:
    """Tabulate a, b, gamma and the symmetry defects on a uniform lambda grid.

    Nodes are independent; they are propagated together as one batch (in
    chunks of ``chunk``), so the result does not depend on evaluation order.
    """
    if n < 16:
        raise RangeError(f"need at least 16 lambda nodes, got {n}")
    if not lambda_max > lambda_min:
        raise RangeError("lambda_max must exceed lambda_min")
    lambdas = np.linspace(lambda_min, lambda_max, n)
    x_grid = default_x_grid(lax, x_step)
    parts = [scattering_matrices(lax, lambdas[i:i + chunk], x_grid)
             for i in range(0, n, chunk)]
    s = np.concatenate(parts)
    det_def, uni_def = symmetry_defects(s)
    abs_det_a = np.abs(det3(s[:, 1:, 1:]))
    k = int(np.argmin(abs_det_a))
    if abs_det_a[k] <= SINGULARITY_FLOOR:
        raise NonGenericDataError(
            f"non-generic data at lambda = {lambdas[k]:.6g}: |det a| = {abs_det_a[k]:.3e}",
            float(abs_det_a[k]))
    a, b, gamma = reflection_gamma(s)
    return ScatteringData(lambdas, a, b, gamma, uni_def, det_def, float(abs_det_a[k]),
                          lax.profile.fingerprint(), lax.profile.tail_bound(), float(x_step))


def gamma_at(data: ScatteringData, lambda0):
    """Cubic interpolation of gamma at ``lambda0`` (scalar or array)."""
    lam = np.asarray(lambda0, dtype=float)
    if np.any(lam < data.lambda_min) or np.any(lam > data.lambda_max):
        bad = lam[(lam < data.lambda_min) | (lam > data.lambda_max)].ravel()[0] if lam.ndim else lam
        raise RangeError(
            f"lambda0 = {float(bad):.6g} outside the tabulated range "
            f"[{data.lambda_min:g}, {data.lambda_max:g}]")
    return data.gamma_interp(lam)
