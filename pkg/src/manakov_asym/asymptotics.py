"""Leading-order long-time asymptotics inside the cone |x/t| <= C.

With lambda0 = -x/(2t), nu = -log(1 + |gamma(lambda0)|^2)/(2 pi) and the
regularised Cauchy integral chi~(lambda0), two algebraically distinct forms
of the leading term are available:

``theorem``
    nu/(2 sqrt(pi t)) Gamma(i nu) (4t)^{i nu} gamma0
    exp(2i lambda0^2 t + 2 chi~ + pi nu/2 - i pi/4)

``eta2``
    (1/sqrt t) (-i) eta^2 beta12, built from the scaling factor
    eta = (4t)^{-i nu/2} exp(i lambda0^2 t + chi~) and the model-problem
    coefficient beta12 = exp(pi nu/2 + i pi/4) nu Gamma(i nu) gamma0 / sqrt(2 pi).

They differ by the constant factor (4t)^{2i nu}/sqrt 2. The first gives
t|q|^2 = -nu/2, the second t|q|^2 = -nu; the phase audit below quantifies
the difference, and the PDE comparison decides between them.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeError
from .numerics import quad_adaptive
from .scattering import ScatteringData, _atomic_write, gamma_at
from .special import ln_gamma

FIELD_COLUMNS = ["x", "t", "q1_re", "q1_im", "q2_re", "q2_im", "q3_re", "q3_im",
                 "lambda0", "nu", "in_cone"]
CONVENTIONS = ("theorem", "eta2")
CHI_TOL = 1e-8
T_MIN = 5.0
_PV_GUARD = 1e-7


def nu_of(gamma0):
    """nu = -log(1 + ||gamma0||^2) / (2 pi); works along the last axis."""
    g = np.asarray(gamma0)
    return -np.log1p(np.sum(np.abs(g) ** 2, axis=-1)) / (2 * np.pi)


def _log_weight(data: ScatteringData):
    """xi -> log(1 + |gamma(xi)|^2), zero outside the tabulated range."""
    def f(xi):
        return np.log1p(np.sum(np.abs(data.gamma_interp(xi, extrapolate_zero=True)) ** 2, axis=-1))
    return f


def _log_weight_slope(data: ScatteringData, xi):
    g = data.gamma_interp(xi)
    dg = data.gamma_derivative(xi)
    return 2 * np.real(np.sum(np.conj(g) * dg, axis=-1)) / (1 + np.sum(np.abs(g) ** 2, axis=-1))


def chi_tilde_of(data: ScatteringData, lambda0: float, tol: float = CHI_TOL,
                 orientation: str = "consistent") -> complex:
    """chi~(lambda0) = (1/2 pi i) [ int_{-inf}^{lambda0-1} f/(xi-lambda0) dxi
                               + int_{lambda0-1}^{lambda0} (f - f0)/(xi-lambda0) dxi ]

    with f = log(1 + |gamma|^2). Both integrals run left to right, which is
    what makes chi~ the regularised form of the full Cauchy integral; since f
    is real, chi~ is purely imaginary. ``orientation="reversed"`` flips the
    second integral, for comparison only. Beyond the tabulated range f is 0.
    """
    lam0 = float(lambda0)
    if not (data.lambda_min <= lam0 - 1 and lam0 <= data.lambda_max):
        raise RangeError(
            f"chi~ needs [{lam0 - 1:g}, {lam0:g}] inside [{data.lambda_min:g}, {data.lambda_max:g}]")
    f = _log_weight(data)
    f0 = float(f(np.array([lam0]))[0])
    slope0 = float(_log_weight_slope(data, np.array([lam0]))[0])

    def tail(xi):
        return f(xi) / (xi - lam0)

    def local(xi):
        d = xi - lam0
        near = np.abs(d) < _PV_GUARD
        safe = np.where(near, 1.0, d)
        return np.where(near, slope0, (f(xi) - f0) / safe)

    i_tail = quad_adaptive(tail, -math.inf, lam0 - 1, tol=tol).value.real
    i_local = quad_adaptive(local, lam0 - 1, lam0, tol=tol).value.real
    if orientation == "reversed":
        i_local = -i_local
    elif orientation != "consistent":
        raise ValueError(f"unknown orientation {orientation!r}")
    return complex(i_tail + i_local) / (2j * np.pi)


def eta_of(t, lambda0, nu, chi):
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    return np.exp(-0.5j * nu * math.log(4 * t) + 1j * lambda0 ** 2 * t + chi)


def beta12_of(gamma0, nu):
    """Model-problem coefficient; |beta12|^2 = -nu exactly."""
    g = np.exp(ln_gamma(1j * nu)) if nu != 0 else 0.0
    return np.exp(0.5 * np.pi * nu + 0.25j * np.pi) * nu * g * np.asarray(gamma0) / math.sqrt(2 * np.pi)


@dataclass(frozen=True)
class AsymptoticParams:
    x: float
    t: float
    lambda0: float
    gamma0: np.ndarray
    nu: float
    chi: complex


def asymptotic_params(data: ScatteringData, x: float, t: float, cone_c: float = 1.0,
                      t_min: float = T_MIN, tol: float = CHI_TOL) -> AsymptoticParams:
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if t < t_min:
        raise DomainError(f"t = {t:g} below the asymptotic threshold {t_min:g}")
    lam0 = -x / (2 * t)
    if abs(x / t) > cone_c + 1e-12:
        raise RangeError(f"|x/t| = {abs(x / t):.4g} outside the cone C = {cone_c:g}")
    g0 = np.asarray(gamma_at(data, lam0))
    nu = float(nu_of(g0))
    chi = 0j if nu == 0 else chi_tilde_of(data, lam0, tol)
    return AsymptoticParams(float(x), float(t), lam0, g0, nu, chi)


def _theorem_form(p: AsymptoticParams):
    if p.nu == 0:
        return np.zeros(3, dtype=complex)
    t, nu = p.t, p.nu
    pref = nu / (2 * math.sqrt(np.pi * t)) * np.exp(ln_gamma(1j * nu) + 1j * nu * math.log(4 * t))
    phase = np.exp(2j * p.lambda0 ** 2 * t + 2 * p.chi + 0.5 * np.pi * nu - 0.25j * np.pi)
    return pref * phase * p.gamma0


def _eta2_form(p: AsymptoticParams):
    if p.nu == 0:
        return np.zeros(3, dtype=complex)
    eta = eta_of(p.t, p.lambda0, p.nu, p.chi)
    return -1j * eta ** 2 * beta12_of(p.gamma0, p.nu) / math.sqrt(p.t)


def leading_order(data: ScatteringData, x: float, t: float, convention: str = "theorem",
                  cone_c: float = 1.0, t_min: float = T_MIN) -> np.ndarray:
    """q_asym(x, t) as a length-3 complex array."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; choose from {CONVENTIONS}")
    p = asymptotic_params(data, x, t, cone_c, t_min)
    return _theorem_form(p) if convention == "theorem" else _eta2_form(p)


@dataclass(frozen=True)
class AuditRow:
    x: float
    t: float
    q_theorem: np.ndarray
    q_eta2: np.ndarray
    modulus_ratio: float  # |q_eta2| / |q_theorem|, sqrt 2 when both are nonzero
    phase_offset: float  # arg(q_theorem / q_eta2) in (-pi, pi]
    predicted_offset: float  # 2 nu log(4t) wrapped to (-pi, pi]
    modulus_gap_real_part: float  # what a non-zero Re chi~ would add, |exp(2 Re chi~) - 1|


def phase_convention_audit(data: ScatteringData, x: float, t: float,
                           cone_c: float = 1.0) -> AuditRow:
    """Evaluate both conventions at one point and record how they differ."""
    p = asymptotic_params(data, x, t, cone_c)
    qa, qb = _theorem_form(p), _eta2_form(p)
    na, nb = float(np.linalg.norm(qa)), float(np.linalg.norm(qb))
    ratio = nb / na if na > 0 else float("nan")
    inner = np.vdot(qb, qa)
    offset = float(np.angle(inner)) if na > 0 else 0.0
    pred = float(np.angle(np.exp(2j * p.nu * math.log(4 * t))))
    return AuditRow(p.x, p.t, qa, qb, ratio, offset, pred, float(abs(np.exp(2 * p.chi.real) - 1)))


@dataclass
class AsymField:
    x: np.ndarray
    t: float
    q: np.ndarray  # (n, 3)
    lambda0: np.ndarray
    nu: np.ndarray
    in_cone: np.ndarray
    convention: str = "theorem"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELD_COLUMNS)
        for i in range(self.x.size):
            q = self.q[i]
            w.writerow([repr(float(self.x[i])), repr(float(self.t)),
                        *(repr(float(v)) for c in q for v in (c.real, c.imag)),
                        repr(float(self.lambda0[i])), repr(float(self.nu[i])), int(self.in_cone[i])])
        return buf.getvalue()

    def save(self, path):
        _atomic_write(path, self.to_csv())


def asym_field(data: ScatteringData, x_grid, t: float, cone_c: float = 1.0,
               convention: str = "theorem", t_min: float = T_MIN) -> AsymField:
    """q_asym on ``x_grid`` at time ``t``; points outside the cone are zero and flagged."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; choose from {CONVENTIONS}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if t < t_min:
        raise DomainError(f"t = {t:g} below the asymptotic threshold {t_min:g}")
    x = np.asarray(x_grid, dtype=float)
    lam0 = -x / (2 * t)
    in_cone = np.abs(x / t) <= cone_c
    q = np.zeros((x.size, 3), dtype=complex)
    nu = np.zeros(x.size)
    form = _theorem_form if convention == "theorem" else _eta2_form
    for i in np.flatnonzero(in_cone):
        p = asymptotic_params(data, x[i], t, cone_c, t_min)
        q[i] = form(p)
        nu[i] = p.nu
    return AsymField(x, float(t), q, lam0, nu, in_cone, convention)
