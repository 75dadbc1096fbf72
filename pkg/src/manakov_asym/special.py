"""Complex log-Gamma and the parabolic-cylinder function D_a(z).

``ln_gamma`` is a Lanczos approximation (g = 7, nine terms) with the
reflection formula for Re z < 1/2, arranged so that the result is the
branch continuous on C minus the negative real axis (the same branch as
``scipy.special.loggamma``; on the cut the limit from above is returned).

``pcf_d`` uses the Maclaurin (confluent hypergeometric) representation.
It cancels by up to exp(|z|^2/2) and, for large orders, by the ratio of the
two Gamma weights, so it is summed in multiprecision arithmetic (mpmath
numbers) with the working precision raised until the measured cancellation
leaves at least 64 good bits. For |z| > 6 and |arg z| <= pi/4 the
large-|z| expansion z^a exp(-z^2/4)(1 + ...) is used instead whenever its
smallest term is below 1e-19; that sector carries no recessive part. Near
the Stokes lines the double-precision expansion with Berry's error-function
multiplier is kept only as a diagnostic (``pcf_d_asymptotic``).
"""
from __future__ import annotations

import math

import mpmath as mp
import numpy as np

from .errors import PoleError, RangeError

SERIES_RADIUS = 6.0
MAX_ORDER = 10.0
MAX_ARGUMENT = 30.0
FD_STEP = 1e-5
ASYMPTOTIC_TOL = 1e-19

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)
_LOG_PI = math.log(math.pi)


def _lanczos_lngamma(z):
    z = z - 1.0
    x = np.full_like(z, _LANCZOS[0])
    for i, c in enumerate(_LANCZOS[1:], start=1):
        x = x + c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(x)


def _log_sin_pi_upper(z):
    # log sin(pi z) for Im z >= 0, continuous there and real on (0, 1)
    return -1j * np.pi * z + 0.5j * np.pi - math.log(2.0) + np.log(-np.expm1(2j * np.pi * z))


def ln_gamma(z):
    """Principal-branch log Gamma for complex ``z`` (scalar or array).

    Raises PoleError at non-positive integers.
    """
    z = np.asarray(z, dtype=complex)
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(pole):
        raise PoleError(f"Gamma has a pole at {z[pole].ravel()[0].real:g}")
    out = np.empty_like(z)
    right = z.real >= 0.5
    if np.any(right):
        out[right] = _lanczos_lngamma(z[right])
    left = ~right
    if np.any(left):
        w = z[left]
        lower = w.imag < 0
        w = np.where(lower, np.conj(w), w)
        val = _LOG_PI - _log_sin_pi_upper(w) - _lanczos_lngamma(1.0 - w)
        out[left] = np.where(lower, np.conj(val), val)
    return out[()] if out.ndim == 0 else out


def gamma(z):
    return np.exp(ln_gamma(z))


# --- parabolic-cylinder functions -------------------------------------------

_GUARD_BITS = 64
_MAX_BITS = 4000


def _series_mp(a, z, bits):
    """Maclaurin form 2^{a/2} sqrt(pi) e^{-z^2/4} [M(-a/2, 1/2, z^2/2) / Gamma((1-a)/2)
    - sqrt2 z M((1-a)/2, 3/2, z^2/2) / Gamma(-a/2)] at ``bits`` of working precision.

    Returns (value, bits lost to cancellation)."""
    with mp.workprec(bits):
        a = mp.mpc(a)
        z = mp.mpc(z)
        w = z * z / 2
        peak = mp.mpf(0)
        sums = []
        for alpha, beta in ((-a / 2, mp.mpf(0.5)), ((1 - a) / 2, mp.mpf(1.5))):
            total = mp.mpc(1)
            term = mp.mpc(1)
            n = 0
            tiny = mp.ldexp(1, -bits)
            while True:
                term = term * (alpha + n) / ((beta + n) * (n + 1)) * w
                total += term
                n += 1
                mag = abs(term)
                peak = max(peak, mag)
                if n > abs(w) and mag <= tiny * abs(total):
                    break
            sums.append(total)
        r1 = mp.rgamma((1 - a) / 2)
        r2 = mp.rgamma(-a / 2)
        left = sums[0] * r1
        right = mp.sqrt(2) * z * sums[1] * r2
        inner = left - right
        scale = max(abs(left), abs(right), peak * max(abs(r1), abs(r2) * abs(z) * 2), mp.mpf(1e-300))
        lost = 0 if inner == 0 else max(0, int(mp.log(scale / abs(inner), 2)) + 1)
        pref = mp.power(2, a / 2) * mp.sqrt(mp.pi) * mp.exp(-w / 2)
        return pref * inner, lost


def _pcf_series_mp(a, z):
    bits = _GUARD_BITS + 16 + int(abs(complex(z)) ** 2 * 0.75)
    while True:
        val, lost = _series_mp(a, z, bits)
        if bits - lost >= _GUARD_BITS or bits >= _MAX_BITS:
            return val
        bits = min(_MAX_BITS, lost + _GUARD_BITS + 16)


def _asymptotic_terms(a, z, bits=96):
    """Dominant expansion z^a e^{-z^2/4} sum_n; returns (value, smallest relative term)."""
    with mp.workprec(bits):
        a = mp.mpc(a)
        z = mp.mpc(z)
        z2 = z * z
        total = mp.mpc(1)
        term = mp.mpc(1)
        smallest = mp.mpf(1)
        for n in range(1, 2000):
            nxt = term * (-(a - 2 * n + 2) * (a - 2 * n + 1) / (2 * n)) / z2
            if abs(nxt) >= abs(term):
                break
            term = nxt
            total += term
            smallest = abs(term)
            if smallest < mp.ldexp(1, -bits):
                break
        return mp.exp(a * mp.log(z) - z2 / 4) * total, float(smallest / abs(total))


def _stokes_multiplier(z):
    """Weight of the recessive exponential exp(z^2/4) in D_a(z).

    0 for |arg z| <= pi/4, 1 for |arg z| >= 3pi/4, and Berry's smooth
    erfc profile across the Stokes line in between.
    """
    th = math.atan2(z.imag, z.real)
    ath = abs(th)
    if ath <= math.pi / 4:
        return 0.0
    if ath >= 3 * math.pi / 4:
        return 1.0
    f = -(z * z) / 2  # singulant, Re f > 0 in this sector
    sigma = f.imag / math.sqrt(2 * f.real)
    if th < 0:
        sigma = -sigma
    return 0.5 * math.erfc(-sigma)


def _pcf_asymptotic(a, z):
    """Large-|z| expansion in all three sectors, double precision.

    The recessive series is switched on with Berry's multiplier. Only used
    for the overlap diagnostic; ``pcf_d`` itself relies on the expansion
    only in |arg z| <= pi/4 where no recessive part exists."""
    a = complex(a)
    z = complex(z)
    dominant = complex(_asymptotic_terms(a, z, 64)[0])
    s = _stokes_multiplier(z)
    if s == 0.0 or _is_nonneg_int(a):
        return dominant
    sign = 1 if math.atan2(z.imag, z.real) > 0 else -1
    if z.imag == 0 and z.real < 0:
        sign = 1
    coeff = -math.sqrt(2 * math.pi) * np.exp(-ln_gamma(-a)) * np.exp(sign * 1j * math.pi * a)
    z2 = z * z
    total = term = 1 + 0j
    for n in range(1, 200):
        nxt = term * (a + 2 * n - 1) * (a + 2 * n) / (2 * n) / z2
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
    recessive = coeff * np.exp((-a - 1) * np.log(z) + z2 / 4) * total
    return dominant + s * recessive


def _is_nonneg_int(a):
    return a.imag == 0 and a.real >= 0 and a.real == round(a.real)


def _check_box(a, z):
    if not (math.isfinite(a.real) and math.isfinite(a.imag) and math.isfinite(z.real)
            and math.isfinite(z.imag)):
        raise RangeError("order and argument must be finite")
    if abs(a.real) > MAX_ORDER or abs(a.imag) > MAX_ORDER:
        raise RangeError(f"order {a} outside the supported box |Re a|, |Im a| <= {MAX_ORDER:g}")
    if abs(z) > MAX_ARGUMENT:
        raise RangeError(f"|z| = {abs(z):.3g} exceeds {MAX_ARGUMENT:g}")


def _pcf_mp(a, z, check=True):
    """D_a(z) as an mpmath number carrying well over double precision."""
    a = complex(a)
    z = complex(z)
    if check:
        _check_box(a, z)
    if abs(z) > SERIES_RADIUS and abs(math.atan2(z.imag, z.real)) <= math.pi / 4:
        val, rel = _asymptotic_terms(a, z)
        if rel < ASYMPTOTIC_TOL:
            return val
    return _pcf_series_mp(a, z)


def pcf_d(a, z):
    """Parabolic-cylinder function D_a(z) for complex order and argument."""
    return complex(_pcf_mp(a, z))


def pcf_d_series(a, z):
    """D_a(z) forced through the Maclaurin branch (for overlap checks)."""
    _check_box(complex(a), complex(z))
    return complex(_pcf_series_mp(a, z))


def pcf_d_asymptotic(a, z):
    """D_a(z) from the large-|z| expansion alone (for overlap checks)."""
    _check_box(complex(a), complex(z))
    return complex(_pcf_asymptotic(a, z))


def weber_residual(a, z, h=FD_STEP):
    """|D_a'' + (a + 1/2 - z^2/4) D_a| at ``z`` with a central second difference.

    The three samples are combined before rounding to double, so the
    difference quotient is not swamped by rounding noise."""
    a = complex(a)
    z = complex(z)
    d0 = _pcf_mp(a, z)
    dp = _pcf_mp(a, z + h)
    dm = _pcf_mp(a, z - h)
    with mp.workprec(128):
        hh = mp.mpf(h)
        d2 = (dp - 2 * d0 + dm) / (hh * hh)
        return float(abs(d2 + (mp.mpc(a) + mp.mpf(0.5) - mp.mpc(z) ** 2 / 4) * d0))


def recurrence_residual(a, z, h=FD_STEP):
    """|D_a'(z) + (z/2) D_a(z) - a D_{a-1}(z)|, derivative by central difference.

    Returns (absolute residual, largest term magnitude)."""
    a = complex(a)
    z = complex(z)
    with mp.workprec(128):
        deriv = (_pcf_mp(a, z + h) - _pcf_mp(a, z - h)) / (2 * mp.mpf(h))
        t2 = mp.mpc(z) / 2 * _pcf_mp(a, z)
        t3 = mp.mpc(a) * _pcf_mp(a - 1, z, check=False)
        res = deriv + t2 - t3
        return float(abs(res)), float(max(abs(deriv), abs(t2), abs(t3)))


def connection_residual(a, z):
    """D_a(z) minus its expansion in D_{-a-1}(iz) and D_{-a-1}(-iz).

    Returns (absolute residual, largest term magnitude) so callers can
    judge it relative to the cancellation involved. Orders -a-1 may leave
    the public box by one unit; they are evaluated anyway.
    """
    a = complex(a)
    z = complex(z)
    _check_box(a, z)
    g = np.exp(ln_gamma(1 + a)) / math.sqrt(2 * math.pi)
    t1 = g * np.exp(0.5j * math.pi * a) * complex(_pcf_mp(-a - 1, 1j * z, check=False))
    t2 = g * np.exp(-0.5j * math.pi * a) * complex(_pcf_mp(-a - 1, -1j * z, check=False))
    lhs = pcf_d(a, z)
    return abs(lhs - t1 - t2), max(abs(lhs), abs(t1), abs(t2))
