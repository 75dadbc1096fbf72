"""Split-step Fourier solver for i q_t + q_xx/2 + |q|^2 q = 0 on a periodic box.

Strang splitting: half a nonlinear kick q -> q exp(i dt/2 |q|^2) (exact,
since the kick leaves every |q_j| unchanged), the exact linear flow
q^ -> q^ exp(-i dt k^2 / 2), and the second half kick. Consecutive half
kicks are merged inside ``evolve_to``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import FIELD_COLUMNS
from .errors import DomainError, InvalidInputError, StabilityError
from .numerics import fft, ifft
from .scattering import InitialProfile, _atomic_write

SPECTRAL_FLOOR = 1e-10
OUTER_FRACTION = 0.1


@dataclass
class FieldState:
    x: np.ndarray
    t: float
    q: np.ndarray  # (3, n)
    dt_last: float = 0.0

    @property
    def n(self):
        return self.x.size

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    @property
    def half_width(self):
        return -float(self.x[0])

    def copy(self):
        return FieldState(self.x.copy(), self.t, self.q.copy(), self.dt_last)


def periodic_grid(n_points: int, half_width: float):
    if n_points < 8 or n_points & (n_points - 1):
        raise InvalidInputError(f"n_points must be a power of two >= 8, got {n_points}")
    if not half_width > 0:
        raise InvalidInputError("half_width must be positive")
    return -half_width + 2 * half_width * np.arange(n_points) / n_points


def wavenumbers(x):
    n = x.size
    return 2 * np.pi * np.fft.fftfreq(n, d=float(x[1] - x[0]))


def initial_state(profile: InitialProfile, n_points: int, half_width: float) -> FieldState:
    x = periodic_grid(n_points, half_width)
    return FieldState(x, 0.0, profile.untruncated(x).T.copy())


def soliton(x, t, amplitude=1.0, polarization=(0.6, 0.8j, 0.0), velocity=0.0, x0=0.0):
    """Exact bright vector soliton with unit polarization vector."""
    c = np.asarray(polarization, dtype=complex)
    c = c / np.linalg.norm(c)
    A = amplitude
    xi = x - x0 - velocity * t
    env = A / np.cosh(A * xi) * np.exp(1j * (velocity * (x - x0) + 0.5 * (A * A - velocity ** 2) * t))
    return c[:, None] * env[None, :]


def resolved_bandwidth(q, x, floor=SPECTRAL_FLOOR):
    """Largest |k| whose spectral amplitude exceeds ``floor`` times the peak."""
    spec = np.max(np.abs(np.fft.fft(q, axis=-1)), axis=0)
    peak = spec.max()
    if peak == 0:
        return 0.0
    k = np.abs(wavenumbers(x))
    return float(k[spec > floor * peak].max())


def check_stability(state: FieldState, dt: float):
    """Phase increments per step must stay below pi, both in the nonlinear kick
    (dt max|q|^2) and in the linear flow over the resolved bandwidth
    (dt k_res^2 / 2); beyond that the splitting aliases phase."""
    if not (math.isfinite(dt) and dt != 0):
        raise StabilityError(f"time step must be finite and non-zero, got {dt}")
    if not np.all(np.isfinite(state.q)):
        raise StabilityError(f"field became non-finite at t = {state.t:g}")
    amp2 = float(np.max(np.sum(np.abs(state.q) ** 2, axis=0)))
    kres = resolved_bandwidth(state.q, state.x)
    if abs(dt) * amp2 > np.pi or abs(dt) * kres ** 2 / 2 > np.pi:
        raise StabilityError(
            f"dt = {dt:g} too large: dt*max|q|^2 = {abs(dt) * amp2:.3g}, "
            f"dt*k_res^2/2 = {abs(dt) * kres ** 2 / 2:.3g} (limit pi)")


def _kick(q, tau):
    return q * np.exp(1j * tau * np.sum(np.abs(q) ** 2, axis=0))[None, :]


def step_strang(state: FieldState, dt: float) -> FieldState:
    """One Strang step. A negative ``dt`` runs the step backwards exactly."""
    check_stability(state, dt)
    k2 = wavenumbers(state.x) ** 2
    q = _kick(state.q, dt / 2)
    q = ifft(fft(q) * np.exp(-0.5j * dt * k2)[None, :])
    q = _kick(q, dt / 2)
    return FieldState(state.x, state.t + dt, q, dt)


def evolve_to(state: FieldState, t_end: float, dt: float) -> FieldState:
    """Advance to ``t_end`` with steps of at most ``dt``; the last step is shortened
    so t_end is hit exactly."""
    span = t_end - state.t
    if span < 0:
        raise DomainError(f"t_end = {t_end:g} is before the current time {state.t:g}")
    if span == 0:
        return state.copy()
    nsteps = int(math.ceil(span / dt - 1e-9))
    h = span / nsteps
    check_stability(state, h)
    lin = np.exp(-0.5j * h * wavenumbers(state.x) ** 2)[None, :]
    q = _kick(state.q, h / 2)
    for i in range(nsteps):
        q = ifft(fft(q) * lin)
        q = _kick(q, h if i < nsteps - 1 else h / 2)
    out = FieldState(state.x, t_end, q, h)
    check_stability(out, h)
    return out


def conserved_quantities(state: FieldState) -> dict:
    """Per-component masses, total momentum and Hamiltonian (spectral derivatives)."""
    dx = state.dx
    q = state.q
    k = wavenumbers(state.x)
    qx = ifft(1j * k[None, :] * fft(q))
    mass = np.sum(np.abs(q) ** 2, axis=1) * dx
    momentum = float(np.sum(np.imag(np.conj(q) * qx)) * dx)
    rho = np.sum(np.abs(q) ** 2, axis=0)
    energy = float(np.sum(0.5 * np.sum(np.abs(qx) ** 2, axis=0) - 0.5 * rho ** 2) * dx)
    return {"mass": mass, "momentum": momentum, "energy": energy}


def outer_contamination(state: FieldState, fraction=OUTER_FRACTION) -> float:
    """max |q| over the outer ``fraction`` of the box on each side."""
    edge = state.half_width * (1 - 2 * fraction)
    outer = np.abs(state.x) >= edge
    return float(np.max(np.linalg.norm(state.q[:, outer], axis=0)))


@dataclass(frozen=True)
class SolverResolution:
    n_points: int = 8192
    half_width: float | None = None  # None: smallest box the precondition allows
    dt: float = 2e-3
    margin: float = 40.0


def required_half_width(t_max, cone_c, margin):
    return 2 * cone_c * t_max + margin


@dataclass
class Snapshot:
    state: FieldState
    contamination: float
    masses: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self):
        """Same columns as the asymptotic field; lambda0 and nu are left empty."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELD_COLUMNS)
        st = self.state
        in_cone = np.abs(st.x / st.t) <= self.meta.get("cone_c", 1.0) if st.t > 0 else st.x == 0
        tt = repr(float(st.t))
        for i in range(st.n):
            w.writerow([repr(float(st.x[i])), tt,
                        *(repr(float(v)) for j in range(3) for v in (st.q[j, i].real, st.q[j, i].imag)),
                        "", "", int(in_cone[i])])
        return buf.getvalue()

    def save(self, csv_path, meta_path):
        _atomic_write(csv_path, self.to_csv())
        _atomic_write(meta_path, json.dumps(self.meta, sort_keys=True, indent=1))


def load_snapshot_csv(path):
    """Read (x, t, q) back from a snapshot CSV; q has shape (3, n)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != FIELD_COLUMNS:
        raise InvalidInputError(f"{path}: not a field CSV")
    data = np.array([[float(v) for v in r[:8]] for r in rows[1:]]).reshape(-1, 8)
    q = (data[:, 2::2] + 1j * data[:, 3::2]).T.copy()
    t = float(data[0, 1]) if data.shape[0] else 0.0
    return data[:, 0], t, q


def dispersive_tail_run(profile: InitialProfile, t_list, cone_c: float = 1.0,
                        resolution: SolverResolution = SolverResolution()):
    """Evolve ``profile`` and return a Snapshot at each time in ``t_list``.

    Refuses (DomainError) a box smaller than 2 C max(T) + margin, before any
    stepping, since waves leaving the cone would wrap around the period.
    """
    t_list = sorted(float(t) for t in t_list)
    if not t_list or t_list[0] <= 0:
        raise DomainError("snapshot times must be positive")
    need = required_half_width(t_list[-1], cone_c, resolution.margin)
    half_width = resolution.half_width if resolution.half_width is not None else need
    if half_width < need:
        raise DomainError(
            f"box half-width {half_width:g} < 2*C*max(T) + margin = {need:g}; enlarge the box")
    state = initial_state(profile, resolution.n_points, half_width)
    m0 = conserved_quantities(state)["mass"]
    snaps = []
    for t in t_list:
        state = evolve_to(state, t, resolution.dt)
        cq = conserved_quantities(state)
        drift = np.abs(cq["mass"] - m0) / np.where(m0 > 0, m0, 1.0)
        meta = {
            "t": t, "n_points": resolution.n_points, "half_width": half_width,
            "dt": resolution.dt, "cone_c": cone_c,
            "mass": cq["mass"].tolist(), "mass_drift_rel": drift.tolist(),
            "energy": cq["energy"], "outer_contamination": outer_contamination(state),
            "profile_fingerprint": profile.fingerprint(),
        }
        snaps.append(Snapshot(state, meta["outer_contamination"], cq["mass"], meta))
    return snaps
