"""Batch pipeline: scatter -> asym -> evolve -> compare.

Every command reads one JSON config, writes into the output directory with
atomic renames, and returns a process exit code (0 ok, 2 invalid input or
refused request, 3 numerical accuracy not met). Artifacts never contain
timings or other run-dependent values, so repeated runs are byte-identical.
"""
from __future__ import annotations

import copy
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asy
from .errors import (AccuracyError, DomainError, ManakovError, NonGenericDataError,
                     ProfileError, RangeError, ResolutionError, StabilityError)
from .evolve import (SolverResolution, dispersive_tail_run, load_snapshot_csv,
                     required_half_width, soliton)
from .scattering import InitialProfile, ScatteringData, _atomic_write, assemble_lax, scattering_grid

log = logging.getLogger("manakov_asym")

EXIT_OK, EXIT_INVALID, EXIT_ACCURACY = 0, 2, 3
DEFECT_LIMIT = 1e-6
MASS_DRIFT_LIMIT = 1e-10

DEFAULTS = {
    "profile": {"kind": "sech", "amplitudes": [[0.2, 0.0], [0.15, 0.0], [0.1, 0.0]],
                "width": 1.0, "center": 0.0, "support_cutoff": 20.0, "csv": None},
    "lambda_grid": {"min": -4.0, "max": 4.0, "n": 257, "x_step": 0.01},
    "cone_c": 1.0,
    "t_list": [50.0, 100.0, 200.0, 400.0],
    "solver": {"n_points": 8192, "half_width": None, "dt": 2e-3, "margin": 40.0},
    "asym": {"t": 100.0, "n_x": 401},
    "output_dir": "out",
    "phase_convention": "auto",
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    doc: dict
    base_dir: str = "."

    @classmethod
    def load(cls, path, out_dir=None, phase_convention=None):
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ProfileError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(user, os.path.dirname(os.path.abspath(path)), out_dir, phase_convention)

    @classmethod
    def from_dict(cls, user, base_dir=".", out_dir=None, phase_convention=None):
        doc = _merge(DEFAULTS, user)
        if out_dir is not None:
            doc["output_dir"] = out_dir
        if phase_convention is not None:
            doc["phase_convention"] = phase_convention
        cfg = cls(doc, base_dir)
        cfg.validate()
        return cfg

    def validate(self):
        d = self.doc
        if d["phase_convention"] not in ("theorem", "eta2", "auto"):
            raise ProfileError(f"phase_convention must be theorem, eta2 or auto, got {d['phase_convention']!r}")
        c = float(d["cone_c"])
        if not c > 0:
            raise ProfileError("cone_c must be positive")
        lg = d["lambda_grid"]
        # lambda0 = -x/2t spans [-C/2, C/2]; chi~ also needs [lambda0 - 1, lambda0]
        if lg["min"] > -c / 2 - 1 or lg["max"] < c / 2:
            raise RangeError(
                f"lambda grid [{lg['min']:g}, {lg['max']:g}] does not cover "
                f"[{-c / 2 - 1:g}, {c / 2:g}] needed for cone C = {c:g}")
        ts = [float(t) for t in d["t_list"]]
        if not ts or min(ts) <= 0:
            raise ProfileError("t_list must hold positive times")

    @property
    def out(self):
        path = self.doc["output_dir"]
        return path if os.path.isabs(path) else os.path.abspath(path)

    @property
    def cone_c(self):
        return float(self.doc["cone_c"])

    @property
    def t_list(self):
        return sorted(float(t) for t in self.doc["t_list"])

    def profile(self) -> InitialProfile:
        p = self.doc["profile"]
        if p.get("csv"):
            path = p["csv"] if os.path.isabs(p["csv"]) else os.path.join(self.base_dir, p["csv"])
            return InitialProfile.from_csv(path, float(p.get("support_cutoff", 20.0)))
        return InitialProfile(p["kind"], p["amplitudes"], float(p["width"]), float(p["center"]),
                              support_cutoff=float(p["support_cutoff"]))

    def resolution(self) -> SolverResolution:
        s = self.doc["solver"]
        hw = s.get("half_width")
        return SolverResolution(int(s["n_points"]), None if hw is None else float(hw),
                                float(s["dt"]), float(s["margin"]))

    def materialized(self):
        d = copy.deepcopy(self.doc)
        d["output_dir"] = None  # keep artifacts independent of where they were written
        res = self.resolution()
        d["solver"]["half_width"] = (res.half_width if res.half_width is not None
                                     else required_half_width(max(self.t_list), self.cone_c, res.margin))
        return d


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def _tag(t):
    return f"{t:g}".replace(".", "p")


def _prepare(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    _atomic_write(os.path.join(cfg.out, "config.json"), _dump(cfg.materialized()))


def scattering_path(cfg):
    return os.path.join(cfg.out, "scattering.json")


def snapshot_paths(cfg, t):
    return (os.path.join(cfg.out, f"snapshot_t{_tag(t)}.csv"),
            os.path.join(cfg.out, f"snapshot_t{_tag(t)}.json"))


def cmd_scatter(cfg: RunConfig) -> int:
    _prepare(cfg)
    profile = cfg.profile()
    lg = cfg.doc["lambda_grid"]
    try:
        data = scattering_grid(assemble_lax(profile), float(lg["min"]), float(lg["max"]),
                               int(lg["n"]), float(lg["x_step"]))
    except NonGenericDataError as exc:
        log.error("%s (min |det a| = %.3e); refusing non-generic data", exc, exc.abs_det)
        return EXIT_INVALID
    data.save(scattering_path(cfg))
    det_max = float(data.det_s_defect.max())
    uni_max = float(data.unitarity_defect.max())
    print(f"scatter: {data.lambda_grid.size} nodes on [{data.lambda_min:g}, {data.lambda_max:g}]  "
          f"max|det s - 1| = {det_max:.2e}  max||s^+ s - I|| = {uni_max:.2e}  "
          f"min|det a| = {data.min_abs_det_a:.4f}  tail = {data.tail_bound:.1e}")
    if det_max > DEFECT_LIMIT or uni_max > DEFECT_LIMIT:
        log.error("symmetry defects exceed %.0e; refine lambda_grid.x_step", DEFECT_LIMIT)
        return EXIT_ACCURACY
    return EXIT_OK


def _load_scattering(cfg, path=None):
    path = path or scattering_path(cfg)
    if not os.path.exists(path):
        raise DomainError(f"{path} not found; run 'scatter' first")
    data = ScatteringData.load(path)
    fp = cfg.profile().fingerprint()
    if data.profile_fingerprint != fp:
        raise DomainError(
            f"fingerprint mismatch: {path} has {data.profile_fingerprint}, config profile is {fp}")
    return data


def cmd_asym(cfg: RunConfig, scattering_file=None, t=None, x_min=None, x_max=None, n_x=None) -> int:
    _prepare(cfg)
    data = _load_scattering(cfg, scattering_file)
    a = cfg.doc["asym"]
    t = float(a["t"] if t is None else t)
    c = cfg.cone_c
    x_min = -c * t if x_min is None else float(x_min)
    x_max = c * t if x_max is None else float(x_max)
    n_x = int(a["n_x"] if n_x is None else n_x)
    conv = cfg.doc["phase_convention"]
    conv = "theorem" if conv == "auto" else conv
    x = np.linspace(x_min, x_max, n_x)
    field = asy.asym_field(data, x, t, c, conv)
    path = os.path.join(cfg.out, f"asym_t{_tag(t)}.csv")
    field.save(path)
    print(f"asym: t = {t:g}, {int(field.in_cone.sum())}/{n_x} points in cone, convention {conv} -> {path}")
    return EXIT_OK


def _soliton_reference(profile: InitialProfile):
    """(amplitude, polarization) when the sech profile is an exact one-soliton."""
    if profile.kind != "sech":
        return None
    c = np.array(profile.amplitudes)
    norm = float(np.linalg.norm(c))
    if norm == 0 or abs(norm * profile.width - 1) > 1e-12:
        return None
    return 1.0 / profile.width, c / norm


def cmd_evolve(cfg: RunConfig) -> int:
    _prepare(cfg)
    profile = cfg.profile()
    res = cfg.resolution()
    snaps = dispersive_tail_run(profile, cfg.t_list, cfg.cone_c, res)
    ref = _soliton_reference(profile)
    status = EXIT_OK
    for snap in snaps:
        st = snap.state
        if ref is not None:
            amp, pol = ref
            exact = soliton(st.x, st.t, amp, pol, x0=profile.center)
            snap.meta["soliton_l2_error"] = float(np.sqrt(np.sum(np.abs(st.q - exact) ** 2) * st.dx))
        drift = max(snap.meta["mass_drift_rel"])
        if drift > MASS_DRIFT_LIMIT:
            log.error("t = %g: relative mass drift %.2e exceeds %.0e", st.t, drift, MASS_DRIFT_LIMIT)
            status = EXIT_ACCURACY
        csv_path, meta_path = snapshot_paths(cfg, st.t)
        snap.save(csv_path, meta_path)
        extra = (f"  soliton L2 error {snap.meta['soliton_l2_error']:.2e}"
                 if "soliton_l2_error" in snap.meta else "")
        print(f"evolve: t = {st.t:g}  mass drift {drift:.1e}  outer |q| {snap.contamination:.1e}{extra}")
    return status


def _fit_decay(ts, errs):
    ts, errs = np.asarray(ts), np.asarray(errs)
    if np.any(errs <= 0) or ts.size < 2:
        return {"p": None, "log_c": None, "residual": None, "degenerate": True}
    A = np.vstack([np.ones_like(ts), -np.log(ts)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(errs), rcond=None)
    resid = np.log(errs) - A @ coef
    return {"p": float(coef[1]), "log_c": float(coef[0]),
            "residual": float(np.sqrt(np.mean(resid ** 2))), "degenerate": False}


def compare_snapshot(data: ScatteringData, x, t, q_num, cone_c):
    """Cone errors and phase discrepancies of one snapshot against both conventions."""
    inside = np.abs(x / t) <= cone_c
    xs = x[inside]
    qn = q_num[:, inside].T
    forms = {"theorem": np.zeros_like(qn), "eta2": np.zeros_like(qn)}
    nus = np.zeros(xs.size)
    for i, xi in enumerate(xs):
        p = asy.asymptotic_params(data, xi, t, cone_c)
        nus[i] = p.nu
        forms["theorem"][i] = asy._theorem_form(p)
        forms["eta2"][i] = asy._eta2_form(p)
    nu_max = float(np.max(-nus)) if xs.size else 0.0
    out = {"t": t, "n_cone": int(xs.size), "max_minus_nu": nu_max}
    for name, qa in forms.items():
        diff = np.linalg.norm(qn - qa, axis=1)
        e_abs = float(diff.max()) if xs.size else 0.0
        e_rel = e_abs * math.sqrt(2 * t / nu_max) if nu_max > 0 else 0.0
        inner = np.sum(qn * np.conj(qa), axis=1)
        phase = np.abs(np.angle(inner))
        out[name] = {"e_abs": e_abs, "e_rel": e_rel,
                     "mean_phase_discrepancy": float(phase.mean()) if xs.size else 0.0,
                     "max_phase_discrepancy": float(phase.max()) if xs.size else 0.0}
    return out


def cmd_compare(cfg: RunConfig) -> int:
    _prepare(cfg)
    data = _load_scattering(cfg)
    fp = data.profile_fingerprint
    rows = []
    for t in cfg.t_list:
        csv_path, meta_path = snapshot_paths(cfg, t)
        if not (os.path.exists(csv_path) and os.path.exists(meta_path)):
            raise DomainError(f"snapshot for t = {t:g} missing; run 'evolve' first")
        with open(meta_path) as fh:
            meta = json.load(fh)
        if meta.get("profile_fingerprint") != fp:
            raise DomainError(
                f"fingerprint mismatch: {meta_path} has {meta.get('profile_fingerprint')}, "
                f"scattering data has {fp}")
        x, ts, q = load_snapshot_csv(csv_path)
        rows.append(compare_snapshot(data, x, t, q, cfg.cone_c))
        a = asy.phase_convention_audit(data, 0.0, t, cfg.cone_c)
        rows[-1]["audit_x0"] = {"modulus_ratio_eta2_over_theorem":
                                    a.modulus_ratio if math.isfinite(a.modulus_ratio) else None,
                                "phase_offset": a.phase_offset,
                                "predicted_offset_2nu_log4t": a.predicted_offset,
                                "real_chi_modulus_gap": a.modulus_gap_real_part}
        r = rows[-1]
        print(f"compare: t = {t:g}  E_abs theorem {r['theorem']['e_abs']:.3e}  eta2 {r['eta2']['e_abs']:.3e}  "
              f"phase theorem {r['theorem']['mean_phase_discrepancy']:.3f}  "
              f"eta2 {r['eta2']['mean_phase_discrepancy']:.3f}")
    ts = [r["t"] for r in rows]
    summary = {}
    for name in asy.CONVENTIONS:
        errs = [r[name]["e_abs"] for r in rows]
        summary[name] = {
            "e_abs": errs,
            "e_rel": [r[name]["e_rel"] for r in rows],
            "mean_phase_discrepancy": [r[name]["mean_phase_discrepancy"] for r in rows],
            "strictly_decreasing": bool(all(b < a for a, b in zip(errs, errs[1:]))),
            "fit": _fit_decay(ts, errs),
        }
    requested = cfg.doc["phase_convention"]
    last = rows[-1]
    auto_pick = min(asy.CONVENTIONS, key=lambda n: last[n]["mean_phase_discrepancy"])
    chosen = auto_pick if requested == "auto" else requested
    report = {
        "profile_fingerprint": fp,
        "cone_c": cfg.cone_c,
        "t_list": ts,
        "per_t": rows,
        "conventions": summary,
        "phase_convention_requested": requested,
        "phase_convention_auto": auto_pick,
        "phase_convention": chosen,
        "selected": summary[chosen],
    }
    _atomic_write(os.path.join(cfg.out, "compare.json"), _dump(report))
    fit = summary[chosen]["fit"]
    p_txt = "degenerate" if fit["degenerate"] else f"{fit['p']:.3f}"
    print(f"compare: convention {chosen} (auto pick {auto_pick}); p = {p_txt}; "
          f"E_rel(t_max) = {summary[chosen]['e_rel'][-1]:.3f}")
    return EXIT_OK


COMMANDS = {"scatter": cmd_scatter, "asym": cmd_asym, "evolve": cmd_evolve, "compare": cmd_compare}


def run(verb, cfg, **kw) -> int:
    """Run one command, mapping errors onto exit codes."""
    try:
        return COMMANDS[verb](cfg, **kw)
    except (AccuracyError, StabilityError, ResolutionError) as exc:
        log.error("%s: %s", verb, exc)
        return EXIT_ACCURACY
    except (ManakovError, ValueError, OSError) as exc:
        log.error("%s: %s", verb, exc)
        return EXIT_INVALID
