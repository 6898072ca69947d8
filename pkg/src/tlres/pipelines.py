"""Command pipelines behind the CLI.

Each ``run_*`` takes a validated config and returns a :class:`JobResult`;
the CLI wraps it in the result envelope. Relative paths in a config are
resolved against ``base_dir``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .calibrate import ModeMeasurement, calibrate_loss, calibrate_reactance, discriminate_parasitics
from .circlefit import fit_notch
from .exceptions import DomainError
from .loss import qi_forward, tan_delta_single_mode
from .netsynth import ComplexTrace, HangerNetwork, coupling_for_pull, notch_frequency, synth_s21
from .resonance import (
    design_load_for_max_p,
    load_from_solution,
    max_participation_point,
    participation,
    phase_parameter,
    solve_resonance,
)
from .stats import (
    fit_lognormal,
    kappa_fit,
    monte_carlo_reactance,
    monte_carlo_tan_delta,
    reactance_value_uncertainty,
    single_mode_tand_distribution,
    standard_normals,
    tan_delta_uncertainty,
)
from .txline import AttenuationModel, LineSpec, LoadKind, LoadModel


@dataclass
class JobResult:
    outputs: dict
    tables: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


def _line(cfg):
    atten = None
    if "q_open_ref" in cfg:
        atten = AttenuationModel(cfg["q_open_ref"], cfg.get("exponent_s", 1.0))
    return LineSpec(cfg["z0_ohm"], cfg["f_open_hz"], atten)


def _load(cfg):
    td = cfg.get("tan_delta", 0.0)
    if "c_farad" in cfg and "l_henry" in cfg:
        return LoadModel.series([("inductor", cfg["l_henry"]), ("capacitor", cfg["c_farad"])], td)
    if "c_farad" in cfg:
        return LoadModel.capacitor(cfg["c_farad"], td)
    return LoadModel.inductor(cfg["l_henry"], td)


def _value_key(kind):
    return "c_farad" if LoadKind.parse(kind) is LoadKind.CAPACITOR else "l_henry"


def _lognormal_samples(spec, seed):
    z = standard_normals(seed, spec["n"])
    return spec["median"] * np.exp(spec["sigma_log"] * z)


def run_solve(cfg, seed=0, base_dir=Path(".")):
    line = _line(cfg["line"])
    modes = cfg.get("modes", [1, 2])
    rows = []
    out = {"modes": {}}
    for lc in cfg.get("loads", []):
        load = _load(lc)
        per = {}
        for n in modes:
            sol = solve_resonance(load, line, n)
            per[str(n)] = {
                "f_r_hz": sol.f_r,
                "f_r_over_f_open": sol.f_r / line.f_open,
                "x_ohm": sol.x_at_resonance,
                "phi": sol.phi,
                "participation": sol.participation,
            }
            rows.append({"name": lc["name"], "mode_n": n, **per[str(n)]})
        out["modes"][lc["name"]] = per
    tables = {"modes": (rows, ["name", "mode_n", "f_r_hz", "f_r_over_f_open", "x_ohm", "phi", "participation"])}

    if "sweep" in cfg:
        sw = cfg["sweep"]
        ratios = np.geomspace(sw["x_over_z0_min"], sw["x_over_z0_max"], sw["points"])
        srows = []
        for kind in sw.get("kinds", ["capacitor", "inductor"]):
            sign = -1.0 if kind == "capacitor" else 1.0
            for n in sw.get("modes", [1, 2]):
                if kind == "capacitor" and n == 0:
                    continue
                for r in ratios:
                    u = math.atan(sign / r) / math.pi + n
                    srows.append({
                        "kind": kind,
                        "mode_n": n,
                        "x_over_z0": float(r),
                        "f_r_over_f_open": u,
                        "participation": participation(2 * math.pi * u) if u > 0 else 0.5,
                    })
        tables["sweep"] = (srows, ["kind", "mode_n", "x_over_z0", "f_r_over_f_open", "participation"])
        out["sweep_rows"] = len(srows)

    if "design" in cfg:
        d = cfg["design"]
        designs = {}
        for kind in d.get("kinds", ["capacitor"]):
            for n in d.get("modes", [1]):
                mp = max_participation_point(n, kind)
                entry = {"phi_star": mp.phi_star, "p_max": mp.p_max, "attained": mp.attained}
                if mp.attained:
                    dp = design_load_for_max_p(line, n, kind)
                    entry[_value_key(kind)] = dp.load.value
                    entry["rule_of_thumb_" + _value_key(kind)] = dp.rule_of_thumb_load.value
                    entry["rule_of_thumb_p"] = dp.rule_of_thumb_p
                designs[f"{kind}_n{n}"] = entry
        out["design"] = designs
    return JobResult(out, tables)


def _device_modes(dev, base_dir):
    if "mode_table_csv" in dev:
        return io.read_mode_table(base_dir / dev["mode_table_csv"])
    return [
        ModeMeasurement(m["mode_n"], m["f_r_hz"], m.get("q_i"), m.get("f_r_sigma_hz"), m.get("q_i_sigma"))
        for m in dev["modes"]
    ]


def run_calibrate(cfg, seed=0, base_dir=Path(".")):
    z0 = cfg.get("z0_ohm", 50.0)
    kind = cfg.get("kind", "capacitor")
    key = _value_key(kind)
    s = cfg.get("exponent_s", 1.0)
    ref_f_open = cfg.get("reference_f_open_hz")
    out = {"devices": {}}
    rows, flags = [], []
    multi_pts, single_pts = [], []
    for dev in cfg["devices"]:
        modes = _device_modes(dev, base_dir)
        if len(modes) < 2:
            raise DomainError(f"device {dev['name']}: multimode calibration needs at least two modes")
        kw = {"f_r_rel_sigma": cfg["f_r_rel_sigma"]} if "f_r_rel_sigma" in cfg else {}
        rc = calibrate_reactance(modes, z0=z0, kind=kind, **kw)
        d = {
            "f_open_hz": rc.f_open,
            "sigma_f_open_hz": rc.sigma_f_open,
            key: rc.load_value,
            "sigma_" + key: rc.sigma_load_value,
            "frequency_residuals": list(rc.residuals),
            "modes": {},
        }
        for m in modes:
            phi = phase_parameter(m.f_r, rc.f_open)
            d["modes"][str(m.mode_n)] = {"f_r_hz": m.f_r, "phi": phi, "participation": participation(phi)}
        if all(m.q_i is not None for m in modes):
            lc = calibrate_loss(modes, rc, s=s)
            d.update({
                "tan_delta": lc.tan_delta,
                "sigma_tan_delta": lc.sigma_tan_delta,
                "q_open_ref": lc.q_open_ref,
                "loss_condition_number": lc.condition_number,
            })
            if lc.tan_delta < 0:
                flags.append(f"{dev['name']}:negative_tan_delta")
        if ref_f_open is not None:
            first = modes[0]
            single = load_from_solution(kind, first.f_r, ref_f_open, first.mode_n, z0)
            d["single_mode_" + key] = single.value
            if cfg.get("parasitics"):
                rep = discriminate_parasitics(modes, z0, ref_f_open)
                d["parasitics_at_reference"] = {
                    "best": rep.best,
                    "ambiguous": rep.ambiguous,
                    "fits": {k: {"params": v.params, "rss": v.rss, "physical": v.physical} for k, v in rep.fits.items()},
                }
        if cfg.get("parasitics"):
            rep = discriminate_parasitics(modes, z0, rc.f_open)
            d["parasitics"] = {"best": rep.best, "ambiguous": rep.ambiguous}
        if "area_m2" in dev and "thickness_m" in dev:
            sig = cfg.get("area_rel_sigma", 0.1)
            multi_pts.append((dev["area_m2"], dev["thickness_m"], rc.load_value, sig))
            if ref_f_open is not None:
                single_pts.append((dev["area_m2"], dev["thickness_m"], d["single_mode_" + key], sig))
        out["devices"][dev["name"]] = d
        rows.append({
            "name": dev["name"],
            "f_open_hz": rc.f_open,
            key: rc.load_value,
            "tan_delta": d.get("tan_delta", float("nan")),
            "q_open_ref": d.get("q_open_ref", float("nan")),
        })
    if multi_pts:
        kf = kappa_fit(multi_pts)
        out["kappa_multimode"] = {"kappa": kf.kappa, "sigma_kappa": kf.sigma_kappa}
    if single_pts:
        kf = kappa_fit(single_pts)
        out["kappa_single_mode"] = {"kappa": kf.kappa, "sigma_kappa": kf.sigma_kappa}
    tables = {"devices": (rows, ["name", "f_open_hz", key, "tan_delta", "q_open_ref"])}
    return JobResult(out, tables, flags=flags)


def run_extract(cfg, seed=0, base_dir=Path(".")):
    z0 = cfg.get("z0_ohm", 50.0)
    kind = cfg.get("kind", "capacitor")
    key = _value_key(kind)
    s = cfg.get("exponent_s", 1.0)
    ref = cfg["reference"]
    f_open = ref["f_open_hz"]
    samples = None
    if "q_open_samples" in ref:
        samples = np.asarray(ref["q_open_samples"], dtype=float)
    elif "q_open_lognormal" in ref:
        samples = _lognormal_samples(ref["q_open_lognormal"], seed)

    out = {"measurements": {}}
    flags = []
    modes = []
    for mc in cfg["measurements"]:
        name = mc["name"]
        m = {}
        f_r, q_i = mc.get("f_r_hz"), mc.get("q_i")
        if "trace_csv" in mc:
            fit = fit_notch(io.read_trace_csv(base_dir / mc["trace_csv"]))
            f_r = fit.f_r if f_r is None else f_r
            q_i = fit.q_internal if q_i is None else q_i
            m["circle_fit"] = {
                "f_r_hz": fit.f_r,
                "q_loaded": fit.q_loaded,
                "q_coupling_mag": fit.q_coupling_mag,
                "q_internal": fit.q_internal,
                "phi0": fit.impedance_mismatch_phi0,
                "delay_s": fit.delay_tau,
                "flags": list(fit.flags),
            }
            flags.extend(f"{name}:{f}" for f in fit.flags)
        load = load_from_solution(kind, f_r, f_open, mc["mode_n"], z0)
        phi = phase_parameter(f_r, f_open)
        p = participation(phi)
        m.update({"f_r_hz": f_r, key: load.value, "participation": p, "phi": phi})
        if "f_open_rel_sigma" in ref:
            m["rel_sigma_" + key] = reactance_value_uncertainty(p, ref["f_open_rel_sigma"])
        if q_i is not None:
            m["q_i"] = q_i
            if "q_open" in ref:
                m["tan_delta"] = tan_delta_single_mode(q_i, ref["q_open"], phi, s)
                if "q_open_rel_sigma" in ref:
                    m["rel_sigma_tan_delta"] = tan_delta_uncertainty(p, ref["q_open"], q_i, ref["q_open_rel_sigma"])
            if samples is not None:
                dist = single_mode_tand_distribution(q_i, phi, samples, s)
                m["tan_delta_distribution"] = {
                    "median": dist.median,
                    "iqr": list(dist.iqr),
                    "iqr_width": dist.iqr[1] - dist.iqr[0],
                    "fraction_negative": dist.fraction_negative,
                }
        out["measurements"][name] = m
        modes.append(ModeMeasurement(mc["mode_n"], f_r, q_i))

    if cfg.get("multimode_check") and len(modes) >= 2:
        rc = calibrate_reactance(modes, z0=z0, kind=kind)
        mm = {"f_open_hz": rc.f_open, key: rc.load_value}
        if all(m.q_i is not None for m in modes):
            lc = calibrate_loss(modes, rc, s=s)
            mm.update({"tan_delta": lc.tan_delta, "q_open_ref": lc.q_open_ref})
        out["multimode"] = mm
    return JobResult(out, flags=flags)


def run_oracle(cfg, seed=0, base_dir=Path(".")):
    line = _line(cfg["line"])
    if line.attenuation is None:
        raise DomainError("oracle needs line.q_open_ref")
    n = cfg.get("mode_n", 1)
    rel_pull = cfg.get("rel_pull", 5e-6)
    npts = cfg.get("points", 2001)
    lw = cfg.get("linewidths", 10.0)
    delay = cfg.get("delay_s", 0.0)
    snr_db = cfg.get("snr_db")
    q_tol = cfg.get("q_i_rel_tol", 0.01)
    f_tol = cfg.get("f_r_rel_tol", 1e-4)
    xr = cfg["x_over_z0"]
    ratios = np.geomspace(xr["min"], xr["max"], xr["points"])

    rows, flags, traces = [], [], {}
    worst_q = worst_f = max_s21 = 0.0
    k = 0
    for td in cfg["tan_deltas"]:
        for r in ratios:
            u = math.atan(-1.0 / r) / math.pi + n
            c = 1.0 / (2 * math.pi * u * line.f_open * r * line.z0)
            load = LoadModel.capacitor(c, td)
            sol = solve_resonance(load, line, n)
            q_pred = 1.0 / qi_forward(sol.phi, td, line.attenuation).q_i_inv
            cc = coupling_for_pull(line, load, rel_pull, n)
            net = HangerNetwork(line, cc, load)
            f_notch = notch_frequency(net, n)
            half = lw * sol.f_r / q_pred
            freqs = np.linspace(f_notch - half, f_notch + half, npts)
            trace = synth_s21(net, freqs)
            max_s21 = max(max_s21, float(np.max(np.abs(trace.s21))))
            z = trace.s21 * np.exp(-2j * np.pi * freqs * delay)
            if snr_db is not None:
                # noise relative to the unit background amplitude
                sigma = 10 ** (-snr_db / 20) / math.sqrt(2)
                g = np.random.default_rng([seed, k]).standard_normal(2 * npts)
                z = z + sigma * (g[:npts] + 1j * g[npts:])
            trace = ComplexTrace(freqs, z)
            fit = fit_notch(trace)
            eq = abs(fit.q_internal / q_pred - 1)
            ef = abs(fit.f_r / sol.f_r - 1)
            worst_q, worst_f = max(worst_q, eq), max(worst_f, ef)
            tag = f"td{td:.0e}_x{r:.4g}"
            if eq > q_tol or ef > f_tol:
                flags.append(f"{tag}:oracle_mismatch")
            flags.extend(f"{tag}:{f}" for f in fit.flags)
            rows.append({
                "tan_delta": float(td),
                "x_over_z0": float(r),
                "c_farad": c,
                "coupling_c_farad": cc,
                "participation": sol.participation,
                "f_r_analytic_hz": sol.f_r,
                "f_r_fit_hz": fit.f_r,
                "f_pull_rel": (f_notch - sol.f_r) / sol.f_r,
                "q_i_analytic": q_pred,
                "q_i_fit": fit.q_internal,
                "q_i_over_q_open_analytic": q_pred / line.attenuation.q_open_ref,
                "q_i_over_q_open_fit": fit.q_internal / line.attenuation.q_open_ref,
                "q_i_rel_error": eq,
                "f_r_rel_error": ef,
            })
            if cfg.get("write_traces"):
                traces[tag] = trace
            k += 1
    passive = max_s21 <= 1 + 1e-9
    if not passive:
        flags.append("passivity_violation")
    out = {
        "cases": len(rows),
        "worst_q_i_rel_error": worst_q,
        "worst_f_r_rel_error": worst_f,
        "max_abs_s21": max_s21,
        "passive": passive,
        "max_abs_pull_rel": max(abs(r["f_pull_rel"]) for r in rows),
    }
    cols = list(rows[0].keys())
    return JobResult(out, {"oracle": (rows, cols)}, traces, flags)


def run_stats(cfg, seed=0, base_dir=Path(".")):
    n_samples = cfg.get("n_samples", 100_000)
    workers = cfg.get("workers")
    tol = cfg.get("mc_rel_tol", 0.1)
    out, flags = {}, []
    if "monte_carlo" in cfg:
        mc_out = {}
        for i, spec in enumerate(cfg["monte_carlo"]):
            sub_seed = seed + i
            if spec["quantity"] == "reactance":
                rep = monte_carlo_reactance(
                    spec["kind"], spec["f_r_hz"], spec["f_open_hz"], spec["mode_n"], spec.get("z0_ohm", 50.0),
                    spec["rel_sigma_f_open"], n_samples=n_samples, seed=sub_seed, workers=workers,
                )
            else:
                phi = phase_parameter(spec["f_r_hz"], spec["f_open_hz"])
                rep = monte_carlo_tan_delta(
                    spec["q_i"], spec["q_open"], phi, spec["rel_sigma_q_open"], spec.get("exponent_s", 1.0),
                    n_samples=n_samples, seed=sub_seed, workers=workers,
                )
            agree = abs(rep.ratio - 1) <= tol
            mc_out[spec["name"]] = {
                "analytic_relative_sigma": rep.analytic_relative_sigma,
                "monte_carlo_relative_sigma": rep.monte_carlo_relative_sigma,
                "monte_carlo_relative_std": rep.monte_carlo_relative_std,
                "ratio": rep.ratio,
                "agree": agree,
                "divergent": rep.divergent,
                "seed": sub_seed,
            }
            if not agree:
                flags.append(f"{spec['name']}:mc_disagreement")
            if rep.divergent:
                flags.append(f"{spec['name']}:near_divergence")
        out["monte_carlo"] = mc_out
    if "kappa" in cfg:
        out["kappa"] = {}
        for kc in cfg["kappa"]:
            sig = kc.get("area_rel_sigma", 0.1)
            kf = kappa_fit([(p["area_m2"], p["thickness_m"], p["c_farad"], sig) for p in kc["points"]])
            out["kappa"][kc["name"]] = {
                "kappa": kf.kappa,
                "sigma_kappa": kf.sigma_kappa,
                "sigma_kappa_unscaled": kf.sigma_kappa_unscaled,
            }
    if "lognormal" in cfg:
        ln = cfg["lognormal"]
        if "samples" in ln:
            data = np.asarray(ln["samples"], dtype=float)
        elif "synthetic" in ln:
            data = _lognormal_samples(ln["synthetic"], seed)
        else:
            raise DomainError("lognormal needs samples or synthetic")
        fit = fit_lognormal(data)
        out["lognormal"] = {"mu": fit.mu, "sigma": fit.sigma, "median": fit.median, "n": fit.n}
        if fit.degenerate:
            flags.append("lognormal:degenerate")
    return JobResult(out, flags=flags)


RUNNERS = {
    "solve": run_solve,
    "calibrate": run_calibrate,
    "extract": run_extract,
    "oracle": run_oracle,
    "stats": run_stats,
}
