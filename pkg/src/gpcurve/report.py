"""Aggregated run report: every checked invariant with pass/fail and the measured constants."""

import os

import numpy as np

from . import pipeline as pl
from .artifacts import ensure_dir, tagged, write_json
from .errors import GpcurveError
from .stability import check_gap_epsilon, lambda_star


def _inv(passed, value, limit, units="1", origin="measured"):
    return {"pass": bool(passed), "measured": tagged(value, units, origin), "limit": limit}


def build_report(scenario, out, lambda0=None, figures=True):
    ensure_dir(out)
    prof_dir = os.path.join(out, "profile")
    prof_summary = pl.run_profile(prof_dir, scenario.numerics.get("x_max", 20.0), scenario.numerics.get("n_x", 4001))
    prof = pl.scenario_profile(scenario)
    k = prof.constants
    inv = {}
    inv["profile_peak"] = _inv(abs(prof.U[prof.x.size // 2] - np.sqrt(2.0)) < 1e-6, float(prof.U[prof.x.size // 2]), "sqrt(2) +- 1e-6")
    inv["profile_mass"] = _inv(abs(k.rho0 - 4.0) < 1e-6, k.rho0, "4 +- 1e-6")
    inv["profile_gradient"] = _inv(abs(k.rho1 - 4.0 / 3.0) < 1e-6, k.rho1, "4/3 +- 1e-6")
    inv["lambda0_printed_value_flagged"] = _inv(not prof_summary["lambda0"]["printed_value_consistent"], prof.lambda0, "printed 4 differs from computed")
    res = prof.basis.residuals()
    inv["correction_residuals"] = _inv(max(res.values()) < 1e-8, max(res.values()), "< 1e-8")
    par = prof.basis.parity()
    inv["correction_parity"] = _inv(max(a for _, a in par.values()) < 1e-9, max(a for _, a in par.values()), "< 1e-9")

    geo_summary = pl.run_geometry(scenario, os.path.join(out, "geometry"))
    inv["turning_number"] = _inv(abs(geo_summary["turning"]["value"] - 2 * np.pi) < 1e-6, geo_summary["turning"]["value"], "2 pi +- 1e-6", "rad")
    spec, spec_summary = pl.run_spectrum(scenario, os.path.join(out, "spectrum"))
    inv["nondegeneracy"] = _inv(spec_summary["nondegenerate"], spec.d_epsilon, "d_eps >= C2 eps^alpha", "1/length^2")
    g = scenario.geometry()
    gap = check_gap_epsilon(scenario.epsilon, g.ell_tilde, lambda_star(pl.effective_lambda0(prof, lambda0)), scenario.gap_c)
    inv["gap_epsilon"] = _inv(gap.passed, gap.margin, ">= 0")

    figs = []
    try:
        result, cons = pl.run_construct(scenario, os.path.join(out, "construct"), lambda0, figures)
        red = cons["reduced"]
        inv["reduced_residual"] = _inv(max(red["residual_f"], red["residual_e"]) < 1e-8, max(red["residual_f"], red["residual_e"]), "< 1e-8")
        inv["reduced_contraction"] = _inv(red["contraction"] < 0.5, red["contraction"], "< 1/2")
        for name, b in red["budgets"].items():
            inv["budget_" + name] = _inv(b["value"] <= b["limit"], b["value"], "<= %.3e" % b["limit"])
        ver = pl.run_verify(os.path.join(out, "construct", "field.csv"), scenario, os.path.join(out, "construct"), lambda0)
        inv["appendix_a"] = _inv(ver["appendix_a_ratio"]["value"] <= ver["appendix_a_bound"]["value"], ver["appendix_a_ratio"]["value"], "<= 1 + eps/(2 pi ell_tilde)")
        inv["orthogonality"] = _inv(ver["phi_orthogonality"]["value"] < 1e-9, ver["phi_orthogonality"]["value"], "< 1e-9")
        if isinstance(ver["pohozaev"], dict):
            worst = max(ver["pohozaev"][k_]["value"] for k_ in ("identity1", "identity2", "identity3"))
            inv["pohozaev_construct"] = _inv(worst < 1e-5, worst, "< 1e-5", "length")
        construct_ok = True
    except GpcurveError as exc:
        inv["construct"] = {"pass": False, "error": type(exc).__name__, "message": str(exc)}
        construct_ok = False

    if getattr(scenario.potential, "radial", False) and type(scenario.curve).__name__ == "Circle":
        try:
            radial, fld, cmp = pl.oracle_compare(scenario, os.path.join(out, "oracle"))
            inv["oracle_residual"] = _inv(cmp["radial_residual"] < 1e-9, cmp["radial_residual"], "< 1e-9")
            inv["oracle_profile_ratio"] = _inv(abs(cmp["profile_ratio"] - 1.0) < 0.05, cmp["profile_ratio"], "1 +- 0.05")
            worst = max(cmp["pohozaev"][k_] for k_ in ("identity1", "identity2", "identity3"))
            inv["oracle_pohozaev"] = _inv(worst < 1e-5, worst, "< 1e-5", "length")
            if figures:
                from .plots import oracle_figure

                st = fld.strip
                r = st.geometry.curve.radius + st.epsilon * st.x / st.beta[0]
                figs.append(oracle_figure(radial, r, st.beta[0] * fld.w2[:, 0], os.path.join(out, "oracle")))
        except GpcurveError as exc:
            inv["oracle"] = {"pass": False, "error": type(exc).__name__, "message": str(exc)}

    if figures:
        from . import plots

        figs.append(plots.profile_figure(prof, prof.basis, prof_dir))
        figs.append(plots.spectrum_figure(spec, os.path.join(out, "spectrum")))
        if construct_ok:
            figs += [os.path.join(out, "construct", n) for n in ("modulation.png", "field.png")]

    report = {
        "scenario": scenario.config,
        "invariants": inv,
        "constants": {name: tagged(v, "1") for name, v in k.as_dict().items() if name != "extra"},
        "figures": sorted(os.path.relpath(f_, out) for f_ in figs),
    }
    write_json(os.path.join(out, "report.json"), report)
    return report
