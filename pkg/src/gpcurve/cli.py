"""Command line entry point `gpcurve`.

Exit codes: 0 success, 1 configuration error, 2 non-convergence, 3 resonance, degeneracy or
non-stationarity, 4 artifact I/O.
"""

import argparse
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _cap_threads():
    n = os.environ.get("GPCURVE_THREADS")
    if n:
        for var in _THREAD_VARS:
            os.environ.setdefault(var, n)


_cap_threads()

from .errors import ConfigError, GpcurveError  # noqa: E402


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _scenario(args):
    from .scenario import build_scenario, load_config

    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = load_config(args.config)
    if getattr(args, "epsilon", None) is not None:
        cfg["epsilon"] = args.epsilon
    return build_scenario(cfg)


def cmd_profile(args):
    from .pipeline import run_profile

    s = run_profile(args.out, args.xmax, args.n)
    if args.figures:
        from .pipeline import get_profile
        from .plots import profile_figure

        p = get_profile(args.xmax, args.n)
        profile_figure(p, p.basis, args.out)
    print("rho0 = %.10f, lambda0 = %.10f" % (s["constants"]["rho0"]["value"], s["lambda0"]["computed"]["value"]))


def cmd_spectrum(args):
    from .pipeline import run_spectrum

    spec, s = run_spectrum(_scenario(args), args.out)
    if args.figures:
        from .plots import spectrum_figure

        spectrum_figure(spec, args.out)
    print("d_epsilon = %.6e" % s["d_epsilon"]["value"])


def cmd_geometry(args):
    from .pipeline import run_geometry

    s = run_geometry(_scenario(args), args.out)
    print("ell_tilde = %.10f" % s["ell_tilde"]["value"])


def cmd_stationary(args):
    from .pipeline import run_stationary_search

    s = run_stationary_search(_scenario(args), args.out, args.r_min, args.r_max)
    print("stationary radii: %s" % ", ".join("%.8f" % r["radius"]["value"] for r in s["roots"]))


def cmd_gap_scan(args):
    from .pipeline import parse_range, run_gap_scan

    arr = run_gap_scan(_scenario(args), args.out, parse_range(args.eps_range), args.lambda0_override, args.figures)
    print("%d of %d epsilon values pass" % (int(arr[:, 1].sum()), arr.shape[0]))


def cmd_construct(args):
    from .pipeline import run_construct

    _, s = run_construct(_scenario(args), args.out, args.lambda0_override, args.figures)
    red = s["reduced"]
    print("converged in %d sweeps, residuals %.2e / %.2e" % (red["iterations"], red["residual_f"], red["residual_e"]))


def cmd_verify(args):
    from .pipeline import run_verify

    if not args.field:
        raise ConfigError("--field is required")
    r = run_verify(args.field, _scenario(args), args.out, args.lambda0_override)
    print("max |S| in window = %.3e" % r["S_max_window"]["value"])


def cmd_oracle(args):
    from .pipeline import oracle_compare

    radial, fld, cmp = oracle_compare(_scenario(args), args.out, args.with_reduced, args.lambda0_override)
    if args.figures:
        from .plots import oracle_figure

        st = fld.strip
        r = st.geometry.curve.radius + st.epsilon * (st.x + fld.modulation.f[0]) / st.beta[0]
        oracle_figure(radial, r, st.beta[0] * fld.w2[:, 0], args.out)
    print("sup difference %.3e, profile ratio %.6f" % (cmp["sup_difference"], cmp["profile_ratio"]))


def cmd_mass_fit(args):
    from .pipeline import run_mass_fit

    fit, _ = run_mass_fit(_scenario(args), args.out, args.a, args.lambda0_override)
    print("epsilon = %.12f%s" % (fit.epsilon, " (shifted off a forbidden band)" if fit.shifted else ""))


def cmd_report(args):
    from .report import build_report

    rep = build_report(_scenario(args), args.out, args.lambda0_override, figures=not args.no_figures)
    failed = [k for k, v in rep["invariants"].items() if not v["pass"]]
    print("%d invariants, %d failed%s" % (len(rep["invariants"]), len(failed), (": " + ", ".join(failed)) if failed else ""))


def build_parser():
    p = _Parser(prog="gpcurve", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, config=True):
        sp = sub.add_parser(name)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", default="run")
        sp.add_argument("--lambda0-override", type=float, default=None, dest="lambda0_override")
        sp.add_argument("--figures", action="store_true")
        if config:
            sp.add_argument("--config")
            sp.add_argument("--epsilon", type=float, default=None)
        return sp

    sp = add("profile", cmd_profile, config=False)
    sp.add_argument("--xmax", type=float, default=20.0)
    sp.add_argument("--n", type=int, default=4001)
    add("spectrum", cmd_spectrum)
    add("geometry", cmd_geometry)
    sp = add("stationary-search", cmd_stationary)
    sp.add_argument("--r-min", type=float, default=0.05, dest="r_min")
    sp.add_argument("--r-max", type=float, default=50.0, dest="r_max")
    sp = add("gap-scan", cmd_gap_scan)
    sp.add_argument("--eps-range", default="0.01:0.1:200", dest="eps_range")
    add("construct", cmd_construct)
    sp = add("verify", cmd_verify)
    sp.add_argument("--field")
    sp = add("oracle-compare", cmd_oracle)
    sp.add_argument("--with-reduced", action="store_true", dest="with_reduced")
    sp = add("mass-fit", cmd_mass_fit)
    sp.add_argument("--a", type=float, default=None)
    sp = add("report", cmd_report)
    sp.add_argument("--no-figures", action="store_true", dest="no_figures")
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "command", None):
            raise ConfigError("a subcommand is required")
        args.fn(args)
    except GpcurveError as exc:
        print("gpcurve: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
