"""Command-line entry point.

Every experiment and verification is a subcommand with documented defaults.
Precedence: command-line flags override --config file values, which
override built-in defaults.  Config files are flat key=value records whose
keys must match option names (unknown keys are rejected).

Exit codes: 0 success, 1 validation/usage error, 2 acceptance-rule failure,
3 numerical nonconvergence.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .errors import NonconvergentError, ParameterError
from .exponents import critical_alpha, make_config, moser_constant
from .experiments import (
    at_blowup_exponent_fit,
    constants_table,
    critical_subcritical_identity_check,
    sharpness_pass,
    sharpness_sweep,
)
from .functionals import ckn_report
from .optimize import OptimizerParams, estimate_AT, maximize_ratio
from .profiles import random_profile
from .quadrature import QuadratureSettings
from .report import csv_text, emit, json_text
from .transforms import (
    annulus_points,
    growth_envelope_fit,
    line_inequality_probe,
    random_admissible_ramp,
    verify_log_identities,
    verify_nonradial_gradient_bound,
    verify_peel_identities,
)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation errors (exit 1)."""

    def error(self, message):
        raise ParameterError(message)


def _add_output_args(sp):
    g = sp.add_argument_group("output")
    g.add_argument("--output", default=None, help="output file path (stdout when omitted)")
    g.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    g.add_argument("--plot", action="store_true", help="render figures next to the output file")
    g.add_argument("--config", default=None, help="flat key=value config file")


def _add_quad_args(sp):
    g = sp.add_argument_group("quadrature")
    g.add_argument("--quad-rel-tol", type=float, default=1e-9, help="refinement agreement tolerance")
    g.add_argument("--quad-gauss-order", type=int, default=16, help="points per Gauss panel")
    g.add_argument("--quad-max-depth", type=int, default=14, help="bisection levels before failure")


def _add_optimizer_args(sp):
    g = sp.add_argument_group("optimizer")
    g.add_argument("--node-count", type=int, default=64, help="profile nodes on the search grid")
    g.add_argument("--max-iterations", type=int, default=400, help="ascent iterations per restart")
    g.add_argument("--restarts", type=int, default=4, help="multi-start count")
    g.add_argument("--seed", type=int, default=0, help="seed for generated starts/families")
    g.add_argument("--step-init", type=float, default=0.5, help="initial ascent step")
    g.add_argument("--opt-rel-tol", type=float, default=1e-7, help="relative improvement tolerance")


def _quad_settings(args) -> QuadratureSettings:
    return QuadratureSettings(
        rel_tol=args.quad_rel_tol,
        gauss_order=args.quad_gauss_order,
        max_depth=args.quad_max_depth,
    )


def _opt_params(args) -> OptimizerParams:
    return OptimizerParams(
        node_count=args.node_count,
        max_iterations=args.max_iterations,
        restarts=args.restarts,
        seed=args.seed,
        step_init=args.step_init,
        rel_tol=args.opt_rel_tol,
    )


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParameterError(f"expected comma-separated floats, got {text!r}") from exc


def _fig_path(args, suffix: str) -> str | None:
    if not args.plot:
        return None
    if args.output is None:
        print("note: --plot needs --output; skipping figures", file=sys.stderr)
        return None
    stem, _ = os.path.splitext(args.output)
    return f"{stem}_{suffix}.png"


def _echo_config(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys}


# ---------------------------------------------------------------------------
# Subcommand handlers: each returns an exit code.
# ---------------------------------------------------------------------------

def _cmd_constants(args) -> int:
    table = constants_table(args.N, args.t)
    if args.format == "json":
        content = json_text("constants", _echo_config(args, ("N", "t")), table)
    else:
        content = csv_text(["key", "value"], [(k, v) for k, v in table.items()])
    emit(content, args.output)
    if args.output is not None:
        print(f"omega={table['omega']!r} alpha_crit={table['alpha_crit']!r}")
    return 0


def _cmd_verify_identities(args) -> int:
    settings = _quad_settings(args)
    alpha = args.alpha if args.alpha is not None else 0.4 * critical_alpha(args.N, args.t)
    cfg = make_config(args.N, args.s, args.t, alpha=alpha, q=args.q)
    reports = []
    rows = []
    for i in range(args.profiles):
        p = random_profile(args.seed + i, args.profile_nodes, 1.0)
        rep = verify_peel_identities(p, cfg, settings, tol=args.tol)
        reports.append(rep)
        rows.extend((args.seed + i, r.id, r.lhs, r.rhs, r.rel_err) for r in rep.records)
    passed = all(r.passed for r in reports)
    if args.format == "json":
        content = json_text(
            "verify-identities",
            _echo_config(args, ("N", "s", "t", "q", "profiles", "seed", "tol")),
            {"pass": passed, "alpha": alpha, "reports": [r.to_dict() for r in reports]},
        )
    else:
        content = csv_text(["profile_seed", "id", "lhs", "rhs", "rel_err"], rows)
    emit(content, args.output)
    fig = _fig_path(args, "residuals")
    if fig:
        from . import plotting
        from .transforms import IdentityReport

        merged = IdentityReport(
            records=tuple(r for rep in reports for r in rep.records), passed=passed, tol=args.tol
        )
        plotting.plot_identity_report(merged, fig)
    return 0 if passed else 2


def _cmd_verify_log(args) -> int:
    settings = _quad_settings(args)
    alpha = args.alpha if args.alpha is not None else 0.5 * moser_constant(args.N)
    reports = []
    rows = []
    for i in range(args.profiles):
        p = random_profile(args.seed + i, args.profile_nodes, 1.0)
        rep = verify_log_identities(p, args.N, alpha, settings, tol=args.tol)
        reports.append(rep)
        rows.extend((args.seed + i, r.id, r.lhs, r.rhs, r.rel_err) for r in rep.records)
    passed = all(r.passed for r in reports)
    if args.format == "json":
        content = json_text(
            "verify-log",
            _echo_config(args, ("N", "profiles", "seed", "tol")),
            {"pass": passed, "alpha": alpha, "reports": [r.to_dict() for r in reports]},
        )
    else:
        content = csv_text(["profile_seed", "id", "lhs", "rhs", "rel_err"], rows)
    emit(content, args.output)
    return 0 if passed else 2


def _cmd_verify_nonradial(args) -> int:
    if args.bump is None:
        center = np.zeros(args.N)
        center[0] = 1.0
    else:
        center = np.asarray(_float_list(args.bump))
        if len(center) != args.N:
            raise ParameterError(f"bump center needs {args.N} coordinates, got {len(center)}")
    pts = annulus_points(args.seed, args.points, 0.2, 2.0, args.N)
    rep = verify_nonradial_gradient_bound(
        args.N, args.t, pts, center, slack=args.slack, det_tol=args.det_tol
    )
    if args.format == "json":
        content = json_text(
            "verify-nonradial",
            _echo_config(args, ("N", "t", "points", "seed", "slack", "det_tol")),
            rep.to_dict(),
        )
    else:
        content = csv_text(
            ["id", "lhs", "rhs", "rel_err"],
            [(r.id, r.lhs, r.rhs, r.rel_err) for r in rep.records],
        )
    emit(content, args.output)
    fig = _fig_path(args, "residuals")
    if fig:
        from . import plotting

        plotting.plot_identity_report(rep, fig)
    return 0 if rep.passed else 2


def _cmd_sharpness(args) -> int:
    settings = _quad_settings(args)
    crit = critical_alpha(args.N, args.t)
    alpha = args.alpha if args.alpha is not None else args.alpha_frac * crit
    cfg = make_config(args.N, args.s, args.t, alpha=alpha, q=args.q)
    if args.k_max < args.k_min:
        raise ParameterError("k-max must be >= k-min")
    records = sharpness_sweep(cfg, args.kind, range(args.k_min, args.k_max + 1), settings)
    rule = sharpness_pass(records, critical=alpha >= crit * (1.0 - 1e-12))
    rows = [(int(r.variable), r.ratio, r.lower_bound, r.grad_norm) for r in records]
    if args.format == "json":
        content = json_text(
            "sharpness",
            _echo_config(args, ("N", "s", "t", "q", "kind", "k_min", "k_max", "alpha_frac")),
            {
                "alpha": alpha,
                "rule": rule,
                "records": [
                    {
                        "k": int(r.variable),
                        "ratio": r.ratio,
                        "paper_bound": r.lower_bound,
                        "grad_norm": r.grad_norm,
                        "numerator": r.numerator,
                        "denominator": r.denominator,
                    }
                    for r in records
                ],
            },
        )
    else:
        content = csv_text(["k", "ratio", "paper_bound", "grad_norm"], rows)
    emit(content, args.output)
    fig = _fig_path(args, "sweep")
    if fig:
        from . import plotting

        plotting.plot_sharpness(records, fig)
    return 0 if rule["pass"] else 2


def _maximizer_output(args, subcommand: str, result, extra: dict) -> None:
    if args.format == "json":
        content = json_text(subcommand, extra, result.to_dict())
    else:
        content = csv_text(["iteration", "value"], [(i, v) for i, v in result.history])
    emit(content, args.output)
    fig = _fig_path(args, "history")
    if fig:
        from . import plotting

        plotting.plot_history(result.history, fig)
        plotting.plot_profile(result.best_profile, _fig_path(args, "profile"))


def _cmd_maximize(args) -> int:
    settings = _quad_settings(args)
    params = _opt_params(args)
    crit = critical_alpha(args.N, args.t)
    alpha = args.alpha if args.alpha is not None else 0.5 * crit
    cfg = make_config(args.N, args.s, args.t, alpha=alpha, q=args.q)
    result = maximize_ratio(cfg, args.kind, params, settings)
    _maximizer_output(args, "maximize", result, {**cfg.snapshot(), "kind": args.kind})
    return 0 if result.converged else 3


def _cmd_estimate_at(args) -> int:
    settings = _quad_settings(args)
    params = _opt_params(args)
    alpha = args.alpha if args.alpha is not None else args.alpha_frac * moser_constant(args.N)
    result = estimate_AT(args.N, alpha, args.beta, params, settings)
    _maximizer_output(args, "estimate-at", result, {"N": args.N, "alpha": alpha, "beta": args.beta})
    return 0 if result.converged else 3


def _cmd_theorem_c_fit(args) -> int:
    settings = _quad_settings(args)
    params = _opt_params(args)
    fracs = _float_list(args.alpha_fracs)
    fit = at_blowup_exponent_fit(args.N, args.beta, fracs, params, settings)
    passed = fit.rel_dev <= args.tol
    rows = [(p.alpha_frac, p.estimate, float(np.log(p.gap))) for p in fit.points]
    if args.format == "json":
        content = json_text(
            "theorem-c-fit",
            _echo_config(args, ("N", "beta", "alpha_fracs", "tol")),
            {
                "slope": fit.slope,
                "target_slope": fit.target_slope,
                "rel_dev": fit.rel_dev,
                "pass": passed,
                "points": [
                    {"alpha_frac": p.alpha_frac, "estimate": p.estimate, "gap": p.gap, "converged": p.converged}
                    for p in fit.points
                ],
            },
        )
    else:
        content = csv_text(["alpha_frac", "estimate", "log_gap"], rows)
    emit(content, args.output)
    fig = _fig_path(args, "fit")
    if fig:
        from . import plotting

        plotting.plot_exponent_fit(fit.points, fit.slope, fit.target_slope, fig)
    return 0 if passed else 2


def _cmd_theorem_e_check(args) -> int:
    settings = _quad_settings(args)
    params = _opt_params(args)
    fracs = _float_list(args.alpha_fracs)
    report, rows, mt_value = critical_subcritical_identity_check(
        args.N, args.a, args.b, args.beta, fracs, params, settings, tol=args.tol
    )
    if args.format == "json":
        content = json_text(
            "theorem-e-check",
            _echo_config(args, ("N", "a", "b", "beta", "alpha_fracs", "tol")),
            {"mt_estimate": mt_value, "report": report.to_dict(),
             "grid": [{"alpha": r.alpha, "prefactor": r.prefactor, "AT_est": r.at_estimate, "product": r.product} for r in rows]},
        )
    else:
        content = csv_text(
            ["alpha", "prefactor", "AT_est", "product"],
            [(r.alpha, r.prefactor, r.at_estimate, r.product) for r in rows],
        )
    emit(content, args.output)
    fig = _fig_path(args, "identity")
    if fig:
        from . import plotting

        plotting.plot_identity_grid(rows, mt_value, fig)
    return 0 if report.passed else 2


def _cmd_lemma38_probe(args) -> int:
    settings = _quad_settings(args)
    betas = _float_list(args.betas)
    eps_values = _float_list(args.eps)
    family = [
        random_admissible_ramp(args.seed + i, node_count=args.ramp_nodes, N=args.N)
        for i in range(args.family_size)
    ]
    per_beta = {}
    rows = []
    c_hats = []
    for beta in betas:
        records = line_inequality_probe(family, beta, args.N, settings)
        per_beta[beta] = records
        c_hats.append(max(r.ratio for r in records))
        rows.extend((beta, r.index, r.ratio, r.crossing_time) for r in records)
    growth = {}
    for eps in eps_values:
        c_eps, violations = growth_envelope_fit(family, eps, args.N)
        growth[repr(eps)] = {"c_eps": c_eps, "violations": violations}
    finite = all(np.isfinite(c) for c in c_hats)
    monotone = all(c_hats[i] <= c_hats[i + 1] + 1e-12 for i in range(len(c_hats) - 1))
    no_violations = all(g["violations"] == 0 for g in growth.values())
    passed = finite and monotone and no_violations
    if args.format == "json":
        content = json_text(
            "lemma38-probe",
            _echo_config(args, ("N", "betas", "family_size", "seed", "eps")),
            {
                "pass": passed,
                "c_hat": {repr(b): c for b, c in zip(betas, c_hats)},
                "growth": growth,
            },
        )
    else:
        content = csv_text(["beta", "index", "ratio", "crossing_time"], rows)
    emit(content, args.output)
    fig = _fig_path(args, "probe")
    if fig:
        from . import plotting

        plotting.plot_probe(per_beta, fig)
    return 0 if passed else 2


def _cmd_ckn_sweep(args) -> int:
    settings = _quad_settings(args)
    cfg = make_config(args.N, args.s, args.t, alpha=1.0, q=max(args.q, float(args.N)))
    rows = []
    values = []
    for i in range(args.count):
        p = random_profile(args.seed + i, args.profile_nodes, 1.0)
        rep = ckn_report(p, cfg, args.q, settings)
        values.append(rep.value)
        rows.append((args.seed + i, rep.kind, rep.value, rep.numerator, rep.denominator, rep.grad_norm_used))
    c_hat = max(values)
    passed = bool(np.all(np.isfinite(values)))
    if args.format == "json":
        content = json_text(
            "ckn-sweep",
            _echo_config(args, ("N", "s", "t", "q", "count", "seed")),
            {"pass": passed, "c_hat": c_hat},
        )
    else:
        content = csv_text(["seed", "kind", "value", "numerator", "denominator", "grad_norm"], rows)
    emit(content, args.output)
    fig = _fig_path(args, "sweep")
    if fig:
        from . import plotting

        plotting.plot_value_scatter(values, fig, title="weighted interpolation ratios")
    return 0 if passed else 2


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

_HANDLERS = {}


def _register(sub, name: str, help_text: str, handler):
    sp = sub.add_parser(name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _HANDLERS[name] = handler
    _add_output_args(sp)
    return sp


def build_parser() -> _Parser:
    parser = _Parser(prog="mtlab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"mtlab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    sp = _register(sub, "constants", "print dimensional and critical constants", _cmd_constants)
    sp.add_argument("--N", type=int, default=2, help="dimension")
    sp.add_argument("--t", type=float, default=0.0, help="weight exponent")

    sp = _register(sub, "verify-identities", "peel-map transfer identity suite", _cmd_verify_identities)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--s", float, 0.0, "denominator weight exponent"),
        ("--t", float, 0.5, "numerator weight exponent"),
        ("--q", float, None, "integrand power (default: N)"),
        ("--alpha", float, None, "exponential coefficient (default: 0.4*alpha_crit)"),
        ("--profiles", int, 20, "number of seeded test profiles"),
        ("--profile-nodes", int, 16, "nodes per test profile"),
        ("--seed", int, 0, "base seed"),
        ("--tol", float, 1e-6, "relative error tolerance"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    _add_quad_args(sp)

    sp = _register(sub, "verify-log", "log-substitution identity suite", _cmd_verify_log)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--alpha", float, None, "exponential coefficient (default: 0.5*alpha_N)"),
        ("--profiles", int, 20, "number of seeded test profiles"),
        ("--profile-nodes", int, 16, "nodes per test profile"),
        ("--seed", int, 0, "base seed"),
        ("--tol", float, 1e-7, "relative error tolerance"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    _add_quad_args(sp)

    sp = _register(sub, "verify-nonradial", "finite-difference gradient bound check", _cmd_verify_nonradial)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--t", float, 1.0, "weight exponent"),
        ("--points", int, 100, "sample points in the annulus 0.2 < |x| < 2"),
        ("--seed", int, 0, "base seed"),
        ("--slack", float, 1e-4, "allowed bound violation (finite-difference budget)"),
        ("--det-tol", float, 1e-5, "Jacobian determinant relative tolerance"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    sp.add_argument("--bump", default=None, help="bump center coordinates, comma separated (default: unit e1)")

    sp = _register(sub, "sharpness", "concentration sweep at/below the critical coefficient", _cmd_sharpness)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--s", float, 0.0, "denominator weight exponent"),
        ("--t", float, 0.0, "numerator weight exponent"),
        ("--q", float, None, "integrand power for kind Q (default: N)"),
        ("--k-min", int, 2, "first concentration index"),
        ("--k-max", int, 12, "last concentration index"),
        ("--alpha-frac", float, 1.0, "alpha as a fraction of alpha_crit"),
        ("--alpha", float, None, "explicit alpha (overrides --alpha-frac)"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    sp.add_argument("--kind", choices=("F", "G", "Q"), default="G", help="ratio functional")
    _add_quad_args(sp)

    sp = _register(sub, "maximize", "projected-ascent maximizer search", _cmd_maximize)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--s", float, 0.0, "denominator weight exponent"),
        ("--t", float, 0.0, "numerator weight exponent"),
        ("--q", float, None, "integrand power for kind Q (default: N)"),
        ("--alpha", float, None, "exponential coefficient (default: 0.5*alpha_crit)"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    sp.add_argument("--kind", choices=("F", "G", "Q"), default="G", help="ratio functional")
    _add_quad_args(sp)
    _add_optimizer_args(sp)

    sp = _register(sub, "estimate-at", "subcritical scaling-invariant supremum estimate", _cmd_estimate_at)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--beta", float, 0.0, "weight exponent"),
        ("--alpha-frac", float, 0.5, "alpha as a fraction of alpha_N"),
        ("--alpha", float, None, "explicit alpha (overrides --alpha-frac)"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    _add_quad_args(sp)
    _add_optimizer_args(sp)

    sp = _register(sub, "theorem-c-fit", "blow-up exponent fit near the critical coefficient", _cmd_theorem_c_fit)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--beta", float, 0.0, "weight exponent"),
        ("--tol", float, 0.15, "relative slope deviation allowed"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    sp.add_argument("--alpha-fracs", default="0.8,0.9,0.95,0.975", help="fit window, fractions of alpha_N")
    _add_quad_args(sp)
    _add_optimizer_args(sp)

    sp = _register(sub, "theorem-e-check", "critical/subcritical supremum identity check", _cmd_theorem_e_check)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--a", float, 2.0, "gradient-norm exponent in the constraint"),
        ("--b", float, 2.0, "mass-norm exponent in the constraint"),
        ("--beta", float, 0.0, "weight exponent"),
        ("--tol", float, 0.15, "relative agreement tolerance"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    sp.add_argument("--alpha-fracs", default="0.3,0.45,0.6,0.75,0.85,0.95", help="grid, fractions of alpha_N")
    _add_quad_args(sp)
    _add_optimizer_args(sp)

    sp = _register(sub, "lemma38-probe", "one-dimensional ramp inequality probe", _cmd_lemma38_probe)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--family-size", int, 200, "number of seeded admissible ramps"),
        ("--ramp-nodes", int, 24, "nodes per ramp"),
        ("--seed", int, 0, "base seed"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    sp.add_argument("--betas", default="0.5,0.7,0.9", help="exponential coefficients, comma separated")
    sp.add_argument("--eps", default="0.1,0.5", help="growth-envelope slacks, comma separated")
    _add_quad_args(sp)

    sp = _register(sub, "ckn-sweep", "weighted interpolation ratio family sweep", _cmd_ckn_sweep)
    for flag, typ, default, hlp in (
        ("--N", int, 2, "dimension"),
        ("--s", float, 0.0, "lower weight exponent"),
        ("--t", float, 1.0, "upper weight exponent"),
        ("--q", float, 2.0, "norm power"),
        ("--count", int, 500, "family size"),
        ("--seed", int, 0, "base seed"),
        ("--profile-nodes", int, 16, "nodes per test profile"),
    ):
        sp.add_argument(flag, type=typ, default=default, help=hlp)
    _add_quad_args(sp)

    return parser


def _convert_config_value(action, raw: str):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ParameterError(f"cannot parse boolean config value {raw!r} for --{action.dest}")
    if action.type is not None:
        try:
            return action.type(raw)
        except ValueError as exc:
            raise ParameterError(f"cannot parse config value {raw!r} for --{action.dest}") from exc
    return raw


def _load_config_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw!r}")
                key, _, value = line.partition("=")
                entries[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ParameterError(f"cannot read config file {path}: {exc}") from exc
    return entries


def parse_args(argv=None):
    """Parse argv with precedence flags > config file > defaults."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub_parser = _subparser_for(parser, args.subcommand)
        actions = {a.dest: a for a in sub_parser._actions}
        defaults = {}
        for key, raw in _load_config_file(args.config).items():
            if key not in actions:
                raise ParameterError(f"unknown config key {key!r} for subcommand {args.subcommand}")
            defaults[key] = _convert_config_value(actions[key], raw)
        sub_parser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _subparser_for(parser: _Parser, name: str):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise ParameterError(f"unknown subcommand {name!r}")


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return _HANDLERS[args.subcommand](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonconvergentError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
