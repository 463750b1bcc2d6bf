"""Figure rendering for the report path.

Each experiment subcommand can render a matplotlib figure next to its
delimited output.  Figures are a convenience view of the same records that
land in the CSV/JSON files; the data files remain the canonical output.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

plt.rcParams.update(
    {
        "figure.figsize": (6.0, 6.0 * _GOLDEN),
        "figure.dpi": 130,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 9,
        "lines.markersize": 4,
    }
)


def _finish(fig, ax, path: str, xlabel: str, ylabel: str, title: str):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_sharpness(records, path: str, title: str = "concentration sweep"):
    fig, ax = plt.subplots()
    ks = [r.variable for r in records]
    ax.semilogy(ks, [r.ratio for r in records], "o-", label="ratio")
    bounds = [(r.variable, r.lower_bound) for r in records if r.lower_bound is not None]
    if bounds:
        ax.semilogy(*zip(*bounds), "s--", label="plateau lower bound")
    ax.legend()
    return _finish(fig, ax, path, "k", "ratio", title)


def plot_exponent_fit(points, slope: float, target: float, path: str):
    fig, ax = plt.subplots()
    x = np.log([p.gap for p in points])
    y = np.log([p.estimate for p in points])
    ax.plot(x, y, "o", label="estimates")
    xs = np.linspace(min(x), max(x), 50)
    ax.plot(xs, y.mean() + slope * (xs - x.mean()), "-", label=f"fit slope {slope:.3f}")
    ax.plot(xs, y.mean() + target * (xs - x.mean()), "--", label=f"target {target:.3f}")
    ax.legend()
    return _finish(fig, ax, path, "log gap", "log estimate", "blow-up exponent fit")


def plot_history(history, path: str, title: str = "ascent history"):
    fig, ax = plt.subplots()
    its = [h[0] for h in history]
    vals = [h[1] for h in history]
    ax.plot(its, vals, "-")
    return _finish(fig, ax, path, "iteration", "objective", title)


def plot_profile(profile, path: str, title: str = "best profile"):
    fig, ax = plt.subplots()
    ax.semilogx(profile.radii, profile.values, "-")
    return _finish(fig, ax, path, "r", "u(r)", title)


def plot_identity_report(report, path: str, title: str = "identity residuals"):
    fig, ax = plt.subplots()
    ids = [r.id for r in report.records]
    errs = [max(r.rel_err, 1e-18) for r in report.records]
    ax.bar(range(len(ids)), errs)
    ax.set_yscale("log")
    ax.axhline(report.tol, color="k", linestyle="--", label=f"tol {report.tol:g}")
    step = max(1, len(ids) // 20)
    ax.set_xticks(range(0, len(ids), step))
    ax.set_xticklabels(ids[::step], rotation=60, ha="right", fontsize=6)
    ax.legend()
    return _finish(fig, ax, path, "identity", "relative error", title)


def plot_probe(per_beta: dict, path: str):
    fig, ax = plt.subplots()
    for beta, records in sorted(per_beta.items()):
        ax.plot([r.index for r in records], [r.ratio for r in records], ".", label=f"beta={beta:g}")
    ax.set_yscale("log")
    ax.legend()
    return _finish(fig, ax, path, "family member", "ratio", "ramp inequality probe")


def plot_value_scatter(values, path: str, xlabel: str = "seed", ylabel: str = "ratio", title: str = "family sweep"):
    fig, ax = plt.subplots()
    ax.plot(range(len(values)), values, ".")
    return _finish(fig, ax, path, xlabel, ylabel, title)


def plot_identity_grid(rows, mt_value: float, path: str):
    fig, ax = plt.subplots()
    alphas = [r.alpha for r in rows]
    ax.plot(alphas, [r.product for r in rows], "o-", label="prefactor * subcritical estimate")
    ax.axhline(mt_value, color="k", linestyle="--", label="combined-constraint estimate")
    ax.legend()
    return _finish(fig, ax, path, "alpha", "value", "critical/subcritical identity")
