"""Figure rendering for bound curves and simulation reports.

Matplotlib is imported lazily with the Agg backend so the library stays
headless; figures are written to whatever format the output extension
implies (png, pdf, svg).
"""

from __future__ import annotations

from .bounds import BOUND_ORDER, RateCurve

_CURVE_STYLES = {
    "upper_causal": dict(color="tab:red", linestyle="-", linewidth=2.0),
    "lower_causal": dict(color="tab:blue", linestyle="-", linewidth=2.0),
    "lower_causal_finite": dict(color="tab:blue", linestyle="--", linewidth=1.2),
    "gv": dict(color="tab:green", linestyle="-.", linewidth=1.2),
    "plotkin": dict(color="tab:orange", linestyle=":", linewidth=1.2),
    "elias_bassalygo": dict(color="tab:purple", linestyle="-.", linewidth=1.2),
    "mrrw": dict(color="tab:brown", linestyle="-.", linewidth=1.2),
    "random_capacity": dict(color="gray", linestyle=":", linewidth=1.2),
}

_CURVE_LABELS = {
    "upper_causal": "causal upper (1-2p)+",
    "lower_causal": "causal lower",
    "lower_causal_finite": "causal lower (finite slack)",
    "gv": "Gilbert-Varshamov",
    "plotkin": "Plotkin",
    "elias_bassalygo": "Elias-Bassalygo",
    "mrrw": "MRRW",
    "random_capacity": "random erasures (1-p)",
}


def _new_figure():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def plot_rate_curves(curves: list[RateCurve], path: str, title: str = "Erasure rate bounds") -> None:
    """Render the bound curves to an image file."""
    plt = _new_figure()
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    by_name = {c.bound_name: c for c in curves}
    for name in BOUND_ORDER:
        curve = by_name.get(name)
        if curve is None:
            continue
        xs = [pt.p for pt in curve.points]
        ys = [pt.rate for pt in curve.points]
        ax.plot(xs, ys, label=_CURVE_LABELS[name], **_CURVE_STYLES[name])
    ax.set_xlabel("erasure fraction p")
    ax.set_ylabel("rate (bits / channel use)")
    ax.set_title(title)
    ax.set_ylim(0.0, 1.02)
    ax.legend(fontsize=8, loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)


def plot_report(rows: list[dict], path: str, title: str = "Estimated error rates") -> None:
    """Render simulation rows as a bar chart with Wilson interval bars."""
    plt = _new_figure()
    ok = [row for row in rows if not row.get("error")]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(ok) + 2.0), 4.0))
    if ok:
        xs = range(len(ok))
        estimates = [row["estimate"] for row in ok]
        lo_err = [row["estimate"] - row["lo"] for row in ok]
        hi_err = [row["hi"] - row["estimate"] for row in ok]
        labels = [
            f"{row.get('strategy_name', '?')}\n{row['config_hash'][:8]}" for row in ok
        ]
        ax.bar(xs, estimates, color="tab:blue", alpha=0.8)
        ax.errorbar(xs, estimates, yerr=[lo_err, hi_err], fmt="none", ecolor="black", capsize=3)
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("error probability estimate")
    ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)
