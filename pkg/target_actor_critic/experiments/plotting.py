"""Log-log SVG plots of swept quantities with their fitted lines."""

import io

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from target_actor_critic.experiments.studies import RateFit

# fixed element ids so that identical inputs give byte-identical SVG
matplotlib.rcParams["svg.hashsalt"] = "target-actor-critic"


def rate_figure(fit: RateFit, title: str = "") -> Figure:
    """Points with error bars and the fitted power law on log-log axes."""
    horizons = np.asarray(fit.horizons, dtype=float)
    values = np.asarray(fit.values, dtype=float)

    fig = Figure(figsize=(7, 5))
    ax = fig.subplots()
    yerr = None if fit.stderrs is None else np.asarray(fit.stderrs, dtype=float)
    ax.errorbar(horizons, values, yerr=yerr, fmt="o", capsize=3, label=fit.quantity or "estimate")

    grid = np.geomspace(horizons[0], horizons[-1], 50)
    ax.plot(grid, np.exp(fit.intercept) * grid**fit.slope, "-",
            label=f"fit slope {fit.slope:.3f} ± {fit.slope_stderr:.3f}")
    if fit.theoretical_exponent is not None:
        anchor = values[0] / horizons[0] ** fit.theoretical_exponent
        ax.plot(grid, anchor * grid**fit.theoretical_exponent, "--",
                label=f"dominant bound exponent {fit.theoretical_exponent:.3f}")

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel(fit.quantity or "value")
    ax.set_title(title or f"{fit.quantity} vs T")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return fig


def figure_to_svg(fig: Figure) -> bytes:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None}, bbox_inches="tight")
    return buffer.getvalue()
