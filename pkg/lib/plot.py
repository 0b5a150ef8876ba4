"""SVG rendering of solver trajectories against their references."""

import matplotlib

matplotlib.use("agg")

from collections.abc import Mapping
from lib.analysis import ReferenceSeries
from lib.exceptions import OutputError
from lib.ivp import Trajectory
from matplotlib.figure import Figure
from pathlib import Path

# fixed salt keeps generated SVG ids stable between runs
SVG_RC = {"svg.hashsalt": "odebench", "svg.fonttype": "none"}

SOLVER_STYLES = {
    "euler": {"color": "#4878A8", "linestyle": "-"},
    "heun": {"color": "#E57A5A", "linestyle": "--"},
    "midpoint": {"color": "#5A9E5A", "linestyle": "-."},
    "rk4": {"color": "#8B6BB8", "linestyle": ":"},
    "rk45": {"color": "#D69A2E", "linestyle": "-"},
}
REFERENCE_STYLES = {
    "empirical": {"color": "#666666", "marker": "o", "markersize": 3, "linestyle": "none"},
    "experimental": {"color": "black", "marker": "x", "markersize": 4, "linestyle": "none"},
}


def render_svg(
    path: Path,
    title: str,
    trajectories: Mapping[str, Trajectory],
    references: Mapping[str, ReferenceSeries] | None = None,
) -> Path:
    fig = Figure(figsize=(8, 5))
    ax = fig.add_subplot()

    for name, trajectory in trajectories.items():
        label = name if trajectory.completed else f"{name} ({trajectory.status})"
        ax.plot(trajectory.xs, trajectory.ys, label=label, linewidth=1.2, **SOLVER_STYLES.get(name, {}))
    for kind, series in (references or {}).items():
        ax.plot(series.ts, series.values, label=f"{kind} reference", **REFERENCE_STYLES.get(kind, {}))

    ax.set_title(title)
    ax.set_xlabel("t")
    ax.set_ylabel("y")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()

    with matplotlib.rc_context(SVG_RC):
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
