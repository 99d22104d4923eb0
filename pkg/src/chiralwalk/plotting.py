"""Static SVG figures. matplotlib is imported lazily so the numerical
modules never pay for it."""

from __future__ import annotations

import numpy as np

SVG_SALT = "chiralwalk"


def _figure(size=(4.0, 4.0)):
    import matplotlib

    matplotlib.rcParams["svg.hashsalt"] = SVG_SALT
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure

    fig = Figure(figsize=size)
    FigureCanvasSVG(fig)
    return fig


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_arcs(path, arcs, points=None, title: str = "essential spectrum"):
    """Unit circle with the spectral arcs stroked; arcs of zero length are
    drawn as dots. ``points`` (complex) are overlaid if given."""
    fig = _figure()
    ax = fig.add_subplot(1, 1, 1)
    t = np.linspace(0.0, 2.0 * np.pi, 721)
    ax.plot(np.cos(t), np.sin(t), color="0.8", lw=1.0)
    for lo, hi in arcs:
        if hi - lo < 1e-9:
            ax.plot([np.cos(lo)], [np.sin(lo)], "o", color="C0", ms=5)
            continue
        s = np.linspace(lo, hi, max(8, int(180 * (hi - lo) / np.pi)))
        ax.plot(np.cos(s), np.sin(s), color="C0", lw=3.0)
    if points is not None and len(points):
        pts = np.asarray(points)
        ax.plot(pts.real, pts.imag, ".", color="C3", ms=2)
    ax.plot([1, -1], [0, 0], "x", color="k", ms=6)
    ax.set_aspect("equal")
    ax.set_xlim(-1.25, 1.25)
    ax.set_ylim(-1.25, 1.25)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    _save(fig, path)


def plot_profile(path, sites, norm_sq, title: str = "protected state"):
    fig = _figure((5.0, 3.5))
    ax = fig.add_subplot(1, 1, 1)
    ax.semilogy(sites, np.maximum(norm_sq, 1e-300), ".-", lw=0.8, ms=2)
    ax.set_xlabel("x")
    ax.set_ylabel("|Psi(x)|^2")
    ax.set_title(title)
    _save(fig, path)
