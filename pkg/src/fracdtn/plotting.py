"""Figures for study output.  matplotlib is imported lazily and only here."""

from __future__ import annotations

from collections import defaultdict


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_convergence(rows, path, title=None):
    """Log-log error-vs-N figure, one line per s, with an ``N**-2`` guide."""
    plt = _pyplot()
    by_s = defaultdict(list)
    for r in rows:
        by_s[r["s"]].append((r["N"], r["error_spectral"], r["error_bessel"]))
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for s, pts in sorted(by_s.items()):
        pts.sort()
        N = [p[0] for p in pts]
        line, = ax.loglog(N, [p[1] for p in pts], "o-", label=f"DtN, s={s:g}")
        ax.loglog(N, [p[2] for p in pts], "x--", color=line.get_color(), alpha=0.6,
                  label=f"nodal, s={s:g}")
    if by_s:
        Ns = sorted({r["N"] for r in rows})
        e0 = max(r["error_spectral"] for r in rows if r["N"] == Ns[0])
        ax.loglog(Ns, [e0 * (Ns[0] / n) ** 2 for n in Ns], "k:", label="N^-2")
    ax.set_xlabel("cells N")
    ax.set_ylabel("relative error")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
