"""PNG figures for the bench and attack commands (headless Agg backend)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import NullFormatter  # noqa: E402

STYLE = {
    "figure.figsize": (5.5, 3.6),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
}


def _save(fig, out: Path) -> Path:
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def syndrome_scaling(costs, out_dir) -> Path:
    """Field mults per 2k-batch against k, with the fitted c*k*log2(k)^2 curve."""
    ks = [c.k for c in costs]
    c_fit = sum(c.fitted_c for c in costs) / len(costs)
    with plt.rc_context(STYLE):
        fig, (ax, ax2) = plt.subplots(1, 2, figsize=(8, 3.4))
        ax.loglog(ks, [c.batched for c in costs], "o-", label="batched")
        ax.loglog(ks, [c.naive for c in costs], "s--", label="naive")
        ax.loglog(ks, [c_fit * k * math.log2(k) ** 2 for k in ks], ":", color="gray", label=f"{c_fit:.1f} k log²k")
        ax.set_xlabel("k")
        ax.set_ylabel("field mults per 2k updates")
        ax.set_xscale("log", base=2)
        ax.xaxis.set_minor_formatter(NullFormatter())
        ax.set_xticks(ks, [str(k) for k in ks])
        ax.legend()
        ax2.plot(ks, [c.ratio for c in costs], "o-", color="C2")
        ax2.set_xscale("log", base=2)
        ax2.set_xlabel("k")
        ax2.set_ylabel("batched / naive")
        return _save(fig, Path(out_dir) / "syndrome_scaling.png")


def update_cost(sweep: dict[int, int], out_dir) -> Path:
    """Ciphertext multiplications per update against log2 n."""
    bits = [math.ceil(math.log2(n)) for n in sweep]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(bits, list(sweep.values()), "o", label="measured")
        ax.plot(bits, bits, "-", color="gray", alpha=0.6, label="ceil(log2 n)")
        ax.set_xlabel("log2 n")
        ax.set_ylabel("ct mults per update")
        ax.legend()
        return _save(fig, Path(out_dir) / "update_cost.png")


def attack_outcomes(records, out_dir, scenario: str) -> Path:
    """Cumulative rejections and incorrect responses over the trials."""
    live = [r for r in records if not r.skipped]
    xs = list(range(1, len(live) + 1))
    rej, bad = [], []
    for r in live:
        rej.append((rej[-1] if rej else 0) + int(r.rejected))
        bad.append((bad[-1] if bad else 0) + int(r.incorrect > 0))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.step(xs, rej, where="post", label="rejected (BOT)")
        ax.step(xs, bad, where="post", label="incorrect response")
        ax.set_xlabel("trial")
        ax.set_ylabel("cumulative count")
        ax.set_title(scenario)
        ax.legend()
        return _save(fig, Path(out_dir) / f"attack_{scenario}.png")
