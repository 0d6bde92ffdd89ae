"""Figure files written alongside delimited outputs: loss curves next to the
loss history table, metric bars next to the evaluation report, and a surface
attribute panel next to dumped maps."""

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .relight import tone_map

_LOSS_LABELS = ("total", "photometric", "microfacet", "normal")


def save_loss_curves(history, path):
    history = np.asarray(history)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, label in enumerate(_LOSS_LABELS, start=1):
        ax.plot(history[:, 0], history[:, i], label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss (batch mean)")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def save_metric_bars(report, path):
    rows = np.asarray(report.rows)
    labels = [f"v{int(v)}/l{int(l)}" for v, l in rows[:, :2]]
    x = np.arange(len(rows))
    fig, (ax_p, ax_s) = plt.subplots(1, 2, figsize=(9.0, 3.5))
    ax_p.bar(x, rows[:, 2], color="#4477aa")
    ax_p.axhline(report.mean_psnr, color="#aa3333", ls="--",
                 label=f"mean {report.mean_psnr:.2f} dB")
    ax_p.set_ylabel("PSNR (dB)")
    ax_s.bar(x, rows[:, 3], color="#66aa77")
    ax_s.axhline(report.mean_ssim, color="#aa3333", ls="--",
                 label=f"mean {report.mean_ssim:.3f}")
    ax_s.set_ylabel("SSIM")
    ax_s.set_ylim(0.0, 1.05)
    for ax in (ax_p, ax_s):
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
        ax.legend(fontsize=8)
    fig.suptitle(report.method)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def save_svbrdf_panel(result, path):
    """2x2 panel: tone-mapped render, shading normals, albedo, roughness.
    Variants without surface attributes get the render alone."""
    mask = result.mask[..., None]
    panels = [("render", tone_map(result.image))]
    if result.normal is not None:
        panels.append(("normal", (result.normal * 0.5 + 0.5) * mask))
        panels.append(("albedo", np.clip(result.albedo, 0.0, 1.0) * mask))
        panels.append(("roughness", result.roughness * result.mask))
    cols = 2 if len(panels) > 1 else 1
    rows = (len(panels) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4.0 * cols, 3.2 * rows),
                             squeeze=False)
    for ax in axes.flat:
        ax.axis("off")
    for ax, (title, img) in zip(axes.flat, panels):
        if img.ndim == 2:
            ax.imshow(img, cmap="viridis", vmin=0.0, vmax=1.0)
        else:
            ax.imshow(np.clip(img, 0.0, 1.0))
        ax.set_title(title, fontsize=9)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
