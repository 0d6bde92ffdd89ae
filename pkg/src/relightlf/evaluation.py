"""Held-out evaluation: interpolation baselines over the captured light set,
per-image quality metrics, and deterministic report files.

Both baselines reuse the dataset's own training-light images for a camera:
`nearest` returns the image of the closest training light, `barycentric`
blends the three images whose light directions span the query on the sphere.
Reports carry only deterministic content; wall-clock throughput goes to a
separate sidecar so repeated runs produce byte-identical reports.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .metrics import (
    PSNR_CAP_DB,
    SSIM_K1,
    SSIM_K2,
    SSIM_SIGMA,
    SSIM_WINDOW,
    psnr,
    ssim,
)
from .model import render_view

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
BASELINES = ("nearest", "barycentric")
# hull facets whose plane passes near the origin close off the base of a
# hemispherical direction set; they are not spherical triangles of the rig
_FACET_OFFSET_MIN = 0.5


@dataclass
class SplitSpec:
    held_out_views: tuple
    held_out_lights: tuple
    seed: int = 0

    def __post_init__(self):
        self.held_out_views = tuple(int(v) for v in self.held_out_views)
        self.held_out_lights = tuple(int(v) for v in self.held_out_lights)

    @classmethod
    def from_dict(cls, d):
        return cls(d["held_out_views"], d["held_out_lights"],
                   int(d.get("seed", 0)))

    @classmethod
    def from_dataset(cls, dataset):
        return cls.from_dict(dataset.split)

    def to_dict(self):
        return {"held_out_views": list(self.held_out_views),
                "held_out_lights": list(self.held_out_lights),
                "seed": self.seed}

    def validate(self, n_views, n_lights):
        views = set(self.held_out_views)
        lights = set(self.held_out_lights)
        if len(views) != len(self.held_out_views) \
                or len(lights) != len(self.held_out_lights):
            raise ValueError("duplicate held-out ids")
        if any(v < 0 or v >= n_views for v in views):
            raise ValueError("held-out view id out of range")
        if any(l < 0 or l >= n_lights for l in lights):
            raise ValueError("held-out light id out of range")
        if n_views - len(views) < 1 or n_lights - len(lights) < 1:
            raise ValueError("split leaves no training data")


def training_light_ids(dataset, split: SplitSpec = None):
    split = split or SplitSpec.from_dataset(dataset)
    held = set(split.held_out_lights)
    return [i for i in range(len(dataset.lights)) if i not in held]


# --------------------------------------------------------------------------
# baselines

def nearest_light_id(dataset, light, split: SplitSpec = None):
    """Training light maximizing dot(l_i, l); ties go to the lowest id."""
    ids = training_light_ids(dataset, split)
    if not ids:
        raise ValueError("no training lights")
    dots = dataset.lights[ids] @ np.asarray(light, dtype=np.float64)
    return ids[int(np.argmax(dots))]


def nearest_light_baseline(dataset, camera_id, light,
                           split: SplitSpec = None):
    """Image of the training light closest in direction to the query."""
    _check_camera(dataset, camera_id)
    return dataset.image(camera_id, nearest_light_id(dataset, light, split))


@dataclass
class BarycentricResult:
    image: np.ndarray
    light_ids: tuple
    weights: np.ndarray
    used_fallback: bool


def barycentric_baseline(dataset, camera_id, light,
                         split: SplitSpec = None) -> BarycentricResult:
    """Blend of the three training-light images spanning the query.

    Uses the convex-hull triangulation of the training directions; a query
    outside the hull falls back to the nearest-light image with a flag.
    """
    _check_camera(dataset, camera_id)
    split = split or SplitSpec.from_dataset(dataset)
    ids = training_light_ids(dataset, split)
    if len(ids) < 3:
        raise ValueError("barycentric blending needs at least three "
                         "training lights")
    dirs = dataset.lights[ids]
    if len(ids) == 3 and np.linalg.matrix_rank(dirs) < 3:
        raise ValueError("training lights are degenerate (coplanar "
                         "through the origin)")
    light = np.asarray(light, dtype=np.float64)
    for tri in _sphere_triangles(dirs):
        basis = dirs[list(tri)].T
        try:
            w = np.linalg.solve(basis, light)
        except np.linalg.LinAlgError:
            continue
        if np.all(w >= -1e-9):
            w = np.clip(w, 0.0, None)
            w = w / w.sum()
            chosen = tuple(ids[t] for t in tri)
            image = sum(wi * dataset.image(camera_id, li).astype(np.float64)
                        for wi, li in zip(w, chosen))
            return BarycentricResult(image.astype(np.float32), chosen, w,
                                     False)
    logger.info("query light outside the training hull; "
                "falling back to nearest")
    near = nearest_light_id(dataset, light, split)
    return BarycentricResult(dataset.image(camera_id, near), (near,),
                             np.array([1.0]), True)


def _sphere_triangles(dirs):
    """Triangles of the direction set suitable for containment tests."""
    if len(dirs) == 3:
        return [(0, 1, 2)]
    try:
        hull = ConvexHull(dirs)
    except QhullError as exc:
        raise ValueError(f"degenerate light directions: {exc}") from exc
    tris = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        if abs(eq[3]) >= _FACET_OFFSET_MIN:
            tris.append(tuple(int(i) for i in simplex))
    if not tris:
        raise ValueError("no usable spherical triangles in the light set")
    return tris


def _check_camera(dataset, camera_id):
    if not 0 <= camera_id < len(dataset.cameras):
        raise ValueError(f"unknown camera id {camera_id}")


# --------------------------------------------------------------------------
# evaluation

@dataclass
class MetricReport:
    method: str
    rows: np.ndarray          # (n, 4): view id, light id, psnr dB, ssim
    mean_psnr: float
    mean_ssim: float
    seconds_per_frame: float
    rays_per_second: float
    checkpoint: str = ""
    dataset_hash: str = ""
    notes: list = field(default_factory=list)


def evaluate_with(renderer, dataset, split: SplitSpec = None, method="",
                  checkpoint=""):
    """Score `renderer(view_id, light_id, light_dir) -> image` on every
    held-out (view, light) pair against the stored ground truth."""
    split = split or SplitSpec.from_dataset(dataset)
    split.validate(len(dataset.cameras), len(dataset.lights))
    if not split.held_out_views or not split.held_out_lights:
        raise ValueError("split has no held-out pairs to evaluate")
    rows = []
    render_time = 0.0
    rays = 0
    for vi in split.held_out_views:
        for li in split.held_out_lights:
            truth = dataset.image(vi, li)
            start = time.perf_counter()
            image = renderer(vi, li, dataset.lights[li])
            render_time += time.perf_counter() - start
            rays += image.shape[0] * image.shape[1]
            rows.append((float(vi), float(li),
                         psnr(image, truth), ssim(image, truth)))
    rows = np.array(rows)
    n = len(rows)
    return MetricReport(
        method=method,
        rows=rows,
        mean_psnr=float(rows[:, 2].mean()),
        mean_ssim=float(rows[:, 3].mean()),
        seconds_per_frame=render_time / n,
        rays_per_second=rays / render_time if render_time > 0 else 0.0,
        checkpoint=checkpoint,
        dataset_hash=dataset.scene_hash,
        notes=["LPIPS omitted (needs a pretrained perceptual network)"])


def evaluate_model(model, dataset, split: SplitSpec = None, checkpoint=""):
    def renderer(view_id, light_id, light_dir):
        res = render_view(model, dataset.cameras[view_id], light_dir)
        return res.image

    return evaluate_with(renderer, dataset, split,
                         method=f"model:{model.variant}",
                         checkpoint=checkpoint)


def evaluate_baseline(kind, dataset, split: SplitSpec = None):
    if kind not in BASELINES:
        raise ValueError(f"unknown baseline {kind!r}; choose from "
                         f"{BASELINES}")
    split = split or SplitSpec.from_dataset(dataset)

    def renderer(view_id, light_id, light_dir):
        if kind == "nearest":
            return nearest_light_baseline(dataset, view_id, light_dir, split)
        return barycentric_baseline(dataset, view_id, light_dir, split).image

    return evaluate_with(renderer, dataset, split,
                         method=f"baseline:{kind}")


# --------------------------------------------------------------------------
# report files

def write_report(report: MetricReport, path, timing_path=None):
    """Versioned delimited report; timing goes to the sidecar only, so the
    report itself is byte-identical across reruns."""
    path = Path(path)
    lines = [
        f"# relightlf metric report v{REPORT_VERSION}",
        "# color_space=linear,psnr_peak=1.0,"
        f"psnr_cap_db={PSNR_CAP_DB:g},ssim_window={SSIM_WINDOW},"
        f"ssim_sigma={SSIM_SIGMA:g},ssim_k1={SSIM_K1:g},ssim_k2={SSIM_K2:g}",
        f"# method={report.method},checkpoint={report.checkpoint},"
        f"dataset={report.dataset_hash}",
    ]
    for note in report.notes:
        lines.append(f"# note={note}")
    lines.append("view,light,psnr_db,ssim")
    for vi, li, p, s in report.rows:
        lines.append(f"{int(vi)},{int(li)},{p:.6f},{s:.6f}")
    lines.append(f"mean,,{report.mean_psnr:.6f},{report.mean_ssim:.6f}")
    path.write_text("\n".join(lines) + "\n")
    if timing_path is not None:
        Path(timing_path).write_text(
            f"seconds_per_frame={report.seconds_per_frame:.6f}\n"
            f"rays_per_second={report.rays_per_second:.1f}\n")
