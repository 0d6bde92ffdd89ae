"""Synthetic one-light-at-a-time (OLAT) datasets: a vectorized single-bounce
ray tracer over parametric scenes, camera and light rig construction, mirror
ball light calibration, and the on-disk dataset format.

Lighting is a single directional source of unit white irradiance per image;
shading is direct-only with binary shadow visibility, so an analytic oracle
exists for every pixel. Images are stored linear as PFM float maps.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .brdf import shade_directional
from .errors import CalibrationError, GeometryError, ManifestError
from .geometry import (
    CameraModel,
    Ray,
    TwoPlaneConfig,
    batch_rays_for_view,
    bounds_from_cameras,
    camera_from_dict,
    camera_to_dict,
    look_at_camera,
    pixel_directions,
    ray_from_pixel,
)
from .metrics import rec709_luminance
from .pfm import read_pfm, write_pfm
from .relight import fibonacci_sphere

Z_UV = -1.0
Z_ST = 0.0
EPS_HIT = 1e-6
SHADOW_BIAS = 1e-4
MANIFEST_VERSION = 1


# --------------------------------------------------------------------------
# materials and primitives

@dataclass
class ConstantAlbedo:
    color: tuple

    def at(self, points):
        return np.broadcast_to(np.asarray(self.color, dtype=np.float64),
                               (len(points), 3))

    def describe(self):
        return {"kind": "constant", "color": list(self.color)}


@dataclass
class CheckerAlbedo:
    """3D checker: cell parity of floor(p / scale) selects color_a/color_b."""

    scale: float
    color_a: tuple
    color_b: tuple

    def at(self, points):
        cells = np.floor(np.asarray(points, dtype=np.float64) / self.scale)
        parity = np.sum(cells, axis=1).astype(np.int64) % 2
        a = np.asarray(self.color_a, dtype=np.float64)
        b = np.asarray(self.color_b, dtype=np.float64)
        return np.where(parity[:, None] == 0, a, b)

    def describe(self):
        return {"kind": "checker", "scale": self.scale,
                "color_a": list(self.color_a), "color_b": list(self.color_b)}


@dataclass
class Material:
    albedo: object
    roughness: float

    def describe(self):
        return {"albedo": self.albedo.describe(), "roughness": self.roughness}


def _safe_div_dirs(d):
    return np.where(np.abs(d) < 1e-12, np.copysign(1e-12, d + 1e-300), d)


@dataclass
class Sphere:
    center: tuple
    radius: float
    material: Material

    def intersect(self, origins, dirs):
        oc = origins - np.asarray(self.center, dtype=np.float64)
        b = np.sum(oc * dirs, axis=1)
        c = np.sum(oc * oc, axis=1) - self.radius * self.radius
        disc = b * b - c
        root = np.sqrt(np.maximum(disc, 0.0))
        t_near = -b - root
        t_far = -b + root
        t = np.where(t_near > EPS_HIT, t_near, t_far)
        return np.where((disc > 0.0) & (t > EPS_HIT), t, np.inf)

    def normal_at(self, points):
        n = points - np.asarray(self.center, dtype=np.float64)
        return n / self.radius

    def describe(self):
        return {"kind": "sphere", "center": list(self.center),
                "radius": self.radius, "material": self.material.describe()}


@dataclass
class Plane:
    """One-sided plane through `point` with unit `normal`; `extent` bounds
    the in-plane distance from `point` (None = infinite)."""

    point: tuple
    normal: tuple
    material: Material
    extent: float = None

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64)
        self.normal = tuple(n / np.linalg.norm(n))

    def _basis(self):
        n = np.asarray(self.normal)
        helper = np.zeros(3)
        helper[np.argmin(np.abs(n))] = 1.0
        e1 = np.cross(n, helper)
        e1 /= np.linalg.norm(e1)
        return e1, np.cross(n, e1)

    def intersect(self, origins, dirs):
        n = np.asarray(self.normal, dtype=np.float64)
        p0 = np.asarray(self.point, dtype=np.float64)
        denom = dirs @ n
        safe = np.where(np.abs(denom) < 1e-12, 1.0, denom)
        t = ((p0 - origins) @ n) / safe
        ok = (np.abs(denom) >= 1e-12) & (t > EPS_HIT)
        if self.extent is not None:
            hit = origins + t[:, None] * dirs - p0
            e1, e2 = self._basis()
            ok &= (np.abs(hit @ e1) <= self.extent) \
                & (np.abs(hit @ e2) <= self.extent)
        return np.where(ok, t, np.inf)

    def normal_at(self, points):
        return np.broadcast_to(np.asarray(self.normal, dtype=np.float64),
                               (len(points), 3))

    def describe(self):
        return {"kind": "plane", "point": list(self.point),
                "normal": list(self.normal), "extent": self.extent,
                "material": self.material.describe()}


@dataclass
class Box:
    """Axis-aligned box between corners lo and hi."""

    lo: tuple
    hi: tuple
    material: Material

    def intersect(self, origins, dirs):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        inv = 1.0 / _safe_div_dirs(dirs)
        t1 = (lo - origins) * inv
        t2 = (hi - origins) * inv
        t_near = np.max(np.minimum(t1, t2), axis=1)
        t_far = np.min(np.maximum(t1, t2), axis=1)
        t = np.where(t_near > EPS_HIT, t_near, t_far)
        return np.where((t_near <= t_far) & (t > EPS_HIT), t, np.inf)

    def normal_at(self, points):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        q = (points - (lo + hi) / 2.0) / ((hi - lo) / 2.0)
        axis = np.argmax(np.abs(q), axis=1)
        normals = np.zeros_like(points)
        normals[np.arange(len(points)), axis] = np.sign(
            q[np.arange(len(points)), axis])
        return normals

    def describe(self):
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi),
                "material": self.material.describe()}


# --------------------------------------------------------------------------
# scene and renderer

@dataclass
class Scene:
    name: str
    primitives: list

    def describe(self):
        return {"name": self.name,
                "primitives": [p.describe() for p in self.primitives]}

    def content_hash(self):
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()

    def first_hit(self, origins, dirs):
        """Nearest intersection per ray.

        Returns (t, prim index or -1, hit points, unit normals); misses get
        t = inf and zeroed points/normals.
        """
        origins = np.asarray(origins, dtype=np.float64)
        dirs = np.asarray(dirs, dtype=np.float64)
        n = len(dirs)
        best_t = np.full(n, np.inf)
        best_p = np.full(n, -1, dtype=np.int64)
        for pi, prim in enumerate(self.primitives):
            t = prim.intersect(origins, dirs)
            closer = t < best_t
            best_t = np.where(closer, t, best_t)
            best_p = np.where(closer, pi, best_p)
        points = np.zeros((n, 3))
        normals = np.zeros((n, 3))
        hit = best_p >= 0
        points[hit] = origins[hit] + best_t[hit, None] * dirs[hit]
        for pi, prim in enumerate(self.primitives):
            mask = best_p == pi
            if mask.any():
                normals[mask] = prim.normal_at(points[mask])
        return best_t, best_p, points, normals

    def occluded(self, points, light_dir):
        """Binary visibility toward a directional light (surface -> light)."""
        dirs = np.broadcast_to(np.asarray(light_dir, dtype=np.float64),
                               points.shape)
        blocked = np.zeros(len(points), dtype=bool)
        for prim in self.primitives:
            blocked |= np.isfinite(prim.intersect(points, dirs))
        return blocked

    def shade(self, origins, dirs, light_dir, irradiance=(1.0, 1.0, 1.0)):
        """Direct radiance per ray; misses and shadowed points are black."""
        light_dir = np.asarray(light_dir, dtype=np.float64)
        t, prim, points, normals = self.first_hit(origins, dirs)
        colors = np.zeros((len(dirs), 3))
        hit = prim >= 0
        if not hit.any():
            return colors
        lit = hit.copy()
        lit[hit] = ~self.occluded(points[hit] + SHADOW_BIAS * normals[hit],
                                  light_dir)
        for pi, pr in enumerate(self.primitives):
            mask = lit & (prim == pi)
            if not mask.any():
                continue
            sample = (normals[mask], pr.material.albedo.at(points[mask]),
                      pr.material.roughness)
            colors[mask] = shade_directional(sample, -np.asarray(dirs)[mask],
                                             light_dir, irradiance)
        return colors


def trace_pixel(scene: Scene, ray: Ray, light_dir, irradiance=(1.0, 1.0, 1.0)):
    """Radiance along one ray (convenience wrapper over Scene.shade)."""
    return scene.shade(ray.origin[None, :], ray.direction[None, :],
                       light_dir, irradiance)[0]


def render_view(scene: Scene, camera: CameraModel, light_dir,
                irradiance=(1.0, 1.0, 1.0)):
    """(H, W, 3) float32 linear render under one directional light."""
    dirs = pixel_directions(camera)
    origins = np.broadcast_to(camera.center, dirs.shape)
    colors = scene.shade(origins, dirs, light_dir, irradiance)
    return colors.reshape(camera.height, camera.width, 3).astype(np.float32)


# --------------------------------------------------------------------------
# rigs

def _rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def camera_grid(n_per_axis, spacing_deg, radius, width, height, focal_px,
                target=(0.0, 0.0, 0.0)):
    """n x n look-at cameras on the front (z < 0) hemisphere.

    Grid axes are elevation (outer index) and azimuth (inner); cameras in
    the same column differ by exactly `spacing_deg`, as do same-row pairs on
    the equator row.
    """
    if n_per_axis < 1 or spacing_deg <= 0.0:
        raise GeometryError("need n >= 1 cameras and positive spacing")
    half = (n_per_axis - 1) / 2.0 * spacing_deg
    if half >= 90.0:
        raise GeometryError("camera grid leaves the front hemisphere")
    target = np.asarray(target, dtype=np.float64)
    offsets = (np.arange(n_per_axis) - (n_per_axis - 1) / 2.0) * spacing_deg
    base = np.array([0.0, 0.0, -radius])
    cams = []
    for el in offsets:
        for az in offsets:
            pos = target + _rot_y(np.radians(az)) @ _rot_x(np.radians(el)) @ base
            cams.append(look_at_camera(pos, target, width, height, focal_px))
    return cams


def light_sphere_grid(spacing_deg=None, hemisphere=True, count=None):
    """Quasi-uniform directional light rig (surface -> light convention).

    Sized either by an explicit `count` or by `spacing_deg`, where the
    full-sphere count is 2 / (1 - cos(spacing/2)) (one light per spherical
    cap of that angular radius). With `hemisphere`, only the dome above the
    horizon (y >= 0) is kept at unchanged density: a ground plane occludes
    every below-horizon light, so only dome lights can illuminate a
    grounded scene. The lattice's uniform axis is mapped to y so the dome
    keeps exactly half of an even full-sphere count.
    """
    if count is None:
        if spacing_deg is None or not 0.0 < spacing_deg <= 90.0:
            raise ValueError("light spacing must be in (0, 90] degrees")
        cap = 1.0 - np.cos(np.radians(spacing_deg) / 2.0)
        n_full = max(int(round(2.0 / cap)), 2)
    else:
        if count < 1:
            raise ValueError("need at least one light")
        n_full = 2 * count if hemisphere else count
    lattice = fibonacci_sphere(n_full)
    dirs = np.stack([lattice[:, 0], lattice[:, 2], lattice[:, 1]], axis=1)
    if hemisphere:
        dirs = dirs[dirs[:, 1] >= 0.0]
    return dirs


def make_split(n_views, n_lights, holdout_views, holdout_lights, seed):
    """Seeded choice of held-out view/light ids, recorded in the manifest."""
    if n_views - holdout_views < 1:
        raise ValueError("need at least one training view")
    if n_lights - holdout_lights < 2:
        raise ValueError("need at least two training lights")
    rng = np.random.default_rng(seed)
    views = sorted(int(i) for i in
                   rng.choice(n_views, size=holdout_views, replace=False))
    lights = sorted(int(i) for i in
                    rng.choice(n_lights, size=holdout_lights, replace=False))
    return {"held_out_views": views, "held_out_lights": lights,
            "seed": int(seed)}


# --------------------------------------------------------------------------
# dataset on disk

@dataclass
class OLATDataset:
    scene_name: str
    scene_hash: str
    seed: int
    cameras: list
    lights: np.ndarray
    two_plane: TwoPlaneConfig
    images: dict           # (camera id, light id) -> (H, W, 3) float32
    split: dict = field(default_factory=dict)
    root: Path = None

    @property
    def resolution(self):
        cam = self.cameras[0]
        return cam.width, cam.height

    def image(self, camera_id, light_id):
        return self.images[(camera_id, light_id)]


def _image_name(camera_id, light_id):
    return f"images/cam{camera_id:03d}_light{light_id:03d}.pfm"


def save_dataset(dataset: OLATDataset, path):
    path = Path(path)
    (path / "images").mkdir(parents=True, exist_ok=True)
    records = []
    for ci in range(len(dataset.cameras)):
        for li in range(len(dataset.lights)):
            rel = _image_name(ci, li)
            write_pfm(path / rel, dataset.images[(ci, li)])
            records.append({"camera": ci, "light": li, "path": rel})
    manifest = {
        "format_version": MANIFEST_VERSION,
        "scene": dataset.scene_name,
        "scene_hash": dataset.scene_hash,
        "seed": dataset.seed,
        "resolution": list(dataset.resolution),
        "two_plane": dataset.two_plane.to_dict(),
        "cameras": [{"id": i, **camera_to_dict(cam)}
                    for i, cam in enumerate(dataset.cameras)],
        "lights": [{"id": i, "direction": [float(x) for x in d]}
                   for i, d in enumerate(dataset.lights)],
        "images": records,
        "split": dataset.split,
    }
    with open(path / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    dataset.root = path


_REQUIRED_MANIFEST_KEYS = ("format_version", "scene", "seed", "two_plane",
                           "cameras", "lights", "images", "split")


def load_dataset(path):
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise ManifestError(f"no manifest.json under {path}")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{manifest_path}: {exc}") from exc
    missing = [k for k in _REQUIRED_MANIFEST_KEYS if k not in manifest]
    if missing:
        raise ManifestError(f"{manifest_path}: missing keys {missing}")
    if manifest["format_version"] != MANIFEST_VERSION:
        raise ManifestError(
            f"unsupported manifest version {manifest['format_version']}")
    cameras = [camera_from_dict(c) for c in manifest["cameras"]]
    lights = np.array([l["direction"] for l in manifest["lights"]],
                      dtype=np.float64)
    images = {}
    for rec in manifest["images"]:
        key = (rec["camera"], rec["light"])
        if key in images:
            raise ManifestError(
                f"duplicate image record for camera {key[0]} light {key[1]}")
        img_path = path / rec["path"]
        if not img_path.exists():
            raise ManifestError(
                f"missing image file for camera {key[0]} light {key[1]}: "
                f"{img_path}")
        images[key] = read_pfm(img_path)
    expected = len(cameras) * len(lights)
    if len(images) != expected:
        raise ManifestError(
            f"expected {expected} images, manifest lists {len(images)}")
    return OLATDataset(
        scene_name=manifest["scene"],
        scene_hash=manifest.get("scene_hash", ""),
        seed=manifest["seed"],
        cameras=cameras,
        lights=lights,
        two_plane=TwoPlaneConfig.from_dict(manifest["two_plane"]),
        images=images,
        split=manifest["split"],
        root=path,
    )


def dataset_equal(a: OLATDataset, b: OLATDataset):
    if (a.scene_name != b.scene_name or a.seed != b.seed
            or a.split != b.split or len(a.cameras) != len(b.cameras)
            or not np.array_equal(a.lights, b.lights)
            or not np.array_equal(a.two_plane.bounds, b.two_plane.bounds)):
        return False
    for ca, cb in zip(a.cameras, b.cameras):
        if not (np.array_equal(ca.intrinsics, cb.intrinsics)
                and np.array_equal(ca.rotation, cb.rotation)
                and np.array_equal(ca.translation, cb.translation)):
            return False
    if set(a.images) != set(b.images):
        return False
    return all(np.array_equal(a.images[k], b.images[k]) for k in a.images)


def generate_dataset(scene: Scene, cameras, lights, seed, out_dir,
                     holdout_views=1, holdout_lights=3):
    """Render every (camera, light) pair and write the dataset directory.

    The default split holds out one view and three lights for testing,
    mirroring the usual protocol at small scale; evaluation pairs each
    held-out view with each held-out light.
    """
    if not cameras or len(lights) == 0:
        raise ValueError("need at least one camera and one light")
    bounds = bounds_from_cameras(cameras, Z_UV, Z_ST)
    cfg = TwoPlaneConfig(z_uv=Z_UV, z_st=Z_ST, bounds=bounds)
    split = make_split(len(cameras), len(lights), holdout_views,
                       holdout_lights, seed)
    images = {}
    for ci, cam in enumerate(cameras):
        for li, light in enumerate(lights):
            images[(ci, li)] = render_view(scene, cam, light)
    dataset = OLATDataset(scene_name=scene.name,
                          scene_hash=scene.content_hash(), seed=seed,
                          cameras=cameras, lights=np.asarray(lights),
                          two_plane=cfg, images=images, split=split)
    save_dataset(dataset, out_dir)
    return dataset


def training_samples(dataset: OLATDataset, exclude_views=(),
                     exclude_lights=()):
    """Flattened per-pixel samples for training.

    Returns a dict of aligned arrays: ray4d (N,4), view (N,3, surface ->
    camera), light (N,3), color (N,3), camera_id (N,), light_id (N,).
    Pixels whose rays fall outside the parameterization bounds are dropped.
    """
    exclude_views = set(exclude_views)
    exclude_lights = set(exclude_lights)
    ray_chunks, view_chunks, light_chunks = [], [], []
    color_chunks, cam_chunks, light_id_chunks = [], [], []
    for ci, cam in enumerate(dataset.cameras):
        if ci in exclude_views:
            continue
        _, ray4d, valid = batch_rays_for_view(cam, dataset.two_plane)
        dirs = pixel_directions(cam)
        rays = ray4d[valid].astype(np.float32)
        views = (-dirs[valid]).astype(np.float32)
        for li in range(len(dataset.lights)):
            if li in exclude_lights:
                continue
            img = dataset.images[(ci, li)].reshape(-1, 3)
            ray_chunks.append(rays)
            view_chunks.append(views)
            light_chunks.append(np.broadcast_to(
                dataset.lights[li].astype(np.float32), rays[:, :3].shape))
            color_chunks.append(img[valid].astype(np.float32))
            cam_chunks.append(np.full(len(rays), ci, dtype=np.int32))
            light_id_chunks.append(np.full(len(rays), li, dtype=np.int32))
    if not ray_chunks:
        raise ValueError("no training samples left after exclusions")
    return {
        "ray4d": np.concatenate(ray_chunks),
        "view": np.concatenate(view_chunks),
        "light": np.ascontiguousarray(np.concatenate(light_chunks)),
        "color": np.concatenate(color_chunks),
        "camera_id": np.concatenate(cam_chunks),
        "light_id": np.concatenate(light_id_chunks),
    }


# --------------------------------------------------------------------------
# mirror-ball light calibration

@dataclass
class CalibrationResult:
    direction: np.ndarray  # unit, surface -> light
    confidence: str        # "ok" or "low_grazing"
    spot_px: tuple         # sub-pixel highlight location


def chrome_ball_light_dir(image, ball_cx, ball_cy, ball_r,
                          camera: CameraModel):
    """Recover a directional light from the highlight on a mirror ball.

    The ball's projected disc (center, radius in pixels) defines a cone from
    the camera; placing the tangent sphere at unit distance fixes its
    geometry up to scale, which leaves reflection directions unchanged. The
    highlight is the luminance-weighted centroid of the top 0.1% brightest
    disc pixels; the returned direction is the mirror reflection of the view
    ray at that surface point.
    """
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w]
    px = xs + 0.5
    py = ys + 0.5
    disc = (px - ball_cx) ** 2 + (py - ball_cy) ** 2 <= ball_r ** 2
    if not disc.any():
        raise CalibrationError("ball disc contains no pixels")
    lum = rec709_luminance(image)
    disc_lum = lum[disc]
    if float(disc_lum.max()) <= 1e-8:
        raise CalibrationError("no pixel above the luminance floor")
    cutoff = np.quantile(disc_lum, 0.999)
    top = disc & (lum >= cutoff) & (lum > 0.0)
    weights = lum[top]
    spot_x = float(np.sum(px[top] * weights) / np.sum(weights))
    spot_y = float(np.sum(py[top] * weights) / np.sum(weights))
    rim_dist = np.hypot(spot_x - ball_cx, spot_y - ball_cy) / ball_r
    confidence = "low_grazing" if rim_dist > 0.85 else "ok"

    d_center = ray_from_pixel(camera, (ball_cx, ball_cy)).direction
    d_rim = ray_from_pixel(camera, (ball_cx + ball_r, ball_cy)).direction
    cos_b = float(np.clip(d_center @ d_rim, -1.0, 1.0))
    rho = np.sqrt(max(1.0 - cos_b * cos_b, 1e-12))  # ball radius at distance 1
    center = camera.center + d_center

    d_spot = ray_from_pixel(camera, (spot_x, spot_y)).direction
    oc = camera.center - center
    b = float(oc @ d_spot)
    c = float(oc @ oc) - rho * rho
    disc_term = max(b * b - c, 0.0)
    t = -b - np.sqrt(disc_term)
    point = camera.center + t * d_spot
    normal = (point - center) / rho
    normal /= np.linalg.norm(normal)
    view = -d_spot
    light = 2.0 * float(normal @ view) * normal - view
    return CalibrationResult(light / np.linalg.norm(light), confidence,
                             (spot_x, spot_y))


# --------------------------------------------------------------------------
# scene registry

def _sphere_scene():
    # glossy saturated sphere over a bright wide ground: the sharp specular
    # spots move farther than their width between neighboring rig lights and
    # the bright plane makes the swept cast shadow a large fraction of the
    # signal, so light interpolation ghosts both while the static checkers
    # stay cheap to fit
    ball = Sphere((0.0, 0.0, 0.0), 0.3, Material(
        CheckerAlbedo(0.45, (0.85, 0.3, 0.2), (0.2, 0.4, 0.85)), 0.25))
    ground = Plane((0.0, -0.5, 0.0), (0.0, 1.0, 0.0), Material(
        CheckerAlbedo(1.2, (0.9, 0.88, 0.82), (0.62, 0.65, 0.7)), 0.4),
        extent=3.0)
    return Scene("sphere", [ball, ground])


def _chrome_ball_scene():
    # zero diffuse albedo: on a mirror probe any diffuse term would out-shine
    # the sub-pixel gloss lobe and drag the highlight centroid off the mirror
    # point; roughness widens the lobe to a few pixels so it is localizable
    ball = Sphere((0.0, 0.0, 0.0), 0.35, Material(
        ConstantAlbedo((0.0, 0.0, 0.0)), 0.05))
    return Scene("chrome_ball", [ball])


def _mixed_scene():
    ball = Sphere((-0.25, -0.1, 0.1), 0.28, Material(
        CheckerAlbedo(0.18, (0.85, 0.35, 0.2), (0.15, 0.5, 0.8)), 0.2))
    block = Box((0.05, -0.5, -0.25), (0.55, 0.0, 0.25), Material(
        ConstantAlbedo((0.8, 0.65, 0.3)), 0.5))
    ground = Plane((0.0, -0.5, 0.0), (0.0, 1.0, 0.0), Material(
        CheckerAlbedo(0.4, (0.7, 0.7, 0.7), (0.25, 0.25, 0.3)), 0.8),
        extent=2.5)
    return Scene("mixed", [ball, block, ground])


SCENES = {
    "sphere": _sphere_scene,
    "chrome_ball": _chrome_ball_scene,
    "mixed": _mixed_scene,
}


def make_scene(name):
    if name not in SCENES:
        raise ValueError(f"unknown scene {name!r}; choose from "
                         f"{sorted(SCENES)}")
    return SCENES[name]()
