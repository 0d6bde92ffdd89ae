"""Pinhole cameras and the two-plane ray parameterization.

World convention: right-handed, scene centered at the origin, cameras on the
z < 0 hemisphere looking along +z. A ray is identified by the (x, y)
coordinates of its intersections with two parallel planes z = z_uv (near,
camera side) and z = z_st (through the scene volume), each mapped affinely
into [-1, 1] by per-axis bounds.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRayError, GeometryError, OutOfBoundsError

EPS_PARALLEL = 1e-9


@dataclass
class CameraModel:
    """Calibrated pinhole camera. `rotation` maps world to camera coordinates
    (x_cam = R @ x_world + t); the camera looks along its +z axis."""

    intrinsics: np.ndarray  # 3x3, pixels
    rotation: np.ndarray    # 3x3, world -> camera
    translation: np.ndarray  # 3-vector
    width: int
    height: int

    def __post_init__(self):
        self.intrinsics = np.asarray(self.intrinsics, dtype=np.float64)
        self.rotation = np.asarray(self.rotation, dtype=np.float64)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if self.intrinsics.shape != (3, 3) or self.rotation.shape != (3, 3):
            raise GeometryError("camera matrices must be 3x3")
        if not np.allclose(self.rotation.T @ self.rotation, np.eye(3), atol=1e-9):
            raise GeometryError("camera rotation is not orthonormal")
        if self.intrinsics[0, 0] <= 0 or self.intrinsics[1, 1] <= 0:
            raise GeometryError("focal entries must be positive")
        if abs(self.intrinsics[0, 1]) > 1e-12:
            raise GeometryError("intrinsics with skew are not supported")

    @property
    def center(self):
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation

    @property
    def forward(self):
        """Optical axis direction in world coordinates."""
        return self.rotation.T @ np.array([0.0, 0.0, 1.0])


def camera_to_dict(camera: CameraModel):
    return {"intrinsics": camera.intrinsics.tolist(),
            "rotation": camera.rotation.tolist(),
            "translation": camera.translation.tolist(),
            "width": camera.width,
            "height": camera.height}


def camera_from_dict(d) -> CameraModel:
    return CameraModel(np.array(d["intrinsics"], dtype=np.float64),
                       np.array(d["rotation"], dtype=np.float64),
                       np.array(d["translation"], dtype=np.float64),
                       int(d["width"]), int(d["height"]))


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray  # unit length

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        self.direction = np.asarray(self.direction, dtype=np.float64).reshape(3)
        n = np.linalg.norm(self.direction)
        if abs(n - 1.0) > 1e-9:
            if n < 1e-12:
                raise GeometryError("ray direction has zero length")
            self.direction = self.direction / n


@dataclass
class TwoPlaneConfig:
    """Placement of the uv/st planes plus per-axis normalization bounds.

    `bounds` is a (4, 2) array of (min, max) for the raw u, v, s, t
    intersection coordinates; the affine map sends [min, max] to [-1, 1].
    """

    z_uv: float = -1.0
    z_st: float = 0.0
    bounds: np.ndarray = None

    def __post_init__(self):
        if self.bounds is None:
            self.bounds = np.array([[-1.0, 1.0]] * 4)
        self.bounds = np.asarray(self.bounds, dtype=np.float64).reshape(4, 2)
        if self.z_uv == self.z_st:
            raise GeometryError("uv and st planes must be distinct")
        if np.any(self.bounds[:, 0] >= self.bounds[:, 1]):
            raise GeometryError("bounds must satisfy min < max per axis")

    def normalize(self, raw):
        """Map raw intersection coords (..., 4) into [-1, 1]^4."""
        lo = self.bounds[:, 0]
        hi = self.bounds[:, 1]
        return 2.0 * (np.asarray(raw, dtype=np.float64) - lo) / (hi - lo) - 1.0

    def denormalize(self, norm):
        """Inverse of :meth:`normalize`."""
        lo = self.bounds[:, 0]
        hi = self.bounds[:, 1]
        return (np.asarray(norm, dtype=np.float64) + 1.0) * 0.5 * (hi - lo) + lo

    def to_dict(self):
        return {"z_uv": self.z_uv, "z_st": self.z_st, "bounds": self.bounds.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(z_uv=d["z_uv"], z_st=d["z_st"], bounds=np.array(d["bounds"]))


def ray_from_pixel(camera: CameraModel, pixel) -> Ray:
    """Back-project an image location to a world ray through the camera center.

    `pixel` is an (x, y) position in pixel units; pass (i + 0.5, j + 0.5) for
    the center of integer pixel (i, j).
    """
    px, py = float(pixel[0]), float(pixel[1])
    if not (0.0 <= px < camera.width and 0.0 <= py < camera.height):
        raise GeometryError(f"pixel ({px}, {py}) outside image "
                            f"[0,{camera.width})x[0,{camera.height})")
    k = camera.intrinsics
    d_cam = np.array([(px - k[0, 2]) / k[0, 0], (py - k[1, 2]) / k[1, 1], 1.0])
    d_world = camera.rotation.T @ d_cam
    d_world /= np.linalg.norm(d_world)
    return Ray(camera.center, d_world)


def pixel_directions(camera: CameraModel):
    """Unit world directions for every pixel center, row-major (H*W, 3)."""
    k = camera.intrinsics
    xs = (np.arange(camera.width) + 0.5 - k[0, 2]) / k[0, 0]
    ys = (np.arange(camera.height) + 0.5 - k[1, 2]) / k[1, 1]
    gx, gy = np.meshgrid(xs, ys)  # row-major: y (rows) outer
    d_cam = np.stack([gx, gy, np.ones_like(gx)], axis=-1).reshape(-1, 3)
    d_world = d_cam @ camera.rotation  # == (R^T @ d_cam^T)^T
    d_world /= np.linalg.norm(d_world, axis=1, keepdims=True)
    return d_world


def two_plane_param(ray: Ray, cfg: TwoPlaneConfig):
    """Parameterize a single ray as normalized (u, v, s, t) in [-1, 1]^4."""
    raw, ok = _intersect_planes(ray.origin[None, :], ray.direction[None, :], cfg)
    if not ok[0]:
        dz = ray.direction[2]
        if abs(dz) < EPS_PARALLEL:
            raise DegenerateRayError("ray parallel to the uv/st planes")
        raise OutOfBoundsError("ray intersections outside normalization bounds")
    return cfg.normalize(raw[0])


def _intersect_planes(origins, dirs, cfg, forward_only=False):
    """Raw (u, v, s, t) plane intersections for (N, 3) origins/dirs.

    Returns (raw (N, 4), ok (N,) bool). Rays parallel to the planes or with
    intersections outside cfg.bounds are marked not-ok; their raw values are
    left as computed (callers must mask). With forward_only, crossings behind
    the ray origin are rejected as well.
    """
    dz = dirs[:, 2]
    ok = np.abs(dz) >= EPS_PARALLEL
    safe_dz = np.where(ok, dz, 1.0)
    t_uv = (cfg.z_uv - origins[:, 2]) / safe_dz
    t_st = (cfg.z_st - origins[:, 2]) / safe_dz
    uv = origins[:, :2] + t_uv[:, None] * dirs[:, :2]
    st = origins[:, :2] + t_st[:, None] * dirs[:, :2]
    raw = np.concatenate([uv, st], axis=1)
    inside = np.all((raw >= cfg.bounds[:, 0]) & (raw <= cfg.bounds[:, 1]), axis=1)
    if forward_only:
        inside = inside & (t_uv >= 0.0) & (t_st >= 0.0)
    return raw, ok & inside


def batch_rays_for_view(camera: CameraModel, cfg: TwoPlaneConfig):
    """Per-pixel ray parameterization for a whole view.

    Returns (pixels (N, 2) int row-major, ray4d (N, 4), valid (N,) bool).
    Invalid entries (parallel or out of bounds) are flagged, not dropped;
    their ray4d rows are zeroed.
    """
    dirs = pixel_directions(camera)
    origins = np.broadcast_to(camera.center, dirs.shape)
    raw, ok = _intersect_planes(origins, dirs, cfg)
    ray4d = np.where(ok[:, None], cfg.normalize(raw), 0.0)
    jj, ii = np.meshgrid(np.arange(camera.height), np.arange(camera.width),
                         indexing="ij")
    pixels = np.stack([ii.ravel(), jj.ravel()], axis=1)
    return pixels, ray4d, ok


def ray_from_ray4d(ray4d, cfg: TwoPlaneConfig) -> Ray:
    """Reconstruct the 3D ray through the two unnormalized plane points."""
    raw = cfg.denormalize(np.asarray(ray4d, dtype=np.float64).reshape(4))
    p_uv = np.array([raw[0], raw[1], cfg.z_uv])
    p_st = np.array([raw[2], raw[3], cfg.z_st])
    d = p_st - p_uv
    if cfg.z_st < cfg.z_uv:
        d = -d  # keep rays advancing toward +z
    return Ray(p_uv, d / np.linalg.norm(d))


def look_at_camera(position, target, width, height, focal_px, up=(0.0, 1.0, 0.0)):
    """Build a CameraModel at `position` looking at `target`.

    Image x follows forward x up, image y points "down" so that pixel rows
    increase downward in world space.
    """
    position = np.asarray(position, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    up = np.asarray(up, dtype=np.float64)
    fwd = target - position
    n = np.linalg.norm(fwd)
    if n < 1e-12:
        raise GeometryError("camera position coincides with look-at target")
    fwd = fwd / n
    x_c = np.cross(fwd, up)
    nx = np.linalg.norm(x_c)
    if nx < 1e-9:
        raise GeometryError("view direction parallel to the up vector")
    x_c = x_c / nx
    y_c = np.cross(fwd, x_c)
    y_c /= np.linalg.norm(y_c)
    rot = np.stack([x_c, y_c, fwd], axis=0)
    k = np.array([[focal_px, 0.0, width / 2.0],
                  [0.0, focal_px, height / 2.0],
                  [0.0, 0.0, 1.0]])
    return CameraModel(k, rot, -rot @ position, int(width), int(height))


def bounds_from_cameras(cameras, z_uv, z_st, pad=0.05):
    """Axis-aligned extent of all pixel-ray plane intersections, padded.

    The returned (4, 2) array defines the dataset-wide normalization so that
    every training ray lands inside [-1, 1]^4.
    """
    cfg_raw = TwoPlaneConfig(z_uv=z_uv, z_st=z_st,
                             bounds=np.array([[-1e30, 1e30]] * 4))
    lo = np.full(4, np.inf)
    hi = np.full(4, -np.inf)
    for cam in cameras:
        dirs = pixel_directions(cam)
        origins = np.broadcast_to(cam.center, dirs.shape)
        raw, ok = _intersect_planes(origins, dirs, cfg_raw, forward_only=True)
        if not np.any(ok):
            continue
        lo = np.minimum(lo, raw[ok].min(axis=0))
        hi = np.maximum(hi, raw[ok].max(axis=0))
    if not np.all(np.isfinite(lo)):
        raise GeometryError("no camera ray intersects the parameterization planes")
    span = np.maximum(hi - lo, 1e-9)
    return np.stack([lo - pad * span, hi + pad * span], axis=1)
