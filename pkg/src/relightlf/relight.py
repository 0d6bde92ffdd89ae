"""Environment-map relighting: quasi-uniform direction lattices,
equirectangular map sampling with equal solid-angle weights, and linear
superposition of one-light-at-a-time renders.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

log = logging.getLogger(__name__)

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fibonacci_sphere(n):
    """n quasi-uniform unit directions: z_k = 1 - (2k+1)/n, azimuth k times
    the golden angle. Deterministic."""
    if n < 1:
        raise ValueError("need at least one direction")
    k = np.arange(n, dtype=np.float64)
    z = 1.0 - (2.0 * k + 1.0) / n
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    phi = k * _GOLDEN_ANGLE
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


@dataclass
class EnvironmentMap:
    """Equirectangular (lat-long) radiance map, linear RGB, y-up world.

    Row 0 is the pole toward +y; azimuth runs around the y axis from +x
    toward +z. `orientation` rotates the map about the vertical axis.
    """

    data: np.ndarray
    orientation: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ShapeError("environment map must be (H, W, 3)")
        h, w = self.data.shape[:2]
        if w != 2 * h:
            raise ShapeError(f"lat-long map needs W = 2H, got {w}x{h}")
        if not np.all(np.isfinite(self.data)) or np.any(self.data < 0.0):
            raise ValueError("environment radiance must be finite and >= 0")

    def sample(self, directions):
        """Bilinear radiance lookup for unit directions (..., 3).

        Azimuth wraps; latitude clamps at the poles.
        """
        d = np.asarray(directions, dtype=np.float64)
        h, w = self.data.shape[:2]
        theta = np.arccos(np.clip(d[..., 1], -1.0, 1.0))
        phi = np.arctan2(d[..., 2], d[..., 0]) - self.orientation
        row = theta / np.pi * h - 0.5
        col = (phi / (2.0 * np.pi)) % 1.0 * w - 0.5
        r0 = np.floor(row).astype(int)
        c0 = np.floor(col).astype(int)
        fr = row - r0
        fc = col - c0
        r0c = np.clip(r0, 0, h - 1)
        r1c = np.clip(r0 + 1, 0, h - 1)
        c0w = c0 % w
        c1w = (c0 + 1) % w
        top = (self.data[r0c, c0w] * (1.0 - fc[..., None])
               + self.data[r0c, c1w] * fc[..., None])
        bot = (self.data[r1c, c0w] * (1.0 - fc[..., None])
               + self.data[r1c, c1w] * fc[..., None])
        return top * (1.0 - fr[..., None]) + bot * fr[..., None]


@dataclass
class OLATSweep:
    """Stack of single-light renders aligned with their light directions."""

    directions: np.ndarray  # (n, 3) unit
    stack: np.ndarray       # (n, H, W, 3)

    def __post_init__(self):
        self.directions = np.asarray(self.directions, dtype=np.float64)
        self.stack = np.asarray(self.stack)
        if len(self.directions) != len(self.stack):
            raise ShapeError("stack length must match direction count")


def olat_sweep(render_fn, directions):
    """Render one image per direction with render_fn(direction) -> image."""
    directions = np.asarray(directions, dtype=np.float64)
    images = [np.asarray(render_fn(d)) for d in directions]
    return OLATSweep(directions, np.stack(images, axis=0))


def envmap_weights(env: EnvironmentMap, directions):
    """Per-direction RGB weights: bilinear radiance times the equal
    solid-angle share 4*pi/n. A constant unit-radiance map therefore sums
    to 4*pi over any lattice size."""
    directions = np.asarray(directions, dtype=np.float64)
    n = len(directions)
    if n == 0:
        raise ValueError("need at least one direction")
    return env.sample(directions) * (4.0 * np.pi / n)


def mask_back_hemisphere(weights, directions):
    """Zero the weights of directions behind the scene (z > 0).

    The trained field only represents lighting from the camera side; energy
    assigned to back directions is dropped, with a logged warning when any
    weight was nonzero there.
    """
    weights = np.asarray(weights, dtype=np.float64).copy()
    back = np.asarray(directions)[:, 2] > 0.0
    dropped = np.count_nonzero(np.any(weights[back] != 0.0, axis=-1))
    if dropped:
        log.warning("zeroing %d back-hemisphere light weights", dropped)
    weights[back] = 0.0
    return weights


def relight_hdri(sweep: OLATSweep, weights):
    """Weighted superposition of the OLAT stack, clamped to >= 0.

    Accumulation order is fixed (ascending direction index over nonzero
    weights) so results are deterministic; a single unit weight reproduces
    that stack entry bit-exactly.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(sweep.stack), 3):
        raise ShapeError(f"expected weights {(len(sweep.stack), 3)}, "
                         f"got {weights.shape}")
    out = np.zeros(sweep.stack.shape[1:], dtype=np.float64)
    for i in np.flatnonzero(np.any(weights != 0.0, axis=1)):
        out += weights[i] * sweep.stack[i]
    return np.maximum(out, 0.0)


def tone_map(image, exposure=1.0):
    """Exposure multiply plus sRGB transfer, for display copies only."""
    x = np.clip(np.asarray(image, dtype=np.float64) * exposure, 0.0, 1.0)
    return np.where(x <= 0.0031308, 12.92 * x,
                    1.055 * np.power(x, 1.0 / 2.4) - 0.055)
