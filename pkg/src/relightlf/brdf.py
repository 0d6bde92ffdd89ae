"""Microfacet shading model: GGX-style distribution, Schlick-exponential
Fresnel, and a Smith-style geometry term.

All functions broadcast over leading batch dimensions; vectors occupy the
trailing axis of size 3. The same kernel serves as the self-supervision
target during training and as the shading routine of the synthetic data
generator.
"""

from dataclasses import dataclass, field

import numpy as np

R_MIN = 0.01       # roughness floor; keeps the distribution term finite
F0 = 0.05          # Fresnel reflectance at normal incidence
BACKFACE_EPS = 1e-4  # cosines at or below this count as back-facing
_FRESNEL_C1 = -5.55473
_FRESNEL_C2 = -6.98316


@dataclass
class SVBRDFSample:
    """Per-point reflectance: shading normal, diffuse albedo, roughness."""

    normal: np.ndarray
    albedo: np.ndarray
    roughness: float = 0.5

    def __post_init__(self):
        self.normal = np.asarray(self.normal, dtype=np.float64)
        self.albedo = np.asarray(self.albedo, dtype=np.float64)


@dataclass
class ShadingGeometry:
    view: np.ndarray   # surface -> camera, unit
    light: np.ndarray  # surface -> light, unit
    half: np.ndarray = field(default=None)

    def __post_init__(self):
        self.view = np.asarray(self.view, dtype=np.float64)
        self.light = np.asarray(self.light, dtype=np.float64)
        if self.half is None:
            self.half = half_vector(self.view, self.light)


def _dot(a, b):
    return np.sum(np.asarray(a, dtype=np.float64) * np.asarray(b, dtype=np.float64),
                  axis=-1)


def normalize(v, eps=1e-6):
    """v / max(||v||, eps), broadcasting over leading axes."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.maximum(n, eps)


def half_vector(v, l):
    return normalize(np.asarray(v, dtype=np.float64) + np.asarray(l, dtype=np.float64))


def ndf_ggx(h, normal, roughness):
    """Microfacet normal distribution: a^2 / (pi ((N.h)^2 (a^2-1) + 1)^2),
    with a = roughness^2 and roughness clamped to [R_MIN, 1]."""
    r = np.clip(np.asarray(roughness, dtype=np.float64), R_MIN, 1.0)
    a = r * r
    a2 = a * a
    nh = _dot(normal, h)
    q = nh * nh * (a2 - 1.0) + 1.0
    return a2 / (np.pi * q * q)


def fresnel_schlick_approx(v, h):
    """F0 + (1 - F0) * 2^((c1 (v.h) + c2)(v.h)) with the exponential-form
    Schlick constants."""
    vh = _dot(v, h)
    return F0 + (1.0 - F0) * np.exp2((_FRESNEL_C1 * vh + _FRESNEL_C2) * vh)


def geometry_smith(l, v, normal, roughness):
    """Product of the two masking factors x / (x (1-k) + k) with
    k = (roughness + 1)^2 / 8."""
    r = np.clip(np.asarray(roughness, dtype=np.float64), R_MIN, 1.0)
    k = (r + 1.0) ** 2 / 8.0
    nv = _dot(normal, v)
    nl = _dot(normal, l)
    gv = nv / (nv * (1.0 - k) + k)
    gl = nl / (nl * (1.0 - k) + k)
    return gv * gl


def microfacet_eval(sample, v, l):
    """Full shading model: albedo/pi + D F G / (4 (N.l)(N.v)) per channel.

    Back-facing configurations (N.l or N.v <= BACKFACE_EPS) return zero.
    The normal is re-normalized internally; albedo passes through unchanged.
    Accepts an SVBRDFSample or a (normal, albedo, roughness) tuple of arrays.
    """
    if isinstance(sample, SVBRDFSample):
        n_in, albedo, rough = sample.normal, sample.albedo, sample.roughness
    else:
        n_in, albedo, rough = sample
    v = np.asarray(v, dtype=np.float64)
    l = np.asarray(l, dtype=np.float64)
    albedo = np.asarray(albedo, dtype=np.float64)
    if not (np.all(np.isfinite(n_in)) and np.all(np.isfinite(v))
            and np.all(np.isfinite(l)) and np.all(np.isfinite(albedo))):
        raise ValueError("non-finite shading input")
    n = normalize(n_in)
    nl = _dot(n, l)
    nv = _dot(n, v)
    facing = (nl > BACKFACE_EPS) & (nv > BACKFACE_EPS)

    h = half_vector(v, l)
    d = ndf_ggx(h, n, rough)
    f = fresnel_schlick_approx(v, h)
    g = geometry_smith(l, v, n, rough)
    denom = np.where(facing, 4.0 * nl * nv, 1.0)
    spec = np.where(facing, d * f * g / denom, 0.0)
    out = albedo / np.pi + spec[..., None]
    return np.where(facing[..., None], out, 0.0)


def microfacet_eval_grads(n_raw, albedo, rough, v, l, include_cosine=False):
    """Shading model value plus analytic derivatives for backpropagation.

    n_raw is the normal before re-normalization; the returned derivative
    accounts for the normalization Jacobian. rough and albedo must already
    lie in their valid ranges (the caller owns clamp backward). v and l are
    treated as constants. With include_cosine the value (and every
    derivative) is scaled by max(N.l, 0), matching shade_directional with
    unit irradiance.

    Returns (m, ds_dn, ds_drough, weight, dcos_dn):
      m         (..., 3)  model value, zero where back-facing
      ds_dn     (..., 3)  d(channel-shared part)/d(n_raw)
      ds_drough (...,)    d(specular)/d(roughness)
      weight    (...,)    d m_c / d albedo_c times pi
      dcos_dn   (..., 3)  d(cosine)/d(n_raw); the albedo-proportional part
                          of d m / d n is (albedo / pi) * dcos_dn
    """
    n_raw = np.asarray(n_raw, dtype=np.float64)
    albedo = np.asarray(albedo, dtype=np.float64)
    rough = np.asarray(rough, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    l = np.asarray(l, dtype=np.float64)

    norm = np.linalg.norm(n_raw, axis=-1, keepdims=True)
    clamped_norm = np.maximum(norm, 1e-6)
    n = n_raw / clamped_norm

    nl = _dot(n, l)
    nv = _dot(n, v)
    facing = (nl > BACKFACE_EPS) & (nv > BACKFACE_EPS)

    h = half_vector(v, l)
    nh = _dot(n, h)
    vh = _dot(v, h)

    a = rough * rough
    a2 = a * a
    q = nh * nh * (a2 - 1.0) + 1.0
    d = a2 / (np.pi * q * q)
    f = F0 + (1.0 - F0) * np.exp2((_FRESNEL_C1 * vh + _FRESNEL_C2) * vh)
    k = (rough + 1.0) ** 2 / 8.0
    dv = nv * (1.0 - k) + k
    dl = nl * (1.0 - k) + k
    # G / (4 nl nv) collapses: [nv/dv][nl/dl] / (4 nl nv) = 1 / (4 dv dl)
    spec = d * f / (4.0 * dv * dl)

    m = albedo / np.pi + spec[..., None]
    m = np.where(facing[..., None], m, 0.0)

    ds_dnh = -4.0 * a2 * nh * (a2 - 1.0) / (np.pi * q ** 3) * f / (4.0 * dv * dl)
    ds_dnv = -spec * (1.0 - k) / dv
    ds_dnl = -spec * (1.0 - k) / dl
    ds_dunit = (ds_dnh[..., None] * h + ds_dnv[..., None] * v
                + ds_dnl[..., None] * l)

    dd_da = 2.0 * a / (np.pi * q * q) - 4.0 * a ** 3 * nh * nh / (np.pi * q ** 3)
    ds_da = dd_da * f / (4.0 * dv * dl)
    ds_dk = -spec * ((1.0 - nv) / dv + (1.0 - nl) / dl)
    ds_drough = ds_da * 2.0 * rough + ds_dk * (rough + 1.0) / 4.0

    if include_cosine:
        # product rule on m*cos: the spec part stays channel-shared, the
        # diffuse part contributes (albedo/pi)*dcos per channel
        m = m * np.maximum(nl, 0.0)[..., None]
        ds_dunit = nl[..., None] * ds_dunit + spec[..., None] * l
        dcos_dunit = np.broadcast_to(l, ds_dunit.shape)
        ds_drough = nl * ds_drough
        weight = np.where(facing, nl, 0.0)
    else:
        dcos_dunit = np.zeros_like(ds_dunit)
        weight = facing.astype(np.float64)

    # normalization Jacobian: (I - n n^T) / ||n||, or I / eps when clamped
    def through_norm(g):
        proj = g - n * np.sum(g * n, axis=-1, keepdims=True)
        g = np.where(norm > 1e-6, proj / clamped_norm, g / 1e-6)
        return np.where(facing[..., None], g, 0.0)

    ds_dn = through_norm(ds_dunit)
    dcos_dn = through_norm(dcos_dunit)
    ds_drough = np.where(facing, ds_drough, np.zeros_like(spec))
    return m, ds_dn, ds_drough, weight, dcos_dn


def shade_directional(sample, v, l, irradiance=(1.0, 1.0, 1.0),
                      include_cosine=True):
    """Radiance of a surface point under one directional light.

    With include_cosine the model value is scaled by max(N.l, 0) (the
    physically shaded form used by the data generator); without it the raw
    model value is used. Output is clamped to be non-negative.
    """
    if isinstance(sample, SVBRDFSample):
        n_in = sample.normal
    else:
        n_in = sample[0]
    m = microfacet_eval(sample, v, l)
    out = m * np.asarray(irradiance, dtype=np.float64)
    if include_cosine:
        nl = _dot(normalize(n_in), np.asarray(l, dtype=np.float64))
        out = out * np.maximum(nl, 0.0)[..., None]
    return np.maximum(out, 0.0)
