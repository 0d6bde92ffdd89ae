"""Relightable light-field model over two-plane ray coordinates.

A decomposition network maps a normalized 4-D ray to per-ray surface
attributes (normal, albedo, roughness); a rendering network maps those
attributes plus the ray and a light direction to RGB. Both are plain dense
stacks trained jointly with a photometric loss, a physics consistency loss
against the analytic shading model, and a soft unit-norm penalty on the
normal head. Two ablations are built in: `no_roughness` drops the roughness
head (fixed 0.5), `vanilla` drops the decomposition entirely and regresses
color from (ray, light) alone.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .brdf import R_MIN, SVBRDFSample, microfacet_eval_grads
from .datagen import training_samples
from .errors import OutOfBoundsError, ShapeError, TrainingError
from .geometry import (
    CameraModel,
    TwoPlaneConfig,
    batch_rays_for_view,
    camera_from_dict,
    camera_to_dict,
)
from .nn import (
    AdamState,
    TrainConfig,
    adam_step,
    cast_layers,
    grad_check,
    grad_list,
    init_mlp,
    load_mlp,
    mlp_backward,
    mlp_forward,
    mlp_param_list,
    save_mlp,
)

TRUNK_WIDTH = 256
TRUNK_DEPTH = 8
ENCODER_WIDTH = 128
ENCODER_DEPTH = 8
TAIL_WIDTH = 64

WEIGHT_PHOTOMETRIC = 1.0
WEIGHT_MICROFACET = 0.1
WEIGHT_NORMAL = 0.01
ROUGHNESS_FIXED = 0.5  # stands in for the dropped head

VARIANTS = ("full", "no_roughness", "vanilla")
NORMAL_MODES = ("raw", "decoded")
COORD_TOL = 1e-6
LIGHT_NORM_TOL = 1e-4
MODEL_VERSION = 1


@dataclass
class RelitModel:
    variant: str
    normal_mode: str
    trunk: list          # None for vanilla
    heads: dict          # name -> DenseLayer; None for vanilla
    encoder: list
    tail: list
    two_plane: TwoPlaneConfig
    cameras: list = field(default_factory=list)
    lights: np.ndarray = None
    trained_epochs: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.normal_mode not in NORMAL_MODES:
            raise ValueError(f"unknown normal mode {self.normal_mode!r}")

    @property
    def has_svbrdf(self):
        return self.variant != "vanilla"

    @property
    def dtype(self):
        return self.tail[0].weight.dtype

    def _networks(self):
        nets = []
        if self.has_svbrdf:
            nets.append(self.trunk)
            nets.append([self.heads["normal"]])
            nets.append([self.heads["albedo"]])
            if "roughness" in self.heads:
                nets.append([self.heads["roughness"]])
        nets.append(self.encoder)
        nets.append(self.tail)
        return nets

    def param_list(self):
        """Flat mutable parameter views, fixed order across save/load."""
        out = []
        for net in self._networks():
            out.extend(mlp_param_list(net))
        return out

    def cast(self, dtype):
        """Copy with parameters cast to dtype (e.g. float64 for checks)."""
        trunk = heads = None
        if self.has_svbrdf:
            trunk = cast_layers(self.trunk, dtype)
            heads = {k: cast_layers([v], dtype)[0]
                     for k, v in self.heads.items()}
        return RelitModel(self.variant, self.normal_mode, trunk, heads,
                          cast_layers(self.encoder, dtype),
                          cast_layers(self.tail, dtype),
                          self.two_plane, self.cameras, self.lights,
                          self.trained_epochs)


def build_model(variant, two_plane: TwoPlaneConfig, seed=0,
                normal_mode="raw", dtype=np.float32, cameras=(),
                lights=None) -> RelitModel:
    """Seeded fresh model; layer init order is fixed so seeds reproduce."""
    rng = np.random.default_rng(seed)
    trunk = heads = None
    render_in = 4
    if variant != "vanilla":
        sizes = [4] + [TRUNK_WIDTH] * TRUNK_DEPTH
        trunk = init_mlp(sizes, ["relu"] * TRUNK_DEPTH, rng, dtype)
        heads = {
            "normal": init_mlp([TRUNK_WIDTH, 3], ["relu"], rng, dtype)[0],
            "albedo": init_mlp([TRUNK_WIDTH, 3], ["relu"], rng, dtype)[0],
        }
        if variant == "full":
            heads["roughness"] = init_mlp([TRUNK_WIDTH, 1], ["sigmoid"],
                                          rng, dtype)[0]
        render_in = 11  # normal 3 + albedo 3 + roughness 1 + ray 4
    enc_sizes = [render_in] + [ENCODER_WIDTH] * ENCODER_DEPTH
    encoder = init_mlp(enc_sizes, ["relu"] * ENCODER_DEPTH, rng, dtype)
    tail = init_mlp([ENCODER_WIDTH + 3, TAIL_WIDTH, 3],
                    ["sigmoid", "sigmoid"], rng, dtype)
    return RelitModel(variant, normal_mode, trunk, heads, encoder, tail,
                      two_plane, list(cameras), lights)


# --------------------------------------------------------------------------
# forward passes

def _as_batch(x, width, name):
    arr = np.asarray(x)
    single = arr.ndim == 1
    if single:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ShapeError(f"{name} must be ({width},) or (n, {width})")
    return arr, single


def _check_coords(ray4d):
    worst = float(np.max(np.abs(ray4d))) if ray4d.size else 0.0
    if worst > 1.0 + COORD_TOL:
        raise OutOfBoundsError(
            f"ray coordinate {worst:.6g} outside the normalized cube")


def _check_light(l):
    norms = np.linalg.norm(np.asarray(l, dtype=np.float64), axis=-1)
    if np.any(np.abs(norms - 1.0) > LIGHT_NORM_TOL):
        raise ValueError("light direction must be unit length")


def _decompose_arrays(model: RelitModel, ray4d):
    """Head outputs (n_raw, a_raw, r (n,1)) plus caches for backward."""
    feat, c_trunk = mlp_forward(model.trunk, ray4d)
    n_raw, c_n = mlp_forward([model.heads["normal"]], feat)
    a_raw, c_a = mlp_forward([model.heads["albedo"]], feat)
    if "roughness" in model.heads:
        r, c_r = mlp_forward([model.heads["roughness"]], feat)
    else:
        r = np.full((len(feat), 1), ROUGHNESS_FIXED, dtype=feat.dtype)
        c_r = None
    return n_raw, a_raw, r, (c_trunk, c_n, c_a, c_r)


def _render_arrays(model: RelitModel, x_in, light):
    enc, c_enc = mlp_forward(model.encoder, x_in)
    tail_in = np.concatenate([enc, light.astype(enc.dtype)], axis=1)
    rgb, c_tail = mlp_forward(model.tail, tail_in)
    return rgb, (c_enc, c_tail)


def geometry_normal(model: RelitModel, n_raw):
    """Unit normal fed to the shading model, per the configured decoding."""
    n = np.asarray(n_raw, dtype=np.float64)
    if model.normal_mode == "decoded":
        n = 2.0 * n - 1.0
    return n / np.maximum(np.linalg.norm(n, axis=-1, keepdims=True), 1e-6)


# --------------------------------------------------------------------------
# public inference

def decompose(model: RelitModel, ray4d) -> SVBRDFSample:
    """Raw head outputs for one ray or a batch; roughness is in (0, 1)."""
    if not model.has_svbrdf:
        raise ValueError("vanilla variant has no decomposition network")
    rays, single = _as_batch(ray4d, 4, "ray4d")
    _check_coords(rays)
    n_raw, a_raw, r, _ = _decompose_arrays(model, rays.astype(model.dtype))
    if single:
        return SVBRDFSample(n_raw[0], a_raw[0], float(r[0, 0]))
    return SVBRDFSample(n_raw, a_raw, r[:, 0])


def render_ray(model: RelitModel, svbrdf, ray4d, l):
    """RGB in (0,1) for given surface attributes, ray, and light."""
    rays, single = _as_batch(ray4d, 4, "ray4d")
    _check_coords(rays)
    lights, _ = _as_batch(l, 3, "light")
    _check_light(lights)
    if len(lights) == 1 and len(rays) > 1:
        lights = np.broadcast_to(lights, (len(rays), 3))
    if model.has_svbrdf:
        if svbrdf is None:
            raise ValueError("this variant requires surface attributes")
        n = np.asarray(svbrdf.normal, dtype=model.dtype).reshape(len(rays), 3)
        a = np.asarray(svbrdf.albedo, dtype=model.dtype).reshape(len(rays), 3)
        r = np.broadcast_to(
            np.asarray(svbrdf.roughness, dtype=model.dtype).reshape(-1, 1),
            (len(rays), 1))
        x_in = np.concatenate([n, a, r, rays.astype(model.dtype)], axis=1)
    else:
        x_in = rays.astype(model.dtype)
    rgb, _ = _render_arrays(model, x_in, lights)
    return rgb[0] if single else rgb


def predict(model: RelitModel, ray4d, l):
    """(RGB, surface attributes) for a ray batch; attributes None for the
    variant without a decomposition network."""
    rays, single = _as_batch(ray4d, 4, "ray4d")
    _check_coords(rays)
    lights, _ = _as_batch(l, 3, "light")
    _check_light(lights)
    if len(lights) == 1 and len(rays) > 1:
        lights = np.broadcast_to(lights, (len(rays), 3))
    x = rays.astype(model.dtype)
    if not model.has_svbrdf:
        rgb, _ = _render_arrays(model, x, lights)
        return (rgb[0] if single else rgb), None
    n_raw, a_raw, r, _ = _decompose_arrays(model, x)
    x_in = np.concatenate([n_raw, a_raw, r, x], axis=1)
    rgb, _ = _render_arrays(model, x_in, lights)
    if single:
        return rgb[0], SVBRDFSample(n_raw[0], a_raw[0], float(r[0, 0]))
    return rgb, SVBRDFSample(n_raw, a_raw, r[:, 0])


# --------------------------------------------------------------------------
# losses

def sample_losses(c_pred, color, m_vals=None, n_raw=None):
    """Per-sample loss terms (total, photometric, microfacet, normal).

    photometric = ||c_pred - color||, microfacet = ||c_pred - m_vals||,
    normal = |1 - n.n|; total combines them with weights 1, 0.1, 0.01.
    Terms whose inputs are None contribute zero (variant without surface
    attributes).
    """
    c_pred = np.asarray(c_pred, dtype=np.float64)
    color = np.asarray(color, dtype=np.float64)
    lp = np.linalg.norm(c_pred - color, axis=1)
    if m_vals is not None:
        lm = np.linalg.norm(c_pred - np.asarray(m_vals, dtype=np.float64),
                            axis=1)
    else:
        lm = np.zeros_like(lp)
    if n_raw is not None:
        n = np.asarray(n_raw, dtype=np.float64)
        ln = np.abs(1.0 - np.sum(n * n, axis=1))
    else:
        ln = np.zeros_like(lp)
    total = WEIGHT_PHOTOMETRIC * lp + WEIGHT_MICROFACET * lm \
        + WEIGHT_NORMAL * ln
    return total, lp, lm, ln


def _norm_grad(resid, norms):
    """d ||resid|| / d resid, safe at zero."""
    return resid / np.maximum(norms, 1e-12)[:, None]


def loss_total(model: RelitModel, batch):
    """Composite training loss and its gradients.

    `batch` maps ray4d/view/light/color to (n, k) arrays (view may be absent
    for the variant without surface attributes). Returns (loss, parts,
    grads) with grads aligned to model.param_list(). A non-finite loss
    raises a training error naming the first offending sample.
    """
    ray4d = np.asarray(batch["ray4d"])
    color = np.asarray(batch["color"])
    light = np.asarray(batch["light"])
    n_samples = len(ray4d)
    if n_samples == 0:
        raise ValueError("empty batch")
    dtype = model.dtype
    x = ray4d.astype(dtype)

    if not model.has_svbrdf:
        rgb, (c_enc, c_tail) = _render_arrays(model, x, light)
        total, lp, lm, ln = sample_losses(rgb, color)
        _raise_on_nonfinite(total)
        g_c = (WEIGHT_PHOTOMETRIC / n_samples) * _norm_grad(
            np.asarray(rgb, dtype=np.float64) - color, lp)
        g_tail, g_tail_in = mlp_backward(model.tail, c_tail,
                                         g_c.astype(dtype))
        g_enc, _ = mlp_backward(model.encoder, c_enc,
                                g_tail_in[:, :ENCODER_WIDTH])
        grads = grad_list(g_enc) + grad_list(g_tail)
        return float(np.mean(total)), _parts(total, lp, lm, ln), grads

    view = np.asarray(batch["view"])
    n_raw, a_raw, r, (c_trunk, c_n, c_a, c_r) = _decompose_arrays(model, x)
    x_in = np.concatenate([n_raw, a_raw, r, x], axis=1)
    rgb, (c_enc, c_tail) = _render_arrays(model, x_in, light)

    n64 = np.asarray(n_raw, dtype=np.float64)
    a64 = np.asarray(a_raw, dtype=np.float64)
    r64 = np.asarray(r[:, 0], dtype=np.float64)
    n_for_m = 2.0 * n64 - 1.0 if model.normal_mode == "decoded" else n64
    a_clamp = np.clip(a64, 0.0, 1.0)
    r_clamp = np.clip(r64, R_MIN, 1.0)
    # the prior target is the cosine-weighted model value, matching the
    # physically shaded images the renderer produces: without the cosine a
    # back-facing (zero) prediction beats the correct normal on every pixel
    # darker than albedo/pi and the normals converge inverted
    m_vals, ds_dn, ds_drough, facing_w, dcos_dn = microfacet_eval_grads(
        n_for_m, a_clamp, r_clamp, view, light, include_cosine=True)

    total, lp, lm, ln = sample_losses(rgb, color, m_vals, n64)
    _raise_on_nonfinite(total)

    rgb64 = np.asarray(rgb, dtype=np.float64)
    grad_p = _norm_grad(rgb64 - color, lp)
    grad_m = _norm_grad(rgb64 - m_vals, lm)
    g_c = (WEIGHT_PHOTOMETRIC * grad_p + WEIGHT_MICROFACET * grad_m) \
        / n_samples
    g_m = -(WEIGHT_MICROFACET / n_samples) * grad_m  # d loss / d m_vals

    g_tail, g_tail_in = mlp_backward(model.tail, c_tail, g_c.astype(dtype))
    g_enc, g_x_in = mlp_backward(model.encoder, c_enc,
                                 g_tail_in[:, :ENCODER_WIDTH])
    d_n = np.asarray(g_x_in[:, 0:3], dtype=np.float64)
    d_a = np.asarray(g_x_in[:, 3:6], dtype=np.float64)
    d_r = np.asarray(g_x_in[:, 6], dtype=np.float64)

    gm_sum = np.sum(g_m, axis=1)
    ga_sum = np.sum(g_m * a_clamp, axis=1) / np.pi
    d_n += (gm_sum[:, None] * ds_dn + ga_sum[:, None] * dcos_dn) * \
        (2.0 if model.normal_mode == "decoded" else 1.0)
    d_a += g_m * (facing_w[:, None] / np.pi) \
        * ((a64 > 0.0) & (a64 < 1.0))
    d_r += gm_sum * ds_drough * ((r64 > R_MIN) & (r64 < 1.0))

    # unit-norm penalty acts on the raw head output
    sign = np.sign(1.0 - np.sum(n64 * n64, axis=1))
    d_n += (WEIGHT_NORMAL / n_samples) * sign[:, None] * (-2.0 * n64)

    g_head_n, d_feat = mlp_backward([model.heads["normal"]], c_n,
                                    d_n.astype(dtype))
    g_head_a, d_feat_a = mlp_backward([model.heads["albedo"]], c_a,
                                      d_a.astype(dtype))
    d_feat = d_feat + d_feat_a
    grads_heads = grad_list(g_head_n) + grad_list(g_head_a)
    if c_r is not None:
        g_head_r, d_feat_r = mlp_backward([model.heads["roughness"]], c_r,
                                          d_r[:, None].astype(dtype))
        d_feat = d_feat + d_feat_r
        grads_heads += grad_list(g_head_r)
    g_trunk, _ = mlp_backward(model.trunk, c_trunk, d_feat)
    grads = grad_list(g_trunk) + grads_heads \
        + grad_list(g_enc) + grad_list(g_tail)
    return float(np.mean(total)), _parts(total, lp, lm, ln), grads


def _parts(total, lp, lm, ln):
    # "samples" carries per-sample rows so callers can aggregate epoch means
    # in a batch-order-independent way
    return {"total": float(np.mean(total)),
            "photometric": float(np.mean(lp)),
            "microfacet": float(np.mean(lm)),
            "normal": float(np.mean(ln)),
            "samples": np.stack([total, lp, lm, ln], axis=1)}


def _raise_on_nonfinite(total):
    bad = ~np.isfinite(total)
    if bad.any():
        raise TrainingError(
            f"non-finite loss at sample index {int(np.argmax(bad))}")


# --------------------------------------------------------------------------
# gradient verification

def check_decompose_gradients(model: RelitModel, rng, n_coords=40):
    """Max relative error of backprop vs central differences for the
    decomposition stack (64-bit model recommended)."""
    x = rng.uniform(-1.0, 1.0, size=(3, 4)).astype(model.dtype)
    nets = [model.trunk, [model.heads["normal"]], [model.heads["albedo"]]]
    if "roughness" in model.heads:
        nets.append([model.heads["roughness"]])
    params = [p for net in nets for p in mlp_param_list(net)]

    def forward():
        n_raw, a_raw, r, caches = _decompose_arrays(model, x)
        return n_raw, a_raw, r, caches

    def loss_fn():
        n_raw, a_raw, r, _ = forward()
        return 0.5 * (float(np.sum(n_raw ** 2)) + float(np.sum(a_raw ** 2))
                      + float(np.sum(r ** 2)))

    n_raw, a_raw, r, (c_trunk, c_n, c_a, c_r) = forward()
    g_n, d_f = mlp_backward([model.heads["normal"]], c_n, n_raw)
    g_a, d_fa = mlp_backward([model.heads["albedo"]], c_a, a_raw)
    d_f = d_f + d_fa
    if c_r is not None:
        g_r, d_fr = mlp_backward([model.heads["roughness"]], c_r, r)
        d_f = d_f + d_fr
    g_t, _ = mlp_backward(model.trunk, c_trunk, d_f)
    grads = grad_list(g_t) + grad_list(g_n) + grad_list(g_a)
    if c_r is not None:
        grads += grad_list(g_r)
    return grad_check(loss_fn, params, grads, rng, n_coords=n_coords)


def check_render_gradients(model: RelitModel, rng, n_coords=40):
    """Same check for the rendering stack with fixed random inputs."""
    width = model.encoder[0].weight.shape[1]
    x_in = rng.uniform(-1.0, 1.0, size=(3, width)).astype(model.dtype)
    l = rng.normal(size=(3, 3))
    l /= np.linalg.norm(l, axis=1, keepdims=True)
    params = mlp_param_list(model.encoder) + mlp_param_list(model.tail)

    def loss_fn():
        rgb, _ = _render_arrays(model, x_in, l)
        return 0.5 * float(np.sum(rgb ** 2))

    rgb, (c_enc, c_tail) = _render_arrays(model, x_in, l)
    g_tail, g_tail_in = mlp_backward(model.tail, c_tail, rgb)
    g_enc, _ = mlp_backward(model.encoder, c_enc,
                            g_tail_in[:, :ENCODER_WIDTH])
    grads = grad_list(g_enc) + grad_list(g_tail)
    return grad_check(loss_fn, params, grads, rng, n_coords=n_coords)


def check_loss_gradients(model: RelitModel, batch, rng, n_coords=60):
    """Max relative error of the full composite-loss gradient."""
    def loss_fn():
        return loss_total(model, batch)[0]

    _, _, grads = loss_total(model, batch)
    return grad_check(loss_fn, model.param_list(), grads, rng,
                      n_coords=n_coords)


# --------------------------------------------------------------------------
# training

def train(model: RelitModel, dataset, cfg: TrainConfig, out_dir=None,
          checkpoint_every=0):
    """Seeded minibatch training over the dataset's training split.

    Returns a (epochs, 5) float64 history: epoch number then epoch-mean
    total/photometric/microfacet/normal losses. The model is updated in
    place; a checkpoint is written to out_dir at the end (and every
    `checkpoint_every` epochs when set).
    """
    held_v = list(dataset.split.get("held_out_views", []))
    held_l = list(dataset.split.get("held_out_lights", []))
    if len(dataset.cameras) - len(held_v) < 1:
        raise ValueError("need at least one training view")
    if len(dataset.lights) - len(held_l) < 2:
        raise ValueError("need at least two training lights")
    data = training_samples(dataset, exclude_views=held_v,
                            exclude_lights=held_l)
    n = len(data["ray4d"])
    params = model.param_list()
    state = AdamState.for_params(params)
    rng = np.random.default_rng(cfg.seed)
    lr = cfg.lr
    history = np.zeros((cfg.epochs, 5))
    keys = ("ray4d", "view", "light", "color")
    per_sample = np.zeros((n, 4))
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            batch = {k: data[k][idx] for k in keys}
            loss, parts, grads = loss_total(model, batch)
            adam_step(params, grads, state, lr)
            per_sample[idx] = parts["samples"]
        # mean in sample-id order, so the history is independent of the
        # epoch's shuffle
        history[epoch] = [epoch + 1, *per_sample.mean(axis=0)]
        lr *= cfg.lr_decay
        model.trained_epochs += 1
        if out_dir and checkpoint_every \
                and (epoch + 1) % checkpoint_every == 0:
            save_model(model, out_dir)
    if out_dir:
        save_model(model, out_dir)
    return history


def save_loss_history(history, path):
    history = np.asarray(history)
    with open(path, "w") as fh:
        fh.write("# epoch,total,photometric,microfacet,normal\n")
        for row in history:
            fh.write(f"{int(row[0])}," + ",".join(
                f"{v:.9e}" for v in row[1:]) + "\n")


def load_loss_history(path):
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return data


# --------------------------------------------------------------------------
# whole-image rendering

@dataclass
class RenderResult:
    image: np.ndarray      # (h, w, 3) float32, linear
    mask: np.ndarray       # (h, w) bool, False where the ray left the volume
    normal: np.ndarray     # (h, w, 3) unit shading normals, or None
    albedo: np.ndarray     # (h, w, 3) clamped to [0, 1], or None
    roughness: np.ndarray  # (h, w), or None


def render_view(model: RelitModel, camera: CameraModel, l, two_plane=None,
                chunk=16384) -> RenderResult:
    """Query the model for every pixel of a calibrated view.

    Pixels whose rays miss the normalization volume stay black and are
    reported through the mask.
    """
    cfg = two_plane if two_plane is not None else model.two_plane
    _check_light(np.asarray(l, dtype=np.float64))
    _, ray4d, valid = batch_rays_for_view(camera, cfg)
    h, w = camera.height, camera.width
    n_px = h * w
    image = np.zeros((n_px, 3), dtype=np.float32)
    maps = None
    if model.has_svbrdf:
        maps = {"normal": np.zeros((n_px, 3), dtype=np.float32),
                "albedo": np.zeros((n_px, 3), dtype=np.float32),
                "roughness": np.zeros(n_px, dtype=np.float32)}
    idx = np.flatnonzero(valid)
    l_row = np.asarray(l, dtype=model.dtype).reshape(1, 3)
    for start in range(0, len(idx), chunk):
        sel = idx[start:start + chunk]
        rays = ray4d[sel].astype(model.dtype)
        lights = np.broadcast_to(l_row, (len(sel), 3))
        if model.has_svbrdf:
            n_raw, a_raw, r, _ = _decompose_arrays(model, rays)
            x_in = np.concatenate([n_raw, a_raw, r, rays], axis=1)
            rgb, _ = _render_arrays(model, x_in, lights)
            maps["normal"][sel] = geometry_normal(model, n_raw)
            maps["albedo"][sel] = np.clip(a_raw, 0.0, 1.0)
            maps["roughness"][sel] = np.clip(r[:, 0], R_MIN, 1.0)
        else:
            rgb, _ = _render_arrays(model, rays, lights)
        image[sel] = rgb
    return RenderResult(
        image.reshape(h, w, 3),
        valid.reshape(h, w),
        maps["normal"].reshape(h, w, 3) if maps else None,
        maps["albedo"].reshape(h, w, 3) if maps else None,
        maps["roughness"].reshape(h, w) if maps else None)


# --------------------------------------------------------------------------
# checkpoints

def save_model(model: RelitModel, path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "format_version": MODEL_VERSION,
        "variant": model.variant,
        "normal_mode": model.normal_mode,
        "two_plane": model.two_plane.to_dict(),
        "cameras": [{"id": i, **camera_to_dict(c)}
                    for i, c in enumerate(model.cameras)],
        "lights": None if model.lights is None
        else [[float(x) for x in d] for d in model.lights],
        "trained_epochs": model.trained_epochs,
    }
    with open(path / "model.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    if model.has_svbrdf:
        layers = list(model.trunk) + [model.heads["normal"],
                                      model.heads["albedo"]]
        if "roughness" in model.heads:
            layers.append(model.heads["roughness"])
        save_mlp(path / "decompose.rnlf", layers)
    save_mlp(path / "render.rnlf", list(model.encoder) + list(model.tail))


def load_model(path) -> RelitModel:
    path = Path(path)
    meta_path = path / "model.json"
    if not meta_path.exists():
        raise ValueError(f"no model.json under {path}")
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{meta_path}: {exc}") from exc
    if meta.get("format_version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version "
                         f"{meta.get('format_version')!r}")
    variant = meta["variant"]
    trunk = heads = None
    if variant != "vanilla":
        layers, _ = load_mlp(path / "decompose.rnlf")
        want = TRUNK_DEPTH + (3 if variant == "full" else 2)
        if len(layers) != want:
            raise ValueError(f"decompose checkpoint has {len(layers)} "
                             f"layers, expected {want}")
        trunk = layers[:TRUNK_DEPTH]
        heads = {"normal": layers[TRUNK_DEPTH],
                 "albedo": layers[TRUNK_DEPTH + 1]}
        if variant == "full":
            heads["roughness"] = layers[TRUNK_DEPTH + 2]
    render_layers, _ = load_mlp(path / "render.rnlf")
    if len(render_layers) != ENCODER_DEPTH + 2:
        raise ValueError(f"render checkpoint has {len(render_layers)} "
                         f"layers, expected {ENCODER_DEPTH + 2}")
    lights = meta.get("lights")
    return RelitModel(
        variant=variant,
        normal_mode=meta["normal_mode"],
        trunk=trunk,
        heads=heads,
        encoder=render_layers[:ENCODER_DEPTH],
        tail=render_layers[ENCODER_DEPTH:],
        two_plane=TwoPlaneConfig.from_dict(meta["two_plane"]),
        cameras=[camera_from_dict(c) for c in meta["cameras"]],
        lights=None if lights is None else np.asarray(lights,
                                                      dtype=np.float64),
        trained_epochs=meta.get("trained_epochs", 0))


def checkpoint_digest(path):
    """Stable content hash of a checkpoint directory (reports cite it)."""
    path = Path(path)
    digest = hashlib.sha1()
    for name in sorted(p.name for p in path.iterdir()
                       if p.suffix in (".json", ".rnlf")):
        digest.update(name.encode())
        digest.update((path / name).read_bytes())
    return digest.hexdigest()
