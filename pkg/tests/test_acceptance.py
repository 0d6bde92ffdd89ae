"""Acceptance checks on the reference desk-scale pipeline.

The reference dataset (checker sphere over a checker plane, 3x3 cameras at
10 degrees, 16 hemisphere lights, 64x64, seed 42) plus three 30-epoch
trained variants and their metric reports are produced once through the
command line interface and cached; delete the cache directory (or point
RELIGHTLF_ACCEPTANCE_CACHE elsewhere) to force a full rebuild, which takes
roughly half an hour on a desktop CPU.

Each test prints one `criterion N: PASS/FAIL (...)` line; run pytest with
-s to see them as they complete.
"""

import hashlib
import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.ndimage import binary_dilation

from test_brdf import scalar_model

from relightlf import datagen, relight
from relightlf.brdf import (
    fresnel_schlick_approx,
    geometry_smith,
    microfacet_eval,
    ndf_ggx,
)
from relightlf.cli import main as cli_main
from relightlf.geometry import (
    TwoPlaneConfig,
    look_at_camera,
    pixel_directions,
)
from relightlf.model import (
    build_model,
    check_decompose_gradients,
    check_loss_gradients,
    check_render_gradients,
    load_model,
    render_view,
)

SPHERE_R = 0.3
CONFIG = {
    "scene": "sphere", "views": 3, "view_spacing": 10.0, "lights": 16,
    "res": 64, "seed": 42, "epochs": 30, "batch": 8192, "lr": 3e-4,
    "lr_decay": 0.995, "normal_mode": "decoded",
}
VARIANTS = ("full", "no_roughness", "vanilla")


def check(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num}: {detail}"


# --------------------------------------------------------------------------
# cached reference pipeline

def _run(args):
    rc = cli_main([str(a) for a in args])
    if rc != 0:
        raise RuntimeError(f"command failed ({rc}): {args}")


def _gen(out, seed):
    _run(["gen-data", "--scene", CONFIG["scene"],
          "--views", CONFIG["views"],
          "--view-spacing", CONFIG["view_spacing"],
          "--lights", CONFIG["lights"],
          "--res", CONFIG["res"], CONFIG["res"],
          "--seed", seed, "--out", out])


def _train(data, variant, out):
    _run(["train", "--data", data, "--variant", variant,
          "--epochs", CONFIG["epochs"], "--batch", CONFIG["batch"],
          "--lr", CONFIG["lr"], "--lr-decay", CONFIG["lr_decay"],
          "--seed", CONFIG["seed"],
          "--normal-mode", CONFIG["normal_mode"], "--out", out])


def _eval_model(data, ckpt, report):
    _run(["eval", "--ckpt", ckpt, "--data", data, "--report", report])


def _build_cache(cache):
    cache.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    data = cache / "data"
    _gen(data, CONFIG["seed"])
    for v in VARIANTS:
        _train(data, v, cache / f"ckpt_{v}")
        _eval_model(data, cache / f"ckpt_{v}", cache / f"report_{v}.csv")
    for b in ("nearest", "barycentric"):
        _run(["eval", "--baseline", b, "--data", data,
              "--report", cache / f"report_{b}.csv"])
    pipeline_seconds = time.perf_counter() - t0

    # an independent serial repeat of the full-variant pipeline
    t0 = time.perf_counter()
    run2 = cache / "run2"
    _gen(run2 / "data", CONFIG["seed"])
    _train(run2 / "data", "full", run2 / "ckpt_full")
    _eval_model(run2 / "data", run2 / "ckpt_full", run2 / "report_full.csv")
    repeat_seconds = time.perf_counter() - t0

    (cache / "timing.json").write_text(json.dumps(
        {"pipeline_seconds": pipeline_seconds,
         "repeat_seconds": repeat_seconds}))
    (cache / "DONE").write_text("ok\n")


@pytest.fixture(scope="session")
def pipeline():
    key = hashlib.sha1(
        json.dumps(CONFIG, sort_keys=True).encode()).hexdigest()[:12]
    root = Path(os.environ.get("RELIGHTLF_ACCEPTANCE_CACHE",
                               Path(__file__).parent / ".acceptance_cache"))
    cache = root / key
    if not (cache / "DONE").exists():
        _build_cache(cache)
    return cache


def mean_psnr(report_path):
    for line in Path(report_path).read_text().splitlines():
        if line.startswith("mean,"):
            return float(line.split(",")[2])
    raise AssertionError(f"no mean row in {report_path}")


# --------------------------------------------------------------------------
# 1. gradient correctness

def test_criterion_1_gradient_correctness():
    t0 = time.perf_counter()
    two_plane = TwoPlaneConfig(z_uv=-1.0, z_st=0.0,
                               bounds=np.array([[-1.0, 1.0]] * 4))
    model = build_model("full", two_plane, seed=13).cast(np.float64)
    rng = np.random.default_rng(11)
    err_dec = check_decompose_gradients(model, rng)
    err_ren = check_render_gradients(model, rng)
    brng = np.random.default_rng(3)
    view = np.tile([0.3, 0.2, 0.9], (4, 1))
    view /= np.linalg.norm(view, axis=1, keepdims=True)
    light = np.tile([-0.1, 0.4, 0.9], (4, 1))
    light /= np.linalg.norm(light, axis=1, keepdims=True)
    batch = {"ray4d": brng.uniform(-1.0, 1.0, size=(4, 4)), "view": view,
             "light": light, "color": brng.uniform(0.0, 1.0, size=(4, 3))}
    err_loss = check_loss_gradients(model, batch, np.random.default_rng(7),
                                    n_coords=60)
    elapsed = time.perf_counter() - t0
    check(1, err_dec < 1e-4 and err_ren < 1e-4 and err_loss < 1e-3
          and elapsed < 120.0,
          f"decompose {err_dec:.2e}, render {err_ren:.2e}, "
          f"composite {err_loss:.2e}, {elapsed:.1f}s")


# --------------------------------------------------------------------------
# 2. shading model vs an independent scalar reference

def test_criterion_2_shading_oracle():
    n_cfg = 10000
    rng = np.random.default_rng(11)

    def units(n):
        d = rng.normal(size=(n, 3))
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    normals, views, lights = (units(n_cfg) for _ in range(3))
    albedo = rng.uniform(0.0, 1.0, size=(n_cfg, 3))
    rough = rng.uniform(0.01, 1.0, size=n_cfg)

    total = microfacet_eval((normals, albedo, rough), views, lights)
    want_total = np.array([scalar_model(normals[i], albedo[i], rough[i],
                                        views[i], lights[i])
                           for i in range(n_cfg)])
    err_total = float(np.max(np.abs(total - want_total)))

    # parts on their own domain: the half vector of front-facing pairs
    halves = views + lights
    halves /= np.linalg.norm(halves, axis=1, keepdims=True)
    d = ndf_ggx(halves, normals, rough)
    f = fresnel_schlick_approx(views, halves)
    g = geometry_smith(lights, views, normals, rough)
    err_parts = 0.0
    n_facing = 0
    for i in range(n_cfg):
        nv = float(normals[i] @ views[i])
        nl = float(normals[i] @ lights[i])
        if nl <= 1e-4 or nv <= 1e-4:
            continue
        n_facing += 1
        a = rough[i] * rough[i]
        nh = float(normals[i] @ halves[i])
        q = nh * nh * (a * a - 1.0) + 1.0
        vh = float(views[i] @ halves[i])
        k = (rough[i] + 1.0) ** 2 / 8.0
        want = (a * a / (math.pi * q * q),
                0.05 + 0.95 * 2.0 ** ((-5.55473 * vh - 6.98316) * vh),
                (nv / (nv * (1.0 - k) + k)) * (nl / (nl * (1.0 - k) + k)))
        err_parts = max(err_parts, abs(d[i] - want[0]),
                        abs(f[i] - want[1]), abs(g[i] - want[2]))
    assert n_facing > 1000

    z = np.array([0.0, 0.0, 1.0])
    worked = float(microfacet_eval((z, np.ones(3), 1.0), z, z)[0])
    err_worked = abs(worked - 0.32230)
    check(2, err_total <= 1e-9 and err_parts <= 1e-9 and err_worked < 5e-6,
          f"total {err_total:.1e}, parts {err_parts:.1e}, "
          f"normal-incidence {worked:.5f}")


# --------------------------------------------------------------------------
# 3. relighting ordering and runtime

def test_criterion_3_relighting_ordering(pipeline):
    p = {v: mean_psnr(pipeline / f"report_{v}.csv") for v in VARIANTS}
    p["nearest"] = mean_psnr(pipeline / "report_nearest.csv")
    p["barycentric"] = mean_psnr(pipeline / "report_barycentric.csv")
    seconds = json.loads(
        (pipeline / "timing.json").read_text())["pipeline_seconds"]
    beats_baselines = (p["full"] > p["nearest"]
                       and p["full"] > p["barycentric"])
    ablation = (p["full"] >= p["no_roughness"]
                and p["no_roughness"] >= p["vanilla"] - 0.2)
    check(3, beats_baselines and ablation and seconds < 3600.0,
          f"full {p['full']:.2f} dB vs nearest {p['nearest']:.2f} / "
          f"barycentric {p['barycentric']:.2f}; ablation "
          f"{p['full']:.2f} >= {p['no_roughness']:.2f} >= "
          f"{p['vanilla']:.2f} - 0.2; pipeline {seconds / 60.0:.1f} min")


# --------------------------------------------------------------------------
# 4. decomposed normals against the analytic sphere

def test_criterion_4_normal_decomposition(pipeline):
    model = load_model(pipeline / "ckpt_full")
    dataset = datagen.load_dataset(pipeline / "data")
    view = dataset.split["held_out_views"][0]
    camera = dataset.cameras[view]
    light = np.array([0.0, 0.6, -0.8])
    result = render_view(model, camera, light)

    scene = datagen.make_scene("sphere")
    dirs = pixel_directions(camera)
    origins = np.broadcast_to(camera.center, dirs.shape)
    _, prim, points, _ = scene.first_hit(origins, dirs)
    # sphere pixels the light reaches directly (no attached shadow; the
    # ground cannot cast onto the sphere from above-horizon lights)
    on_sphere = (prim == 0) & result.mask.reshape(-1)
    analytic = points[on_sphere] / SPHERE_R
    predicted = result.normal.reshape(-1, 3)[on_sphere]
    unshadowed = analytic @ light > 0.0
    cos = np.clip(np.sum(analytic[unshadowed] * predicted[unshadowed],
                         axis=1), -1.0, 1.0)
    median_deg = float(np.median(np.degrees(np.arccos(cos))))
    check(4, median_deg <= 35.0,
          f"median angular error {median_deg:.1f} deg on "
          f"{int(unshadowed.sum())} unshadowed sphere pixels; "
          f"target 25, gate 35")


# --------------------------------------------------------------------------
# 5. weighted-sum relighting identities

def test_criterion_5_relight_linearity(pipeline):
    dataset = datagen.load_dataset(pipeline / "data")
    n = len(dataset.lights)
    stack = np.stack([dataset.image(1, li) for li in range(n)])
    sweep = relight.OLATSweep(dataset.lights, stack)

    one_hot_exact = True
    for i in (0, n // 2, n - 1):
        w = np.zeros((n, 3))
        w[i] = 1.0
        one_hot_exact &= bool(
            np.array_equal(relight.relight_hdri(sweep, w), stack[i]))

    rng = np.random.default_rng(2)
    w1 = rng.uniform(0.0, 1.0, size=(n, 3))
    w2 = rng.uniform(0.0, 1.0, size=(n, 3))
    lin_err = float(np.max(np.abs(
        relight.relight_hdri(sweep, w1 + w2)
        - relight.relight_hdri(sweep, w1)
        - relight.relight_hdri(sweep, w2))))

    env = relight.EnvironmentMap(np.ones((8, 16, 3)))
    weights = relight.envmap_weights(env, relight.fibonacci_sphere(2048))
    sums = np.sum(weights, axis=0)
    sum_err = float(np.max(np.abs(sums / (4.0 * np.pi) - 1.0)))
    check(5, one_hot_exact and lin_err <= 1e-6 and sum_err <= 0.01,
          f"one-hot exact {one_hot_exact}, additivity {lin_err:.1e}, "
          f"white-sum off by {sum_err * 100.0:.3f}%")


# --------------------------------------------------------------------------
# 6. mirror-ball light calibration round trip

def test_criterion_6_chrome_round_trip():
    res = 256
    focal = 4.0 / 3.0 * res
    camera = look_at_camera((0.0, 0.0, -2.4), (0.0, 0.0, 0.0),
                            res, res, focal)
    r_px = focal * math.tan(math.asin(0.35 / 2.4))
    scene = datagen.make_scene("chrome_ball")
    rng = np.random.default_rng(20)
    errors = []
    for _ in range(20):
        l = rng.normal(size=3)
        l /= np.linalg.norm(l)
        l[2] = -abs(l[2])  # front hemisphere, toward the camera
        l /= np.linalg.norm(l)
        image = datagen.render_view(scene, camera, l)
        got = datagen.chrome_ball_light_dir(image, res / 2.0, res / 2.0,
                                            r_px, camera)
        cos = float(np.clip(got.direction @ l, -1.0, 1.0))
        errors.append(math.degrees(math.acos(cos)))
    median_deg = float(np.median(errors))
    check(6, median_deg < 2.0,
          f"median {median_deg:.2f} deg, worst {max(errors):.2f} deg "
          f"over 20 lights")


# --------------------------------------------------------------------------
# 7. shadow boundary against the analytic ellipse

def test_criterion_7_shadow_geometry():
    res = 128
    camera = look_at_camera((0.0, 1.5, -2.0), (0.0, 0.0, 0.0),
                            res, res, 4.0 / 3.0 * res)
    light = np.array([0.3, 0.8, -0.52])
    light /= np.linalg.norm(light)
    scene = datagen.make_scene("sphere")
    image = datagen.render_view(scene, camera, light)

    dirs = pixel_directions(camera)
    origins = np.broadcast_to(camera.center, dirs.shape)
    _, prim, _, _ = scene.first_hit(origins, dirs)
    on_plane = (prim == 1).reshape(res, res)

    # analytic ground-plane point of every pixel ray, ignoring occluders
    t_pl = (-0.5 - origins[:, 1]) / dirs[:, 1]
    valid = (t_pl > 0.0).reshape(res, res)
    p = origins + t_pl[:, None] * dirs
    b = p @ light
    disc = b * b - np.sum(p * p, axis=1) + SPHERE_R ** 2
    analytic = ((b < 0.0) & (disc >= 0.0)).reshape(res, res)

    rendered = on_plane & (image.max(axis=2) == 0.0)
    disagree = on_plane & (rendered != (analytic & on_plane))
    near_edge = binary_dilation(analytic & valid) \
        & binary_dilation(~analytic & valid)
    off_by_more = disagree & ~near_edge
    n_shadow = int((analytic & on_plane).sum())
    check(7, n_shadow > 100 and not off_by_more.any(),
          f"{n_shadow} shadow pixels, {int(disagree.sum())} boundary "
          f"disagreements, {int(off_by_more.sum())} beyond 1 px")


# --------------------------------------------------------------------------
# 8. determinism across serial runs

def test_criterion_8_determinism(pipeline, tmp_path):
    hist_equal = (pipeline / "ckpt_full" / "loss_history.csv").read_bytes() \
        == (pipeline / "run2" / "ckpt_full" / "loss_history.csv").read_bytes()
    report_equal = (pipeline / "report_full.csv").read_bytes() \
        == (pipeline / "run2" / "report_full.csv").read_bytes()

    # a fresh in-process evaluation must also reproduce the stored report
    fresh = tmp_path / "fresh.csv"
    _eval_model(pipeline / "data", pipeline / "ckpt_full", fresh)
    fresh_equal = fresh.read_bytes() \
        == (pipeline / "report_full.csv").read_bytes()
    check(8, hist_equal and report_equal and fresh_equal,
          f"loss history identical {hist_equal}, report identical "
          f"{report_equal}, fresh evaluation identical {fresh_equal}")


# --------------------------------------------------------------------------
# 9. throughput is reported

def test_criterion_9_throughput_reported(pipeline, tmp_path, capsys):
    _eval_model(pipeline / "data", pipeline / "ckpt_full",
                tmp_path / "r.csv")
    out = capsys.readouterr().out
    present = "rays_per_second=" in out
    rps = float(out.split("rays_per_second=")[1].split()[0]) if present \
        else 0.0
    check(9, present and rps > 0.0, f"rays_per_second={rps:.1f}")
