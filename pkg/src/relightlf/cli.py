"""Command line interface: dataset generation, training, rendering,
environment relighting, light calibration, and evaluation.

Images are written linear to .pfm; .png outputs are tone mapped for
viewing. Delimited outputs (loss history, metric reports) get a rendered
figure next to them.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import datagen, evaluation, figures, relight
from . import model as model_lib
from .errors import (
    CalibrationError,
    GeometryError,
    ManifestError,
    ShapeError,
    TrainingError,
)
from .geometry import camera_from_dict
from .nn import TrainConfig
from .pfm import read_hdr, read_pfm, write_pfm

_KNOWN_ERRORS = (ValueError, GeometryError, ShapeError, ManifestError,
                 TrainingError, CalibrationError, FileNotFoundError)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _KNOWN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


# --------------------------------------------------------------------------
# subcommands

def cmd_gen_data(args):
    scene = datagen.make_scene(args.scene)
    width, height = args.res
    cameras = datagen.camera_grid(args.views, args.view_spacing, radius=2.4,
                                  width=width, height=height,
                                  focal_px=4.0 / 3.0 * width)
    if args.light_spacing is not None:
        lights = datagen.light_sphere_grid(spacing_deg=args.light_spacing,
                                           hemisphere=True)
    else:
        lights = datagen.light_sphere_grid(count=args.lights,
                                           hemisphere=True)
    start = time.perf_counter()
    dataset = datagen.generate_dataset(
        scene, cameras, lights, seed=args.seed, out_dir=args.out,
        holdout_views=args.holdout_views, holdout_lights=args.holdout_lights)
    elapsed = time.perf_counter() - start
    print(f"scene={args.scene} cameras={len(cameras)} lights={len(lights)} "
          f"images={len(dataset.images)} res={width}x{height}")
    print(f"held_out_views={dataset.split['held_out_views']} "
          f"held_out_lights={dataset.split['held_out_lights']}")
    print(f"wrote {args.out} in {elapsed:.1f}s")
    return 0


def cmd_train(args):
    dataset = datagen.load_dataset(args.data)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch, lr=args.lr,
                      lr_decay=args.lr_decay, seed=args.seed)
    model = model_lib.build_model(args.variant, dataset.two_plane,
                                 seed=args.seed,
                                 normal_mode=args.normal_mode,
                                 cameras=dataset.cameras,
                                 lights=dataset.lights)
    start = time.perf_counter()
    history = model_lib.train(model, dataset, cfg, out_dir=args.out,
                              checkpoint_every=args.checkpoint_every)
    elapsed = time.perf_counter() - start
    out = Path(args.out)
    model_lib.save_loss_history(history, out / "loss_history.csv")
    figures.save_loss_curves(history, out / "loss_curves.png")
    first, last = history[0], history[-1]
    print(f"variant={args.variant} normal_mode={args.normal_mode} "
          f"epochs={args.epochs} samples_per_epoch={_epoch_samples(dataset)}")
    print(f"loss epoch 1: total={first[1]:.6f} photometric={first[2]:.6f}")
    print(f"loss epoch {int(last[0])}: total={last[1]:.6f} "
          f"photometric={last[2]:.6f}")
    print(f"trained in {elapsed:.1f}s; checkpoint at {out}")
    return 0


def _epoch_samples(dataset):
    held_v = set(dataset.split.get("held_out_views", []))
    held_l = set(dataset.split.get("held_out_lights", []))
    width, height = dataset.resolution
    return (len(dataset.cameras) - len(held_v)) \
        * (len(dataset.lights) - len(held_l)) * width * height


def _resolve_camera(args, model):
    if args.camera_id is not None:
        if not 0 <= args.camera_id < len(model.cameras):
            raise ValueError(f"checkpoint has {len(model.cameras)} cameras; "
                             f"id {args.camera_id} is out of range")
        return model.cameras[args.camera_id]
    with open(args.pose) as fh:
        return camera_from_dict(json.load(fh))


def _unit_light(xyz):
    l = np.asarray(xyz, dtype=np.float64)
    norm = np.linalg.norm(l)
    if norm < 1e-12:
        raise ValueError("light direction must be nonzero")
    return l / norm


def _write_image(path, image):
    path = Path(path)
    if path.suffix.lower() == ".png":
        from PIL import Image

        mapped = np.clip(relight.tone_map(image), 0.0, 1.0)
        Image.fromarray((mapped * 255.0 + 0.5).astype(np.uint8)).save(path)
    else:
        write_pfm(path, np.asarray(image, dtype=np.float32))


def cmd_render(args):
    model = model_lib.load_model(args.ckpt)
    camera = _resolve_camera(args, model)
    light = _unit_light(args.light)
    result = model_lib.render_view(model, camera, light)
    _write_image(args.out, result.image)
    print(f"rendered {camera.width}x{camera.height}, "
          f"{int(result.mask.sum())}/{result.mask.size} rays in bounds")
    if args.dump_svbrdf:
        if not model.has_svbrdf:
            raise ValueError(
                "this checkpoint's variant has no surface attributes")
        dump = Path(args.dump_svbrdf)
        dump.mkdir(parents=True, exist_ok=True)
        write_pfm(dump / "normal.pfm", result.normal)
        write_pfm(dump / "albedo.pfm", result.albedo)
        write_pfm(dump / "roughness.pfm", result.roughness)
        figures.save_svbrdf_panel(result, dump / "panel.png")
        print(f"surface attribute maps in {dump}")
    return 0


def cmd_relight_hdri(args):
    model = model_lib.load_model(args.ckpt)
    camera = _resolve_camera(args, model)
    env_path = Path(args.env)
    data = read_hdr(env_path) if env_path.suffix.lower() == ".hdr" \
        else read_pfm(env_path)
    env = relight.EnvironmentMap(np.asarray(data, dtype=np.float64))
    directions = relight.fibonacci_sphere(args.sweep_n)
    start = time.perf_counter()
    sweep = relight.olat_sweep(
        lambda d: model_lib.render_view(model, camera, d).image, directions)
    weights = relight.envmap_weights(env, directions)
    weights = relight.mask_back_hemisphere(weights, directions)
    image = relight.relight_hdri(sweep, weights)
    elapsed = time.perf_counter() - start
    _write_image(args.out, image)
    print(f"swept {args.sweep_n} lights in {elapsed:.1f}s; "
          f"weight sum {weights.sum():.3f}")
    print(f"wrote {args.out}")
    return 0


def cmd_calib_light(args):
    dataset = datagen.load_dataset(args.data)
    if not 0 <= args.camera_id < len(dataset.cameras):
        raise ValueError(f"dataset has {len(dataset.cameras)} cameras; "
                         f"id {args.camera_id} is out of range")
    camera = dataset.cameras[args.camera_id]
    image = read_pfm(args.image)
    cx, cy, radius = args.ball
    result = datagen.chrome_ball_light_dir(image, cx, cy, radius, camera)
    x, y, z = result.direction
    print(f"direction,{x:.6f},{y:.6f},{z:.6f}")
    print(f"confidence,{result.confidence}")
    print(f"spot_px,{result.spot_px[0]:.2f},{result.spot_px[1]:.2f}")
    angles = np.degrees(np.arccos(np.clip(
        dataset.lights @ result.direction, -1.0, 1.0)))
    nearest = int(np.argmin(angles))
    print(f"nearest_dataset_light,{nearest},{angles[nearest]:.3f}")
    return 0


def cmd_eval(args):
    dataset = datagen.load_dataset(args.data)
    split = None
    if args.split:
        with open(args.split) as fh:
            split = evaluation.SplitSpec.from_dict(json.load(fh))
    if args.ckpt:
        model = model_lib.load_model(args.ckpt)
        report = evaluation.evaluate_model(
            model, dataset, split,
            checkpoint=model_lib.checkpoint_digest(args.ckpt))
    else:
        report = evaluation.evaluate_baseline(args.baseline, dataset, split)
    report_path = Path(args.report)
    timing_path = report_path.with_suffix(".timing.txt")
    evaluation.write_report(report, report_path, timing_path=timing_path)
    figures.save_metric_bars(report, report_path.with_suffix(".png"))
    print(f"method={report.method} pairs={len(report.rows)}")
    print(f"mean_psnr_db={report.mean_psnr:.6f} "
          f"mean_ssim={report.mean_ssim:.6f}")
    print(f"rays_per_second={report.rays_per_second:.1f}")
    print(f"report at {report_path}")
    return 0


# --------------------------------------------------------------------------
# parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="relightlf",
        description="Relightable light fields: synthetic OLAT data, jointly "
                    "trained decomposition/rendering networks, environment "
                    "relighting, and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="render a synthetic OLAT dataset")
    g.add_argument("--scene", default="sphere",
                   choices=sorted(datagen.SCENES))
    g.add_argument("--views", type=int, default=3,
                   help="cameras per grid axis (n x n total)")
    g.add_argument("--view-spacing", type=float, default=10.0,
                   help="angular camera spacing, degrees")
    g.add_argument("--lights", type=int, default=16,
                   help="number of hemisphere lights")
    g.add_argument("--light-spacing", type=float, default=None,
                   help="size the light rig by spacing in degrees instead "
                        "of --lights")
    g.add_argument("--res", type=int, nargs=2, default=[64, 64],
                   metavar=("W", "H"))
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", required=True)
    g.add_argument("--holdout-views", type=int, default=1)
    g.add_argument("--holdout-lights", type=int, default=3)
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train a model on an OLAT dataset")
    t.add_argument("--data", required=True)
    t.add_argument("--variant", default="full", choices=model_lib.VARIANTS)
    t.add_argument("--epochs", type=int, default=30)
    t.add_argument("--batch", type=int, default=8192)
    t.add_argument("--lr", type=float, default=3e-4)
    t.add_argument("--lr-decay", type=float, default=0.995)
    t.add_argument("--seed", type=int, default=42)
    t.add_argument("--out", required=True, help="checkpoint directory")
    t.add_argument("--normal-mode", default="raw",
                   choices=model_lib.NORMAL_MODES,
                   help="how the shading model reads the normal head")
    t.add_argument("--checkpoint-every", type=int, default=0,
                   help="also save every N epochs")
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("render", help="render one view under one light")
    r.add_argument("--ckpt", required=True)
    cam = r.add_mutually_exclusive_group(required=True)
    cam.add_argument("--camera-id", type=int, default=None)
    cam.add_argument("--pose", default=None,
                     help="JSON camera (intrinsics/rotation/translation/"
                          "width/height)")
    r.add_argument("--light", type=float, nargs=3, required=True,
                   metavar=("X", "Y", "Z"))
    r.add_argument("--out", required=True, help=".pfm (linear) or .png")
    r.add_argument("--dump-svbrdf", default=None,
                   help="directory for normal/albedo/roughness maps")
    r.set_defaults(func=cmd_render)

    h = sub.add_parser("relight-hdri",
                       help="relight a view with an environment map")
    h.add_argument("--ckpt", required=True)
    h.add_argument("--env", required=True, help=".pfm or .hdr lat-long map")
    h.add_argument("--sweep-n", type=int, default=3096,
                   help="light directions in the sweep")
    h.add_argument("--camera-id", type=int, default=0)
    h.add_argument("--out", required=True)
    h.set_defaults(func=cmd_relight_hdri)

    c = sub.add_parser("calib-light",
                       help="recover a light direction from a mirror ball")
    c.add_argument("--image", required=True, help=".pfm render of the ball")
    c.add_argument("--ball", type=float, nargs=3, required=True,
                   metavar=("CX", "CY", "R"), help="disc center and radius "
                                                   "in pixels")
    c.add_argument("--camera-id", type=int, default=0)
    c.add_argument("--data", required=True,
                   help="dataset whose camera calibration to use")
    c.set_defaults(func=cmd_calib_light)

    e = sub.add_parser("eval", help="score a model or baseline on the "
                                    "held-out split")
    which = e.add_mutually_exclusive_group(required=True)
    which.add_argument("--ckpt", default=None)
    which.add_argument("--baseline", default=None,
                       choices=evaluation.BASELINES)
    e.add_argument("--data", required=True)
    e.add_argument("--split", default=None,
                   help="JSON split file overriding the dataset's own")
    e.add_argument("--report", required=True, help="output CSV path")
    e.set_defaults(func=cmd_eval)

    return parser


if __name__ == "__main__":
    sys.exit(main())
