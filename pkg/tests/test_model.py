import numpy as np
import pytest

from relightlf.datagen import generate_dataset, light_sphere_grid, make_scene
from relightlf.errors import OutOfBoundsError, TrainingError
from relightlf.geometry import TwoPlaneConfig, look_at_camera
from relightlf.model import (
    RelitModel,
    build_model,
    check_decompose_gradients,
    check_loss_gradients,
    check_render_gradients,
    checkpoint_digest,
    decompose,
    geometry_normal,
    load_loss_history,
    load_model,
    loss_total,
    predict,
    render_ray,
    render_view,
    sample_losses,
    save_loss_history,
    save_model,
    train,
)
from relightlf.nn import TrainConfig

CFG = TwoPlaneConfig()


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def rand_batch(rng, n, facing=True):
    ray4d = rng.uniform(-1.0, 1.0, size=(n, 4))
    if facing:
        view = np.tile(unit([0.3, 0.2, 0.9]), (n, 1))
        light = np.tile(unit([-0.1, 0.4, 0.9]), (n, 1))
    else:
        view = rng.normal(size=(n, 3))
        view /= np.linalg.norm(view, axis=1, keepdims=True)
        light = rng.normal(size=(n, 3))
        light /= np.linalg.norm(light, axis=1, keepdims=True)
    color = rng.uniform(0.0, 1.0, size=(n, 3))
    return {"ray4d": ray4d, "view": view, "light": light, "color": color}


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory):
    scene = make_scene("sphere")
    cams = [look_at_camera([0.0, 0.0, -2.4], [0.0, 0.0, 0.0], 8, 8, 10.0),
            look_at_camera([0.4, 0.2, -2.3], [0.0, 0.0, 0.0], 8, 8, 10.0)]
    lights = light_sphere_grid(count=3, hemisphere=True)
    return generate_dataset(scene, cams, lights, seed=9,
                            out_dir=tmp_path_factory.mktemp("ds"),
                            holdout_lights=1)


def test_architecture_shapes():
    m = build_model("full", CFG, seed=0)
    assert len(m.trunk) == 8
    assert m.trunk[0].weight.shape == (256, 4)
    assert all(layer.weight.shape == (256, 256) for layer in m.trunk[1:])
    assert m.heads["normal"].weight.shape == (3, 256)
    assert m.heads["albedo"].weight.shape == (3, 256)
    assert m.heads["roughness"].weight.shape == (1, 256)
    assert m.heads["roughness"].activation == "sigmoid"
    assert m.encoder[0].weight.shape == (128, 11)
    assert len(m.encoder) == 8
    assert m.tail[0].weight.shape == (64, 131)
    assert m.tail[1].weight.shape == (3, 64)
    assert all(layer.activation == "sigmoid" for layer in m.tail)

    nr = build_model("no_roughness", CFG, seed=0)
    assert "roughness" not in nr.heads
    assert nr.encoder[0].weight.shape == (128, 11)

    v = build_model("vanilla", CFG, seed=0)
    assert v.trunk is None and v.heads is None
    assert v.encoder[0].weight.shape == (128, 4)


def test_decompose_contract():
    m = build_model("full", CFG, seed=3)
    ray = np.array([0.1, -0.2, 0.3, 0.4])
    svb = decompose(m, ray)
    assert svb.normal.shape == (3,) and svb.albedo.shape == (3,)
    assert 0.0 < svb.roughness < 1.0
    again = decompose(m, ray)
    np.testing.assert_array_equal(svb.normal, again.normal)
    np.testing.assert_array_equal(svb.albedo, again.albedo)
    assert svb.roughness == again.roughness

    batch = decompose(m, np.array([[0.0, 0.0, 0.0, 0.0],
                                   [1.0, -1.0, 0.5, -0.5]]))
    assert batch.normal.shape == (2, 3) and batch.roughness.shape == (2,)

    decompose(m, np.array([1.0 + 5e-7, 0.0, 0.0, 0.0]))  # inside tolerance
    with pytest.raises(OutOfBoundsError):
        decompose(m, np.array([1.1, 0.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        decompose(build_model("vanilla", CFG, seed=0), ray)


def test_render_ray_contract():
    m = build_model("full", CFG, seed=4)
    ray = np.array([0.2, 0.1, -0.3, 0.0])
    svb = decompose(m, ray)
    l1 = unit([0.0, 0.3, -1.0])
    rgb = render_ray(m, svb, ray, l1)
    assert rgb.shape == (3,)
    assert np.all(rgb > 0.0) and np.all(rgb < 1.0)
    np.testing.assert_array_equal(rgb, render_ray(m, svb, ray, l1))
    other = render_ray(m, svb, ray, unit([0.5, -0.2, -0.8]))
    assert not np.array_equal(rgb, other)
    with pytest.raises(ValueError):
        render_ray(m, None, ray, l1)
    with pytest.raises(ValueError):
        render_ray(m, svb, ray, np.array([0.0, 0.0, -2.0]))


def test_predict_is_composition():
    m = build_model("full", CFG, seed=5)
    rng = np.random.default_rng(0)
    rays = rng.uniform(-1.0, 1.0, size=(6, 4))
    l = unit([0.2, -0.4, -0.9])
    rgb, svb = predict(m, rays, l)
    manual = render_ray(m, decompose(m, rays), rays, l)
    np.testing.assert_array_equal(rgb, manual)
    assert svb.normal.shape == (6, 3)

    per_ray = np.stack([predict(m, rays[i], l)[0] for i in range(6)])
    np.testing.assert_allclose(rgb, per_ray, atol=1e-6)

    v = build_model("vanilla", CFG, seed=5)
    rgb_v, svb_v = predict(v, rays, l)
    assert svb_v is None and rgb_v.shape == (6, 3)


def test_sample_losses_worked_values():
    c = np.array([[0.4, 0.2, 0.6]])
    n_unit = np.array([[0.0, 1.0, 0.0]])
    total, lp, lm, ln = sample_losses(c, c, m_vals=c, n_raw=n_unit)
    assert total[0] == lp[0] == lm[0] == ln[0] == 0.0

    total, lp, lm, ln = sample_losses(c, c, m_vals=c,
                                      n_raw=np.zeros((1, 3)))
    assert ln[0] == 1.0
    np.testing.assert_allclose(total[0], 0.01, atol=1e-15)

    c_pred = np.array([[0.5, 0.5, 0.5]])
    color = np.array([[0.2, 0.5, 0.5]])      # photometric 0.3
    m_vals = np.array([[0.5, 0.5, 0.7]])     # microfacet 0.2
    n_raw = np.array([[0.5, 0.5, 0.0]])      # |1 - 0.5| = 0.5
    total, lp, lm, ln = sample_losses(c_pred, color, m_vals, n_raw)
    np.testing.assert_allclose([lp[0], lm[0], ln[0]], [0.3, 0.2, 0.5],
                               atol=1e-12)
    np.testing.assert_allclose(total[0], 0.3 + 0.1 * 0.2 + 0.01 * 0.5,
                               atol=1e-12)


def test_loss_total_outputs():
    rng = np.random.default_rng(1)
    for variant in ("full", "no_roughness", "vanilla"):
        m = build_model(variant, CFG, seed=2)
        batch = rand_batch(rng, 8)
        loss, parts, grads = loss_total(m, batch)
        assert np.isfinite(loss) and loss > 0.0
        assert set(parts) == {"total", "photometric", "microfacet", "normal",
                              "samples"}
        assert parts["samples"].shape == (8, 4)
        np.testing.assert_allclose(parts["samples"][:, 0].mean(), loss,
                                   atol=1e-12)
        params = m.param_list()
        assert len(grads) == len(params)
        for g, p in zip(grads, params):
            assert g.shape == p.shape
        if variant == "vanilla":
            assert parts["microfacet"] == 0.0 and parts["normal"] == 0.0


def test_loss_nan_names_sample():
    m = build_model("full", CFG, seed=2)
    batch = rand_batch(np.random.default_rng(2), 5)
    batch["color"][3, 1] = np.nan
    with pytest.raises(TrainingError, match="3"):
        loss_total(m, batch)


def test_loss_gradients_finite_difference():
    rng = np.random.default_rng(7)
    cases = [("full", "raw"), ("full", "decoded"), ("no_roughness", "raw"),
             ("vanilla", "raw")]
    for variant, mode in cases:
        m = build_model(variant, CFG, seed=13,
                        normal_mode=mode).cast(np.float64)
        batch = rand_batch(np.random.default_rng(3), 4)
        err = check_loss_gradients(m, batch, rng, n_coords=60)
        assert err < 1e-3, f"{variant}/{mode}: {err}"


def test_architecture_gradients_finite_difference():
    rng = np.random.default_rng(11)
    full = build_model("full", CFG, seed=21).cast(np.float64)
    assert check_decompose_gradients(full, rng) < 1e-4
    assert check_render_gradients(full, rng) < 1e-4
    van = build_model("vanilla", CFG, seed=22).cast(np.float64)
    assert check_render_gradients(van, rng) < 1e-4


def test_geometry_normal_modes():
    raw = build_model("full", CFG, seed=0, normal_mode="raw")
    dec = build_model("full", CFG, seed=0, normal_mode="decoded")
    n_raw = np.array([[0.2, 0.4, 0.9], [0.0, 0.0, 0.0]])
    got_raw = geometry_normal(raw, n_raw)
    np.testing.assert_allclose(got_raw[0], unit([0.2, 0.4, 0.9]), atol=1e-12)
    got_dec = geometry_normal(dec, n_raw)
    np.testing.assert_allclose(got_dec[0], unit([-0.6, -0.2, 0.8]),
                               atol=1e-12)
    assert np.all(np.isfinite(got_raw)) and np.all(np.isfinite(got_dec))


def test_train_history_and_determinism(tiny_dataset):
    cfg = TrainConfig(epochs=2, batch_size=256, lr=1e-3, seed=11)
    m1 = build_model("full", tiny_dataset.two_plane, seed=20)
    h1 = train(m1, tiny_dataset, cfg)
    m2 = build_model("full", tiny_dataset.two_plane, seed=20)
    h2 = train(m2, tiny_dataset, cfg)
    assert h1.shape == (2, 5)
    np.testing.assert_array_equal(h1[:, 0], [1.0, 2.0])
    np.testing.assert_array_equal(h1, h2)
    for a, b in zip(m1.param_list(), m2.param_list()):
        np.testing.assert_array_equal(a, b)


def test_train_loss_decreases(tiny_dataset):
    cfg = TrainConfig(epochs=8, batch_size=256, lr=1e-3, seed=1)
    m = build_model("full", tiny_dataset.two_plane, seed=6)
    h = train(m, tiny_dataset, cfg)
    assert h[-1, 1] < h[0, 1]


def test_train_lr_zero_constant(tiny_dataset):
    cfg = TrainConfig(epochs=3, batch_size=256, lr=0.0, seed=5)
    m = build_model("no_roughness", tiny_dataset.two_plane, seed=8)
    before = [p.copy() for p in m.param_list()]
    h = train(m, tiny_dataset, cfg)
    for col in range(1, 5):
        assert h[0, col] == h[1, col] == h[2, col]
    for p, q in zip(m.param_list(), before):
        np.testing.assert_array_equal(p, q)


def test_train_split_validation(tiny_dataset):
    import dataclasses

    m = build_model("vanilla", tiny_dataset.two_plane, seed=0)
    cfg = TrainConfig(epochs=1, batch_size=64, seed=0)
    ds_all_lights = dataclasses.replace(
        tiny_dataset,
        split={"held_out_views": [], "held_out_lights": [0, 1, 2], "seed": 0})
    with pytest.raises(ValueError):
        train(m, ds_all_lights, cfg)
    ds_all_views = dataclasses.replace(
        tiny_dataset,
        split={"held_out_views": [0, 1], "held_out_lights": [], "seed": 0})
    with pytest.raises(ValueError):
        train(m, ds_all_views, cfg)


def test_loss_history_file_roundtrip(tmp_path):
    hist = np.array([[1.0, 0.5, 0.4, 0.3, 0.2], [2.0, 0.4, 0.3, 0.2, 0.1]])
    path = tmp_path / "loss.csv"
    save_loss_history(hist, path)
    text = path.read_text()
    assert text.startswith("# epoch,total,photometric,microfacet,normal")
    back = load_loss_history(path)
    np.testing.assert_allclose(back, hist, atol=1e-12)


def test_render_view_masks_and_matches_predict():
    tight = TwoPlaneConfig(bounds=np.array([[-0.25, 0.25]] * 4))
    m = build_model("full", tight, seed=17)
    cam = look_at_camera([0.0, 0.0, -2.4], [0.0, 0.0, 0.0], 12, 12, 8.0)
    l = unit([0.1, 0.4, -0.9])
    res = render_view(m, cam, l)
    assert res.image.shape == (12, 12, 3)
    assert res.mask.shape == (12, 12)
    assert res.mask.any() and not res.mask.all()
    np.testing.assert_array_equal(res.image[~res.mask], 0.0)
    assert res.normal is not None
    norms = np.linalg.norm(res.normal[res.mask], axis=-1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-5)

    again = render_view(m, cam, l)
    np.testing.assert_array_equal(res.image, again.image)

    from relightlf.geometry import batch_rays_for_view
    _, ray4d, valid = batch_rays_for_view(cam, tight)
    idx = int(np.flatnonzero(valid)[0])
    rgb, _ = predict(m, ray4d[idx], l)
    np.testing.assert_allclose(res.image.reshape(-1, 3)[idx], rgb, atol=1e-6)

    v = build_model("vanilla", tight, seed=17)
    res_v = render_view(v, cam, l)
    assert res_v.normal is None and res_v.albedo is None


def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    rays = rng.uniform(-1.0, 1.0, size=(5, 4))
    l = unit([0.3, 0.1, -0.9])
    cam = look_at_camera([0.0, 0.0, -2.0], [0.0, 0.0, 0.0], 8, 8, 10.0)
    for variant in ("full", "no_roughness", "vanilla"):
        m = build_model(variant, CFG, seed=31, normal_mode="decoded",
                        cameras=[cam], lights=np.array([[0.0, 0.0, -1.0]]))
        out = tmp_path / variant
        save_model(m, out)
        back = load_model(out)
        assert back.variant == variant
        assert back.normal_mode == "decoded"
        np.testing.assert_array_equal(back.two_plane.bounds,
                                      m.two_plane.bounds)
        assert len(back.cameras) == 1
        np.testing.assert_allclose(back.cameras[0].intrinsics,
                                   cam.intrinsics)
        np.testing.assert_array_equal(back.lights, m.lights)
        for a, b in zip(m.param_list(), back.param_list()):
            np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(predict(m, rays, l)[0],
                                      predict(back, rays, l)[0])


def test_checkpoint_digest_tracks_content(tmp_path):
    m = build_model("full", CFG, seed=1)
    save_model(m, tmp_path / "a")
    save_model(m, tmp_path / "b")
    assert checkpoint_digest(tmp_path / "a") == \
        checkpoint_digest(tmp_path / "b")
    m.tail[0].weight[0, 0] += 1.0
    save_model(m, tmp_path / "c")
    assert checkpoint_digest(tmp_path / "a") != \
        checkpoint_digest(tmp_path / "c")


def test_load_model_errors(tmp_path):
    with pytest.raises(ValueError):
        load_model(tmp_path / "missing")
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "model.json").write_text("{broken")
    with pytest.raises(ValueError):
        load_model(bad)
    m = build_model("vanilla", CFG, seed=0)
    out = tmp_path / "ok"
    save_model(m, out)
    meta = (out / "model.json").read_text().replace(
        '"format_version": 1', '"format_version": 99')
    (out / "model.json").write_text(meta)
    with pytest.raises(ValueError):
        load_model(out)


def test_build_model_validation():
    with pytest.raises(ValueError):
        build_model("fancy", CFG, seed=0)
    with pytest.raises(ValueError):
        build_model("full", CFG, seed=0, normal_mode="both")
    a = build_model("full", CFG, seed=40)
    b = build_model("full", CFG, seed=40)
    for p, q in zip(a.param_list(), b.param_list()):
        np.testing.assert_array_equal(p, q)
