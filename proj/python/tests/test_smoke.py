import numpy as np
import pytest

import pypml


def test_ssim_basic():
    rng = np.random.default_rng(0)
    a = rng.random((16, 16))
    b = rng.random((16, 16))
    assert pypml.ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert pypml.ssim(a, b) == pytest.approx(pypml.ssim(b, a), abs=1e-12)
    assert -1.0 <= pypml.ssim(a, b) <= 1.0
    with pytest.raises(ValueError):
        pypml.ssim(a, rng.random((8, 8)))


def test_constant_images_closed_form():
    c1 = 0.01**2
    expected = (2 * 0.5 * 0.25 + c1) / (0.5**2 + 0.25**2 + c1)
    got = pypml.ssim(np.full((16, 16), 0.5), np.full((16, 16), 0.25))
    assert got == pytest.approx(expected, abs=1e-9)


def test_config_round_trip_and_override():
    cfg = pypml.RunConfig()
    assert cfg.image_size == 64
    assert len(cfg.steering_grid) == 21
    cfg.override("speed", "4.5")
    again = pypml.RunConfig.from_json(cfg.to_json())
    assert again == cfg
    assert "prediction_horizon" in pypml.RunConfig.keys()
    with pytest.raises(ValueError):
        cfg.override("steering_grid", "0,1")


def test_render_and_mirror():
    left = pypml.render_start("straight", lateral=-0.5)
    right = pypml.render_start("straight", lateral=0.5)
    assert left.shape == (64, 64)
    assert np.array_equal(pypml.mirror_image(left), right)
    pref = pypml.make_preference("town01")
    assert np.array_equal(pypml.mirror_image(pref), pref)


def test_corpus_round_trip(tmp_path):
    obs, actions, nxt = pypml.collect("zigzag", 50, seed=3)
    assert obs.shape == (50, 64, 64) and nxt.shape == obs.shape
    assert np.all(np.abs(actions) <= 1.0)
    path = tmp_path / "z.pmld"
    pypml.save_transitions(str(path), obs, actions, nxt)
    o2, a2, n2 = pypml.load_transitions(str(path))
    # float32 on disk
    assert np.allclose(o2, obs, atol=1e-7) and np.allclose(a2, actions, atol=1e-7)
    again = tmp_path / "z2.pmld"
    pypml.save_transitions(str(again), o2, a2, n2)
    assert path.read_bytes() == again.read_bytes()

    images, labels = pypml.collect("expert", 30, seed=4)
    fpath = tmp_path / "e.pmld"
    pypml.save_frames(str(fpath), images, labels)
    i2, l2 = pypml.load_frames(str(fpath))
    assert i2.shape == images.shape and np.allclose(l2, labels, atol=1e-7)


def test_expert_evaluation(tmp_path):
    rows = pypml.evaluate("expert", families=["town01"], tasks=["straight"], runs=2,
                          out=str(tmp_path / "ev"))
    straight = [r for r in rows if r["task"] == "straight"][0]
    assert straight["successes"] == 2
    assert straight["success_rate"] == pytest.approx(100.0)
    assert "straight" in pypml.report(str(tmp_path / "ev"))
    with pytest.raises(ValueError):
        pypml.evaluate("bc")
