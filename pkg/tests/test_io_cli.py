"""File formats and the command-line pipelines (exit codes, artifacts)."""

import json
import math

import numpy as np
import pytest

from panocube import io as pio
from panocube.cli import main
from panocube.geometry import PoseSE3
from panocube.projection import Cubemap, EquirectImage
from panocube.synthetic import (SyntheticScene, Trajectory, cast_rays,
                                random_interior_position, random_scene,
                                random_trajectory, save_scene,
                                save_trajectory)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def test_pfm_roundtrip_exact(tmp_path, rng):
    data = rng.uniform(0.1, 10.0, size=(6, 9)).astype(np.float32)
    path = tmp_path / "d.pfm"
    pio.write_pfm(path, data)
    back = pio.read_pfm(path)
    assert np.array_equal(back, data.astype(np.float64))


def test_pfm_big_endian_and_scale(tmp_path):
    data = np.arange(12, dtype=np.float64).reshape(3, 4) + 1.0
    path = tmp_path / "be.pfm"
    with open(path, "wb") as fh:
        fh.write(b"Pf\n4 3\n2.5\n")  # positive scale = big-endian, factor 2.5
        fh.write(np.flipud(data).astype(">f4").tobytes())
    assert np.allclose(pio.read_pfm(path), data * 2.5, atol=1e-6)


def test_pfm_malformed_headers(tmp_path):
    cases = {
        "magic.pfm": b"P6\n4 3\n-1.0\n" + b"\0" * 48,
        "color.pfm": b"PF\n4 3\n-1.0\n" + b"\0" * 144,
        "dims.pfm": b"Pf\nfour three\n-1.0\n",
        "scale.pfm": b"Pf\n4 3\nxyz\n",
        "zeroscale.pfm": b"Pf\n4 3\n0\n" + b"\0" * 48,
        "truncated.pfm": b"Pf\n4 3\n-1.0\n" + b"\0" * 10,
    }
    for name, blob in cases.items():
        path = tmp_path / name
        path.write_bytes(blob)
        with pytest.raises(pio.PfmError):
            pio.read_pfm(path)


def test_png_roundtrip(tmp_path, rng):
    rgb = rng.uniform(size=(8, 16, 3))
    path = tmp_path / "img.png"
    pio.write_png(path, rgb)
    assert np.max(np.abs(pio.read_png(path) - rgb)) <= 0.5 / 255.0 + 1e-12
    gray = rng.uniform(size=(8, 16))
    path16 = tmp_path / "img16.png"
    pio.write_png(path16, gray, bit_depth=16)
    assert np.max(np.abs(pio.read_png(path16)[:, :, 0] - gray)) \
        <= 0.5 / 65535.0 + 1e-12


def test_cubemap_file_roundtrip(tmp_path, rng):
    depth = Cubemap(rng.uniform(0.5, 4.0, size=(6, 8, 8, 1)))
    paths = pio.write_cubemap(tmp_path / "d", depth, depth=True)
    assert [p.name for p in paths] == [f"d_{s}.pfm" for s in "BDFLRU"]
    back = pio.read_cubemap(tmp_path / "d", depth=True)
    assert np.allclose(back.faces, depth.faces, atol=1e-6)
    with pytest.raises(FileNotFoundError):
        pio.read_cubemap(tmp_path / "missing", depth=True)


def test_pose_json_roundtrip(tmp_path):
    pose = PoseSE3.from_rotvec((0.1, -0.2, 0.3), (0.5, 0.0, -1.0))
    path = tmp_path / "pose.json"
    pio.write_pose_json(path, pose)
    back = pio.read_pose_json(path)
    assert np.allclose(back.rotation, pose.rotation, atol=1e-12)
    assert np.allclose(back.translation, pose.translation, atol=1e-12)


# ---------------------------------------------------------------------------
# CLI helpers
# ---------------------------------------------------------------------------

@pytest.fixture
def rendered_dir(tmp_path):
    """Scene + 2-frame trajectory rendered via the CLI."""
    rng = np.random.default_rng(17)
    scene = random_scene(rng)
    traj = random_trajectory(scene, rng, n_frames=2, max_rotation=0.02,
                             max_translation=0.04)
    scene_path = tmp_path / "scene.json"
    traj_path = tmp_path / "traj.json"
    save_scene(scene_path, scene)
    save_trajectory(traj_path, traj)
    outdir = tmp_path / "frames"
    code = main(["render", str(scene_path), str(traj_path),
                 "--height", "64", "--outdir", str(outdir)])
    assert code == 0
    return tmp_path, scene, traj, outdir


# ---------------------------------------------------------------------------
# convert
# ---------------------------------------------------------------------------

def test_convert_constant_roundtrip_exact(tmp_path):
    value = 64.0 / 255.0  # exactly representable in 8-bit PNG
    src = tmp_path / "pano.png"
    pio.write_png(src, np.full((32, 64, 3), value))
    assert main(["convert", str(src), str(tmp_path / "cube"),
                 "--direction", "equi2cube", "--size", "16"]) == 0
    assert main(["convert", str(tmp_path / "cube"), str(tmp_path / "back.png"),
                 "--direction", "cube2equi", "--size", "32"]) == 0
    back = pio.read_png(tmp_path / "back.png")
    assert np.array_equal(back, np.full((32, 64, 3), value))


def test_convert_depth_roundtrip_mae(rendered_dir, tmp_path):
    base, scene, traj, outdir = rendered_dir
    depth_src = outdir / "frame_000_depth.pfm"
    assert main(["convert", str(depth_src), str(tmp_path / "dc"),
                 "--direction", "equi2cube", "--size", "32"]) == 0
    assert main(["convert", str(tmp_path / "dc"), str(tmp_path / "d2.pfm"),
                 "--direction", "cube2equi", "--size", "64"]) == 0
    orig = pio.read_pfm(depth_src)
    back = pio.read_pfm(tmp_path / "d2.pfm")
    lat = (np.arange(64) + 0.5) / 64 * 2.0 - 1.0  # normalized latitude rows
    band = np.abs(lat) <= 60.0 / 90.0
    valid = back[band] > 0
    mae = np.abs(back[band][valid] - orig[band][valid]).mean()
    assert mae < 3e-2 * orig.max()


def test_convert_malformed_pfm_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.pfm"
    bad.write_bytes(b"Pf\n4 3\n-1.0\ntrunc")
    code = main(["convert", str(bad), str(tmp_path / "cube"),
                 "--direction", "equi2cube", "--size", "8"])
    assert code == 2
    assert "bad.pfm" in capsys.readouterr().err


def test_convert_missing_file_exits_2(tmp_path):
    code = main(["convert", str(tmp_path / "nope.png"),
                 str(tmp_path / "cube"), "--direction", "equi2cube",
                 "--size", "8"])
    assert code == 2


def test_convert_bad_size_exits_1(tmp_path):
    src = tmp_path / "pano.png"
    pio.write_png(src, np.full((16, 32, 3), 0.5))
    code = main(["convert", str(src), str(tmp_path / "cube"),
                 "--direction", "equi2cube", "--size", "1"])
    assert code == 1


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------

def test_render_artifacts_and_determinism(rendered_dir, tmp_path):
    base, scene, traj, outdir = rendered_dir
    rgbs = sorted(outdir.glob("*_rgb.png"))
    pfms = sorted(outdir.glob("*_depth.pfm"))
    assert len(rgbs) == 2 and len(pfms) == 2
    assert (outdir / "poses.json").exists()
    poses = json.loads((outdir / "poses.json").read_text())
    assert len(poses["poses"]) == 2 and len(poses["relative_poses"]) == 1

    outdir2 = base / "frames2"
    assert main(["render", str(base / "scene.json"), str(base / "traj.json"),
                 "--height", "64", "--outdir", str(outdir2)]) == 0
    for name in [p.name for p in rgbs] + [p.name for p in pfms]:
        assert (outdir / name).read_bytes() == (outdir2 / name).read_bytes()


def test_rendered_depth_matches_ray_oracle(rendered_dir, rng):
    base, scene, traj, outdir = rendered_dir
    depth = pio.read_pfm(outdir / "frame_000_depth.pfm")
    pose = traj.poses[0]
    from panocube.projection import equirect_rays
    rays = equirect_rays(64).reshape(-1, 3) @ pose.rotation.T
    idx = rng.choice(rays.shape[0], size=1000, replace=False)
    t, _ = cast_rays(scene, pose.translation, rays[idx])
    # depth passed through float32 PFM storage
    assert np.max(np.abs(depth.ravel()[idx] - t)) < 1e-3


# ---------------------------------------------------------------------------
# warp / losses / estimate-pose
# ---------------------------------------------------------------------------

def _pair_paths(rendered_dir_tuple):
    base, scene, traj, outdir = rendered_dir_tuple
    ref = outdir / "frame_000_rgb.png"
    tgt = outdir / "frame_001_rgb.png"
    depth = outdir / "frame_000_depth.pfm"
    # pose taking reference-frame points into the target camera frame
    rel = traj.poses[1].inverse().compose(traj.poses[0])
    pose_path = base / "rel_pose.json"
    pio.write_pose_json(pose_path, rel)
    return ref, tgt, depth, pose_path, rel


def test_warp_command(rendered_dir, tmp_path):
    ref, tgt, depth, pose_path, rel = _pair_paths(rendered_dir)
    out_prefix = tmp_path / "warped"
    assert main(["warp", "--depth", str(depth), "--target", str(tgt),
                 "--pose", str(pose_path), "--face-width", "32",
                 "--out", str(out_prefix)]) == 0
    warped = pio.read_cubemap(out_prefix)
    assert warped.face_width == 32
    mask = pio.read_cubemap(str(out_prefix) + "_mask")
    assert set(np.unique(mask.faces)) <= {0.0, 1.0}


def test_losses_command_ground_truth_small(rendered_dir, tmp_path):
    ref, tgt, depth, pose_path, rel = _pair_paths(rendered_dir)
    out = tmp_path / "losses.json"
    assert main(["losses", "--ref", str(ref), "--tgt", str(tgt),
                 "--depth", str(depth), "--pose", str(pose_path),
                 "--face-width", "32", "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["rec"] < 0.02
    assert rec["pose"] <= 1e-9
    assert rec["total"] < 0.03
    assert rec["weights"] == {"lambda_pose": 0.1, "lambda_sm": 0.04,
                              "lambda_exp": 0.3}

    # a 5-degree pose error must strictly increase the photometric term
    bad_pose = tmp_path / "bad_pose.json"
    bumped = rel.compose(PoseSE3.from_rotvec((0.0, math.radians(5.0), 0.0)))
    pio.write_pose_json(bad_pose, bumped)
    out_bad = tmp_path / "losses_bad.json"
    assert main(["losses", "--ref", str(ref), "--tgt", str(tgt),
                 "--depth", str(depth), "--pose", str(bad_pose),
                 "--face-width", "32", "--out", str(out_bad)]) == 0
    assert json.loads(out_bad.read_text())["rec"] > rec["rec"]


def test_losses_command_with_mask(rendered_dir, tmp_path):
    ref, tgt, depth, pose_path, rel = _pair_paths(rendered_dir)
    mask_path = tmp_path / "mask.png"
    pio.write_png(mask_path, np.full((64, 128), 1.0))
    out = tmp_path / "losses_mask.json"
    assert main(["losses", "--ref", str(ref), "--tgt", str(tgt),
                 "--depth", str(depth), "--pose", str(pose_path),
                 "--mask", str(mask_path), "--face-width", "32",
                 "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["exp"] == 0.0  # all-ones mask has zero regularizer cost


def test_estimate_pose_command(rendered_dir, tmp_path):
    ref, tgt, depth, pose_path, rel = _pair_paths(rendered_dir)
    out = tmp_path / "est.json"
    assert main(["estimate-pose", "--ref", str(ref), "--tgt", str(tgt),
                 "--depth", str(depth), "--face-width", "32",
                 "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    est = PoseSE3.from_dict(rec["final"]["pose"])
    err = rel.inverse().compose(est)
    from panocube.geometry import rotation_angle
    assert math.degrees(rotation_angle(err.rotation)) < 0.5
    assert np.linalg.norm(err.translation) < 0.01
    assert rec["final"]["iterations"] == len(rec["iterations"])


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def test_metrics_depth_command(tmp_path, rng):
    gt = rng.uniform(1.0, 3.0, size=(8, 16)).astype(np.float32)
    pio.write_pfm(tmp_path / "gt.pfm", gt)
    pio.write_pfm(tmp_path / "pred.pfm", gt * 1.1)
    out = tmp_path / "m.json"
    assert main(["metrics", "--kind", "depth", "--pred",
                 str(tmp_path / "pred.pfm"), "--gt", str(tmp_path / "gt.pfm"),
                 "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert abs(rec["abs_rel"] - 0.1) < 1e-5
    assert rec["delta1"] == 1.0


def test_metrics_rpe_command(tmp_path):
    g = [PoseSE3.identity(), PoseSE3.from_rotvec((0, 0.1, 0), (0.1, 0, 0))]
    p = [PoseSE3.from_rotvec((0, math.radians(10.0), 0)), g[1]]
    pio.write_poses_json(tmp_path / "gt.json", [], relative=g)
    pio.write_poses_json(tmp_path / "pred.json", [], relative=p)
    out = tmp_path / "rpe.json"
    assert main(["metrics", "--kind", "rpe", "--pred",
                 str(tmp_path / "pred.json"), "--gt", str(tmp_path / "gt.json"),
                 "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert abs(rec["rpe_r_deg"] - 5.0) < 1e-6  # mean of 10 and 0 degrees
    assert rec["rpe_t"] == 0.0


# ---------------------------------------------------------------------------
# misc contracts
# ---------------------------------------------------------------------------

def test_dump_config(capsys):
    code = main(["bench", "--heights", "64", "--iters", "2", "--dump-config"])
    assert code == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["heights"] == [64] and cfg["iters"] == 2


def test_json_output_is_nine_significant_digits(tmp_path, rng):
    gt = rng.uniform(1.0, 3.0, size=(8, 16)).astype(np.float32)
    pio.write_pfm(tmp_path / "gt.pfm", gt)
    pio.write_pfm(tmp_path / "pred.pfm", gt * 1.37)
    out = tmp_path / "m.json"
    main(["metrics", "--kind", "depth", "--pred", str(tmp_path / "pred.pfm"),
          "--gt", str(tmp_path / "gt.pfm"), "--out", str(out)])
    for key, val in json.loads(out.read_text()).items():
        if isinstance(val, float):
            assert val == float(f"{val:.9g}")
