"""Python-facing smoke tests for the compiled extension.

CMake builds the module into the build tree; point PYTHONPATH there (or at an
installed wheel) before running pytest.
"""

import json
import math

import numpy as np
import pytest

import campcore as cc


def test_catalog_and_clip_generation():
    catalog = cc.default_skill_catalog()
    assert [s.name for s in catalog][:2] == ["trot_2Hz", "trot_4Hz"]
    assert len(catalog) == 8

    clip = cc.generate_clip(catalog[0].spec, duration=4.0, dt=0.02, label=0)
    assert clip.num_frames == 201
    q = clip.joint_positions()
    assert q.shape == (201, 12)
    # one full 2 Hz cycle apart, joints repeat
    assert np.abs(q[0] - q[25]).max() < 1e-6

    feats = clip.amp_features()
    assert feats.shape == (201, 43)


def test_leg_kinematics_round_trip():
    target = np.array([0.05, 0.0955 + 0.02, -0.25])
    q = cc.leg_inverse_kinematics(target, hip=0.0955)
    back = cc.leg_forward_kinematics(q, hip=0.0955)
    assert np.linalg.norm(back - target) < 1e-9
    with pytest.raises(cc.UnreachableTargetError):
        cc.leg_inverse_kinematics(np.array([0.0, 0.0, -0.6]))


def test_reward_formulas():
    assert cc.style_reward_from_value(1.0) == 1.0
    assert cc.style_reward_from_value(0.0) == pytest.approx(0.75)
    assert cc.compose_reward(2.25, 1.0, 1.0) == pytest.approx(3.55)
    z = np.array([1.0, 0.0, 0.0])
    assert cc.skill_reward(z, -z) == pytest.approx(-1.0)


def test_environment_step_and_observation():
    env = cc.QuadrupedEnv(seed=3, randomize=False)
    cmd = cc.Command.for_skill(0, 3, np.zeros(3))
    obs = env.observation(cmd, np.zeros(12))
    assert obs.shape == (48,)  # 45 + 3 skills
    assert env.task_reward(cmd) == pytest.approx(2.25)

    feature, contacts, terminated = env.step(np.zeros(12))
    assert feature.shape == (43,)
    assert list(contacts) == [True] * 4
    assert not terminated
    assert env.time == pytest.approx(0.02)


def test_environment_determinism():
    def run():
        env = cc.QuadrupedEnv(seed=11, randomize=True)
        out = []
        for k in range(20):
            action = 0.1 * np.sin(0.3 * k + np.arange(12))
            feature, _, _ = env.step(action)
            out.append(feature)
        return np.asarray(out)

    a, b = run(), run()
    assert np.array_equal(a, b)


def test_analysis_functions():
    a = np.array([[0.0, 1.0, 2.0]])
    b = np.array([[0.0, 2.0]])
    assert cc.dtw_distance(a, b) == pytest.approx(1.0)

    rng = np.random.default_rng(0)
    blobs = np.concatenate(
        [rng.normal(loc=4.0 * i, scale=0.2, size=(2, 40)) for i in range(3)], axis=1
    )
    labels = [i for i in range(3) for _ in range(40)]
    assignments, purity = cc.kmeans_purity(blobs, labels, 3)
    assert purity == pytest.approx(1.0)
    assert len(assignments) == 120

    proj = cc.pca_project(blobs, 2)
    assert proj.shape == (2, 120)

    target = np.sin(0.1 * np.arange(100))[None, :].repeat(12, axis=0)
    assert cc.tracking_accuracy(target, target) == pytest.approx(100.0)


def test_contact_metrics_trot():
    spec = cc.default_skill_catalog()[0].spec  # trot_2Hz
    contacts = []
    for k in range(300):
        t = 0.02 * k
        row = [
            (spec.frequency * t + spec.phase_offsets[leg]) % 1.0 < spec.duty_factor
            for leg in range(4)
        ]
        contacts.append(row)
    duty, offsets = cc.contact_metrics(contacts, spec.frequency, 0.02)
    assert duty[0] == pytest.approx(spec.duty_factor, abs=0.05)
    assert min(abs(offsets[1] - 0.5), abs(offsets[1] - 0.5 + 1)) < 0.05


def test_end_to_end_training(tmp_path):
    config = json.loads(cc.default_config_json())
    config["dataset"]["gaits"] = ["trot", "pronk"]
    config["dataset"]["frequencies_hz"] = [2.0]
    config["dataset"]["duration_s"] = 1.0
    config["dataset"]["transitions_per_clip"] = 40
    config["trainer"].update(
        iterations=2,
        num_envs=4,
        horizon=8,
        minibatch_size=16,
        disc_batch=16,
        episode_seconds=2.0,
        active_skills=["trot_2Hz", "pronk_2Hz"],
        checkpoint_every=0,
    )
    config_json = json.dumps(config)

    data_dir = tmp_path / "data"
    run_dir = tmp_path / "run"
    cc.generate_data(config_json, out_dir=data_dir, seed=5)
    assert (data_dir / "manifest.json").exists()

    cc.train(config_json, data_dir=data_dir, out_dir=run_dir)
    assert (run_dir / "checkpoint_final" / "actor.net").exists()
    metrics = (run_dir / "metrics.csv").read_text().strip().splitlines()
    assert len(metrics) == 3  # header + 2 iterations
    assert metrics[0].startswith("iteration,task,style,skill")


def test_config_validation_errors():
    with pytest.raises(cc.ConfigError):
        cc.generate_data('{"unknown_section": {}}', out_dir="/tmp/never_used", seed=0)


def test_math_consistency_quick():
    # pace at 4 Hz: stance anchoring ties command speed to stride
    spec = cc.make_skill_catalog(["pace"], [4.0])[0].spec
    v = spec.command_velocity
    assert v[0] == pytest.approx(spec.step_length * spec.frequency / spec.duty_factor)
    assert math.isclose(sum(x * x for x in v[1:]), 0.0)
