import json
import logging
import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

from migbatchsim.tuning import (BatchingPolicy, Curve, CurvePoint, MigConfig, ModelProfile, VGpuShape,
                                build_batching_policy, build_static_policy, derive_time_queue, exec_latency,
                                find_batch_knee, load_profile, parse_mig_notation, sweep_curve, tail_at_knee)
from migbatchsim.utils.errors import ProfileFormatError

DATA_DIR = Path(__file__).resolve().parents[1] / "data" / "profiles"
BATCHES = [1, 2, 4, 8, 16, 32, 64, 128, 256]


def knee_profile(knee: int, base_us: float = 35_000.0, tail_gain: float = 0.01) -> ModelProfile:
    """Throughput doubles with every batch doubling up to `knee`, then grows by `tail_gain` per step."""
    throughput = []
    for b in BATCHES:
        if b <= knee:
            throughput.append(b / base_us)
        else:
            steps = int(round(math.log2(b / knee)))
            throughput.append(knee / base_us * (1 + tail_gain) ** steps)
    latency = np.array([[b / t] for b, t in zip(BATCHES, throughput)])
    return ModelProfile("synthetic", VGpuShape(1, 5), np.array(BATCHES), np.array([1.0]), latency)


def grid_profile() -> ModelProfile:
    lengths = np.array([2.5, 5.0])
    latency = np.array([[10_000.0, 20_000.0], [20_000.0, 40_000.0], [30_000.0, 60_000.0]])
    return ModelProfile("grid", VGpuShape(1, 5), np.array([1, 2, 4]), lengths, latency)


def test_tuning():
    """
    Test profile lookup, curve sweeps, knee detection and policy derivation
    """

    print("Testing Tuning ...")
    test_exec_latency_lookup()
    test_exec_latency_monotone()
    test_profile_loading()
    test_profile_errors()
    test_sweep_curve()
    test_knee_recovery()
    test_knee_edge_cases()
    test_tail_at_knee()
    test_time_queue_formula()
    test_vision_policy()
    test_audio_policy()
    test_static_policy()
    test_policy_validation_and_json()
    test_mig_configs()


def test_exec_latency_lookup():
    profile = grid_profile()
    assert exec_latency(profile, 2, 2.5) == 20_000, "Exact value on grid points"
    assert exec_latency(profile, 1.5, 2.5) == 15_000, "Interpolation along batch"
    assert exec_latency(profile, 1, 3.75) == 15_000, "Interpolation along length"
    assert exec_latency(profile, 3, 3.75) == int(round((25_000 + 50_000) / 2))

    logger = logging.getLogger("migbatchsim.tuning.profile")
    records = []
    handler = logging.Handler()
    handler.emit = records.append
    logger.addHandler(handler)
    try:
        assert exec_latency(profile, 8, 5.0) == 60_000, "Clamped beyond the batch axis"
        assert exec_latency(profile, 16, 5.0) == 60_000
        assert exec_latency(profile, 1, 1.0) == 10_000, "Clamped below the length axis"
    finally:
        logger.removeHandler(handler)
    warnings = [r for r in records if r.levelno == logging.WARNING]
    assert len(warnings) == 2, f"One warning per axis direction, got {len(warnings)}"

    for bad in ((0, 2.5), (-1, 2.5), (1, 0.0), (1, -3.0)):
        with pytest.raises(ValueError):
            exec_latency(profile, *bad)

    print("Test Passed: exact, bilinear and clamped lookups")


def test_exec_latency_monotone():
    profile = load_profile(DATA_DIR / "conformer_1g.csv")
    rng = np.random.default_rng(11785)
    for _ in range(2000):
        b = float(rng.uniform(1, 256))
        l = float(rng.uniform(2.5, 25))
        db = float(rng.uniform(0, 20))
        dl = float(rng.uniform(0, 3))
        assert exec_latency(profile, b + db, l) >= exec_latency(profile, b, l)
        assert exec_latency(profile, b, min(25.0, l + dl)) >= exec_latency(profile, b, l)

    print("Test Passed: interpolated surface is monotone")


def test_profile_loading():
    vision = load_profile(DATA_DIR / "mobilenet_1g.csv")
    assert vision.is_vision and vision.model_name == "mobilenet_1g"
    assert exec_latency(vision, 16, 1.0) == 35_000
    audio = load_profile(DATA_DIR / "conformer_1g.csv", model_name="conformer")
    assert not audio.is_vision and audio.max_length == 25.0
    assert exec_latency(audio, 16, 2.5) == 32_000

    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "sparse.csv"
        path.write_text("batch,length_s,latency_us\n1,2.5,1000\n4,2.5,4000\n1,5,2000\n2,5,3000\n4,5,5000\n")
        sparse = load_profile(path)
    assert exec_latency(sparse, 2, 2.5) == 2000, "Missing cells are filled along the batch axis"
    assert exec_latency(sparse, 2, 5.0) == 3000

    print("Test Passed: profile CSV loading")


def _expect_profile_error(text: str, fragment: str):
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "p.csv"
        path.write_text(text)
        with pytest.raises(ProfileFormatError) as info:
            load_profile(path)
    assert fragment in str(info.value), f"'{fragment}' not in '{info.value}'"


def test_profile_errors():
    header = "batch,length_s,latency_us\n"
    _expect_profile_error("", "empty")
    _expect_profile_error("b,l,t\n1,1,1\n", ":1:")
    _expect_profile_error(header + "1,1.0,100\n2,1.0,abc\n", ":3:")
    _expect_profile_error(header + "1,1.0,100\n1.5,1.0,200\n", ":3:")
    _expect_profile_error(header + "1,1.0,100\n2,1.0,0\n", ":3:")
    _expect_profile_error(header + "1,1.0,100\n1,1.0,120\n", "duplicate")
    _expect_profile_error(header + "1,1.0,100\n2,1.0,50\n", "non-decreasing")

    print("Test Passed: profile errors")


def test_sweep_curve():
    profile = knee_profile(16)
    curve = sweep_curve(profile, 1.0)
    assert curve.batch_sizes == tuple(BATCHES)
    assert curve.points[4].throughput == pytest.approx(16 / 0.035)
    assert curve.points[4].p95_us == 35_000, "Saturated-feed tail equals execution latency"
    seven = sweep_curve(profile, 1.0, vgpu_count=7)
    assert seven.points[4].throughput == pytest.approx(7 * curve.points[4].throughput)
    single = sweep_curve(profile, 1.0, [8])
    assert len(single.points) == 1
    with pytest.raises(ValueError):
        sweep_curve(profile, 1.0, [])
    with pytest.raises(ValueError):
        Curve(1.0, (CurvePoint(4, 1.0, 1), CurvePoint(2, 1.0, 1)))

    print("Test Passed: sweep_curve")


def test_knee_recovery():
    for knee in (16, 4, 2, 128, 32):
        curve = sweep_curve(knee_profile(knee), 1.0)
        assert find_batch_knee(curve, 0.05) == knee, f"Expected knee {knee}"
        # local optimality on the grid
        points = {p.batch: p.throughput for p in curve.points}
        if 2 * knee in points:
            assert points[2 * knee] <= 1.05 * points[knee]
        if knee // 2 in points:
            assert points[knee] > 1.05 * points[knee // 2]

    print("Test Passed: knee recovery (16, 4, 2, 128, 32)")


def test_knee_edge_cases():
    linear = Curve(1.0, tuple(CurvePoint(b, float(b), 1000) for b in BATCHES))
    assert find_batch_knee(linear) == 256, "Never saturates: largest batch"
    flat = Curve(1.0, tuple(CurvePoint(b, 100.0, 1000 * b) for b in BATCHES))
    assert find_batch_knee(flat) == 1, "Saturated from the start: smallest batch"
    # +4.9% is below delta
    tie = Curve(1.0, (CurvePoint(1, 100.0, 10), CurvePoint(2, 104.9, 19), CurvePoint(4, 300.0, 20)))
    assert find_batch_knee(tie) == 1
    with pytest.raises(ValueError):
        find_batch_knee(Curve(1.0, (CurvePoint(1, 1.0, 1),)))
    with pytest.raises(ValueError):
        find_batch_knee(Curve(1.0, (CurvePoint(1, 0.0, 1), CurvePoint(2, 1.0, 1))))
    with pytest.raises(ValueError):
        find_batch_knee(linear, delta=1.5)

    print("Test Passed: knee edge cases")


def test_tail_at_knee():
    curve = sweep_curve(knee_profile(16), 1.0)
    assert tail_at_knee(curve, 16) == 35_000
    single = Curve(2.5, (CurvePoint(8, 10.0, 1234),))
    assert tail_at_knee(single, 8) == 1234
    with pytest.raises(ValueError):
        tail_at_knee(curve, 3)
    # different knees, same latency at the knee
    short = sweep_curve(knee_profile(16), 1.0)
    long = sweep_curve(knee_profile(4), 1.0)
    assert tail_at_knee(short, find_batch_knee(short)) == tail_at_knee(long, find_batch_knee(long))

    print("Test Passed: tail at knee")


def test_time_queue_formula():
    assert derive_time_queue(35_000, 7) == 5_000
    assert derive_time_queue(35_000, 1) == 35_000
    with pytest.raises(ValueError):
        derive_time_queue(0, 7)
    with pytest.raises(ValueError):
        derive_time_queue(35_000, 0)

    print("Test Passed: Time_queue = Tail_knee / V")


def test_vision_policy():
    profile = load_profile(DATA_DIR / "mobilenet_1g.csv")
    policy = build_batching_policy(profile, MigConfig(7))
    assert policy.batch_max == (16,) and policy.is_single_bucket
    assert policy.tail_knee == 35_000 and policy.time_queue == 5_000
    single = build_batching_policy(profile, MigConfig(1))
    assert single.time_queue == 7 * policy.time_queue, "time_queue scales exactly with 1/V"
    assert build_batching_policy(profile, MigConfig(7)) == policy, "Same profile, same policy"

    print("Test Passed: vision policy")


def test_audio_policy():
    profile = load_profile(DATA_DIR / "conformer_1g.csv")
    policy = build_batching_policy(profile, MigConfig(7), bucket_width=2.5)
    assert policy.batch_max == (64, 32, 16, 8, 4, 2, 1, 1, 1, 1), policy.batch_max
    assert policy.tail_knee == 36_500, "Median of 32..41 ms"
    assert policy.time_queue == 5_214
    assert policy.bucket_range(2) == (5.0, 7.5)

    # a knee that grows with length is clamped to keep batch_max non-increasing
    lengths = np.array([2.5, 5.0])
    latency = np.array([[1000.0 * max(1, b / 4), 2000.0 * max(1, b / 8)] for b in BATCHES])
    bumpy = ModelProfile("bumpy", VGpuShape(1, 5), np.array(BATCHES), lengths, latency)
    clamped = build_batching_policy(bumpy, MigConfig(7))
    assert clamped.raw_knees == (4, 8) and clamped.batch_max == (4, 4)

    print("Test Passed: audio policy")


def test_static_policy():
    profile = load_profile(DATA_DIR / "conformer_1g.csv")
    policy = build_static_policy(profile, MigConfig(7))
    assert policy.batch_max == (1,) and policy.is_single_bucket, "Knee at the longest length"
    assert policy.tail_knee == 41_000 and policy.time_queue == 5_857
    fixed = build_static_policy(profile, MigConfig(7), batch_max=8, time_queue=2_000)
    assert fixed.batch_max == (8,) and fixed.time_queue == 2_000

    print("Test Passed: static baseline policy")


def test_policy_validation_and_json():
    for bad in (dict(batch_max=(0,)), dict(batch_max=(2, 4)), dict(batch_max=()),
                dict(batch_max=(4,), time_queue=0), dict(batch_max=(4,), bucket_width_s=0.0)):
        kwargs = dict(bucket_width_s=2.5, batch_max=(4,), time_queue=100, tail_knee=700)
        kwargs.update(bad)
        with pytest.raises(ValueError):
            BatchingPolicy(**kwargs)

    audio = BatchingPolicy(2.5, (8, 4, 4), 5_000, 35_000)
    data = json.loads(audio.to_json())
    assert data == {"batch_max": [8, 4, 4], "bucket_width_s": 2.5, "tail_knee_us": 35_000, "time_queue_us": 5_000}
    assert BatchingPolicy.from_json(audio.to_json()) == audio
    vision = BatchingPolicy(math.inf, (16,), 5_000, 35_000)
    assert json.loads(vision.to_json())["bucket_width_s"] is None, "Infinite width serializes as null"
    assert BatchingPolicy.from_json(vision.to_json()) == vision

    print("Test Passed: policy validation and JSON")


def test_mig_configs():
    mig = parse_mig_notation("1g.5gb(7x)")
    assert mig.vgpu_count == 7 and mig.shape == VGpuShape(1, 5) and mig.notation == "1g.5gb(7x)"
    assert parse_mig_notation("3g.20gb").vgpu_count == 2
    assert MigConfig.preset("7g.40gb").vgpu_count == 1
    with pytest.raises(ValueError):
        MigConfig(4, VGpuShape(2, 10))
    with pytest.raises(ValueError):
        MigConfig(8)
    with pytest.raises(ValueError):
        parse_mig_notation("seven slices")

    print("Test Passed: MIG shapes")


def main():
    from tests.testing_framework import TestingFramework
    framework = TestingFramework(test_categories={"tuning": []})
    framework.register_test_case("tuning", test_tuning, "Profiles, knees and policies")
    framework.run_tests()
    framework.summarize_results()


if __name__ == "__main__":
    main()
