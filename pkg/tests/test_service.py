"""Blending math and the tick-synchronous session."""

import numpy as np
import pytest

from drivedae.model import ModelDims, ParamVector
from drivedae.preprocess import normalize_ci
from drivedae.service import (
    DriveSession,
    LatencyAccumulator,
    blend,
    interpolate,
)
from drivedae.sim import World

from worlds import straight_corridor

MICRO = ModelDims(m=186, r=8, h=4, d1=8, k=10)


class TestBlend:
    def test_default_weights_exact(self):
        out = blend(np.array([0.6, 0.6]), np.array([0.1, 0.1]))
        assert out[0] == 0.5 and out[1] == 0.5

    def test_fixed_point(self):
        v = np.array([0.3, 0.7])
        np.testing.assert_array_equal(blend(v, v), v)

    def test_weights_are_80_20(self):
        out = blend(np.array([1.0, 1.0]), np.array([0.0, 0.0]))
        np.testing.assert_allclose(out, [0.8, 0.8], rtol=0, atol=0)
        out = blend(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(out, [0.2, 0.2], rtol=0, atol=0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            blend(np.array([1.2, 0.5]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            blend(np.array([0.5, 0.5]), np.array([-0.1, 0.5]))


class TestInterpolate:
    def test_endpoints_exact(self):
        prev = np.array([0.123456789, 0.987654321])
        nxt = np.array([0.55, 0.45])
        np.testing.assert_array_equal(interpolate(prev, nxt, 0.0), prev)
        np.testing.assert_array_equal(interpolate(prev, nxt, 1.0), nxt)

    def test_midpoint(self):
        out = interpolate(np.zeros(2), np.ones(2), 0.5)
        np.testing.assert_array_equal(out, [0.5, 0.5])

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            interpolate(np.zeros(2), np.ones(2), 1.5)


def _zero_params() -> ParamVector:
    return ParamVector(MICRO)


class TestDriveSession:
    def test_assist_off_applies_raw(self):
        terrain = straight_corridor(6.0, 400.0)
        session = DriveSession(terrain, assist=False)
        for t in range(20):
            rec = session.tick(0.05, 0.6)
            np.testing.assert_array_equal(rec.applied_ci, [0.05, 0.6])
            np.testing.assert_array_equal(rec.assisted_ci, rec.raw_ci)
            assert rec.tick == t

    def test_assist_off_matches_plain_world(self):
        terrain = straight_corridor(6.0, 400.0)
        session = DriveSession(terrain, assist=False)
        world = World(terrain)
        for _ in range(30):
            rec = session.tick(0.02, 0.8)
            world.step(np.array([0.02, 0.8]))
        np.testing.assert_array_equal(rec.state.position, world.state.position)
        assert rec.state.speed == world.state.speed

    def test_warmup_passes_raw_through(self):
        terrain = straight_corridor(6.0, 400.0)
        session = DriveSession(terrain, params=_zero_params(), assist=True)
        for _ in range(MICRO.k - 1):
            rec = session.tick(0.1, 0.5)
            np.testing.assert_array_equal(rec.applied_ci, [0.1, 0.5])

    def test_zero_model_pulls_toward_center(self):
        # constant-0.5 model output: applied = 0.8*0.5 + 0.2*raw, normalized
        terrain = straight_corridor(6.0, 400.0)
        session = DriveSession(terrain, params=_zero_params(), assist=True)
        raw = (0.3, 0.9)
        for t in range(MICRO.k + 5):
            rec = session.tick(*raw)
        np.testing.assert_array_equal(rec.assisted_ci, [0.0, 0.0])
        raw_norm = normalize_ci(*raw)
        expect_norm = 0.8 * 0.5 + 0.2 * raw_norm
        np.testing.assert_allclose((rec.applied_ci + 1.0) / 2.0, expect_norm,
                                   rtol=0, atol=1e-15)

    def test_assisted_commands_ramp_from_previous(self):
        # replaying the applied sequence with explicit ramps reproduces the
        # session's trajectory exactly
        terrain = straight_corridor(6.0, 400.0)
        session = DriveSession(terrain, params=_zero_params(), assist=True)
        rng = np.random.default_rng(3)
        applied = []
        for _ in range(25):
            rec = session.tick(*(rng.uniform(-0.2, 0.2, size=2)))
            applied.append(rec.applied_ci)
        world = World(terrain)
        prev = None
        for ci in applied:
            world.step(ci, ci_from=prev)
            prev = ci
        np.testing.assert_array_equal(rec.state.position, world.state.position)
        assert rec.state.yaw == world.state.yaw
        assert rec.state.speed == world.state.speed

    def test_assist_requires_params(self):
        terrain = straight_corridor(6.0, 400.0)
        with pytest.raises(ValueError):
            DriveSession(terrain, params=None, assist=True)

    def test_stage_timings_present(self):
        terrain = straight_corridor(6.0, 400.0)
        session = DriveSession(terrain, params=_zero_params(), assist=True)
        for _ in range(MICRO.k + 1):
            rec = session.tick(0.0, 0.5)
        assert set(rec.stage_ms) == {"preprocess", "inference", "blend"}
        assert all(v >= 0.0 for v in rec.stage_ms.values())
        assert rec.stage_ms["inference"] > 0.0


class TestLatencyAccumulator:
    def test_means_maxes_and_deadlines(self):
        acc = LatencyAccumulator(deadline_ms=100.0)
        acc.add({"receive": 1.0, "preprocess": 2.0, "inference": 3.0,
                 "blend": 0.5, "send": 1.0})
        acc.add({"receive": 2.0, "preprocess": 4.0, "inference": 90.0,
                 "blend": 4.5, "send": 1.0}, end_to_end_ms=101.5)
        stats = acc.stats()
        assert stats.ticks == 2
        assert stats.stage_mean_ms["preprocess"] == 3.0
        assert stats.stage_max_ms["inference"] == 90.0
        assert stats.end_to_end_max_ms == 101.5
        assert stats.missed_deadlines == 1

    def test_empty(self):
        stats = LatencyAccumulator().stats()
        assert stats.ticks == 0 and stats.missed_deadlines == 0
