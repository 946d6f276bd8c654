import math

import numpy as np
import pytest

from evmelt.events import SensorGeometry
from evmelt.scenes import SceneSpec, render_scene

G = SensorGeometry(64, 48)


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            SceneSpec("lava_lamp")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError):
            SceneSpec("ramp", {"wavelength": 3.0})

    def test_too_few_frames(self):
        with pytest.raises(ValueError):
            render_scene(SceneSpec("constant"), G, 100, 1.0)


class TestDeterminism:
    @pytest.mark.parametrize("kind", ["constant", "step", "ramp", "flicker", "balloon_pop", "meltpool"])
    def test_identical_reruns(self, kind):
        a, _ = render_scene(SceneSpec(kind), G, 100_000, 100)
        b, _ = render_scene(SceneSpec(kind), G, 100_000, 100)
        assert np.array_equal(a.frames, b.frames)


class TestGroundTruth:
    def test_keyhole_aspect_ratio_is_the_generating_formula(self):
        spec = SceneSpec("meltpool", {"ar_min": 1.0, "ar_max": 2.5, "keyhole_freq_hz": 5.0})
        _, truth = render_scene(spec, G, 200_000, 200)
        t_s = truth.frame_times_us * 1e-6
        expected = 1.75 + 0.75 * np.sin(2 * math.pi * 5.0 * t_s)
        assert np.allclose(truth.aspect_ratio, expected, rtol=0, atol=0)

    def test_balloon_pop_time_echoed(self):
        spec = SceneSpec("balloon_pop", {"t_pop_us": 1_500_000})
        _, truth = render_scene(spec, G, 3_000_000, 50)
        assert truth.t_pop_us == 1_500_000

    def test_anomaly_path_on_orbit(self):
        spec = SceneSpec("meltpool", {"anomaly": 1, "orbit_radius_frac": 0.25, "orbit_freq_hz": 1.0})
        video, truth = render_scene(spec, G, 500_000, 100)
        assert truth.anomaly_t_us is not None
        cx, cy = (G.width - 1) / 2, (G.height - 1) / 2
        r = np.hypot(truth.anomaly_x - cx, truth.anomaly_y - cy)
        assert np.allclose(r, 0.25 * min(G.width, G.height))

    def test_no_anomaly_no_path(self):
        _, truth = render_scene(SceneSpec("meltpool"), G, 100_000, 100)
        assert truth.anomaly_t_us is None


class TestSceneContent:
    def test_meltpool_dynamic_range(self):
        video, _ = render_scene(SceneSpec("meltpool"), G, 100_000, 100)
        span = video.frames.max() / video.frames.min()
        # hot spot peaks ~1e6 over background: about 120 dB
        assert 20 * math.log10(span) > 110

    def test_flicker_is_log_sinusoid(self):
        spec = SceneSpec("flicker", {"level": 2.0, "amplitude_log": 0.4, "freq_hz": 10.0})
        video, truth = render_scene(spec, SensorGeometry(2, 2), 100_000, 1000)
        t_s = truth.frame_times_us * 1e-6
        expected = 2.0 * np.exp(0.4 * np.sin(2 * math.pi * 10.0 * t_s))
        assert np.allclose(video.frames[:, 0, 0], expected, rtol=1e-6)

    def test_balloon_static_before_pop(self):
        spec = SceneSpec("balloon_pop", {"t_pop_us": 2_000_000, "idle_amp_log": 0.0})
        video, _ = render_scene(spec, G, 3_000_000, 20)
        pre_frames = [video.frames[k] for k in range(video.n_frames) if k * video.frame_period_us < 2_000_000]
        for f in pre_frames[1:]:
            assert np.array_equal(f, pre_frames[0])

    def test_balloon_changes_after_pop(self):
        video, truth = render_scene(SceneSpec("balloon_pop", {"t_pop_us": 100_000}), G, 500_000, 100)
        k_pop = truth.t_pop_us // video.frame_period_us
        assert not np.array_equal(video.frames[k_pop + 1], video.frames[k_pop + 3])
