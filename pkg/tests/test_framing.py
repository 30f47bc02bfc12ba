import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specsub.dsp import make_window
from specsub.errors import ConfigError, UsageError
from specsub.framing import FrameConfig, OverlapAdd, pipeline_latency, warmup_increments


def run_identity(x, cfg, window):
    ola = OverlapAdd(cfg, window)
    out = []
    for j in range(len(x) // cfg.hop):
        frame = ola.analysis_next(x[j * cfg.hop : (j + 1) * cfg.hop])
        # analysis already applied the window; synthesis applies it again
        out.append(ola.synthesis_add(frame))
    return np.concatenate(out)


class TestFrameConfig:
    def test_defaults(self):
        cfg = FrameConfig()
        assert cfg.hop == 64
        assert cfg.hop_seconds == pytest.approx(0.008)
        assert cfg.bins == 129

    @pytest.mark.parametrize(
        "kwargs",
        [dict(frame_len=250), dict(frame_len=4, oversampling=2), dict(oversampling=1), dict(oversampling=3), dict(sample_rate=0)],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            FrameConfig(**kwargs)


class TestAnalysis:
    def test_zero_stream(self):
        ola = OverlapAdd(FrameConfig())
        for _ in range(10):
            assert not np.any(ola.analysis_next(np.zeros(64)))

    def test_constant_input_gives_window(self):
        cfg = FrameConfig()
        ola = OverlapAdd(cfg, "sqrt-hanning")
        for _ in range(cfg.oversampling):
            frame = ola.analysis_next(np.ones(64))
        np.testing.assert_array_equal(frame, make_window("sqrt-hanning", 256))

    def test_impulse_seen_in_oversampling_frames(self):
        # hand trace: sample at stream position p sits at offset p - (j+1)I + N in frame j
        cfg = FrameConfig()
        w = make_window("sqrt-hamming-paper", 256)
        ola = OverlapAdd(cfg, w)
        p = 300
        x = np.zeros(64 * 12)
        x[p] = 1.0
        hits = []
        for j in range(12):
            frame = ola.analysis_next(x[j * 64 : (j + 1) * 64])
            nz = np.flatnonzero(frame)
            if nz.size:
                assert nz.size == 1
                offset = p - (j + 1) * 64 + 256
                assert nz[0] == offset
                assert frame[offset] == w[offset]
                hits.append(j)
        assert hits == [4, 5, 6, 7]

    def test_wrong_count(self):
        with pytest.raises(UsageError):
            OverlapAdd(FrameConfig()).analysis_next(np.zeros(63))


class TestSynthesis:
    @pytest.mark.parametrize("window", ["sqrt-hamming-paper", "sqrt-hanning", "sqrt-blackman-harris-3", "sqrt-gaussian"])
    @pytest.mark.parametrize("n,os", [(256, 4), (128, 4), (256, 2), (512, 8)])
    def test_identity_round_trip_is_delayed_input(self, window, n, os):
        cfg = FrameConfig(frame_len=n, oversampling=os)
        rng = np.random.default_rng(n + os)
        x = rng.uniform(-1, 1, 40 * n)
        y = run_identity(x, cfg, window)
        d = pipeline_latency(cfg)
        assert np.max(np.abs(y[d:] - x[: len(x) - d])) < 1e-6

    def test_zero_frames(self):
        ola = OverlapAdd(FrameConfig())
        for _ in range(6):
            assert not np.any(ola.synthesis_add(np.zeros(256)))

    def test_bin_centre_sinusoid_is_continuous(self):
        cfg = FrameConfig()
        t = np.arange(64 * 20)
        x = np.sin(2 * np.pi * 8 * t / 256)
        y = run_identity(x, cfg, "sqrt-hamming-paper")
        d = pipeline_latency(cfg)
        seg = y[d + 256 :]
        ref = x[256 : len(x) - d]
        assert np.max(np.abs(seg - ref)) < 1e-6
        # sample-to-sample steps never exceed the sinusoid's own maximum slope
        assert np.max(np.abs(np.diff(seg))) <= 2 * np.pi * 8 / 256 + 1e-6

    def test_wrong_length(self):
        with pytest.raises(UsageError):
            OverlapAdd(FrameConfig()).synthesis_add(np.zeros(128))

    def test_window_length_mismatch(self):
        with pytest.raises(ConfigError):
            OverlapAdd(FrameConfig(), np.ones(128))


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    scale=st.floats(1e-3, 1e3),
    window=st.sampled_from(["sqrt-hamming-paper", "sqrt-hanning"]),
)
def test_perfect_reconstruction_property(seed, scale, window):
    cfg = FrameConfig()
    x = scale * np.random.default_rng(seed).standard_normal(64 * 16)
    y = run_identity(x, cfg, window)
    # one output hop per input hop
    assert y.shape == x.shape
    d = pipeline_latency(cfg)
    assert np.max(np.abs(y[d:] - x[:-d])) < 1e-6 * max(1.0, scale)


@pytest.mark.parametrize(
    "n,os,expected",
    [(256, 4, 192), (256, 2, 128), (256, 256, 255)],
)
def test_latency(n, os, expected):
    assert pipeline_latency(FrameConfig(frame_len=n, oversampling=os)) == expected


def test_latency_with_lookahead_and_warmup():
    cfg = FrameConfig()
    assert pipeline_latency(cfg, residual_reduction=True) == 256
    assert pipeline_latency(cfg) / cfg.sample_rate == pytest.approx(0.024)
    assert warmup_increments(cfg) == 3
    assert warmup_increments(cfg, residual_reduction=True) == 4
