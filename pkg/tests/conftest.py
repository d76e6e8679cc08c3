import numpy as np
import pytest

from fbeq.filterbank import FilterbankSpec, design_prototype


@pytest.fixture(scope="session")
def default_spec():
    return FilterbankSpec()


@pytest.fixture(scope="session")
def default_proto(default_spec):
    return design_prototype(default_spec)


@pytest.fixture(scope="session")
def small_spec():
    return FilterbankSpec(frame_size=16, proto_len=16, hop=4, sample_rate_hz=16000)


@pytest.fixture(scope="session")
def small_proto(small_spec):
    return design_prototype(small_spec)


def make_speech(duration_s: float = 4.0, rate: int = 16000,
                amplitude: float = 0.25) -> np.ndarray:
    """Synthetic harmonic "speech": voiced segments separated by exact-zero pauses.

    Each segment is a handful of harmonics with a short cosine onset/offset
    ramp; the pauses make noise-only frames for the attenuation metric.
    """
    t = np.arange(int(duration_s * rate)) / rate
    x = np.zeros(t.size)
    segments = [
        (0.00, 0.70, 120.0),
        (1.20, 2.00, 180.0),
        (2.50, 3.30, 140.0),
    ]
    ramp = int(0.02 * rate)
    for start_s, stop_s, f0 in segments:
        a = int(start_s * rate)
        b = min(int(stop_s * rate), t.size)
        if b <= a:
            continue
        seg_t = t[a:b]
        tone = np.zeros(b - a)
        for h in range(1, 11):
            tone += np.sin(2.0 * np.pi * h * f0 * seg_t) / h
        env = np.ones(b - a)
        n = min(ramp, (b - a) // 2)
        if n:
            fade = 0.5 - 0.5 * np.cos(np.pi * np.arange(n) / n)
            env[:n] = fade
            env[-n:] = fade[::-1]
        x[a:b] = tone * env
    peak = np.max(np.abs(x))
    return amplitude * x / peak


@pytest.fixture(scope="session")
def speech_signal():
    return make_speech()
