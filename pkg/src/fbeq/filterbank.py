"""GDFT-modulated analysis filterbank.

Prototype low-pass design (windowed sinc, Hann taper) plus causal subband
analysis with downsampling, in two interchangeable realizations: a direct
per-bin inner-product form and a polyphase form (windowed time-fold,
M-point DFT, per-bin phase correction).  Only the lower half-spectrum is
computed; real inputs make the upper half redundant.

Frame indexing convention, used consistently package-wide: with 0-based
sample time, frame ``k`` (``k = 1..floor(T/r)``) becomes available once
``k*r`` samples have arrived and reads samples ``x[k*r - 1 - l]`` for
``l = 0..L``, with zero initial state for negative time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DataError, NumericError

HERMITIAN_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class FilterbankSpec:
    """Filterbank geometry: subband count, prototype order, hop, sample rate."""

    frame_size: int = 512
    proto_len: int = 512
    hop: int = 64
    sample_rate_hz: int = 16000

    def __post_init__(self) -> None:
        m, big_l, r = self.frame_size, self.proto_len, self.hop
        if m <= 0 or big_l <= 0 or r <= 0 or self.sample_rate_hz <= 0:
            raise ConfigError("filterbank geometry values must be positive")
        if m % 2 != 0:
            raise ConfigError(
                f"frame size must be even for half-spectrum storage, got {m}"
            )
        if big_l % 2 != 0:
            raise ConfigError(f"prototype order must be even, got {big_l}")
        if big_l + 1 < m:
            raise ConfigError(
                f"prototype length {big_l + 1} must be at least the frame size {m}"
            )
        if r > m:
            raise ConfigError(f"hop {r} must not exceed frame size {m}")
        if m % r != 0:
            raise ConfigError(f"hop {r} must divide frame size {m}")

    @property
    def tau(self) -> int:
        """Group-delay center of the prototype, ``proto_len / 2`` samples."""
        return self.proto_len // 2

    @property
    def num_bins(self) -> int:
        """Stored (half-spectrum) bin count, ``frame_size / 2 + 1``."""
        return self.frame_size // 2 + 1

    def num_frames(self, num_samples: int) -> int:
        """Analysis frame count for a given input length."""
        return max(0, int(num_samples) // self.hop)


@dataclass(frozen=True)
class PrototypeFilter:
    """Linear-phase low-pass prototype: ``taps`` over lags 0..L, centered at ``tau``."""

    taps: np.ndarray
    tau: int


class AnalysisFrameSeq(NamedTuple):
    """Subband analysis result: a ``K x (M/2+1)`` complex matrix plus its geometry."""

    frames: np.ndarray
    spec: FilterbankSpec


def design_prototype(spec: FilterbankSpec) -> PrototypeFilter:
    """Design the windowed-sinc prototype low-pass filter.

    The impulse response over lags ``l = 0..L`` is

    ``taps[l] = (1/M) * sin(z)/z * win(l)``, ``z = (2*pi/M)*(l - tau)``,

    with the removable singularity at ``l = tau`` taking its limit value
    ``win(tau)/M``, and ``win(l) = 0.5 - 0.5*cos(2*pi*l/L)`` (Hann over
    ``L+1`` points: zero endpoints, unit peak at ``tau``).

    Parameters
    ----------
    spec : FilterbankSpec
        Validated filterbank geometry.

    Returns
    -------
    PrototypeFilter
        Taps of length ``L+1``; symmetric about ``tau`` bit-exactly (the
        second half is mirrored from the first rather than recomputed).
    """
    m, big_l, tau = spec.frame_size, spec.proto_len, spec.tau
    lags = np.arange(tau + 1, dtype=np.float64)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * lags / big_l)
    # np.sinc(u) = sin(pi u)/(pi u); u = 2(l - tau)/M gives sin(z)/z above.
    core = np.sinc(2.0 * (lags - tau) / m) / m
    half = window * core
    taps = np.concatenate([half, half[-2::-1]])
    return PrototypeFilter(taps=taps, tau=tau)


def modulation(spec: FilterbankSpec, i: int, l: int) -> complex:
    """Complex modulation factor ``exp(-j*(2*pi/M)*i*(l - tau))`` for bin ``i``, lag ``l``."""
    if not 0 <= i < spec.frame_size:
        raise ConfigError(f"bin index {i} outside 0..{spec.frame_size - 1}")
    return complex(
        np.exp(-2j * np.pi * i * (l - spec.tau) / spec.frame_size)
    )


def _analysis_segments(x: np.ndarray, spec: FilterbankSpec) -> np.ndarray:
    """Time-ascending windows ``x[k*r - 1 - L .. k*r - 1]`` for each frame k."""
    big_l, r = spec.proto_len, spec.hop
    num_frames = spec.num_frames(x.size)
    padded = np.concatenate([np.zeros(big_l, dtype=np.float64), x])
    windows = np.lib.stride_tricks.sliding_window_view(padded, big_l + 1)
    return windows[r - 1 :: r][:num_frames]


def analyze_direct(x, proto: PrototypeFilter, spec: FilterbankSpec) -> AnalysisFrameSeq:
    """Subband analysis as an explicit inner product per bin.

    Computes ``x_i(k) = sum_l x[k*r - 1 - l] * taps[l] * modulation(i, l)``
    for ``k = 1..floor(T/r)`` and ``i = 0..M/2``, assuming zero signal
    before time zero.

    Parameters
    ----------
    x : array_like
        Real input signal.
    proto : PrototypeFilter
        Prototype from :func:`design_prototype`.
    spec : FilterbankSpec
        Matching geometry.

    Returns
    -------
    AnalysisFrameSeq
        ``floor(T/r)`` frames of ``M/2 + 1`` complex bins.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    bins = spec.num_bins
    if spec.num_frames(x.size) == 0:
        return AnalysisFrameSeq(np.zeros((0, bins), dtype=np.complex128), spec)
    segments = _analysis_segments(x, spec)
    # Segment column m holds lag l = L - m; fold taps and modulation together.
    lags = np.arange(spec.proto_len, -1, -1, dtype=np.float64)
    i = np.arange(bins, dtype=np.float64)[:, None]
    weights = proto.taps[::-1] * np.exp(
        -2j * np.pi * i * (lags[None, :] - spec.tau) / spec.frame_size
    )
    frames = segments @ weights.T
    return AnalysisFrameSeq(frames, spec)


def _phase_correction(spec: FilterbankSpec) -> np.ndarray:
    """Per-bin factor ``exp(+j*(2*pi/M)*i*tau)`` undoing the lag shift of the fold."""
    i = np.arange(spec.num_bins)
    twice_tau = 2 * spec.tau
    if twice_tau % spec.frame_size == 0:
        # exp(j*pi*i*(2*tau/M)) is exactly +/-1; avoids trig roundoff.
        parity = (i * (twice_tau // spec.frame_size)) % 2
        return np.where(parity == 0, 1.0 + 0.0j, -1.0 + 0.0j)
    angles = 2.0 * np.pi * ((i * spec.tau) % spec.frame_size) / spec.frame_size
    return np.exp(1j * angles)


def _fold_and_transform(windowed: np.ndarray, spec: FilterbankSpec,
                        correction: np.ndarray) -> np.ndarray:
    """Fold lag-indexed products into M bins, DFT, and phase-correct.

    ``windowed[..., l]`` holds ``x[k*r - 1 - l] * taps[l]``; the result is
    the half-spectrum frame(s) ``x_i(k)``.
    """
    m = spec.frame_size
    length = windowed.shape[-1]
    folds = -(-length // m)
    pad = folds * m - length
    if pad:
        pad_width = [(0, 0)] * (windowed.ndim - 1) + [(0, pad)]
        windowed = np.pad(windowed, pad_width)
    folded = windowed.reshape(*windowed.shape[:-1], folds, m).sum(axis=-2)
    return np.fft.rfft(folded, axis=-1) * correction


def analyze_polyphase(x, proto: PrototypeFilter, spec: FilterbankSpec) -> AnalysisFrameSeq:
    """Subband analysis via the polyphase realization.

    Windows the ``L+1`` most recent samples with the prototype, folds the
    products into ``M`` bins, applies an M-point DFT, and corrects each bin
    for the ``tau``-lag offset (``(-1)**i`` when ``2*tau`` is a multiple of
    ``M``, as in the default geometry).  Output matches
    :func:`analyze_direct` to floating-point tolerance.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    bins = spec.num_bins
    if spec.num_frames(x.size) == 0:
        return AnalysisFrameSeq(np.zeros((0, bins), dtype=np.complex128), spec)
    segments = _analysis_segments(x, spec)
    windowed = segments[:, ::-1] * proto.taps[None, :]
    frames = _fold_and_transform(windowed, spec, _phase_correction(spec))
    return AnalysisFrameSeq(frames, spec)


def expand_hermitian(half) -> np.ndarray:
    """Expand a half-spectrum of ``M/2+1`` bins to the full ``M``-bin spectrum.

    ``full[i] = half[i]`` for ``i <= M/2`` and ``full[M-i] = conj(half[i])``
    for the rest.  Bins 0 and ``M/2`` must be (numerically) real.

    Raises
    ------
    NumericError
        If the DC or Nyquist bin has imaginary part above
        ``1e-9 * max |half|`` (Hermitian symmetry error).
    """
    half = np.asarray(half, dtype=np.complex128).ravel()
    if half.size < 2:
        raise DataError(f"half-spectrum needs at least 2 bins, got {half.size}")
    scale = float(np.max(np.abs(half))) if half.size else 0.0
    edge_imag = max(abs(half[0].imag), abs(half[-1].imag))
    if edge_imag > HERMITIAN_IMAG_TOL * scale:
        raise NumericError(
            "Hermitian symmetry error: DC/Nyquist bins are not real "
            f"(|imag| = {edge_imag:.3e}, limit {HERMITIAN_IMAG_TOL * scale:.3e})"
        )
    m = 2 * (half.size - 1)
    full = np.empty(m, dtype=np.complex128)
    full[: half.size] = half
    full[half.size :] = np.conj(half[-2:0:-1])
    return full


class PolyphaseAnalyzer:
    """Streaming polyphase analysis: one subband frame per pushed hop.

    Owns the ``L+1``-sample history (zero-initialized); not safe for
    concurrent use by multiple streams.
    """

    def __init__(self, proto: PrototypeFilter, spec: FilterbankSpec) -> None:
        self.spec = spec
        self._taps = np.asarray(proto.taps, dtype=np.float64)
        if self._taps.size != spec.proto_len + 1:
            raise ConfigError(
                f"prototype has {self._taps.size} taps, geometry expects "
                f"{spec.proto_len + 1}"
            )
        self._correction = _phase_correction(spec)
        self._history = np.zeros(spec.proto_len + 1, dtype=np.float64)

    def reset(self) -> None:
        self._history[:] = 0.0

    def push(self, block) -> np.ndarray:
        """Consume ``hop`` new samples and return the resulting frame."""
        block = np.asarray(block, dtype=np.float64).ravel()
        if block.size != self.spec.hop:
            raise DataError(
                f"expected a block of {self.spec.hop} samples, got {block.size}"
            )
        self._history = np.concatenate([self._history[block.size :], block])
        windowed = self._history[::-1] * self._taps
        return _fold_and_transform(windowed, self.spec, self._correction)
