"""STFT analysis/synthesis and windowing shared by every processing stage.

All arithmetic is double precision. Analysis frames are taken from a
signal zero-padded by ``n_fft // 2`` on both sides, so the timestamp of
frame ``t`` (``t * hop`` samples) lines up with the signal sample it is
centered on. Synthesis uses windowed overlap-add divided by the
accumulated analysis*synthesis window overlap, which reconstructs the
input exactly wherever that overlap sum is nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WINDOW_KINDS = ("hann", "sqrt_hann")


def make_window(kind: str, n_fft: int) -> np.ndarray:
    """Return a periodic taper of length ``n_fft``.

    ``hann`` is the periodic Hann window ``0.5 - 0.5*cos(2*pi*n/n_fft)``;
    ``sqrt_hann`` is its elementwise square root.
    """
    if kind not in WINDOW_KINDS:
        raise ValueError(f"unsupported window kind {kind!r}; expected one of {WINDOW_KINDS}")
    if n_fft < 2 or n_fft % 2 != 0:
        raise ValueError(f"window length must be even and >= 2, got {n_fft}")
    n = np.arange(n_fft, dtype=np.float64)
    hann = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / n_fft)
    if kind == "sqrt_hann":
        return np.sqrt(hann)
    return hann


@dataclass(frozen=True)
class StftConfig:
    """Transform geometry: FFT size, hop, window family, and sample rate."""

    n_fft: int = 512
    hop: int = 256
    window_kind: str = "sqrt_hann"
    sample_rate: int = 16000

    def __post_init__(self) -> None:
        if self.n_fft < 16 or (self.n_fft & (self.n_fft - 1)) != 0:
            raise ValueError(f"n_fft must be a power of two >= 16, got {self.n_fft}")
        if self.hop < 1 or self.hop > self.n_fft or self.n_fft % self.hop != 0:
            raise ValueError(f"hop must divide n_fft and satisfy 1 <= hop <= n_fft, got {self.hop}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        win = make_window(self.window_kind, self.n_fft)
        # Invertibility: the overlapped analysis*synthesis product must be
        # strictly positive at every sample phase.
        wsq = win * win
        profile = np.zeros(self.hop)
        for start in range(0, self.n_fft, self.hop):
            profile += wsq[start : start + self.hop]
        if profile.min() <= 1e-6 * profile.max():
            raise ValueError(
                f"window {self.window_kind!r} with hop={self.hop} is not invertible"
            )

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    def window(self) -> np.ndarray:
        return make_window(self.window_kind, self.n_fft)


@dataclass
class Spectrogram:
    """Complex one-sided STFT grid, indexed [frame, bin]."""

    data: np.ndarray
    config: StftConfig

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2:
            raise ValueError(f"spectrogram data must be 2-D, got shape {self.data.shape}")
        if self.data.shape[1] != self.config.n_bins:
            raise ValueError(
                f"bin count {self.data.shape[1]} does not match config n_bins {self.config.n_bins}"
            )
        if not np.isfinite(self.data).all():
            raise ValueError("spectrogram contains non-finite entries")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_bins(self) -> int:
        return self.data.shape[1]


@dataclass
class MagnitudeSpectrogram:
    """Nonnegative real magnitude grid, indexed [frame, bin]."""

    data: np.ndarray
    config: StftConfig

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError(f"magnitude data must be 2-D, got shape {self.data.shape}")
        if not np.isfinite(self.data).all():
            raise ValueError("magnitude spectrogram contains non-finite entries")
        if (self.data < 0).any():
            raise ValueError("magnitude spectrogram contains negative entries")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_bins(self) -> int:
        return self.data.shape[1]


def _as_channel(signal, config: StftConfig) -> np.ndarray:
    # AudioClip ducks in with `samples` and `sample_rate`; bare arrays pass through.
    rate = getattr(signal, "sample_rate", None)
    if rate is not None:
        if rate != config.sample_rate:
            raise ValueError(
                f"clip sample rate {rate} does not match config rate {config.sample_rate}"
            )
        samples = signal.samples
        if samples.shape[0] != 1:
            raise ValueError("stft expects a mono clip or a single channel vector")
        signal = samples[0]
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {x.shape}")
    if x.size == 0:
        raise ValueError("empty signal")
    return x


def stft(signal, config: StftConfig) -> Spectrogram:
    """One-sided STFT of a single channel.

    Frame ``t`` covers samples ``[t*hop, t*hop + n_fft)`` of the signal
    zero-padded by ``n_fft // 2`` on both ends; enough frames are produced
    to cover the whole padded signal.
    """
    x = _as_channel(signal, config)
    n_fft, hop = config.n_fft, config.hop
    pad = n_fft // 2
    n_frames = int(np.ceil(x.size / hop)) + 1
    total = (n_frames - 1) * hop + n_fft
    buf = np.zeros(total)
    buf[pad : pad + x.size] = x
    frames = np.lib.stride_tricks.sliding_window_view(buf, n_fft)[::hop]
    data = np.fft.rfft(frames * config.window(), axis=1)
    return Spectrogram(data, config)


def istft(spec: Spectrogram, target_len: int) -> np.ndarray:
    """Windowed overlap-add synthesis, trimmed or zero-padded to ``target_len``."""
    if target_len <= 0:
        raise ValueError(f"target_len must be positive, got {target_len}")
    cfg = spec.config
    win = cfg.window()
    frames = np.fft.irfft(spec.data, n=cfg.n_fft, axis=1) * win
    n_frames = frames.shape[0]
    total = (n_frames - 1) * cfg.hop + cfg.n_fft
    out = np.zeros(total)
    norm = np.zeros(total)
    wsq = win * win
    for t in range(n_frames):
        start = t * cfg.hop
        out[start : start + cfg.n_fft] += frames[t]
        norm[start : start + cfg.n_fft] += wsq
    covered = norm > norm.max() * 1e-12
    out[covered] /= norm[covered]
    out[~covered] = 0.0
    pad = cfg.n_fft // 2
    y = out[pad : pad + target_len]
    if y.size < target_len:
        y = np.pad(y, (0, target_len - y.size))
    return y


def magnitude(spec: Spectrogram) -> MagnitudeSpectrogram:
    """Elementwise complex modulus of a spectrogram."""
    return MagnitudeSpectrogram(np.abs(spec.data), spec.config)
