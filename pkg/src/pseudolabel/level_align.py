"""Level alignment via per-frequency multiframe linear filtering.

For each frequency bin an L-tap complex filter is fit by weighted least
squares so that the filtered, time-aligned close-talk spectrogram best
matches the reference mixture:

    minimize over h(f):  sum_t |Y(t,f) - h(f)^H s(t,f)|^2 / lambda(t,f)

where ``s(t,f)`` stacks the current and L-1 previous close-talk frames.
The per-cell weights ``lambda`` de-emphasize loud time-frequency cells so
low-energy regions also constrain the fit. Filtering then rescales (and
mildly reshapes) the close-talk signal onto the reference's level without
inheriting the reference's noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import Spectrogram, StftConfig, istft, stft


@dataclass(frozen=True)
class MflfConfig:
    """Multiframe filter settings: tap count, weight floor, and loading.

    ``xi`` floors the per-cell weights at ``xi * max|Y|^2``: cells quieter
    than that are weighted uniformly, louder cells are de-emphasized. A
    floor much below the reference's noise level lets the noise dictate
    the weights and systematically shrinks the fitted filters (and the
    downstream SNR estimates) on low-SNR references, so the default keeps
    the floor within 20 dB of the spectral peak.
    """

    L: int = 2
    xi: float = 1e-2
    diag_load: float = 1e-6

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.xi <= 0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if self.diag_load < 0:
            raise ValueError(f"diag_load must be >= 0, got {self.diag_load}")


@dataclass
class FilterSet:
    """Per-bin complex filters, taps ordered current-frame-first.

    ``flags[f]`` is True where the normal equations were singular (an
    all-silent bin) and the filter was zeroed instead of solved.
    """

    h: np.ndarray
    L: int
    flags: np.ndarray

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h, dtype=np.complex128)
        if self.h.ndim != 2 or self.h.shape[1] != self.L:
            raise ValueError(f"filter array must have shape (n_bins, {self.L})")
        if not np.isfinite(self.h).all():
            raise ValueError("filters contain non-finite entries")
        self.flags = np.asarray(self.flags, dtype=bool)
        if self.flags.shape != (self.h.shape[0],):
            raise ValueError("flags must have one entry per bin")


def stack_frames(spec: Spectrogram, L: int) -> np.ndarray:
    """Stack each frame with its L-1 predecessors: output [t, f, tap].

    Tap ``k`` of frame ``t`` is frame ``t - k``; frames before the start
    are zeros (causal edge padding).
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    data = spec.data
    n_frames, n_bins = data.shape
    stacked = np.zeros((n_frames, n_bins, L), dtype=np.complex128)
    for k in range(min(L, n_frames)):
        stacked[k:, :, k] = data[: n_frames - k]
    return stacked


def fcp_weights(Y: Spectrogram, xi: float) -> np.ndarray:
    """Per-cell weights ``xi * max|Y|^2 + |Y(t,f)|^2`` for the filter fit."""
    if xi <= 0:
        raise ValueError(f"xi must be positive, got {xi}")
    power = np.abs(Y.data) ** 2
    peak = power.max()
    if peak == 0.0:
        raise ValueError("reference spectrogram is identically zero; segment unusable")
    return xi * peak + power


def solve_mflf(stacked: np.ndarray, Y: Spectrogram, lam: np.ndarray,
               diag_load: float = 1e-6) -> FilterSet:
    """Solve the per-bin weighted normal equations for the filter taps.

    Per bin ``A h = b`` with ``A = sum_t s s^H / lam`` and
    ``b = sum_t s Y* / lam``, after adding ``diag_load * trace(A) / L``
    to the diagonal. Bins that stay singular (all-silent) get a zero
    filter and are flagged.
    """
    n_frames, n_bins, L = stacked.shape
    if Y.data.shape != (n_frames, n_bins) or lam.shape != (n_frames, n_bins):
        raise ValueError("stacked, Y, and lam shapes disagree")
    if not (lam > 0).all():
        raise ValueError("weights must be strictly positive")

    w = 1.0 / lam
    A = np.einsum("tfk,tfl,tf->fkl", stacked, stacked.conj(), w, optimize=True)
    b = np.einsum("tfk,tf,tf->fk", stacked, Y.data.conj(), w, optimize=True)
    trace = np.einsum("fkk->f", A).real
    if diag_load > 0:
        A += (diag_load * trace / L)[:, None, None] * np.eye(L)

    h = np.zeros((n_bins, L), dtype=np.complex128)
    flags = trace <= 0.0
    live = ~flags
    if live.any():
        try:
            h[live] = np.linalg.solve(A[live], b[live][:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            for f in np.nonzero(live)[0]:
                try:
                    h[f] = np.linalg.solve(A[f], b[f])
                except np.linalg.LinAlgError:
                    flags[f] = True
    bad = ~np.isfinite(h).all(axis=1)
    if bad.any():
        h[bad] = 0.0
        flags |= bad
    return FilterSet(h=h, L=L, flags=flags)


def apply_mflf(filters: FilterSet, stacked: np.ndarray) -> np.ndarray:
    """Filter the stacked frames: ``out(t,f) = sum_k h*(f,k) s(t,f,k)``."""
    if stacked.ndim != 3 or stacked.shape[2] != filters.L:
        raise ValueError(
            f"stacked tensor tap count {stacked.shape[-1]} does not match filter L={filters.L}"
        )
    if stacked.shape[1] != filters.h.shape[0]:
        raise ValueError("stacked tensor bin count does not match filter set")
    return np.einsum("fk,tfk->tf", filters.h.conj(), stacked)


def level_align(s2, y, stft_cfg: StftConfig, mflf_cfg: MflfConfig) -> np.ndarray:
    """Fit and apply the multiframe filter; returns the pseudo label waveform.

    ``s2`` is the time-aligned close-talk signal and ``y`` the reference
    far-field mixture, equal length (``apply_shift`` guarantees this).
    """
    s2 = np.asarray(s2, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if s2.shape != y.shape:
        raise ValueError(f"length mismatch: {s2.shape} vs {y.shape}")
    Y = stft(y, stft_cfg)
    S2 = stft(s2, stft_cfg)
    lam = fcp_weights(Y, mflf_cfg.xi)
    stacked = stack_frames(S2, mflf_cfg.L)
    filters = solve_mflf(stacked, Y, lam, mflf_cfg.diag_load)
    aligned = apply_mflf(filters, stacked)
    return istft(Spectrogram(aligned, stft_cfg), y.size)
