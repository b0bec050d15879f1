"""Synthetic close-talk / far-field pair generation with known ground truth.

Every scenario is fully determined by its parameters and seed, so each
pipeline stage can be checked quantitatively: the true delay, the true
direct sound, and the realized SNR are all available to tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioClip, write_wav

NOISE_KINDS = ("white", "pink")

# Total tail energy relative to the direct tap. Kept well below the
# direct path so the tail perturbs rather than dominates the mixture,
# matching an already-enhanced far-field reference.
DEFAULT_TAIL_DB = -25.0


@dataclass
class SynthScenario:
    """Ground-truth generator parameters for one synthetic pair."""

    delay: int = 0
    gain: float = 1.0
    rir_taps: np.ndarray | None = None
    noise_kind: str = "white"
    noise_snr_db: float = math.inf
    seed: int = 0

    def __post_init__(self) -> None:
        if self.gain <= 0:
            raise ValueError(f"gain must be positive, got {self.gain}")
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"noise_kind must be one of {NOISE_KINDS}")
        if self.rir_taps is not None:
            taps = np.asarray(self.rir_taps, dtype=np.float64)
            if taps.size == 0 or taps[0] == 0.0:
                raise ValueError("rir_taps must be nonempty with a nonzero first tap")
            self.rir_taps = taps


def gen_noise(kind: str, length: int, seed: int) -> np.ndarray:
    """Unit-RMS noise; ``pink`` shapes white noise by 1/sqrt(f) in frequency."""
    if kind not in NOISE_KINDS:
        raise ValueError(f"noise kind must be one of {NOISE_KINDS}")
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(length)
    if kind == "pink":
        spec = np.fft.rfft(x)
        scale = np.zeros(spec.size)
        scale[1:] = 1.0 / np.sqrt(np.arange(1, spec.size))
        x = np.fft.irfft(spec * scale, length)
    rms = math.sqrt(float(np.mean(x * x)))
    if rms == 0.0:
        raise ValueError("degenerate noise draw")
    return x / rms


def gen_rir(decay_ms: float, len_taps: int, seed: int, sample_rate: int,
            tail_db: float = DEFAULT_TAIL_DB) -> np.ndarray:
    """Unit direct tap followed by an exponentially decaying noise tail.

    The tail envelope is ``exp(-n / (decay_ms/1000 * sample_rate))`` and
    its total energy is normalized to ``tail_db`` relative to the direct
    tap.
    """
    if len_taps < 1:
        raise ValueError(f"len_taps must be >= 1, got {len_taps}")
    rir = np.zeros(len_taps)
    rir[0] = 1.0
    if len_taps > 1 and decay_ms > 0:
        tau = decay_ms / 1000.0 * sample_rate
        n = np.arange(1, len_taps, dtype=np.float64)
        tail = np.random.default_rng(seed).standard_normal(len_taps - 1) * np.exp(-n / tau)
        energy = float(np.sum(tail * tail))
        if energy > 0:
            tail *= math.sqrt(10.0 ** (tail_db / 10.0) / energy)
        rir[1:] = tail
    return rir


def synth_pair(clean, scenario: SynthScenario) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build (close_talk, far_mixture, direct_sound) from a clean source.

    The far mixture applies delay, gain, the optional impulse response,
    and noise scaled so that direct-to-noise energy hits
    ``noise_snr_db`` exactly. The direct sound is the delayed, scaled
    clean signal through the direct tap only.
    """
    clean = np.asarray(clean, dtype=np.float64)
    if clean.ndim != 1 or clean.size == 0 or not np.any(clean):
        raise ValueError("clean source must be a nonempty 1-D signal with energy")
    rir = scenario.rir_taps if scenario.rir_taps is not None else np.ones(1)
    delayed = np.concatenate((np.zeros(scenario.delay), clean))
    wet = np.convolve(delayed, rir)
    out_len = wet.size
    direct = np.zeros(out_len)
    direct[: delayed.size] = scenario.gain * rir[0] * delayed
    far = scenario.gain * wet
    if math.isfinite(scenario.noise_snr_db):
        noise = gen_noise(scenario.noise_kind, out_len, scenario.seed)
        direct_energy = float(np.sum(direct * direct))
        noise_energy = float(np.sum(noise * noise))
        scale = math.sqrt(direct_energy / (noise_energy * 10.0 ** (scenario.noise_snr_db / 10.0)))
        far = far + scale * noise
    return clean.copy(), far, direct


def speech_like(duration_s: float, sample_rate: int, seed: int) -> np.ndarray:
    """Wideband, syllabically modulated test source (pink carrier)."""
    n = int(round(duration_s * sample_rate))
    if n < 1:
        raise ValueError("duration too short")
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    syllable_hz = rng.uniform(2.2, 3.4)
    carrier = gen_noise("pink", n, int(rng.integers(2**31)))
    t = np.arange(n) / sample_rate
    env = 0.15 + 0.85 * (0.5 - 0.5 * np.cos(2.0 * math.pi * syllable_hz * t + phase)) ** 2
    x = carrier * env
    return 0.5 * x / np.max(np.abs(x))


def simulate_corpus(out_dir, count: int, seed: int = 0, sample_rate: int = 16000,
                    duration_range: tuple[float, float] = (4.0, 8.0),
                    delay_range: tuple[int, int] = (0, 4000),
                    gain_range: tuple[float, float] = (0.05, 0.5),
                    max_decay_ms: float = 50.0,
                    snr_range_db: tuple[float, float] = (0.0, 20.0),
                    anechoic_fraction: float = 0.25) -> tuple[Path, Path]:
    """Write a ready-to-run corpus: WAVs, segment manifest, and truth file.

    Returns ``(manifest_path, truth_path)``. The truth file is JSONL with
    the generator parameters and the realized direct-vs-residual SNR of
    every segment.
    """
    if duration_range[0] > duration_range[1] or duration_range[0] <= 0:
        raise ValueError(f"bad duration_range {duration_range}")
    if delay_range[0] > delay_range[1] or delay_range[0] < 0:
        raise ValueError(f"bad delay_range {delay_range}")
    if snr_range_db[0] > snr_range_db[1]:
        raise ValueError(f"bad snr_range_db {snr_range_db}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    manifest_path = out / "manifest.jsonl"
    truth_path = out / "truth.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as mf, \
         open(truth_path, "w", encoding="utf-8") as tf:
        for i in range(count):
            sid = f"s{i:03d}"
            duration = float(rng.uniform(*duration_range))
            delay = int(rng.integers(delay_range[0], delay_range[1] + 1))
            gain = float(rng.uniform(*gain_range))
            snr_db = float(rng.uniform(*snr_range_db))
            anechoic = max_decay_ms <= 0 or bool(rng.random() < anechoic_fraction)
            decay_ms = 0.0 if anechoic else float(
                rng.uniform(min(10.0, max_decay_ms), max_decay_ms)
            )
            source_seed = int(rng.integers(2**31))
            noise_seed = int(rng.integers(2**31))
            rir_seed = int(rng.integers(2**31))

            clean = speech_like(duration, sample_rate, source_seed)
            rir = None
            if decay_ms > 0:
                len_taps = min(int(4 * decay_ms / 1000.0 * sample_rate) + 1, 6400)
                rir = gen_rir(decay_ms, len_taps, rir_seed, sample_rate)
            scenario = SynthScenario(delay=delay, gain=gain, rir_taps=rir,
                                     noise_kind="white", noise_snr_db=snr_db,
                                     seed=noise_seed)
            close, far, direct = synth_pair(clean, scenario)

            close_path = out / f"{sid}_close.wav"
            far_path = out / f"{sid}_far.wav"
            direct_path = out / f"{sid}_direct.wav"
            write_wav(close_path, AudioClip(close, sample_rate), "float32")
            write_wav(far_path, AudioClip(far, sample_rate), "float32")
            write_wav(direct_path, AudioClip(direct, sample_rate), "float32")

            residual = far - direct
            gt_snr_db = 10.0 * math.log10(
                float(np.sum(direct * direct)) / float(np.sum(residual * residual))
            )
            mf.write(json.dumps({
                "session_id": sid,
                "speaker_id": "spk0",
                "start_s": 0.0,
                "end_s": far.size / sample_rate,
                "close_talk_path": str(close_path),
                "farfield_path": str(far_path),
            }) + "\n")
            tf.write(json.dumps({
                "session_id": sid,
                "delay": delay,
                "gain": gain,
                "decay_ms": decay_ms,
                "noise_snr_db": snr_db,
                "gt_snr_db": gt_snr_db,
                "duration_s": duration,
                "direct_path": str(direct_path),
            }) + "\n")
    return manifest_path, truth_path
