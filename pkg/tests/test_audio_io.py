import json
import struct

import numpy as np
import pytest

from pseudolabel.audio_io import (
    AudioClip,
    ManifestError,
    SegmentClampWarning,
    SegmentRecord,
    WavFormatError,
    cut_segment,
    parse_segments,
    read_wav,
    write_wav,
)


def raw_wav_bytes(payload: bytes, fmt_tag: int, n_ch: int, rate: int, bits: int) -> bytes:
    block = n_ch * bits // 8
    fmt = struct.pack("<HHIIHH", fmt_tag, n_ch, rate, rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


class TestWavRoundTrip:
    def test_zeros_pcm16_one_second(self, tmp_path):
        path = tmp_path / "z.wav"
        write_wav(path, AudioClip(np.zeros(16000), 16000), "pcm16")
        clip = read_wav(path)
        assert clip.sample_rate == 16000
        assert clip.n_channels == 1
        assert clip.n_samples == 16000
        assert np.all(clip.samples == 0.0)

    def test_float32_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, 4000).astype(np.float32).astype(np.float64)
        path = tmp_path / "f.wav"
        write_wav(path, AudioClip(x, 16000), "float32")
        np.testing.assert_array_equal(read_wav(path).channels[0], x)

    def test_pcm16_within_one_lsb(self, tmp_path):
        rng = np.random.default_rng(1)
        x = rng.uniform(-1, 1, 4000)
        path = tmp_path / "p16.wav"
        write_wav(path, AudioClip(x, 16000), "pcm16")
        back = read_wav(path).channels[0]
        assert np.max(np.abs(back - x)) <= 1.0 / 32768.0

    @pytest.mark.parametrize("encoding,lsb", [("pcm24", 1 / 8388608.0), ("pcm32", 1 / 2147483648.0)])
    def test_deep_pcm_round_trip(self, tmp_path, encoding, lsb):
        rng = np.random.default_rng(2)
        x = rng.uniform(-1, 1, 2000)
        path = tmp_path / "deep.wav"
        write_wav(path, AudioClip(x, 48000), encoding)
        back = read_wav(path).channels[0]
        assert np.max(np.abs(back - x)) <= lsb

    def test_multichannel_preserved(self, tmp_path):
        rng = np.random.default_rng(3)
        x = rng.uniform(-1, 1, (3, 500)).astype(np.float32).astype(np.float64)
        path = tmp_path / "mc.wav"
        write_wav(path, AudioClip(x, 44100), "float32")
        clip = read_wav(path)
        assert clip.n_channels == 3
        np.testing.assert_array_equal(clip.samples, x)

    def test_empty_clip_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            write_wav(tmp_path / "e.wav", AudioClip(np.zeros((1, 0)), 16000))

    def test_unknown_encoding(self, tmp_path):
        with pytest.raises(ValueError, match="encoding"):
            write_wav(tmp_path / "x.wav", AudioClip(np.zeros(10), 16000), "mp3")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            write_wav(tmp_path / "missing_dir" / "x.wav", AudioClip(np.zeros(10), 16000))


class TestWavFixtures:
    def test_pcm16_full_scale_square_wave(self, tmp_path):
        # byte-level fixture: alternate +32767 / -32768
        samples = np.tile([32767, -32768], 100).astype("<i2")
        path = tmp_path / "sq.wav"
        path.write_bytes(raw_wav_bytes(samples.tobytes(), 1, 1, 16000, 16))
        back = read_wav(path).channels[0]
        np.testing.assert_array_equal(back[0::2], 32767 / 32768)
        np.testing.assert_array_equal(back[1::2], -1.0)

    def test_pcm24_byte_fixture(self, tmp_path):
        # +2^23-1 then -2^23 packed little-endian, 3 bytes each
        payload = bytes([0xFF, 0xFF, 0x7F, 0x00, 0x00, 0x80])
        path = tmp_path / "p24.wav"
        path.write_bytes(raw_wav_bytes(payload, 1, 1, 16000, 24))
        back = read_wav(path).channels[0]
        np.testing.assert_allclose(back, [8388607 / 8388608, -1.0])

    def test_extensible_fmt_chunk(self, tmp_path):
        samples = np.array([0, 16384], dtype="<i2")
        ext = struct.pack("<HHIIHH", 0xFFFE, 1, 16000, 32000, 2, 16)
        ext += struct.pack("<HHI", 22, 16, 0x4)
        ext += struct.pack("<H", 1) + b"\x00\x00" + b"\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"
        body = b"WAVE" + b"fmt " + struct.pack("<I", len(ext)) + ext
        body += b"data" + struct.pack("<I", len(samples.tobytes())) + samples.tobytes()
        path = tmp_path / "ext.wav"
        path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
        back = read_wav(path).channels[0]
        np.testing.assert_allclose(back, [0.0, 0.5])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_wav(tmp_path / "nope.wav")

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.wav"
        path.write_bytes(b"NOT A WAVE FILE AT ALL")
        with pytest.raises(WavFormatError, match="RIFF"):
            read_wav(path)

    def test_unsupported_encoding_8bit(self, tmp_path):
        path = tmp_path / "u8.wav"
        path.write_bytes(raw_wav_bytes(bytes([0, 128, 255]), 1, 1, 8000, 8))
        with pytest.raises(WavFormatError, match="unsupported"):
            read_wav(path)

    def test_missing_data_chunk(self, tmp_path):
        fmt = struct.pack("<HHIIHH", 1, 1, 16000, 32000, 2, 16)
        body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
        path = tmp_path / "nd.wav"
        path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
        with pytest.raises(WavFormatError, match="data"):
            read_wav(path)


class TestParseSegments:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text("")
        assert parse_segments(path) == []

    def test_one_valid_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        row = {"session_id": "s1", "speaker_id": "a", "start_s": 0.5, "end_s": 2.0,
               "close_talk_path": "c.wav", "farfield_path": "f.wav"}
        path.write_text(json.dumps(row) + "\n")
        records = parse_segments(path)
        assert len(records) == 1
        assert records[0] == SegmentRecord(**row)

    def test_end_before_start_names_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        row = {"session_id": "s1", "speaker_id": "a", "start_s": 3.0, "end_s": 2.0,
               "close_talk_path": "c.wav", "farfield_path": "f.wav"}
        path.write_text(json.dumps(row) + "\n")
        with pytest.raises(ManifestError, match="line 1") as exc:
            parse_segments(path)
        assert exc.value.line_no == 1

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        good = {"session_id": "s", "speaker_id": "a", "start_s": 0, "end_s": 1,
                "close_talk_path": "c", "farfield_path": "f"}
        path.write_text(json.dumps(good) + "\n{oops\n")
        with pytest.raises(ManifestError, match="line 2"):
            parse_segments(path)

    def test_missing_field_reported(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"session_id": "s"}\n')
        with pytest.raises(ManifestError, match="missing field"):
            parse_segments(path)

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "m.jsonl"
        row = {"session_id": "s", "speaker_id": "a", "start_s": 0, "end_s": 1,
               "close_talk_path": "c", "farfield_path": "f"}
        path.write_text("\n" + json.dumps(row) + "\n\n")
        assert len(parse_segments(path)) == 1


class TestCutSegment:
    def make_clip(self, seconds=10.0, rate=16000):
        rng = np.random.default_rng(7)
        return AudioClip(rng.standard_normal(int(seconds * rate)), rate)

    def test_full_cut_is_identity(self):
        clip = self.make_clip()
        out = cut_segment(clip, 0.0, 10.0)
        np.testing.assert_array_equal(out.samples, clip.samples)

    def test_middle_second(self):
        clip = self.make_clip()
        out = cut_segment(clip, 1.0, 2.0)
        assert out.n_samples == 16000
        np.testing.assert_array_equal(out.samples[0], clip.samples[0, 16000:32000])

    def test_overshoot_clamps_with_warning(self):
        clip = self.make_clip()
        with pytest.warns(SegmentClampWarning):
            out = cut_segment(clip, 9.5, 11.0)
        assert out.n_samples == 8000

    def test_start_beyond_end_raises(self):
        clip = self.make_clip()
        with pytest.raises(ValueError, match="beyond"):
            cut_segment(clip, 10.5, 11.0)

    def test_bad_interval(self):
        clip = self.make_clip()
        with pytest.raises(ValueError):
            cut_segment(clip, 2.0, 2.0)

    def test_length_rule_random(self):
        clip = self.make_clip()
        rng = np.random.default_rng(8)
        for _ in range(50):
            a = float(rng.uniform(0, 9))
            b = float(rng.uniform(a + 0.01, 10.0))
            out = cut_segment(clip, a, b)
            assert out.n_samples == round(b * 16000) - round(a * 16000)


class TestSegmentRecord:
    def test_invalid_interval(self):
        with pytest.raises(ValueError):
            SegmentRecord("s", "a", 2.0, 1.0, "c", "f")

    def test_empty_path(self):
        with pytest.raises(ValueError, match="nonempty"):
            SegmentRecord("s", "a", 0.0, 1.0, "", "f")
