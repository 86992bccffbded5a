import numpy as np
import pytest
from scipy.io import wavfile

from conftest import tone
from exceptions import AudioIoError, OutOfRange, UnsupportedFormat
from features.audio_loader import Waveform, extract_segment, load_audio, resample, write_wav


def peak_frequency(samples, rate):
    spectrum = np.abs(np.fft.rfft(samples * np.hanning(len(samples))))
    return np.fft.rfftfreq(len(samples), 1.0 / rate)[np.argmax(spectrum)]


def test_int16_stereo_is_averaged_and_scaled(tmp_path):
    left = np.full(1600, 16384, dtype=np.int16)
    right = np.zeros(1600, dtype=np.int16)
    wavfile.write(tmp_path / "stereo.wav", 16000, np.stack([left, right], axis=1))
    waveform = load_audio(tmp_path / "stereo.wav")
    assert waveform.sample_rate == 16000
    assert waveform.samples.dtype == np.float32
    assert np.allclose(waveform.samples, 0.25)


def test_resampling_keeps_the_tone(tmp_path):
    wavfile.write(tmp_path / "tone44.wav", 44100, tone(440.0, seconds=3.0, rate=44100))
    waveform = load_audio(tmp_path / "tone44.wav", target_rate=16000)
    assert len(waveform) == 48000
    assert abs(peak_frequency(waveform.samples, 16000) - 440.0) <= 1.0


def test_resample_identity():
    samples = np.arange(10, dtype=np.float64)
    assert resample(samples, 16000, 16000) is samples


def test_float_samples_are_clipped(tmp_path):
    wavfile.write(tmp_path / "loud.wav", 16000, np.array([2.0, -3.0, 0.5], dtype=np.float32))
    assert load_audio(tmp_path / "loud.wav").samples.tolist() == [1.0, -1.0, 0.5]


def test_missing_and_invalid_files(tmp_path):
    with pytest.raises(AudioIoError):
        load_audio(tmp_path / "nope.wav")
    (tmp_path / "text.wav").write_text("not audio")
    with pytest.raises(UnsupportedFormat):
        load_audio(tmp_path / "text.wav")


def test_write_then_load(tmp_path):
    original = Waveform(samples=tone(220.0, seconds=0.5), sample_rate=16000)
    write_wav(tmp_path / "out.wav", original)
    loaded = load_audio(tmp_path / "out.wav")
    assert np.max(np.abs(loaded.samples - original.samples)) < 1e-4


def test_extract_segment_bounds():
    waveform = Waveform(samples=np.arange(16000 * 4, dtype=np.float32), sample_rate=16000)
    piece = extract_segment(waveform, 1.0, 2.0)
    assert len(piece) == 32000
    assert piece.samples[0] == 16000

    tail = extract_segment(waveform, 3.0, 3.0)
    assert len(tail) == 48000
    assert np.all(tail.samples[16000:] == 0)

    with pytest.raises(OutOfRange):
        extract_segment(waveform, 4.0, 3.0)
    with pytest.raises(OutOfRange):
        extract_segment(waveform, -1.0, 3.0)
