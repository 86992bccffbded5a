# features/augmentation.py
"""Training-time augmentation: speed change and vocal-stem substitution."""

from fractions import Fraction
import zlib

import numpy as np

from config import AugmentPolicy
from dataset.records import SegmentMeta
from exceptions import FeatureError, MissingAudio
from .audio_loader import Waveform, resample


def speed_perturb(waveform: Waveform, factor: float) -> Waveform:
    """
    Changes playback speed by resampling; duration and pitch both change.

    The output holds ``round(N / factor)`` samples at the unchanged nominal rate,
    so a tone at f Hz comes out at ``f * factor`` Hz.
    """
    if factor <= 0:
        raise FeatureError(f"Speed factor must be positive, got {factor}")
    if factor == 1.0:
        return Waveform(samples=waveform.samples.copy(), sample_rate=waveform.sample_rate)

    ratio = Fraction(factor).limit_denominator(1000)
    # Treat the signal as if recorded at rate*factor and bring it back to rate.
    stretched = resample(
        np.asarray(waveform.samples, dtype=np.float64), ratio.numerator, ratio.denominator
    )
    target = int(np.floor(len(waveform) / factor + 0.5))
    if len(stretched) >= target:
        stretched = stretched[:target]
    else:
        stretched = np.concatenate([stretched, np.zeros(target - len(stretched))])
    return Waveform(
        samples=stretched.astype(waveform.samples.dtype), sample_rate=waveform.sample_rate
    )


def segment_rng(seed: int, segment_id: str, epoch: int = 0) -> np.random.Generator:
    """Independent stream per (seed, epoch, segment), so parallel featurization never changes draws."""
    return np.random.default_rng([int(seed), int(epoch), zlib.crc32(segment_id.encode("utf-8"))])


def choose_source(segment: SegmentMeta, policy: AugmentPolicy, rng: np.random.Generator) -> str:
    """
    Picks the vocal stem with probability ``stem_probability`` when one exists,
    otherwise the mixture. One uniform draw is consumed per call either way.
    """
    if not segment.audio_ref:
        raise MissingAudio(f"Segment {segment.segment_id!r} has no audio_ref")
    draw = rng.random()
    if segment.stem_ref and draw < policy.stem_probability:
        return segment.stem_ref
    return segment.audio_ref


def choose_speed(policy: AugmentPolicy, rng: np.random.Generator) -> float:
    factors = sorted(policy.speed_factors)
    return float(factors[int(rng.integers(len(factors)))])
