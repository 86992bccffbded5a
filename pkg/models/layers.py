# models/layers.py
"""
Forward and backward passes of the layer types used by the TDNN.

Inputs are per-utterance matrices shaped (frames, channels). Every forward
returns ``(output, cache)``; the matching backward takes the cache and the
upstream gradient.
"""

from typing import Dict, Tuple

import numpy as np
from scipy.special import expit

STD_FLOOR = 1e-9


def tdnn_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, dilation: int):
    """
    Dilated 1-D convolution over time without padding.

    Args:
        x: (T, C_in) input frames.
        weight: (C_out, C_in, kernel).
        bias: (C_out,).
        dilation: spacing between taps.

    Returns:
        (T - dilation*(kernel-1), C_out) output and the cache for backward.
    """
    c_out, c_in, kernel = weight.shape
    t_out = x.shape[0] - dilation * (kernel - 1)
    unfolded = np.concatenate(
        [x[j * dilation : j * dilation + t_out] for j in range(kernel)], axis=1
    )
    flat = weight.transpose(2, 1, 0).reshape(kernel * c_in, c_out)
    out = unfolded @ flat + bias
    return out, (unfolded, flat, x.shape, weight.shape, dilation)


def tdnn_backward(grad_out: np.ndarray, cache, need_input_grad: bool = True):
    unfolded, flat, x_shape, w_shape, dilation = cache
    c_out, c_in, kernel = w_shape
    grad_flat = unfolded.T @ grad_out
    grad_weight = grad_flat.reshape(kernel, c_in, c_out).transpose(2, 1, 0)
    grad_bias = grad_out.sum(axis=0)
    grad_x = None
    if need_input_grad:
        grad_unfolded = grad_out @ flat.T
        grad_x = np.zeros(x_shape, dtype=grad_out.dtype)
        t_out = grad_out.shape[0]
        for j in range(kernel):
            grad_x[j * dilation : j * dilation + t_out] += grad_unfolded[
                :, j * c_in : (j + 1) * c_in
            ]
    return grad_x, np.ascontiguousarray(grad_weight), grad_bias


def relu_forward(x: np.ndarray):
    mask = x > 0
    return np.where(mask, x, 0).astype(x.dtype, copy=False), mask


def relu_backward(grad_out: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, grad_out, 0).astype(grad_out.dtype, copy=False)


def stats_pool_forward(frames: np.ndarray):
    """Per-channel mean and population standard deviation, concatenated: (T, C) -> (2C,)."""
    mean = frames.mean(axis=0)
    centered = frames - mean
    std = np.sqrt((centered**2).mean(axis=0))
    return np.concatenate([mean, std]), (centered, std)


def stats_pool_backward(grad_out: np.ndarray, cache) -> np.ndarray:
    centered, std = cache
    n_frames, channels = centered.shape
    grad_mean = grad_out[:channels]
    grad_std = grad_out[channels:]
    safe_std = np.maximum(std, STD_FLOOR)
    return (grad_mean / n_frames + grad_std * centered / (n_frames * safe_std)).astype(
        grad_out.dtype, copy=False
    )


def linear_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    """weight is (out, in)."""
    return weight @ x + bias, x


def linear_backward(grad_out: np.ndarray, x: np.ndarray, weight: np.ndarray):
    return weight.T @ grad_out, np.outer(grad_out, x), grad_out.copy()


_OPEN_LOW = np.nextafter(0.0, 1.0)
_OPEN_HIGH = np.nextafter(1.0, 0.0)


def sigmoid_forward(z: float) -> float:
    """Logistic output kept inside the open interval (0, 1)."""
    return float(np.clip(expit(np.float64(z)), _OPEN_LOW, _OPEN_HIGH))


def sigmoid_backward(grad_out: float, score: float) -> float:
    return grad_out * score * (1.0 - score)


def relu_masks(caches: Dict[str, object]) -> Tuple[np.ndarray, ...]:
    """All ReLU masks of a forward cache, in layer order."""
    return tuple(v for k, v in sorted(caches.items()) if k.endswith(".relu"))
