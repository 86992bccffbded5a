# training/metrics.py

from typing import Sequence, Tuple

import numpy as np

from exceptions import LengthMismatch


def mae(pred: Sequence[float], target: Sequence[float]) -> float:
    """Mean absolute error."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.size == 0:
        raise LengthMismatch(pred.size, target.size)
    return float(np.mean(np.abs(pred - target)))


def constant_baseline_mae(target: Sequence[float], constant: float = 0.5) -> float:
    target = np.asarray(target, dtype=np.float64)
    return mae(np.full(target.shape, constant), target)


def summarize_maes(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and population standard deviation of per-fold MAEs."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise LengthMismatch(0, 0)
    return float(values.mean()), float(values.std(ddof=0))
