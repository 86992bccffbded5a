# training/optimizer.py

from typing import Dict

import numpy as np

from models.tdnn import Parameters


class Adam:
    """Adam with bias correction. Frozen tensors and tensors without a gradient are left untouched."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, params: Parameters, grads: Dict[str, np.ndarray]) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for name in params.tensors:
            if name in params.frozen or name not in grads:
                continue
            tensor = params.tensors[name]
            grad = grads[name].astype(tensor.dtype, copy=False)
            m = self.m.setdefault(name, np.zeros_like(tensor))
            v = self.v.setdefault(name, np.zeros_like(tensor))
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            update = (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            tensor -= (self.lr * update).astype(tensor.dtype, copy=False)
