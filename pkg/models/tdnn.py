# models/tdnn.py
"""TDNN x-vector regressor: dilated conv blocks, statistics pooling, 64-dim embedding, sigmoid head."""

from dataclasses import dataclass, field
import logging
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import TdnnConfig
from exceptions import LengthMismatch, MissingCache, ModelError, ShapeMismatch, TooFewFrames
from . import layers

logger = logging.getLogger(__name__)


@dataclass
class Parameters:
    """Named tensors in a fixed order plus the set of frozen tensor names."""

    tensors: Dict[str, np.ndarray]
    frozen: FrozenSet[str] = frozenset()

    def trainable(self) -> List[str]:
        return [n for n in self.tensors if n not in self.frozen]

    def copy(self) -> "Parameters":
        return Parameters({k: v.copy() for k, v in self.tensors.items()}, self.frozen)

    def astype(self, dtype) -> "Parameters":
        return Parameters({k: v.astype(dtype) for k, v in self.tensors.items()}, self.frozen)


@dataclass
class ForwardOutput:
    score: float
    embedding: np.ndarray
    cache: Optional[Dict[str, object]] = field(default=None, repr=False)


def expected_shapes(cfg: TdnnConfig) -> Dict[str, Tuple[int, ...]]:
    shapes: Dict[str, Tuple[int, ...]] = {}
    for i, block in enumerate(cfg.blocks, start=1):
        shapes[f"block{i}.weight"] = (block.out_channels, block.in_channels, block.kernel)
        shapes[f"block{i}.bias"] = (block.out_channels,)
    pooled = 2 * cfg.blocks[-1].out_channels
    shapes["embed.weight"] = (cfg.embed_dim, pooled)
    shapes["embed.bias"] = (cfg.embed_dim,)
    shapes["head.weight"] = (1, cfg.embed_dim)
    shapes["head.bias"] = (1,)
    return shapes


def parameter_count(cfg: TdnnConfig) -> int:
    """sum(C_in*k*C_out + C_out) over blocks + (2*C_last*E + E) + (E + 1)."""
    blocks = sum(b.in_channels * b.kernel * b.out_channels + b.out_channels for b in cfg.blocks)
    embed = 2 * cfg.blocks[-1].out_channels * cfg.embed_dim + cfg.embed_dim
    return blocks + embed + cfg.embed_dim + 1


def receptive_field(cfg: TdnnConfig) -> int:
    return 1 + sum((b.kernel - 1) * b.dilation for b in cfg.blocks)


def init_parameters(cfg: TdnnConfig, seed: Union[int, Sequence[int]] = 0, dtype=np.float32) -> Parameters:
    """He-uniform weights (bound sqrt(6 / fan_in)), zero biases."""
    rng = np.random.default_rng(seed)
    tensors: Dict[str, np.ndarray] = {}
    for name, shape in expected_shapes(cfg).items():
        if name.endswith(".bias"):
            tensors[name] = np.zeros(shape, dtype=dtype)
            continue
        fan_in = int(np.prod(shape[1:]))
        bound = np.sqrt(6.0 / fan_in)
        tensors[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return apply_freeze(Parameters(tensors), cfg.frozen_blocks)


def apply_freeze(params: Parameters, frozen_blocks: int) -> Parameters:
    """Marks blocks 1..frozen_blocks as frozen; embedding and head stay trainable."""
    n_blocks = sum(1 for n in params.tensors if n.startswith("block") and n.endswith(".weight"))
    if not 0 <= frozen_blocks <= n_blocks:
        raise ModelError(f"frozen_blocks must be in [0, {n_blocks}], got {frozen_blocks}")
    frozen = frozenset(
        name
        for name in params.tensors
        for i in range(1, frozen_blocks + 1)
        if name.startswith(f"block{i}.")
    )
    return Parameters(params.tensors, frozen)


def validate_parameters(params: Parameters, cfg: TdnnConfig) -> None:
    expected = expected_shapes(cfg)
    if set(expected) != set(params.tensors):
        missing = sorted(set(expected) - set(params.tensors))
        extra = sorted(set(params.tensors) - set(expected))
        raise ShapeMismatch(f"Tensor names differ from config (missing {missing}, extra {extra})")
    for name, shape in expected.items():
        if tuple(params.tensors[name].shape) != shape:
            raise ShapeMismatch(
                f"{name}: shape {tuple(params.tensors[name].shape)} does not match config {shape}"
            )


class TdnnModel:
    """
    Forward/backward over a single utterance.

    Parameters live in ``self.params``; the model never mutates them itself.
    ``dtype`` float64 gives the end-to-end double precision used by gradient checks.
    """

    def __init__(
        self,
        cfg: TdnnConfig,
        params: Optional[Parameters] = None,
        seed: Union[int, Sequence[int]] = 0,
        dtype=np.float32,
    ):
        self.cfg = cfg
        self.dtype = np.dtype(dtype)
        self.params = params.astype(self.dtype) if params is not None else init_parameters(cfg, seed, self.dtype)
        validate_parameters(self.params, cfg)

    @property
    def receptive_field(self) -> int:
        return receptive_field(self.cfg)

    def _check_input(self, mel: np.ndarray) -> np.ndarray:
        x = np.asarray(mel, dtype=self.dtype)
        if x.ndim != 2 or x.shape[1] != self.cfg.blocks[0].in_channels:
            raise ShapeMismatch(
                f"Expected (frames, {self.cfg.blocks[0].in_channels}) input, got {x.shape}"
            )
        if x.shape[0] < self.receptive_field:
            raise TooFewFrames(
                f"{x.shape[0]} frames is below the receptive field of {self.receptive_field}"
            )
        return x

    def frame_activations(self, mel: np.ndarray) -> np.ndarray:
        """Output of the last TDNN block, i.e. the statistics-pooling input."""
        x = self._check_input(mel)
        p = self.params.tensors
        for i, block in enumerate(self.cfg.blocks, start=1):
            x, _ = layers.tdnn_forward(x, p[f"block{i}.weight"], p[f"block{i}.bias"], block.dilation)
            x, _ = layers.relu_forward(x)
        return x

    def forward(self, mel: np.ndarray, train: bool = False) -> ForwardOutput:
        x = self._check_input(mel)
        p = self.params.tensors
        cache: Dict[str, object] = {}
        for i, block in enumerate(self.cfg.blocks, start=1):
            x, cache[f"block{i}.conv"] = layers.tdnn_forward(
                x, p[f"block{i}.weight"], p[f"block{i}.bias"], block.dilation
            )
            x, cache[f"block{i}.relu"] = layers.relu_forward(x)
        pooled, cache["pool"] = layers.stats_pool_forward(x)
        hidden, cache["embed.linear"] = layers.linear_forward(pooled, p["embed.weight"], p["embed.bias"])
        embedding, cache["embed.relu"] = layers.relu_forward(hidden)
        logit, cache["head.linear"] = layers.linear_forward(embedding, p["head.weight"], p["head.bias"])
        score = layers.sigmoid_forward(logit[0])
        return ForwardOutput(score=score, embedding=embedding, cache=cache if train else None)

    def backward(self, output: ForwardOutput, grad_score: float) -> Dict[str, np.ndarray]:
        """
        Gradients of the loss w.r.t. every trainable tensor, given dLoss/dscore.

        Frozen tensors are omitted; backpropagation stops below the lowest
        trainable block.
        """
        if output.cache is None:
            raise MissingCache("backward needs a forward pass run with train=True")
        cache = output.cache
        p = self.params.tensors
        frozen = self.params.frozen
        grads: Dict[str, np.ndarray] = {}

        grad_logit = np.array(
            [layers.sigmoid_backward(float(grad_score), output.score)], dtype=self.dtype
        )
        grad_emb, grads["head.weight"], grads["head.bias"] = layers.linear_backward(
            grad_logit, cache["head.linear"], p["head.weight"]
        )
        grad_hidden = layers.relu_backward(grad_emb, cache["embed.relu"])
        grad_pooled, grads["embed.weight"], grads["embed.bias"] = layers.linear_backward(
            grad_hidden, cache["embed.linear"], p["embed.weight"]
        )
        grad_x = layers.stats_pool_backward(grad_pooled, cache["pool"])

        n_blocks = len(self.cfg.blocks)
        lowest_trainable = min(
            (i for i in range(1, n_blocks + 1) if f"block{i}.weight" not in frozen
             or f"block{i}.bias" not in frozen),
            default=n_blocks + 1,
        )
        for i in range(n_blocks, lowest_trainable - 1, -1):
            grad_x = layers.relu_backward(grad_x, cache[f"block{i}.relu"])
            grad_x, grads[f"block{i}.weight"], grads[f"block{i}.bias"] = layers.tdnn_backward(
                grad_x, cache[f"block{i}.conv"], need_input_grad=i > lowest_trainable
            )

        return {
            name: grads[name].astype(self.dtype, copy=False)
            for name in self.params.tensors
            if name in grads and name not in frozen
        }

    def predict(self, mel: np.ndarray) -> float:
        return self.forward(mel).score


def l1_loss(pred: Sequence[float], target: Sequence[float]) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.size == 0:
        raise LengthMismatch(pred.size, target.size)
    return float(np.abs(pred - target).mean())


def l1_grad(pred: Sequence[float], target: Sequence[float]) -> np.ndarray:
    """d(mean |p - t|)/dp with subgradient 0 where p == t."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.size == 0:
        raise LengthMismatch(pred.size, target.size)
    return np.sign(pred - target) / pred.size


def load_compatible(params: Parameters, source: Parameters) -> List[str]:
    """Copies every tensor of ``source`` whose name and shape match (warm start)."""
    copied = []
    for name, tensor in source.tensors.items():
        if name in params.tensors and params.tensors[name].shape == tensor.shape:
            params.tensors[name][...] = tensor
            copied.append(name)
    logger.info("Warm start copied %d of %d tensors", len(copied), len(params.tensors))
    return copied


def gradient_check(
    model: TdnnModel, mel: np.ndarray, target: float = 0.0, eps: float = 1e-4
) -> Dict[str, float]:
    """
    Compares backward() against central finite differences of the L1 loss.

    Run on a float64 model. Entries whose +/-eps perturbations flip a ReLU mask sit
    on a kink and are skipped. Relative error is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).

    Returns:
        tensor name -> max relative error, plus ``"_skipped"`` (count of kink entries).
    """
    if model.dtype != np.float64:
        raise ModelError("gradient_check needs a float64 model")

    def loss_and_masks():
        out = model.forward(mel, train=True)
        return l1_loss([out.score], [target]), layers.relu_masks(out.cache)

    def same(a, b):
        return all(np.array_equal(x, y) for x, y in zip(a, b))

    out = model.forward(mel, train=True)
    grad_score = l1_grad([out.score], [target])[0]
    analytic = model.backward(out, grad_score)
    baseline = layers.relu_masks(out.cache)

    errors: Dict[str, float] = {}
    skipped = 0
    for name in model.params.trainable():
        tensor = model.params.tensors[name]
        worst = 0.0
        for idx in np.ndindex(tensor.shape):
            original = tensor[idx]
            tensor[idx] = original + eps
            loss_plus, masks_plus = loss_and_masks()
            tensor[idx] = original - eps
            loss_minus, masks_minus = loss_and_masks()
            tensor[idx] = original
            if not (same(masks_plus, baseline) and same(masks_minus, baseline)):
                skipped += 1
                continue
            numeric = (loss_plus - loss_minus) / (2 * eps)
            a = float(analytic[name][idx])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, rel)
        errors[name] = worst
    errors["_skipped"] = float(skipped)
    return errors
