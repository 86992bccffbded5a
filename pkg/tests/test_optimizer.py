import numpy as np

from models.tdnn import Parameters, TdnnModel, apply_freeze, init_parameters
from training.optimizer import Adam


def test_zero_learning_rate_leaves_parameters_untouched(tiny_model_cfg, random_mel):
    model = TdnnModel(tiny_model_cfg, seed=0)
    before = model.params.copy()
    optimizer = Adam(lr=0.0)
    for step in range(3):
        out = model.forward(random_mel(seed=step), train=True)
        optimizer.step(model.params, model.backward(out, 1.0))
    for name, tensor in before.tensors.items():
        assert model.params.tensors[name].tobytes() == tensor.tobytes()


def test_frozen_blocks_stay_bit_identical_over_100_steps(tiny_model_cfg, random_mel):
    params = apply_freeze(init_parameters(tiny_model_cfg, seed=1), 2)
    model = TdnnModel(tiny_model_cfg, params=params)
    initial = model.params.copy()
    optimizer = Adam(lr=1e-2)
    for step in range(100):
        out = model.forward(random_mel(frames=20, seed=step), train=True)
        optimizer.step(model.params, model.backward(out, 1.0 if step % 2 else -1.0))
    for name in ("block1.weight", "block1.bias", "block2.weight", "block2.bias"):
        assert model.params.tensors[name].tobytes() == initial.tensors[name].tobytes()
    assert not np.array_equal(model.params.tensors["head.bias"], initial.tensors["head.bias"])


def test_first_step_moves_by_learning_rate():
    params = Parameters({"w": np.array([1.0, -1.0, 0.5])})
    Adam(lr=0.1).step(params, {"w": np.array([2.0, -3.0, 0.0])})
    np.testing.assert_allclose(params.tensors["w"], [0.9, -0.9, 0.5], atol=1e-7)
