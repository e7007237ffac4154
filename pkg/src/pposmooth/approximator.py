"""One-hidden-layer ReLU network with exact reverse-mode gradients and Adam.

Parameters live in a single flat float64 array with a fixed layout
[W1 | b1 | W2 | b2]; the heavy forward/backward work is delegated to the
selected kernel backend (Cython extension or NumPy fallback).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels

__all__ = [
    "Dims",
    "ParamVector",
    "Gradient",
    "ActivationRecord",
    "AdamState",
    "init_params",
    "zeros_like",
    "forward",
    "forward_batch",
    "backward",
    "adam_init",
    "adam_step",
    "save_params",
    "load_params",
]


class Dims(NamedTuple):
    input_dim: int
    hidden_dim: int
    output_dim: int

    def param_count(self) -> int:
        i, h, o = self
        return h * (i + 1) + o * (h + 1)


@dataclass
class _FlatArray:
    values: np.ndarray
    dims: Dims

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.dims = Dims(*self.dims)
        if self.values.shape != (self.dims.param_count(),):
            raise ValueError(
                f"flat array length {self.values.shape} does not match dims {self.dims}"
            )

    # Slice views into the flat layout [W1 | b1 | W2 | b2].
    @property
    def w1(self) -> np.ndarray:
        i, h, _ = self.dims
        return self.values[: h * i].reshape(h, i)

    @property
    def b1(self) -> np.ndarray:
        i, h, _ = self.dims
        return self.values[h * i : h * i + h]

    @property
    def w2(self) -> np.ndarray:
        i, h, o = self.dims
        start = h * (i + 1)
        return self.values[start : start + o * h].reshape(o, h)

    @property
    def b2(self) -> np.ndarray:
        i, h, o = self.dims
        return self.values[h * (i + 1) + o * h :]


@dataclass
class ParamVector(_FlatArray):
    pass


@dataclass
class Gradient(_FlatArray):
    pass


@dataclass
class ActivationRecord:
    """Everything backward needs: the inputs and the post-ReLU activations."""

    inputs: np.ndarray
    hidden: np.ndarray
    dims: Dims


def init_params(dims: Dims, seed: int) -> ParamVector:
    """Uniform fan-based weights in +-sqrt(6/(fan_in+fan_out)), zero biases."""
    dims = Dims(*dims)
    if min(dims) < 1:
        raise ValueError(f"all dims must be positive, got {dims}")
    rng = np.random.default_rng(seed)
    i, h, o = dims
    lim1 = math.sqrt(6.0 / (i + h))
    lim2 = math.sqrt(6.0 / (h + o))
    values = np.concatenate(
        [
            rng.uniform(-lim1, lim1, size=h * i),
            np.zeros(h),
            rng.uniform(-lim2, lim2, size=o * h),
            np.zeros(o),
        ]
    )
    return ParamVector(values, dims)


def zeros_like(params: ParamVector) -> Gradient:
    return Gradient(np.zeros_like(params.values), params.dims)


def forward_batch(params: ParamVector, inputs: np.ndarray) -> tuple[np.ndarray, ActivationRecord]:
    x = np.ascontiguousarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dims.input_dim:
        raise ValueError(
            f"expected input shape (batch, {params.dims.input_dim}), got {x.shape}"
        )
    w1 = np.ascontiguousarray(params.w1)
    w2 = np.ascontiguousarray(params.w2)
    out, hidden = _kernels.mlp_forward(w1, params.b1, w2, params.b2, x)
    return out, ActivationRecord(x, np.asarray(hidden), params.dims)


def forward(params: ParamVector, inputs: np.ndarray) -> tuple[np.ndarray, ActivationRecord]:
    """Single-input forward pass; returns a 1-D output vector."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D input vector, got shape {x.shape}")
    out, record = forward_batch(params, x[None, :])
    return out[0], record


def backward(params: ParamVector, record: ActivationRecord, output_gradient: np.ndarray) -> Gradient:
    """Gradient of a scalar loss with d(loss)/d(output) = output_gradient."""
    if record.dims != params.dims:
        raise ValueError(f"activation record dims {record.dims} != params dims {params.dims}")
    gy = np.ascontiguousarray(output_gradient, dtype=np.float64)
    if gy.ndim == 1:
        gy = gy[None, :]
    if gy.shape != (record.inputs.shape[0], params.dims.output_dim):
        raise ValueError(
            f"output gradient shape {gy.shape} does not match record batch "
            f"{record.inputs.shape[0]} x output dim {params.dims.output_dim}"
        )
    w1 = np.ascontiguousarray(params.w1)
    w2 = np.ascontiguousarray(params.w2)
    hidden = np.ascontiguousarray(record.hidden)
    gw1, gb1, gw2, gb2 = _kernels.mlp_backward(w1, w2, record.inputs, hidden, gy)
    values = np.concatenate(
        [np.asarray(gw1).ravel(), np.asarray(gb1), np.asarray(gw2).ravel(), np.asarray(gb2)]
    )
    return Gradient(values, params.dims)


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8


def adam_init(size: int, learning_rate: float) -> AdamState:
    return AdamState(np.zeros(size), np.zeros(size), 0, learning_rate)


def adam_step(state: AdamState, values: np.ndarray, grad: np.ndarray, ascend: bool = False) -> np.ndarray:
    """One bias-corrected Adam update; mutates ``state``, returns new values.

    ``ascend=True`` steps in +grad (the actor maximizes its objective).
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.first_moment.shape or values.shape != grad.shape:
        raise ValueError("adam_step shape mismatch")
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient entries; update rejected")
    state.step_count += 1
    t = state.step_count
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad
    state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * grad * grad
    m_hat = state.first_moment / (1.0 - state.beta1**t)
    v_hat = state.second_moment / (1.0 - state.beta2**t)
    step = state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps_hat)
    return values + step if ascend else values - step


def save_params(path, params: ParamVector) -> None:
    """Line-oriented text checkpoint: header 'dims <in> <hidden> <out>',
    then one decimal value per line."""
    i, h, o = params.dims
    with open(path, "w") as fh:
        fh.write(f"dims {i} {h} {o}\n")
        for v in params.values:
            fh.write(f"{float(v)!r}\n")


def load_params(path) -> ParamVector:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "dims":
            raise ValueError(f"malformed checkpoint header in {path}")
        dims = Dims(int(header[1]), int(header[2]), int(header[3]))
        values = np.array([float(line) for line in fh if line.strip()])
    return ParamVector(values, dims)
