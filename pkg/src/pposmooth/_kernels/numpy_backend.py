"""Pure-NumPy implementations of the hot MLP kernels.

Reference backend; the Cython extension in ``_core.pyx`` implements the
same two functions with identical semantics (including the ReLU
subgradient-at-zero convention: hidden == 0 propagates no gradient).
"""
from __future__ import annotations

import numpy as np

NAME = "numpy"


def mlp_forward(w1, b1, w2, b2, x):
    """One-hidden-layer ReLU MLP forward pass.

    x: (batch, in_dim). Returns (output (batch, out_dim), hidden (batch, hidden_dim)).
    """
    z = x @ w1.T + b1
    hidden = np.maximum(z, 0.0)
    out = hidden @ w2.T + b2
    return out, hidden


def mlp_backward(w1, w2, x, hidden, gy):
    """Backward pass matching mlp_forward.

    gy: gradient at the output, (batch, out_dim).
    Returns (gw1, gb1, gw2, gb2).
    """
    gw2 = gy.T @ hidden
    gb2 = gy.sum(axis=0)
    gh = gy @ w2
    gz = np.where(hidden > 0.0, gh, 0.0)
    gw1 = gz.T @ x
    gb1 = gz.sum(axis=0)
    return gw1, gb1, gw2, gb2
