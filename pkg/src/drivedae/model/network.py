"""The denoising network, step by step.

``integrate``, ``encoder_step``, and ``decode`` are the readable
single-vector operations; ``forward_window`` and ``loss_and_grad`` are the
public entry points and run through the batched kernels. The test suite
pins the two routes against each other and against scalar oracles.

Architecture: a fully connected integration layer with exact (erf-based)
GELU produces a shared feature vector per time step; an LSTM encoder whose
hidden output additionally adds the hidden state from two steps earlier
consumes the k-step sequence; a decoder LSTM step is seeded with the
encoder's final hidden and cell state and re-reads the latest feature
vector; two FC layers (GELU, then sigmoid) reconstruct the full input, and
the first two output entries are the denoised control. The additive
two-step skip means the hidden state is unbounded in principle; it is
implemented as defined, without clipping.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .. import kernels
from .params import ModelDims, ParamVector


def gelu(x):
    """Exact GELU, x * Phi(x) with the standard normal CDF (not the tanh fit).

    Phi is evaluated as 0.5 * erfc(-x / sqrt 2), which keeps the deep
    negative tail instead of cancelling it to zero.
    """
    x = np.asarray(x, dtype=np.float64)
    return x * 0.5 * erfc(-x / np.sqrt(2.0))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass
class EncoderState:
    """Encoder state after a step: hidden, cell, and the two-step hidden
    history feeding the skip connection."""

    h: np.ndarray
    c: np.ndarray
    h_m1: np.ndarray
    h_m2: np.ndarray

    @classmethod
    def initial(cls, hidden: int) -> "EncoderState":
        z = np.zeros(hidden)
        return cls(z.copy(), z.copy(), z.copy(), z.copy())


def integrate(x, params: ParamVector) -> np.ndarray:
    """Shared feature vector from one input frame."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.dims.m,):
        raise ValueError(f"input must be length {params.dims.m}, got {x.shape}")
    return gelu(params.tensor("W_m") @ x + params.tensor("b_m"))


def encoder_step(r, state: EncoderState, params: ParamVector) -> EncoderState:
    """One encoder LSTM step; the new hidden adds the hidden from two steps back."""
    z = np.concatenate([state.h, r])
    i = _sigmoid(params.tensor("W_enc_i") @ z + params.tensor("b_enc_i"))
    f = _sigmoid(params.tensor("W_enc_f") @ z + params.tensor("b_enc_f"))
    o = _sigmoid(params.tensor("W_enc_o") @ z + params.tensor("b_enc_o"))
    g = np.tanh(params.tensor("W_enc_c") @ z + params.tensor("b_enc_c"))
    c = f * state.c + i * g
    h = o * np.tanh(c) + state.h_m1
    return EncoderState(h=h, c=c, h_m1=state.h, h_m2=state.h_m1)


def decode(r, enc: EncoderState, params: ParamVector) -> np.ndarray:
    """Decoder LSTM step seeded with the encoder state, then the two output
    layers; returns the full reconstruction in (0, 1)."""
    z = np.concatenate([enc.h, r])
    i = _sigmoid(params.tensor("W_dec_i") @ z + params.tensor("b_dec_i"))
    f = _sigmoid(params.tensor("W_dec_f") @ z + params.tensor("b_dec_f"))
    o = _sigmoid(params.tensor("W_dec_o") @ z + params.tensor("b_dec_o"))
    g = np.tanh(params.tensor("W_dec_c") @ z + params.tensor("b_dec_c"))
    c = f * enc.c + i * g
    h = o * np.tanh(c)
    q = gelu(params.tensor("W_d1") @ h + params.tensor("b_d1"))
    return _sigmoid(params.tensor("W_d2") @ q + params.tensor("b_d2"))


def _check_window(window, dims: ModelDims) -> np.ndarray:
    w = np.asarray(window, dtype=np.float64)
    if w.shape != (dims.k, dims.m):
        raise ValueError(f"window must be ({dims.k}, {dims.m}), got {w.shape}")
    return w


def forward_window(window, params: ParamVector):
    """Run the full network over one k-step window.

    Returns (reconstruction, denoised control), the control being the first
    two reconstruction entries.
    """
    d = params.dims
    w = _check_window(window, d)
    xhat = kernels.dae_forward(params.data, d.m, d.r, d.h, d.d1,
                               np.ascontiguousarray(w[:, None, :]))[0]
    return xhat, xhat[:2].copy()


def forward_batch(X, params: ParamVector) -> np.ndarray:
    """Batched forward; X shaped (k, B, m), returns (B, m)."""
    d = params.dims
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[0] != d.k or X.shape[2] != d.m:
        raise ValueError(f"batch must be ({d.k}, B, {d.m}), got {X.shape}")
    return kernels.dae_forward(params.data, d.m, d.r, d.h, d.d1, X)


def loss_and_grad(window, target, params: ParamVector):
    """MSE over the two control entries plus the exact parameter gradient."""
    d = params.dims
    w = _check_window(window, d)
    target = np.asarray(target, dtype=np.float64).reshape(1, 2)
    loss, g = kernels.dae_loss_grad(params.data, d.m, d.r, d.h, d.d1,
                                    np.ascontiguousarray(w[:, None, :]), target)
    return loss, ParamVector(d, g)


def loss_and_grad_batch(X, targets, params: ParamVector):
    """Batch-mean control loss and gradient; X (k, B, m), targets (B, 2)."""
    d = params.dims
    X = np.ascontiguousarray(X, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if X.ndim != 3 or X.shape[0] != d.k or X.shape[2] != d.m:
        raise ValueError(f"batch must be ({d.k}, B, {d.m}), got {X.shape}")
    if targets.shape != (X.shape[1], 2):
        raise ValueError(f"targets must be ({X.shape[1]}, 2), got {targets.shape}")
    return kernels.dae_loss_grad(params.data, d.m, d.r, d.h, d.d1, X, targets)
