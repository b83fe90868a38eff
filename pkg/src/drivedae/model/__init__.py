from .params import ModelDims, ParamVector, init_params, load_checkpoint, save_checkpoint
from .network import (
    EncoderState,
    decode,
    encoder_step,
    forward_window,
    gelu,
    integrate,
    loss_and_grad,
)

__all__ = [
    "ModelDims",
    "ParamVector",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "EncoderState",
    "decode",
    "encoder_step",
    "forward_window",
    "gelu",
    "integrate",
    "loss_and_grad",
]
