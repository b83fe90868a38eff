"""Model parameters as one flat float64 vector with named tensor views.

Flat storage keeps the optimizer, gradient checks, and checkpointing
trivial; the layout below is the wire order of the checkpoint file and the
unpack order inside the kernels, so all three must stay in sync.
"""

import struct
from dataclasses import dataclass

import numpy as np

CHECKPOINT_MAGIC = b"DRIVEDAE-CKPT"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelDims:
    """Network dimensions: input width, shared feature, LSTM hidden,
    decoder FC hidden, and window length."""

    m: int = 186
    r: int = 128
    h: int = 64
    d1: int = 128
    k: int = 10

    def __post_init__(self):
        for name in ("m", "r", "h", "d1", "k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def tensor_layout(dims: ModelDims):
    """Ordered (name, shape) pairs defining the flat layout."""
    hr = dims.h + dims.r
    layout = [("W_m", (dims.r, dims.m)), ("b_m", (dims.r,))]
    for gate in "ifoc":
        layout.append((f"W_enc_{gate}", (dims.h, hr)))
    for gate in "ifoc":
        layout.append((f"b_enc_{gate}", (dims.h,)))
    for gate in "ifoc":
        layout.append((f"W_dec_{gate}", (dims.h, hr)))
    for gate in "ifoc":
        layout.append((f"b_dec_{gate}", (dims.h,)))
    layout += [
        ("W_d1", (dims.d1, dims.h)),
        ("b_d1", (dims.d1,)),
        ("W_d2", (dims.m, dims.d1)),
        ("b_d2", (dims.m,)),
    ]
    return layout


def param_count(dims: ModelDims) -> int:
    return sum(int(np.prod(shape)) for _, shape in tensor_layout(dims))


class ParamVector:
    """A flat parameter (or gradient) vector plus named views into it."""

    def __init__(self, dims: ModelDims, data: np.ndarray | None = None):
        n = param_count(dims)
        if data is None:
            data = np.zeros(n, dtype=np.float64)
        data = np.asarray(data, dtype=np.float64)
        if data.shape != (n,):
            raise ValueError(f"expected flat vector of length {n}, got {data.shape}")
        self.dims = dims
        self.data = data
        self._views = {}
        offset = 0
        for name, shape in tensor_layout(dims):
            size = int(np.prod(shape))
            self._views[name] = self.data[offset:offset + size].reshape(shape)
            offset += size

    def tensor(self, name: str) -> np.ndarray:
        """Mutable view of one named tensor."""
        return self._views[name]

    def tensor_names(self):
        return list(self._views)

    def copy(self) -> "ParamVector":
        return ParamVector(self.dims, self.data.copy())

    def __len__(self):
        return self.data.size


def init_params(dims: ModelDims, seed: int = 0) -> ParamVector:
    """Seeded Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    params = ParamVector(dims)
    for name, shape in tensor_layout(dims):
        if not name.startswith("W"):
            continue
        fan_out, fan_in = shape
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        params.tensor(name)[:] = rng.uniform(-bound, bound, size=shape)
    return params


class CheckpointError(Exception):
    pass


def save_checkpoint(params: ParamVector, path) -> None:
    d = params.dims
    header = CHECKPOINT_MAGIC + struct.pack("<6I", CHECKPOINT_VERSION, d.m, d.r, d.h, d.d1, d.k)
    with open(path, "wb") as f:
        f.write(header)
        f.write(params.data.astype("<f8").tobytes())


def load_checkpoint(path) -> ParamVector:
    with open(path, "rb") as f:
        blob = f.read()
    n_magic = len(CHECKPOINT_MAGIC)
    if blob[:n_magic] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    version, m, r, h, d1, k = struct.unpack_from("<6I", blob, n_magic)
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    dims = ModelDims(m=m, r=r, h=h, d1=d1, k=k)
    payload = blob[n_magic + struct.calcsize("<6I"):]
    expected = param_count(dims) * 8
    if len(payload) != expected:
        raise CheckpointError(
            f"{path}: payload is {len(payload)} bytes, dimension header implies {expected}")
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return ParamVector(dims, data)
