"""Self-supervised denoising training.

Windows of k consecutive normalized input rows are corrupted with
Gaussian noise on the last row's control entries only; the training
target is that row's clean control. Optimization is Adam over shuffled
minibatches with a step learning-rate schedule, and the checkpoint with
the best validation loss is returned.
"""

from dataclasses import dataclass, field

import numpy as np

from .drivers import DriveDataset
from .model import ModelDims, ParamVector, init_params
from .model.network import loss_and_grad_batch

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainError(Exception):
    pass


@dataclass(frozen=True)
class NoiseSpec:
    sigma_steer: float = 0.05
    sigma_pedal: float = 0.2

    def __post_init__(self):
        if self.sigma_steer < 0 or self.sigma_pedal < 0:
            raise ValueError("sigma values must be >= 0")


@dataclass(frozen=True)
class TrainConfig:
    k: int = 10
    batch_size: int = 64
    lr0: float = 0.005
    lr_decay: float = 0.1
    decay_every: int = 20
    epochs: int = 50
    sigma_steer: float = 0.05
    sigma_pedal: float = 0.2
    seed: int = 0
    val_fraction: float = 0.1

    def __post_init__(self):
        if min(self.k, self.batch_size, self.epochs, self.decay_every) < 1:
            raise ValueError("k, batch_size, epochs, decay_every must be >= 1")
        if self.lr0 <= 0 or not (0 < self.lr_decay <= 1):
            raise ValueError("bad learning rate settings")
        if not (0 <= self.val_fraction < 1):
            raise ValueError("val_fraction must be in [0, 1)")

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.sigma_steer, self.sigma_pedal)


@dataclass
class EpochStats:
    epoch: int
    lr: float
    train_mse: float
    val_mse: float


def lr_schedule(epoch: int, cfg: TrainConfig) -> float:
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return cfg.lr0 * cfg.lr_decay ** (epoch // cfg.decay_every)


def make_windows(dataset: DriveDataset, k: int) -> list:
    """Window references (session_index, end_index); windows never span
    session boundaries. Sessions shorter than k contribute nothing."""
    if k < 1:
        raise ValueError("k must be >= 1")
    refs = []
    for si, session in enumerate(dataset.sessions):
        for end in range(k - 1, len(session)):
            refs.append((si, end))
    return refs


def window_at(inputs: list, ref, k: int) -> np.ndarray:
    si, end = ref
    return inputs[si][end - k + 1:end + 1]


def inject_noise(window: np.ndarray, spec: NoiseSpec, rng) -> np.ndarray:
    """Corrupt the last row's control entries; everything else bitwise."""
    out = window.copy()
    noise = rng.standard_normal(2) * np.array([spec.sigma_steer, spec.sigma_pedal])
    out[-1, 0:2] = np.clip(out[-1, 0:2] + noise, 0.0, 1.0)
    return out


def _inject_noise_batch(X: np.ndarray, spec: NoiseSpec, rng) -> None:
    B = X.shape[1]
    noise = rng.standard_normal((B, 2)) * np.array([spec.sigma_steer, spec.sigma_pedal])
    X[-1, :, 0:2] = np.clip(X[-1, :, 0:2] + noise, 0.0, 1.0)


def _assemble(inputs: list, refs, k: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    B = len(refs)
    X = np.empty((k, B, m))
    targets = np.empty((B, 2))
    for b, (si, end) in enumerate(refs):
        X[:, b, :] = inputs[si][end - k + 1:end + 1]
        targets[b] = inputs[si][end, 0:2]
    return X, targets


class Adam:
    def __init__(self, n: int):
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray, lr: float) -> None:
        self.t += 1
        self.m = ADAM_BETA1 * self.m + (1.0 - ADAM_BETA1) * grad
        self.v = ADAM_BETA2 * self.v + (1.0 - ADAM_BETA2) * grad * grad
        mhat = self.m / (1.0 - ADAM_BETA1 ** self.t)
        vhat = self.v / (1.0 - ADAM_BETA2 ** self.t)
        theta -= lr * mhat / (np.sqrt(vhat) + ADAM_EPS)


def _split_refs(dataset: DriveDataset, refs: list, cfg: TrainConfig, rng) -> tuple[list, list]:
    """Hold out whole sessions when possible; otherwise the tail of the
    single session."""
    if cfg.val_fraction == 0:
        return refs, []
    n_sessions = len(dataset.sessions)
    if n_sessions >= 2:
        order = rng.permutation(n_sessions)
        n_val = max(1, int(round(n_sessions * cfg.val_fraction)))
        n_val = min(n_val, n_sessions - 1)
        val_set = set(order[:n_val].tolist())
        train = [r for r in refs if r[0] not in val_set]
        val = [r for r in refs if r[0] in val_set]
        return train, val
    n_val = max(1, int(len(refs) * cfg.val_fraction))
    return refs[:-n_val], refs[-n_val:]


def _epoch_loss(inputs, refs, params, cfg, noise_rng) -> float:
    d = params.dims
    total, count = 0.0, 0
    for lo in range(0, len(refs), cfg.batch_size):
        chunk = refs[lo:lo + cfg.batch_size]
        X, targets = _assemble(inputs, chunk, cfg.k, d.m)
        _inject_noise_batch(X, cfg.noise, noise_rng)
        loss, _ = loss_and_grad_batch(X, targets, params)
        total += loss * len(chunk)
        count += len(chunk)
    return total / count


def train(dataset: DriveDataset, cfg: TrainConfig = TrainConfig(),
          dims: ModelDims | None = None) -> tuple[ParamVector, list]:
    """Returns (best-validation parameters, per-epoch stats)."""
    if dims is None:
        dims = ModelDims(k=cfg.k)
    if dims.k != cfg.k:
        raise ValueError("dims.k must match cfg.k")
    refs = make_windows(dataset, cfg.k)
    if len(refs) < cfg.batch_size:
        raise TrainError(f"dataset yields {len(refs)} windows; need >= {cfg.batch_size}")

    inputs = [s.model_inputs() for s in dataset.sessions]
    split_rng = np.random.default_rng(cfg.seed)
    train_refs, val_refs = _split_refs(dataset, refs, cfg, split_rng)
    if not train_refs:
        raise TrainError("no training windows after the validation split")

    params = init_params(dims, seed=cfg.seed)
    opt = Adam(len(params))
    noise_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    order_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2]))

    history = []
    best_val = np.inf
    best = params.copy()
    train_arr = np.array(train_refs)
    for epoch in range(cfg.epochs):
        lr = lr_schedule(epoch, cfg)
        perm = order_rng.permutation(len(train_arr))
        total, count = 0.0, 0
        for lo in range(0, len(perm), cfg.batch_size):
            chunk = train_arr[perm[lo:lo + cfg.batch_size]]
            X, targets = _assemble(inputs, chunk, cfg.k, dims.m)
            _inject_noise_batch(X, cfg.noise, noise_rng)
            loss, grad = loss_and_grad_batch(X, targets, params)
            if not np.isfinite(loss):
                raise TrainError(f"non-finite training loss at epoch {epoch}")
            opt.step(params.data, grad, lr)
            total += loss * len(chunk)
            count += len(chunk)
        train_mse = total / count

        if val_refs:
            # same noise draw every epoch keeps validation comparable
            val_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 3]))
            val_mse = _epoch_loss(inputs, val_refs, params, cfg, val_rng)
        else:
            val_mse = train_mse
        if not np.isfinite(val_mse):
            raise TrainError(f"non-finite validation loss at epoch {epoch}")
        history.append(EpochStats(epoch=epoch, lr=lr, train_mse=train_mse, val_mse=val_mse))
        if val_mse < best_val:
            best_val = val_mse
            best = params.copy()
    return best, history


def history_to_csv(history: list) -> str:
    lines = ["epoch,lr,train_mse,val_mse"]
    for h in history:
        lines.append(f"{h.epoch},{h.lr:.10g},{h.train_mse:.17g},{h.val_mse:.17g}")
    return "\n".join(lines) + "\n"


def noisy_baseline_mse(spec: NoiseSpec = NoiseSpec()) -> float:
    """MSE of the corrupted control against the clean control, ignoring
    the clamp: the mean of the two noise variances."""
    return (spec.sigma_steer ** 2 + spec.sigma_pedal ** 2) / 2.0
