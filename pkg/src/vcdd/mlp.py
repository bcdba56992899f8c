"""Single-hidden-layer network trained end to end with SGD.

Architecture: ``score = W2 . BN(ReLU(W1 x + b1)) + b2``.  Batch norm sits on
the hidden ReLU outputs, so the output layer is a linear model over
normalized hidden features and its squared norm serves as the capacity
estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import generator

SQUARED = "squared"
LOGISTIC = "logistic"
BN_EPS = 1e-5
BN_MOMENTUM = 0.1
PARAMS = ("W1", "b1", "gamma", "beta", "W2", "b2")


@dataclass
class MlpModel:
    W1: np.ndarray  # (N, d)
    b1: np.ndarray  # (N,)
    gamma: np.ndarray
    beta: np.ndarray
    W2: np.ndarray  # (N,)
    b2: np.ndarray  # shape (1,) so it can be updated in place
    running_mean: np.ndarray
    running_var: np.ndarray

    @property
    def width(self) -> int:
        return self.W1.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def output_norm_sq(self) -> float:
        return float(self.W2 @ self.W2)

    def params(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in PARAMS}

    def copy(self) -> "MlpModel":
        return MlpModel(**{k: v.copy() for k, v in vars(self).items()})


@dataclass
class TrainConfig:
    lr0: float = 0.001
    momentum: float = 0.95
    decay: float = 0.10
    decay_interval: int = 500
    epochs: int = 6000
    batch_size: int = 32
    seed: int = 0
    loss: str = SQUARED

    def __post_init__(self):
        if self.lr0 <= 0 or not 0 <= self.momentum < 1 or not 0 <= self.decay < 1:
            raise ValueError("need lr0 > 0, momentum in [0, 1), decay in [0, 1)")
        if self.decay_interval < 1 or self.epochs < 1 or self.batch_size < 2:
            raise ValueError("decay_interval and epochs must be >= 1, batch_size >= 2")
        if self.loss not in (SQUARED, LOGISTIC):
            raise ValueError(f"unknown loss {self.loss!r}")

    def lr_at(self, epoch: int) -> float:
        """Learning rate during 0-based ``epoch``."""
        return self.lr0 * (1.0 - self.decay) ** (epoch // self.decay_interval)


class TrainingDiverged(RuntimeError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


def xavier_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_xavier(d: int, N: int, seed: int) -> MlpModel:
    """Xavier-uniform weights, zero biases, identity batch norm."""
    if d < 1 or N < 1:
        raise ValueError(f"d and N must be >= 1, got d={d}, N={N}")
    g = generator(seed)
    W1 = g.uniform(-1.0, 1.0, size=(N, d)) * xavier_bound(d, N)
    W2 = g.uniform(-1.0, 1.0, size=N) * xavier_bound(N, 1)
    return MlpModel(
        W1=W1, b1=np.zeros(N), gamma=np.ones(N), beta=np.zeros(N),
        W2=W2, b2=np.zeros(1), running_mean=np.zeros(N), running_var=np.ones(N),
    )


def forward(model: MlpModel, X, mode: str = "train", update_running: bool = True):
    """Scores and a cache for :func:`backward`.

    Train mode normalizes with batch statistics (biased variance) and, unless
    ``update_running`` is false, folds them into the running estimates
    (unbiased variance, momentum 0.1).  Eval mode uses the running estimates.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ValueError(f"input has shape {X.shape}, model expects {model.input_dim} columns")
    pre = X @ model.W1.T + model.b1
    act = np.maximum(pre, 0.0)
    if mode == "train":
        B = X.shape[0]
        if B < 2:
            raise ValueError("train-mode batch norm needs at least 2 samples")
        mu = act.mean(axis=0)
        var = act.var(axis=0)
        if update_running:
            model.running_mean *= 1.0 - BN_MOMENTUM
            model.running_mean += BN_MOMENTUM * mu
            model.running_var *= 1.0 - BN_MOMENTUM
            model.running_var += BN_MOMENTUM * var * B / (B - 1)
    elif mode == "eval":
        mu, var = model.running_mean, model.running_var
    else:
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (act - mu) * inv_std
    hid = model.gamma * xhat + model.beta
    scores = hid @ model.W2 + model.b2[0]
    cache = {"X": X, "pre": pre, "xhat": xhat, "inv_std": inv_std, "hid": hid, "mode": mode}
    return scores, cache


def loss_and_grad(scores, y, kind: str = SQUARED):
    """Mean loss over the batch and its derivative w.r.t. the scores."""
    B = scores.shape[0]
    if kind == SQUARED:
        r = scores - y
        return 0.5 * float(r @ r) / B, r / B
    if kind == LOGISTIC:
        m = -y * scores
        loss = float(np.logaddexp(0.0, m).mean())
        return loss, -y * np.exp(-np.logaddexp(0.0, -m)) / B
    raise ValueError(f"unknown loss {kind!r}")


def backward(model: MlpModel, cache, dscores) -> dict[str, np.ndarray]:
    """Parameter gradients given ``dL/dscores``; train-mode caches only."""
    if cache["mode"] != "train":
        raise ValueError("backward needs a train-mode forward cache")
    xhat, inv_std, hid = cache["xhat"], cache["inv_std"], cache["hid"]
    B = xhat.shape[0]
    grads = {
        "W2": hid.T @ dscores,
        "b2": np.array([dscores.sum()]),
    }
    dhid = np.outer(dscores, model.W2)
    grads["gamma"] = (dhid * xhat).sum(axis=0)
    grads["beta"] = dhid.sum(axis=0)
    dxhat = dhid * model.gamma
    dact = inv_std / B * (B * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
    dpre = dact * (cache["pre"] > 0.0)
    grads["W1"] = dpre.T @ cache["X"]
    grads["b1"] = dpre.sum(axis=0)
    return grads


def predict(model: MlpModel, X) -> np.ndarray:
    scores, _ = forward(model, X, mode="eval")
    return np.where(scores >= 0.0, 1.0, -1.0)


def error_rate(model: MlpModel, X, y) -> float:
    return float(np.mean(predict(model, X) != y))


def estimate_vc_dim(model: MlpModel) -> float:
    """Squared norm of the output-layer weights plus one."""
    return model.output_norm_sq + 1.0


def default_record(epoch: int) -> bool:
    """Every epoch up to 200, then every 10th."""
    return epoch <= 200 or epoch % 10 == 0


def _batches(n: int, size: int, order: np.ndarray):
    starts = list(range(0, n, size))
    # a trailing batch of one sample is merged into the previous batch
    if len(starts) > 1 and n - starts[-1] == 1:
        starts.pop()
    bounds = starts[1:] + [n]
    return [order[s:e] for s, e in zip(starts, bounds)]


@dataclass
class History:
    epoch: list = field(default_factory=list)
    lr: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    train_error: list = field(default_factory=list)
    test_error: list = field(default_factory=list)
    output_norm_sq: list = field(default_factory=list)

    def append(self, **row):
        for k, v in row.items():
            getattr(self, k).append(v)

    def rows(self):
        return list(zip(self.epoch, self.lr, self.train_error, self.test_error, self.output_norm_sq))

    def to_csv(self, path) -> None:
        lines = ["epoch,lr,train_error,test_error,output_norm_sq"]
        for e, lr, tr, te, ns in self.rows():
            lines.append(f"{e},{lr:.17g},{tr:.17g},{te:.17g},{ns:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")


def train_sgd(data, N: int, cfg: TrainConfig | None = None, record=default_record, model: MlpModel | None = None):
    """Mini-batch SGD with classical momentum (``v = m v + g; p -= lr v``).

    ``data`` is a :class:`~vcdd.data.BinaryDataset` whose inputs are already
    scaled.  ``record(epoch)`` (1-based, counted after the epoch) selects
    which epochs are evaluated on the full train and test sets; the final
    epoch is always recorded.  Returns ``(model, history)``.
    """
    cfg = cfg or TrainConfig()
    X, y = np.asarray(data.X_train, float), np.asarray(data.y_train, float)
    Xt, yt = np.asarray(data.X_test, float), np.asarray(data.y_test, float)
    if X.shape[0] < 2:
        raise ValueError("need at least two training samples")
    model = model if model is not None else init_xavier(X.shape[1], N, cfg.seed)
    shuffle = generator(cfg.seed, 1)
    velocity = {k: np.zeros_like(v) for k, v in model.params().items()}
    history = History()
    with np.errstate(over="ignore", invalid="ignore"):
        _run_epochs(model, cfg, X, y, Xt, yt, shuffle, velocity, history, record)
    return model, history


def _run_epochs(model, cfg, X, y, Xt, yt, shuffle, velocity, history, record):
    for epoch in range(cfg.epochs):
        lr = cfg.lr_at(epoch)
        total, count = 0.0, 0
        for idx in _batches(len(y), cfg.batch_size, shuffle.permutation(len(y))):
            scores, cache = forward(model, X[idx])
            loss, dscores = loss_and_grad(scores, y[idx], cfg.loss)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss in epoch {epoch + 1}", history)
            grads = backward(model, cache, dscores)
            for k, p in model.params().items():
                v = velocity[k]
                v *= cfg.momentum
                v += grads[k]
                p -= lr * v
            total += loss * len(idx)
            count += len(idx)
        done = epoch + 1
        if record(done) or done == cfg.epochs:
            history.append(
                epoch=done, lr=lr, train_loss=total / count,
                train_error=error_rate(model, X, y), test_error=error_rate(model, Xt, yt),
                output_norm_sq=model.output_norm_sq,
            )
            if not all(np.isfinite(p).all() for p in model.params().values()):
                raise TrainingDiverged(f"non-finite parameters after epoch {done}", history)


def save_checkpoint(model: MlpModel, path) -> None:
    with open(Path(path), "wb") as fh:
        np.savez(fh, format_version=np.int64(1), **vars(model))


def load_checkpoint(path) -> MlpModel:
    with np.load(Path(path), allow_pickle=False) as f:
        if int(f["format_version"]) != 1:
            raise ValueError("unsupported checkpoint format version")
        return MlpModel(**{k: f[k].copy() for k in f.files if k != "format_version"})
