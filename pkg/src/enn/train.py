"""Training loops: minibatch SGD for classification maps, full-batch Adam for images."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, image_to_dataset
from .network import backward, forward, predict_class
from .optim import AdamState, LearningRates, adam_step, sgd_step

FULL = None  # batch_size value meaning "whole dataset per step"


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    rates: LearningRates = field(default_factory=LearningRates)
    optimizer: str = "sgd"
    seed: int = 0
    eval_every: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size is not FULL and self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1 or FULL, got {self.batch_size}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")


@dataclass
class Metrics:
    records: list = field(default_factory=list)  # dicts: epoch, mse, accuracy
    steps: int = 0

    def add(self, epoch, mse, accuracy=None):
        self.records.append({"epoch": epoch, "mse": float(mse),
                             "accuracy": None if accuracy is None else float(accuracy)})

    @property
    def mse(self):
        return np.array([r["mse"] for r in self.records])

    @property
    def final(self):
        return self.records[-1]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "mse", "accuracy"])
            for r in self.records:
                acc = "" if r["accuracy"] is None else f"{r['accuracy']:.17g}"
                w.writerow([r["epoch"], f"{r['mse']:.17g}", acc])


def evaluate_mse(net, data):
    yhat = forward(net, data.inputs, cache=False)
    r = data.targets - yhat
    return float(np.mean(r * r))


def evaluate_accuracy(net, data):
    return float(np.mean(predict_class(net, data.inputs) == data.targets))


def _stepper(cfg):
    if cfg.optimizer == "adam":
        state = AdamState()
        return lambda net, g: adam_step(net, g, cfg.rates, state)
    return lambda net, g: sgd_step(net, g, cfg.rates)


def train_classification(net, data, cfg, eval_data=None, log=None):
    """Shuffled minibatch training on the squared error; mutates ``net``.

    Metrics are recorded every ``cfg.eval_every`` epochs (and after the last)
    on ``eval_data`` if given, otherwise on the training set.
    """
    if len(data) == 0:
        raise ValueError("empty dataset")
    if not np.all(np.isin(data.targets, (-1.0, 1.0))):
        raise ValueError("classification targets must be -1 or +1")
    ev = data if eval_data is None else eval_data
    rng = np.random.default_rng(cfg.seed)
    step = _stepper(cfg)
    bs = len(data) if cfg.batch_size is FULL else cfg.batch_size
    X, y = data.inputs, data.targets
    metrics = Metrics()
    for epoch in range(1, cfg.epochs + 1):
        perm = rng.permutation(len(data))
        for i in range(0, len(data), bs):
            idx = perm[i:i + bs]
            step(net, backward(net, X[idx], y[idx]))
            metrics.steps += 1
        if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
            metrics.add(epoch, evaluate_mse(net, ev), evaluate_accuracy(net, ev))
            if log:
                log(f"epoch {epoch}: mse={metrics.final['mse']:.4g} acc={metrics.final['accuracy']:.4f}")
    return metrics


def train_regression(net, data, cfg, log=None):
    """Full-batch (or minibatch) regression; MSE recorded after each logged epoch."""
    rng = np.random.default_rng(cfg.seed)
    step = _stepper(cfg)
    X, y = data.inputs, data.targets
    metrics = Metrics()
    full = cfg.batch_size is FULL or cfg.batch_size >= len(data)
    for epoch in range(1, cfg.epochs + 1):
        if full:
            g = backward(net, X, y)
            step(net, g)
            metrics.steps += 1
        else:
            perm = rng.permutation(len(data))
            for i in range(0, len(data), cfg.batch_size):
                idx = perm[i:i + cfg.batch_size]
                step(net, backward(net, X[idx], y[idx]))
                metrics.steps += 1
        if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
            mse = evaluate_mse(net, data)
            if not np.isfinite(mse):
                raise FloatingPointError(f"training diverged at epoch {epoch}")
            metrics.add(epoch, mse)
            if log:
                log(f"epoch {epoch}: mse={mse:.4g}")
    return metrics


def inr_config(epochs=300, linear_rate=1e-3, activation_rate=1e-2, seed=0, eval_every=1):
    return TrainConfig(epochs=epochs, batch_size=FULL, rates=LearningRates(linear_rate, activation_rate),
                       optimizer="adam", seed=seed, eval_every=eval_every)


def train_inr(net, img, cfg=None, log=None):
    """Fit pixel amplitudes from pixel coordinates with full-batch Adam."""
    cfg = inr_config() if cfg is None else cfg
    if cfg.batch_size is not FULL:
        raise ValueError("image fitting uses full-batch steps (batch_size=FULL)")
    return train_regression(net, image_to_dataset(img), cfg, log)
