"""SGD and Adam with separate step sizes for linear parameters and activation coefficients.

Pruned DCT coefficients (mask False) are never touched by either optimizer.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import ShapeError


@dataclass
class LearningRates:
    linear: float = 1e-3
    activation: float = 1e-3

    def __post_init__(self):
        if not (self.linear > 0 and self.activation > 0):
            raise ValueError(f"learning rates must be positive, got {self}")


def _groups(net, grads):
    """Yield (param, grad, is_activation, mask) for every trainable array."""
    if len(grads.dW) != len(net.layers):
        raise ShapeError(f"gradients for {len(grads.dW)} layers, network has {len(net.layers)}")
    for layer, dW, db, dF in zip(net.layers, grads.dW, grads.db, grads.dF):
        yield layer.W, dW, False, None
        yield layer.b, db, False, None
        coeffs = layer.act.coeffs
        if (coeffs is None) != (dF is None):
            raise ShapeError("activation coefficient gradients do not match the network")
        if coeffs is not None:
            yield coeffs, dF, True, layer.act.mask


def _check(p, g):
    if p.shape != g.shape:
        raise ShapeError(f"parameter {p.shape} vs gradient {g.shape}")


def sgd_step(net, grads, rates):
    for p, g, is_act, mask in _groups(net, grads):
        _check(p, g)
        lr = rates.activation if is_act else rates.linear
        if mask is None:
            p -= lr * g
        else:
            p -= lr * np.where(mask, g, 0.0)


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(net, grads, rates, state):
    """One bias-corrected Adam update; moments are created lazily on the first call."""
    groups = list(_groups(net, grads))
    if not state.m:
        state.m = [np.zeros_like(p) for p, *_ in groups]
        state.v = [np.zeros_like(p) for p, *_ in groups]
    if len(state.m) != len(groups):
        raise ShapeError("Adam state does not match the network")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for (p, g, is_act, mask), m, v in zip(groups, state.m, state.v):
        _check(p, g)
        if m.shape != p.shape:
            raise ShapeError(f"Adam moment {m.shape} vs parameter {p.shape}")
        if mask is not None:
            g = np.where(mask, g, 0.0)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        lr = rates.activation if is_act else rates.linear
        step = (lr / bc1) * m / (np.sqrt(v / bc2) + state.eps)
        if mask is not None:
            step = np.where(mask, step, 0.0)
        p -= step
