"""The expressive network: an MLP whose neurons carry trainable DCT activations.

Each layer computes ``z = s_prev @ W + b`` and then applies its activation.
DCT layers first rescale ``z`` onto ``[0, N]``; baseline layers (ReLU, Fourier,
sine, ...) act on ``z`` directly.  The model has a scalar output and is trained
on the squared error ``(y - yhat)^2``.

Layers are indexed from 0 (first hidden layer) to ``len(net.layers) - 1``
(output layer).
"""

import copy
from dataclasses import dataclass

import numpy as np

from . import activation as A
from .linalg import ShapeError, as_matrix, matmul

# rows per block in forward/backward; fixes the reduction order so results are
# bitwise reproducible whether or not a cached forward pass is reused
CHUNK = 8192

ACTIVATIONS = ("dct", "relu", "fourier", "sine", "linear", "sigmoid")


class ConfigError(ValueError):
    pass


@dataclass
class LayerSpec:
    width: int
    activation: str = "dct"
    Q: int = 6
    N: int = 512
    omega: float = 30.0
    period: float = 2.0


@dataclass
class Layer:
    W: np.ndarray
    b: np.ndarray
    act: object
    spec: LayerSpec

    @property
    def width(self):
        return self.W.shape[1]

    @property
    def fan_in(self):
        return self.W.shape[0]


@dataclass
class Gradients:
    dW: list
    db: list
    dF: list  # None for layers without trainable activation coefficients
    loss: float = float("nan")

    def arrays(self):
        out = []
        for dW, db, dF in zip(self.dW, self.db, self.dF):
            out += [dW, db] + ([] if dF is None else [dF])
        return out


class Network:
    def __init__(self, input_dim, layers, seed=None):
        self.input_dim = int(input_dim)
        self.layers = list(layers)
        self.seed = seed
        self.cache = None
        fan_in = self.input_dim
        for i, layer in enumerate(self.layers):
            if layer.W.shape[0] != fan_in:
                raise ShapeError(f"layer {i}: W has {layer.W.shape[0]} rows, expected {fan_in}")
            if layer.b.shape != (layer.width,):
                raise ShapeError(f"layer {i}: bias shape {layer.b.shape}")
            fan_in = layer.width

    @property
    def specs(self):
        return [layer.spec for layer in self.layers]

    @property
    def output_dim(self):
        return self.layers[-1].width

    def copy(self):
        return copy.deepcopy(self)

    def __repr__(self):
        dims = "-".join(str(d) for d in [self.input_dim] + [l.width for l in self.layers])
        kinds = ",".join(l.spec.activation for l in self.layers)
        return f"Network({dims}, {kinds}, params={param_count(self)})"


def _make_activation(spec, rng):
    kind = spec.activation
    M = spec.width
    if kind == "dct":
        base = A.project_function(A.sigmoid_ramp(spec.N), spec.Q, spec.N)
        coeffs = base + rng.uniform(-0.01, 0.01, size=(M, spec.Q))
        return A.DctActivation(coeffs, spec.N)
    if kind == "fourier":
        # least-squares fit of the same ramp on the normalized input range
        z = np.linspace(-1.0, 1.0, 257)
        proto = A.FourierSeries(np.zeros(2 * spec.Q), spec.period)
        basis = proto.coeff_basis(z)
        fit = np.linalg.lstsq(basis, np.tanh(3.0 * z), rcond=None)[0]
        coeffs = fit + rng.uniform(-0.01, 0.01, size=(M, 2 * spec.Q))
        return A.FourierSeries(coeffs, spec.period)
    if kind == "sine":
        return A.Sine(spec.omega)
    if kind == "relu":
        return A.ReLU()
    if kind == "linear":
        return A.Linear()
    if kind == "sigmoid":
        return A.Sigmoid()
    raise ConfigError(f"unknown activation {kind!r}; expected one of {ACTIVATIONS}")


def init_network(spec, input_dim, seed=0, dct_bias=0.0):
    """Build a network from a list of LayerSpec, deterministically from ``seed``.

    Weights are Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) and biases zero.  DCT
    activations start as the projection of a sigmoid-like ramp plus small
    noise.  Sine layers use the usual SIREN initialization instead, since the
    fan-in rule saturates sin(30 z).

    ``dct_bias`` sets the initial bias of hidden DCT layers.  Every odd-frequency
    basis function is antisymmetric about z = 0 and symmetric about z = +-1, so
    a neuron centred on z = 0 can only form odd responses; starting at
    ``dct_bias=1`` lets it build symmetric (e.g. two-peaked) bumps.  The task
    harnesses use 1.0.
    """
    if not spec:
        raise ConfigError("network spec is empty")
    if input_dim < 1:
        raise ConfigError(f"input_dim must be >= 1, got {input_dim}")
    rng = np.random.default_rng(seed)
    layers = []
    fan_in = input_dim
    for i, ls in enumerate(spec):
        if ls.width < 1:
            raise ConfigError(f"layer {i} has width {ls.width}")
        if ls.activation == "dct" and (ls.Q < 1 or ls.N < 2):
            raise ConfigError(f"layer {i}: need Q >= 1 and N >= 2")
        if ls.activation == "sine":
            bound = 1.0 / fan_in if i == 0 else np.sqrt(6.0 / fan_in) / ls.omega
        else:
            bound = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-bound, bound, size=(fan_in, ls.width))
        b = np.zeros(ls.width)
        if ls.activation == "dct" and i < len(spec) - 1:
            b[:] = dct_bias
        layers.append(Layer(W, b, _make_activation(ls, rng), copy.copy(ls)))
        fan_in = ls.width
    return Network(input_dim, layers, seed)


# -- architecture helpers ----------------------------------------------------


def enn_spec(hidden, Q=6, N=512):
    return [LayerSpec(w, "dct", Q, N) for w in hidden] + [LayerSpec(1, "dct", Q, N)]


def baseline_spec(kind, hidden, output="linear", Q=6, omega=30.0, period=2.0):
    """Hidden layers of a fixed/Fourier/sine activation with a fixed output activation."""
    hid = [LayerSpec(w, kind, Q=Q, omega=omega, period=period) for w in hidden]
    return hid + [LayerSpec(1, output)]


def spec_param_count(spec, input_dim):
    total, fan_in = 0, input_dim
    for ls in spec:
        per = fan_in + 1
        if ls.activation == "dct":
            per += ls.Q
        elif ls.activation == "fourier":
            per += 2 * ls.Q
        total += ls.width * per
        fan_in = ls.width
    return total


def param_count(net):
    """Trainable scalars: weights, biases and activation coefficients (pruned ones included)."""
    total = 0
    for layer in net.layers:
        total += layer.W.size + layer.b.size + layer.act.n_params
    return total


def active_param_count(net):
    pruned = sum(int(np.count_nonzero(~l.act.mask)) for l in net.layers if l.act.mask is not None)
    return param_count(net) - pruned


def kolmogorov_width(input_dim):
    """Hidden width 2 M0 + 1 from the Kolmogorov-Arnold representation."""
    if input_dim < 1:
        raise ValueError("input_dim must be >= 1")
    return 2 * input_dim + 1


# -- forward / backward ------------------------------------------------------


def _layer_forward(layer, s_prev):
    z = matmul(s_prev, layer.W) + layer.b
    u = A.scale_input(z, layer.act.resolution) if layer.act.scaled else z
    return u, layer.act.value(u)


def _forward_chunk(net, X):
    us, ss = [], [X]
    s = X
    for layer in net.layers:
        u, s = _layer_forward(layer, s)
        us.append(u)
        ss.append(s)
    return us, ss


def _check_input(net, x):
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = as_matrix(X[None, :] if single else X)
    if X.shape[1] != net.input_dim:
        raise ShapeError(f"input has {X.shape[1]} features, network expects {net.input_dim}")
    return X, single


def forward_all(net, x):
    """Per-layer activation inputs and outputs for a batch, computed blockwise."""
    X, _ = _check_input(net, x)
    parts = [_forward_chunk(net, X[i:i + CHUNK]) for i in range(0, X.shape[0], CHUNK)]
    L = len(net.layers)
    us = [np.concatenate([p[0][l] for p in parts]) for l in range(L)]
    ss = [X] + [np.concatenate([p[1][l + 1] for p in parts]) for l in range(L)]
    return us, ss


def forward(net, x, cache=True):
    """Network output for one sample (returns float) or a batch (returns 1-D array)."""
    X, single = _check_input(net, x)
    us, ss = forward_all(net, X)
    if cache:
        net.cache = {"x": X.copy(), "u": us, "s": ss}
    out = ss[-1][:, 0]
    return float(out[0]) if single else out


def _backward_chunk(net, us, ss, y, g):
    L = len(net.layers)
    ds = (-2.0 * (y - ss[-1][:, 0]))[:, None]
    for l in range(L - 1, -1, -1):
        layer, u = net.layers[l], us[l]
        act = layer.act
        if isinstance(act, A.DctActivation):
            c, sn = A.harmonics(u, act.Q, act.resolution)
            dF = (c * ds).sum(axis=1).T
            g.dF[l] += np.where(act.mask, dF, 0.0)
            w = (-np.pi / act.resolution) * A.odd_frequencies(act.Q) * act.coeffs
            dz = ds * A.combine_planes(sn, w) * act.input_scale()
        else:
            if act.coeffs is not None:
                g.dF[l] += np.einsum("bm,bmq->mq", ds, act.coeff_basis(u))
            dz = ds * act.grad(u)
        g.dW[l] += matmul(ss[l].T, dz)
        g.db[l] += dz.sum(axis=0)
        if l:
            ds = dz @ layer.W.T


def zero_gradients(net):
    return Gradients(
        dW=[np.zeros_like(l.W) for l in net.layers],
        db=[np.zeros_like(l.b) for l in net.layers],
        dF=[None if l.act.coeffs is None else np.zeros_like(l.act.coeffs) for l in net.layers],
    )


def backward(net, x, y):
    """Exact gradients of the mean squared error over the batch ``(x, y)``.

    For a single sample this is the gradient of ``(y - yhat)^2``.  A cached
    forward pass on the same inputs is reused; otherwise it is recomputed.
    """
    X, _ = _check_input(net, x)
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if y.shape != (X.shape[0],):
        raise ShapeError(f"{X.shape[0]} inputs but targets of shape {y.shape}")
    c = net.cache
    fresh = c is not None and c["x"].shape == X.shape and np.array_equal(c["x"], X)
    g = zero_gradients(net)
    sq = 0.0
    for i in range(0, X.shape[0], CHUNK):
        sl = slice(i, i + CHUNK)
        if fresh:
            us = [u[sl] for u in c["u"]]
            ss = [s[sl] for s in c["s"]]
        else:
            us, ss = _forward_chunk(net, X[sl])
        r = y[sl] - ss[-1][:, 0]
        sq += float(r @ r)
        _backward_chunk(net, us, ss, y[sl], g)
    n = X.shape[0]
    for arrs in (g.dW, g.db, g.dF):
        for a in arrs:
            if a is not None:
                a /= n
    g.loss = sq / n
    return g


def _param_arrays(net):
    out = []
    for layer in net.layers:
        out += [layer.W, layer.b] + ([] if layer.act.coeffs is None else [layer.act.coeffs])
    return out


def gradient_check(net, x, y, h=1e-5, floor=1e-5):
    """Largest relative gap between ``backward`` and central differences of the loss.

    The gap for each parameter is ``|g - fd| / max(|g|, |fd|, floor)``.  The
    floor keeps near-zero gradients from dividing rounding noise: with
    ``h = 1e-5`` a central difference only resolves about 1e-10 absolute.
    Masked coefficients are skipped.
    """
    g = backward(net, x, y).arrays()
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))

    def loss():
        r = y - np.atleast_1d(forward(net, x, cache=False))
        return float(np.mean(r * r))

    masks = []
    for layer in net.layers:
        masks += [None, None] + ([] if layer.act.coeffs is None else [layer.act.mask])
    worst = 0.0
    for p, gp, mask in zip(_param_arrays(net), g, masks):
        flat, gflat = p.reshape(-1), gp.reshape(-1)
        for i in range(flat.size):
            if mask is not None and not mask.reshape(-1)[i]:
                continue
            old = flat[i]
            flat[i] = old + h
            up = loss()
            flat[i] = old - h
            down = loss()
            flat[i] = old
            fd = (up - down) / (2.0 * h)
            worst = max(worst, abs(gflat[i] - fd) / max(abs(gflat[i]), abs(fd), floor))
    net.cache = None
    return worst


# -- interpretation ----------------------------------------------------------


def predict_class(net, x):
    """Sign of the output, with 0 mapped to +1."""
    out = forward(net, x, cache=False)
    if np.ndim(out) == 0:
        return 1 if out >= 0 else -1
    return np.where(out >= 0, 1, -1)


def grid_coords(grid):
    """Pixel-centre coordinates of a ``grid``-point lattice over [-1, 1]."""
    return (2.0 * np.arange(grid) + 1.0) / grid - 1.0


def grid_points(grid):
    """Row-major (x1 = column, x2 = row) lattice points over the unit square."""
    c = grid_coords(grid)
    x1, x2 = np.meshgrid(c, c)
    return np.column_stack([x1.ravel(), x2.ravel()])


def bump_raster(net, layer, neuron, grid=64):
    """Response of one neuron over the 2-D input square, as a grid x grid matrix."""
    if net.input_dim != 2:
        raise ValueError("bumps are defined for 2-D inputs")
    if not 0 <= layer < len(net.layers):
        raise IndexError(f"layer {layer} out of range")
    if not 0 <= neuron < net.layers[layer].width:
        raise IndexError(f"neuron {neuron} out of range for layer {layer}")
    _, ss = forward_all(net, grid_points(grid))
    return ss[layer + 1][:, neuron].reshape(grid, grid)


def decision_map(net, grid=128):
    if net.input_dim != 2:
        raise ValueError("decision maps are defined for 2-D inputs")
    return predict_class(net, grid_points(grid)).reshape(grid, grid)


def activation_curve(net, layer, neuron, n=512, z_range=(-1.0, 1.0)):
    """Sample a neuron's activation against its pre-activation z; returns (z, sigma)."""
    act = net.layers[layer].act
    z = np.linspace(z_range[0], z_range[1], n)
    if isinstance(act, A.DctActivation):
        one = act.neuron(neuron)
        return z, one.value(A.scale_input(z, one.resolution))
    if act.coeffs is not None:
        return z, A.FourierSeries(act.coeffs[neuron], act.period).value(z)
    return z, act.value(z)
