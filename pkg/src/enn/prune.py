"""Coefficient pruning and redundancy analysis for DCT activations.

A coefficient is pruned when its energy ``F^2`` is at most a threshold ``rho``:
it is zeroed and masked so optimizers never revive it.  Because the cosine
basis is orthogonal on the N-point grid, removing ``F_q`` changes an
activation's mean squared reconstruction by exactly ``F_q^2 / 2``.

Redundant neurons are detected pairwise inside a layer from the cosine
distance of their coefficient vectors and the angle between their incoming
weight vectors.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .activation import DctActivation
from .network import Layer, LayerSpec, Network


@dataclass
class PruneReport:
    threshold: float
    total_coeffs: int
    pruned: int
    per_layer_per_q: np.ndarray  # (n_dct_layers, Q) counts of masked coefficients
    layers: list  # network layer index for each row of per_layer_per_q
    mse_before: float = None
    mse_after: float = None

    @property
    def fraction(self):
        return self.pruned / self.total_coeffs if self.total_coeffs else 0.0

    @property
    def mse_factor(self):
        if self.mse_before is None or self.mse_after is None:
            return None
        return self.mse_after / self.mse_before

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "total_coeffs", "pruned", "fraction", "mse_before", "mse_after"])
            fmt = lambda v: "" if v is None else f"{v:.17g}"
            w.writerow([f"{self.threshold:.17g}", self.total_coeffs, self.pruned,
                        f"{self.fraction:.17g}", fmt(self.mse_before), fmt(self.mse_after)])


def dct_layers(net):
    return [(i, l) for i, l in enumerate(net.layers) if isinstance(l.act, DctActivation)]


def _energies(net):
    return np.concatenate([l.act.coeffs.ravel() ** 2 for _, l in dct_layers(net)])


def _mask_counts(net):
    rows = [np.count_nonzero(~l.act.mask, axis=0) for _, l in dct_layers(net)]
    Q = max((l.act.Q for _, l in dct_layers(net)), default=0)
    out = np.zeros((len(rows), Q), dtype=int)
    for r, c in enumerate(rows):
        out[r, : c.size] = c
    return out


def prune_coefficients(net, rho, data=None):
    """Mask every DCT coefficient with ``F^2 <= rho`` (in place).

    With ``data`` the report carries the dataset MSE before and after.
    """
    from .train import evaluate_mse

    if not rho >= 0:
        raise ValueError(f"threshold must be non-negative, got {rho}")
    layers = dct_layers(net)
    if not layers:
        raise ValueError("network has no DCT activations to prune")
    before = evaluate_mse(net, data) if data is not None else None
    for _, layer in layers:
        act = layer.act
        hit = act.coeffs ** 2 <= rho
        act.mask &= ~hit
        act.coeffs[~act.mask] = 0.0
    counts = _mask_counts(net)
    total = sum(l.act.coeffs.size for _, l in layers)
    after = evaluate_mse(net, data) if data is not None else None
    return PruneReport(float(rho), total, int(counts.sum()), counts, [i for i, _ in layers], before, after)


def threshold_for_fraction(net, fraction):
    """Smallest energy in the network such that pruning at it removes >= ``fraction``.

    The target count is ``ceil(fraction * T - 1e-9)`` for ``T`` coefficients;
    the slack absorbs float error such as ``0.3 * 10 = 3.0000000000000004``.
    A count of zero gives 0.0, which only catches coefficients that are
    already exactly zero.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    e = np.sort(_energies(net))
    k = max(0, math.ceil(fraction * e.size - 1e-9))
    if k == 0:
        return 0.0
    return float(e[k - 1])


def pruned_distribution(report):
    """Histogram keyed by (layer index, odd frequency 2q - 1)."""
    hist = {}
    for row, layer in zip(report.per_layer_per_q, report.layers):
        for q, count in enumerate(row, start=1):
            hist[(layer, 2 * q - 1)] = int(count)
    return hist


def distribution_csv(report, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["layer", "frequency", "pruned"])
        for (layer, freq), count in sorted(pruned_distribution(report).items()):
            w.writerow([layer, freq, count])


def mask_report(net):
    """PruneReport describing the masks already present in ``net``."""
    layers = dct_layers(net)
    counts = _mask_counts(net)
    total = sum(l.act.coeffs.size for _, l in layers)
    return PruneReport(float("nan"), total, int(counts.sum()), counts, [i for i, _ in layers])


# -- redundancy ---------------------------------------------------------------


class UndefinedDistanceError(ValueError):
    pass


def _cosine(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise UndefinedDistanceError("cosine similarity of a zero vector is undefined")
    return float(a @ b) / (na * nb)


def coeff_distance(f1, f2):
    """Cosine distance 1 - cos(f1, f2), in [0, 2]."""
    return float(np.clip(1.0 - _cosine(f1, f2), 0.0, 2.0))


def bump_angle(w1, w2):
    """Angle between two incoming weight vectors, in [0, pi]."""
    return float(np.arccos(np.clip(_cosine(w1, w2), -1.0, 1.0)))


@dataclass
class RedundancyReport:
    pairs: list = field(default_factory=list)  # (layer, m, m2, distance, angle)
    dist_tol: float = 0.05
    angle_tol: float = math.radians(10.0)

    def __len__(self):
        return len(self.pairs)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["layer", "m", "m2", "distance", "angle"])
            for layer, m, m2, d, a in self.pairs:
                w.writerow([layer, m, m2, f"{d:.17g}", f"{a:.17g}"])


def _pair_stats(layer, m, m2):
    return coeff_distance(layer.act.coeffs[m], layer.act.coeffs[m2]), bump_angle(layer.W[:, m], layer.W[:, m2])


def detect_redundant_bumps(net, dist_tol=0.05, angle_tol=math.radians(10.0)):
    """All same-layer neuron pairs whose activations and orientations both nearly match."""
    if not (dist_tol > 0 and angle_tol > 0):
        raise ValueError("tolerances must be positive")
    report = RedundancyReport(dist_tol=dist_tol, angle_tol=angle_tol)
    for li, layer in dct_layers(net):
        F, W = layer.act.coeffs, layer.W
        fn = np.linalg.norm(F, axis=1)
        wn = np.linalg.norm(W, axis=0)
        for m in range(layer.width):
            for m2 in range(m + 1, layer.width):
                if fn[m] == 0 or fn[m2] == 0 or wn[m] == 0 or wn[m2] == 0:
                    continue
                d, a = _pair_stats(layer, m, m2)
                if d < dist_tol and a < angle_tol:
                    report.pairs.append((li, m, m2, d, a))
    return report


def merge_redundant_neurons(net, report):
    """Return a copy of ``net`` with the second neuron of each pair folded into the first.

    The kept neuron's outgoing weights absorb the removed neuron's outgoing
    weights.  This is exact when the two neurons respond identically and an
    approximation otherwise.  Pairs touching an already removed neuron are
    skipped (greedy, report order).
    """
    out = net.copy()
    removed = {}
    for li, m, m2, *_ in report.pairs:
        if li >= len(out.layers) - 1:
            raise ValueError(f"layer {li} is the output layer; its neurons cannot be merged")
        if m == m2:
            raise ValueError("a neuron cannot be merged with itself")
        gone = removed.setdefault(li, set())
        if m in gone or m2 in gone:
            continue
        d, a = _pair_stats(out.layers[li], m, m2)
        if not (d < report.dist_tol and a < report.angle_tol):
            raise ValueError(f"neurons {m} and {m2} of layer {li} are not redundant "
                             f"(distance {d:.3g}, angle {a:.3g} rad)")
        nxt = out.layers[li + 1]
        nxt.W[m] += nxt.W[m2]
        gone.add(m2)
    for li in sorted(removed):
        keep = np.array([i for i in range(out.layers[li].width) if i not in removed[li]])
        _shrink(out, li, keep)
    out.cache = None
    return out


def _shrink(net, li, keep):
    layer, nxt = net.layers[li], net.layers[li + 1]
    act = layer.act
    new_act = DctActivation(act.coeffs[keep].copy(), act.resolution, act.mask[keep].copy())
    spec = LayerSpec(len(keep), layer.spec.activation, layer.spec.Q, layer.spec.N,
                     layer.spec.omega, layer.spec.period)
    net.layers[li] = Layer(layer.W[:, keep].copy(), layer.b[keep].copy(), new_act, spec)
    net.layers[li + 1] = Layer(nxt.W[keep].copy(), nxt.b, nxt.act, nxt.spec)


def layer_angles(net, layer):
    W = net.layers[layer].W
    M = W.shape[1]
    return np.array([bump_angle(W[:, i], W[:, j]) for i in range(M) for j in range(i + 1, M)])


def layer_angle_distribution(net, layer, bins=36):
    """Histogram (counts, edges) of pairwise bump angles over [0, pi]."""
    if not 0 <= layer < len(net.layers):
        raise IndexError(f"layer {layer} out of range")
    return np.histogram(layer_angles(net, layer), bins=bins, range=(0.0, np.pi))
