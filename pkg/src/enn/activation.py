"""Adaptive DCT activations and the fixed/adaptive baselines they are compared to.

A DCT activation is a truncated series of odd-frequency cosines,

    sigma(zbar) = sum_q F_q cos(pi (2q - 1) (2 zbar - 1) / (2 N)),   q = 1..Q

evaluated on the rescaled pre-activation ``zbar = N/2 (z + 1)``.  Inputs outside
``[0, N]`` are not clipped; the series is simply evaluated (it is periodic with
period ``2N``).

All evaluation functions broadcast: a single neuron carries ``coeffs`` of shape
``(Q,)``, a layer of ``M`` neurons carries ``(M, Q)`` and is evaluated on
``zbar`` of shape ``(..., M)``.
"""

from dataclasses import dataclass, field

import numpy as np


def scale_input(z, N):
    """Map the normalized range [-1, 1] onto the DCT sample domain [0, N]."""
    return 0.5 * N * (np.asarray(z, dtype=np.float64) + 1.0)


def odd_frequencies(Q):
    return 2.0 * np.arange(1, Q + 1) - 1.0


def harmonics(zbar, Q, N, with_sin=True):
    """Cosines (and sines) of the Q odd harmonics, stacked on a leading axis.

    Returns arrays of shape ``(Q,) + zbar.shape``; plane ``q`` holds
    ``cos((2q + 1) phi)`` with ``phi = pi (2 zbar - 1) / (2N)``.  Only one
    cos/sin pair is evaluated; the rest follow from the Chebyshev recurrence
    ``c_{k+2} = 2 cos(2 phi) c_k - c_{k-2}``.
    """
    zbar = np.asarray(zbar, dtype=np.float64)
    phi = (np.pi / (2.0 * N)) * (2.0 * zbar - 1.0)
    c = np.empty((Q,) + zbar.shape)
    c[0] = np.cos(phi)
    s = None
    if with_sin:
        s = np.empty((Q,) + zbar.shape)
        s[0] = np.sin(phi)
    if Q > 1:
        two_c2 = 2.0 * (2.0 * c[0] * c[0] - 1.0)
        c[1] = two_c2 * c[0] - c[0]
        if with_sin:
            s[1] = two_c2 * s[0] + s[0]
        for q in range(2, Q):
            c[q] = two_c2 * c[q - 1] - c[q - 2]
            if with_sin:
                s[q] = two_c2 * s[q - 1] - s[q - 2]
    return c, s


@dataclass
class DctActivation:
    coeffs: np.ndarray
    resolution: int = 512
    mask: np.ndarray = None

    # consumed by the network: DCT activations see the rescaled input
    scaled = True

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.ndim == 0 or self.coeffs.shape[-1] < 1:
            raise ValueError("a DCT activation needs at least one coefficient")
        if int(self.resolution) < 2:
            raise ValueError(f"resolution N must be >= 2, got {self.resolution}")
        self.resolution = int(self.resolution)
        if self.mask is None:
            self.mask = np.ones(self.coeffs.shape, dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.coeffs.shape:
                raise ValueError(f"mask shape {self.mask.shape} != coeffs shape {self.coeffs.shape}")
        self.coeffs[~self.mask] = 0.0

    @property
    def Q(self):
        return self.coeffs.shape[-1]

    @property
    def n_params(self):
        return self.coeffs.size

    def neuron(self, m):
        """Single-neuron view; shares storage with the layer."""
        return DctActivation(self.coeffs[m], self.resolution, self.mask[m])

    def value(self, zbar):
        return dct_eval(self, zbar)

    def grad(self, zbar):
        return dct_grad_input(self, zbar)

    def coeff_basis(self, zbar):
        return dct_grad_coeffs(self, zbar)

    def input_scale(self):
        # d zbar / d z
        return 0.5 * self.resolution


def dct_eval(act, zbar):
    c, _ = harmonics(zbar, act.Q, act.resolution, with_sin=False)
    return combine_planes(c, act.coeffs)


def combine_planes(planes, coeffs):
    out = planes[0] * coeffs[..., 0]
    for q in range(1, planes.shape[0]):
        out += planes[q] * coeffs[..., q]
    return out


def dct_grad_input(act, zbar):
    """d sigma / d zbar."""
    _, s = harmonics(zbar, act.Q, act.resolution)
    w = (np.pi / act.resolution) * odd_frequencies(act.Q)
    return -combine_planes(s, act.coeffs * w)


def dct_grad_coeffs(act, zbar):
    """d sigma / d F: the basis cosines, zero where the coefficient is pruned."""
    c, _ = harmonics(zbar, act.Q, act.resolution, with_sin=False)
    return np.where(act.mask, np.moveaxis(c, 0, -1), 0.0)


def basis_matrix(Q, N):
    """N x Q matrix of the odd-frequency basis sampled on zbar = 1..N."""
    if Q < 1 or N < 2:
        raise ValueError(f"need Q >= 1 and N >= 2, got Q={Q}, N={N}")
    n = np.arange(N, dtype=np.float64)
    return np.cos(np.pi * np.outer(2.0 * n + 1.0, odd_frequencies(Q)) / (2.0 * N))


def project_function(f, Q, N):
    """Coefficients (2/N) B^T f of a function sampled on the N-point grid."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (N,):
        raise ValueError(f"expected {N} samples, got shape {f.shape}")
    return (2.0 / N) * (basis_matrix(Q, N).T @ f)


def sigmoid_ramp(N, steepness=3.0):
    """Unit-amplitude increasing ramp sampled on the N-point grid."""
    u = (2.0 * np.arange(N) + 1.0) / N - 1.0
    return np.tanh(steepness * u)


# -- baselines ---------------------------------------------------------------


class Baseline:
    scaled = False
    coeffs = None
    mask = None

    @property
    def n_params(self):
        return 0 if self.coeffs is None else self.coeffs.size

    def coeff_basis(self, z):
        raise TypeError(f"{type(self).__name__} has no trainable coefficients")

    def input_scale(self):
        return 1.0


class ReLU(Baseline):
    kind = "relu"

    def value(self, z):
        return np.maximum(z, 0.0)

    def grad(self, z):
        # subgradient at 0 is taken as 0
        return (np.asarray(z) > 0.0).astype(np.float64)


class Linear(Baseline):
    kind = "linear"

    def value(self, z):
        return np.asarray(z, dtype=np.float64).copy()

    def grad(self, z):
        return np.ones_like(z, dtype=np.float64)


class Sigmoid(Baseline):
    """Logistic sigmoid stretched onto (-1, 1) so it can reach both class labels."""

    kind = "sigmoid"

    def value(self, z):
        return 2.0 / (1.0 + np.exp(-np.asarray(z, dtype=np.float64))) - 1.0

    def grad(self, z):
        p = 1.0 / (1.0 + np.exp(-np.asarray(z, dtype=np.float64)))
        return 2.0 * p * (1.0 - p)


@dataclass
class Sine(Baseline):
    omega: float = 30.0
    kind = "sine"

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    def value(self, z):
        return np.sin(self.omega * np.asarray(z, dtype=np.float64))

    def grad(self, z):
        return self.omega * np.cos(self.omega * np.asarray(z, dtype=np.float64))


@dataclass
class FourierSeries(Baseline):
    """sum_q a_q cos(2 pi q z / T) + b_q sin(2 pi q z / T), trainable a and b.

    ``coeffs`` stores ``[a_1..a_Q, b_1..b_Q]`` along the last axis.
    """

    coeffs: np.ndarray = None
    period: float = 2.0
    kind = "fourier"

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.ndim == 0 or self.coeffs.shape[-1] % 2 or self.coeffs.shape[-1] == 0:
            raise ValueError("Fourier coefficients need equal-length cosine and sine halves")
        if not self.period > 0:
            raise ValueError("period must be positive")

    @classmethod
    def from_ab(cls, a, b, period=2.0):
        a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise ValueError(f"cosine/sine coefficient shapes differ: {a.shape} vs {b.shape}")
        return cls(np.concatenate([a, b], axis=-1), period)

    @property
    def Q(self):
        return self.coeffs.shape[-1] // 2

    def _angles(self, z):
        q = np.arange(1, self.Q + 1, dtype=np.float64)
        return (2.0 * np.pi / self.period) * np.asarray(z, dtype=np.float64)[..., None] * q

    def value(self, z):
        th = self._angles(z)
        a, b = self.coeffs[..., : self.Q], self.coeffs[..., self.Q:]
        return np.sum(a * np.cos(th) + b * np.sin(th), axis=-1)

    def grad(self, z):
        th = self._angles(z)
        w = (2.0 * np.pi / self.period) * np.arange(1, self.Q + 1, dtype=np.float64)
        a, b = self.coeffs[..., : self.Q], self.coeffs[..., self.Q:]
        return np.sum(w * (b * np.cos(th) - a * np.sin(th)), axis=-1)

    def coeff_basis(self, z):
        th = self._angles(z)
        return np.concatenate([np.cos(th), np.sin(th)], axis=-1)


def baseline_eval(act, z):
    return act.value(z)


def baseline_grad(act, z):
    return act.grad(z)
