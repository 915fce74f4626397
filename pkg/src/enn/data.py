"""Datasets: synthetic 2-D classification maps, images as coordinate datasets, PGM I/O.

The five classification maps are stand-ins with configurable geometry:

    P1  annulus, +1 for r_in <= r <= r_out
    P2  sinusoidal half-plane, +1 above x2 = amp sin(2 pi freq x1)
    P3  two-arm Archimedean spiral
    P4  four-quadrant XOR, +1 where x1 x2 >= 0
    P5  3 x 3 checkerboard

Random streams come from numpy's PCG64 generator seeded with the given integer.
"""

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.inputs.ndim != 2 or self.targets.shape != (self.inputs.shape[0],):
            raise ValueError(f"inputs {self.inputs.shape} and targets {self.targets.shape} do not pair up")

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def input_dim(self):
        return self.inputs.shape[1]


def _ring(X, r_in=0.35, r_out=0.75):
    r = np.hypot(X[:, 0], X[:, 1])
    return np.where((r >= r_in) & (r <= r_out), 1.0, -1.0)


def _wave(X, amplitude=0.4, frequency=1.0):
    return np.where(X[:, 1] > amplitude * np.sin(2 * np.pi * frequency * X[:, 0]), 1.0, -1.0)


def _spiral(X, pitch=1.0):
    # two interleaved arms: sign of sin(theta - 2 pi r / pitch)
    r = np.hypot(X[:, 0], X[:, 1])
    th = np.arctan2(X[:, 1], X[:, 0])
    return np.where(np.sin(th - 2 * np.pi * r / pitch) >= 0, 1.0, -1.0)


def _xor(X):
    return np.where(X[:, 0] * X[:, 1] >= 0, 1.0, -1.0)


def _checker(X, cells=3):
    idx = np.clip(np.floor((X + 1.0) * cells / 2.0), 0, cells - 1).astype(int)
    return np.where((idx[:, 0] + idx[:, 1]) % 2 == 0, 1.0, -1.0)


_LABELS = {"P1": _ring, "P2": _wave, "P3": _spiral, "P4": _xor, "P5": _checker}


@dataclass
class ProblemSpec:
    id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in _LABELS:
            raise ValueError(f"unknown problem {self.id!r}; expected one of {sorted(_LABELS)}")

    def labels(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return _LABELS[self.id](X, **self.params)


def problem(pid, **params):
    return ProblemSpec(pid, params)


def ring_positive_fraction(r_in=0.35, r_out=0.75):
    """Area share of the square [-1, 1]^2 covered by an annulus that fits inside it."""
    return np.pi * (r_out ** 2 - r_in ** 2) / 4.0


def uniform_inputs(n, dim=2, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(n, dim))


def generate_problem(spec, n, seed=0):
    if n < 1:
        raise ValueError("need at least one sample")
    X = uniform_inputs(n, 2, seed)
    return Dataset(X, spec.labels(X))


def train_test_split(spec, n_train, n_test, seed=0):
    """Independent training and held-out samples; streams 2*seed+1 and 2*seed+2."""
    return generate_problem(spec, n_train, 2 * seed + 1), generate_problem(spec, n_test, 2 * seed + 2)


def save_csv(data, path):
    """Write ``x1,...,xM,y`` rows with round-trippable float formatting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(data.input_dim)] + ["y"])
        for x, y in zip(data.inputs, data.targets):
            w.writerow([f"{v:.17g}" for v in x] + [f"{y:.17g}"])


def load_csv(path):
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Dataset(arr[:, :-1], arr[:, -1])


# -- images ------------------------------------------------------------------


@dataclass
class ImageGrid:
    pixels: np.ndarray  # (height, width), amplitudes in [-1, 1]

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError(f"image must be a non-empty 2-D array, got {self.pixels.shape}")

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def pixel_coords(height, width):
    """Pixel-centre coordinates, row-major, as (x1 = column, x2 = row) in [-1, 1]."""
    cx = (2.0 * np.arange(width) + 1.0) / width - 1.0
    cy = (2.0 * np.arange(height) + 1.0) / height - 1.0
    x1, x2 = np.meshgrid(cx, cy)
    return np.column_stack([x1.ravel(), x2.ravel()])


def image_to_dataset(img):
    return Dataset(pixel_coords(img.height, img.width), img.pixels.ravel().copy())


def dataset_to_image(values, height, width):
    values = np.asarray(values, dtype=np.float64)
    if values.size != height * width:
        raise ValueError(f"{values.size} values cannot fill a {height}x{width} image")
    return ImageGrid(values.reshape(height, width).copy())


class PGMError(ValueError):
    pass


def _pgm_tokens(buf, count, pos):
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    out = []
    n = len(buf)
    while len(out) < count:
        while pos < n and (buf[pos:pos + 1].isspace() or buf[pos:pos + 1] == b"#"):
            if buf[pos:pos + 1] == b"#":
                while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PGMError(f"truncated header at byte offset {start}")
        tok = buf[start:pos]
        if not tok.isdigit():
            raise PGMError(f"malformed header token {tok!r} at byte offset {start}")
        out.append(int(tok))
    return out, pos


def parse_pgm(buf):
    if len(buf) < 2 or buf[:2] not in (b"P2", b"P5"):
        raise PGMError(f"bad magic {buf[:2]!r} at byte offset 0; expected P2 or P5")
    binary = buf[:2] == b"P5"
    (width, height, maxval), pos = _pgm_tokens(buf, 3, 2)
    if width < 1 or height < 1:
        raise PGMError(f"image dimensions {width}x{height} invalid (header ends at byte offset {pos})")
    if maxval != 255:
        raise PGMError(f"maxval {maxval} unsupported at byte offset {pos}; only 255 is handled")
    n = width * height
    if binary:
        if pos >= len(buf) or not buf[pos:pos + 1].isspace():
            raise PGMError(f"missing whitespace after header at byte offset {pos}")
        pos += 1
        if len(buf) - pos < n:
            raise PGMError(f"truncated payload at byte offset {len(buf)}: expected {n} bytes from offset {pos}")
        raw = np.frombuffer(buf, dtype=np.uint8, count=n, offset=pos)
    else:
        vals, _ = _pgm_tokens(buf, n, pos) if n else ([], pos)
        raw = np.asarray(vals)
        bad = np.nonzero(raw > 255)[0]
        if bad.size:
            raise PGMError(f"sample {raw[bad[0]]} exceeds maxval (sample index {bad[0]})")
    pixels = raw.reshape(height, width).astype(np.float64) * (2.0 / 255.0) - 1.0
    return ImageGrid(pixels), binary


def load_pgm(path):
    with open(path, "rb") as fh:
        img, _ = parse_pgm(fh.read())
    return img


def to_bytes(img):
    """Quantize [-1, 1] amplitudes to 0..255 with round-half-up."""
    q = np.floor((np.clip(img.pixels, -1.0, 1.0) + 1.0) * 127.5 + 0.5)
    return np.clip(q, 0, 255).astype(np.uint8)


def encode_pgm(img, binary=True):
    q = to_bytes(img)
    head = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n255\n".encode()
    if binary:
        return head + q.tobytes()
    rows = "\n".join(" ".join(str(v) for v in row) for row in q)
    return head + rows.encode() + b"\n"


def save_pgm(img, path, binary=True):
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img, binary))
