"""Binary model files.

Layout (all integers and floats little-endian):

    offset  size  field
    0       4     magic b"ENN1"
    4       2     format version (uint16, currently 1)
    6       2     flags (uint16; bit 0 = seed present)
    8       4     input_dim (uint32)
    12      4     number of layers L (uint32)
    16      8     seed (int64, 0 when absent)
    24      8     param_count (uint64)
    32      40*L  layer records:
                    width uint32, kind uint32 (index into ACTIVATIONS),
                    Q uint32, N uint32, omega float64, period float64,
                    n_coeffs uint64 (activation coefficients in this layer)
    ...     ...   parameters, layer by layer: W (fan_in x width, row-major),
                  b (width), coefficients (n_coeffs), all float64
    ...     ...   mask block: for every layer with a mask, ceil(n_coeffs / 8)
                  bytes of little-endian bit-packed flags (1 = active)
    end-4   4     CRC-32 (uint32) of every byte before it

Every payload size follows from the header, so ``inspect_model`` reads only
the header.  Parameters come before masks: pruning with a zero threshold
changes nothing but the mask block and the trailer.
"""

import os
import struct
import tempfile
import zlib
from dataclasses import dataclass

import numpy as np

from . import activation as A
from .network import ACTIVATIONS, Layer, LayerSpec, Network, param_count

MAGIC = b"ENN1"
VERSION = 1

_HEAD = struct.Struct("<4sHHIIqQ")
_LAYER = struct.Struct("<IIIIddQ")
_CRC = struct.Struct("<I")


class ModelFileError(Exception):
    """Base class; ``code`` distinguishes the failure kind (also used as exit status)."""

    code = 10


class BadMagicError(ModelFileError):
    code = 11


class VersionError(ModelFileError):
    code = 12


class ChecksumError(ModelFileError):
    code = 13


class TruncatedError(ModelFileError):
    code = 14


@dataclass
class ModelHeader:
    version: int
    input_dim: int
    seed: int
    param_count: int
    specs: list
    n_coeffs: list

    def payload_size(self):
        n, fan_in = 0, self.input_dim
        for ls, nc in zip(self.specs, self.n_coeffs):
            n += 8 * (fan_in * ls.width + ls.width + nc)
            fan_in = ls.width
        return n

    def mask_size(self):
        return sum((nc + 7) // 8 for ls, nc in zip(self.specs, self.n_coeffs) if ls.activation == "dct")


def _coeff_count(layer):
    return 0 if layer.act.coeffs is None else layer.act.coeffs.size


def encode_model(net):
    seed = net.seed
    flags = 0 if seed is None else 1
    parts = [_HEAD.pack(MAGIC, VERSION, flags, net.input_dim, len(net.layers),
                        0 if seed is None else int(seed), param_count(net))]
    for layer in net.layers:
        s = layer.spec
        parts.append(_LAYER.pack(layer.width, ACTIVATIONS.index(s.activation), s.Q, s.N,
                                 float(s.omega), float(s.period), _coeff_count(layer)))
    for layer in net.layers:
        for a in (layer.W, layer.b, layer.act.coeffs):
            if a is not None:
                parts.append(np.ascontiguousarray(a, dtype="<f8").tobytes())
    for layer in net.layers:
        if layer.act.mask is not None:
            parts.append(np.packbits(layer.act.mask.ravel(), bitorder="little").tobytes())
    body = b"".join(parts)
    return body + _CRC.pack(zlib.crc32(body))


def _parse_header(buf):
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise BadMagicError(f"not a model file (magic {bytes(buf[:4])!r})")
    if len(buf) < _HEAD.size:
        raise TruncatedError("file ends inside the header")
    _, version, flags, input_dim, n_layers, seed, count = _HEAD.unpack_from(buf, 0)
    if version != VERSION:
        raise VersionError(f"format version {version}, this reader supports {VERSION}")
    end = _HEAD.size + n_layers * _LAYER.size
    if len(buf) < end:
        raise TruncatedError("file ends inside the layer table")
    specs, n_coeffs = [], []
    for i in range(n_layers):
        width, kind, Q, N, omega, period, nc = _LAYER.unpack_from(buf, _HEAD.size + i * _LAYER.size)
        if kind >= len(ACTIVATIONS):
            raise ModelFileError(f"layer {i}: unknown activation code {kind}")
        specs.append(LayerSpec(width, ACTIVATIONS[kind], Q, N, omega, period))
        n_coeffs.append(nc)
    header = ModelHeader(version, input_dim, seed if flags & 1 else None, count, specs, n_coeffs)
    return header, end


def inspect_model(path):
    """Read just the header (magic, version, architecture, param_count)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEAD.size)
        if len(head) >= _HEAD.size and head[:4] == MAGIC:
            n_layers = _HEAD.unpack(head)[4]
            head += fh.read(n_layers * _LAYER.size)
    return _parse_header(head)[0]


def _activation(spec, coeffs, mask):
    kind = spec.activation
    if kind == "dct":
        return A.DctActivation(coeffs.reshape(spec.width, spec.Q), spec.N, mask)
    if kind == "fourier":
        return A.FourierSeries(coeffs.reshape(spec.width, 2 * spec.Q), spec.period)
    if kind == "sine":
        return A.Sine(spec.omega)
    return {"relu": A.ReLU, "linear": A.Linear, "sigmoid": A.Sigmoid}[kind]()


def decode_model(buf):
    buf = memoryview(bytes(buf))
    header, pos = _parse_header(buf)
    need = pos + header.payload_size() + header.mask_size() + _CRC.size
    if len(buf) < need:
        raise TruncatedError(f"file has {len(buf)} bytes, header implies {need}")
    if len(buf) > need:
        raise ModelFileError(f"{len(buf) - need} unexpected trailing bytes")
    (crc,) = _CRC.unpack_from(buf, need - _CRC.size)
    if zlib.crc32(buf[: need - _CRC.size]) != crc:
        raise ChecksumError("CRC-32 mismatch; file is corrupted")

    def take(n):
        nonlocal pos
        a = np.frombuffer(buf, dtype="<f8", count=n, offset=pos).astype(np.float64)
        pos += 8 * n
        return a

    raw, fan_in = [], header.input_dim
    for ls, nc in zip(header.specs, header.n_coeffs):
        W = take(fan_in * ls.width).reshape(fan_in, ls.width)
        raw.append((W, take(ls.width), take(nc)))
        fan_in = ls.width
    layers = []
    for ls, nc, (W, b, coeffs) in zip(header.specs, header.n_coeffs, raw):
        mask = None
        if ls.activation == "dct":
            nbytes = (nc + 7) // 8
            bits = np.frombuffer(buf, dtype=np.uint8, count=nbytes, offset=pos)
            mask = np.unpackbits(bits, count=nc, bitorder="little").astype(bool).reshape(ls.width, ls.Q)
            pos += nbytes
        layers.append(Layer(W, b, _activation(ls, coeffs, mask), ls))
    net = Network(header.input_dim, layers, header.seed)
    if param_count(net) != header.param_count:
        raise ModelFileError(f"header declares {header.param_count} parameters, payload has {param_count(net)}")
    return net


def save_model(net, path):
    """Write atomically: a temp file in the same directory is renamed into place."""
    data = encode_model(net)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".enn-", dir=d)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path):
    with open(path, "rb") as fh:
        return decode_model(fh.read())
