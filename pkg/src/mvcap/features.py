"""Frame encoding and binary feature/frame I/O.

The frame encoder is a deterministic stand-in for a frozen pretrained vision
backbone: a 64-bin intensity histogram pushed through a fixed sine projection
and L2-normalized. It is an analytic formula, so equal pixel grids produce
bitwise-equal features on any platform.

Visual features are precomputed once and cached to disk so training never
re-runs the encoder. Cache files (magic ``PNF1``) and raw frame files
(magic ``PNFR``) are little-endian, float32, written atomically.
"""

from __future__ import annotations

import io
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import CorruptError, FormatError, VersionError

HIST_BINS = 64
DEFAULT_DIM = 64

CACHE_MAGIC = b"PNF1"
FRAMES_MAGIC = b"PNFR"
_HEADER = struct.Struct("<4sIIIII")  # magic, version, then four u32 fields


@dataclass(frozen=True)
class Frame:
    """One grayscale frame: (H, W) intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 2 or p.size == 0:
            raise ValueError("frame must be a nonempty 2-d pixel grid")
        if not np.all(np.isfinite(p)):
            raise ValueError("frame has non-finite pixels")
        if p.min() < 0.0 or p.max() > 1.0:
            raise ValueError("frame intensities must lie in [0, 1]")


@dataclass
class FeatureTensor:
    """Per-sample visual features: data (N_v, N_f, D) with a validity mask.

    mask[v, f] is True where view v really has a frame at time f; shorter
    views are zero-padded with mask False.
    """

    data: np.ndarray  # float32, (N_v, N_f, D)
    mask: np.ndarray  # bool, (N_v, N_f)

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError(f"data must be 3-d, got shape {self.data.shape}")
        if self.mask.shape != self.data.shape[:2]:
            raise ValueError(
                f"mask shape {self.mask.shape} does not match data {self.data.shape[:2]}"
            )
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        self.mask = np.ascontiguousarray(self.mask, dtype=bool)

    @property
    def n_views(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]

    def validate(self) -> "FeatureTensor":
        """Check the numeric invariants; returns self for chaining."""
        norms = np.linalg.norm(self.data[self.mask], axis=-1)
        if norms.size and np.max(np.abs(norms - 1.0)) > 1e-6:
            raise ValueError("unmasked feature rows must be L2-unit vectors")
        if np.any(self.data[~self.mask] != 0.0):
            raise ValueError("masked feature rows must be all-zero")
        if not np.all(self.mask.any(axis=0)):
            raise ValueError("every time index needs at least one unmasked view")
        return self

    def equals_bitwise(self, other: "FeatureTensor") -> bool:
        return (
            self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
            and self.mask.tobytes() == other.mask.tobytes()
        )


def _sine_projection(dim: int) -> np.ndarray:
    # P[i][j] = sin(i*dim + j + 1), fixed analytic weights, no PRNG involved
    i = np.arange(HIST_BINS, dtype=np.float64)[:, None]
    j = np.arange(dim, dtype=np.float64)[None, :]
    return np.sin(i * dim + j + 1.0)


def stub_encode(frame: Frame, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Encode one frame to a unit D-vector (float64).

    The 64-bin histogram of the intensities (normalized to sum 1) is pushed
    through the fixed sine projection, then L2-normalized.
    """
    pixels = np.asarray(frame.pixels, dtype=np.float64)
    bins = np.minimum((pixels * HIST_BINS).astype(np.int64), HIST_BINS - 1)
    hist = np.bincount(bins.ravel(), minlength=HIST_BINS).astype(np.float64)
    hist /= pixels.size
    y = hist @ _sine_projection(dim)
    norm = math.sqrt(float(y @ y))
    if norm == 0.0:
        raise ValueError("degenerate frame: projected histogram is the zero vector")
    return y / norm


def encode_sample(views: list[list[Frame]], dim: int = DEFAULT_DIM) -> FeatureTensor:
    """Encode all frames of all views of one sample.

    N_f is the longest view; shorter views are zero-padded with mask False.
    """
    if len(views) == 0:
        raise ValueError("sample needs at least one view")
    if any(len(v) == 0 for v in views):
        raise ValueError("every view needs at least one frame")
    n_v = len(views)
    n_f = max(len(v) for v in views)
    data = np.zeros((n_v, n_f, dim), dtype=np.float32)
    mask = np.zeros((n_v, n_f), dtype=bool)
    for vi, frames in enumerate(views):
        for fi, frame in enumerate(frames):
            data[vi, fi] = stub_encode(frame, dim).astype(np.float32)
            mask[vi, fi] = True
    return FeatureTensor(data, mask).validate()


def _open_sink(sink):
    if isinstance(sink, (str, os.PathLike)):
        return None, sink
    return sink, None


def _write_atomic(path, payload: bytes):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(payload)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def _read_exact(stream, n: int, what: str) -> bytes:
    buf = stream.read(n)
    if buf is None or len(buf) != n:
        raise CorruptError(f"truncated stream: expected {n} bytes of {what}, got {len(buf or b'')}")
    return buf


def write_cache(tensor: FeatureTensor, sink) -> int:
    """Write a feature cache file; returns the byte count.

    ``sink`` may be a path (written atomically) or a binary stream.
    """
    n_v, n_f, dim = tensor.data.shape
    header = _HEADER.pack(CACHE_MAGIC, 1, n_v, n_f, dim, 0)
    payload = tensor.data.astype("<f4", copy=False).tobytes()
    bitmap = np.packbits(tensor.mask.ravel(), bitorder="little").tobytes()
    blob = header + payload + bitmap
    stream, path = _open_sink(sink)
    if path is not None:
        _write_atomic(path, blob)
    else:
        stream.write(blob)
    return len(blob)


def read_cache(source) -> FeatureTensor:
    """Read a feature cache file (path or binary stream) back to a tensor."""
    stream, path = _open_sink(source)
    if path is not None:
        with open(path, "rb") as f:
            return read_cache(f)
    head = _read_exact(stream, _HEADER.size, "header")
    magic, version, n_v, n_f, dim, _reserved = _HEADER.unpack(head)
    if magic != CACHE_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {CACHE_MAGIC!r}")
    if version != 1:
        raise VersionError(f"unsupported cache version {version}")
    count = n_v * n_f * dim
    payload = _read_exact(stream, count * 4, "feature payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(n_v, n_f, dim).copy()
    bitmap = _read_exact(stream, (n_v * n_f + 7) // 8, "mask bitmap")
    bits = np.unpackbits(np.frombuffer(bitmap, dtype=np.uint8), bitorder="little")
    mask = bits[: n_v * n_f].astype(bool).reshape(n_v, n_f)
    return FeatureTensor(data, mask)


def write_frames(pixels: np.ndarray, sink) -> int:
    """Write a raw frame file: pixels (N_v, N_f, H, W) float32 in [0, 1]."""
    if pixels.ndim != 4:
        raise ValueError(f"pixels must be 4-d (N_v, N_f, H, W), got {pixels.shape}")
    n_v, n_f, h, w = pixels.shape
    header = _HEADER.pack(FRAMES_MAGIC, 1, n_v, n_f, h, w)
    blob = header + np.ascontiguousarray(pixels, dtype="<f4").tobytes()
    stream, path = _open_sink(sink)
    if path is not None:
        _write_atomic(path, blob)
    else:
        stream.write(blob)
    return len(blob)


def read_frames(source) -> np.ndarray:
    """Read a raw frame file back to a float32 array (N_v, N_f, H, W)."""
    stream, path = _open_sink(source)
    if path is not None:
        with open(path, "rb") as f:
            return read_frames(f)
    head = _read_exact(stream, _HEADER.size, "header")
    magic, version, n_v, n_f, h, w = _HEADER.unpack(head)
    if magic != FRAMES_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {FRAMES_MAGIC!r}")
    if version != 1:
        raise VersionError(f"unsupported frame file version {version}")
    payload = _read_exact(stream, n_v * n_f * h * w * 4, "pixel payload")
    return np.frombuffer(payload, dtype="<f4").reshape(n_v, n_f, h, w).copy()
