"""Binary embedding-bundle files.

One file holds one sample: image patch features f_i (m x d), text token
features f_t (n x d), emotion patch features f_e (m x d) and a label.
Layout (little-endian): magic "MOODEMB1", u32 version=1, u32 d, u32 m,
u32 n, u32 label (0xFFFFFFFF when unlabeled), then the three float32
payloads in row-major order, f_i, f_t, f_e.

Values are stored in single precision; in memory everything is float64.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import (
    BadMagicError,
    ContractError,
    DimensionError,
    TruncatedError,
    VersionError,
)

MAGIC = b"MOODEMB1"
VERSION = 1
UNLABELED = 0xFFFFFFFF
_HEADER = struct.Struct("<8s5I")


@dataclass
class EmbeddingBundle:
    """One meme sample as three embedding matrices plus an optional label."""

    id: str
    f_i: np.ndarray
    f_t: np.ndarray
    f_e: np.ndarray
    label: int | None = None

    m: int = field(init=False)
    n: int = field(init=False)
    d: int = field(init=False)

    def __post_init__(self):
        self.f_i = np.asarray(self.f_i, dtype=np.float64)
        self.f_t = np.asarray(self.f_t, dtype=np.float64)
        self.f_e = np.asarray(self.f_e, dtype=np.float64)
        self.validate()
        self.m, self.d = self.f_i.shape
        self.n = self.f_t.shape[0]

    def validate(self, num_classes: int | None = None) -> None:
        if self.f_i.ndim != 2 or self.f_t.ndim != 2 or self.f_e.ndim != 2:
            raise DimensionError(f"bundle {self.id}: feature arrays must be 2-D")
        if self.f_i.shape != self.f_e.shape:
            raise DimensionError(
                f"bundle {self.id}: f_i {self.f_i.shape} and f_e {self.f_e.shape} must match"
            )
        if self.f_t.shape[1] != self.f_i.shape[1]:
            raise DimensionError(
                f"bundle {self.id}: text dim {self.f_t.shape[1]} != image dim {self.f_i.shape[1]}"
            )
        if self.f_i.shape[0] < 1 or self.f_t.shape[0] < 1:
            raise DimensionError(f"bundle {self.id}: need m >= 1 and n >= 1")
        for name, arr in (("f_i", self.f_i), ("f_t", self.f_t), ("f_e", self.f_e)):
            if not np.all(np.isfinite(arr)):
                raise DimensionError(f"bundle {self.id}: non-finite values in {name}")
        if self.label is not None:
            if self.label < 0 or (num_classes is not None and self.label >= num_classes):
                raise ContractError(f"bundle {self.id}: label {self.label} out of range")


def save_bundle(bundle: EmbeddingBundle, path) -> None:
    bundle.validate()
    label = UNLABELED if bundle.label is None else int(bundle.label)
    header = _HEADER.pack(MAGIC, VERSION, bundle.d, bundle.m, bundle.n, label)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(bundle.f_i.astype("<f4").tobytes())
        fh.write(bundle.f_t.astype("<f4").tobytes())
        fh.write(bundle.f_e.astype("<f4").tobytes())


def load_bundle(path, bundle_id: str | None = None) -> EmbeddingBundle:
    """Parse and fully validate a bundle file.

    Header fields are checked before any payload is read; a bad file
    never yields a partially constructed bundle.
    """
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise TruncatedError(f"{path}: file shorter than the fixed header")
        magic, version, d, m, n, label = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise VersionError(f"{path}: unsupported version {version}")
        if d < 1 or m < 1 or n < 1:
            raise DimensionError(f"{path}: invalid dims d={d}, m={m}, n={n}")
        payload = fh.read()
    expected = 4 * (2 * m * d + n * d)
    if len(payload) < expected:
        raise TruncatedError(f"{path}: payload holds {len(payload)} bytes, need {expected}")
    if len(payload) > expected:
        raise DimensionError(f"{path}: {len(payload) - expected} trailing bytes after payload")
    flat = np.frombuffer(payload, dtype="<f4")
    f_i = flat[: m * d].reshape(m, d)
    f_t = flat[m * d: m * d + n * d].reshape(n, d)
    f_e = flat[m * d + n * d:].reshape(m, d)
    if bundle_id is None:
        name = str(path)
        bundle_id = name.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return EmbeddingBundle(
        id=bundle_id,
        f_i=f_i,
        f_t=f_t,
        f_e=f_e,
        label=None if label == UNLABELED else int(label),
    )
