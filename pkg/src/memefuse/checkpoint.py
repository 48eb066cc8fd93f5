"""Model checkpoints: one JSON header line plus a float32 blob.

The header carries a meta block (variant, d, num_classes, score_mode)
so a model can be rebuilt from the file alone, and one
{name, shape, offset} record per tensor.  Offsets are byte positions
into the blob that follows the newline.  Save -> load -> save is
byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import CheckpointError
from .models import Model, build_variant


def save_model(model: Model, path) -> None:
    records = []
    blobs = []
    offset = 0
    for name, tensor in model.named_params():
        data = tensor.data.astype("<f4")
        records.append({"name": name, "shape": list(data.shape), "offset": offset})
        blobs.append(data.tobytes())
        offset += len(blobs[-1])
    header = {
        "meta": {
            "format_version": 1,
            "variant": model.variant,
            "d": model.d,
            "num_classes": model.num_classes,
            "score_mode": model.score_mode,
        },
        "tensors": records,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for blob in blobs:
            fh.write(blob)


def load_model(path) -> Model:
    """Rebuild the model named in the header and fill in its weights."""
    path = Path(path)
    with open(path, "rb") as fh:
        line = fh.readline()
        blob = fh.read()
    try:
        header = json.loads(line.decode("utf-8"))
        meta = header["meta"]
        records = header["tensors"]
        variant = meta["variant"]
        d = int(meta["d"])
        num_classes = int(meta["num_classes"])
        score_mode = meta["score_mode"]
    except (ValueError, KeyError, TypeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint header ({exc})") from exc
    if meta.get("format_version") != 1:
        raise CheckpointError(f"{path}: unsupported checkpoint version {meta.get('format_version')}")

    model = build_variant(variant, d, num_classes, score_mode, seed=0)
    expected = dict(model.named_params())
    seen = set()
    for rec in records:
        try:
            name, shape, offset = rec["name"], tuple(rec["shape"]), int(rec["offset"])
        except (KeyError, TypeError) as exc:
            raise CheckpointError(f"{path}: malformed tensor record ({exc})") from exc
        if name not in expected:
            raise CheckpointError(f"{path}: unknown tensor name {name!r} for variant {variant!r}")
        if name in seen:
            raise CheckpointError(f"{path}: duplicate tensor name {name!r}")
        seen.add(name)
        tensor = expected[name]
        if shape != tensor.shape:
            raise CheckpointError(f"{path}: tensor {name!r} has shape {shape}, expected {tensor.shape}")
        nbytes = int(np.prod(shape)) * 4
        if offset < 0 or offset + nbytes > len(blob):
            raise CheckpointError(f"{path}: tensor {name!r} payload out of range (offset {offset})")
        values = np.frombuffer(blob, dtype="<f4", count=int(np.prod(shape)), offset=offset)
        tensor.data[...] = values.reshape(shape).astype(np.float64)
    missing = set(expected) - seen
    if missing:
        raise CheckpointError(f"{path}: checkpoint is missing tensors: {sorted(missing)}")
    return model
