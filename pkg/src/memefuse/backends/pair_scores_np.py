"""NumPy reference implementation of the gated pairwise score kernel.

The kernel computes, for query rows ``x`` (m rows) and context rows ``y``
(n rows),

    s[p, j] = dot(sigmoid(x[p] @ W + y[j] @ U + b), v) + c

which is the quadratic-cost core of the gated cross-attention scorer.
When ``U`` is None the ``y`` term is dropped and every column of ``s``
is identical (the score no longer depends on the attended row).

This path materialises the full (m, n, d) activation tensor, trading
memory for vectorised speed.  The compiled backend streams it instead.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(xw, yu, b, v, c, n):
    """Score matrix for projected inputs.

    xw: (m, d) = x @ W, yu: (n, d) = y @ U or None, b: (d,), v: (d,), c: float.
    ``n`` is the attended-axis length (redundant unless ``yu`` is None).
    Returns (scores (m, n), ctx) where ctx feeds :func:`backward`.
    """
    if yu is None:
        h = _sigmoid(xw + b)                      # (m, d)
        row = h @ v + c                           # (m,)
        s = np.repeat(row[:, None], n, axis=1)
        return s, ("nou", h)
    h = _sigmoid(xw[:, None, :] + yu[None, :, :] + b)   # (m, n, d)
    s = h @ v + c                                       # (m, n)
    return s, ("pair", h)


def backward(ctx, v, ds, b):
    """Gradients w.r.t. (xw, yu, b, v, c) given upstream ds.

    ``b`` is unused here (activations are cached in ctx) but kept for
    interface parity with the compiled backend, which recomputes them.
    For the no-context case ds has shape (m, n) and is summed over the
    broadcast axis first.
    """
    kind, h = ctx
    if kind == "nou":
        dsrow = ds.sum(axis=1)                    # (m,)
        dh = dsrow[:, None] * v[None, :]          # (m, d)
        dz = dh * h * (1.0 - h)
        dxw = dz
        db = dz.sum(axis=0)
        dv = h.T @ dsrow
        dc = float(dsrow.sum())
        return dxw, None, db, dv, dc
    dh = ds[:, :, None] * v[None, None, :]        # (m, n, d)
    dz = dh * h * (1.0 - h)
    dxw = dz.sum(axis=1)
    dyu = dz.sum(axis=0)
    db = dz.sum(axis=(0, 1))
    dv = np.einsum("pj,pjk->k", ds, h)
    dc = float(ds.sum())
    return dxw, dyu, db, dv, dc
