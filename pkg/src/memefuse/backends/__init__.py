"""Kernel backend selection.

The gated pairwise score kernel has two implementations: a compiled
Cython extension that streams the (m, n, d) expansion, and a NumPy
fallback that materialises it.  The compiled one is picked at import
when available; ``MEMEFUSE_BACKEND=numpy|compiled`` forces a choice.
Both expose ``forward(xw, yu, b, v, c, n)`` and
``backward(ctx, v, ds, b)`` with identical semantics.
"""

from __future__ import annotations

import os

from . import pair_scores_np

_choice = os.environ.get("MEMEFUSE_BACKEND", "auto").strip().lower()

if _choice not in ("auto", "numpy", "compiled"):
    raise ValueError(f"MEMEFUSE_BACKEND must be auto, numpy or compiled, got {_choice!r}")

pair_scores = pair_scores_np
if _choice != "numpy":
    try:
        from . import _pair_scores_cy

        pair_scores = _pair_scores_cy
    except ImportError:
        if _choice == "compiled":
            raise ImportError(
                "MEMEFUSE_BACKEND=compiled but the extension is not built; "
                "reinstall the package or set MEMEFUSE_BACKEND=numpy"
            ) from None


def backend_name() -> str:
    """Name of the active pairwise-score backend."""
    return pair_scores.NAME


def available_backends() -> list[str]:
    names = [pair_scores_np.NAME]
    try:
        from . import _pair_scores_cy  # noqa: F401

        names.append(_pair_scores_cy.NAME)
    except ImportError:
        pass
    return names
