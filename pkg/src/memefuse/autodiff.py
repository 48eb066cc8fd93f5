"""Dense tensors with tape-recorded reverse-mode differentiation.

Covers exactly the operations the fusion architecture needs: matrix
products, elementwise arithmetic and activations, row softmax, axis
reductions, concatenation, element selection, a fused cross-entropy
and the gated pairwise attention scorer (dispatched to the compiled
or NumPy backend).

Every op validates shapes up front, checks its output for non-finite
values, and records a vector-Jacobian closure.  ``Tensor.backward``
walks the recorded graph once in reverse topological order.  All
computation is float64; file formats downcast to float32 at the edges.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import backends
from .exceptions import ContractError, GraphError, NumericsError, ShapeError

Array = np.ndarray

_MAX_AXES = 3


def _validated(data, *, op: str) -> Array:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim > _MAX_AXES:
        raise ShapeError(f"{op}: tensors support at most {_MAX_AXES} axes, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericsError(f"non-finite values produced by op '{op}'")
    return arr


class Tensor:
    """A dense row-major float64 array, optionally tracked for gradients.

    Leaf tensors created with ``requires_grad=True`` carry a zero grad
    buffer from the start; backward passes accumulate into it, which is
    what batch gradient accumulation relies on.  Tensors produced by
    ops receive their grad during the backward walk.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_vjp", "_op", "_backward_done")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _validated(data, op="leaf")
        self.requires_grad = bool(requires_grad)
        self.grad: Array | None = np.zeros_like(self.data) if self.requires_grad else None
        self._parents: tuple[Tensor, ...] = ()
        self._vjp: Callable[[Array], Sequence[Array | None]] | None = None
        self._op = "leaf"
        self._backward_done = False

    # -- basic introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> Array:
        """Copy of the raw values, detached from the graph."""
        return self.data.copy()

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), requires_grad=False)

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        flag = ", grad" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, op={self._op!r}{flag})"

    # -- operator sugar ------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return hadamard(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return hadamard(other, self)

    def __matmul__(self, other):
        return matmul(self, other)

    # -- reverse-mode driver -------------------------------------------------

    def backward(self) -> None:
        """Populate gradients of every tracked tensor this value depends on.

        The root must hold a single element.  A second call on the same
        root is rejected; build a fresh graph (and zero parameter grads)
        instead.
        """
        if self.data.size != 1:
            raise ContractError(f"backward root must be scalar, got shape {self.shape}")
        if self._backward_done:
            raise GraphError("backward already ran for this graph; rebuild it before differentiating again")

        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, emit = stack.pop()
            if emit:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))

        pending: dict[int, Array] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = pending.pop(id(node), None)
            if grad is None:
                continue
            if node.grad is None:
                node.grad = grad.copy()
            else:
                node.grad += grad
            if node._vjp is None:
                continue
            for parent, pgrad in zip(node._parents, node._vjp(grad)):
                if pgrad is None or not parent.requires_grad:
                    continue
                if not np.all(np.isfinite(pgrad)):
                    raise NumericsError(f"non-finite gradient produced by op '{node._op}'")
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + pgrad
                else:
                    pending[key] = np.asarray(pgrad, dtype=np.float64)
        self._backward_done = True


def _result(data, op: str, parents: Sequence[Tensor], vjp) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = _validated(data, op=op)
    out.requires_grad = any(p.requires_grad for p in parents)
    out.grad = None
    out._parents = tuple(parents) if out.requires_grad else ()
    out._vjp = vjp if out.requires_grad else None
    out._op = op
    out._backward_done = False
    return out


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# -- elementwise binary ops --------------------------------------------------


def _broadcast_mode(a: Tensor, b: Tensor, op: str) -> str:
    """'equal' for matching shapes, 'row-a'/'row-b' when the 1-D operand
    broadcasts over the rows of the 2-D one."""
    if a.shape == b.shape:
        return "equal"
    if a.ndim == 2 and b.ndim == 1 and a.shape[1] == b.shape[0]:
        return "row-b"
    if a.ndim == 1 and b.ndim == 2 and b.shape[1] == a.shape[0]:
        return "row-a"
    raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}")


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    mode = _broadcast_mode(a, b, "add")

    def vjp(g):
        ga = g.sum(axis=0) if mode == "row-a" else g
        gb = g.sum(axis=0) if mode == "row-b" else g
        return ga, gb

    return _result(a.data + b.data, "add", (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    mode = _broadcast_mode(a, b, "sub")

    def vjp(g):
        ga = g.sum(axis=0) if mode == "row-a" else g
        gb = -(g.sum(axis=0) if mode == "row-b" else g)
        return ga, gb

    return _result(a.data - b.data, "sub", (a, b), vjp)


def hadamard(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    mode = _broadcast_mode(a, b, "hadamard")
    ad, bd = a.data, b.data

    def vjp(g):
        ga = g * bd
        gb = g * ad
        if mode == "row-a":
            ga = ga.sum(axis=0)
        elif mode == "row-b":
            gb = gb.sum(axis=0)
        return ga, gb

    return _result(ad * bd, "hadamard", (a, b), vjp)


def scale(a, alpha: float) -> Tensor:
    a = _as_tensor(a)
    alpha = float(alpha)
    return _result(a.data * alpha, "scale", (a,), lambda g: (g * alpha,))


# -- activations -------------------------------------------------------------

# Saturating inputs would otherwise round to exactly 0/1 (or +/-1) in
# float64; clamping to the nearest representable interior value keeps
# the documented open-interval ranges true for every input.
_ONE_INSIDE = float(np.nextafter(1.0, 0.0))
_ZERO_INSIDE = float(np.nextafter(0.0, 1.0))


def tanh(a) -> Tensor:
    a = _as_tensor(a)
    out = np.clip(np.tanh(a.data), -_ONE_INSIDE, _ONE_INSIDE)
    return _result(out, "tanh", (a,), lambda g: (g * (1.0 - out * out),))


def _sigmoid_stable(z: Array) -> Array:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, _ZERO_INSIDE, _ONE_INSIDE)


def sigmoid(a) -> Tensor:
    a = _as_tensor(a)
    out = _sigmoid_stable(a.data)
    return _result(out, "sigmoid", (a,), lambda g: (g * out * (1.0 - out),))


def relu(a) -> Tensor:
    a = _as_tensor(a)
    mask = a.data > 0
    return _result(np.where(mask, a.data, 0.0), "relu", (a,), lambda g: (g * mask,))


# -- linear algebra ----------------------------------------------------------


def matmul(a, b) -> Tensor:
    """Matrix/vector product for 1-D and 2-D operands.

    Supported: (p,q)@(q,r), (q,)@(q,r), (p,q)@(q,), (q,)@(q,).
    """
    a, b = _as_tensor(a), _as_tensor(b)
    ad, bd = a.data, b.data
    ka = ad.shape[-1] if ad.ndim else None
    kb = bd.shape[0] if bd.ndim else None
    if ad.ndim not in (1, 2) or bd.ndim not in (1, 2) or ka != kb:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    if ad.ndim == 2 and bd.ndim == 2:
        vjp = lambda g: (g @ bd.T, ad.T @ g)
    elif ad.ndim == 1 and bd.ndim == 2:
        vjp = lambda g: (bd @ g, np.outer(ad, g))
    elif ad.ndim == 2 and bd.ndim == 1:
        vjp = lambda g: (np.outer(g, bd), ad.T @ g)
    else:
        vjp = lambda g: (g * bd, g * ad)

    return _result(ad @ bd, "matmul", (a, b), vjp)


def transpose(a) -> Tensor:
    a = _as_tensor(a)
    if a.ndim != 2:
        raise ShapeError(f"transpose: expected a 2-D tensor, got shape {a.shape}")
    return _result(a.data.T.copy(), "transpose", (a,), lambda g: (g.T,))


def concat(a, b, axis: int = 0) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != b.ndim:
        raise ShapeError(f"concat: rank mismatch {a.shape} vs {b.shape}")
    if not 0 <= axis < max(a.ndim, 1):
        raise ShapeError(f"concat: axis {axis} out of range for shape {a.shape}")
    for ax in range(a.ndim):
        if ax != axis and a.shape[ax] != b.shape[ax]:
            raise ShapeError(f"concat: off-axis dims differ, {a.shape} vs {b.shape}")
    split = a.shape[axis]

    def vjp(g):
        ga, gb = np.split(g, [split], axis=axis)
        return ga, gb

    return _result(np.concatenate([a.data, b.data], axis=axis), "concat", (a, b), vjp)


def pick(a, index: int) -> Tensor:
    """Scalar element of a 1-D tensor (used for class-logit selection)."""
    a = _as_tensor(a)
    if a.ndim != 1:
        raise ShapeError(f"pick: expected a 1-D tensor, got shape {a.shape}")
    if not 0 <= index < a.shape[0]:
        raise ContractError(f"pick: index {index} out of range for length {a.shape[0]}")

    def vjp(g):
        out = np.zeros_like(a.data)
        out[index] = g
        return (out,)

    return _result(a.data[index], "pick", (a,), vjp)


# -- softmax and reductions --------------------------------------------------


def _check_axis(a: Tensor, axis: int, op: str) -> int:
    if a.ndim == 0:
        raise ShapeError(f"{op}: scalar tensor has no axes")
    if axis < 0:
        axis += a.ndim
    if not 0 <= axis < a.ndim:
        raise ShapeError(f"{op}: axis out of range for shape {a.shape}")
    return axis


def softmax(a, axis: int = -1) -> Tensor:
    a = _as_tensor(a)
    axis = _check_axis(a, axis, "softmax")
    if a.shape[axis] == 0:
        raise ShapeError(f"softmax: axis {axis} of shape {a.shape} is empty")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return ((g - inner) * out,)

    return _result(out, "softmax", (a,), vjp)


def sum_pool(a, axis: int = 0) -> Tensor:
    a = _as_tensor(a)
    axis = _check_axis(a, axis, "sum_pool")
    reps = a.shape[axis]

    def vjp(g):
        return (np.repeat(np.expand_dims(g, axis), reps, axis=axis),)

    return _result(a.data.sum(axis=axis), "sum_pool", (a,), vjp)


def mean(a, axis: int = 0) -> Tensor:
    a = _as_tensor(a)
    axis = _check_axis(a, axis, "mean")
    reps = a.shape[axis]

    def vjp(g):
        return (np.repeat(np.expand_dims(g, axis), reps, axis=axis) / reps,)

    return _result(a.data.mean(axis=axis), "mean", (a,), vjp)


# -- fused ops ---------------------------------------------------------------


def cross_entropy_logits(logits, target_dist: Array) -> Tensor:
    """Cross-entropy between a target distribution and softmax(logits).

    Computed as logsumexp(logits) - target . logits, which is exact for
    any target summing to 1 and never exponentiates large values.
    """
    logits = _as_tensor(logits)
    q = np.asarray(target_dist, dtype=np.float64)
    if logits.ndim != 1 or q.shape != logits.shape:
        raise ShapeError(f"cross_entropy: logits {logits.shape} vs targets {q.shape}")
    z = logits.data
    zmax = z.max()
    lse = zmax + np.log(np.exp(z - zmax).sum())
    p = np.exp(z - lse)

    def vjp(g):
        return (g * (p - q),)

    return _result(lse - q @ z, "cross_entropy", (logits,), vjp)


def gated_pair_scores(x, y, w, u, b, v, c) -> Tensor:
    """Attention score matrix s[p, j] = sigmoid(x[p]@w + y[j]@u + b) . v + c.

    ``u`` may be None, dropping the y[j] term: scores then carry no
    dependence on the attended axis, which a downstream softmax turns
    into uniform weights.  The (m, n, d) expansion runs on the selected
    kernel backend; the surrounding projections stay on BLAS.
    """
    x, y, w, b, v, c = map(_as_tensor, (x, y, w, b, v, c))
    u = _as_tensor(u) if u is not None else None
    m, d = (x.shape if x.ndim == 2 else (None, None))
    if x.ndim != 2 or y.ndim != 2 or y.shape[1] != d:
        raise ShapeError(f"pair_scores: inputs must be (m,d) and (n,d), got {x.shape}, {y.shape}")
    if w.shape != (d, d):
        raise ShapeError(f"pair_scores: w must be ({d},{d}), got {w.shape}")
    if u is not None and u.shape != (d, d):
        raise ShapeError(f"pair_scores: u must be ({d},{d}), got {u.shape}")
    if b.shape != (d,):
        raise ShapeError(f"pair_scores: b must be ({d},), got {b.shape}")
    if v.size != d:
        raise ShapeError(f"pair_scores: v must hold {d} values, got shape {v.shape}")
    if c.size != 1:
        raise ShapeError(f"pair_scores: c must be a scalar, got shape {c.shape}")
    n = y.shape[0]

    xw = x.data @ w.data
    yu = y.data @ u.data if u is not None else None
    vflat = v.data.reshape(-1)
    scores, ctx = backends.pair_scores.forward(xw, yu, b.data, vflat, float(c.data.reshape(())), n)

    parents = (x, y, w, b, v, c) if u is None else (x, y, w, u, b, v, c)

    def vjp(g):
        dxw, dyu, db, dv, dc = backends.pair_scores.backward(ctx, vflat, np.ascontiguousarray(g), b.data)
        dx = dxw @ w.data.T
        dw = x.data.T @ dxw
        dv_shaped = dv.reshape(v.shape)
        dc_shaped = np.full(c.shape, dc)
        if u is None:
            return dx, np.zeros_like(y.data), dw, db, dv_shaped, dc_shaped
        dy = dyu @ u.data.T
        du = y.data.T @ dyu
        return dx, dy, dw, du, db, dv_shaped, dc_shaped

    return _result(scores, "pair_scores", parents, vjp)
