"""Dense float tensors with reverse-mode automatic differentiation.

Every `Tensor` holds a numpy float64 array and doubles as a node of the
computation tape: it records the op that produced it, references to its
parents, and (after `backward`) the gradient of the final scalar with
respect to it. The tape is an implicit DAG; `backward` walks it exactly
once in reverse topological order.

Non-differentiable inputs (index arrays, dropout masks, class targets)
are passed as plain numpy arrays, never as tape nodes.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ShapeError",
    "Tensor",
    "as_tensor",
    "parameter",
    "add",
    "mul",
    "neg",
    "matmul",
    "transpose",
    "reshape",
    "concat",
    "slice_axis",
    "sigmoid",
    "tanh",
    "relu",
    "exp",
    "max_over_axis",
    "embedding_lookup",
    "conv1d",
    "dropout_with_mask",
    "softmax",
    "cross_entropy_with_logits",
    "reduce_sum",
    "reduce_mean",
    "backward",
    "gradients",
    "zero_grads",
]


class ShapeError(ValueError):
    """Operand shapes do not conform; the message names both shapes."""


class Tensor:
    __slots__ = ("value", "parents", "op", "grad", "_backward")

    def __init__(self, value, *, parents=(), op="leaf", backward=None):
        arr = np.asarray(value)
        if arr.dtype != np.float64:
            arr = arr.astype(np.float64)
        self.value = arr
        self.parents = tuple(parents)
        self.op = op
        self.grad = None
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    @property
    def size(self):
        return self.value.size

    def item(self):
        return float(self.value)

    def __repr__(self):
        return f"Tensor(op={self.op!r}, shape={self.value.shape})"

    # operator sugar; scalars and ndarrays are wrapped as constants
    def __add__(self, other):
        return add(self, as_tensor(other))

    def __radd__(self, other):
        return add(as_tensor(other), self)

    def __sub__(self, other):
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other):
        return add(as_tensor(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_tensor(other))

    def __rmul__(self, other):
        return mul(as_tensor(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, as_tensor(other))


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x, op="const")


def parameter(value) -> Tensor:
    """A leaf tensor meant to receive gradients and optimizer updates."""
    return Tensor(value, op="param")


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.value + b.value
    except ValueError:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} do not broadcast") from None

    def bwd(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor(out, parents=(a, b), op="add", backward=bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.value * b.value
    except ValueError:
        raise ShapeError(f"mul: shapes {a.shape} and {b.shape} do not broadcast") from None

    def bwd(g):
        return _unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)

    return Tensor(out, parents=(a, b), op="mul", backward=bwd)


def neg(a: Tensor) -> Tensor:
    a = as_tensor(a)
    return Tensor(-a.value, parents=(a,), op="neg", backward=lambda g: (-g,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    out = a.value @ b.value

    def bwd(g):
        return g @ b.value.T, a.value.T @ g

    return Tensor(out, parents=(a, b), op="matmul", backward=bwd)


def transpose(a: Tensor, axes=None) -> Tensor:
    a = as_tensor(a)
    out = np.transpose(a.value, axes)
    if axes is None:
        inv = None
    else:
        inv = np.argsort(axes)

    def bwd(g):
        return (np.transpose(g, inv),)

    return Tensor(out, parents=(a,), op="transpose", backward=bwd)


def reshape(a: Tensor, shape) -> Tensor:
    a = as_tensor(a)
    try:
        out = a.value.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view shape {a.shape} as {tuple(shape)}") from None

    def bwd(g):
        return (g.reshape(a.shape),)

    return Tensor(out, parents=(a,), op="reshape", backward=bwd)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ValueError("concat: need at least one tensor")
    try:
        out = np.concatenate([t.value for t in tensors], axis=axis)
    except ValueError:
        shapes = [t.shape for t in tensors]
        raise ShapeError(f"concat: shapes {shapes} do not conform along axis {axis}") from None
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor(out, parents=tuple(tensors), op="concat", backward=bwd)


def slice_axis(a: Tensor, axis: int, start: int, stop: int) -> Tensor:
    """Contiguous slice [start:stop) along one axis; keeps rank."""
    a = as_tensor(a)
    idx = [slice(None)] * a.value.ndim
    idx[axis] = slice(start, stop)
    idx = tuple(idx)
    out = a.value[idx]

    def bwd(g):
        full = np.zeros_like(a.value)
        full[idx] = g
        return (full,)

    return Tensor(out, parents=(a,), op="slice", backward=bwd)


def sigmoid(a: Tensor) -> Tensor:
    a = as_tensor(a)
    x = a.value
    # sign-split form never exponentiates a positive argument
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)

    def bwd(g):
        return (g * out * (1.0 - out),)

    return Tensor(out, parents=(a,), op="sigmoid", backward=bwd)


def tanh(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.value)

    def bwd(g):
        return (g * (1.0 - out * out),)

    return Tensor(out, parents=(a,), op="tanh", backward=bwd)


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.maximum(a.value, 0.0)

    def bwd(g):
        return (g * (a.value > 0.0),)

    return Tensor(out, parents=(a,), op="relu", backward=bwd)


def exp(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.value)

    def bwd(g):
        return (g * out,)

    return Tensor(out, parents=(a,), op="exp", backward=bwd)


def max_over_axis(a: Tensor, axis: int) -> Tensor:
    """Maximum along one axis; ties route the gradient to the first maximum."""
    a = as_tensor(a)
    out = np.max(a.value, axis=axis)
    arg = np.argmax(a.value, axis=axis)

    def bwd(g):
        full = np.zeros_like(a.value)
        idx = list(np.indices(out.shape))
        idx.insert(axis, arg)
        full[tuple(idx)] = g
        return (full,)

    return Tensor(out, parents=(a,), op="max", backward=bwd)


def embedding_lookup(table: Tensor, ids) -> Tensor:
    """Gather rows of a 2-D table; ids may have any shape."""
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    if table.value.ndim != 2:
        raise ShapeError(f"embedding_lookup: table shape {table.shape} is not 2-D")
    out = table.value[ids]

    def bwd(g):
        full = np.zeros_like(table.value)
        np.add.at(full, ids.reshape(-1), g.reshape(-1, table.shape[1]))
        return (full,)

    return Tensor(out, parents=(table,), op="embedding", backward=bwd)


def conv1d(x: Tensor, filters: Tensor) -> Tensor:
    """Valid 1-D convolution: x [T, Cin], filters [W, Cin, Cout] -> [T-W+1, Cout].

    Any padding is the caller's responsibility.
    """
    x, filters = as_tensor(x), as_tensor(filters)
    if x.value.ndim != 2 or filters.value.ndim != 3 or x.shape[1] != filters.shape[1]:
        raise ShapeError(f"conv1d: shapes {x.shape} and {filters.shape} do not conform")
    width = filters.shape[0]
    t_out = x.shape[0] - width + 1
    if t_out < 1:
        raise ShapeError(f"conv1d: input {x.shape} shorter than filter width {width}")
    fmat = filters.value.reshape(width * x.shape[1], -1)
    windows = np.stack([x.value[w : w + t_out] for w in range(width)], axis=1)
    out = windows.reshape(t_out, -1) @ fmat

    def bwd(g):
        gw = (g @ fmat.T).reshape(t_out, width, x.shape[1])
        gx = np.zeros_like(x.value)
        for w in range(width):
            gx[w : w + t_out] += gw[:, w, :]
        gf = (windows.reshape(t_out, -1).T @ g).reshape(filters.shape)
        return gx, gf

    return Tensor(out, parents=(x, filters), op="conv1d", backward=bwd)


def dropout_with_mask(x: Tensor, mask) -> Tensor:
    """Multiply by a fixed mask (inverted-dropout scaling baked into the mask)."""
    x = as_tensor(x)
    mask = np.asarray(mask, dtype=np.float64)
    try:
        out = x.value * mask
    except ValueError:
        raise ShapeError(f"dropout: shapes {x.shape} and {mask.shape} do not broadcast") from None

    def bwd(g):
        return (_unbroadcast(g * mask, x.shape),)

    return Tensor(out, parents=(x,), op="dropout", backward=bwd)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shifted = a.value - np.max(a.value, axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / np.sum(e, axis=axis, keepdims=True)

    def bwd(g):
        dot = np.sum(g * out, axis=axis, keepdims=True)
        return (out * (g - dot),)

    return Tensor(out, parents=(a,), op="softmax", backward=bwd)


def cross_entropy_with_logits(logits: Tensor, targets) -> Tensor:
    """Row-wise -log softmax(logits)[target]; logits [N, C], targets [N] ints."""
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64)
    if logits.value.ndim != 2 or targets.ndim != 1 or logits.shape[0] != targets.shape[0]:
        raise ShapeError(
            f"cross_entropy: logits {logits.shape} vs targets {targets.shape} do not conform"
        )
    z = logits.value
    zmax = np.max(z, axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.sum(np.exp(z - zmax), axis=1))
    rows = np.arange(z.shape[0])
    out = lse - z[rows, targets]

    def bwd(g):
        p = np.exp(z - zmax)
        p /= p.sum(axis=1, keepdims=True)
        p[rows, targets] -= 1.0
        return (p * g[:, None],)

    return Tensor(out, parents=(logits,), op="cross_entropy", backward=bwd)


def reduce_sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = np.sum(a.value, axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, a.shape).copy(),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gg, a.shape).copy(),)

    return Tensor(out, parents=(a,), op="sum", backward=bwd)


def reduce_mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    n = a.size if axis is None else a.shape[axis]
    return mul(reduce_sum(a, axis=axis, keepdims=keepdims), Tensor(1.0 / n, op="const"))


def _toposort(root: Tensor) -> list:
    """Iterative DFS postorder; each node appears exactly once."""
    order, seen, stack = [], set(), [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(node) into `.grad` for every node reachable from loss.

    `loss` must be a scalar. Existing grads on reachable nodes are overwritten;
    call `zero_grads` or rely on this overwrite between steps.
    """
    if loss.shape != ():
        raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")
    order = _toposort(loss)
    for node in order:
        node.grad = None
    loss.grad = np.ones(())
    for node in reversed(order):
        if node._backward is None or node.grad is None:
            continue
        for parent, g in zip(node.parents, node._backward(node.grad)):
            if g is None:
                continue
            parent.grad = g if parent.grad is None else parent.grad + g


def gradients(loss: Tensor, params) -> dict:
    """Run backward and return a grad per named parameter, zeros if unreachable."""
    backward(loss)
    return {
        name: (p.grad if p.grad is not None else np.zeros_like(p.value))
        for name, p in params.items()
    }


def zero_grads(params) -> None:
    values = params.values() if isinstance(params, dict) else params
    for p in values:
        p.grad = None
