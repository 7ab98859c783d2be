"""Minimal reverse-mode differentiation over numpy arrays.

A Tape records primitive operations (matrix multiply, elementwise ops,
row reductions, embedding-row gather, concatenation, softmax
cross-entropy) as a flat Wengert list; node handles are integer indices,
so the graph is acyclic by construction. Backward fills adjoint slots in
one reverse sweep. Dtypes are preserved, which lets the test oracles run
the same graphs in 64-bit.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation, ShapeError


def sigmoid(x):
    """Logistic function, stable branch form."""
    x = np.asarray(x)
    out = np.empty_like(x, dtype=x.dtype)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x):
    return np.maximum(x, 0)


def softmax(logits):
    z = logits - np.max(logits)
    e = np.exp(z)
    return e / e.sum()


def softmax_cross_entropy(logits, label):
    """Fused stable -log softmax(logits)[label]; returns a 0-d array."""
    z = logits - np.max(logits)
    lse = np.log(np.exp(z).sum())
    return np.asarray(lse - z[label], dtype=logits.dtype)


def _unbroadcast(grad, shape):
    """Reduce grad back to shape it was broadcast from."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


class _Record:
    __slots__ = ("op", "inputs", "value", "adjoint", "aux", "param")

    def __init__(self, op, inputs, value, aux=None, param=None):
        self.op = op
        self.inputs = inputs
        self.value = value
        self.adjoint = None
        self.aux = aux
        self.param = param


class Tape:
    """Wengert list of primitive ops; handles are indices into the list."""

    def __init__(self):
        self.records: list[_Record] = []

    def __len__(self):
        return len(self.records)

    def value(self, handle):
        return self.records[handle].value

    def adjoint(self, handle):
        return self.records[handle].adjoint

    def _push(self, record):
        self.records.append(record)
        return len(self.records) - 1

    # -- graph inputs ------------------------------------------------------

    def leaf(self, value, param=None):
        return self._push(_Record("leaf", (), np.asarray(value), param=param))

    # -- primitives --------------------------------------------------------

    def matmul(self, a, b):
        va, vb = self.value(a), self.value(b)
        if va.shape[-1] != vb.shape[0]:
            raise ShapeError(f"matmul: {va.shape} @ {vb.shape}")
        return self._push(_Record("matmul", (a, b), va @ vb))

    def add(self, a, b):
        return self._push(_Record("add", (a, b), self.value(a) + self.value(b)))

    def mul(self, a, b):
        return self._push(_Record("mul", (a, b), self.value(a) * self.value(b)))

    def relu(self, a):
        return self._push(_Record("relu", (a,), relu(self.value(a))))

    def sigmoid(self, a):
        return self._push(_Record("sigmoid", (a,), sigmoid(self.value(a))))

    def sum_rows(self, a):
        return self._push(_Record("sum_rows", (a,), self.value(a).sum(axis=0)))

    def mean_rows(self, a):
        return self._push(_Record("mean_rows", (a,), self.value(a).mean(axis=0)))

    def max_rows(self, a):
        va = self.value(a)
        arg = np.argmax(va, axis=0)  # first max wins on ties
        return self._push(_Record("max_rows", (a,), va.max(axis=0), aux=arg))

    def gather(self, a, indices):
        idx = np.asarray(indices, dtype=np.intp)
        return self._push(_Record("gather", (a,), self.value(a)[idx], aux=idx))

    def concat(self, a, b):
        va, vb = self.value(a), self.value(b)
        if va.ndim != 1 or vb.ndim != 1:
            raise ShapeError("concat expects 1-d vectors")
        return self._push(_Record("concat", (a, b), np.concatenate([va, vb])))

    def softmax_cross_entropy(self, logits, label):
        vl = self.value(logits)
        if vl.ndim != 1:
            raise ShapeError("softmax_cross_entropy expects a 1-d logit vector")
        return self._push(
            _Record("softmax_xent", (logits,), softmax_cross_entropy(vl, label), aux=int(label))
        )

    # -- replay / backward ---------------------------------------------------

    def replay(self):
        """Recompute every value from its inputs; True iff bitwise identical."""
        for rec in self.records:
            if rec.op == "leaf":
                continue
            vals = [self.records[i].value for i in rec.inputs]
            if rec.op == "matmul":
                fresh = vals[0] @ vals[1]
            elif rec.op == "add":
                fresh = vals[0] + vals[1]
            elif rec.op == "mul":
                fresh = vals[0] * vals[1]
            elif rec.op == "relu":
                fresh = relu(vals[0])
            elif rec.op == "sigmoid":
                fresh = sigmoid(vals[0])
            elif rec.op == "sum_rows":
                fresh = vals[0].sum(axis=0)
            elif rec.op == "mean_rows":
                fresh = vals[0].mean(axis=0)
            elif rec.op == "max_rows":
                fresh = vals[0].max(axis=0)
            elif rec.op == "gather":
                fresh = vals[0][rec.aux]
            elif rec.op == "concat":
                fresh = np.concatenate([vals[0], vals[1]])
            elif rec.op == "softmax_xent":
                fresh = softmax_cross_entropy(vals[0], rec.aux)
            else:
                raise ContractViolation(f"unknown op {rec.op!r}")
            if not np.array_equal(fresh, rec.value):
                return False
        return True

    def backward(self, loss):
        """Reverse sweep from a scalar loss; fills every adjoint slot."""
        loss_rec = self.records[loss]
        if np.asarray(loss_rec.value).ndim != 0:
            raise ContractViolation(f"loss must be scalar, got shape {loss_rec.value.shape}")
        for rec in self.records:
            rec.adjoint = np.zeros_like(rec.value)
        loss_rec.adjoint = np.ones_like(loss_rec.value)

        for handle in range(loss, -1, -1):
            rec = self.records[handle]
            g = rec.adjoint
            if rec.op == "leaf" or not np.any(g):
                continue
            ins = rec.inputs
            if rec.op == "matmul":
                va, vb = self.records[ins[0]].value, self.records[ins[1]].value
                if va.ndim == 1 and vb.ndim == 2:
                    self.records[ins[0]].adjoint += g @ vb.T
                    self.records[ins[1]].adjoint += np.outer(va, g)
                elif va.ndim == 2 and vb.ndim == 1:
                    self.records[ins[0]].adjoint += np.outer(g, vb)
                    self.records[ins[1]].adjoint += va.T @ g
                else:
                    self.records[ins[0]].adjoint += g @ vb.T
                    self.records[ins[1]].adjoint += va.T @ g
            elif rec.op == "add":
                for i in ins:
                    self.records[i].adjoint += _unbroadcast(g, self.records[i].value.shape)
            elif rec.op == "mul":
                va, vb = self.records[ins[0]].value, self.records[ins[1]].value
                self.records[ins[0]].adjoint += _unbroadcast(g * vb, va.shape)
                self.records[ins[1]].adjoint += _unbroadcast(g * va, vb.shape)
            elif rec.op == "relu":
                self.records[ins[0]].adjoint += g * (rec.value > 0)
            elif rec.op == "sigmoid":
                s = rec.value
                self.records[ins[0]].adjoint += g * s * (1 - s)
            elif rec.op == "sum_rows":
                self.records[ins[0]].adjoint += np.broadcast_to(
                    g, self.records[ins[0]].value.shape)
            elif rec.op == "mean_rows":
                n = self.records[ins[0]].value.shape[0]
                self.records[ins[0]].adjoint += np.broadcast_to(
                    g / n, self.records[ins[0]].value.shape)
            elif rec.op == "max_rows":
                upstream = self.records[ins[0]].adjoint
                for col, row in enumerate(rec.aux):
                    upstream[row, col] += g[col]
            elif rec.op == "gather":
                np.add.at(self.records[ins[0]].adjoint, rec.aux, g)
            elif rec.op == "concat":
                la = self.records[ins[0]].value.shape[0]
                self.records[ins[0]].adjoint += g[:la]
                self.records[ins[1]].adjoint += g[la:]
            elif rec.op == "softmax_xent":
                probs = softmax(self.records[ins[0]].value)
                onehot = np.zeros_like(probs)
                onehot[rec.aux] = 1
                self.records[ins[0]].adjoint += g * (probs - onehot)

        grads = {}
        for rec in self.records:
            if rec.param is not None:
                grads[rec.param] = grads.get(rec.param, 0) + rec.adjoint
        return grads


def backward(tape: Tape, loss) -> dict:
    """Gradients of a recorded scalar loss for every named parameter."""
    return tape.backward(loss)


class ArrayOps:
    """Eager twin of the Tape op set; handles are the arrays themselves.

    Forward passes written against this interface run identically on a
    Tape (recording) or on ArrayOps (plain numpy).
    """

    @staticmethod
    def leaf(value, param=None):
        return np.asarray(value)

    @staticmethod
    def matmul(a, b):
        return a @ b

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def mul(a, b):
        return a * b

    relu = staticmethod(relu)
    sigmoid = staticmethod(sigmoid)

    @staticmethod
    def sum_rows(a):
        return a.sum(axis=0)

    @staticmethod
    def mean_rows(a):
        return a.mean(axis=0)

    @staticmethod
    def max_rows(a):
        return a.max(axis=0)

    @staticmethod
    def gather(a, indices):
        return a[np.asarray(indices, dtype=np.intp)]

    @staticmethod
    def concat(a, b):
        return np.concatenate([a, b])

    @staticmethod
    def softmax_cross_entropy(logits, label):
        return softmax_cross_entropy(logits, label)
