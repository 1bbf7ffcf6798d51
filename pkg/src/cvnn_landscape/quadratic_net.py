"""Shallow network ``x -> v^T psi(W x)`` with ``psi(t) = t^2``.

Loss is ``(1/2n) sum_i |L_i|^2`` with residual ``L_i = v^T psi(W x_i) - y_i``.
The products are plain bilinear (no conjugation), so the network output is the
quadratic form ``x^T W^T diag(v) W x``.

Derivatives are Wirtinger derivatives with respect to ``W`` (and ``v``). Row-major
``vec`` is used everywhere, so index ``p*d + j`` of a Hessian block refers to
entry ``W[p, j]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import DimensionMismatch, IndexOutOfRange, NotReal
from .linalg_core import ComplexArray, RealArray, as_complex, vec

V_MIN_MODULUS = 1e-14
REAL_TOL = 1e-14


@dataclass(frozen=True)
class Dataset:
    """Inputs ``X`` (d x n, one sample per column) and targets ``y`` (length n)."""

    X: ComplexArray
    y: ComplexArray

    def __post_init__(self):
        X = as_complex(self.X)
        y = as_complex(self.y).reshape(-1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionMismatch(f"X must be a non-empty d x n matrix, got shape {X.shape}")
        if y.shape[0] != X.shape[1]:
            raise DimensionMismatch(f"y has {y.shape[0]} entries but X has {X.shape[1]} columns")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def d(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def is_real(self, tol: float = REAL_TOL) -> bool:
        return bool(np.max(np.abs(self.X.imag)) <= tol and np.max(np.abs(self.y.imag)) <= tol)


@dataclass(frozen=True)
class QuadNet:
    """Weights ``W`` (k x d) and output weights ``v`` (length k, all nonzero), ``k >= d``."""

    W: ComplexArray
    v: ComplexArray

    def __post_init__(self):
        W = as_complex(self.W)
        v = as_complex(self.v).reshape(-1)
        if W.ndim != 2:
            raise DimensionMismatch(f"W must be a matrix, got shape {W.shape}")
        if v.shape[0] != W.shape[0]:
            raise DimensionMismatch(f"v has {v.shape[0]} entries but W has {W.shape[0]} rows")
        if W.shape[0] < W.shape[1]:
            raise DimensionMismatch(f"need k >= d, got k={W.shape[0]}, d={W.shape[1]}")
        if np.any(np.abs(v) <= V_MIN_MODULUS):
            raise ValueError("every output weight v_i must be nonzero")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "v", v)

    @property
    def k(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def is_real(self, tol: float = REAL_TOL) -> bool:
        return bool(np.max(np.abs(self.W.imag)) <= tol and np.max(np.abs(self.v.imag)) <= tol)


@dataclass(frozen=True)
class WirtingerHessian:
    """The four kd x kd blocks of the Wirtinger Hessian of the loss in ``W``.

    ``ww`` is d^2/dW dW, ``wcwc`` is d^2/dW* dW*, ``w_wc[a, b]`` is d^2/(dW*_a dW_b)
    and ``wc_w`` its conjugate. ``wcwc == conj(ww)``, ``wc_w == conj(w_wc)`` and
    ``w_wc`` is Hermitian.
    """

    ww: ComplexArray
    wcwc: ComplexArray
    w_wc: ComplexArray
    wc_w: ComplexArray

    def block_matrix(self) -> ComplexArray:
        """The 2kd x 2kd matrix ``[[w_wc, wcwc], [ww, wc_w]]`` acting on ``(h; h^C)``."""
        return np.block([[self.w_wc, self.wcwc], [self.ww, self.wc_w]])


def _check(net: QuadNet, data: Dataset) -> None:
    if net.d != data.d:
        raise DimensionMismatch(f"network expects d={net.d} inputs, dataset has d={data.d}")


def forward(net: QuadNet, x: ArrayLike) -> complex:
    x = as_complex(x).reshape(-1)
    if x.shape[0] != net.d:
        raise DimensionMismatch(f"input has length {x.shape[0]}, expected {net.d}")
    return complex(net.v @ (net.W @ x) ** 2)


def residuals(net: QuadNet, data: Dataset) -> ComplexArray:
    """All residuals ``L_i = v^T psi(W x_i) - y_i`` as a length-n vector."""
    _check(net, data)
    return net.v @ (net.W @ data.X) ** 2 - data.y


def residual(net: QuadNet, data: Dataset, i: int) -> complex:
    """Residual of sample ``i``, counting samples from 1."""
    if not 1 <= i <= data.n:
        raise IndexOutOfRange(f"sample index {i} outside [1, {data.n}]")
    _check(net, data)
    return forward(net, data.X[:, i - 1]) - complex(data.y[i - 1])


def loss(net: QuadNet, data: Dataset) -> float:
    r = residuals(net, data)
    return float(np.sum(r.real**2 + r.imag**2) / (2 * data.n))


def grad_w(net: QuadNet, data: Dataset) -> ComplexArray:
    """Wirtinger derivative dL/dW, equal to ``D_v W (1/n) sum_i conj(L_i) x_i x_i^T``."""
    r = residuals(net, data)
    X = data.X
    return (net.v[:, None] * net.W) @ ((X * np.conj(r)) @ X.T) / data.n


def grad_v(net: QuadNet, data: Dataset) -> ComplexArray:
    """Wirtinger derivative dL/dv, equal to ``(1/2n) sum_i psi(W x_i) conj(L_i)``."""
    r = residuals(net, data)
    return ((net.W @ data.X) ** 2) @ np.conj(r) / (2 * data.n)


def hessian_w(net: QuadNet, data: Dataset) -> WirtingerHessian:
    r = residuals(net, data)
    X = data.X
    k, d, n = net.k, net.d, data.n
    # c[p, i] = v_p psi'(<w_p, x_i>)
    c = 2.0 * net.v[:, None] * (net.W @ X)
    # the second derivative of L_i couples only entries within the same row of W
    row_block = 2.0 * (X * np.conj(r)) @ X.T / (2 * n)
    ww = np.kron(np.diag(net.v), row_block)
    w_wc = np.einsum("pi,qi,ji,li->pjql", np.conj(c), c, np.conj(X), X).reshape(k * d, k * d) / (2 * n)
    return WirtingerHessian(ww=ww, wcwc=np.conj(ww), w_wc=w_wc, wc_w=np.conj(w_wc))


def quad_form(H: WirtingerHessian, U: ArrayLike) -> float:
    """``(h^*, h^T) . [[w_wc, wcwc], [ww, wc_w]] . (h; h^C)`` for ``h = vec(U)``.

    Reduces to ``2 Re(h^T ww h + h^* w_wc h)``, which is the second derivative of
    ``t -> L(W + tU)`` at ``t = 0``.
    """
    h = vec(U)
    if h.shape[0] != H.ww.shape[0]:
        raise DimensionMismatch(f"direction has {h.shape[0]} entries, Hessian expects {H.ww.shape[0]}")
    return float(2.0 * np.real(h @ H.ww @ h + np.conj(h) @ H.w_wc @ h))


def hessian_real_embedding(net: QuadNet, data: Dataset) -> RealArray:
    """Hessian in ``W`` of the loss of a real network on real data.

    Block (p, p) is ``(v_p/n) sum_i L_i psi'' x_i x_i^T + (v_p^2/n) sum_i psi'(w_p x_i)^2 x_i x_i^T``
    and block (p, q) is ``(v_p v_q/n) sum_i psi'(w_p x_i) psi'(w_q x_i) x_i x_i^T``.

    Raises:
        NotReal: if the network or data carry imaginary parts above 1e-14.
    """
    _check(net, data)
    if not (net.is_real() and data.is_real()):
        raise NotReal("real-embedding Hessian needs real weights and data")
    W, v = net.W.real, net.v.real
    X, y = data.X.real, data.y.real
    k, d, n = net.k, net.d, data.n
    hx = W @ X
    r = v @ hx**2 - y
    dpsi = 2.0 * hx
    H = np.zeros((k * d, k * d))
    for p in range(k):
        for q in range(k):
            block = np.zeros((d, d))
            for i in range(n):
                xx = np.outer(X[:, i], X[:, i])
                block += v[p] * v[q] * dpsi[p, i] * dpsi[q, i] * xx
                if p == q:
                    block += v[p] * r[i] * 2.0 * xx
            H[p * d:(p + 1) * d, q * d:(q + 1) * d] = block / n
    return H


def hessian_complex_embedding(net: QuadNet, data: Dataset) -> RealArray:
    """Hessian of the loss as a function of ``(Re vec W, Im vec W)`` in R^{2kd}.

    With ``A = ww`` and ``B = w_wc`` the real blocks are::

        d2/dx dx = 2 Re(A + B)      d2/dx dy = -2 Im(A + B)
        d2/dy dx = -2 Im(A - B)     d2/dy dy = 2 Re(B - A)

    so the result equals ``2 J^* [[B, conj A], [A, conj B]] J`` for the unitary
    ``J = [[I, iI], [I, -iI]] / sqrt(2)`` and shares the eigenvalue signs of the
    Wirtinger block matrix.
    """
    _check(net, data)
    H = hessian_w(net, data)
    A, B = H.ww, H.w_wc
    out = np.block([
        [2.0 * (A + B).real, -2.0 * (A + B).imag],
        [-2.0 * (A - B).imag, 2.0 * (B - A).real],
    ])
    return 0.5 * (out + out.T)


def rescale_row(net: QuadNet, row: int, factor: complex) -> QuadNet:
    """Multiply row ``row`` of ``W`` by ``factor`` and divide ``v_row`` by ``factor^2``.

    The output function (and the loss on every dataset) is unchanged.
    """
    W = net.W.copy()
    v = net.v.copy()
    W[row] *= factor
    v[row] /= factor * factor
    return QuadNet(W, v)
