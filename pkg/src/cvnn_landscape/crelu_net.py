"""Shallow complex network with a split piecewise-linear activation.

``h(z) = g(Re z) + i g(Im z)`` with ``g(x) = max(0, s+ x) + min(0, s- x)``;
``(s+, s-) = (1, 0)`` is CReLU. The network maps a real input ``x`` to
``W2 h(W1 x + b1) + b2``. On real data that no affine model fits, the
construction below gives a whole family (one per ``alpha > 0``) of local minima
whose loss equals the best affine loss, which a two-unit network beats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg_core as la
from .errors import DimensionMismatch, LinearlyFittable, NotReal, RadiusTooLarge
from .quadratic_net import REAL_TOL, Dataset

LOSS_SLACK = 1e-12


@dataclass(frozen=True)
class PiecewiseActivation:
    s_plus: float = 1.0
    s_minus: float = 0.0

    def __post_init__(self):
        if not (self.s_plus > 0 and self.s_minus >= 0 and self.s_plus != self.s_minus):
            raise ValueError("need s_plus > 0, s_minus >= 0 and s_plus != s_minus")

    def real_part(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, self.s_plus * x) + np.minimum(0.0, self.s_minus * x)

    def slope(self, x: np.ndarray) -> np.ndarray:
        """Subgradient choice: ``s+`` for ``x > 0``, ``s-`` otherwise."""
        return np.where(x > 0, self.s_plus, self.s_minus)


CRELU = PiecewiseActivation(1.0, 0.0)


def apply_h(act: PiecewiseActivation, z):
    z = np.asarray(z, dtype=np.complex128)
    out = act.real_part(z.real) + 1j * act.real_part(z.imag)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CReluNet:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: complex
    act: PiecewiseActivation = CRELU

    def __post_init__(self):
        W1 = la.as_complex(self.W1)
        b1 = la.as_complex(self.b1).reshape(-1)
        W2 = la.as_complex(self.W2).reshape(1, -1)
        k = W1.shape[0]
        if W1.ndim != 2 or b1.shape[0] != k or W2.shape[1] != k:
            raise DimensionMismatch("inconsistent layer shapes")
        if k < 2:
            raise DimensionMismatch("hidden layer needs width at least 2")
        object.__setattr__(self, "W1", W1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "W2", W2)
        object.__setattr__(self, "b2", complex(self.b2))

    @property
    def k(self) -> int:
        return self.W1.shape[0]

    @property
    def d(self) -> int:
        return self.W1.shape[1]


def _require_real(data: Dataset) -> None:
    if not data.is_real(REAL_TOL):
        raise NotReal("dataset must be real-valued")


def pre_activations(net: CReluNet, X: np.ndarray) -> np.ndarray:
    return net.W1 @ X + net.b1[:, None]


def crelu_forward(net: CReluNet, X: np.ndarray) -> np.ndarray:
    """Network outputs for the columns of ``X`` as a length-n vector."""
    X = la.as_complex(X)
    if X.shape[0] != net.d:
        raise DimensionMismatch(f"inputs have d={X.shape[0]}, network expects {net.d}")
    return (net.W2 @ apply_h(net.act, pre_activations(net, X)))[0] + net.b2


def crelu_loss(net: CReluNet, data: Dataset) -> float:
    """``(1/2n) || W2 h(W1 X + b1 1^T) + b2 1^T - y ||_F^2``."""
    _require_real(data)
    r = crelu_forward(net, data.X) - data.y
    return float(np.sum(r.real**2 + r.imag**2) / (2 * data.n))


@dataclass(frozen=True)
class LinearBaseline:
    w_bar: np.ndarray  # length d+1, bias last
    y_bar: np.ndarray
    ell: float


def augmented(X: np.ndarray) -> np.ndarray:
    return np.vstack([X, np.ones((1, X.shape[1]))])


def linear_baseline(data: Dataset) -> LinearBaseline:
    """Minimum-norm least-squares affine fit ``w_bar [X; 1^T] ~ y``."""
    _require_real(data)
    Xt = augmented(data.X)
    w = la.lstsq(Xt.T, data.y)
    y_bar = w @ Xt
    r = y_bar - data.y
    return LinearBaseline(w, y_bar, float(np.sum(np.abs(r) ** 2) / (2 * data.n)))


def eta_for(y_bar: np.ndarray) -> complex:
    """Output bias of the construction: each part is ``min(-1, 2 min_i part(y_bar_i))``."""
    return complex(min(-1.0, 2 * float(np.min(y_bar.real))), min(-1.0, 2 * float(np.min(y_bar.imag))))


def construct_local_min(
    data: Dataset, k: int = 2, alpha: float = 1.0, act: PiecewiseActivation = CRELU
) -> CReluNet:
    """Network whose loss equals the best affine loss and which is a local minimum.

    The first hidden unit carries ``alpha (w_bar x + w_bar_bias - eta)``, every other
    unit the constant ``-alpha eta``. Because ``eta`` has real and imaginary parts at
    most -1, all pre-activations sit strictly inside the open first quadrant, where
    ``h`` is linear with slope ``s+``.

    Raises:
        LinearlyFittable: if the affine fit is exact (best affine loss <= 1e-12).
        NotReal: if the dataset has imaginary parts.
    """
    if k < 2:
        raise DimensionMismatch("hidden layer needs width at least 2")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    base = linear_baseline(data)
    if base.ell <= 1e-12:
        raise LinearlyFittable(f"an affine model fits the data (loss {base.ell:.3e})")
    d = data.d
    eta = eta_for(base.y_bar)
    W1 = np.zeros((k, d), dtype=np.complex128)
    W1[0] = alpha * base.w_bar[:d]
    b1 = np.full(k, -alpha * eta, dtype=np.complex128)
    b1[0] = alpha * (base.w_bar[d] - eta)
    W2 = np.zeros((1, k), dtype=np.complex128)
    W2[0, 0] = 1.0 / (alpha * act.s_plus)
    return CReluNet(W1, b1, W2, eta, act)


def pre_activation_margin(net: CReluNet, data: Dataset) -> float:
    """Smallest real or imaginary part over all pre-activations on the dataset."""
    z = pre_activations(net, data.X)
    return float(min(np.min(z.real), np.min(z.imag)))


def safe_radius(net: CReluNet, data: Dataset) -> float:
    """Largest perturbation norm that keeps every pre-activation in the first quadrant.

    A joint perturbation of Frobenius norm ``r`` moves a pre-activation by at most
    ``r (1 + max_i ||x_i||_1)``; the bound keeps that under half the margin.
    """
    margin = pre_activation_margin(net, data)
    if margin <= 0:
        return 0.0
    spread = float(np.max(np.sum(np.abs(data.X), axis=0)))
    return margin / (2 * (1 + spread))


@dataclass(frozen=True)
class Perturbation:
    eps1: np.ndarray
    delta1: np.ndarray
    eps2: np.ndarray
    delta2: complex

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(p) ** 2) for p in (self.eps1, self.delta1, self.eps2, self.delta2))))

    def apply(self, net: CReluNet) -> CReluNet:
        return CReluNet(net.W1 + self.eps1, net.b1 + self.delta1, net.W2 + self.eps2, net.b2 + self.delta2, net.act)


def random_perturbation(net: CReluNet, radius: float, rng: np.random.Generator) -> Perturbation:
    def draw(shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    p = Perturbation(draw(net.W1.shape), draw(net.b1.shape), draw(net.W2.shape), complex(*rng.standard_normal(2)))
    s = radius / p.norm()
    return Perturbation(p.eps1 * s, p.delta1 * s, p.eps2 * s, p.delta2 * s)


def linear_region_increase(net: CReluNet, data: Dataset, p: Perturbation) -> float:
    """Exact loss increase for a perturbation that keeps every unit in the linear region.

    The output moves by ``s+ (W2 e1 + e2 W1 + e2 e1) X + (s+ (W2 d1 + e2 b1 + e2 d1) + d2) 1^T``,
    a complex combination of the rows of ``[X; 1^T]``. The baseline residual is
    orthogonal to those rows, so the cross term vanishes and only the squared
    norm of the move remains.
    """
    s = net.act.s_plus
    X = data.X
    lin = s * (net.W2 @ p.eps1 + p.eps2 @ net.W1 + p.eps2 @ p.eps1) @ X
    const = s * (net.W2 @ p.delta1 + p.eps2 @ net.b1 + p.eps2 @ p.delta1) + p.delta2
    move = lin[0] + const[0]
    return float(np.sum(np.abs(move) ** 2) / (2 * data.n))


@dataclass(frozen=True)
class LocalMinReport:
    is_local_min_sampled: bool
    base_loss: float
    min_sampled_loss: float
    worst_violation: float
    radius: float
    samples: int


def verify_local_min(
    net: CReluNet, data: Dataset, radius: float, samples: int = 500, seed: int = 0
) -> LocalMinReport:
    """Sample perturbations of norm ``radius`` and compare their loss with the base loss.

    Raises:
        RadiusTooLarge: if ``radius`` exceeds :func:`safe_radius`.
    """
    limit = safe_radius(net, data)
    if radius <= 0 or radius > limit:
        raise RadiusTooLarge(f"radius {radius:g} outside (0, {limit:g}]")
    rng = np.random.default_rng(seed)
    base = crelu_loss(net, data)
    lowest = np.inf
    for _ in range(samples):
        lowest = min(lowest, crelu_loss(random_perturbation(net, radius, rng).apply(net), data))
    violation = max(0.0, base - lowest)
    return LocalMinReport(bool(lowest >= base - LOSS_SLACK), base, float(lowest), violation, radius, samples)


# ------------------------------------------------------------------- spuriousness check


def _loss_and_grads(W1, b1, w2, b2, X, y, act):
    n = X.shape[1]
    Z = W1 @ X + b1[:, None]
    H = act.real_part(Z.real) + 1j * act.real_part(Z.imag)
    r = w2 @ H + b2 - y
    value = float(np.sum(r.real**2 + r.imag**2)) / (2 * n)
    # R^2-gradients packed as d/dRe + i d/dIm
    g_w2 = r @ np.conj(H).T / n
    g_b2 = np.sum(r) / n
    g_H = np.outer(np.conj(w2), r) / n
    g_Z = g_H.real * act.slope(Z.real) + 1j * g_H.imag * act.slope(Z.imag)
    g_W1 = g_Z @ X.T
    g_b1 = np.sum(g_Z, axis=1)
    return value, g_W1, g_b1, g_w2, g_b2


def crelu_gradients(net: CReluNet, data: Dataset):
    """Loss and its (sub)gradients in the real embedding, as ``d/dRe + i d/dIm``."""
    _require_real(data)
    return _loss_and_grads(net.W1, net.b1, net.W2[0], net.b2, data.X, data.y, net.act)


@dataclass(frozen=True)
class SpuriousReport:
    net_loss: float
    best_loss: float
    better_loss_found: Optional[float]
    is_spurious: bool
    runs: int


def verify_spurious(
    net: CReluNet,
    data: Dataset,
    inits: int = 10,
    iters: int = 5000,
    seed: int = 0,
    step: float = 0.05,
) -> SpuriousReport:
    """Look for a strictly better network by plain subgradient descent from random starts.

    Stops at the first run whose loss ends more than 1e-6 below ``net``'s loss.
    """
    _require_real(data)
    target = crelu_loss(net, data)
    rng = np.random.default_rng(seed)
    k, d = net.k, net.d
    best = np.inf
    runs = 0
    for _ in range(inits):
        runs += 1
        W1 = rng.standard_normal((k, d)) + 1j * rng.standard_normal((k, d))
        b1 = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        w2 = 0.5 * (rng.standard_normal(k) + 1j * rng.standard_normal(k))
        b2 = 0j
        for _ in range(iters):
            value, gW1, gb1, gw2, gb2 = _loss_and_grads(W1, b1, w2, b2, data.X, data.y, net.act)
            best = min(best, value)
            W1 = W1 - step * gW1
            b1 = b1 - step * gb1
            w2 = w2 - step * gw2
            b2 = b2 - step * gb2
        value = _loss_and_grads(W1, b1, w2, b2, data.X, data.y, net.act)[0]
        best = min(best, value)
        if best < target - 1e-6:
            break
    found = best < target - 1e-6
    return SpuriousReport(target, float(best), float(best) if found else None, bool(found), runs)
