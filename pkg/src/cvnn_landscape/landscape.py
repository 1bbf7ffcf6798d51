"""Global-optimality certificates, saddle directions and descent experiments.

The network output ``x^T W^T diag(v) W x`` only depends on the symmetric matrix
``M = W^T diag(v) W``, and the loss is a convex least-squares problem in ``M``.
The residual matrix ``(1/2n) sum_i conj(L_i) x_i x_i^T`` vanishes exactly at the
minimizers of that problem, which gives a checkable global-optimality
certificate. When it does not vanish and ``diag(v) W`` is rank deficient, a
direction ``U = a b^T`` with ``diag(v) a`` in ``Null(W^T)`` has negative
curvature.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import linalg_core as la
from .errors import AlreadyOptimal, DimensionMismatch, Divergence, FullRank, LandscapeError, RangeError
from .quadratic_net import Dataset, QuadNet, hessian_w, loss, quad_form, residuals

log = logging.getLogger(__name__)

MIN_STEP_FRACTION = 1e-10
ROUNDING_SLACK = 8 * np.finfo(float).eps
DIVERGENCE_LOSS = 1e12


class DegenerateNullSpace(LandscapeError):
    """Every ``a`` with ``diag(v) a`` in ``Null(W^T)`` has ``a^T diag(v) a = 0``.

    Rescaling ``(v_i, w_i) -> (v_i / 4, 2 w_i)`` cannot fix this: once ``a`` is
    re-solved for the rescaled weights the quadratic form is unchanged.
    """


# --------------------------------------------------------------------------- fixtures


@dataclass(frozen=True)
class TrapFixture:
    dataset: Dataset
    w_bar: np.ndarray
    v_bar: np.ndarray

    @property
    def net(self) -> QuadNet:
        return QuadNet(self.w_bar, self.v_bar)


def trap_fixture() -> TrapFixture:
    """Three-point dataset with a real-weight poor local minimum at ``W = 1, v = (1/6, 1/6)``."""
    X = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]])
    y = np.array([0.0, 0.0, 1.0])
    return TrapFixture(Dataset(X, y), np.ones((2, 2), dtype=np.complex128), np.full(2, 1 / 6, dtype=np.complex128))


def trap_real_hessian() -> np.ndarray:
    """Expected real Hessian in ``W`` at the trap point (PSD, one zero eigenvalue)."""
    return np.array([[7, -1, 5, 1], [-1, 7, 1, 5], [5, 1, 7, -1], [1, 5, -1, 7]]) / 108.0


def trap_block_hessian() -> np.ndarray:
    """Expected Wirtinger block matrix at the trap point, built from three 2x2 blocks."""
    H1 = np.array([[5.0, 1.0], [1.0, 5.0]]) / 216
    H2 = np.array([[1.0, -1.0], [-1.0, 1.0]]) / 108
    H3 = np.zeros((2, 2))
    return np.block([[H1, H1, H2, H3], [H1, H1, H3, H2], [H2, H3, H1, H1], [H3, H2, H1, H1]])


def lemma24_point(N: int) -> tuple[np.ndarray, float]:
    """Perturbed trap weights ``1 - 10^-N`` (first column) and ``1 + i 10^-N`` (second column).

    Returns the weight matrix and the exact loss with the trap ``v``::

        (96 t^4 + 160 t^2 - 80 t + 36) / (864 t^4),   t = 10^N

    which is ``1/9 + (160 t^2 - 80 t + 36) / (864 t^4)``: this perturbation raises the
    loss for every N. See :func:`null_direction_point` for one that lowers it.

    Raises:
        RangeError: if N is not an integer in [1, 15].
    """
    if not isinstance(N, (int, np.integer)) or not 1 <= N <= 15:
        raise RangeError(f"N must be an integer in [1, 15], got {N!r}")
    eps = 10.0 ** (-int(N))
    W = np.array([[1 - eps, 1 + 1j * eps], [1 - eps, 1 + 1j * eps]])
    # divided through by t^4 to stay finite in double precision
    closed = (96 + 160 * eps**2 - 80 * eps**3 + 36 * eps**4) / 864
    return W, closed


def null_direction_point(t: float) -> tuple[np.ndarray, float]:
    """Trap weights moved by ``t a b^T`` with ``a = (1, -1)`` and ``b = (i, -i)``.

    ``a`` spans ``Null(W^T)`` at the trap. The residuals become ``(1 - t^2)/3`` on
    the first two samples and stay at ``-2/3`` on the third, so the exact loss is
    ``1/9 - (2 t^2 - t^4) / 27``, below 1/9 for ``0 < t < sqrt(2)``. The real
    counterpart ``b = (1, -1)`` raises the loss instead.
    """
    W = np.array([[1 + 1j * t, 1 - 1j * t], [1 - 1j * t, 1 + 1j * t]])
    return W, 1 / 9 - (2 * t**2 - t**4) / 27


# ------------------------------------------------------------------ global optimality


def optimality_residual(net: QuadNet, data: Dataset) -> np.ndarray:
    """``(1/2n) sum_i conj(L_i) x_i x_i^T``; zero exactly at global minima."""
    r = residuals(net, data)
    return (data.X * np.conj(r)) @ data.X.T / (2 * data.n)


def _sym_design(X: np.ndarray) -> tuple[np.ndarray, list[tuple[int, int]]]:
    d = X.shape[0]
    pairs = [(j, l) for j in range(d) for l in range(j, d)]
    cols = [(1.0 if j == l else 2.0) * X[j] * X[l] for j, l in pairs]
    return np.stack(cols, axis=1), pairs


@dataclass(frozen=True)
class OracleResult:
    M_star: np.ndarray
    min_loss: float


def global_min_oracle(data: Dataset) -> OracleResult:
    """Minimize ``(1/2n) sum_i |x_i^T M x_i - y_i|^2`` over complex symmetric ``M``.

    Only the symmetric part of ``M`` is visible to the quadratic form, so the
    unknowns are its upper triangle. Any symmetric ``M`` is ``W^T W`` for some
    square ``W`` (Takagi), so the value bounds the network loss from below and is
    attained by it.
    """
    A, pairs = _sym_design(data.X)
    mu = la.lstsq(A, data.y)
    d = data.d
    M = np.zeros((d, d), dtype=np.complex128)
    for (j, l), m in zip(pairs, mu):
        M[j, l] = M[l, j] = m
    fit = np.einsum("ji,jl,li->i", data.X, M, data.X) - data.y
    return OracleResult(M, float(np.sum(np.abs(fit) ** 2) / (2 * data.n)))


def net_from_matrix(M: np.ndarray, k: Optional[int] = None) -> QuadNet:
    """A network with ``W^T diag(1) W = M``: Takagi factor padded with zero rows to k rows."""
    A = la.takagi_factor(M)
    d = A.shape[0]
    k = d if k is None else k
    if k < d:
        raise DimensionMismatch(f"need k >= d, got k={k}, d={d}")
    W = np.zeros((k, d), dtype=np.complex128)
    W[:d] = A
    return QuadNet(W, np.ones(k))


@dataclass(frozen=True)
class OptimalityReport:
    residual_matrix: np.ndarray
    residual_norm: float
    global_min_loss: float
    loss_at_point: float
    gap: float
    is_global: bool
    tolerance: float


def _residual_tolerance(data: Dataset) -> float:
    scale = float(np.max(np.abs(data.X))) ** 2 * (1.0 + float(np.max(np.abs(data.y))))
    return 1e-8 * (1.0 + scale)


def certify(net: QuadNet, data: Dataset, tol: Optional[float] = None) -> OptimalityReport:
    R = optimality_residual(net, data)
    oracle = global_min_oracle(data)
    value = loss(net, data)
    tol = _residual_tolerance(data) if tol is None else tol
    norm = float(np.linalg.norm(R))
    return OptimalityReport(
        residual_matrix=R,
        residual_norm=norm,
        global_min_loss=oracle.min_loss,
        loss_at_point=value,
        gap=value - oracle.min_loss,
        is_global=norm <= tol,
        tolerance=tol,
    )


# ------------------------------------------------------------------- saddle direction


@dataclass(frozen=True)
class SaddleCertificate:
    """Negative-curvature direction ``U = a b^T`` at a rank-deficient, non-optimal point.

    ``quad_value`` is the Wirtinger quadratic form along ``U`` and
    ``algebraic_value`` is ``Re((1/n)(a^T D_v a) b^T Msum b)`` with
    ``Msum = sum_i conj(L_i) x_i x_i^T``; the two satisfy
    ``quad_value = 2 * algebraic_value``.
    """

    a: np.ndarray
    b: np.ndarray
    quad_value: float
    algebraic_value: float

    @property
    def direction(self) -> np.ndarray:
        return np.outer(self.a, self.b)


def _pick_a(null: np.ndarray, v: np.ndarray) -> np.ndarray:
    # coefficients c in the null basis give a = D_v^{-1} N c and a^T D_v a = c^T S c
    S = null.T @ (null / v[:, None])
    m = S.shape[0]
    scale = max(1.0, float(np.max(np.abs(S))))
    candidates = [np.eye(m)[j] for j in range(m)]
    candidates += [np.eye(m)[j] + np.eye(m)[l] for j in range(m) for l in range(j + 1, m)]
    best = max(candidates, key=lambda c: abs(c @ S @ c))
    if abs(best @ S @ best) <= 1e-12 * scale:
        raise DegenerateNullSpace("a^T diag(v) a vanishes on the whole admissible set")
    a = (null @ best) / v
    return a / np.linalg.norm(a)


def _pick_b(z1: complex, Msum: np.ndarray) -> np.ndarray:
    d = Msum.shape[0]
    best, best_val = None, np.inf
    for i in range(d):
        t = z1 * Msum[i, i]
        if abs(t) > 0:
            b = np.zeros(d, dtype=np.complex128)
            b[i] = np.sqrt(-np.conj(t) / abs(t))
            val = float(np.real(z1 * (b @ Msum @ b)))
            if val < best_val:
                best, best_val = b, val
        for j in range(i + 1, d):
            t = z1 * Msum[i, j]
            if abs(t) > 0:
                b = np.zeros(d, dtype=np.complex128)
                b[i] = 1.0 / np.sqrt(2)
                b[j] = -np.conj(t) / abs(t) / np.sqrt(2)
                val = float(np.real(z1 * (b @ Msum @ b)))
                if val < best_val:
                    best, best_val = b, val
    return best


def saddle_direction(
    net: QuadNet, data: Dataset, rank_tol: float = la.DEFAULT_RANK_TOL, residual_tol: float = 1e-8
) -> SaddleCertificate:
    """Build a direction of strictly negative curvature.

    Raises:
        FullRank: if ``rank(diag(v) W) = d``.
        AlreadyOptimal: if the optimality residual is below ``residual_tol``.
        DegenerateNullSpace: if no admissible ``a`` has ``a^T diag(v) a != 0``.
    """
    if net.d != data.d:
        raise DimensionMismatch(f"network expects d={net.d} inputs, dataset has d={data.d}")
    DvW = net.v[:, None] * net.W
    if la.numerical_rank(DvW, rank_tol) >= net.d:
        raise FullRank("diag(v) W has full column rank")
    R = optimality_residual(net, data)
    if np.linalg.norm(R) <= residual_tol:
        raise AlreadyOptimal("optimality residual vanishes")
    Msum = 2 * data.n * R

    a = _pick_a(la.null_space(net.W.T, rank_tol), net.v)
    z1 = complex(a @ (net.v * a))
    b = _pick_b(z1, Msum)
    algebraic = float(np.real(z1 * (b @ Msum @ b))) / data.n
    value = quad_form(hessian_w(net, data), np.outer(a, b))
    if not value < 0:
        raise LandscapeError(f"constructed direction has non-negative curvature {value:g}")
    return SaddleCertificate(a=a, b=b, quad_value=value, algebraic_value=algebraic)


# ---------------------------------------------------------------------------- descent


@dataclass
class DescentConfig:
    step: float = 0.05
    max_iters: int = 5000
    perturb_radius: float = 1e-3
    grad_tol: float = 1e-8
    seed: int = 0
    real: bool = False
    max_perturbations: int = 10
    gap_tol: float = 1e-6
    step_growth: float = 1.05
    max_step: float = 1.0


@dataclass
class DescentResult:
    final_net: QuadNet
    final_loss: float
    iterations: int
    trajectory: list[float]
    grad_norm: float
    perturbations: int


def _state(W, v, X, y, n):
    hx = W @ X
    sq = hx * hx
    r = v @ sq - y
    value = float(np.sum(r.real**2 + r.imag**2)) / (2 * n)
    return hx, sq, r, value


def _grads(W, v, X, sq, r, n):
    rc = np.conj(r)
    gW = (v[:, None] * W) @ ((X * rc) @ X.T) / n
    gv = sq @ rc / (2 * n)
    return gW, gv


def descend(net: QuadNet, data: Dataset, cfg: Optional[DescentConfig] = None) -> DescentResult:
    """Wirtinger gradient descent on ``(W, v)`` with backtracking and saddle-escape kicks.

    Each step moves against ``2 conj(dL/dW)``, which is the gradient of the loss in
    R^{2kd}. A step that raises the loss is rejected and the step size halved;
    accepted steps multiply it by ``step_growth`` (capped at ``max_step``). When the
    gradient norm drops below ``grad_tol`` while the loss is more than ``gap_tol``
    above the oracle minimum, a random kick of norm ``perturb_radius`` is applied,
    at most ``max_perturbations`` times. With ``real=True`` all iterates, kicks
    included, are kept real.

    Raises:
        Divergence: if the loss exceeds 1e12.
    """
    cfg = cfg or DescentConfig()
    if cfg.step <= 0:
        raise ValueError("step must be positive")
    if net.d != data.d:
        raise DimensionMismatch(f"network expects d={net.d} inputs, dataset has d={data.d}")
    rng = np.random.default_rng(cfg.seed)
    X, y, n = data.X, data.y, data.n
    W, v = net.W.copy(), net.v.copy()
    if cfg.real:
        W, v = W.real.astype(np.complex128), v.real.astype(np.complex128)
    target = global_min_oracle(data).min_loss

    _, sq, r, value = _state(W, v, X, y, n)
    gW, gv = _grads(W, v, X, sq, r, n)
    step = cfg.step
    trajectory = [value]
    kicks = 0
    it = 0
    gnorm = float(np.sqrt(np.sum(np.abs(gW) ** 2) + np.sum(np.abs(gv) ** 2)))
    while it < cfg.max_iters:
        if gnorm < cfg.grad_tol:
            if value - target <= cfg.gap_tol or kicks >= cfg.max_perturbations or cfg.perturb_radius <= 0:
                break
            dW = rng.standard_normal(W.shape) + (0 if cfg.real else 1j * rng.standard_normal(W.shape))
            dv = rng.standard_normal(v.shape) + (0 if cfg.real else 1j * rng.standard_normal(v.shape))
            scale = cfg.perturb_radius / np.sqrt(np.sum(np.abs(dW) ** 2) + np.sum(np.abs(dv) ** 2))
            W, v = W + scale * dW, v + scale * dv
            kicks += 1
            log.debug("kick %d at iteration %d, loss %.3e", kicks, it, value)
            _, sq, r, value = _state(W, v, X, y, n)
            gW, gv = _grads(W, v, X, sq, r, n)
            gnorm = float(np.sqrt(np.sum(np.abs(gW) ** 2) + np.sum(np.abs(gv) ** 2)))
            continue
        it += 1
        W_new = W - 2 * step * np.conj(gW)
        v_new = v - 2 * step * np.conj(gv)
        if cfg.real:
            W_new, v_new = W_new.real.astype(np.complex128), v_new.real.astype(np.complex128)
        _, sq_new, r_new, new_value = _state(W_new, v_new, X, y, n)
        if not np.isfinite(new_value) or new_value > DIVERGENCE_LOSS:
            raise Divergence(f"loss {new_value:g} exceeded {DIVERGENCE_LOSS:g} at iteration {it}")
        # changes within rounding of the loss count as non-increasing
        if new_value > value + ROUNDING_SLACK * abs(value):
            step *= 0.5
            trajectory.append(value)
            if step < cfg.step * MIN_STEP_FRACTION:
                # no representable decrease left
                break
            continue
        W, v, sq, r, value = W_new, v_new, sq_new, r_new, new_value
        step = min(step * cfg.step_growth, max(cfg.max_step, cfg.step))
        gW, gv = _grads(W, v, X, sq, r, n)
        gnorm = float(np.sqrt(np.sum(np.abs(gW) ** 2) + np.sum(np.abs(gv) ** 2)))
        trajectory.append(value)
    return DescentResult(QuadNet(W, v), value, it, trajectory, gnorm, kicks)


# ------------------------------------------------------------------------- experiment


@dataclass
class ExperimentConfig:
    d: int = 2
    k: int = 2
    n: int = 6
    instances: int = 20
    inits: int = 10
    seed: int = 7
    step: float = 0.05
    tol: float = 1e-8
    gap: float = 1e-4
    max_iters: int = 20000
    step_growth: float = 1.05
    real_projected: bool = False
    seed_trap: bool = False


@dataclass
class ExperimentSummary:
    config: dict
    per_instance: list[dict] = field(default_factory=list)
    instances_run: int = 0
    converged_runs: int = 0
    max_gap: Optional[float] = None
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _normal(rng: np.random.Generator, shape, real: bool) -> np.ndarray:
    if real:
        return rng.standard_normal(shape).astype(np.complex128)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _run_seed(seed: int, instance: int, init: int) -> int:
    return int(np.random.SeedSequence([seed, instance, init]).generate_state(1)[0])


def run_instance(cfg: ExperimentConfig, instance: int) -> list[dict]:
    """All descent runs for one random instance; depends only on ``(cfg, instance)``."""
    rng = np.random.default_rng([cfg.seed, instance])
    real = cfg.real_projected
    trap = cfg.seed_trap and instance == cfg.instances
    if trap:
        fx = trap_fixture()
        data = fx.dataset
    else:
        data = Dataset(_normal(rng, (cfg.d, cfg.n), real), _normal(rng, cfg.n, real))
    target = global_min_oracle(data).min_loss
    records = []
    for init in range(cfg.inits):
        if trap and init == 0:
            start = fx.net
        else:
            start = QuadNet(_normal(rng, (cfg.k, cfg.d), real), _normal(rng, cfg.k, real))
        dcfg = DescentConfig(
            step=cfg.step,
            max_iters=cfg.max_iters,
            grad_tol=cfg.tol,
            seed=_run_seed(cfg.seed, instance, init),
            real=real,
            step_growth=cfg.step_growth,
        )
        try:
            res = descend(start, data, dcfg)
        except Divergence as exc:
            records.append({"instance": instance, "init_index": init, "error": str(exc), "converged": False})
            continue
        records.append({
            "instance": instance,
            "init_index": init,
            "final_loss": res.final_loss,
            "grad_norm": res.grad_norm,
            "gap": res.final_loss - target,
            "iterations": res.iterations,
            "perturbations": res.perturbations,
            "converged": res.grad_norm < cfg.tol,
            "trap_start": bool(trap and init == 0),
        })
    return records


def no_spurious_experiment(cfg: ExperimentConfig) -> ExperimentSummary:
    """Descend from random starts on random instances and compare with the oracle minimum.

    A run converges when its final gradient norm is below ``cfg.tol``. With
    complex weights every converged run should reach the global minimum value.
    With ``seed_trap`` an extra instance is added: the three-point trap dataset,
    whose first run starts at the trap weights (needs ``d = k = 2``).
    """
    if cfg.k < cfg.d:
        raise DimensionMismatch(f"need k >= d, got k={cfg.k}, d={cfg.d}")
    if cfg.seed_trap and (cfg.d, cfg.k) != (2, 2):
        raise ValueError("seed_trap requires d = k = 2")
    summary = ExperimentSummary(config=asdict(cfg))
    total = cfg.instances + (1 if cfg.seed_trap else 0)
    for instance in range(total):
        records = run_instance(cfg, instance)
        summary.per_instance.extend(records)
        summary.instances_run += 1
    converged = [r for r in summary.per_instance if r["converged"]]
    summary.converged_runs = len(converged)
    if converged:
        summary.max_gap = max(r["gap"] for r in converged)
    summary.failures = [r for r in converged if r["gap"] >= cfg.gap]
    return summary
