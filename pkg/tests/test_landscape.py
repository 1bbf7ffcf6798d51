import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvnn_landscape import landscape as ls
from cvnn_landscape import linalg_core as la
from cvnn_landscape import quadratic_net as qn
from cvnn_landscape.errors import AlreadyOptimal, Divergence, FullRank, RangeError
from conftest import crandn

seeds = st.integers(0, 2**32 - 1)


def rank_deficient_instance(rng, d=None):
    d = d or int(rng.integers(2, 4))
    k = int(rng.integers(d, d + 3))
    W = crandn(rng, k, d - 1) @ crandn(rng, d - 1, d)
    n = int(rng.integers(d * (d + 1) // 2 + 1, 9))
    return qn.QuadNet(W, crandn(rng, k)), qn.Dataset(crandn(rng, d, n), crandn(rng, n))


# ------------------------------------------------------------------- fixtures


def test_trap_constants():
    fx = ls.trap_fixture()
    assert np.array_equal(fx.dataset.X, [[1, 0, 0.5], [0, 1, 0.5]])
    assert np.array_equal(fx.dataset.y, [0, 0, 1])
    assert np.array_equal(fx.w_bar, np.ones((2, 2)))
    assert np.array_equal(fx.v_bar, [1 / 6, 1 / 6])
    assert abs(qn.loss(fx.net, fx.dataset) - 1 / 9) < 1e-14


def test_fixture_matrix_helpers_match_assembly():
    fx = ls.trap_fixture()
    assert np.max(np.abs(qn.hessian_real_embedding(fx.net, fx.dataset) - ls.trap_real_hessian())) < 1e-14
    assert np.max(np.abs(qn.hessian_w(fx.net, fx.dataset).block_matrix() - ls.trap_block_hessian())) < 1e-14


@pytest.mark.parametrize("N", range(1, 9))
def test_perturbed_trap_closed_form_matches_direct_loss(N):
    fx = ls.trap_fixture()
    W, closed = ls.lemma24_point(N)
    direct = qn.loss(qn.QuadNet(W, fx.v_bar), fx.dataset)
    assert abs(direct - closed) <= 1e-12 * closed


def test_perturbed_trap_raises_loss():
    # the column perturbation (1 - eps, 1 + i eps) moves uphill from the trap
    fx = ls.trap_fixture()
    for N in range(1, 8):
        W, closed = ls.lemma24_point(N)
        assert closed > 1 / 9
        assert qn.loss(qn.QuadNet(W, fx.v_bar), fx.dataset) > 1 / 9


def test_lemma24_range_guard():
    for bad in (0, 16, -1, 2.5):
        with pytest.raises(RangeError):
            ls.lemma24_point(bad)


@pytest.mark.parametrize("t", [1e-1, 1e-2, 1e-3, 1e-4, 1e-5])
def test_null_direction_point_lowers_loss(t):
    fx = ls.trap_fixture()
    W, closed = ls.null_direction_point(t)
    direct = qn.loss(qn.QuadNet(W, fx.v_bar), fx.dataset)
    assert abs(direct - closed) <= 1e-12 * closed
    assert direct < 1 / 9
    # the real analogue of the same null direction goes uphill
    Wr = np.array([[1 + t, 1 - t], [1 - t, 1 + t]])
    assert qn.loss(qn.QuadNet(Wr, fx.v_bar), fx.dataset) > 1 / 9


# ------------------------------------------------------------- global oracle


def test_oracle_on_trap_dataset():
    fx = ls.trap_fixture()
    res = ls.global_min_oracle(fx.dataset)
    assert res.min_loss < 1e-28
    assert np.allclose(res.M_star, res.M_star.T)


def test_oracle_zero_targets():
    rng = np.random.default_rng(0)
    res = ls.global_min_oracle(qn.Dataset(crandn(rng, 2, 5), np.zeros(5)))
    assert np.allclose(res.M_star, 0) and res.min_loss == 0


@given(seeds)
def test_oracle_interpolates_when_underdetermined(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    n = int(rng.integers(1, d * (d + 1) // 2 + 1))
    assert ls.global_min_oracle(qn.Dataset(crandn(rng, d, n), crandn(rng, n))).min_loss < 1e-20


@given(seeds)
def test_oracle_bounds_every_network(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    data = qn.Dataset(crandn(rng, d, 8), crandn(rng, 8))
    floor = ls.global_min_oracle(data).min_loss
    for _ in range(10):
        k = int(rng.integers(d, 5))
        net = qn.QuadNet(crandn(rng, k, d), crandn(rng, k))
        assert qn.loss(net, data) >= floor - 1e-12


@given(seeds)
def test_oracle_agrees_with_full_matrix_least_squares(seed):
    # independent route: unconstrained M with all d^2 entries, minimum norm
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    data = qn.Dataset(crandn(rng, d, 9), crandn(rng, 9))
    A = np.stack([np.outer(data.X[:, i], data.X[:, i]).reshape(-1) for i in range(data.n)])
    m, *_ = np.linalg.lstsq(A, data.y, rcond=None)
    full = float(np.sum(np.abs(A @ m - data.y) ** 2) / (2 * data.n))
    assert abs(ls.global_min_oracle(data).min_loss - full) < 1e-10


# -------------------------------------------------------------- certificate


@given(seeds)
def test_constructed_global_points_certify(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    data = qn.Dataset(crandn(rng, d, 8), crandn(rng, 8))
    net = ls.net_from_matrix(ls.global_min_oracle(data).M_star, k=d + int(rng.integers(0, 2)))
    rep = ls.certify(net, data)
    assert rep.is_global and rep.residual_norm < 1e-7 and abs(rep.gap) < 1e-7
    assert np.allclose(net.v, 1)


def test_trap_does_not_certify():
    fx = ls.trap_fixture()
    rep = ls.certify(fx.net, fx.dataset)
    assert not rep.is_global
    assert rep.residual_norm > 1e-3
    assert abs(rep.gap - 1 / 9) < 1e-12


def test_zero_weights_zero_targets_are_global():
    data = qn.Dataset(np.eye(2), np.zeros(2))
    net = qn.QuadNet(np.zeros((2, 2)), [1.0, 1.0])
    assert ls.certify(net, data).is_global


@given(seeds)
def test_small_residual_means_small_gap(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    data = qn.Dataset(crandn(rng, d, 8), crandn(rng, 8))
    net = ls.net_from_matrix(ls.global_min_oracle(data).M_star, k=d)
    near = qn.QuadNet(net.W + 1e-6 * crandn(rng, d, d), net.v)
    for point in (net, near):
        rep = ls.certify(point, data)
        assert rep.gap >= -1e-9
        if rep.residual_norm <= 1e-9:
            assert rep.gap <= 1e-7
    # the residual is linear in the fit error, the gap quadratic
    rep = ls.certify(near, data)
    assert rep.gap <= 100 * rep.residual_norm**2 + 1e-12


@given(seeds)
def test_row_rescaling_leaves_residual_unchanged(seed):
    rng = np.random.default_rng(seed)
    net, data = rank_deficient_instance(rng)
    i = int(rng.integers(net.k))
    W = net.W.copy()
    v = net.v.copy()
    W[i] *= 2
    v[i] /= 4
    R0 = ls.optimality_residual(net, data)
    R1 = ls.optimality_residual(qn.QuadNet(W, v), data)
    assert np.max(np.abs(R0 - R1)) < 1e-10 * max(1.0, np.max(np.abs(R0)))


# ---------------------------------------------------------- saddle direction


def test_trap_saddle_certificate():
    fx = ls.trap_fixture()
    cert = ls.saddle_direction(fx.net, fx.dataset)
    assert cert.quad_value < 0
    assert abs(cert.quad_value - (-1 / 54)) < 1e-12
    H = qn.hessian_w(fx.net, fx.dataset)
    assert abs(qn.quad_form(H, cert.direction) - cert.quad_value) < 1e-15


@given(seeds)
def test_saddle_certificate_soundness(seed):
    rng = np.random.default_rng(seed)
    net, data = rank_deficient_instance(rng)
    cert = ls.saddle_direction(net, data)
    assert np.linalg.norm(net.W.T @ (net.v * cert.a)) <= 1e-8
    assert abs(cert.a @ (net.v * cert.a)) > 1e-12
    assert cert.quad_value < -1e-10
    assert qn.quad_form(qn.hessian_w(net, data), cert.direction) < 0
    # the curvature is real: the second difference along U agrees
    t = 1e-3
    f = [qn.loss(qn.QuadNet(net.W + s * t * cert.direction, net.v), data) for s in (-1, 0, 1)]
    fd = (f[0] + f[2] - 2 * f[1]) / t**2
    assert abs(fd - cert.quad_value) <= 1e-4 * max(1.0, abs(cert.quad_value), f[1])


@given(seeds)
def test_null_direction_reduction_identity(seed):
    rng = np.random.default_rng(seed)
    net, data = rank_deficient_instance(rng)
    N = la.null_space(net.W.T, 1e-10)
    a = (N @ crandn(rng, N.shape[1])) / net.v
    b = crandn(rng, net.d)
    R = ls.optimality_residual(net, data)
    q = qn.quad_form(qn.hessian_w(net, data), np.outer(a, b))
    reduced = 4 * np.real((a @ (net.v * a)) * (b @ R @ b))
    assert abs(q - reduced) <= 1e-8 * max(1.0, abs(q))


def test_saddle_errors():
    rng = np.random.default_rng(3)
    data = qn.Dataset(crandn(rng, 2, 6), crandn(rng, 6))
    with pytest.raises(FullRank):
        ls.saddle_direction(qn.QuadNet(crandn(rng, 2, 2), crandn(rng, 2)), data)
    fit = qn.Dataset(data.X, np.zeros(6))
    with pytest.raises(AlreadyOptimal):
        ls.saddle_direction(qn.QuadNet(np.zeros((2, 2)), [1.0, 1.0]), fit)


def test_degenerate_null_space_survives_row_rescaling():
    # v = (1, -1) on equal rows: a^T D_v a vanishes for every admissible a
    data = qn.Dataset(np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]]), np.array([0.0, 0.0, 1.0]))
    net = qn.QuadNet(np.ones((2, 2)), [1.0, -1.0])
    with pytest.raises(ls.DegenerateNullSpace):
        ls.saddle_direction(net, data)
    scaled = qn.QuadNet(np.array([[2.0, 2.0], [1.0, 1.0]]), [0.25, -1.0])
    N = la.null_space(scaled.W.T, 1e-10)
    S = N.T @ (N / scaled.v[:, None])
    assert np.max(np.abs(S)) < 1e-12
    with pytest.raises(ls.DegenerateNullSpace):
        ls.saddle_direction(scaled, data)


# ------------------------------------------------------------------- descent


def test_descent_from_global_minimum_stops():
    rng = np.random.default_rng(1)
    data = qn.Dataset(crandn(rng, 2, 6), crandn(rng, 6))
    net = ls.net_from_matrix(ls.global_min_oracle(data).M_star, k=2)
    res = ls.descend(net, data, ls.DescentConfig(grad_tol=1e-8))
    assert res.iterations == 0 and res.perturbations == 0
    assert res.final_loss == qn.loss(net, data)


def test_real_descent_stays_at_trap():
    fx = ls.trap_fixture()
    res = ls.descend(fx.net, fx.dataset, ls.DescentConfig(real=True, max_iters=1000, grad_tol=0.0))
    assert res.iterations == 1000
    assert max(abs(v - 1 / 9) for v in res.trajectory) <= 1e-12
    assert res.final_net.is_real()


def test_real_kicks_do_not_escape_trap():
    fx = ls.trap_fixture()
    res = ls.descend(fx.net, fx.dataset, ls.DescentConfig(real=True, max_iters=5000, seed=4))
    assert res.perturbations == 10
    assert min(res.trajectory) >= 1 / 9 - 1e-9


def test_complex_descent_escapes_trap():
    fx = ls.trap_fixture()
    rng = np.random.default_rng(0)
    dW, dv = crandn(rng, 2, 2), crandn(rng, 2)
    s = 1e-3 / np.sqrt(np.sum(np.abs(dW) ** 2) + np.sum(np.abs(dv) ** 2))
    start = qn.QuadNet(fx.w_bar + s * dW, fx.v_bar + s * dv)
    res = ls.descend(start, fx.dataset, ls.DescentConfig(max_iters=5000))
    assert res.final_loss < 1 / 9 - 1e-3


def test_descent_is_deterministic():
    rng = np.random.default_rng(2)
    data = qn.Dataset(crandn(rng, 2, 6), crandn(rng, 6))
    net = qn.QuadNet(crandn(rng, 2, 2), crandn(rng, 2))
    a = ls.descend(net, data, ls.DescentConfig(seed=9, max_iters=300))
    b = ls.descend(net, data, ls.DescentConfig(seed=9, max_iters=300))
    assert a.trajectory == b.trajectory


def test_descent_trajectory_is_monotone():
    rng = np.random.default_rng(5)
    data = qn.Dataset(crandn(rng, 2, 6), crandn(rng, 6))
    net = qn.QuadNet(crandn(rng, 3, 2), crandn(rng, 3))
    res = ls.descend(net, data, ls.DescentConfig(max_iters=500, perturb_radius=0.0))
    tr = np.array(res.trajectory)
    assert np.all(np.diff(tr) <= ls.ROUNDING_SLACK * tr[:-1])


def test_descent_divergence_and_step_checks():
    rng = np.random.default_rng(6)
    data = qn.Dataset(10 * crandn(rng, 2, 6), crandn(rng, 6))
    net = qn.QuadNet(10 * crandn(rng, 2, 2), crandn(rng, 2))
    with pytest.raises(Divergence):
        ls.descend(net, data, ls.DescentConfig(step=1e3))
    with pytest.raises(ValueError):
        ls.descend(net, data, ls.DescentConfig(step=0.0))


# ---------------------------------------------------------------- experiment


def test_scalar_experiment():
    s = ls.no_spurious_experiment(ls.ExperimentConfig(d=1, k=1, n=1, instances=5, inits=3))
    assert s.converged_runs > 0
    assert all(r["gap"] < 1e-6 for r in s.per_instance if r["converged"])


def test_empty_experiment():
    s = ls.no_spurious_experiment(ls.ExperimentConfig(instances=0))
    assert s.instances_run == 0 and s.converged_runs == 0 and s.max_gap is None and s.failures == []


def test_experiment_is_deterministic():
    cfg = ls.ExperimentConfig(instances=2, inits=3, max_iters=2000)
    assert ls.no_spurious_experiment(cfg).to_dict() == ls.no_spurious_experiment(cfg).to_dict()


def test_instances_are_independent_streams():
    cfg = ls.ExperimentConfig(instances=3, inits=2, max_iters=2000)
    full = ls.no_spurious_experiment(cfg).per_instance
    assert [r for r in full if r["instance"] == 2] == ls.run_instance(cfg, 2)


def test_real_projected_trap_run_is_stuck():
    cfg = ls.ExperimentConfig(instances=1, inits=2, real_projected=True, seed_trap=True, max_iters=3000)
    s = ls.no_spurious_experiment(cfg)
    trap = [r for r in s.per_instance if r.get("trap_start")]
    assert len(trap) == 1 and trap[0]["converged"] and trap[0]["gap"] > 1e-2
    assert trap[0] in s.failures


def test_experiment_guards():
    with pytest.raises(ValueError):
        ls.no_spurious_experiment(ls.ExperimentConfig(d=3, k=2))
    with pytest.raises(ValueError):
        ls.no_spurious_experiment(ls.ExperimentConfig(d=1, k=1, seed_trap=True))
