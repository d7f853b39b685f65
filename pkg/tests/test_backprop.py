import numpy as np
import pytest

from dipe_linear.backprop import backward, rfft_adjoint
from dipe_linear import spectral
from dipe_linear.exceptions import DimensionError, NumericError
from dipe_linear.losses import LossConfig, compute_loss, freq_loss_weights
from dipe_linear.model import ModelConfig, init_params, model_forward
from oracles import central_difference


def make_instance(rng, C, L, H, M, tau=1.0, **kw):
    cfg = ModelConfig(L, H, C, M, **kw)
    p = init_params(cfg, int(rng.integers(1 << 30)))
    if p.theta_sfa is not None:
        p.theta_sfa[:] = rng.normal(1.0, 0.4, p.theta_sfa.shape)
    if p.theta_sta is not None:
        p.theta_sta[:] = rng.normal(1.0, 0.4, p.theta_sta.shape)
    p.theta_ifm[:] = 0.3 * (rng.normal(size=p.theta_ifm.shape) + 1j * rng.normal(size=p.theta_ifm.shape))
    p.beta_ifm[:] = 0.3 * (rng.normal(size=p.beta_ifm.shape) + 1j * rng.normal(size=p.beta_ifm.shape))
    if p.router is not None:
        p.router.logits[:] = rng.normal(size=p.router.logits.shape)
        p.router.temperature = tau
    B = int(rng.integers(1, 4))
    x = rng.normal(size=(B, C, L))
    y = rng.normal(size=(B, C, H))
    return cfg, p, x, y


def fd_check(cfg, p, x, y, alpha, tol=1e-5):
    loss_cfg = LossConfig(alpha)
    frozen = freq_loss_weights(p, cfg)

    def f():
        return compute_loss(y, model_forward(x, p, cfg), frozen, loss_cfg).total

    _, grads = backward(x, y, p, cfg, loss_cfg)
    worst = 0.0
    for name, arr in p.arrays().items():
        num = central_difference(f, arr)
        ana = getattr(grads, name)
        assert ana.shape == arr.shape, name
        err = np.max(np.abs(ana - num) / np.maximum(1.0, np.abs(num)))
        worst = max(worst, err)
        assert err <= tol, f"{name}: {err}"
    return worst


def test_fd_spec_instance(rng):
    cfg, p, x, y = make_instance(rng, 3, 16, 8, 2, tau=0.7)
    for alpha in (0.0, 0.5, 1.0):
        fd_check(cfg, p, x, y, alpha)


@pytest.mark.parametrize("seed", range(8))
def test_fd_random_instances(seed):
    rng = np.random.default_rng(100 + seed)
    C = int(rng.integers(1, 5))
    M = int(rng.integers(1, min(C, 3) + 1))
    L = int(rng.integers(2, 33))
    H = int(rng.integers(1, 17))
    cfg, p, x, y = make_instance(rng, C, L, H, M, tau=float(rng.uniform(0.3, 3)))
    fd_check(cfg, p, x, y, [0.0, 0.5, 1.0][seed % 3])


@pytest.mark.parametrize("kw", [
    dict(use_sfa=False), dict(use_sta=False), dict(use_sfa=False, use_sta=False),
    dict(sfa_sharing="full"), dict(sta_sharing="shared", ifm_sharing="full"),
])
def test_fd_ablation_and_sharing(rng, kw):
    cfg, p, x, y = make_instance(rng, 3, 12, 6, 2, tau=1.3, **kw)
    fd_check(cfg, p, x, y, 0.5)


def test_detachment_frozen_copy(rng):
    # with alpha = 1 only the spectral term acts; its theta_sfa gradient must
    # be the one obtained with the weights held fixed
    cfg, p, x, y = make_instance(rng, 2, 10, 5, 1)
    loss_cfg = LossConfig(1.0)
    frozen = freq_loss_weights(p, cfg).copy()
    _, g_default = backward(x, y, p, cfg, loss_cfg)
    _, g_frozen = backward(x, y, p, cfg, loss_cfg, loss_weights=frozen)
    np.testing.assert_array_equal(g_default.theta_sfa, g_frozen.theta_sfa)

    # and it differs from the gradient that would include the weighting path
    def live():
        return compute_loss(y, model_forward(x, p, cfg), freq_loss_weights(p, cfg), loss_cfg).total

    undetached = central_difference(live, p.theta_sfa)
    assert np.max(np.abs(undetached - g_default.theta_sfa)) > 1e-6


def test_loss_matches_forward(rng):
    cfg, p, x, y = make_instance(rng, 3, 16, 8, 2)
    loss, _ = backward(x, y, p, cfg, LossConfig(0.3))
    ref = compute_loss(y, model_forward(x, p, cfg), freq_loss_weights(p, cfg), LossConfig(0.3))
    assert loss.total == pytest.approx(ref.total, abs=1e-13)
    assert loss.total == pytest.approx(0.3 * loss.l_freq + 0.7 * loss.l_time, abs=1e-12)


def test_zero_residual_zero_time_gradient(rng):
    cfg, p, x, _ = make_instance(rng, 2, 12, 6, 2)
    y = model_forward(x, p, cfg)
    loss, grads = backward(x, y, p, cfg, LossConfig(0.0))
    assert loss.total == 0.0
    for g in grads.arrays().values():
        assert np.max(np.abs(g)) < 1e-13


def test_gradients_congruent(rng):
    cfg, p, x, y = make_instance(rng, 4, 20, 10, 3)
    _, grads = backward(x, y, p, cfg, LossConfig())
    pa, ga = p.arrays(), grads.arrays()
    assert set(pa) == set(ga)
    for k in pa:
        assert pa[k].shape == ga[k].shape and pa[k].dtype == ga[k].dtype


def test_single_sample_input(rng):
    cfg, p, x, y = make_instance(rng, 2, 8, 4, 1)
    l1, g1 = backward(x[0], y[0], p, cfg, LossConfig())
    l2, g2 = backward(x[:1], y[:1], p, cfg, LossConfig())
    assert l1.total == l2.total
    np.testing.assert_array_equal(g1.theta_ifm, g2.theta_ifm)


def test_target_shape_mismatch(rng):
    cfg, p, x, y = make_instance(rng, 2, 8, 4, 1)
    with pytest.raises(DimensionError):
        backward(x, y[..., :3], p, cfg, LossConfig())


def test_non_finite_stage_named(rng):
    cfg, p, x, y = make_instance(rng, 2, 8, 4, 1)
    p.theta_sta[0, 3] = np.inf
    with pytest.raises(NumericError, match="sta"):
        backward(x, y, p, cfg, LossConfig())


@pytest.mark.parametrize("n", [1, 2, 7, 8])
def test_rfft_adjoint_inner_product(rng, n):
    # <rfft(y), g> in the real (re, im) pairing equals <y, adjoint(g)>
    y = rng.normal(size=n)
    g = rng.normal(size=n // 2 + 1) + 1j * rng.normal(size=n // 2 + 1)
    lhs = np.sum((spectral.rfft(y) * np.conj(g)).real)
    rhs = np.dot(y, rfft_adjoint(g, n))
    assert abs(lhs - rhs) < 1e-12
