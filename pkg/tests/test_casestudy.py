import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from layerbounds.casestudy import (
    GaussianMixtureSpec,
    RotationStackConfig,
    batched_profiles,
    build_rotation_stack,
    empirical_gen_error,
    fit_mean_classifier,
    funnel_layer,
    kl_bound_profile,
    kl_bound_value,
    population_risk,
    population_risk_mc,
    rotation_layers,
    rotation_scales,
    sample_dataset,
    squared_tanh_loss,
    wasserstein_bound_profile,
    wasserstein_coefficient,
)
from layerbounds.errors import DegenerateTarget, DomainError
from layerbounds.numerics import WeightStack, make_rng

SPEC = GaussianMixtureSpec((0.5, 0.0), 1.0, 100)
targets = st.tuples(st.floats(-5, 5), st.floats(-5, 5)).filter(lambda t: math.hypot(*t) > 1e-3)


def test_sample_and_fit_shapes():
    data = sample_dataset(SPEC, make_rng(1))
    assert data.features.shape == (100, 2) and data.labels.shape == (100,)
    assert set(np.unique(data.labels)) <= {-1.0, 1.0}
    w = fit_mean_classifier(data)
    np.testing.assert_allclose(w, (data.labels[:, None] * data.features).mean(axis=0))


def test_mean_classifier_is_consistent():
    big = GaussianMixtureSpec((0.5, -0.25), 1.0, 200_000)
    w = fit_mean_classifier(sample_dataset(big, make_rng(3)))
    np.testing.assert_allclose(w, [0.5, -0.25], atol=0.01)


@given(targets, st.integers(2, 12), st.integers(0, 2 ** 32 - 1))
def test_rotation_stack_reproduces_target(t, depth, seed):
    lp = max(1, depth // 2)
    cfg = RotationStackConfig(depth, lp, 0.2)
    stack = build_rotation_stack(cfg, t, make_rng(seed))
    np.testing.assert_allclose(stack.products[-1].ravel(), t, atol=1e-9 * max(1.0, math.hypot(*t)))


@given(targets, st.integers(0, 2 ** 32 - 1))
def test_rotation_ranks(t, seed):
    stack = build_rotation_stack(RotationStackConfig(6, 3, 0.2), t, make_rng(seed))
    assert stack.ranks == (2, 2, 2, 2, 2, 2, 1)


@given(targets, st.integers(3, 12), st.floats(0.05, 1.0), st.integers(0, 2 ** 32 - 1))
def test_scale_products(t, depth, fraction, seed):
    lp = depth // 2
    norm = math.hypot(*t)
    C = rotation_scales(RotationStackConfig(depth, lp, fraction), norm, make_rng(seed), 4)
    assert np.all(C > 0)
    np.testing.assert_allclose(np.prod(C[:, :lp], axis=1), fraction * norm, rtol=1e-10)
    np.testing.assert_allclose(np.prod(C, axis=1), norm, rtol=1e-10)


def test_equal_scales():
    C = rotation_scales(RotationStackConfig(4, 2, 0.2, "equal"), 16.0, make_rng(0), 2)
    np.testing.assert_allclose(C, 2.0)


def test_degenerate_target():
    with pytest.raises(DegenerateTarget):
        build_rotation_stack(RotationStackConfig(4, 2), (0.0, 0.0), make_rng(0))
    with pytest.raises(DomainError):
        build_rotation_stack(RotationStackConfig(4, 2), (1.0, 0.0, 0.0), make_rng(0))


def test_batched_profiles_match_weightstack():
    cfg = RotationStackConfig(5, 2, 0.3)
    hidden, last = rotation_layers(cfg, (0.4, -0.7), make_rng(11), 3)
    fro2, weight = batched_profiles(hidden, last)
    for i in range(3):
        stack = WeightStack(tuple(hidden[i]) + (last[i],))
        np.testing.assert_allclose(fro2[i], np.square(stack.product_fro), rtol=1e-12)
        expected = [max(1.0, stack.tail_op_product(l) ** 2) for l in range(6)]
        np.testing.assert_allclose(weight[i], expected, rtol=1e-12)


def test_rotation_fro_is_scale_product():
    cfg = RotationStackConfig(4, 2, 0.5)
    hidden, last = rotation_layers(cfg, (1.0, 1.0), make_rng(5), 1)
    fro2, _ = batched_profiles(hidden, last)
    C = [np.linalg.norm(h, 2) for h in hidden[0]] + [abs(last[0, 0, 1])]
    for l in range(1, 4):
        assert fro2[0, l] == pytest.approx(2 * np.prod(np.square(C[:l])))
    assert fro2[0, 4] == pytest.approx(2.0)  # |t|^2 with |t| = sqrt(2)


# 40-digit values of 2 sqrt(r (log(n/(n-1)) - 1/n) + d0/n)
KL_R1_N100 = 0.2831984170400777
KL_R2_N100 = 0.2835536753914707


def test_kl_bound_value():
    assert kl_bound_value(100, 2, 1.0) == pytest.approx(KL_R1_N100, abs=1e-15)
    assert kl_bound_value(100, 2, 2.0) == pytest.approx(KL_R2_N100, abs=1e-15)
    assert kl_bound_value(10 ** 8, 2, 1.0) == pytest.approx(2.8284e-4, rel=1e-4)
    with pytest.raises(DomainError):
        kl_bound_value(1, 2, 1.0)


@given(st.integers(2, 10 ** 6), st.integers(1, 20), st.floats(0, 20), st.floats(0, 20))
def test_kl_bound_increasing_in_rank(n, d0, r1, r2):
    # log(n/(n-1)) > 1/n, so lower rank means a smaller bound
    lo, hi = sorted((r1, r2))
    assert kl_bound_value(n, d0, lo) <= kl_bound_value(n, d0, hi)


def test_bound_profiles_on_rotation_stacks():
    cfg = RotationStackConfig(10, 5, 0.2)
    rng = make_rng(4)
    target = fit_mean_classifier(sample_dataset(SPEC, rng))
    stacks = [build_rotation_stack(cfg, target, rng) for _ in range(20)]
    kl = kl_bound_profile(SPEC, stacks)
    assert kl.argmin == 10
    assert kl.metadata["mean_ranks"] == (2.0,) * 10 + (1.0,)
    assert kl.minimum == pytest.approx(KL_R1_N100, abs=1e-15)
    w = wasserstein_bound_profile(SPEC, stacks)
    assert len(w.values) == 11 and min(w.values) > 0


def test_wasserstein_coefficient_value():
    expected = 4 * math.sqrt(2) * (math.sqrt(2) + 10 - math.sqrt(99)) / 10
    assert wasserstein_coefficient(SPEC) == pytest.approx(expected, rel=1e-15)


def test_funnel_layer_is_deterministic():
    cfg = RotationStackConfig(6, 3, 0.2)
    a = funnel_layer(SPEC, cfg, 5, 10, seed=9)
    b = funnel_layer(SPEC, cfg, 5, 10, seed=9)
    assert a.sample_means == b.sample_means
    assert a.index == 3


def test_population_risk_against_monte_carlo():
    w = np.array([0.6, -0.3])
    exact = population_risk(w, SPEC)
    mc, se = population_risk_mc(w, SPEC, make_rng(2), 400_000)
    assert abs(exact - mc) < 4 * se


def test_population_risk_sigma_zero_limit():
    spec = GaussianMixtureSpec((0.5, 0.0), 0.0, 10)
    w = np.array([2.0, 1.0])
    assert population_risk(w, spec) == pytest.approx((1 - math.tanh(1.0)) ** 2, abs=1e-14)


def test_loss_is_bounded():
    x = np.random.default_rng(0).standard_normal((50, 2)) * 10
    y = np.sign(np.random.default_rng(1).standard_normal(50))
    loss = squared_tanh_loss(np.array([3.0, -1.0]), x, y)
    assert np.all((0 <= loss) & (loss <= 4))


def test_empirical_gen_error_modes_agree():
    spec = GaussianMixtureSpec((0.5, 0.0), 1.0, 20)
    quad = empirical_gen_error(spec, datasets=60, seed=1)
    mc = empirical_gen_error(spec, datasets=60, seed=1, risk_mode="monte_carlo", n_test=20_000)
    assert quad.estimate > 0
    assert abs(quad.estimate - mc.estimate) < 0.01
    assert empirical_gen_error(spec, datasets=60, seed=1).gaps == quad.gaps


def test_fit_matches_streaming_mean():
    data = sample_dataset(SPEC, make_rng(42))
    w = fit_mean_classifier(data)
    for j in range(2):
        ref = math.fsum(float(y) * float(x[j]) for x, y in zip(data.features, data.labels)) / data.n
        assert w[j] == pytest.approx(ref, abs=1e-15)


def test_sample_dataset_is_reproducible():
    a, b = sample_dataset(SPEC, make_rng(8)), sample_dataset(SPEC, make_rng(8))
    assert np.array_equal(a.features, b.features) and np.array_equal(a.labels, b.labels)


def test_aligned_target_needs_no_rotation():
    stack = build_rotation_stack(RotationStackConfig(2, 1, 0.5), (0.0, 3.0), make_rng(0))
    np.testing.assert_allclose(stack.layers[0], np.diag(np.diag(stack.layers[0])))
    assert stack.products[-1].ravel() == pytest.approx([0.0, 3.0], abs=1e-15)


def test_equal_scales_below_one_put_funnel_at_the_end():
    spec = GaussianMixtureSpec((0.5, 0.0), 1.0, 100)
    res = funnel_layer(spec, RotationStackConfig(10, 5, 1.0, "equal"), 20, 5, seed=1)
    assert res.index == 10


def test_bayes_consistency():
    n = 400
    spec = GaussianMixtureSpec((0.5, 0.0), 1.0, n)
    radius = 4 * math.sqrt(2 / n)
    hits = sum(np.linalg.norm(fit_mean_classifier(sample_dataset(spec, make_rng(s))) - spec.mean) <= radius
               for s in range(300))
    assert hits >= 0.99 * 300
