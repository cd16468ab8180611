import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from layerbounds.errors import DomainError, UnsupportedRegularization
from layerbounds.sdpi import (
    DropConnect,
    Dropout,
    GaussianNoise,
    NetworkSpec,
    dropconnect_eta_ub,
    dropout_eta,
    eta_product_approx,
    network_eta_product,
    noise_eta_ub,
    site_coefficients,
)

# frozen from 40-digit quadrature of the normal tail
NOISE_1_1_1 = 0.52049987781304653768
NOISE_1_1_20 = 0.99843459774199745032


def test_dropout_eta():
    assert dropout_eta(1e-12, 3) == pytest.approx(1.0)
    assert dropout_eta(1 - 1e-12, 1) == pytest.approx(0.0, abs=1e-11)
    assert dropout_eta(0.5, 2) == 0.75


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
def test_dropout_domain(bad):
    with pytest.raises(DomainError):
        dropout_eta(bad, 2)


def test_dropconnect_eta():
    assert dropconnect_eta_ub(np.full((2, 3), 1 - 1e-12)) == pytest.approx(0.0, abs=1e-10)
    assert dropconnect_eta_ub([[0.3]]) == pytest.approx(dropout_eta(0.3, 1))
    assert dropconnect_eta_ub(np.full((2, 2), 0.5)) == 0.9375
    with pytest.raises(DomainError):
        dropconnect_eta_ub([[0.5, 1.0]])


def test_noise_eta():
    assert noise_eta_ub(1e9, 1.0, 1) == pytest.approx(0.0, abs=1e-8)
    assert noise_eta_ub(1.0, 1.0, 1) == pytest.approx(NOISE_1_1_1, abs=1e-14)
    assert noise_eta_ub(1.0, 1.0, 20) == pytest.approx(NOISE_1_1_20, abs=1e-14)
    with pytest.raises(DomainError):
        noise_eta_ub(0.0, 1.0, 1)
    with pytest.raises(DomainError):
        noise_eta_ub(1.0, -1.0, 1)


@given(st.floats(0.05, 20), st.floats(0.05, 5), st.integers(1, 50))
def test_noise_eta_monotone(eps, sup, width):
    v = noise_eta_ub(eps, sup, width)
    assert 0.0 <= v <= 1.0
    assert noise_eta_ub(eps * 1.5, sup, width) <= v
    if v < 1.0 - 1e-9:  # away from float saturation the decrease is strict
        assert noise_eta_ub(eps * 1.5, sup, width) < v
    assert noise_eta_ub(eps, sup, width + 1) >= v
    assert noise_eta_ub(eps, sup * 1.5, width) >= v


def test_network_product_examples():
    assert network_eta_product(NetworkSpec((3, 4, 2))) == 1.0
    assert network_eta_product(NetworkSpec((3, 4, 2), sites=((0, None), (1, None)))) == 1.0
    spec = NetworkSpec((10, 20, 2), sites=((0, Dropout(0.5, 10)), (1, Dropout(0.5, 20))))
    assert network_eta_product(spec) == pytest.approx((1 - 0.5 ** 10) * (1 - 0.5 ** 20), rel=1e-15)
    assert network_eta_product(spec) == pytest.approx(0.9990, abs=1e-4)
    mixed = NetworkSpec((1, 1), sites=((0, Dropout(0.9, 1)), (1, GaussianNoise(1.0, 1.0, 1))))
    assert network_eta_product(mixed) == pytest.approx(0.1 * NOISE_1_1_1, rel=1e-13)


def test_site_tightness_labels():
    spec = NetworkSpec((2, 2, 1), sites=(
        (0, Dropout(0.5, 2)),
        (1, DropConnect(np.full((2, 2), 0.5))),
        (2, GaussianNoise(1.0, 1.0, 1)),
    ))
    labels = {c.kind: c.tightness for c in site_coefficients(spec)}
    assert labels == {"dropout": "exact", "dropconnect": "upper_bound", "noise": "upper_bound"}


def test_site_indexing_validation():
    with pytest.raises(DomainError):
        NetworkSpec((3, 4, 2), sites=((2, Dropout(0.5, 2)),))  # dropout only at 0..L-1
    with pytest.raises(DomainError):
        NetworkSpec((3, 4, 2), sites=((0, GaussianNoise(1.0, 1.0, 3)),))  # noise only at 1..L
    with pytest.raises(DomainError):
        NetworkSpec((3, 4, 2), sites=((1, DropConnect(np.full((3, 4), 0.5))),))
    with pytest.raises(DomainError):
        NetworkSpec((3, 4, 2), sites=((1, Dropout(0.5, 3)),))


def test_builders_site_indexing():
    drop = NetworkSpec.with_dropout((10, 1, 20, 2), 0.5)
    assert [l for l, _ in drop.sites] == [0, 1, 2]
    noisy = NetworkSpec.with_noise((10, 1, 20, 2), 1.0)
    assert [(l, r.width) for l, r in noisy.sites] == [(1, 1), (2, 20), (3, 2)]


@given(st.lists(st.floats(0.05, 0.9), min_size=1, max_size=4), st.integers(1, 6), st.integers(0, 3))
def test_product_monotone_in_delta_and_width(deltas, width, which):
    which = which % len(deltas)
    dims = [width] * (len(deltas) + 1)

    def spec(ds, ws):
        return NetworkSpec(ws, sites=tuple((l, Dropout(d, ws[l])) for l, d in enumerate(ds)))

    base = network_eta_product(spec(deltas, dims))
    bumped = list(deltas)
    bumped[which] = min(0.95, deltas[which] + 0.05)
    assert network_eta_product(spec(bumped, dims)) < base
    wider = list(dims)
    wider[which] += 1
    assert network_eta_product(spec(deltas, wider)) > base
    assert 0.0 <= base <= 1.0


@given(st.lists(st.floats(0.1, 10), min_size=1, max_size=4), st.integers(0, 3))
def test_product_monotone_in_noise(eps, which):
    which = which % len(eps)
    dims = [3] * (len(eps) + 1)

    def spec(es):
        return NetworkSpec(dims, sites=tuple((l + 1, GaussianNoise(e, 1.0, 3)) for l, e in enumerate(es)))

    bumped = list(eps)
    bumped[which] *= 1.2
    base = network_eta_product(spec(eps))
    assert network_eta_product(spec(bumped)) <= base
    if noise_eta_ub(eps[which], 1.0, 3) < 1.0 - 1e-9:
        assert network_eta_product(spec(bumped)) < base


def test_eta_product_approx_examples():
    tiny = NetworkSpec((200, 1), sites=((0, Dropout(1e-3, 200)),))
    r = eta_product_approx(tiny)
    assert r.approx == 1.0 and r.exact == 1.0 and r.abs_gap == 0.0
    r = eta_product_approx(NetworkSpec((10, 1), sites=((0, Dropout(0.5, 10)),)))
    assert r.approx == pytest.approx(0.99902391418197566, abs=1e-15)
    assert r.exact == 0.9990234375
    r = eta_product_approx(NetworkSpec((1, 1), sites=((0, Dropout(0.9, 1)),)))
    assert r.approx == pytest.approx(math.exp(-0.9)) and r.exact == pytest.approx(0.1)
    assert r.rel_gap == pytest.approx((math.exp(-0.9) - 0.1) / 0.1)


def test_eta_product_approx_rejects_noise():
    with pytest.raises(UnsupportedRegularization):
        eta_product_approx(NetworkSpec.with_noise((3, 3), 1.0))
