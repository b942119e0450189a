import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skyrelay import _pykernels, kernels
from skyrelay.channel import kernel_consts
from skyrelay.config import ChannelParams

ckernels = pytest.importorskip("skyrelay._ckernels")
CONSTS = kernel_consts(ChannelParams(), 6000.0)


def geometry(seed, k, n_vehicles=60, n_uavs=4):
    rng = np.random.default_rng(seed)
    n = n_vehicles + n_uavs
    pos = np.zeros((n, 3))
    pos[:n_vehicles, 0] = rng.uniform(0, 6000, n_vehicles)
    pos[:n_vehicles, 1] = (rng.integers(0, 3, n_vehicles) + 0.5) * 3.5
    pos[n_vehicles:, 0] = rng.uniform(0, 6000, n_uavs)
    pos[n_vehicles:, 1] = 5.25
    pos[n_vehicles:, 2] = 100.0
    is_uav = np.zeros(n, dtype=np.uint8)
    is_uav[n_vehicles:] = 1
    # random links; nodes may repeat across links but never inside one
    tx = rng.integers(0, n, k)
    rx = (tx + rng.integers(1, n, k)) % n
    return tx.astype(np.intp), rx.astype(np.intp), pos, is_uav


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.compiled_available()


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 12))
def test_power_matrix_backends_agree(seed, k):
    tx, rx, pos, u = geometry(seed, k)
    try:
        a = _pykernels.power_matrix(tx, rx, pos, u, CONSTS)
    except ValueError:
        with pytest.raises(ValueError):
            ckernels.power_matrix(tx, rx, pos, u, CONSTS)
        return
    b = ckernels.power_matrix(tx, rx, pos, u, CONSTS)
    np.testing.assert_allclose(b, a, rtol=1e-12, atol=0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 12), faded=st.booleans())
def test_link_sinr_backends_agree(seed, k, faded):
    tx, rx, pos, u = geometry(seed, k)
    fad = np.random.default_rng(seed).gamma(2.0, 0.5, (k, k)) if faded else None
    try:
        a = _pykernels.link_sinr(tx, rx, pos, u, fad, CONSTS)
    except ValueError:
        return
    b = ckernels.link_sinr(tx, rx, pos, u, fad, CONSTS)
    np.testing.assert_allclose(b, a, rtol=1e-12, atol=0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), ka=st.integers(1, 8), kb=st.integers(1, 8),
       sigma=st.sampled_from([0.0, 1e-8, 1e-5, 1e-3, 1e-1, np.inf]))
def test_conflict_codes_backends_agree(seed, ka, kb, sigma):
    ta, ra, pos, u = geometry(seed, ka)
    tb, rb, _, _ = geometry(seed + 1, kb)
    a = _pykernels.conflict_codes(ta, ra, tb, rb, pos, u, CONSTS, sigma)
    b = ckernels.conflict_codes(ta, ra, tb, rb, pos, u, CONSTS, sigma)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("mod", [_pykernels, ckernels], ids=["numpy", "cython"])
def test_zero_length_link_rejected(mod):
    pos = np.zeros((2, 3))
    with pytest.raises(ValueError):
        mod.power_matrix(np.array([0]), np.array([1]), pos, np.zeros(2, np.uint8), CONSTS)


@pytest.mark.parametrize("mod", [_pykernels, ckernels], ids=["numpy", "cython"])
def test_uav_receiver_row_has_no_interference(mod):
    tx, rx, pos, u = geometry(5, 6)
    rx[0] = len(pos) - 1
    tx[0] = 0
    p = mod.power_matrix(tx, rx, pos, u, CONSTS)
    assert np.count_nonzero(p[0]) == 1


@pytest.mark.parametrize("mod", [_pykernels, ckernels], ids=["numpy", "cython"])
def test_accepts_bool_mask(mod):
    tx, rx, pos, u = geometry(9, 5)
    a = mod.link_sinr(tx, rx, pos, u, None, CONSTS)
    b = mod.link_sinr(tx, rx, pos, u.astype(bool), None, CONSTS)
    assert np.array_equal(a, b)
