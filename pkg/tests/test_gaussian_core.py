from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photonsub.gaussian_core import (
    SqueezingParameter,
    beamsplitter_matrix,
    db_to_r,
    gaussian_output,
    gaussian_wigner,
    input_covariance,
    is_physical,
    is_symplectic,
    loss_channel,
    propagate,
    r_to_db,
    sigma_blocks,
    symplectic_eigenvalues,
)

squeeze = st.floats(-1.2, 1.2)
trans = st.floats(0.0, 1.0)
loss = st.floats(0.0, 1.0)


def test_db_conversion_examples():
    assert db_to_r(0.0) == 0.0
    assert math.isclose(r_to_db(math.log(10) / 20), 1.0)
    assert math.isclose(SqueezingParameter.from_db(3.0).db, 3.0)
    with pytest.raises(ValueError):
        db_to_r(float("nan"))


@given(st.floats(-30, 30))
def test_db_round_trip(db):
    assert math.isclose(r_to_db(db_to_r(db)), db, abs_tol=1e-12)


def test_vacuum_input_is_half_identity():
    assert np.allclose(input_covariance(0, 0), 0.5 * np.eye(4))


@given(trans)
def test_beamsplitter_is_symplectic_and_orthogonal(T):
    u = beamsplitter_matrix(T)
    assert is_symplectic(u)
    assert np.allclose(u @ u.T, np.eye(4))


def test_beamsplitter_rejects_bad_t():
    with pytest.raises(ValueError):
        beamsplitter_matrix(1.2)


def test_propagate_rejects_non_symplectic():
    with pytest.raises(ValueError):
        propagate(np.eye(4) / 2, 2 * np.eye(4))


@given(squeeze, squeeze, trans)
def test_output_is_pure_and_physical(r1, r2, T):
    v = gaussian_output(r1, r2, T)
    assert is_physical(v)
    # a passive unitary on pure inputs keeps the state pure
    assert np.allclose(symplectic_eigenvalues(v), 0.5, atol=1e-9)
    assert math.isclose(np.linalg.det(v), 1 / 16, rel_tol=1e-9)


@given(squeeze, squeeze, trans)
def test_no_xp_correlations(r1, r2, T):
    b = sigma_blocks(gaussian_output(r1, r2, T))
    assert b.sigma_x.shape == (2, 2)


def test_sigma_blocks_rejects_xp_correlation():
    v = 0.5 * np.eye(4)
    v[0, 2] = v[2, 0] = 0.1
    with pytest.raises(ValueError):
        sigma_blocks(v)


def test_transmission_routes_inputs():
    # T = 1 swaps the inputs up to sign, T = 0 keeps them in place
    v = gaussian_output(0.4, -0.2, 1.0)
    assert math.isclose(v[0, 0], 0.5 * math.exp(0.4))
    v = gaussian_output(0.4, -0.2, 0.0)
    assert math.isclose(v[0, 0], 0.5 * math.exp(-0.8))


@given(squeeze, squeeze, trans, loss, st.sampled_from([0, 1]))
def test_loss_keeps_state_physical(r1, r2, T, ell, mode):
    v = loss_channel(gaussian_output(r1, r2, T), mode, ell)
    assert is_physical(v, tol=1e-9)


def test_full_loss_gives_vacuum_mode():
    v = loss_channel(gaussian_output(0.5, 0.3, 0.4), 0, 1.0)
    assert np.allclose(v[np.ix_([0, 2], [0, 2])], 0.5 * np.eye(2))
    assert np.allclose(v[0, 1], 0.0) and np.allclose(v[2, 3], 0.0)


@given(loss, loss)
def test_losses_compose(a, b):
    v = gaussian_output(0.6, -0.1, 0.3)
    two = loss_channel(loss_channel(v, 1, a), 1, b)
    one = loss_channel(v, 1, 1 - (1 - a) * (1 - b))
    # sqrt(1 - loss) amplifies round-off of the combined loss near 1
    assert np.allclose(two, one, atol=1e-7)


def test_loss_channel_bad_arguments():
    with pytest.raises(ValueError):
        loss_channel(np.eye(4), 2, 0.1)
    with pytest.raises(ValueError):
        loss_channel(np.eye(4), 0, -0.1)


def test_gaussian_wigner_normalisation_and_peak():
    v = gaussian_output(0.3, -0.5, 0.6)
    # peak value 1 / (4 pi^2 sqrt(det V)) = 1 / pi^2 for a pure two-mode state
    assert math.isclose(gaussian_wigner(v, np.zeros(4)), 1 / math.pi**2, rel_tol=1e-9)
    # integrate a vacuum Wigner function on a coarse 4D grid
    ax = np.linspace(-5, 5, 31)
    q = np.stack(np.meshgrid(ax, ax, ax, ax, indexing="ij"), axis=-1)
    total = gaussian_wigner(0.5 * np.eye(4), q).sum() * (ax[1] - ax[0]) ** 4
    assert math.isclose(total, 1.0, rel_tol=1e-6)
