from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photonsub.fock_oracle import (
    FockDensityMatrix,
    TruncationError,
    apply_beamsplitter,
    apply_loss,
    beamsplitter_fock,
    fidelity,
    gaussian_output_fock,
    herald_fock,
    herald_spec_fock,
    loss_kraus,
    quadrature_moments,
    squeezed_fock_state,
    squeezed_single_photon_fock,
    squeezed_vacuum_fock,
    trigger_photon_distribution,
    two_mode_covariance,
    two_mode_input,
    wigner_from_density,
)
from photonsub.gaussian_core import gaussian_output, loss_channel
from photonsub.heralding import (
    PNRD,
    HeraldError,
    HeraldSpec,
    LossBudget,
    SqueezedFockState,
    click_probability,
    herald_onoff,
)

r_st = st.floats(-0.6, 0.6)


@given(r_st)
def test_squeezed_vacuum_moments(r):
    psi = squeezed_vacuum_fock(r, 60)
    x2, p2 = quadrature_moments(psi)
    assert math.isclose(x2, 0.5 * math.exp(-2 * r), rel_tol=1e-8)
    assert math.isclose(p2, 0.5 * math.exp(2 * r), rel_tol=1e-8)


def test_squeezed_two_photon_via_expm():
    a = squeezed_fock_state(0.4, 2, 30)
    assert math.isclose(np.linalg.norm(a), 1.0, abs_tol=1e-8)
    assert np.all(a[1::2] == 0)  # parity
    # n=2 via expm against x^2 moment (3 + ...)/2 e^{-2r} scaling: <x^2> = 5/2 e^{-2r}
    x2, _ = quadrature_moments(np.concatenate([a, np.zeros(4)]))
    assert math.isclose(x2, 2.5 * math.exp(-0.8), rel_tol=1e-6)


def test_truncation_is_detected():
    with pytest.raises(TruncationError):
        squeezed_vacuum_fock(1.5, 10)
    c = squeezed_single_photon_fock(1.5, 10, check=False)
    assert np.linalg.norm(c) < 1


@given(r_st, r_st, st.floats(0.0, 1.0))
def test_beamsplitter_matches_covariance(r1, r2, T):
    psi = gaussian_output_fock(r1, r2, T, 30)
    assert np.allclose(two_mode_covariance(psi), gaussian_output(r1, r2, T), atol=1e-7)


def test_beamsplitter_unitary_and_block_structure():
    U = beamsplitter_fock(0.3, 6)
    psi = np.zeros((7, 7), complex)
    psi[1, 2] = 1
    out = apply_beamsplitter(psi, 0.3)
    assert math.isclose(np.linalg.norm(out), 1.0)
    # photon number is conserved
    n_tot = np.add.outer(np.arange(7), np.arange(7))
    assert np.all(np.abs(out[n_tot != 3]) < 1e-14)
    assert U.shape == (49, 49)


def test_single_photon_splits_with_transmissivity():
    psi = np.zeros((3, 3), complex)
    psi[1, 0] = 1
    out = apply_beamsplitter(psi, 0.3)
    # mode 1 keeps its photon with probability R = 1 - T
    assert math.isclose(abs(out[1, 0]) ** 2, 0.7, rel_tol=1e-12)
    assert math.isclose(abs(out[0, 1]) ** 2, 0.3, rel_tol=1e-12)


@given(st.floats(0, 1))
def test_loss_kraus_complete(ell):
    K = loss_kraus(ell, 12)
    s = np.einsum("kab,kac->bc", K, K)
    assert np.allclose(s, np.eye(13), atol=1e-12)


@given(r_st, st.floats(0, 1))
def test_loss_matches_covariance_loss(r, ell):
    rho = np.outer(squeezed_vacuum_fock(r, 50), squeezed_vacuum_fock(r, 50))
    x2, p2 = quadrature_moments(apply_loss(rho, ell))
    assert math.isclose(x2, (1 - ell) * 0.5 * math.exp(-2 * r) + ell / 2, rel_tol=1e-8)


def test_loss_preserves_density_matrix_wrapper():
    rho = FockDensityMatrix.from_ket(squeezed_single_photon_fock(0.2, 20))
    out = apply_loss(rho, 0.3)
    assert isinstance(out, FockDensityMatrix) and out.is_valid()
    assert apply_loss(rho, 0.0) is rho


@given(st.builds(
    HeraldSpec, st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.1, 0.95),
    trigger_loss=st.sampled_from([0.0, 0.25, 0.9]), signal_loss=st.sampled_from([0.0, 0.25, 0.9]),
    fake_trigger_fraction=st.sampled_from([0.0, 0.05]),
))
def test_oracle_matches_closed_form(spec):
    if click_probability(spec) < 1e-6:
        return
    mix = herald_onoff(spec)
    rho, p = herald_spec_fock(spec, 40)
    assert math.isclose(p, mix.p_on, rel_tol=1e-8, abs_tol=1e-12)
    ax = np.linspace(-3, 3, 13)
    assert np.allclose(rho.wigner(ax, ax, check_boundary=False), mix.grid(ax, ax), atol=1e-7)
    assert rho.is_valid(1e-9)


def test_density_tensor_and_ket_herald_agree():
    psi = gaussian_output_fock(0.3, -0.2, 0.7, 14)
    rho4 = np.einsum("ab,cd->abcd", psi, psi.conj())
    lb = LossBudget(0.2, 0.5, 0.05)
    a, pa = herald_fock(psi, losses=lb)
    b, pb = herald_fock(rho4, losses=lb)
    assert math.isclose(pa, pb, rel_tol=1e-12)
    assert np.allclose(a.matrix, b.matrix, atol=1e-12)


def test_herald_errors():
    with pytest.raises(HeraldError):
        herald_fock(two_mode_input(0.0, 0.0, 5))
    with pytest.raises(ValueError):
        herald_fock(np.zeros((3, 3, 3)))


def test_pnrd_two_photons():
    spec = HeraldSpec(0.4, 0.0, 0.8, detector=PNRD, n=2)
    rho, p = herald_spec_fock(spec, 40)
    assert 0 < p < 0.1 and rho.is_valid(1e-9)


def test_trigger_photon_distribution_sums_to_one():
    psi = gaussian_output_fock(0.4, -0.1, 0.8, 30)
    pd = trigger_photon_distribution(psi)
    assert math.isclose(pd.sum(), 1.0)
    pd_l = trigger_photon_distribution(psi, 0.9)
    assert pd_l[0] > pd[0]  # loss favours single clicks
    rho4 = np.einsum("ab,cd->abcd", psi, psi.conj())
    assert np.allclose(trigger_photon_distribution(rho4, 0.9), pd_l)


def test_fidelity_helpers():
    psi = squeezed_single_photon_fock(0.3, 30)
    rho = FockDensityMatrix.from_ket(psi)
    assert math.isclose(fidelity(rho, SqueezedFockState(0.3)), 1.0, rel_tol=1e-9)
    assert math.isclose(fidelity(rho, psi), 1.0, rel_tol=1e-12)
    with pytest.raises(ValueError):
        fidelity(rho, psi[:5])


def test_density_matrix_api():
    rho = FockDensityMatrix.from_ket(squeezed_single_photon_fock(0.2, 24))
    back = FockDensityMatrix.from_json(rho.to_json())
    assert np.array_equal(back.matrix, rho.matrix)
    assert rho.padded(30).dim == 30
    with pytest.raises(ValueError):
        rho.padded(5)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 2
    with pytest.raises(ValueError):
        FockDensityMatrix(np.zeros((2, 3)))
    assert math.isclose(rho.origin(), -1 / math.pi, rel_tol=1e-6)
    assert math.isclose(rho.normalized().trace, 1.0)
    assert rho.photon_numbers()[1] > 0.9


def test_wigner_boundary_warning():
    rho = FockDensityMatrix.from_ket(squeezed_vacuum_fock(0.5, 30))
    with pytest.warns(RuntimeWarning):
        wigner_from_density(rho, np.linspace(-1, 1, 5), np.linspace(-1, 1, 5))
