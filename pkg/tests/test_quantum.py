import math

import numpy as np
import pytest

from qscramble.errors import DomainError, InvalidState, NotHermitian
from qscramble.quantum import (DensityMatrix, ProductStateParams, PureState,
                               eig_hermitian, eigh_stack, is_ppt, maximally_mixed,
                               min_eigval_stack, mix, partial_transpose, phi_plus,
                               plus_zero, product_state, psi_t, random_hs_stack,
                               random_hs_state, singlet)

SZZ = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)


def test_eig_identity():
    evals, evecs = eig_hermitian(np.eye(4))
    assert np.allclose(evals, [1, 1, 1, 1], atol=0)
    assert np.max(np.abs(evecs.conj().T @ evecs - np.eye(4))) < 1e-12


def test_eig_sigma_zz():
    evals, _ = eig_hermitian(SZZ)
    assert np.allclose(evals, [1, 1, -1, -1], atol=1e-14)


def test_eig_bell_projector():
    evals, evecs = eig_hermitian(phi_plus().projector())
    assert np.allclose(evals, [1, 0, 0, 0], atol=1e-14)
    overlap = abs(np.vdot(evecs[:, 0], phi_plus().amplitudes)) ** 2
    assert abs(overlap - 1.0) < 1e-12


def test_eig_rejects_non_hermitian():
    m = np.eye(4, dtype=complex)
    m[0, 1] = 1e-3
    with pytest.raises(NotHermitian):
        eig_hermitian(m)


def test_eig_reconstruction_random():
    # module invariant: reconstruction within 1e-10 on 1e4 random matrices,
    # eigenvalues cross-checked against LAPACK as an independent oracle
    rng = np.random.default_rng(5)
    g = rng.normal(size=(10_000, 4, 4)) + 1j * rng.normal(size=(10_000, 4, 4))
    h = 0.5 * (g + np.conj(np.transpose(g, (0, 2, 1))))
    evals, evecs = eigh_stack(h)
    recon = np.einsum("nik,nk,njk->nij", evecs, evals, evecs.conj())
    assert np.max(np.abs(recon - h)) < 1e-10
    orth = np.einsum("nki,nkj->nij", evecs.conj(), evecs) - np.eye(4)
    assert np.max(np.abs(orth)) < 1e-10
    assert np.all(np.diff(evals, axis=1) <= 1e-12)
    oracle = np.linalg.eigvalsh(h)[:, ::-1]
    assert np.max(np.abs(evals - oracle)) < 1e-10


def test_partial_transpose_maximally_mixed():
    m = maximally_mixed().matrix
    assert np.array_equal(partial_transpose(m), m)


def test_partial_transpose_singlet():
    pt = partial_transpose(singlet().density())
    evals, _ = eig_hermitian(pt)
    assert abs(evals[-1] + 0.5) < 1e-12


def test_partial_transpose_product_diagonal():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    assert np.array_equal(partial_transpose(rho), rho)


def test_partial_transpose_involution_and_trace(random_states_2k):
    pts = np.stack([partial_transpose(m) for m in random_states_2k[:200]])
    back = np.stack([partial_transpose(m) for m in pts])
    assert np.array_equal(back, random_states_2k[:200])
    traces = np.trace(pts, axis1=1, axis2=2)
    assert np.max(np.abs(traces - 1.0)) < 1e-12


def test_is_ppt_examples():
    assert is_ppt(maximally_mixed())
    assert not is_ppt(singlet().density())


def test_random_hs_state_contract():
    r0 = random_hs_state(0)
    assert abs(np.trace(r0.matrix) - 1.0) < 1e-12
    r1 = random_hs_state(1)
    assert np.max(np.abs(r0.matrix - r1.matrix)) > 1e-3
    again = random_hs_state(0)
    assert np.array_equal(r0.matrix, again.matrix)


def test_random_hs_state_invariants_bulk():
    # module invariant: valid density matrices for 1e5 seeds
    states = random_hs_stack(0, 100_000)
    herm = np.max(np.abs(states - np.conj(np.transpose(states, (0, 2, 1)))))
    assert herm < 1e-10
    traces = np.trace(states, axis1=1, axis2=2)
    assert np.max(np.abs(traces - 1.0)) < 1e-9
    assert float(np.min(min_eigval_stack(states))) > -1e-9


def test_psi_t_values():
    assert np.allclose(psi_t(1.0).amplitudes, np.full(4, 0.5), atol=1e-15)
    assert np.allclose(psi_t(3.0).amplitudes,
                       np.array([3, 1, 1, 1]) / math.sqrt(12.0), atol=1e-15)
    assert np.allclose(psi_t(10.0).amplitudes,
                       np.array([10, 1, 1, 1]) / math.sqrt(103.0), atol=1e-15)
    with pytest.raises(DomainError):
        psi_t(0.99)


def test_psi_t_entanglement_boundary():
    # product at t = 1, entangled (NPT) for every t > 1
    assert is_ppt(psi_t(1.0).density())
    for t in (1.0 + 1e-6, 1.5, 2.0, 3.0, 10.0, 1e4):
        state = psi_t(t)
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-12
        assert not is_ppt(state.density())


def test_product_state_examples():
    ket = product_state(ProductStateParams(0.0, 0.0)).amplitudes
    assert np.allclose(ket, [1, 0, 0, 0], atol=1e-15)
    ket = product_state(ProductStateParams(math.pi / 2, 0.0)).amplitudes
    assert np.allclose(ket, plus_zero().amplitudes, atol=1e-15)
    with pytest.raises(DomainError):
        ProductStateParams(-0.1, 0.0)
    with pytest.raises(DomainError):
        ProductStateParams(0.0, 0.0, phi_a=7.0)


def test_mix():
    r1 = singlet().density()
    r2 = maximally_mixed()
    assert np.array_equal(mix(r1, r2, 0.0).matrix, r1.matrix)
    lam = 0.3
    noisy = mix(psi_t(3.0).density(), maximally_mixed(), lam)
    expected = (1 - lam) * psi_t(3.0).projector() + lam * np.eye(4) / 4
    assert np.max(np.abs(noisy.matrix - expected)) < 1e-15
    with pytest.raises(DomainError):
        mix(r1, r2, 1.5)


def test_density_matrix_validation():
    with pytest.raises(InvalidState):
        DensityMatrix(np.eye(4, dtype=complex))  # trace 4
    bad = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
    with pytest.raises(InvalidState):
        DensityMatrix.from_matrix(bad)
    with pytest.raises(DomainError):
        PureState(np.array([1.0, 1.0, 0.0, 0.0]))
