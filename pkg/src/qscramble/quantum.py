"""Exact linear algebra for two-qubit states.

Conventions used everywhere in this package:

* the first tensor factor is party A, the second party B;
* the computational basis is ordered ``|00>, |01>, |10>, |11>``;
* ``|+/->`` are the eigenvectors of sigma_x, ``|y+/-> = (|0> +/- i|1>)/sqrt(2)``
  the eigenvectors of sigma_y, and ``|0>, |1>`` those of sigma_z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidState, NotHermitian

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-9
PSD_ATOL = 1e-9
NORM_ATOL = 1e-12
JACOBI_OFF_TOL = 1e-13

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_JACOBI_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _as_matrix4(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.shape != (4, 4):
        raise DomainError(f"expected a 4x4 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise DomainError("matrix has non-finite entries")
    return a


def hermiticity_defect(m) -> float:
    """Max-norm distance of ``m`` from its own conjugate transpose."""
    a = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(a - np.swapaxes(a, -1, -2).conj())))


# ---------------------------------------------------------------------------
# Cyclic complex Jacobi eigensolver.
#
# Direct complex Jacobi rotations on the 4x4 Hermitian matrix; a sweep visits
# all six off-diagonal pairs and convergence is declared once the off-diagonal
# Frobenius norm drops below JACOBI_OFF_TOL.  The routine operates on a stack
# of matrices at once so that bulk callers (state validation, PPT filtering)
# pay vectorized cost.
# ---------------------------------------------------------------------------


def eigh_stack(h: np.ndarray, *, with_vectors: bool = True,
               off_tol: float = JACOBI_OFF_TOL, max_sweeps: int = 60):
    """Eigendecompose a stack of Hermitian 4x4 matrices by cyclic Jacobi.

    Parameters
    ----------
    h : ndarray, shape (..., 4, 4)
        Hermitian input (not checked here; see :func:`eig_hermitian`).
    with_vectors : bool
        Accumulate eigenvectors; skip for an eigenvalue-only pass.

    Returns
    -------
    evals : ndarray, shape (..., 4), sorted descending.
    evecs : ndarray, shape (..., 4, 4) with eigenvectors in columns, or None.
    """
    a = np.array(h, dtype=complex, copy=True)
    lead = a.shape[:-2]
    a = a.reshape(-1, 4, 4)
    n = a.shape[0]
    offmask = ~np.eye(4, dtype=bool)
    v = np.broadcast_to(np.eye(4, dtype=complex), a.shape).copy() if with_vectors else None
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.all(off < off_tol):
            break
        for p, q in _JACOBI_PAIRS:
            apq = a[:, p, q]
            r = np.abs(apq)
            live = r > 1e-150
            rr = np.where(live, r, 1.0)
            tau = (a[:, q, q].real - a[:, p, p].real) / (2.0 * rr)
            sgn = np.where(tau >= 0, 1.0, -1.0)
            t = np.where(live, sgn / (np.abs(tau) + np.hypot(1.0, tau)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            phase = np.where(live, apq / rr, 1.0 + 0j)
            sp = (s * phase)[:, None]
            spc = sp.conj()
            cc = c[:, None]
            colp = a[:, :, p].copy()
            colq = a[:, :, q].copy()
            a[:, :, p] = cc * colp - spc * colq
            a[:, :, q] = sp * colp + cc * colq
            rowp = a[:, p, :].copy()
            rowq = a[:, q, :].copy()
            a[:, p, :] = cc * rowp - sp * rowq
            a[:, q, :] = spc * rowp + cc * rowq
            if with_vectors:
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = cc * vp - spc * vq
                v[:, :, q] = sp * vp + cc * vq
    else:
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.any(off > 1e-11):
            raise ArithmeticError("Jacobi sweep limit reached before convergence")
    evals = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    order = np.argsort(-evals, axis=1, kind="stable")
    evals = np.take_along_axis(evals, order, axis=1)
    if with_vectors:
        v = np.take_along_axis(v, order[:, None, :], axis=2)
        return evals.reshape(*lead, 4), v.reshape(*lead, 4, 4)
    return evals.reshape(*lead, 4), None


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns of ``h``.

    Raises :class:`NotHermitian` if ``max|h - h^dag|`` exceeds ``1e-10``.
    """
    a = _as_matrix4(h)
    defect = hermiticity_defect(a)
    if defect > HERMITIAN_ATOL:
        raise NotHermitian(f"matrix deviates from Hermitian by {defect:.3e}")
    a = 0.5 * (a + a.conj().T)
    evals, evecs = eigh_stack(a[None])
    return evals[0], evecs[0]


def min_eigval_stack(h: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of each matrix in a Hermitian stack."""
    evals, _ = eigh_stack(h, with_vectors=False)
    return evals[..., -1]


# ---------------------------------------------------------------------------
# Partial transpose and the PPT test.
# ---------------------------------------------------------------------------


def partial_transpose(rho) -> np.ndarray:
    """Transpose the second tensor factor: rho^{T_B}.

    Accepts a :class:`DensityMatrix` or a raw 4x4 array and returns a raw
    array; the result is Hermitian and trace-preserving but in general not
    positive.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else _as_matrix4(rho)
    return m.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def partial_transpose_stack(m: np.ndarray) -> np.ndarray:
    return m.reshape(*m.shape[:-2], 2, 2, 2, 2).swapaxes(-1, -3) \
            .reshape(*m.shape[:-2], 4, 4)


def is_ppt(rho) -> bool:
    """Whether rho^{T_B} >= -1e-9; equals separability for two qubits."""
    pt = partial_transpose(rho)
    evals, _ = eigh_stack(pt[None], with_vectors=False)
    return bool(evals[0, -1] >= -PSD_ATOL)


# ---------------------------------------------------------------------------
# State containers.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PureState:
    """Normalized 4-component state vector in the computational basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(4)
        norm2 = float(np.real(a.conj() @ a))
        if abs(norm2 - 1.0) > NORM_ATOL:
            raise DomainError(f"state vector norm^2 deviates from 1 by {norm2 - 1.0:.3e}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector())


@dataclass(frozen=True)
class DensityMatrix:
    """4x4 Hermitian, trace-one, positive-semidefinite operator.

    The constructor verifies Hermiticity and the trace; use
    :meth:`from_matrix` for untrusted input, which additionally checks
    positivity of the spectrum.  The stored array is read-only.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix4(self.matrix)
        defect = hermiticity_defect(m)
        if defect > HERMITIAN_ATOL:
            raise InvalidState(f"not Hermitian: max|rho - rho^dag| = {defect:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise InvalidState(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, m) -> "DensityMatrix":
        rho = cls(m)
        lam_min = float(min_eigval_stack(rho.matrix[None])[0])
        if lam_min < -PSD_ATOL:
            raise InvalidState(f"not positive semidefinite: min eigenvalue {lam_min:.3e}")
        return rho

    def min_eigenvalue(self) -> float:
        return float(min_eigval_stack(self.matrix[None])[0])


@dataclass(frozen=True)
class ProductStateParams:
    """Bloch angles of a pure product state: cos(t/2)|0> + e^{i phi} sin(t/2)|1>."""

    theta_a: float
    theta_b: float
    phi_a: float = 0.0
    phi_b: float = 0.0

    def __post_init__(self):
        for name in ("theta_a", "theta_b"):
            t = getattr(self, name)
            if not (0.0 <= t <= math.pi):
                raise DomainError(f"{name} = {t} outside [0, pi]")
        for name in ("phi_a", "phi_b"):
            p = getattr(self, name)
            if not (0.0 <= p < 2.0 * math.pi):
                raise DomainError(f"{name} = {p} outside [0, 2*pi)")


# ---------------------------------------------------------------------------
# State constructors.
# ---------------------------------------------------------------------------


def qubit_state(theta: float, phi: float = 0.0) -> np.ndarray:
    return np.array([math.cos(theta / 2.0),
                     math.sin(theta / 2.0) * complex(math.cos(phi), math.sin(phi))],
                    dtype=complex)


def product_state(params: ProductStateParams) -> PureState:
    """Tensor product of the two single-qubit states described by ``params``."""
    ket = np.kron(qubit_state(params.theta_a, params.phi_a),
                  qubit_state(params.theta_b, params.phi_b))
    return PureState(ket)


def psi_t(t: float) -> PureState:
    """The boundary family (t|00> + |01> + |10> + |11>) / sqrt(3 + t^2), t >= 1."""
    if not (np.isfinite(t) and t >= 1.0):
        raise DomainError(f"psi_t requires t >= 1, got {t}")
    return PureState(np.array([t, 1.0, 1.0, 1.0], dtype=complex) / math.sqrt(3.0 + t * t))


def mix(rho1: DensityMatrix, rho2: DensityMatrix, w: float) -> DensityMatrix:
    """Convex combination (1-w) rho1 + w rho2 with w in [0, 1]."""
    if not (0.0 <= w <= 1.0):
        raise DomainError(f"mixing weight {w} outside [0, 1]")
    return DensityMatrix((1.0 - w) * rho1.matrix + w * rho2.matrix)


def maximally_mixed() -> DensityMatrix:
    return DensityMatrix(np.eye(4, dtype=complex) / 4.0)


def singlet() -> PureState:
    """|psi^-> = (|01> - |10>)/sqrt(2)."""
    return PureState(np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0))


def phi_plus() -> PureState:
    """|Phi^+> = (|00> + |11>)/sqrt(2)."""
    return PureState(np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2.0))


def plus_zero() -> PureState:
    """The product state |+> (x) |0>."""
    return PureState(np.array([1, 0, 1, 0], dtype=complex) / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Random states distributed by the Hilbert-Schmidt measure.
#
# Philox is counter-based, so distinct seeds give independent streams and
# parallel scans can derive one stream per sample index.  Gaussians are
# produced by an explicit Box-Muller transform to keep the mapping from seed
# to state fully pinned down.
# ---------------------------------------------------------------------------


def _box_muller(u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.sqrt(-2.0 * np.log1p(-u1))  # 1 - u1 in (0, 1], avoids log(0)
    ang = 2.0 * math.pi * u2
    return r * np.cos(ang), r * np.sin(ang)


def _ginibre(seed: int, count: int = 1) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed & ((1 << 64) - 1)))
    u = gen.random((count, 2, 16))
    za, zb = _box_muller(u[:, 0, :], u[:, 1, :])
    g = (za + 1j * zb).reshape(count, 4, 4)
    return g


def random_hs_state(seed: int) -> DensityMatrix:
    """Draw rho = G G^dag / Tr(G G^dag) with G a complex Ginibre matrix.

    The map from ``seed`` to the state is deterministic and bit-stable:
    a Philox stream keyed by the seed feeds a Box-Muller transform.
    """
    g = _ginibre(int(seed))[0]
    s = g @ g.conj().T
    return DensityMatrix(s / np.trace(s).real)


def derive_seed(seed: int, index: int) -> int:
    """SplitMix64-style per-index seed derivation for scan streams."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & ((1 << 64) - 1)
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & ((1 << 64) - 1)
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & ((1 << 64) - 1)
    return z ^ (z >> 31)


def random_hs_stack(seed: int, count: int, start_index: int = 0) -> np.ndarray:
    """Stack of ``count`` Hilbert-Schmidt random states as raw matrices.

    Sample ``i`` equals ``random_hs_state(derive_seed(seed, start_index + i))``.
    """
    out = np.empty((count, 4, 4), dtype=complex)
    for i in range(count):
        g = _ginibre(derive_seed(seed, start_index + i))[0]
        s = g @ g.conj().T
        out[i] = s / np.trace(s).real
    return out
