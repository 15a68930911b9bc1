"""Linear algebra for the symplectic covariance-matrix formalism.

Modes are interleaved as ``(Q1, P1, ..., QN, PN)`` and the vacuum
covariance matrix is the identity.
"""

import numpy as np
from scipy.linalg import block_diag, schur

from .errors import InvalidArgumentError, InvalidStateError

TOL = 1e-9

_OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _scaled(tol, *mats):
    scale = max([1.0] + [float(np.max(np.abs(m))) for m in mats if np.size(m)])
    return tol * scale


def _n_modes_of(mat):
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {mat.shape}")
    if mat.shape[0] % 2:
        raise InvalidArgumentError(f"matrix dimension {mat.shape[0]} is odd")
    return mat.shape[0] // 2


def symplectic_form(n_modes):
    """Return the ``2N x 2N`` symplectic form ``sigma`` for ``n_modes`` modes."""
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidArgumentError(f"n_modes must be a positive integer, got {n_modes}")
    return block_diag(*([_OMEGA1] * int(n_modes)))


def reflection(n_modes):
    """``diag(1, -1, 1, -1, ...)``: flips every momentum quadrature."""
    return np.diag(np.tile([1.0, -1.0], int(n_modes)))


def is_symmetric(mat, tol=TOL):
    mat = np.asarray(mat, dtype=float)
    return bool(np.max(np.abs(mat - mat.T), initial=0.0) <= _scaled(tol, mat))


def symplectic_residual(S):
    """``max |S sigma S^T - sigma|``."""
    n = _n_modes_of(S)
    sigma = symplectic_form(n)
    return float(np.max(np.abs(S @ sigma @ S.T - sigma)))


def is_symplectic(S, tol=TOL):
    S = np.asarray(S, dtype=float)
    return symplectic_residual(S) <= _scaled(tol, S @ S.T)


def _sqrtm_psd(mat):
    w, v = np.linalg.eigh(mat)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def _require_positive_definite(gamma):
    gamma = np.asarray(gamma, dtype=float)
    _n_modes_of(gamma)
    if not is_symmetric(gamma):
        raise InvalidStateError("covariance matrix is not symmetric")
    w = np.linalg.eigvalsh(0.5 * (gamma + gamma.T))
    if w[0] <= 0:
        raise InvalidStateError(
            f"covariance matrix is not positive definite (min eigenvalue {w[0]:.3e})"
        )
    return 0.5 * (gamma + gamma.T)


def symplectic_eigenvalues(gamma):
    """Symplectic spectrum of a positive definite matrix, one value per mode.

    Computed from the Hermitian matrix ``i Gamma^(1/2) sigma Gamma^(1/2)``,
    which is similar to ``i sigma Gamma`` and has eigenvalues ``+-nu_k``.

    Returns
    -------
    numpy.ndarray
        The ``N`` symplectic eigenvalues in descending order.
    """
    gamma = _require_positive_definite(gamma)
    n = gamma.shape[0] // 2
    root = _sqrtm_psd(gamma)
    herm = 1j * (root @ symplectic_form(n) @ root)
    w = np.linalg.eigvalsh(0.5 * (herm + herm.conj().T))
    return np.sort(w[n:])[::-1].copy()


def is_valid_cm(gamma, tol=TOL):
    """True iff ``Gamma + i sigma`` is positive semidefinite within ``tol``."""
    gamma = np.asarray(gamma, dtype=float)
    n = _n_modes_of(gamma)
    herm = gamma + 1j * symplectic_form(n)
    herm = 0.5 * (herm + herm.conj().T)
    return bool(np.linalg.eigvalsh(herm)[0] >= -_scaled(tol, gamma))


def williamson(gamma):
    """Williamson normal form ``Gamma = S diag(nu) S^T``.

    Returns ``(nu, S)`` with ``nu`` one value per mode (in the order of the
    mode pairs of ``S``, not sorted) and ``S`` symplectic.
    """
    gamma = _require_positive_definite(gamma)
    n = gamma.shape[0] // 2
    root = _sqrtm_psd(gamma)
    inv_root = np.linalg.inv(root)
    antisym = inv_root @ symplectic_form(n) @ inv_root
    antisym = 0.5 * (antisym - antisym.T)
    t, o = schur(antisym, output="real")
    # normal matrix: t is block diagonal with 2x2 blocks [[0, b], [-b, 0]]
    nu = np.empty(n)
    for k in range(n):
        b = t[2 * k, 2 * k + 1]
        if b < 0:
            o[:, 2 * k + 1] *= -1.0
            b = -b
        nu[k] = 1.0 / b
    S = root @ o @ np.diag(np.repeat(1.0 / np.sqrt(nu), 2))
    return nu, S


def direct_sum(*mats):
    return block_diag(*mats)


def beamsplitter_symplectic(eta, n_modes_per_arm=1):
    """Beam splitter between two arms of ``n_modes_per_arm`` modes each.

    Arm A occupies the first ``n_modes_per_arm`` modes. Quadratures map as
    ``x_A -> sqrt(eta) x_A + sqrt(1-eta) x_B`` and
    ``x_B -> -sqrt(1-eta) x_A + sqrt(eta) x_B``.
    """
    if not 0.0 <= eta <= 1.0:
        raise InvalidArgumentError(f"transmissivity must lie in [0, 1], got {eta}")
    if int(n_modes_per_arm) != n_modes_per_arm or n_modes_per_arm < 1:
        raise InvalidArgumentError("n_modes_per_arm must be a positive integer")
    eye = np.eye(2 * int(n_modes_per_arm))
    t, r = np.sqrt(eta), np.sqrt(1.0 - eta)
    return np.block([[t * eye, r * eye], [-r * eye, t * eye]])


def two_mode_squeezer_symplectic(r):
    """Two-mode squeezer: ``cosh r`` on the diagonal, ``sinh r * diag(1,-1)`` off it.

    With arm 1 in vacuum, arm 2 sees an amplifier of gain ``cosh r``.
    """
    c, s = np.cosh(r), np.sinh(r)
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    return np.block([[c * eye, s * z], [s * z, c * eye]])


def rotation_symplectic(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def squeezer_symplectic(s):
    """Single-mode squeezer: ``diag(e^s, e^-s)``."""
    return np.diag([np.exp(s), np.exp(-s)])


def random_symplectic(n_modes, rng, scale=0.5):
    """Random symplectic matrix: passive * squeezing * passive.

    Passive parts come from a Haar-random unitary; squeezing parameters are
    drawn uniformly from ``[-scale, scale]``.
    """
    from scipy.stats import unitary_group

    def passive():
        u = unitary_group.rvs(n_modes, random_state=rng) if n_modes > 1 else np.exp(
            2j * np.pi * rng.uniform()
        ) * np.ones((1, 1))
        out = np.zeros((2 * n_modes, 2 * n_modes))
        re, im = u.real, u.imag
        # interleaved embedding of a unitary acting on annihilation operators
        out[0::2, 0::2] = re
        out[0::2, 1::2] = -im
        out[1::2, 0::2] = im
        out[1::2, 1::2] = re
        return out

    sq = block_diag(*[squeezer_symplectic(x) for x in rng.uniform(-scale, scale, n_modes)])
    return passive() @ sq @ passive()
