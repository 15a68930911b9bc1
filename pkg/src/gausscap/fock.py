"""Truncated Fock-space density matrices for one or two modes.

Used as an independent check of the phase-space formulas and to run the
beam-splitter gaussification protocol at small photon numbers.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.linalg import expm
from scipy.special import gammaln

from . import symplectic as sp
from .errors import InvalidArgumentError, TruncationError

DEFAULT_CUTOFF = 25
MAX_CUTOFF = 60
MAX_TRACE_DEFICIT = 0.01

_HERM_TOL = 1e-10
_PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FockState:
    """Density matrix on ``cutoff ** n_modes`` Fock levels.

    ``trace_deficit`` is the probability weight dropped by truncation so far.
    """

    rho: np.ndarray
    cutoff: int
    n_modes: int = 1
    trace_deficit: float = 0.0

    def __post_init__(self):
        if self.n_modes not in (1, 2):
            raise InvalidArgumentError(f"only 1 or 2 modes are supported, got {self.n_modes}")
        if not 1 <= self.cutoff <= MAX_CUTOFF:
            raise InvalidArgumentError(f"cutoff must lie in [1, {MAX_CUTOFF}], got {self.cutoff}")
        rho = np.array(self.rho, dtype=complex)
        dim = self.cutoff**self.n_modes
        if rho.shape != (dim, dim):
            raise InvalidArgumentError(f"rho has shape {rho.shape}, expected {(dim, dim)}")
        if np.max(np.abs(rho - rho.conj().T)) > _HERM_TOL:
            raise InvalidArgumentError("rho is not Hermitian")
        rho = 0.5 * (rho + rho.conj().T)
        if np.linalg.eigvalsh(rho)[0] < -_PSD_TOL:
            raise InvalidArgumentError("rho is not positive semidefinite")
        if not -1e-9 <= self.trace_deficit <= 1.0:
            raise InvalidArgumentError(f"trace_deficit {self.trace_deficit} outside [0, 1]")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def trace(self):
        return float(np.trace(self.rho).real)

    def to_dict(self):
        return {
            "cutoff": self.cutoff,
            "rho_re": self.rho.real.tolist(),
            "rho_im": self.rho.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            cutoff = int(data["cutoff"])
            rho = np.asarray(data["rho_re"], dtype=float) + 1j * np.asarray(
                data["rho_im"], dtype=float
            )
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"Fock state JSON is missing field {exc}") from None
        n_modes = int(round(np.log(rho.shape[0]) / np.log(cutoff))) if cutoff > 1 else 1
        return cls(rho, cutoff, n_modes, max(0.0, 1.0 - float(np.trace(rho).real)))


def _check_cutoff(cutoff):
    if not 1 <= int(cutoff) <= MAX_CUTOFF:
        raise InvalidArgumentError(f"cutoff must lie in [1, {MAX_CUTOFF}], got {cutoff}")
    return int(cutoff)


def _from_ket(ket, cutoff, n_modes=1):
    return FockState(np.outer(ket, ket.conj()), cutoff, n_modes)


def annihilation(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1)


def number_state(n, cutoff=DEFAULT_CUTOFF):
    cutoff = _check_cutoff(cutoff)
    if not 0 <= n < cutoff:
        raise InvalidArgumentError(f"photon number {n} not below cutoff {cutoff}")
    ket = np.zeros(cutoff, dtype=complex)
    ket[n] = 1.0
    return _from_ket(ket, cutoff)


def vacuum(cutoff=DEFAULT_CUTOFF, n_modes=1):
    state = number_state(0, cutoff)
    return state if n_modes == 1 else tensor(state, state)


def superposition(amplitudes, cutoff=DEFAULT_CUTOFF):
    """Normalised pure state with the given Fock amplitudes."""
    cutoff = _check_cutoff(cutoff)
    amps = np.asarray(amplitudes, dtype=complex)
    if amps.size > cutoff:
        raise InvalidArgumentError("more amplitudes than Fock levels")
    ket = np.zeros(cutoff, dtype=complex)
    ket[: amps.size] = amps
    return _from_ket(ket / np.linalg.norm(ket), cutoff)


def _coherent_ket(alpha, cutoff):
    n = np.arange(cutoff)
    log_mag = -0.5 * abs(alpha) ** 2 - 0.5 * gammaln(n + 1)
    with np.errstate(divide="ignore"):
        log_mag = log_mag + n * np.log(abs(alpha)) if alpha != 0 else np.where(n == 0, log_mag, -np.inf)
    return np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)


def coherent(alpha, cutoff=DEFAULT_CUTOFF):
    """Coherent state ``|alpha>``; its mean vector is ``sqrt(2) (Re alpha, Im alpha)``."""
    cutoff = _check_cutoff(cutoff)
    ket = _coherent_ket(alpha, cutoff)
    return FockState(np.outer(ket, ket.conj()), cutoff, 1, max(0.0, 1.0 - float(np.vdot(ket, ket).real)))


def thermal(nbar, cutoff=DEFAULT_CUTOFF):
    cutoff = _check_cutoff(cutoff)
    if nbar < 0:
        raise InvalidArgumentError("mean photon number must be >= 0")
    n = np.arange(cutoff)
    p = (nbar / (1.0 + nbar)) ** n / (1.0 + nbar)
    return FockState(np.diag(p).astype(complex), cutoff, 1, max(0.0, 1.0 - p.sum()))


def two_mode_squeezed(r, cutoff=DEFAULT_CUTOFF):
    """``sum_n (-tanh r)^n |n, n> / cosh r``.

    The alternating sign matches the cross-correlation sign of
    :func:`gausscap.states.two_mode_squeezed`.
    """
    cutoff = _check_cutoff(cutoff)
    ket = np.zeros(cutoff * cutoff, dtype=complex)
    n = np.arange(cutoff)
    ket[n * cutoff + n] = (-np.tanh(r)) ** n / np.cosh(r)
    norm = float(np.vdot(ket, ket).real)
    return FockState(np.outer(ket, ket.conj()), cutoff, 2, max(0.0, 1.0 - norm))


def tensor(a, b):
    if a.cutoff != b.cutoff or a.n_modes != 1 or b.n_modes != 1:
        raise InvalidArgumentError("tensor product needs two single-mode states with equal cutoff")
    deficit = 1.0 - (1.0 - a.trace_deficit) * (1.0 - b.trace_deficit)
    return FockState(np.kron(a.rho, b.rho), a.cutoff, 2, deficit)


def partial_trace(state, keep):
    """Reduce a two-mode state to mode ``keep`` (0 or 1)."""
    if state.n_modes != 2 or keep not in (0, 1):
        raise InvalidArgumentError("partial_trace needs a two-mode state and keep in {0, 1}")
    c = state.cutoff
    r = state.rho.reshape(c, c, c, c)
    red = np.einsum("ijkj->ik", r) if keep == 0 else np.einsum("ijik->jk", r)
    return FockState(red, c, 1, state.trace_deficit)


def _quadratures(cutoff, n_modes):
    a = annihilation(cutoff)
    q = (a + a.T) / np.sqrt(2.0)
    p = (a - a.T) / (1j * np.sqrt(2.0))
    eye = np.eye(cutoff)
    if n_modes == 1:
        return [q, p]
    return [np.kron(q, eye), np.kron(p, eye), np.kron(eye, q), np.kron(eye, p)]


def _padded(state, extra=2):
    """Embed rho into a larger cutoff so that second moments are exact."""
    c, big = state.cutoff, state.cutoff + extra
    if state.n_modes == 1:
        out = np.zeros((big, big), dtype=complex)
        out[:c, :c] = state.rho
        return out, big
    r = state.rho.reshape(c, c, c, c)
    out = np.zeros((big, big, big, big), dtype=complex)
    out[:c, :c, :c, :c] = r
    return out.reshape(big * big, big * big), big


def moments_of(state):
    """First moments ``d_k = tr(rho R_k)`` and covariance matrix.

    ``Gamma_kl = tr(rho {R_k - d_k, R_l - d_l})`` with ``Q = (a + a^dag)/sqrt 2``,
    so that the vacuum has ``Gamma = identity``.
    """
    if state.trace_deficit > MAX_TRACE_DEFICIT:
        raise TruncationError(
            f"trace deficit {state.trace_deficit:.3g} exceeds {MAX_TRACE_DEFICIT}"
        )
    rho, big = _padded(state)
    ops = _quadratures(big, state.n_modes)
    d = np.array([np.trace(rho @ op).real for op in ops])
    dim = len(ops)
    cm = np.empty((dim, dim))
    for k in range(dim):
        for l in range(k, dim):
            anti = ops[k] @ ops[l] + ops[l] @ ops[k]
            cm[k, l] = cm[l, k] = np.trace(rho @ anti).real - 2.0 * d[k] * d[l]
    return d, cm


def mean_photons(state):
    n = np.arange(state.cutoff, dtype=float)
    if state.n_modes == 2:
        n = (n[:, None] + n[None, :]).reshape(-1)
    return float(np.sum(np.diag(state.rho).real * n))


@lru_cache(maxsize=16)
def _bs_contraction(eta, cutoff):
    """Beam-splitter unitary restricted to ``n_a, n_b < cutoff``.

    The unitary conserves total photon number, so each number sector is
    exponentiated exactly in its full ``N + 1`` dimensional space and then
    restricted; the truncation affects only which outputs are kept.
    """
    theta = np.arccos(np.sqrt(eta))
    dim = cutoff * cutoff
    rows, cols, vals = [], [], []
    for total in range(2 * cutoff - 1):
        k = np.arange(total + 1)
        # generator a^dag b - a b^dag on |k, total-k>
        up = np.sqrt((k[:-1] + 1.0) * (total - k[:-1]))
        gen = np.diag(up, -1) - np.diag(up, 1)
        u = expm(theta * gen)
        keep = (k < cutoff) & (total - k < cutoff)
        flat = k[keep] * cutoff + (total - k[keep])
        block = u[np.ix_(keep, keep)]
        rows.append(np.repeat(flat, flat.size))
        cols.append(np.tile(flat, flat.size))
        vals.append(block.reshape(-1))
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def apply_bs(state, eta):
    """Conjugate a two-mode state by the beam splitter of transmissivity ``eta``.

    On quadratures this is :func:`gausscap.symplectic.beamsplitter_symplectic`.
    """
    if state.n_modes != 2:
        raise InvalidArgumentError("apply_bs needs a two-mode state")
    if not 0.0 <= eta <= 1.0:
        raise InvalidArgumentError(f"transmissivity must lie in [0, 1], got {eta}")
    u = _bs_contraction(float(eta), state.cutoff)
    rho = np.asarray(u @ (u @ state.rho).T).T
    lost = max(0.0, state.trace - float(np.trace(rho).real))
    deficit = state.trace_deficit + lost
    if deficit > MAX_TRACE_DEFICIT:
        raise TruncationError(f"beam splitter pushed {deficit:.3g} weight past the cutoff")
    return FockState(rho, state.cutoff, 2, deficit)


def apply_attenuation(state, eta):
    """Loss channel: mix with vacuum on a beam splitter, discard the second arm.

    Evaluated with the Kraus operators of that dilation,
    ``A_k |n> = sqrt(C(n, k) eta^(n-k) (1-eta)^k) |n-k>``, which never leave
    the truncated space. :func:`apply_bs` gives the same map explicitly.
    """
    if state.n_modes != 1:
        raise InvalidArgumentError("attenuation acts on a single mode")
    if not 0.0 < eta <= 1.0:
        raise InvalidArgumentError(f"transmissivity must lie in (0, 1], got {eta}")
    if eta == 1.0:
        return state
    c = state.cutoff
    n = np.arange(c)
    rho = np.zeros((c, c), dtype=complex)
    for k in range(c):
        src = n[k:]
        log_amp = 0.5 * (
            gammaln(src + 1) - gammaln(k + 1) - gammaln(src - k + 1)
            + (src - k) * np.log(eta) + k * np.log1p(-eta)
        )
        a = np.zeros((c, c))
        a[src - k, src] = np.exp(log_amp)
        rho += a @ state.rho @ a.T
    return FockState(rho, c, 1, state.trace_deficit)


def apply_channel_fock(state, channel):
    """Apply an attenuation channel given as a :class:`GaussianChannel`."""
    X, Y = np.asarray(channel.X), np.asarray(channel.Y)
    eta = X[0, 0] ** 2
    if (
        X.shape != (2, 2)
        or not np.allclose(X, np.sqrt(eta) * np.eye(2), atol=1e-12)
        or not np.allclose(Y, (1.0 - eta) * np.eye(2), atol=1e-12)
        or not 0.0 < eta <= 1.0
    ):
        raise NotImplementedError("Fock backend implements attenuation channels only")
    return apply_attenuation(state, eta)


def apply_amplifier(state, gain):
    """Quantum-limited amplifier with power gain ``gain >= 1`` (Kraus form)."""
    if state.n_modes != 1:
        raise InvalidArgumentError("amplifier acts on a single mode")
    if gain < 1.0:
        raise InvalidArgumentError(f"gain must be >= 1, got {gain}")
    c = state.cutoff
    n = np.arange(c)
    rho = np.zeros((c, c), dtype=complex)
    t = 1.0 - 1.0 / gain
    for k in range(c):
        # B_k |n> = sqrt(C(n+k, k) t^k / gain^(n+1)) |n+k>
        src = n[: c - k]
        log_amp = 0.5 * (
            gammaln(src + k + 1) - gammaln(src + 1) - gammaln(k + 1)
            - (src + 1) * np.log(gain)
        )
        if k:
            if t == 0.0:
                break
            log_amp = log_amp + 0.5 * k * np.log(t)
        b = np.zeros((c, c))
        b[src + k, src] = np.exp(log_amp)
        rho += b @ state.rho @ b.T
    lost = max(0.0, state.trace - float(np.trace(rho).real))
    deficit = state.trace_deficit + lost
    if deficit > MAX_TRACE_DEFICIT:
        raise TruncationError(f"amplifier pushed {deficit:.3g} weight past the cutoff")
    return FockState(rho, c, 1, deficit)


def apply_additive_noise(state, y):
    """Isotropic classical noise ``Y = y * identity`` as amplifier after attenuator."""
    if y < 0:
        raise InvalidArgumentError("noise variance must be >= 0")
    gain = 1.0 + y / 2.0
    return apply_amplifier(apply_attenuation(state, 1.0 / gain), gain)


def gaussification_round(state):
    """One round: ``rho (x) rho``, 50:50 beam splitter, keep the first arm."""
    if state.n_modes != 1:
        raise InvalidArgumentError("gaussification acts on single-mode states")
    return partial_trace(apply_bs(tensor(state, state), 0.5), 0)


def trace_distance(a, b):
    """``||rho_a - rho_b||_1 / 2``."""
    if a.rho.shape != b.rho.shape:
        raise InvalidArgumentError(f"dimension mismatch {a.rho.shape} vs {b.rho.shape}")
    w = np.linalg.eigvalsh(a.rho - b.rho)
    return float(min(1.0, 0.5 * np.sum(np.abs(w))))


def _padding_for(cm, mean, cutoff):
    return min(4 * MAX_CUTOFF, max(2 * cutoff, cutoff + 40 + int(4 * (np.trace(cm) + mean @ mean))))


def gaussian_reference_fock(mean, cm, cutoff=DEFAULT_CUTOFF):
    """Fock density matrix of the single-mode Gaussian state with moments ``(mean, cm)``.

    Built as displacement * rotation * squeezing applied to a thermal state in
    an enlarged space, then truncated to ``cutoff``.
    """
    cutoff = _check_cutoff(cutoff)
    mean = np.asarray(mean, dtype=float)
    cm = np.asarray(cm, dtype=float)
    if cm.shape != (2, 2) or mean.shape != (2,):
        raise InvalidArgumentError("gaussian_reference_fock is single-mode")
    if not sp.is_valid_cm(cm):
        raise InvalidArgumentError("cm violates the uncertainty relation")
    nu = float(np.sqrt(max(np.linalg.det(cm), 1.0)))
    w, v = np.linalg.eigh(cm / nu)
    # cm = nu * R(phi) diag(e^{2s}, e^{-2s}) R(phi)^T, larger variance along phi
    s = 0.25 * np.log(w[1] / w[0])
    phi = np.arctan2(v[1, 1], v[0, 1])

    big = _padding_for(cm, mean, cutoff)
    a = annihilation(big)
    ad = a.T
    nbar = (nu - 1.0) / 2.0
    p = (nbar / (1.0 + nbar)) ** np.arange(big) / (1.0 + nbar)
    rho = np.diag(p).astype(complex)
    # exp((s/2)(a^dag^2 - a^2)) maps Q -> e^{s} Q
    squeeze = expm(0.5 * s * (ad @ ad - a @ a))
    rotate = np.diag(np.exp(1j * phi * np.arange(big)))
    alpha = (mean[0] + 1j * mean[1]) / np.sqrt(2.0)
    displace = expm(alpha * ad - np.conj(alpha) * a)
    u = displace @ rotate @ squeeze
    rho = u @ rho @ u.conj().T
    rho = rho[:cutoff, :cutoff]
    deficit = max(0.0, 1.0 - float(np.trace(rho).real))
    if deficit > MAX_TRACE_DEFICIT:
        raise TruncationError(f"moments too large for cutoff {cutoff}: deficit {deficit:.3g}")
    return FockState(rho, cutoff, 1, deficit)
