"""Gaussian channels ``gamma -> X gamma X^T + Y`` and their dilations."""

from dataclasses import dataclass

import numpy as np

from . import symplectic as sp
from .errors import (
    DilationNotImplementedError,
    InvalidArgumentError,
    NumericalFailureError,
)
from .states import GaussianState

TOL = 1e-9


def cp_matrix(X, Y):
    """Hermitian matrix ``Y + i sigma_out - i X sigma_in X^T``."""
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    s_out = sp.symplectic_form(X.shape[0] // 2)
    s_in = sp.symplectic_form(X.shape[1] // 2)
    herm = Y + 1j * (s_out - X @ s_in @ X.T)
    return 0.5 * (herm + herm.conj().T)


def cp_min_eigenvalue(X, Y):
    return float(np.linalg.eigvalsh(cp_matrix(X, Y))[0])


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    """Channel acting as ``d -> X d`` and ``gamma -> X gamma X^T + Y``.

    ``X`` is ``2 n_out x 2 n_in``; only the conjugate channel of a dilation
    uses ``n_out != n_in``. Construction checks complete positivity unless
    ``validate=False``, in which case ``validated`` stays ``False`` until
    :meth:`checked` succeeds.
    """

    X: np.ndarray
    Y: np.ndarray
    validate: bool = True
    tol: float = 1e-8

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        if X.ndim != 2 or X.shape[0] % 2 or X.shape[1] % 2:
            raise InvalidArgumentError(f"X must have even dimensions, got {X.shape}")
        if Y.shape != (X.shape[0], X.shape[0]):
            raise InvalidArgumentError(f"Y has shape {Y.shape}, expected {(X.shape[0],) * 2}")
        if not sp.is_symmetric(Y):
            raise InvalidArgumentError("Y is not symmetric")
        Y = 0.5 * (Y + Y.T)
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if self.validate and not is_cp(self, self.tol):
            raise InvalidArgumentError(
                "channel is not completely positive: Y + i sigma - i X sigma X^T has "
                f"min eigenvalue {cp_min_eigenvalue(X, Y):.3e}"
            )

    @property
    def n_in(self):
        return self.X.shape[1] // 2

    @property
    def n_out(self):
        return self.X.shape[0] // 2

    @property
    def n_modes(self):
        if self.n_in != self.n_out:
            raise InvalidArgumentError("channel has different input and output sizes")
        return self.n_in

    @property
    def validated(self):
        return self.validate

    def checked(self, tol=1e-8):
        """Return a validated copy, raising if the channel is not CP within ``tol``."""
        return GaussianChannel(self.X, self.Y, validate=True, tol=tol)

    def to_dict(self):
        return {"n_modes": self.n_in, "X": self.X.tolist(), "Y": self.Y.tolist()}

    @classmethod
    def from_dict(cls, data, validate=True):
        try:
            n, X, Y = data["n_modes"], data["X"], data["Y"]
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"channel JSON is missing field {exc}") from None
        ch = cls(X, Y, validate=validate)
        if ch.n_in != n or ch.n_out != n:
            raise InvalidArgumentError(f"n_modes={n} does not match X of shape {ch.X.shape}")
        return ch


def is_cp(channel, tol=TOL):
    return cp_min_eigenvalue(channel.X, channel.Y) >= -tol * max(1.0, np.max(np.abs(channel.Y)))


def identity_channel(n_modes=1):
    return GaussianChannel(np.eye(2 * n_modes), np.zeros((2 * n_modes, 2 * n_modes)))


def attenuation(eta):
    """Pure-loss channel: ``X = sqrt(eta) I``, ``Y = (1 - eta) I``."""
    if not 0.0 < eta <= 1.0:
        raise InvalidArgumentError(f"attenuation needs eta in (0, 1], got {eta}")
    return GaussianChannel(np.sqrt(eta) * np.eye(2), (1.0 - eta) * np.eye(2))


def amplification(eta):
    """Quantum-limited amplifier: ``X = sqrt(eta) I``, ``Y = (eta - 1) I``."""
    if not eta > 1.0:
        raise InvalidArgumentError(f"amplification needs eta > 1, got {eta}")
    return GaussianChannel(np.sqrt(eta) * np.eye(2), (eta - 1.0) * np.eye(2))


def lossy_or_amplifying(eta):
    if eta <= 0:
        raise InvalidArgumentError(f"eta must be > 0, got {eta}")
    return attenuation(eta) if eta <= 1.0 else amplification(eta)


def classical_noise(Y):
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1] or Y.shape[0] % 2:
        raise InvalidArgumentError(f"Y must be 2N x 2N, got shape {Y.shape}")
    if not sp.is_symmetric(Y) or np.linalg.eigvalsh(0.5 * (Y + Y.T))[0] < -TOL:
        raise InvalidArgumentError("classical noise Y must be symmetric positive semidefinite")
    return GaussianChannel(np.eye(Y.shape[0]), Y)


def apply(channel, cm):
    cm = np.asarray(cm, dtype=float)
    if cm.shape != (channel.X.shape[1],) * 2:
        raise InvalidArgumentError(
            f"cm of shape {cm.shape} does not fit channel input of {channel.n_in} modes"
        )
    return channel.X @ cm @ channel.X.T + channel.Y


def apply_state(channel, state):
    return GaussianState(channel.X @ state.mean, apply(channel, state.cm))


def compose(t2, t1):
    """``t2 o t1``: apply ``t1`` first."""
    if t2.X.shape[1] != t1.X.shape[0]:
        raise InvalidArgumentError(
            f"cannot compose: t1 outputs {t1.n_out} modes, t2 takes {t2.n_in}"
        )
    validate = t1.validated and t2.validated
    return GaussianChannel(t2.X @ t1.X, t2.X @ t1.Y @ t2.X.T + t2.Y, validate=validate)


def tensor(*channels):
    return GaussianChannel(
        sp.direct_sum(*[c.X for c in channels]),
        sp.direct_sum(*[c.Y for c in channels]),
        validate=all(c.validated for c in channels),
    )


def conjugate_by(channel, pre, post):
    """``post o channel o pre`` for symplectic ``pre`` and ``post`` (unitary pre/post-processing)."""
    return GaussianChannel(post @ channel.X @ pre, post @ channel.Y @ post.T)


@dataclass(frozen=True, eq=False)
class Dilation:
    """Symplectic ``S`` on environment (first ``n_env`` modes) plus system.

    Blocks: ``A`` env->env, ``B`` sys->env, ``C`` env->sys, ``D`` sys->sys.
    The environment starts in vacuum.
    """

    S: np.ndarray
    n_env: int

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise InvalidArgumentError(f"S must be square of even size, got {S.shape}")
        if not 1 <= self.n_env < S.shape[0] // 2:
            raise InvalidArgumentError(f"n_env={self.n_env} incompatible with S of size {S.shape[0]}")
        if not sp.is_symplectic(S):
            raise InvalidArgumentError(
                f"S is not symplectic (residual {sp.symplectic_residual(S):.3e})"
            )
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    @property
    def n_sys(self):
        return self.S.shape[0] // 2 - self.n_env

    @property
    def A(self):
        e = 2 * self.n_env
        return self.S[:e, :e]

    @property
    def B(self):
        e = 2 * self.n_env
        return self.S[:e, e:]

    @property
    def C(self):
        e = 2 * self.n_env
        return self.S[e:, :e]

    @property
    def D(self):
        e = 2 * self.n_env
        return self.S[e:, e:]

    def channel(self):
        return GaussianChannel(self.D, self.C @ self.C.T)

    def to_dict(self):
        ch = self.channel()
        return {
            "n_modes": self.n_sys,
            "X": ch.X.tolist(),
            "Y": ch.Y.tolist(),
            "n_env": self.n_env,
            "S": self.S.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            dil = cls(data["S"], int(data["n_env"]))
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"dilation JSON is missing field {exc}") from None
        if "n_modes" in data and data["n_modes"] != dil.n_sys:
            raise InvalidArgumentError(
                f"n_modes={data['n_modes']} does not match S with n_env={dil.n_env}"
            )
        return dil


def conjugate_channel(dilation):
    """System -> environment map: ``X_c = B``, ``Y_c = A A^T``."""
    return GaussianChannel(dilation.B, dilation.A @ dilation.A.T)


def _symplectic_complement(rows):
    """Extend symplectic-orthonormal ``rows`` (shape ``2m x 2n``) to a basis.

    Returns the ``2(n - m)`` extra rows, paired so that the completed matrix
    ``[extra; rows]`` is symplectic.
    """
    n = rows.shape[1] // 2
    sigma = sp.symplectic_form(n)

    def omega(u, v):
        return u @ sigma @ v

    pairs = [(rows[2 * k], rows[2 * k + 1]) for k in range(rows.shape[0] // 2)]

    def project(v):
        for _ in range(2):
            for e, f in pairs:
                v = v - omega(v, f) * e + omega(v, e) * f
        return v

    out = []
    candidates = list(np.eye(2 * n))
    while len(pairs) < n:
        projected = [project(v) for v in candidates]
        i = int(np.argmax([np.linalg.norm(v) for v in projected]))
        e = projected[i] / np.linalg.norm(projected[i])
        strengths = [abs(omega(e, v)) for v in projected]
        j = int(np.argmax(strengths))
        if strengths[j] < 1e-10:
            raise NumericalFailureError("symplectic completion failed: degenerate complement")
        f = projected[j] / omega(e, projected[j])
        pairs.append((e, f))
        out.extend([e, f])
    return np.array(out)


def _noise_factor(X, Y, tol):
    """Columns ``w_j`` with ``sum_j w_j w_j^dag = Y + i(sigma - X sigma X^T)``."""
    herm = cp_matrix(X, Y)
    w, v = np.linalg.eigh(herm)
    scale = max(1.0, float(np.max(np.abs(herm))))
    if w[0] < -1e-8 * scale:
        raise InvalidArgumentError(f"channel is not CP (min eigenvalue {w[0]:.3e})")
    keep = w > tol * scale
    return v[:, keep] * np.sqrt(w[keep])


def general_dilation(channel, tol=1e-9):
    """Minimal dilation synthesised from the factorisation of the CP matrix.

    The environment gets one mode per nonzero eigenvalue of
    ``Y + i(sigma - X sigma X^T)`` (at least one), so ``n_env <= 2 n_sys``.
    """
    X, Y = channel.X, channel.Y
    n = channel.n_modes
    factors = _noise_factor(X, Y, tol)
    n_env = max(1, factors.shape[1])
    C = np.zeros((2 * n, 2 * n_env))
    for j in range(factors.shape[1]):
        C[:, 2 * j] = factors[:, j].real
        C[:, 2 * j + 1] = -factors[:, j].imag
    lower = np.hstack([C, X])
    upper = _symplectic_complement(lower)
    S = np.vstack([upper, lower])
    if not sp.is_symplectic(S, 1e-8):
        raise DilationNotImplementedError(
            f"synthesised dilation is not symplectic (residual {sp.symplectic_residual(S):.2e})"
        )
    return Dilation(S, n_env)


def dilation_of(channel, tol=1e-9):
    """Stinespring dilation with vacuum environment.

    Quantum-limited attenuators use a beam splitter and amplifiers a two-mode
    squeezer (one environment mode each). Every other CP channel gets a
    minimal dilation from :func:`general_dilation`, e.g. classical noise with
    full-rank ``Y`` uses two environment modes.
    """
    if channel.n_in != channel.n_out:
        raise InvalidArgumentError("dilations are only built for channels with n_in == n_out")
    X, Y = channel.X, channel.Y
    if X.shape == (2, 2):
        eta = float(np.linalg.det(X))
        iso_x = np.allclose(X, np.sqrt(abs(eta)) * np.eye(2), atol=tol)
        iso_y = np.allclose(Y, abs(1.0 - eta) * np.eye(2), atol=tol)
        if iso_x and iso_y and eta > 0:
            if eta == 1.0 or np.allclose(Y, 0.0, atol=tol):
                return Dilation(np.eye(4), 1)
            if eta < 1.0:
                return Dilation(sp.beamsplitter_symplectic(eta).T, 1)
            return Dilation(sp.two_mode_squeezer_symplectic(np.arccosh(np.sqrt(eta))), 1)
    try:
        return general_dilation(channel, tol)
    except NumericalFailureError as exc:
        raise DilationNotImplementedError(str(exc)) from exc


def minimal_noise_split(channel):
    """Split a single-mode channel as ``classical_noise(Y1) o minimal_noise(X, Y2)``.

    ``Y2 = |1 - det X| * Y / sqrt(det Y)`` saturates the CP condition and lies
    below ``Y``; in the frame where ``Y`` is isotropic this is the
    ``|1 - eta|`` noise of the det-X normal form.

    Returns
    -------
    (GaussianChannel, GaussianChannel)
        ``(t1, t2)`` with ``compose(t1, t2)`` equal to ``channel``.
    """
    X, Y = channel.X, channel.Y
    if X.shape != (2, 2):
        raise InvalidArgumentError("minimal_noise_split is single-mode")
    k = abs(1.0 - float(np.linalg.det(X)))
    det_y = float(np.linalg.det(Y))
    if k < 1e-12:
        Y2 = np.zeros((2, 2))
    else:
        if det_y <= 0:
            raise NumericalFailureError(
                f"no minimal-noise split: det Y = {det_y:.3e} but |1 - det X| = {k:.3e}"
            )
        Y2 = k * Y / np.sqrt(det_y)
    Y1 = Y - Y2
    y1_min = np.linalg.eigvalsh(0.5 * (Y1 + Y1.T))[0]
    if y1_min < -1e-9 * max(1.0, np.max(np.abs(Y))):
        raise NumericalFailureError(f"residual noise Y - Y2 not PSD (min eigenvalue {y1_min:.3e})")
    # clip the tiny negative part left by rounding
    w, v = np.linalg.eigh(0.5 * (Y1 + Y1.T))
    Y1 = (v * np.clip(w, 0.0, None)) @ v.T
    t2 = GaussianChannel(X, Y - Y1)
    return classical_noise(Y1), t2
