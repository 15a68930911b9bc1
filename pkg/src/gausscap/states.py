"""Gaussian states described by their first and second moments."""

from dataclasses import dataclass

import numpy as np

from . import symplectic as sp
from .errors import InvalidArgumentError, InvalidStateError

# Sign of the cross-correlation block of the two-mode squeezed state,
# Gamma_C = TMS_SIGN * sinh(2r) * diag(1, -1). The teleportation module relies
# on this choice to make unit-gain teleportation noise decay as exp(-2r).
TMS_SIGN = -1.0


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector ``d`` and covariance matrix ``cm`` of an ``n_modes`` state."""

    mean: np.ndarray
    cm: np.ndarray

    def __post_init__(self):
        cm = np.array(self.cm, dtype=float)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] % 2:
            raise InvalidArgumentError(f"cm must be a 2N x 2N matrix, got shape {cm.shape}")
        if mean.shape != (cm.shape[0],):
            raise InvalidArgumentError(
                f"mean has length {mean.size}, expected {cm.shape[0]} to match cm"
            )
        if not sp.is_symmetric(cm):
            raise InvalidStateError("cm is not symmetric")
        if not sp.is_valid_cm(cm):
            raise InvalidStateError("cm violates the uncertainty relation Gamma + i sigma >= 0")
        cm = 0.5 * (cm + cm.T)
        cm.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "cm", cm)
        object.__setattr__(self, "mean", mean)

    @property
    def n_modes(self):
        return self.cm.shape[0] // 2

    def to_dict(self):
        return {"n_modes": self.n_modes, "mean": self.mean.tolist(), "cm": self.cm.tolist()}

    @classmethod
    def from_dict(cls, data):
        try:
            n_modes, mean, cm = data["n_modes"], data["mean"], data["cm"]
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"state JSON is missing field {exc}") from None
        state = cls(mean, cm)
        if state.n_modes != n_modes:
            raise InvalidArgumentError(
                f"n_modes={n_modes} does not match cm dimension {state.cm.shape[0]}"
            )
        return state


def vacuum(n_modes=1):
    n = int(n_modes)
    if n < 1:
        raise InvalidArgumentError("n_modes must be >= 1")
    return GaussianState(np.zeros(2 * n), np.eye(2 * n))


def thermal(nbar):
    if nbar < 0:
        raise InvalidArgumentError(f"mean photon number must be >= 0, got {nbar}")
    return GaussianState(np.zeros(2), (2.0 * nbar + 1.0) * np.eye(2))


def coherent(dq, dp):
    return GaussianState([dq, dp], np.eye(2))


def two_mode_squeezed_cm(r):
    ch, sh = np.cosh(2.0 * r), np.sinh(2.0 * r)
    cross = TMS_SIGN * sh * np.diag([1.0, -1.0])
    return np.block([[ch * np.eye(2), cross], [cross, ch * np.eye(2)]])


def two_mode_squeezed(r):
    """Pure two-mode squeezed vacuum; each arm is ``thermal(sinh(r)**2)``."""
    if r < 0:
        raise InvalidArgumentError(f"squeezing must be >= 0, got {r}")
    return GaussianState(np.zeros(4), two_mode_squeezed_cm(r))


def product(*states):
    return GaussianState(
        np.concatenate([s.mean for s in states]),
        sp.direct_sum(*[s.cm for s in states]),
    )


def quadrature_indices(modes):
    return np.array([2 * m + k for m in modes for k in (0, 1)], dtype=int)


def _check_modes(modes, n_modes):
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise InvalidArgumentError(f"mode indices are not distinct: {modes}")
    bad = [m for m in modes if not 0 <= m < n_modes]
    if bad:
        raise InvalidArgumentError(f"mode indices {bad} out of range for {n_modes} modes")
    return modes


def partial_trace(state, keep):
    """Reduce ``state`` to the modes listed in ``keep`` (in that order).

    An empty ``keep`` is treated as "trace out nothing".
    """
    keep = _check_modes(keep, state.n_modes)
    if not keep:
        return state
    idx = quadrature_indices(keep)
    return GaussianState(state.mean[idx], state.cm[np.ix_(idx, idx)])


def complement(modes, n_modes):
    modes = set(_check_modes(modes, n_modes))
    return [m for m in range(n_modes) if m not in modes]


def _thermal_bits(x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    safe = np.where(x > 0, x, 1.0)
    # (1+x) log(1+x) - x log x, rearranged to avoid cancellation at large x
    val = np.log1p(x) + np.where(x > 0, x * np.log1p(1.0 / safe), 0.0)
    return val / np.log(2.0)


def h(nu):
    """Entropy in bits of one mode with symplectic eigenvalue ``nu``."""
    return _thermal_bits((np.asarray(nu, dtype=float) - 1.0) / 2.0)


def g(nbar):
    """Entropy in bits of a thermal state with mean photon number ``nbar``."""
    return _thermal_bits(nbar)


def cm_entropy(cm):
    return float(np.sum(h(sp.symplectic_eigenvalues(cm))))


def entropy(state):
    """Von Neumann entropy in bits. Depends only on the covariance matrix."""
    return cm_entropy(state.cm)


def conditional_entropy(state, modes_a):
    """``S(A|B) = S(AB) - S(B)`` where B is the complement of ``modes_a``."""
    rest = complement(modes_a, state.n_modes)
    s_ab = entropy(state)
    if not rest:
        return s_ab
    return s_ab - entropy(partial_trace(state, rest))


def mean_photons(state):
    """Total mean photon number, ``(tr Gamma - 2N)/4 + |d|^2/2``."""
    return float((np.trace(state.cm) - 2 * state.n_modes) / 4.0 + state.mean @ state.mean / 2.0)


def purification(state):
    """Pure ``2N``-mode state whose first ``N`` modes reproduce ``state``.

    Each symplectic eigenvalue ``nu`` is paired with an ancilla mode through a
    two-mode squeezed correlation of strength ``sqrt(nu**2 - 1)``.
    """
    nu, S = sp.williamson(state.cm)
    n = state.n_modes
    nu = np.maximum(nu, 1.0)
    z = np.diag([1.0, -1.0])
    cross = sp.direct_sum(*[TMS_SIGN * np.sqrt(v * v - 1.0) * z for v in nu])
    diag = sp.direct_sum(*[v * np.eye(2) for v in nu])
    core = np.block([[diag, cross], [cross.T, diag]])
    lift = sp.direct_sum(S, np.eye(2 * n))
    cm = lift @ core @ lift.T
    cm[: 2 * n, : 2 * n] = state.cm
    return GaussianState(np.concatenate([state.mean, np.zeros(2 * n)]), cm)


def gaussification_reference(mean, cm):
    """The Gaussian state with exactly these moments."""
    return GaussianState(mean, cm)
