"""Teleportation channels induced by a bipartite Gaussian resource, and rate certification.

The resource has ``n`` receiver modes (A) followed by ``n`` sender modes (B).
With gain matrix ``G`` (``sqrt 2 * G`` is the displacement matrix applied by
the receiver) and ``L = diag(1, -1, ...)``, teleportation maps

    gamma -> G^T gamma G + Gamma_A + Gamma_C L G + (Gamma_C L G)^T + G^T L Gamma_B L G

and in characteristic-function form ``chi_out(x) = chi_in(G x) chi_res(x + L G x)``.
In the ``X gamma X^T + Y`` convention used everywhere else, ``X = G^T``.
"""

from dataclasses import dataclass

import numpy as np

from . import capacity as cap
from . import channels as chn
from . import symplectic as sp
from .errors import InvalidArgumentError, InvalidMeasurementError
from .states import GaussianState, cm_entropy, quadrature_indices

PROJECTION_LIMIT = 1e-6


@dataclass(frozen=True, eq=False)
class TeleportResource:
    """Bipartite covariance matrix ``[[Gamma_A, Gamma_C], [Gamma_C^T, Gamma_B]]`` with ``N_A = N_B``."""

    cm: np.ndarray

    def __post_init__(self):
        cm = np.array(self.cm, dtype=float)
        if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] % 4:
            raise InvalidArgumentError(
                f"resource cm must be 4n x 4n (equal halves), got shape {cm.shape}"
            )
        if not sp.is_symmetric(cm):
            raise InvalidArgumentError("resource cm is not symmetric")
        if not sp.is_valid_cm(cm):
            raise InvalidArgumentError("resource cm violates the uncertainty relation")
        cm = 0.5 * (cm + cm.T)
        cm.setflags(write=False)
        object.__setattr__(self, "cm", cm)

    @property
    def n_modes(self):
        """Modes per side."""
        return self.cm.shape[0] // 4

    @property
    def gamma_a(self):
        k = 2 * self.n_modes
        return self.cm[:k, :k]

    @property
    def gamma_b(self):
        k = 2 * self.n_modes
        return self.cm[k:, k:]

    @property
    def gamma_c(self):
        k = 2 * self.n_modes
        return self.cm[:k, k:]


def _gain(resource, gain):
    n = resource.n_modes
    if gain is None:
        return np.eye(2 * n)
    gain = np.asarray(gain, dtype=float)
    if gain.shape != (2 * n, 2 * n):
        raise InvalidArgumentError(f"gain has shape {gain.shape}, expected {(2 * n, 2 * n)}")
    if not np.all(np.isfinite(gain)):
        raise InvalidArgumentError("gain has non-finite entries")
    return gain


def teleport_channel(resource, gain=None):
    """Gaussian channel obtained by teleporting through ``resource``.

    Returned unvalidated; call ``.checked()`` to enforce complete positivity.
    """
    G = _gain(resource, gain)
    lam = sp.reflection(resource.n_modes)
    gc_lg = resource.gamma_c @ lam @ G
    Y = resource.gamma_a + gc_lg + gc_lg.T + G.T @ lam.T @ resource.gamma_b @ lam @ G
    return chn.GaussianChannel(G.T, Y, validate=False)


def _log_chi(mean, cm):
    def f(xi):
        return 1j * xi @ mean - 0.25 * xi @ cm @ xi

    return f


def characteristic_action(resource, gain, state, resource_mean=None):
    """Teleport a Gaussian ``state`` by composing characteristic functions.

    The output moments are read off ``log chi_out`` by polarisation on the
    coordinate axes, independently of the covariance-matrix formula.
    """
    G = _gain(resource, gain)
    n = resource.n_modes
    if state.n_modes != n:
        raise InvalidArgumentError(f"input has {state.n_modes} modes, resource side has {n}")
    lam = sp.reflection(n)
    res_mean = np.zeros(4 * n) if resource_mean is None else np.asarray(resource_mean, float)
    log_in = _log_chi(state.mean, state.cm)
    log_res = _log_chi(res_mean, resource.cm)

    def log_out(xi):
        return log_in(G @ xi) + log_res(np.concatenate([xi, lam @ G @ xi]))

    dim = 2 * n
    eye = np.eye(dim)
    quad = [-4.0 * log_out(e).real for e in eye]
    cm = np.empty((dim, dim))
    for k in range(dim):
        cm[k, k] = quad[k]
        for l in range(k + 1, dim):
            both = -4.0 * log_out(eye[k] + eye[l]).real
            cm[k, l] = cm[l, k] = 0.5 * (both - quad[k] - quad[l])
    mean = np.array([log_out(e).imag for e in eye])
    return GaussianState(mean, cm)


@dataclass(frozen=True, eq=False)
class CertifiedRateReport:
    entropy_bound: float
    channel: chn.GaussianChannel
    bounds: cap.CapacityReport | None
    certified_rate: float
    projection: float = 0.0

    @property
    def tg_lower(self):
        return None if self.bounds is None else self.bounds.lower

    @property
    def tg_upper(self):
        return None if self.bounds is None else self.bounds.upper

    def to_dict(self):
        return {
            "entropy_bound": self.entropy_bound,
            "tg_lower": cap._num(self.tg_lower),
            "tg_upper": cap._num(self.tg_upper),
            "certified_rate": self.certified_rate,
            "projection_epsilon": self.projection,
            "channel": None if self.channel is None else self.channel.to_dict(),
        }


def project_measured_cm(cm):
    """Add ``eps * identity`` with minimal ``eps`` to make a slightly unphysical cm valid.

    Returns ``(cm, eps)``. Raises if the violation exceeds ``PROJECTION_LIMIT``.
    """
    cm = np.asarray(cm, dtype=float)
    if not sp.is_symmetric(cm, 1e-8):
        raise InvalidMeasurementError("measured cm is not symmetric")
    cm = 0.5 * (cm + cm.T)
    n = cm.shape[0] // 2
    lo = float(np.linalg.eigvalsh(cm + 1j * sp.symplectic_form(n))[0])
    if lo >= 0:
        return cm, 0.0
    if lo < -PROJECTION_LIMIT:
        raise InvalidMeasurementError(
            f"Gamma + i sigma has min eigenvalue {lo:.3e}, beyond projection limit {PROJECTION_LIMIT}"
        )
    eps = -lo + 1e-15
    return cm + eps * np.eye(cm.shape[0]), eps


def certify_from_moments(cm, n_modes_a=None, gain=None):
    """Certified achievable rate from the second moments of ``(T x id)(psi)``.

    ``cm`` lists the channel-output modes (A) first. The certified rate is the
    larger of ``max(0, S(Gamma_A) - S(Gamma))`` and the lower capacity bound of
    the teleportation channel built from ``cm``.
    """
    cm = np.asarray(cm, dtype=float)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] % 2:
        raise InvalidArgumentError(f"cm must be 2N x 2N, got shape {cm.shape}")
    n_total = cm.shape[0] // 2
    n_a = n_total // 2 if n_modes_a is None else int(n_modes_a)
    if not 1 <= n_a < n_total:
        raise InvalidArgumentError(f"modes_a={n_a} out of range for {n_total} modes")
    cm, eps = project_measured_cm(cm)
    idx_a = quadrature_indices(range(n_a))
    entropy_bound = max(0.0, cm_entropy(cm[np.ix_(idx_a, idx_a)]) - cm_entropy(cm))

    bounds = None
    channel = None
    if n_a == n_total - n_a:
        channel = teleport_channel(TeleportResource(cm), gain)
        if n_a == 1:
            bounds = cap.capacity_bounds(channel.checked())
    lower = 0.0 if bounds is None else float(bounds.lower)
    return CertifiedRateReport(entropy_bound, channel, bounds, max(entropy_bound, lower), eps)
