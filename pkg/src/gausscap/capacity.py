"""Degradability, coherent information and quantum capacities of Gaussian channels."""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import channels as chn
from . import symplectic as sp
from .errors import InvalidArgumentError, InvalidStateError, NumericalFailureError, PreconditionError
from .states import cm_entropy, g

_LN2 = math.log(2.0)
# coherent informations below this are rounding noise (pure inputs give exactly 0)
ENTROPY_FLOOR = 1e-12


class Verdict(enum.Enum):
    DEGRADABLE = "Degradable"
    ANTI_DEGRADABLE = "AntiDegradable"
    BOTH = "Both"
    NEITHER = "Neither"
    INCONCLUSIVE = "Inconclusive"


class Criterion(enum.Enum):
    # (2 X sigma X^T sigma^T - 1) Y >= 0, decisive when n_env == n_sys
    CHANNEL_MATRICES = "channel-matrices"
    # (1 + i sigma) - K (1 + i sigma) K^T >= 0 with K = C^T D^-T sigma D^-1 C
    DILATION_BLOCKS = "dilation-blocks"


class Method(enum.Enum):
    CLOSED_FORM = "closed-form"
    DEGRADABLE_GAUSSIAN_OPT = "degradable-gaussian-opt"
    BOUNDS_ONLY = "bounds-only"
    CERTIFIED = "certified"


@dataclass(frozen=True, eq=False)
class Classification:
    verdict: Verdict
    witness: np.ndarray
    criterion_used: Criterion
    min_eigenvalue: float = float("nan")
    max_eigenvalue: float = float("nan")
    diagnostic: str = ""

    @property
    def degradable(self):
        return self.verdict in (Verdict.DEGRADABLE, Verdict.BOTH)

    @property
    def anti_degradable(self):
        return self.verdict in (Verdict.ANTI_DEGRADABLE, Verdict.BOTH)

    def to_dict(self):
        witness = self.witness
        if np.iscomplexobj(witness):
            witness = {"re": witness.real.tolist(), "im": witness.imag.tolist()}
        else:
            witness = witness.tolist()
        return {
            "verdict": self.verdict.value,
            "criterion_used": self.criterion_used.value,
            "min_eigenvalue": _num(self.min_eigenvalue),
            "max_eigenvalue": _num(self.max_eigenvalue),
            "witness": witness,
            "diagnostic": self.diagnostic,
        }


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x) and x > 0:
        return {"infinite": True}
    if math.isnan(x):
        return None
    return x


@dataclass(eq=False)
class CapacityReport:
    """Capacity in qubits per use, either a value or a ``[lower, upper]`` interval."""

    method: Method
    value: float | None = None
    lower: float | None = None
    upper: float | None = None
    classification: Classification | None = None
    optimizer_state: dict | None = None
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        if self.value is not None:
            if self.lower is None:
                self.lower = self.value
            if self.upper is None:
                self.upper = self.value
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise NumericalFailureError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def infinite(self):
        return self.value is not None and math.isinf(self.value)

    def to_dict(self):
        out = {
            "method": self.method.value,
            "value": _num(self.value),
            "lower": _num(self.lower),
            "upper": _num(self.upper),
            "diagnostics": list(self.diagnostics),
        }
        if self.classification is not None:
            out["classification"] = self.classification.verdict.value
        if self.optimizer_state is not None:
            state = dict(self.optimizer_state)
            if "input_cm" in state:
                state["input_cm"] = np.asarray(state["input_cm"]).tolist()
            out["optimizer_state"] = state
        return out


# --- degradability -----------------------------------------------------------


def _verdict(herm, tol, scale):
    w = np.linalg.eigvalsh(herm)
    lo, hi = float(w[0]), float(w[-1])
    thr = tol * max(1.0, scale)
    pos, neg = lo >= -thr, hi <= thr
    if pos and neg:
        verdict = Verdict.BOTH
    elif pos:
        verdict = Verdict.DEGRADABLE
    elif neg:
        verdict = Verdict.ANTI_DEGRADABLE
    else:
        verdict = Verdict.NEITHER
    return verdict, lo, hi


def channel_matrix_witness(X, Y):
    """``(2 X sigma X^T sigma^T - 1) Y``; symmetrised when it is not symmetric."""
    n = X.shape[0] // 2
    sigma = sp.symplectic_form(n)
    factor = 2.0 * X @ sigma @ X.T @ sigma.T - np.eye(2 * n)
    return factor @ Y, factor


def dilation_witness(dilation):
    """``(1 + i sigma) - K (1 + i sigma) K^T`` with ``K = C^T D^-T sigma D^-1 C``."""
    C, D = dilation.C, dilation.D
    d_inv = np.linalg.inv(D)
    K = C.T @ d_inv.T @ sp.symplectic_form(dilation.n_sys) @ d_inv @ C
    base = np.eye(2 * dilation.n_env) + 1j * sp.symplectic_form(dilation.n_env)
    herm = base - K @ base @ K.T
    return 0.5 * (herm + herm.conj().T), K


def _classify_matrices(channel, tol):
    X, Y = channel.X, channel.Y
    if np.max(np.abs(Y), initial=0.0) <= tol:
        return Classification(
            Verdict.DEGRADABLE, np.zeros_like(Y), Criterion.CHANNEL_MATRICES, 0.0, 0.0,
            "Y = 0: symplectic unitary channel, conjugate output is constant",
        )
    witness, factor = channel_matrix_witness(X, Y)
    asym = float(np.max(np.abs(witness - witness.T)))
    sym = 0.5 * (witness + witness.T)
    scale = float(np.linalg.norm(factor, 2) * np.linalg.norm(Y, 2))
    verdict, lo, hi = _verdict(sym, tol, scale)
    diag = f"witness asymmetry {asym:.2e}, symmetric part used" if asym > 1e-9 else ""
    return Classification(verdict, witness, Criterion.CHANNEL_MATRICES, lo, hi, diag)


def _classify_dilation(dilation, tol):
    D = dilation.D
    if np.linalg.cond(D) > 1e12:
        return Classification(
            Verdict.INCONCLUSIVE, np.asarray(D), Criterion.DILATION_BLOCKS,
            diagnostic=f"system block D is singular (cond {np.linalg.cond(D):.2e})",
        )
    herm, K = dilation_witness(dilation)
    scale = 2.0 * max(1.0, float(np.linalg.norm(K, 2)) ** 2)
    verdict, lo, hi = _verdict(herm, tol, scale)
    return Classification(verdict, herm, Criterion.DILATION_BLOCKS, lo, hi)


def environment_modes(channel, tol=1e-9):
    """Size of a minimal vacuum environment: rank of ``Y + i(sigma - X sigma X^T)``."""
    herm = chn.cp_matrix(channel.X, channel.Y)
    w = np.linalg.eigvalsh(herm)
    return int(np.sum(w > tol * max(1.0, float(np.max(np.abs(herm))))))


def classify(target, tol=1e-8, criterion=None):
    """Degradability verdict for a channel or a dilation.

    Parameters
    ----------
    target : GaussianChannel or Dilation
    tol : float
        Eigenvalue tolerance, scaled by the witness norm.
    criterion : Criterion, optional
        Force a criterion. By default a channel whose minimal environment fits
        in ``n_sys`` modes is judged from ``(X, Y)``; otherwise (and for any
        explicit dilation) the dilation-block test is used, because the
        ``(X, Y)`` test is only necessary when the environment is larger.
    """
    if isinstance(target, chn.Dilation):
        if criterion is Criterion.CHANNEL_MATRICES:
            if target.n_env != target.n_sys:
                return Classification(
                    Verdict.INCONCLUSIVE, np.zeros((0, 0)), criterion,
                    diagnostic="channel-matrix test needs n_env == n_sys",
                )
            return _classify_matrices(target.channel(), tol)
        return _classify_dilation(target, tol)

    channel = target
    if channel.n_in != channel.n_out:
        raise InvalidArgumentError("classification needs n_in == n_out")
    if criterion is None:
        criterion = (
            Criterion.CHANNEL_MATRICES
            if environment_modes(channel) <= channel.n_modes
            else Criterion.DILATION_BLOCKS
        )
    if criterion is Criterion.CHANNEL_MATRICES:
        return _classify_matrices(channel, tol)
    try:
        dilation = chn.dilation_of(channel)
    except NotImplementedError as exc:
        return Classification(
            Verdict.INCONCLUSIVE, np.zeros((0, 0)), criterion, diagnostic=f"no dilation: {exc}"
        )
    return _classify_dilation(dilation, tol)


# --- coherent information ----------------------------------------------------


def coherent_information_gaussian(cm, dilation):
    """``S(D G D^T + C C^T) - S(B G B^T + A A^T)`` in bits."""
    cm = np.asarray(cm, dtype=float)
    if not sp.is_valid_cm(cm):
        raise InvalidStateError("input covariance matrix violates the uncertainty relation")
    A, B, C, D = dilation.A, dilation.B, dilation.C, dilation.D
    out = D @ cm @ D.T + C @ C.T
    env = B @ cm @ B.T + A @ A.T
    return cm_entropy(out) - cm_entropy(env)


def lossy_closed_form(eta):
    """``max(0, log2|eta| - log2|1 - eta|)`` for any real ``eta``; ``inf`` at 1."""
    if eta == 1.0:
        return math.inf
    if eta == 0.0:
        return 0.0
    return max(0.0, math.log2(abs(eta)) - math.log2(abs(1.0 - eta)))


def capacity_lossy(eta):
    """Quantum capacity of attenuation (``eta <= 1``) or amplification (``eta > 1``)."""
    if not eta > 0:
        raise InvalidArgumentError(f"eta must be > 0, got {eta}")
    return lossy_closed_form(float(eta))


def loss_length_curve(grid):
    """``(x, Q(exp(-x)))`` for each loss length ``x = l / l_a``."""
    out = []
    for x in grid:
        if x < 0:
            raise InvalidArgumentError(f"grid values must be >= 0, got {x}")
        out.append((float(x), math.inf if x == 0 else lossy_closed_form(math.exp(-x))))
    return out


# --- single-mode Gaussian-input optimisation ---------------------------------

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, a, b, tol=1e-10, max_iter=200):
    """Golden-section search for the maximum of a unimodal ``f`` on ``[a, b]``."""
    c, d = b - _GOLD * (b - a), a + _GOLD * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = f(d)
    candidates = [(fa, x) for fa, x in ((f(a), a), (fc, c), (fd, d), (f(b), b))]
    best = max(candidates, key=lambda t: t[0])
    return best[1], best[0]


def gaussian_input_cm(photons, s, phi):
    """Single-mode input with ``photons`` mean photons, squeezing ``s`` along angle ``phi``.

    ``gamma = (2 N_th + 1) R(phi) diag(e^{2s}, e^{-2s}) R(phi)^T`` with ``N_th``
    fixed by the photon budget, so ``cosh(2s) <= 2 photons + 1`` is required.
    """
    n_th = max(0.0, ((2.0 * photons + 1.0) / math.cosh(2.0 * s) - 1.0) / 2.0)
    rot = sp.rotation_symplectic(phi)
    return (2.0 * n_th + 1.0) * rot @ np.diag([math.exp(2 * s), math.exp(-2 * s)]) @ rot.T


def _max_squeeze(photons):
    return 0.5 * math.acosh(2.0 * photons + 1.0)


def optimize_gaussian_input(dilation, max_photons, sweeps=30, tol=1e-10):
    """Coordinate ascent of the coherent information over ``(photons, s, phi)``.

    Returns ``(J, photons, s, phi, iterations)``.
    """

    def J(u, t, phi):
        return coherent_information_gaussian(gaussian_input_cm(u, t * _max_squeeze(u), phi), dilation)

    u, t, phi = max_photons, 0.0, 0.0
    best = J(u, t, phi)
    it = 0
    for it in range(1, sweeps + 1):
        prev = best
        t, best = golden_max(lambda x: J(u, x, phi), -1.0, 1.0, tol)
        if abs(t * _max_squeeze(u)) > 1e-9:
            phi, best = golden_max(lambda x: J(u, t, x), 0.0, math.pi, tol)
        u, best = golden_max(lambda x: J(x, t, phi), 0.0, max_photons, tol * max(1.0, max_photons))
        if best - prev < 1e-13:
            break
    return best, u, t * _max_squeeze(u), phi, it


def _thermal_sequence(dilation, decades=range(1, 7)):
    vals = []
    for k in decades:
        nbar = 10.0**k
        vals.append((nbar, coherent_information_gaussian((2 * nbar + 1) * np.eye(2), dilation)))
    return vals


def _clamp(j):
    return float(j) if j > ENTROPY_FLOOR else 0.0


def _require_single_mode(channel):
    if channel.X.shape != (2, 2):
        raise InvalidArgumentError("this operation is implemented for single-mode channels")


def capacity_degradable(channel, dilation=None, max_photons=None, classification=None, opt_tol=1e-10):
    """Capacity of a degradable single-mode channel over Gaussian inputs.

    Unconstrained: thermal inputs at ``10, 100, ..., 1e6`` photons,
    Richardson-extrapolated in ``1/N``. Constrained: coordinate ascent over
    the photon budget, squeezing and squeezing angle.
    """
    _require_single_mode(channel)
    if dilation is None:
        dilation = chn.dilation_of(channel)
    if classification is None:
        classification = classify(dilation if dilation.n_env > dilation.n_sys else channel)
    if classification.verdict in (Verdict.ANTI_DEGRADABLE, Verdict.BOTH):
        return CapacityReport(
            Method.DEGRADABLE_GAUSSIAN_OPT, 0.0, classification=classification,
            diagnostics=["anti-degradable: capacity is exactly zero"],
        )
    if classification.verdict is not Verdict.DEGRADABLE:
        raise PreconditionError(
            f"channel is not degradable (verdict {classification.verdict.value})"
        )
    if max_photons is not None:
        if max_photons < 0:
            raise InvalidArgumentError("max_photons must be >= 0")
        if max_photons == 0:
            return CapacityReport(Method.DEGRADABLE_GAUSSIAN_OPT, 0.0, classification=classification,
                                  optimizer_state={"photons": 0.0, "s": 0.0, "phi": 0.0, "iterations": 0,
                                                   "input_cm": np.eye(2)})
        val, u, s, phi, it = optimize_gaussian_input(dilation, float(max_photons), tol=opt_tol)
        return CapacityReport(
            Method.DEGRADABLE_GAUSSIAN_OPT,
            _clamp(val),
            classification=classification,
            optimizer_state={
                "photons": u, "s": s, "phi": phi, "iterations": it,
                "input_cm": gaussian_input_cm(u, s, phi),
            },
        )

    if abs(float(np.linalg.det(channel.X)) - 1.0) < 1e-12:
        return CapacityReport(
            Method.DEGRADABLE_GAUSSIAN_OPT, math.inf, classification=classification,
            diagnostics=["det X = 1: capacity unbounded without an energy constraint"],
        )
    seq = _thermal_sequence(dilation)
    rich = [(10.0 * seq[i][1] - seq[i - 1][1]) / 9.0 for i in range(1, len(seq))]
    value, steps = rich[-1], len(rich)
    for i in range(1, len(rich)):
        if abs(rich[i] - rich[i - 1]) < 1e-4 and abs(seq[i + 1][1] - seq[i][1]) < 1e-3:
            value, steps = rich[i], i + 1
            break
    else:
        if abs(rich[-1] - rich[-2]) >= 1e-4:
            raise NumericalFailureError(
                f"thermal-input sequence did not converge: {[round(r, 6) for r in rich]}"
            )
    nbar = seq[steps][0]
    return CapacityReport(
        Method.DEGRADABLE_GAUSSIAN_OPT,
        _clamp(value),
        classification=classification,
        optimizer_state={
            "photons": nbar, "s": 0.0, "phi": 0.0, "iterations": steps,
            "input_cm": (2 * nbar + 1) * np.eye(2),
            "raw_sequence": [v for _, v in seq[: steps + 1]],
        },
    )


def capacity_bounds(channel):
    """``[lower, upper]`` for a single-mode channel.

    The upper bound is the lossy-channel formula at ``eta = det X`` (through
    the minimal-noise factor); the lower bound is the best Gaussian-input
    coherent information found, clamped at zero.
    """
    _require_single_mode(channel)
    diagnostics = []
    _, t2 = chn.minimal_noise_split(channel)
    det_x = float(np.linalg.det(t2.X))
    if abs(det_x - 1.0) < 1e-12:
        upper = math.inf
        if np.max(np.abs(channel.Y)) > 1e-12:
            diagnostics.append("det X = 1 with Y != 0: classical-noise channel, upper bound infinite")
    else:
        upper = lossy_closed_form(det_x)

    dilation = chn.dilation_of(channel)
    verdict = classify(channel)
    if verdict.verdict in (Verdict.ANTI_DEGRADABLE, Verdict.BOTH):
        return CapacityReport(
            Method.BOUNDS_ONLY, 0.0, lower=0.0, upper=upper,
            classification=verdict, diagnostics=diagnostics + ["anti-degradable: zero capacity"],
        )

    seq = _thermal_sequence(dilation, range(0, 7))
    nbar, lower = max(seq, key=lambda t: t[1])
    best, u, s, phi, _ = optimize_gaussian_input(dilation, nbar, sweeps=3)
    lower = _clamp(max(lower, best))
    if lower > upper:
        diagnostics.append(f"lower bound {lower} clipped to upper bound {upper}")
        lower = upper
    return CapacityReport(
        Method.BOUNDS_ONLY, None, lower=lower, upper=upper, classification=verdict,
        optimizer_state={"photons": u, "s": s, "phi": phi, "input_cm": gaussian_input_cm(u, s, phi)},
        diagnostics=diagnostics,
    )


# --- broadband ---------------------------------------------------------------


@dataclass(frozen=True)
class BroadbandSpec:
    """Frequency modes ``(omega_i, eta_i)`` sharing the energy budget ``sum omega_i N_i = energy``."""

    modes: tuple
    energy: float

    def __post_init__(self):
        modes = tuple((float(w), float(e)) for w, e in self.modes)
        for w, e in modes:
            if not w > 0:
                raise InvalidArgumentError(f"mode frequency must be > 0, got {w}")
            if not 0.0 < e <= 1.0:
                raise InvalidArgumentError(f"mode transmissivity must lie in (0, 1], got {e}")
        if not self.energy >= 0:
            raise InvalidArgumentError(f"energy must be >= 0, got {self.energy}")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def from_dict(cls, data):
        try:
            modes = [(m["omega"], m["eta"]) for m in data["modes"]]
            return cls(tuple(modes), float(data["energy"]))
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"broadband spec is missing field {exc}") from None

    def to_dict(self):
        return {"modes": [{"omega": w, "eta": e} for w, e in self.modes], "energy": self.energy}


@dataclass(frozen=True, eq=False)
class BroadbandResult:
    allocation: np.ndarray
    total: float
    per_mode: np.ndarray
    multiplier: float
    kkt_residuals: np.ndarray

    def to_dict(self):
        return {
            "allocation": self.allocation.tolist(),
            "total_bits": self.total,
            "per_mode_bits": self.per_mode.tolist(),
            "multiplier": self.multiplier,
            "kkt_residuals": self.kkt_residuals.tolist(),
        }


def _log1p_minus(y):
    """``log(1 + y) - y`` without cancellation for small ``y``."""
    if abs(y) < 1e-2:
        return sum((-1) ** (k + 1) * y**k / k for k in range(12, 1, -1))
    return math.log1p(y) - y


def lossy_j(eta, nbar):
    """Thermal-input coherent information ``g(eta N) - g((1 - eta) N)``."""
    return float(g(eta * nbar) - g((1.0 - eta) * nbar))


def lossy_j_derivative(eta, nbar):
    """``d/dN [g(eta N) - g((1 - eta) N)]`` in bits per photon."""
    if nbar <= 0:
        return math.inf if eta > 0.5 else (-math.inf if eta < 0.5 else 0.0)
    x = 1.0 / nbar
    if eta == 1.0:
        return math.log1p(x) / _LN2
    if x > 1.0:
        val = eta * math.log1p(x / eta) - (1.0 - eta) * math.log1p(x / (1.0 - eta))
    else:
        # the linear terms of eta*log1p(x/eta) and (1-eta)*log1p(x/(1-eta)) cancel
        val = eta * _log1p_minus(x / eta) - (1.0 - eta) * _log1p_minus(x / (1.0 - eta))
    return val / _LN2


def _mode_allocation(eta, target):
    """Photons ``N >= 0`` with ``dJ/dN = target`` (decreasing derivative)."""
    if eta <= 0.5:
        return 0.0
    f = lambda logn: lossy_j_derivative(eta, math.exp(logn)) - target  # noqa: E731
    lo, hi = -700.0, 0.0
    if f(lo) <= 0:
        return 0.0
    while f(hi) > 0:
        hi += 5.0
        if hi > 700:
            raise NumericalFailureError("per-mode stationarity solve diverged")
    return math.exp(brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))


def broadband_capacity(spec):
    """Energy-constrained capacity of independent lossy frequency modes.

    Maximises ``sum_i J_i(N_i)`` subject to ``sum_i omega_i N_i = energy`` by
    bisection on the Lagrange multiplier; modes with ``eta_i <= 1/2`` are
    anti-degradable and receive nothing. Inputs are thermal per mode.
    """
    omegas = np.array([w for w, _ in spec.modes])
    etas = np.array([e for _, e in spec.modes])
    n = len(omegas)
    active = etas > 0.5
    zero = BroadbandResult(np.zeros(n), 0.0, np.zeros(n), math.inf, np.zeros(n))
    if spec.energy == 0 or not active.any():
        return zero

    def alloc(log_lam):
        lam = math.exp(log_lam)
        return np.array([_mode_allocation(e, lam * w) if a else 0.0 for w, e, a in zip(omegas, etas, active)])

    def excess(log_lam):
        return float(omegas @ alloc(log_lam)) / spec.energy - 1.0

    lo, hi = -5.0, 5.0
    while excess(lo) < 0:
        lo -= 10.0
        if lo < -700:
            raise NumericalFailureError("energy budget too large for the multiplier search")
    while excess(hi) > 0:
        hi += 10.0
        if hi > 700:
            raise NumericalFailureError("energy budget too small for the multiplier search")
    log_lam = brentq(excess, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    lam = math.exp(log_lam)
    allocation = alloc(log_lam)
    per_mode = np.array([lossy_j(e, N) if N > 0 else 0.0 for e, N in zip(etas, allocation)])
    residuals = np.array(
        [
            abs(lossy_j_derivative(e, N) - lam * w) if N > 0 else max(0.0, lossy_j_derivative(e, 0.0) - lam * w)
            for w, e, N in zip(omegas, etas, allocation)
        ]
    )
    residuals = np.where(np.isnan(residuals), 0.0, residuals)
    return BroadbandResult(allocation, float(per_mode.sum()), per_mode, lam, residuals)
