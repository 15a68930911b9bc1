"""Acceptance criteria, one check per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``;
each criterion prints a single PASS/FAIL line.
"""

import csv
import io
import math
import os
import sys
import time
from contextlib import redirect_stdout
from types import SimpleNamespace

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import g_oracle, random_cm, random_minimal_channel  # noqa: E402

from gausscap import capacity as cap  # noqa: E402
from gausscap import channels as chn  # noqa: E402
from gausscap import cli  # noqa: E402
from gausscap import fock  # noqa: E402
from gausscap import states as gs  # noqa: E402
from gausscap import symplectic as sp  # noqa: E402
from gausscap import teleport as tp  # noqa: E402
from gausscap.capacity import Criterion, Verdict  # noqa: E402


class Check:
    def __init__(self, name, budget=None):
        self.name, self.budget, self.failures = name, budget, []
        self.start = time.perf_counter()

    def expect(self, cond, what):
        if not cond:
            self.failures.append(what)

    def finish(self):
        elapsed = time.perf_counter() - self.start
        if self.budget is not None and elapsed >= self.budget:
            self.failures.append(f"runtime {elapsed:.2f}s over {self.budget}s")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures[:3]) if self.failures else f"{elapsed:.2f}s"
        print(f"[{status}] {self.name}: {detail}")
        return not self.failures


def lossy_oracle(eta):
    return max(0.0, math.log2(eta / (1.0 - eta))) if eta < 1 else math.inf


def criterion_1():
    c = Check("1 closed-form lossy capacity and loss-length curve", budget=1.0)
    c.expect(cap.capacity_lossy(0.5) == 0.0, "Q(0.5) != 0")
    c.expect(cap.capacity_lossy(math.exp(-math.log(2))) <= 1e-12, "Q at l/l_a = ln 2 not zero")
    buf = io.StringIO()
    with redirect_stdout(buf):
        cli.cmd_loss_curve(SimpleNamespace(min=0.0, max=2.0, steps=200, out=None, no_zero_marker=False), None)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    c.expect(rows[0] == ["l_over_la", "Q_bits"], "bad CSV header")
    xs = [float(r[0]) for r in rows[1:]]
    qs = [float(r[1]) for r in rows[1:]]
    c.expect(all(b <= a for a, b in zip(qs, qs[1:])), "curve not non-increasing")
    err = max(abs(q - lossy_oracle(math.exp(-x))) for x, q in zip(xs[1:], qs[1:]))
    c.expect(err <= 1e-12, f"pointwise error {err:.2e}")
    c.expect(math.isinf(qs[0]), "x = 0 not flagged infinite")
    k = xs.index(math.log(2))
    c.expect(qs[k] <= 1e-12 and qs[k - 1] > 0, "zero crossing not at ln 2")
    return c.finish()


def criterion_2():
    c = Check("2 single-mode degradability either/or", budget=5.0)
    rng = np.random.default_rng(2)
    disagree = neither = 0
    for _ in range(200):
        ch = random_minimal_channel(rng)
        d = chn.dilation_of(ch)
        c.expect(d.n_env == 1, "dilation needs more than one environment mode")
        a = cap.classify(ch, tol=1e-8, criterion=Criterion.CHANNEL_MATRICES)
        b = cap.classify(d, tol=1e-8)
        neither += Verdict.NEITHER in (a.verdict, b.verdict)
        disagree += a.verdict is not b.verdict
    c.expect(neither == 0, f"{neither} Neither verdicts")
    c.expect(disagree == 0, f"{disagree} criterion disagreements")
    for eta, want in ((0.75, Verdict.DEGRADABLE), (0.3, Verdict.ANTI_DEGRADABLE), (0.5, Verdict.BOTH)):
        got = cap.classify(chn.attenuation(eta)).verdict
        c.expect(got is want, f"attenuation({eta}) -> {got.value}")
    return c.finish()


def criterion_3():
    c = Check("3 capacity optimizer consistency", budget=30.0)
    ch = chn.attenuation(0.75)
    rep = cap.capacity_degradable(ch)
    c.expect(abs(rep.value - math.log2(3)) < 1e-3, f"unconstrained {rep.value}")
    rep = cap.capacity_degradable(ch, max_photons=1.0)
    oracle = g_oracle(0.75) - g_oracle(0.25)
    c.expect(abs(rep.value - oracle) < 1e-6, f"constrained {rep.value} vs {oracle}")
    s = rep.optimizer_state["s"]
    c.expect(abs(s) < 1e-3, f"squeezing {s}")
    return c.finish()


def criterion_4():
    c = Check("4 teleportation channel construction", budget=None)
    for r in (0.5, 1.0, 2.0):
        ch = tp.teleport_channel(tp.TeleportResource(gs.two_mode_squeezed_cm(r)), np.eye(2))
        c.expect(np.array_equal(ch.X, np.eye(2)), f"X != I at r={r}")
        err = np.linalg.norm(ch.Y - 2 * np.exp(-2 * r) * np.eye(2))
        c.expect(err < 1e-10, f"noise error {err:.2e} at r={r}")
    rng = np.random.default_rng(4)
    worst = 0.0
    for k in range(50):
        n = 1 + k % 2
        res = tp.TeleportResource(random_cm(2 * n, rng))
        gain = rng.normal(size=(2 * n, 2 * n))
        s = gs.GaussianState(rng.normal(size=2 * n), random_cm(n, rng))
        ch = tp.teleport_channel(res, gain)
        c.expect(chn.is_cp(ch, 1e-8), "teleportation channel not CP")
        a, b = chn.apply_state(ch, s), tp.characteristic_action(res, gain, s)
        worst = max(worst, np.max(np.abs(a.cm - b.cm)), np.max(np.abs(a.mean - b.mean)))
    c.expect(worst < 1e-10, f"paths differ by {worst:.2e}")
    return c.finish()


def criterion_5():
    c = Check("5 certification chain", budget=10.0)
    ch = chn.tensor(chn.attenuation(0.75), chn.identity_channel())
    rates = []
    for r in np.linspace(0.25, 5.0, 20):
        rates.append(tp.certify_from_moments(chn.apply(ch, gs.two_mode_squeezed_cm(r)), 1).certified_rate)
    c.expect(all(b >= a for a, b in zip(rates, rates[1:])), "certified rate not monotone in r")
    gap = math.log2(3) - rates[-1]
    c.expect(0 <= gap < 0.05, f"gap at r=5 is {gap:.4f}")
    return c.finish()


def criterion_6():
    c = Check("6 broadband KKT conditions", budget=None)
    spec = cap.BroadbandSpec(((1.0, 0.9), (1.7, 0.75), (0.6, 0.6), (1.2, 0.45), (2.0, 0.3)), 6.0)
    res = cap.broadband_capacity(spec)
    omegas = np.array([w for w, _ in spec.modes])
    etas = np.array([e for _, e in spec.modes])
    used = float(omegas @ res.allocation)
    c.expect(abs(used / spec.energy - 1) < 1e-8, f"energy residual {used / spec.energy - 1:.2e}")
    c.expect(np.all(res.allocation[etas < 0.5] == 0), "mode with eta < 1/2 got photons")
    for w, e, n in zip(omegas, etas, res.allocation):
        if n > 0:
            # dJ/dN written out independently of the module
            dj = e * math.log2(1 + 1 / (e * n)) - (1 - e) * math.log2(1 + 1 / ((1 - e) * n))
            c.expect(abs(dj - res.multiplier * w) < 1e-8, f"stationarity residual {abs(dj - res.multiplier * w):.2e}")
    c.expect(np.all(res.kkt_residuals < 1e-8), "reported KKT residuals too large")
    sym = cap.broadband_capacity(cap.BroadbandSpec(((1.0, 0.8),) * 3 + ((1.0, 0.2),), 4.5))
    a = sym.allocation[:3]
    c.expect(np.max(np.abs(a - 1.5)) < 1e-8, f"symmetric split {a}")
    return c.finish()


def criterion_7():
    c = Check("7 Fock-space oracle agreement", budget=60.0)
    tol = 1e-4
    for state in (fock.coherent(1.2 - 0.7j), fock.thermal(1.0), fock.number_state(2), fock.superposition([1, 1, 1])):
        d, cm = fock.moments_of(state)
        pred = gs.GaussianState(d, cm)
        c.expect(abs(gs.mean_photons(pred) - fock.mean_photons(state)) < tol, "photon functional")
        for eta in (0.3, 0.75):
            ch = chn.attenuation(eta)
            d2, cm2 = fock.moments_of(fock.apply_channel_fock(state, ch))
            out = chn.apply_state(ch, pred)
            c.expect(np.allclose(d2, out.mean, atol=tol) and np.allclose(cm2, out.cm, atol=tol), "attenuation moments")
    d, cm = fock.moments_of(fock.two_mode_squeezed(0.4))
    c.expect(np.allclose(cm, gs.two_mode_squeezed_cm(0.4), atol=1e-6), "two-mode squeezed moments")
    for r in (0.5, 1.0):
        res = tp.TeleportResource(gs.two_mode_squeezed_cm(r))
        alpha = 1.0 + 0.5j
        pred = tp.characteristic_action(res, np.eye(2), gs.coherent(math.sqrt(2) * alpha.real, math.sqrt(2) * alpha.imag))
        y = tp.teleport_channel(res).Y[0, 0]
        d2, cm2 = fock.moments_of(fock.apply_additive_noise(fock.coherent(alpha), y))
        c.expect(np.allclose(d2, pred.mean, atol=tol) and np.allclose(cm2, pred.cm, atol=tol), f"teleported coherent r={r}")
    for amps in ([0, 1], [1, 0, 1]):
        state = fock.superposition(amps)
        d, cm = fock.moments_of(state)
        ref = fock.gaussian_reference_fock(d, cm, state.cutoff)
        dists = []
        for _ in range(4):
            state = fock.gaussification_round(state)
            dists.append(fock.trace_distance(state, ref))
        c.expect(all(b < a for a, b in zip(dists, dists[1:])), f"gaussification of {amps} not decreasing: {dists}")
    return c.finish()


def criterion_8():
    c = Check("8 structural invariants", budget=None)
    rng = np.random.default_rng(8)
    for k in range(100):
        n = 1 + k % 3
        S = sp.random_symplectic(n, rng)
        c.expect(sp.symplectic_residual(S) <= 1e-9 * max(1.0, np.max(np.abs(S)) ** 2), "symplectic residual")
        nu_raw = rng.uniform(0.6, 2.5, n)
        cm = S @ np.diag(np.repeat(nu_raw, 2)) @ S.T
        spec = sp.symplectic_eigenvalues(cm)
        c.expect(np.allclose(np.sort(spec), np.sort(nu_raw), rtol=1e-8), "spectrum")
        c.expect(sp.is_valid_cm(cm) == bool(np.all(spec >= 1 - 1e-9)), "validity vs spectrum")

        good = random_cm(n, rng)
        pure = S @ S.T
        c.expect(abs(gs.cm_entropy(pure)) < 1e-8, "pure state entropy")
        is_pure = np.allclose(sp.symplectic_eigenvalues(good), 1.0, atol=1e-8)
        c.expect((gs.cm_entropy(good) < 1e-8) == is_pure, "entropy zero iff spectrum one")

        p = gs.purification(gs.GaussianState(np.zeros(2 * n), good))
        c.expect(np.allclose(sp.symplectic_eigenvalues(p.cm), 1.0, atol=1e-8), "purification not pure")
        c.expect(np.allclose(p.cm[: 2 * n, : 2 * n], good, atol=1e-8), "purification reduction")

        s3 = gs.GaussianState(np.zeros(6), random_cm(3, rng))
        H = lambda m: gs.entropy(gs.partial_trace(s3, m))  # noqa: E731
        c.expect(H([0, 1]) + H([1, 2]) >= gs.entropy(s3) + H([1]) - 1e-8, "strong subadditivity")
    return c.finish()


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(len(CRITERIA))])
def test_acceptance(criterion, capsys):
    with capsys.disabled():
        print()
        ok = criterion()
    assert ok


if __name__ == "__main__":
    results = [criterion() for criterion in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
