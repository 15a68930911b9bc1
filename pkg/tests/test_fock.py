import json

import numpy as np
import pytest

from gausscap import channels as chn
from gausscap import fock
from gausscap import states as gs
from gausscap import symplectic as sp
from gausscap import teleport as tp
from gausscap.errors import InvalidArgumentError, TruncationError

ORACLE_TOL = 1e-4


def test_moments_examples():
    d, cm = fock.moments_of(fock.vacuum())
    assert np.allclose(d, 0) and np.allclose(cm, np.eye(2), atol=1e-12)
    d, cm = fock.moments_of(fock.number_state(1))
    assert np.allclose(cm, 3 * np.eye(2), atol=1e-12)
    d, cm = fock.moments_of(fock.two_mode_squeezed(0.4))
    assert np.allclose(cm, gs.two_mode_squeezed(0.4).cm, atol=1e-6)
    d, cm = fock.moments_of(fock.coherent(1.0 + 0.5j))
    assert np.allclose(d, np.sqrt(2) * np.array([1.0, 0.5]), atol=1e-10)
    assert np.allclose(cm, np.eye(2), atol=1e-10)


def test_mean_photon_functional_matches_fock():
    for alpha in (0.5, 1.0 + 1.0j, 2.0):
        state = fock.coherent(alpha)
        d, cm = fock.moments_of(state)
        assert abs(gs.mean_photons(gs.GaussianState(d, cm)) - fock.mean_photons(state)) < ORACLE_TOL
    state = fock.superposition([1, 0, 1])
    d, cm = fock.moments_of(state)
    assert abs(gs.mean_photons(gs.GaussianState(d, cm)) - 1.0) < 1e-10


def test_truncation_is_reported():
    state = fock.thermal(4.0, 10)
    assert state.trace_deficit > fock.MAX_TRACE_DEFICIT
    with pytest.raises(TruncationError):
        fock.moments_of(state)
    with pytest.raises(TruncationError):
        fock.gaussian_reference_fock([6.0, 0.0], np.eye(2), 10)


def test_state_validation():
    with pytest.raises(InvalidArgumentError, match="Hermitian"):
        fock.FockState(np.array([[1, 1], [0, 0]]), 2)
    with pytest.raises(InvalidArgumentError, match="cutoff"):
        fock.vacuum(61)
    with pytest.raises(InvalidArgumentError, match="positive semidefinite"):
        fock.FockState(np.diag([1.5, -0.5]), 2)


def test_json_round_trip():
    s = fock.superposition([1, 1j, 0.5], 6)
    back = fock.FockState.from_dict(json.loads(json.dumps(s.to_dict())))
    assert np.allclose(back.rho, s.rho)


def test_beam_splitter_matches_symplectic():
    assert np.allclose(fock.apply_bs(fock.tensor(fock.number_state(1), fock.coherent(0.7)), 1.0).rho,
                       fock.tensor(fock.number_state(1), fock.coherent(0.7)).rho)
    state = fock.tensor(fock.coherent(1.0 + 0.3j), fock.thermal(0.5))
    d, cm = fock.moments_of(state)
    for eta in (0.2, 0.5, 0.9):
        S = sp.beamsplitter_symplectic(eta)
        d_out, cm_out = fock.moments_of(fock.apply_bs(state, eta))
        assert np.allclose(d_out, S @ d, atol=ORACLE_TOL)
        assert np.allclose(cm_out, S @ cm @ S.T, atol=ORACLE_TOL)


def test_attenuation_matches_cm_prediction():
    eta = 0.6
    ch = chn.attenuation(eta)
    assert np.allclose(fock.apply_channel_fock(fock.thermal(1.0), chn.attenuation(1.0)).rho, fock.thermal(1.0).rho)
    for state in (fock.thermal(2.0), fock.coherent(1.5 - 1.0j), fock.superposition([1, 0, 1]), fock.number_state(3)):
        d, cm = fock.moments_of(state)
        d_out, cm_out = fock.moments_of(fock.apply_channel_fock(state, ch))
        pred = chn.apply_state(ch, gs.GaussianState(d, cm))
        assert np.allclose(d_out, pred.mean, atol=ORACLE_TOL)
        assert np.allclose(cm_out, pred.cm, atol=ORACLE_TOL)
    # untruncated comparison against the thermal formula
    d_out, cm_out = fock.moments_of(fock.apply_channel_fock(fock.thermal(2.0, 60), ch))
    assert np.allclose(cm_out, gs.thermal(2.0 * eta).cm, atol=ORACLE_TOL)
    out = fock.apply_channel_fock(fock.coherent(1.2), ch)
    assert fock.trace_distance(out, fock.coherent(np.sqrt(eta) * 1.2)) < 1e-8


def test_non_attenuation_not_implemented():
    with pytest.raises(NotImplementedError):
        fock.apply_channel_fock(fock.vacuum(), chn.amplification(2.0))


def test_amplifier_and_additive_noise_moments():
    state = fock.coherent(0.8 + 0.4j)
    d, cm = fock.moments_of(state)
    d_out, cm_out = fock.moments_of(fock.apply_amplifier(state, 1.5))
    pred = chn.apply_state(chn.amplification(1.5), gs.GaussianState(d, cm))
    assert np.allclose(d_out, pred.mean, atol=ORACLE_TOL) and np.allclose(cm_out, pred.cm, atol=ORACLE_TOL)
    d_out, cm_out = fock.moments_of(fock.apply_additive_noise(state, 0.4))
    assert np.allclose(d_out, d, atol=ORACLE_TOL) and np.allclose(cm_out, cm + 0.4 * np.eye(2), atol=ORACLE_TOL)


@pytest.mark.parametrize("r", [0.5, 1.0])
def test_teleportation_of_coherent_state_in_fock(r):
    res = tp.TeleportResource(gs.two_mode_squeezed_cm(r))
    ch = tp.teleport_channel(res)
    y = ch.Y[0, 0]
    assert np.allclose(ch.Y, y * np.eye(2))
    alpha = 1.0 - 0.5j
    out = fock.apply_additive_noise(fock.coherent(alpha), y)
    d_out, cm_out = fock.moments_of(out)
    pred = tp.characteristic_action(res, None, gs.coherent(np.sqrt(2) * alpha.real, np.sqrt(2) * alpha.imag))
    assert np.allclose(d_out, pred.mean, atol=ORACLE_TOL)
    assert np.allclose(cm_out, pred.cm, atol=ORACLE_TOL)


def test_trace_distance_examples():
    a = fock.superposition([1, 2, 0.5])
    assert fock.trace_distance(a, a) < 1e-12
    assert np.isclose(fock.trace_distance(fock.number_state(0), fock.number_state(3)), 1.0)
    with pytest.raises(InvalidArgumentError):
        fock.trace_distance(fock.vacuum(5), fock.vacuum(6))


def test_gaussian_reference_examples():
    assert fock.trace_distance(fock.gaussian_reference_fock([0, 0], np.eye(2)), fock.vacuum()) < 1e-10
    ref = fock.gaussian_reference_fock([0, 0], 3 * np.eye(2))
    assert fock.trace_distance(ref, fock.thermal(1.0)) < 1e-7
    mean = np.array([0.8, -0.4])
    cm = sp.rotation_symplectic(0.7) @ np.diag([2.0, 0.8]) @ sp.rotation_symplectic(0.7).T
    d, cm_out = fock.moments_of(fock.gaussian_reference_fock(mean, cm))
    assert np.allclose(d, mean, atol=ORACLE_TOL) and np.allclose(cm_out, cm, atol=ORACLE_TOL)


def test_gaussification_fixed_point_and_moments():
    th = fock.thermal(0.5)
    assert fock.trace_distance(fock.gaussification_round(th), th) < 1e-6
    for state in (fock.number_state(1), fock.superposition([1, 0, 1]), fock.superposition([1, 0, 0, 1j])):
        d, cm = fock.moments_of(state)
        out = state
        for _ in range(3):
            out = fock.gaussification_round(out)
            d_out, cm_out = fock.moments_of(out)
            assert np.allclose(d_out, 0, atol=1e-10)
            assert np.max(np.abs(cm_out - cm)) <= 1e-6


@pytest.mark.parametrize("amps", [[0, 1], [1, 0, 1]])
def test_gaussification_converges(amps):
    state = fock.superposition(amps)
    d, cm = fock.moments_of(state)
    ref = fock.gaussian_reference_fock(d, cm, state.cutoff)
    dists = []
    for _ in range(4):
        state = fock.gaussification_round(state)
        dists.append(fock.trace_distance(state, ref))
    assert all(b < a for a, b in zip(dists, dists[1:]))


def test_attenuation_kraus_equals_beam_splitter_with_vacuum():
    state = fock.superposition([0.3, 1j, 0.5, 0, 0.2], 12)
    for eta in (0.25, 0.8):
        joint = fock.apply_bs(fock.tensor(state, fock.vacuum(12)), eta)
        assert np.allclose(fock.apply_attenuation(state, eta).rho, fock.partial_trace(joint, 0).rho, atol=1e-13)
