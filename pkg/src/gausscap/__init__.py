"""Quantum capacities, degradability and teleportation channels for bosonic Gaussian channels."""

from . import capacity, channels, fock, states, symplectic, teleport
from .capacity import (
    BroadbandSpec,
    CapacityReport,
    Classification,
    Criterion,
    Method,
    Verdict,
    broadband_capacity,
    capacity_bounds,
    capacity_degradable,
    capacity_lossy,
    classify,
    coherent_information_gaussian,
    loss_length_curve,
)
from .channels import (
    Dilation,
    GaussianChannel,
    amplification,
    attenuation,
    classical_noise,
    compose,
    conjugate_channel,
    dilation_of,
    is_cp,
    minimal_noise_split,
)
from .states import GaussianState, entropy, mean_photons, thermal, two_mode_squeezed, vacuum
from .teleport import TeleportResource, certify_from_moments, characteristic_action, teleport_channel

__version__ = "0.1.0"
