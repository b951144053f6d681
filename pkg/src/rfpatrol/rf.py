"""Free-space RF propagation for isotropic emitters and patrolling receivers.

Received power follows the log-form free-space link budget; directional
receivers add an angle-dependent gain built from a squared normalized sinc
pattern. Measurement noise is additive Gaussian in the dB domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Pattern nulls are -inf dBi analytically; clamp so downstream dBm sums stay
# finite. -120 dBi is far below any detection threshold used here.
GAIN_FLOOR_DBI = -120.0


class Sensing(Enum):
    """Receiver sensing modality."""

    OMNI = "omni"
    DIRECTIONAL = "directional"


def wrap_angle(theta):
    """Wrap angle(s) to [-pi, pi)."""
    return (np.asarray(theta) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class EmitterSource:
    """A concealed isotropic transmitter: position (m), power (dBm), frequency (Hz)."""

    position: tuple[float, float]
    power_dbm: float
    frequency_hz: float

    def __post_init__(self):
        if self.frequency_hz <= 0.0:
            raise ValueError(f"frequency must be positive, got {self.frequency_hz}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz


@dataclass(frozen=True)
class AntennaConfig:
    """Receiver antenna: omni (unit gain) or a symmetric pair of directional mounts.

    ``gain_factor`` is the linear boresight multiple relative to isotropic;
    ``mount_offsets`` are boresight angles in radians relative to the robot's
    front. Omni antennas have exactly one mount at offset 0.
    """

    kind: Sensing
    gain_factor: float = 1.0
    mount_offsets: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if self.kind is Sensing.OMNI:
            if self.gain_factor != 1.0 or tuple(self.mount_offsets) != (0.0,):
                raise ValueError("omni antenna requires gain_factor=1.0 and a single zero offset")
        else:
            if self.gain_factor <= 1.0:
                raise ValueError("directional antenna requires gain_factor > 1.0")
            if len(self.mount_offsets) != 2 or self.mount_offsets[0] != -self.mount_offsets[1]:
                raise ValueError("directional antenna requires a symmetric offset pair (+psi, -psi)")

    @classmethod
    def omni(cls) -> "AntennaConfig":
        return cls(Sensing.OMNI)

    @classmethod
    def directional(cls, boresight_gain_dbi: float, psi: float) -> "AntennaConfig":
        """Dual directional mounts at +/-psi with the given boresight gain (dBi)."""
        return cls(Sensing.DIRECTIONAL, 10.0 ** (boresight_gain_dbi / 10.0), (psi, -psi))

    @property
    def boresight_gain_dbi(self) -> float:
        return 10.0 * math.log10(self.gain_factor)

    @property
    def n_mounts(self) -> int:
        return len(self.mount_offsets)


@dataclass
class NoiseModel:
    """Zero-mean Gaussian dB-domain measurement noise with a replayable stream.

    The same seed always reproduces the same sample sequence. Sequential draws
    advance the stream, so repeated calls with identical inputs produce
    different (but replayable) values. ``std_dev == 0`` disables drawing
    entirely, making noiseless runs independent of the seed.
    """

    std_dev: float = 0.5
    seed: int = 0
    _rng: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.std_dev < 0.0:
            raise ValueError("noise std_dev must be non-negative")

    def sample(self, n: int | None = None):
        """Draw one value (n=None) or an array of n values."""
        if self.std_dev == 0.0:
            return 0.0 if n is None else np.zeros(n)
        if self._rng is None:
            self._rng = np.random.default_rng(self.seed)
        return self._rng.normal(0.0, self.std_dev, size=n)

    def reset(self):
        """Rewind the stream to the start of the seeded sequence."""
        self._rng = None

    def substream(self, *key: int) -> "NoiseModel":
        """Independent child stream derived deterministically from (seed, key)."""
        child = np.random.SeedSequence(entropy=self.seed, spawn_key=tuple(key))
        return NoiseModel(self.std_dev, int(child.generate_state(1, np.uint64)[0]))


def friis_received_power(power_dbm, gain_tx_dbi, gain_rx_dbi, wavelength_m, distance_m):
    """Received power (dBm) over a free-space link.

    P_r = P_t + G_t + G_r + 20 log10(lambda / (4 pi d)). Accepts scalars or
    arrays; wavelength and distance must be strictly positive.
    """
    wavelength_m = np.asarray(wavelength_m, dtype=float)
    distance_m = np.asarray(distance_m, dtype=float)
    if np.any(distance_m <= 0.0):
        raise ValueError("distance must be positive")
    if np.any(wavelength_m <= 0.0):
        raise ValueError("wavelength must be positive")
    path = 20.0 * np.log10(wavelength_m / (4.0 * np.pi * distance_m))
    out = power_dbm + gain_tx_dbi + gain_rx_dbi + path
    return float(out) if out.ndim == 0 else out


def directional_gain(gain_factor: float, theta):
    """Angle-dependent receiver gain (dBi) for a sinc^2 radiation pattern.

    A unit gain factor is the omni case (0 dBi at every angle). For factors
    above one the pattern is 10 log10(g * sinc^2(g * theta)) with theta wrapped
    to [-pi, pi); nulls are clamped at GAIN_FLOOR_DBI. Factors below one are
    undefined.
    """
    if gain_factor < 1.0:
        raise ValueError(f"gain factor below 1.0 is undefined, got {gain_factor}")
    theta = np.asarray(theta, dtype=float)
    if gain_factor == 1.0:
        out = np.zeros_like(theta)
        return float(out) if out.ndim == 0 else out
    # np.sinc is the normalized sinc: sin(pi x) / (pi x)
    pattern = gain_factor * np.sinc(gain_factor * wrap_angle(theta)) ** 2
    with np.errstate(divide="ignore"):
        out = np.maximum(10.0 * np.log10(pattern), GAIN_FLOOR_DBI)
    return float(out) if out.ndim == 0 else out


def received_power_at_pose(
    source: EmitterSource,
    receiver_position,
    receiver_heading: float,
    antenna: AntennaConfig,
    mount_index: int = 0,
    noise: NoiseModel | None = None,
    gain_tx_dbi: float = 0.0,
):
    """One RSS measurement (dBm) at a receiver pose, through one antenna mount.

    The pattern angle is the bearing from receiver to source minus the mount's
    global boresight (heading + offset). Adds one Gaussian draw when a noise
    model is given.
    """
    rx = np.asarray(receiver_position, dtype=float)
    delta = np.asarray(source.position, dtype=float) - rx
    distance = float(np.hypot(delta[0], delta[1]))
    if distance == 0.0:
        raise ValueError("receiver position coincides with the source")
    bearing = math.atan2(delta[1], delta[0])
    theta = wrap_angle(bearing - (receiver_heading + antenna.mount_offsets[mount_index]))
    gain_rx = directional_gain(antenna.gain_factor, theta)
    power = friis_received_power(source.power_dbm, gain_tx_dbi, gain_rx, source.wavelength, distance)
    if noise is not None:
        power += noise.sample()
    return float(power)


def sensing_range(
    power_dbm: float,
    gain_rx_dbi: float,
    frequency_hz: float,
    threshold_dbm: float,
    gain_tx_dbi: float = 0.0,
) -> float:
    """Distance (m) at which the link budget decays to the detection threshold.

    Inverts the free-space power law: d = (lambda / 4 pi) * 10^((P_t + G_t +
    G_r - P_thresh) / 20). A threshold above the total budget has no far-field
    solution and raises.
    """
    if frequency_hz <= 0.0:
        raise ValueError("frequency must be positive")
    budget = power_dbm + gain_tx_dbi + gain_rx_dbi - threshold_dbm
    if budget < 0.0:
        raise ValueError(
            f"threshold {threshold_dbm} dBm exceeds the link budget; no far-field solution"
        )
    wavelength = SPEED_OF_LIGHT / frequency_hz
    return wavelength / (4.0 * np.pi) * 10.0 ** (budget / 20.0)
