r"""Kinematics of a single free Gaussian channel.

Everything here is closed form.  A channel is a Gaussian probability density
whose width grows ballistically,

.. math::

    \sigma(t)^2 = \sigma_0^2 + u_0^2 t^2, \qquad u_0 = D/\sigma_0,
    \qquad D = \hbar / 2m,

carried by a drift ``v_x``.  The averaged ("smoothed") particle motion inside
the channel is a dilation about the moving centroid, which gives the
average velocity field ``v_x + (x - mean) u0^2 t / sigma^2``.

All functions accept scalars or numpy arrays for ``x``, ``p`` and ``t`` and
broadcast in the usual way.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PhysicalConstants",
    "PacketParams",
    "sigma_at",
    "diffusivity_at",
    "phase_space_density",
    "marginal_density",
    "osmotic_velocity",
    "mean_velocity_field",
    "smoothed_position",
    "action_value",
    "action_value_along",
    "kinetic_temperature",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """Natural constants.  The diffusivity follows from the Einstein relation."""

    hbar: float = 1.0
    mass: float = 1.0
    diffusivity: float = field(init=False)

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive and finite, got {self.mass}")
        object.__setattr__(self, "diffusivity", self.hbar / (2.0 * self.mass))


@dataclass(frozen=True)
class PacketParams:
    """One Gaussian channel: initial width, initial centroid and drift velocity."""

    constants: PhysicalConstants = PhysicalConstants()
    sigma0: float = 1.0
    center0: float = 0.0
    v_x: float = 0.0

    def __post_init__(self):
        if not (self.sigma0 > 0 and math.isfinite(self.sigma0)):
            raise ValueError(f"sigma0 must be positive and finite, got {self.sigma0}")

    @property
    def u0(self) -> float:
        """Initial osmotic speed D / sigma0."""
        return self.constants.diffusivity / self.sigma0

    @property
    def mass(self) -> float:
        return self.constants.mass

    def mean(self, t):
        """Centroid position at time ``t``."""
        return self.center0 + self.v_x * np.asarray(t, dtype=float)


def sigma_at(params: PacketParams, t):
    """Standard deviation of the channel at time ``t`` (even in ``t``)."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(params.sigma0**2 + (params.u0 * t) ** 2)


def diffusivity_at(params: PacketParams, t):
    """Time dependent diffusivity ``u0^2 t`` of ballistic diffusion.

    Raises
    ------
    ValueError
        For negative elapsed time.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("diffusivity_at is defined for t >= 0 only")
    return params.u0**2 * t


def phase_space_density(params: PacketParams, x, p, t):
    """Phase-space density from the free Liouville evolution.

    The printed form is for a centred, drift-free packet.  Other packets are
    handled by the Galilean shift ``x -> x - mean(t)``, ``p -> p - m v_x``.
    """
    m = params.mass
    u0 = params.u0
    s0 = params.sigma0
    t = np.asarray(t, dtype=float)
    xs = np.asarray(x, dtype=float) - params.mean(t)
    ps = np.asarray(p, dtype=float) - m * params.v_x
    norm = 1.0 / (2.0 * math.pi * s0 * m * u0)
    return (
        norm
        * np.exp(-((xs - ps * t / m) ** 2) / (2.0 * s0**2))
        * np.exp(-(ps**2) / (2.0 * m**2 * u0**2))
    )


def marginal_density(params: PacketParams, x, t):
    """Position density: a Gaussian with mean ``mean(t)`` and width ``sigma_at(t)``."""
    sig = sigma_at(params, t)
    dx = np.asarray(x, dtype=float) - params.mean(t)
    return np.exp(-0.5 * (dx / sig) ** 2) / (math.sqrt(2.0 * math.pi) * sig)


def osmotic_velocity(params: PacketParams, x, t, branch: int = +1):
    """Osmotic velocity ``u_(+/-) = -/+ (hbar/2m) grad P / P``.

    For the Gaussian, ``branch=+1`` gives ``D (x - mean) / sigma^2``.  This
    branch equals ``-(hbar/m) grad R / R`` with ``R = sqrt(P)`` and is the
    channel-average diffusive field used by the two-slit current.
    """
    if branch not in (+1, -1):
        raise ValueError("branch must be +1 or -1")
    sig = sigma_at(params, t)
    dx = np.asarray(x, dtype=float) - params.mean(t)
    return branch * params.constants.diffusivity * dx / sig**2


def mean_velocity_field(params: PacketParams, x_tot, t):
    """Average velocity field of the spreading packet at position ``x_tot``."""
    t = np.asarray(t, dtype=float)
    sig = sigma_at(params, t)
    xi = np.asarray(x_tot, dtype=float) - params.mean(t)
    return params.v_x + xi * params.u0**2 * t / sig**2


def smoothed_position(params: PacketParams, x0, t):
    """Averaged trajectory started at deviation ``x0`` from the centroid."""
    return params.mean(t) + np.asarray(x0, dtype=float) * sigma_at(params, t) / params.sigma0


def action_value(params: PacketParams, x, x0, t, energy: float = 0.0):
    """Action ``m v x + (m u0^2 / 2) (x0/sigma0)^2 t - E t``.

    ``x0`` is the initial deviation from the centroid.  ``energy`` is the
    total energy of the system; it is a free input.
    """
    m = params.mass
    t = np.asarray(t, dtype=float)
    ratio = np.asarray(x0, dtype=float) / params.sigma0
    return m * params.v_x * np.asarray(x, dtype=float) + 0.5 * m * params.u0**2 * ratio**2 * t - energy * t


def action_value_along(params: PacketParams, x, t, energy: float = 0.0):
    """Same action, written with the current deviation ``(x - mean(t)) / sigma(t)``.

    Along a smoothed trajectory both ratios are equal, so this agrees with
    :func:`action_value`.
    """
    m = params.mass
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    ratio = (x - params.mean(t)) / sigma_at(params, t)
    return m * params.v_x * x + 0.5 * m * params.u0**2 * ratio**2 * t - energy * t


def kinetic_temperature(params: PacketParams, x, t):
    """``kT = m u0^2 ((x - mean)/sigma)^2`` of the path excitation field."""
    ratio = (np.asarray(x, dtype=float) - params.mean(t)) / sigma_at(params, t)
    return params.mass * params.u0**2 * ratio**2
