"""Two-channel interference fields.

Two Gaussian channels of equal width leave the slits at ``+X`` and ``-X``.
Channel 1 sits at ``+X`` and drifts with ``+v_x``; channel 2 is its mirror
image.  (``mirrored=True`` swaps the two.)  The fields assembled here are

* the relative phase ``phi12`` between the channels, plus an optional phase
  ramp and constant offset applied at slit 1,
* the averaged total intensity ``P1 + P2 + 2 sqrt(P1 P2) cos phi12``,
* the total average current, split into its convective part and the
  entangling current (the ``sin phi12`` cross term built from the diffusive
  velocities of both channels),
* the averaged velocity field ``J / P_tot``.

The forward direction is uniform motion, so a 2D picture maps ``y = v_y t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateDensity
from .packet import (
    PacketParams,
    PhysicalConstants,
    marginal_density,
    mean_velocity_field,
    sigma_at,
)

__all__ = [
    "PhaseRamp",
    "SlitConfig",
    "FieldSample",
    "GridSpec",
    "FieldGrid",
    "relative_phase",
    "channel_densities",
    "intensity",
    "average_current",
    "entangling_current",
    "velocity_field",
    "sample_grid",
    "continuity_residual",
]

RAMP_SHAPES = ("linear",)


@dataclass(frozen=True)
class PhaseRamp:
    """Extra phase accumulated at slit 1 between ``t1`` and ``t2``."""

    delta_phi_total: float
    t1: float
    t2: float
    shape: str = "linear"

    def __post_init__(self):
        if not self.t1 < self.t2:
            raise ValueError(f"ramp needs t1 < t2, got t1={self.t1}, t2={self.t2}")
        if self.shape not in RAMP_SHAPES:
            raise ValueError(f"unknown ramp shape {self.shape!r}; expected one of {RAMP_SHAPES}")
        if not math.isfinite(self.delta_phi_total):
            raise ValueError("ramp delta_phi_total must be finite")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        frac = np.clip((t - self.t1) / (self.t2 - self.t1), 0.0, 1.0)
        return self.delta_phi_total * frac


@dataclass(frozen=True)
class SlitConfig:
    """A complete two-slit experiment.

    Parameters
    ----------
    constants:
        hbar and mass.
    sigma0:
        Initial width shared by both channels.
    half_separation:
        ``X``; the channel centroids start at ``+X`` and ``-X``.
    v_x:
        Signed transverse drift of channel 1 (channel 2 drifts with ``-v_x``).
        Negative values make the channels approach each other.
    v_y:
        Common forward speed.
    amplitude_weights:
        Amplitude factors of the two channels; ``P_i`` is scaled by the square.
    ramp:
        Optional time-dependent phase added at slit 1.
    phase_offset:
        Constant phase added at slit 1.
    mirrored:
        Put channel 1 at ``-X`` instead of ``+X``; this negates ``phi12``.
    density_floor:
        ``P_tot`` below this is treated as degenerate when dividing.
    tail_fraction:
        Grid cells below ``tail_fraction * max(P_tot)`` are flagged as tail.
    """

    constants: PhysicalConstants = PhysicalConstants()
    sigma0: float = 1.0
    half_separation: float = 1.0
    v_x: float = 0.0
    v_y: float = 1.0
    amplitude_weights: tuple = (1.0, 1.0)
    ramp: PhaseRamp | None = None
    phase_offset: float = 0.0
    mirrored: bool = False
    density_floor: float = 1e-300
    tail_fraction: float = 1e-30

    def __post_init__(self):
        if not (self.sigma0 > 0 and math.isfinite(self.sigma0)):
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        if not (self.half_separation > 0 and math.isfinite(self.half_separation)):
            raise ValueError(f"half_separation must be positive, got {self.half_separation}")
        w1, w2 = (float(w) for w in self.amplitude_weights)
        if w1 < 0 or w2 < 0 or not (math.isfinite(w1) and math.isfinite(w2)):
            raise ValueError("amplitude weights must be nonnegative and finite")
        if w1 == 0 and w2 == 0:
            raise ValueError("amplitude weights cannot both be zero")
        object.__setattr__(self, "amplitude_weights", (w1, w2))
        if not (self.density_floor >= 0):
            raise ValueError("density_floor must be nonnegative")

    @property
    def orientation(self) -> float:
        return -1.0 if self.mirrored else 1.0

    @property
    def inter_slit_distance(self) -> float:
        return 2.0 * self.half_separation

    @property
    def u0(self) -> float:
        return self.constants.diffusivity / self.sigma0

    @property
    def is_symmetric(self) -> bool:
        """Mirror symmetric about x = 0 at every time when unramped."""
        w1, w2 = self.amplitude_weights
        return w1 == w2

    def channels(self) -> tuple[PacketParams, PacketParams]:
        s = self.orientation
        c1 = PacketParams(self.constants, self.sigma0, s * self.half_separation, s * self.v_x)
        c2 = PacketParams(self.constants, self.sigma0, -s * self.half_separation, -s * self.v_x)
        return c1, c2

    def slit1_phase(self, t):
        """Extra phase carried by channel 1 at time ``t`` (ramp plus offset)."""
        extra = self.phase_offset
        if self.ramp is not None:
            return self.ramp.value(t) + extra
        return np.zeros_like(np.asarray(t, dtype=float)) + extra

    def with_(self, **changes) -> "SlitConfig":
        return replace(self, **changes)


@dataclass
class FieldSample:
    """Fields at one or many ``(x, t)`` points (arrays broadcast together)."""

    P_tot: np.ndarray
    J_x: np.ndarray
    J_y: np.ndarray
    J_e: np.ndarray
    v_tot_x: np.ndarray
    v_tot_y: np.ndarray
    degenerate: np.ndarray


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -12.0
    x_max: float = 12.0
    n_x: int = 512
    t_min: float = 0.0
    t_max: float = 8.0
    n_t: int = 256

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("grid needs x_min < x_max")
        if not self.t_min <= self.t_max:
            raise ValueError("grid needs t_min <= t_max")
        if int(self.n_x) != self.n_x or self.n_x < 2:
            raise ValueError("grid needs n_x >= 2")
        if int(self.n_t) != self.n_t or self.n_t < 1:
            raise ValueError("grid needs n_t >= 1")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, int(self.n_x))

    @property
    def t(self) -> np.ndarray:
        if self.n_t == 1:
            return np.array([float(self.t_min)])
        return np.linspace(self.t_min, self.t_max, int(self.n_t))


FIELD_UNITS = {
    "P_tot": "1/length",
    "J_x": "1/time",
    "J_y": "1/time",
    "J_e": "1/time",
    "v_x": "length/time",
    "v_y": "length/time",
}


@dataclass
class FieldGrid:
    """Sampled fields; every array has shape ``(n_t, n_x)`` (rows are times)."""

    grid: GridSpec
    x: np.ndarray
    t: np.ndarray
    P_tot: np.ndarray
    J_x: np.ndarray
    J_y: np.ndarray
    J_e: np.ndarray
    v_x: np.ndarray
    v_y: np.ndarray
    tail: np.ndarray
    degenerate: np.ndarray

    def field(self, name: str) -> np.ndarray:
        if name not in FIELD_UNITS:
            raise KeyError(f"unknown field {name!r}")
        return getattr(self, name)


def relative_phase(config: SlitConfig, x, t):
    """Total phase difference ``phi12`` between the two paths.

    ``2 m v_x x / hbar - (X + v_x t) x u0^2 t / (D sigma^2)`` plus the slit-1
    ramp and offset; negated for the mirrored layout.
    """
    const = config.constants
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    u0 = config.u0
    sig2 = config.sigma0**2 + (u0 * t) ** 2
    X = config.half_separation
    v = config.v_x
    phase = 2.0 * const.mass * v * x / const.hbar - (X + v * t) * x * (1.0 / const.diffusivity) * (
        u0**2 * t / sig2
    )
    return config.orientation * phase + config.slit1_phase(t)


def channel_densities(config: SlitConfig, x, t):
    """Weighted per-channel densities ``(P1, P2)``."""
    c1, c2 = config.channels()
    w1, w2 = config.amplitude_weights
    return w1**2 * marginal_density(c1, x, t), w2**2 * marginal_density(c2, x, t)


def intensity(config: SlitConfig, x, t):
    """Averaged total intensity ``P1 + P2 + 2 sqrt(P1 P2) cos phi12``."""
    p1, p2 = channel_densities(config, x, t)
    return p1 + p2 + 2.0 * np.sqrt(p1 * p2) * np.cos(relative_phase(config, x, t))


def entangling_current(config: SlitConfig, x, t):
    """The ``sin phi12`` cross term of the total current.

    Written with amplitudes ``R_i = sqrt(P_i)`` this is
    ``(hbar/m) (R2 grad R1 - R1 grad R2) sin phi12``, i.e.
    ``sqrt(P1 P2) (u2 - u1) sin phi12`` with ``u_i = -(hbar/m) grad R_i / R_i``.
    """
    const = config.constants
    c1, c2 = config.channels()
    p1, p2 = channel_densities(config, x, t)
    r1, r2 = np.sqrt(p1), np.sqrt(p2)
    sig2 = sigma_at(c1, t) ** 2
    x = np.asarray(x, dtype=float)
    grad_r1 = -r1 * (x - c1.mean(t)) / (2.0 * sig2)
    grad_r2 = -r2 * (x - c2.mean(t)) / (2.0 * sig2)
    return (const.hbar / const.mass) * (r2 * grad_r1 - r1 * grad_r2) * np.sin(relative_phase(config, x, t))


def average_current(config: SlitConfig, x, t) -> FieldSample:
    """Total average current and the velocity derived from it.

    Points with ``P_tot`` below ``config.density_floor`` get ``nan``
    velocities and ``degenerate=True``; the current components are still
    returned.  Use :func:`velocity_field` to raise instead.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    c1, c2 = config.channels()
    p1, p2 = channel_densities(config, x, t)
    phi = relative_phase(config, x, t)
    v1 = mean_velocity_field(c1, x, t)
    v2 = mean_velocity_field(c2, x, t)
    cross = np.sqrt(p1 * p2)
    p_tot = p1 + p2 + 2.0 * cross * np.cos(phi)
    j_e = entangling_current(config, x, t)
    j_x = p1 * v1 + p2 * v2 + cross * (v1 + v2) * np.cos(phi) + j_e
    j_y = p_tot * config.v_y
    degenerate = p_tot < config.density_floor
    with np.errstate(divide="ignore", invalid="ignore"):
        v_x = np.where(degenerate, np.nan, j_x / np.where(degenerate, 1.0, p_tot))
    v_y = np.where(degenerate, np.nan, config.v_y)
    return FieldSample(p_tot, j_x, j_y, j_e, v_x, v_y, degenerate)


def velocity_field(config: SlitConfig, x, t):
    """Transverse averaged velocity ``J_x / P_tot``.

    Raises
    ------
    DegenerateDensity
        If ``P_tot`` is below the density floor anywhere in the input.
    """
    sample = average_current(config, x, t)
    if np.any(sample.degenerate):
        bad = np.broadcast_to(np.asarray(x, dtype=float), sample.degenerate.shape)[sample.degenerate]
        raise DegenerateDensity(f"P_tot below floor {config.density_floor:g} at {bad.size} point(s)", bad)
    return sample.v_tot_x


def sample_grid(config: SlitConfig, grid: GridSpec) -> FieldGrid:
    xs = grid.x
    ts = grid.t
    xx, tt = np.meshgrid(xs, ts)
    s = average_current(config, xx, tt)
    peak = float(np.max(s.P_tot)) if s.P_tot.size else 0.0
    tail = s.P_tot < config.tail_fraction * peak
    return FieldGrid(
        grid=grid,
        x=xs,
        t=ts,
        P_tot=s.P_tot,
        J_x=s.J_x,
        J_y=s.J_y,
        J_e=s.J_e,
        v_x=s.v_tot_x,
        v_y=s.v_tot_y,
        tail=tail,
        degenerate=s.degenerate,
    )


def continuity_residual(config: SlitConfig, x, t, h: float, k: float):
    """Central-difference residual of ``dP/dt + dJ_x/dx`` at ``(x, t)``.

    With the co-moving identification ``y = v_y t`` this is the same as the
    stationary 2D residual ``dJ_x/dx + dJ_y/dy``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    dp_dt = (intensity(config, x, t + k) - intensity(config, x, t - k)) / (2.0 * k)
    dj_dx = (average_current(config, x + h, t).J_x - average_current(config, x - h, t).J_x) / (2.0 * h)
    return dp_dt + dj_dx
