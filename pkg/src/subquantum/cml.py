"""Coupled-map lattice for diffusion with a linearly growing diffusivity.

Each cell is updated from its two neighbours with the explicit stencil

    v_i <- v_i + r (v_{i-1} - 2 v_i + v_{i+1}),    r = D dt / dx^2,

where ``D`` is the ballistic diffusivity ``u0^2 t`` taken at the middle of the
step.  Starting from a sampled Gaussian, the lattice variance then follows
``sigma0^2 + u0^2 t^2`` rather than the linear law of ordinary diffusion.

The stencil moves exactly ``2 r dx^2`` of variance per unit mass and step, so
with the midpoint diffusivity the variance law is reproduced to rounding,
apart from the initial sampling and boundary leakage.  The profile itself
carries the usual ``O(dx^2 + dt)`` truncation error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainTooSmall, StabilityViolation, UnsupportedConfiguration
from .packet import PacketParams, marginal_density

__all__ = [
    "BOUNDARIES",
    "LatticeSpec",
    "LatticeState",
    "DispersionSeries",
    "init_gaussian",
    "step",
    "lattice_moments",
    "run_dispersion",
    "profile_error",
]

BOUNDARIES = ("absorbing", "reflecting")
R_MAX = 0.5


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice geometry and the macro time step.

    Cells are centred on ``center0 + (i - n_cells // 2) dx``.
    """

    n_cells: int = 2048
    dx: float = 0.02
    dt: float = 0.01
    boundary: str = "reflecting"

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 16:
            raise ValueError(f"n_cells must be an integer >= 16, got {self.n_cells}")
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise ValueError(f"dx must be positive, got {self.dx}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    def positions(self, center0: float = 0.0) -> np.ndarray:
        return center0 + (np.arange(self.n_cells) - self.n_cells // 2) * self.dx


@dataclass(frozen=True)
class LatticeState:
    values: np.ndarray
    t: float
    x: np.ndarray


@dataclass(frozen=True)
class DispersionSeries:
    """Recorded moments of a lattice run; ``final`` is the last state."""

    t: np.ndarray
    variance: np.ndarray
    mass: np.ndarray
    kurtosis: np.ndarray
    final: LatticeState

    def analytic_variance(self, params: PacketParams) -> np.ndarray:
        return params.sigma0**2 + (params.u0 * self.t) ** 2


def init_gaussian(spec: LatticeSpec, params: PacketParams) -> LatticeState:
    """Sample the initial Gaussian at the cell centres, normalized to unit mass.

    Raises
    ------
    DomainTooSmall
        If the lattice does not reach ``10 sigma0`` on both sides.
    UnsupportedConfiguration
        For a drifting packet; the lattice has no advection term.
    """
    if params.v_x != 0.0:
        raise UnsupportedConfiguration("the lattice models diffusion only; use v_x = 0")
    x = spec.positions(params.center0)
    reach = min(params.center0 - x[0], x[-1] - params.center0)
    if reach < 10.0 * params.sigma0:
        raise DomainTooSmall(f"lattice reaches {reach:g} from the centre, need {10.0 * params.sigma0:g}")
    values = marginal_density(params, x, 0.0)
    values = values / (values.sum() * spec.dx)
    return LatticeState(values=values, t=0.0, x=x)


def _laplacian(values: np.ndarray, boundary: str) -> np.ndarray:
    if boundary == "reflecting":
        left, right = values[0], values[-1]
    else:
        left = right = 0.0
    out = np.empty_like(values)
    out[1:-1] = values[:-2] - 2.0 * values[1:-1] + values[2:]
    out[0] = left - 2.0 * values[0] + values[1]
    out[-1] = values[-2] - 2.0 * values[-1] + right
    return out


def step(state: LatticeState, spec: LatticeSpec, params: PacketParams, dt: float | None = None) -> LatticeState:
    """One explicit update of length ``dt`` (default ``spec.dt``).

    Raises
    ------
    StabilityViolation
        If ``r = u0^2 (t + dt/2) dt / dx^2`` exceeds 1/2.
    """
    dt = spec.dt if dt is None else float(dt)
    d_chord = params.u0**2 * (state.t + 0.5 * dt)
    r = d_chord * dt / spec.dx**2
    if r > R_MAX:
        raise StabilityViolation(f"r = {r:.4g} exceeds {R_MAX}; reduce dt")
    values = state.values + r * _laplacian(state.values, spec.boundary)
    return LatticeState(values=values, t=state.t + dt, x=state.x)


def lattice_moments(state: LatticeState, dx: float) -> dict:
    """Mass, mean, variance and excess kurtosis of the lattice profile."""
    v = state.values
    x = state.x
    mass = float(v.sum() * dx)
    w = v * dx / mass
    mean = float(np.dot(w, x))
    d = x - mean
    var = float(np.dot(w, d * d))
    m4 = float(np.dot(w, d**4))
    return {"mass": mass, "mean": mean, "variance": var, "kurtosis": m4 / var**2 - 3.0}


def run_dispersion(
    spec: LatticeSpec,
    params: PacketParams,
    t_end: float,
    record_every: int = 1,
    max_substeps: int = 1_000_000,
) -> DispersionSeries:
    """Evolve the initial Gaussian to ``t_end`` and record its moments.

    Every macro step of ``spec.dt`` (the last one shortened to land on
    ``t_end``) is split into the fewest equal substeps for which the
    diffusivity at the end of the macro step still gives ``r <= 1/2``.
    Moments are recorded every ``record_every`` macro steps and at ``t_end``.

    Raises
    ------
    StabilityViolation
        If more than ``max_substeps`` substeps would be needed for one macro step.
    """
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    state = init_gaussian(spec, params)
    n_macro = math.ceil(t_end / spec.dt - 1e-9) if t_end > 0 else 0
    ts, var, mass, kurt = [], [], [], []

    def record(s):
        mom = lattice_moments(s, spec.dx)
        ts.append(s.t)
        var.append(mom["variance"])
        mass.append(mom["mass"])
        kurt.append(mom["kurtosis"])

    record(state)
    u2 = params.u0**2
    for k in range(n_macro):
        t0 = k * spec.dt
        t1 = t_end if k == n_macro - 1 else (k + 1) * spec.dt
        h = t1 - t0
        r_end = u2 * t1 * h / spec.dx**2
        n_sub = max(1, math.ceil(r_end / R_MAX))
        if n_sub > max_substeps:
            raise StabilityViolation(f"{n_sub} substeps needed at t = {t0:g}; increase dx or reduce dt")
        sub = h / n_sub
        for j in range(n_sub):
            state = step(state, spec, params, sub)
        # pin the clock to the macro grid so rounding does not accumulate
        state = LatticeState(values=state.values, t=t1, x=state.x)
        if (k + 1) % record_every == 0 or k == n_macro - 1:
            record(state)
    return DispersionSeries(
        t=np.array(ts), variance=np.array(var), mass=np.array(mass), kurtosis=np.array(kurt), final=state
    )


def profile_error(state: LatticeState, params: PacketParams) -> float:
    """Largest pointwise deviation from the analytic density at ``state.t``."""
    return float(np.max(np.abs(state.values - marginal_density(params, state.x, state.t))))
