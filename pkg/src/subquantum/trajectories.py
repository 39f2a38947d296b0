"""Averaged particle trajectories through the two-slit velocity field.

Trajectories solve ``dx/dt = J_x(x, t) / P_tot(x, t)``.  The whole ensemble is
advanced at once as a vectorized fixed-step integration; every trajectory is
still an independent sequential solve, so the result does not depend on the
ensemble size or ordering.

Seeds are placed at equal-probability quantiles of ``P_tot(., t_start)``.
Because the flow transports probability, seed ``j`` should then stay at the
``j``-th quantile of the evolving density, which is what the screen
histogram comparison relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .doubleslit import SlitConfig, intensity, relative_phase

__all__ = [
    "SEEDINGS",
    "INTEGRATORS",
    "FLAG_OK",
    "FLAG_TAIL",
    "TrajectorySpec",
    "TrajectoryEnsemble",
    "Histogram",
    "transverse_velocity",
    "density_quantiles",
    "seed_positions",
    "integrate_ensemble",
    "no_crossing_report",
    "screen_histogram",
    "normalized_intensity",
    "histogram_l1",
    "quantile_tracking_error",
]

SEEDINGS = ("equal_probability_quantiles", "uniform_in_x")
INTEGRATORS = ("rk4", "euler")
FLAG_OK = 0
FLAG_TAIL = 1
_CDF_NODES = 2**16 + 1


@dataclass(frozen=True)
class TrajectorySpec:
    """Ensemble set-up.

    ``dt=None`` selects ``1e-3 * sigma0 / u0``.  If ``dt`` does not divide
    ``t_end - t_start`` it is shortened to the nearest step that does.
    ``x_range`` bounds uniform seeding and, if given, truncates the density
    used for quantile seeding.  Positions are stored every ``record_stride``
    steps (the final step is always stored).
    """

    n_trajectories: int = 100
    seeding: str = "equal_probability_quantiles"
    x_range: tuple[float, float] | None = None
    t_start: float = 1e-3
    t_end: float = 8.0
    dt: float | None = None
    integrator: str = "rk4"
    record_stride: int = 1

    def __post_init__(self):
        if int(self.n_trajectories) != self.n_trajectories or self.n_trajectories < 1:
            raise ValueError(f"n_trajectories must be a positive integer, got {self.n_trajectories}")
        if self.seeding not in SEEDINGS:
            raise ValueError(f"seeding must be one of {SEEDINGS}, got {self.seeding!r}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if not self.t_start < self.t_end:
            raise ValueError(f"need t_start < t_end, got {self.t_start} >= {self.t_end}")
        if self.t_start < 0:
            raise ValueError("t_start must be >= 0")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.x_range is not None and not self.x_range[0] < self.x_range[1]:
            raise ValueError(f"x_range must be increasing, got {self.x_range}")
        if self.seeding == "uniform_in_x" and self.x_range is None:
            raise ValueError("uniform_in_x seeding needs x_range")

    def step_size(self, config: SlitConfig) -> tuple[float, int]:
        """Effective ``(dt, n_steps)`` for ``config``."""
        dt = 1e-3 * config.sigma0 / config.u0 if self.dt is None else self.dt
        span = self.t_end - self.t_start
        n_steps = max(1, math.ceil(span / dt - 1e-9))
        return span / n_steps, n_steps


@dataclass
class TrajectoryEnsemble:
    """Recorded trajectories; row ``i`` is seed ``i`` (seeds are sorted ascending)."""

    times: np.ndarray
    positions: np.ndarray
    flags: np.ndarray
    spec: TrajectorySpec
    dt: float

    def __post_init__(self):
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.positions.shape != (self.flags.size, self.times.size):
            raise ValueError("positions must have shape (n_trajectories, n_times)")

    @property
    def ok(self) -> np.ndarray:
        return self.flags == FLAG_OK

    def at(self, t: float) -> np.ndarray:
        """Positions at ``t``, linearly interpolated between recorded times."""
        if not self.times[0] <= t <= self.times[-1]:
            raise ValueError(f"t={t} outside recorded range [{self.times[0]}, {self.times[-1]}]")
        j = int(np.searchsorted(self.times, t))
        if j < self.times.size and self.times[j] == t:
            return self.positions[:, j].copy()
        t0, t1 = self.times[j - 1], self.times[j]
        a = (t - t0) / (t1 - t0)
        return (1.0 - a) * self.positions[:, j - 1] + a * self.positions[:, j]


def _kernel(config: SlitConfig, x: np.ndarray, t: float, with_density: bool = True):
    """``(v, P_tot)`` at scalar time ``t``.

    The velocity uses the same current as the grid sampler, divided through
    by the common Gaussian factor ``exp(-(xi1^2 + xi2^2) / 4 sigma^2)`` so
    that only the channel ratio ``a = sqrt(P1/P2) w2/w1 = exp(x c1 / sigma^2)``
    remains.  This is cheaper and stays finite far out in the tails.
    ``P_tot`` is only evaluated when ``with_density`` is set.
    """
    const = config.constants
    u0 = config.u0
    sig2 = config.sigma0**2 + (u0 * t) ** 2
    rate = u0**2 * t / sig2
    c1 = config.orientation * (config.half_separation + config.v_x * t)
    v1 = config.orientation * config.v_x
    w1, w2 = config.amplitude_weights
    xi1 = x - c1
    xi2 = x + c1
    a = np.exp(np.clip(x * (c1 / sig2), -700.0, 700.0))
    phi = relative_phase(config, x, t)
    cos_phi = np.cos(phi)
    vel1 = v1 + xi1 * rate
    vel2 = -v1 + xi2 * rate
    cross_num = (vel1 + vel2) * cos_phi + (const.hbar / const.mass) * (xi2 - xi1) / (2.0 * sig2) * np.sin(phi)
    num = w1**2 * a * vel1 + w2**2 * vel2 / a + w1 * w2 * cross_num
    den = w1**2 * a + w2**2 / a + 2.0 * w1 * w2 * cos_phi
    with np.errstate(divide="ignore", invalid="ignore"):
        v = num / den
    if not with_density:
        return v, None
    scale = np.exp(-(xi1**2 + xi2**2) / (4.0 * sig2)) / math.sqrt(2.0 * math.pi * sig2)
    if w1 * w2 > 0:
        p_tot = den * scale
    else:
        # one channel closed: undo the ratio explicitly
        p_tot = (w1**2 * np.exp(-(xi1**2) / (2.0 * sig2)) + w2**2 * np.exp(-(xi2**2) / (2.0 * sig2))) / math.sqrt(
            2.0 * math.pi * sig2
        )
    v = np.where(p_tot < config.density_floor, np.nan, v)
    return v, p_tot


def transverse_velocity(config: SlitConfig, x, t: float):
    """Velocity ``J_x / P_tot`` at scalar ``t`` (``nan`` below the density floor)."""
    return _kernel(config, np.asarray(x, dtype=float), float(t))[0]


def _peak_bound(config: SlitConfig, t: float) -> float:
    # P_tot <= (R1 + R2)^2 <= (w1 + w2)^2 max(marginal)
    w1, w2 = config.amplitude_weights
    sig = math.sqrt(config.sigma0**2 + (config.u0 * t) ** 2)
    return (w1 + w2) ** 2 / (math.sqrt(2.0 * math.pi) * sig)


def _support(config: SlitConfig, t: float, width: float = 12.0) -> tuple[float, float]:
    sig = math.sqrt(config.sigma0**2 + (config.u0 * t) ** 2)
    c = config.half_separation + abs(config.v_x * t)
    return -c - width * sig, c + width * sig


def _cdf(config: SlitConfig, t: float, x_range=None):
    lo, hi = _support(config, t) if x_range is None else x_range
    xs = np.linspace(lo, hi, _CDF_NODES)
    p = intensity(config, xs, t)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(xs))))
    return xs, cdf


def density_quantiles(config: SlitConfig, t: float, probs, x_range=None) -> np.ndarray:
    """Positions at which the normalized ``P_tot(., t)`` reaches the given cumulative probabilities."""
    xs, cdf = _cdf(config, t, x_range)
    return np.interp(np.asarray(probs, dtype=float) * cdf[-1], cdf, xs)


def seed_positions(config: SlitConfig, spec: TrajectorySpec) -> np.ndarray:
    """Sorted initial positions at ``spec.t_start``."""
    n = int(spec.n_trajectories)
    if spec.seeding == "uniform_in_x":
        lo, hi = spec.x_range
        if n == 1:
            return np.array([0.5 * (lo + hi)])
        return np.linspace(lo, hi, n)
    return density_quantiles(config, spec.t_start, (np.arange(n) + 0.5) / n, spec.x_range)


def integrate_ensemble(config: SlitConfig, spec: TrajectorySpec, seeds=None) -> TrajectoryEnsemble:
    """Integrate the ensemble from ``spec.t_start`` to ``spec.t_end``.

    ``seeds`` overrides the seeding rule (it must be sorted ascending for
    the ordering check to be meaningful).  A trajectory whose density falls
    below ``config.tail_fraction`` of the peak is flagged and from then on
    moves with its last reliable velocity.
    """
    x = seed_positions(config, spec) if seeds is None else np.array(seeds, dtype=float).reshape(-1)
    dt, n_steps = spec.step_size(config)
    stride = spec.record_stride
    record_steps = list(range(0, n_steps + 1, stride))
    if record_steps[-1] != n_steps:
        record_steps.append(n_steps)
    times = spec.t_start + dt * np.asarray(record_steps, dtype=float)
    times[-1] = spec.t_end
    positions = np.empty((x.size, len(record_steps)))
    positions[:, 0] = x
    flags = np.zeros(x.size, dtype=np.uint8)
    frozen = np.zeros(x.size)
    any_tail = False
    col = 1

    def velocity(xx, t):
        v, _ = _kernel(config, xx, t, with_density=False)
        if any_tail:
            v = np.where(flags == FLAG_TAIL, frozen, v)
        bad = ~np.isfinite(v)
        if bad.any():
            v = np.where(bad, frozen, v)
        return v

    v_now, p_now = _kernel(config, x, spec.t_start)
    for k in range(n_steps):
        t = spec.t_start + k * dt
        newly = (flags == FLAG_OK) & (
            (p_now < config.tail_fraction * _peak_bound(config, t)) | ~np.isfinite(v_now)
        )
        flags[newly] = FLAG_TAIL
        any_tail = bool(flags.any())
        frozen = np.where(flags == FLAG_OK, v_now, frozen) if any_tail else v_now
        k1 = np.where(flags == FLAG_TAIL, frozen, v_now) if any_tail else v_now
        if spec.integrator == "euler":
            x = x + dt * k1
        else:
            k2 = velocity(x + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = velocity(x + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = velocity(x + dt * k3, t + dt)
            x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        v_now, p_now = _kernel(config, x, spec.t_start + (k + 1) * dt)
        if col < len(record_steps) and record_steps[col] == k + 1:
            positions[:, col] = x
            col += 1
    return TrajectoryEnsemble(times=times, positions=positions, flags=flags, spec=spec, dt=dt)


def no_crossing_report(ensemble: TrajectoryEnsemble) -> dict:
    """Count axis crossings and ordering violations.

    ``axis_crossings`` counts sign changes of ``x`` between consecutive
    recorded times, summed over trajectories.  ``order_violations`` counts,
    over all recorded times, adjacent rows whose positions are not strictly
    increasing (rows are stored in initial order).
    """
    pos = ensemble.positions
    side = pos > 0
    axis = int(np.count_nonzero(side[:, 1:] != side[:, :-1]))
    if pos.shape[0] < 2:
        order = 0
    else:
        order = int(np.count_nonzero(np.diff(pos, axis=0) <= 0))
    return {"axis_crossings": axis, "order_violations": order}


@dataclass(frozen=True)
class Histogram:
    """Arrival density on a screen; ``density`` integrates to one over ``edges``."""

    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    n_used: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def screen_histogram(
    ensemble: TrajectoryEnsemble, t_screen: float, n_bins: int, x_range: tuple[float, float] | None = None
) -> Histogram:
    """Histogram of arrival positions at ``t_screen``, tail trajectories excluded.

    The default range is the extent of the included arrivals.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    xs = ensemble.at(t_screen)[ensemble.ok]
    if xs.size == 0:
        raise ValueError("no trajectories left after excluding the tail")
    if x_range is None:
        lo, hi = float(xs.min()), float(xs.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        x_range = (lo, hi)
    counts, edges = np.histogram(xs, bins=n_bins, range=x_range)
    density = counts / (xs.size * np.diff(edges))
    return Histogram(edges=edges, counts=counts, density=density, n_used=int(xs.size))


def normalized_intensity(config: SlitConfig, t: float):
    """``P_tot(., t)`` divided by its integral, as a callable of ``x``."""
    xs, cdf = _cdf(config, t)
    total = cdf[-1]
    return lambda x: intensity(config, x, t) / total


def histogram_l1(hist: Histogram, pdf, subdivisions: int = 64) -> float:
    """L1 distance between the histogram and a normalized density.

    Inside the histogram range the density is averaged over each bin; any
    probability mass of ``pdf`` outside the range counts in full.
    """
    e = hist.edges
    u = (np.arange(subdivisions) + 0.5) / subdivisions
    nodes = e[:-1, None] + np.diff(e)[:, None] * u[None, :]
    bin_mass = pdf(nodes).mean(axis=1) * np.diff(e)
    inside = np.sum(np.abs(hist.density * np.diff(e) - bin_mass))
    outside = abs(1.0 - bin_mass.sum())
    return float(inside + outside)


def quantile_tracking_error(config: SlitConfig, ensemble: TrajectoryEnsemble) -> np.ndarray:
    """``max_j |x_j(t) - q_j(t)|`` per recorded time.

    ``q_j(t)`` is the ``(j + 1/2)/n`` quantile of ``P_tot(., t)``; meaningful
    for quantile-seeded ensembles.
    """
    n = ensemble.positions.shape[0]
    probs = (np.arange(n) + 0.5) / n
    out = np.empty(ensemble.times.size)
    for i, t in enumerate(ensemble.times):
        q = density_quantiles(config, float(t), probs, ensemble.spec.x_range)
        out[i] = np.max(np.abs(ensemble.positions[:, i] - q))
    return out
