"""Quantum-mechanical reference computations.

The two channels are written as Madelung wavefunctions ``Psi_i = R_i exp(i S_i / hbar)``
and everything is evaluated from the complex amplitudes directly: the
probability current ``(hbar/m) Im(Psi* grad Psi)``, moment expectations of
``Psi_phi = Psi_1 + exp(i phi) Psi_2``, the shift-operator expectation and the
osmotic bias integral.  Amplitudes and phases are rebuilt here from the
configuration primitives rather than taken from :mod:`subquantum.doubleslit`,
so agreement between the two modules is a genuine cross-check.

The phases are the closed forms whose gradients are ``m`` times the channel
velocity fields; additive time-only terms (the same for both channels) are
dropped, and each ``S_i`` vanishes at ``x = 0, t = 0`` apart from the slit-1
ramp and offset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .doubleslit import SlitConfig
from .errors import QuadratureUnresolved
from .packet import PacketParams, osmotic_velocity, marginal_density, sigma_at

__all__ = [
    "ChannelWave",
    "assemble_wavefunctions",
    "quantum_current",
    "quantum_density",
    "expectation_moment",
    "shift_operator_expectation",
    "osmotic_unbiasedness",
    "osmotic_unbiasedness_total",
    "integrate",
]

QUAD_TOL = 1e-8


@dataclass(frozen=True)
class _Terms:
    R: np.ndarray
    gradR: np.ndarray
    lapR: np.ndarray
    S: np.ndarray
    gradS: np.ndarray
    lapS: np.ndarray


def _channel_terms(config: SlitConfig, x, t) -> tuple[_Terms, _Terms]:
    hbar = config.constants.hbar
    m = config.constants.mass
    D = hbar / (2.0 * m)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    u0 = D / config.sigma0
    sig2 = config.sigma0**2 + u0**2 * t**2
    # dilation rate sigma_dot / sigma
    rate = u0**2 * t / sig2
    s = -1.0 if config.mirrored else 1.0
    w = config.amplitude_weights
    extra = config.slit1_phase(t)
    out = []
    for k, sign in enumerate((s, -s)):
        v = sign * config.v_x
        c = sign * (config.half_separation + config.v_x * t)
        xi = x - c
        R = w[k] * (2.0 * math.pi * sig2) ** -0.25 * np.exp(-(xi**2) / (4.0 * sig2))
        gradR = -R * xi / (2.0 * sig2)
        lapR = R * ((xi / (2.0 * sig2)) ** 2 - 1.0 / (2.0 * sig2))
        S = m * v * x + 0.5 * m * rate * xi**2
        if k == 0:
            S = S + hbar * extra
        gradS = m * v + m * rate * xi
        lapS = m * rate * np.ones_like(xi)
        out.append(_Terms(R, gradR, lapR, S, gradS, lapS))
    return out[0], out[1]


@dataclass(frozen=True)
class ChannelWave:
    """Madelung form of one channel at a fixed time.

    ``R``, ``S``, ``gradR`` and ``gradS`` (and the second derivatives) are
    closures over ``x``.
    """

    t: float
    hbar: float
    R: Callable
    S: Callable
    gradR: Callable
    gradS: Callable
    lapR: Callable
    lapS: Callable

    def psi(self, x):
        return self.R(x) * np.exp(1j * self.S(x) / self.hbar)

    def grad_psi(self, x):
        return (self.gradR(x) + 1j * self.R(x) * self.gradS(x) / self.hbar) * np.exp(1j * self.S(x) / self.hbar)

    def lap_psi(self, x):
        R, gR, lR = self.R(x), self.gradR(x), self.lapR(x)
        gS, lS = self.gradS(x) / self.hbar, self.lapS(x) / self.hbar
        return (lR + 2j * gR * gS + 1j * R * lS - R * gS**2) * np.exp(1j * self.S(x) / self.hbar)


def assemble_wavefunctions(config: SlitConfig, t: float) -> tuple[ChannelWave, ChannelWave]:
    """Per-channel Madelung wavefunctions ``(Psi_1, Psi_2)`` at time ``t``."""
    t = float(t)
    hbar = config.constants.hbar

    def make(k):
        def get(name):
            return lambda x: getattr(_channel_terms(config, x, t)[k], name)

        return ChannelWave(t, hbar, get("R"), get("S"), get("gradR"), get("gradS"), get("lapR"), get("lapS"))

    return make(0), make(1)


def _psi_total(config, x, t, phi=0.0):
    a, b = _channel_terms(config, x, t)
    hbar = config.constants.hbar
    e2 = np.exp(1j * phi)
    psi = a.R * np.exp(1j * a.S / hbar) + e2 * b.R * np.exp(1j * b.S / hbar)
    grad = (a.gradR + 1j * a.R * a.gradS / hbar) * np.exp(1j * a.S / hbar) + e2 * (
        b.gradR + 1j * b.R * b.gradS / hbar
    ) * np.exp(1j * b.S / hbar)
    return psi, grad


def quantum_density(config: SlitConfig, x, t):
    """``|Psi_1 + Psi_2|^2``."""
    psi, _ = _psi_total(config, x, t)
    return np.abs(psi) ** 2


def quantum_current(config: SlitConfig, x, t, gradient: str = "analytic", step: float | None = None):
    """Probability current ``(1/m) Re{Psi* (-i hbar grad) Psi}`` of ``Psi_1 + Psi_2``.

    ``gradient="fd"`` replaces the analytic derivative with a central
    difference of step ``step`` (default ``1e-4 * sigma0``).
    """
    hbar = config.constants.hbar
    m = config.constants.mass
    if gradient == "analytic":
        psi, grad = _psi_total(config, x, t)
    elif gradient == "fd":
        h = 1e-4 * config.sigma0 if step is None else float(step)
        x = np.asarray(x, dtype=float)
        psi, _ = _psi_total(config, x, t)
        grad = (_psi_total(config, x + h, t)[0] - _psi_total(config, x - h, t)[0]) / (2.0 * h)
    else:
        raise ValueError(f"gradient must be 'analytic' or 'fd', got {gradient!r}")
    return np.real(np.conj(psi) * (-1j * hbar) * grad) / m


def integrate(fn, a: float, b: float, tol: float = QUAD_TOL, n0: int = 1025, n_max: int = 2**22 + 1):
    """Trapezoid rule on ``[a, b]`` with node doubling until successive values agree.

    ``fn`` maps an array of nodes to an array of values whose last axis runs
    over the nodes; several integrands can be stacked on leading axes.
    Returns ``(value, error_estimate)``.

    Raises
    ------
    QuadratureUnresolved
        If the estimate is still above ``tol * max(1, |value|)`` at ``n_max`` nodes.
    """
    n = n0
    xs = np.linspace(a, b, n)
    prev = np.trapezoid(fn(xs), xs, axis=-1)
    while True:
        n = 2 * n - 1
        xs = np.linspace(a, b, n)
        cur = np.trapezoid(fn(xs), xs, axis=-1)
        err = np.max(np.abs(cur - prev))
        if err <= tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur, err
        if n >= n_max:
            raise QuadratureUnresolved(f"quadrature error {err:.3e} above {tol:g} with {n} nodes")
        prev = cur


def _domain(config: SlitConfig, t, extra=0.0):
    sig = math.sqrt(config.sigma0**2 + (config.u0 * t) ** 2)
    c = config.half_separation + abs(config.v_x * t)
    return -c - 12.0 * sig - extra, c + 12.0 * sig + extra


def _ratio(num_fn, den_fn, a, b, tol):
    """Normalised integral ``num/den`` with the error judged on the ratio itself."""

    def stacked(xs):
        return np.stack([num_fn(xs), den_fn(xs)])

    n = 1025
    xs = np.linspace(a, b, n)
    vals = np.trapezoid(stacked(xs), xs, axis=-1)
    prev = vals[0] / vals[1]
    while True:
        n = 2 * n - 1
        xs = np.linspace(a, b, n)
        vals = np.trapezoid(stacked(xs), xs, axis=-1)
        cur = vals[0] / vals[1]
        err = abs(cur - prev)
        if err <= tol * max(1.0, abs(cur)):
            return cur
        if n >= 2**22:
            raise QuadratureUnresolved(f"quadrature error {err:.3e} above {tol:g} with {n} nodes")
        prev = cur


def _psi_phi(config, t, phi):
    w1, w2 = assemble_wavefunctions(config, t)
    e = np.exp(1j * phi)
    return (
        lambda x: w1.psi(x) + e * w2.psi(x),
        lambda x: w1.grad_psi(x) + e * w2.grad_psi(x),
        lambda x: w1.lap_psi(x) + e * w2.lap_psi(x),
    )


def expectation_moment(config: SlitConfig, t: float, phi: float, kind: str, order: int, tol: float = QUAD_TOL):
    """Normalised moment of position or momentum for ``Psi_1 + exp(i phi) Psi_2``.

    Momentum uses ``-i hbar d/dx`` applied ``order`` times; the real part of
    ``<Psi| p^order |Psi>`` is returned.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    hbar = config.constants.hbar
    psi, dpsi, d2psi = _psi_phi(config, t, phi)
    a, b = _domain(config, t)

    def den(xs):
        return np.abs(psi(xs)) ** 2

    if kind == "position":
        def num(xs):
            return xs**order * np.abs(psi(xs)) ** 2
    elif kind == "momentum":
        if order == 1:
            def num(xs):
                return np.real(np.conj(psi(xs)) * (-1j * hbar) * dpsi(xs))
        else:
            def num(xs):
                return np.real(np.conj(psi(xs)) * (-(hbar**2)) * d2psi(xs))
    else:
        raise ValueError(f"kind must be 'position' or 'momentum', got {kind!r}")
    return float(_ratio(num, den, a, b, tol))


def shift_operator_expectation(config: SlitConfig, t: float, phi: float, direction: int = +1, tol: float = QUAD_TOL):
    """Normalised ``int Psi_phi*(x) Psi_phi(x + direction * 2X) dx``.

    ``direction=+1`` is the shift written as ``exp(-i p D / hbar)`` with
    ``D = 2X`` the inter-slit distance; ``direction=-1`` is its conjugate
    shift.  Returns a complex number.
    """
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")
    shift = direction * config.inter_slit_distance
    psi, _, _ = _psi_phi(config, t, phi)
    a, b = _domain(config, t, extra=config.inter_slit_distance)

    def num(xs):
        return np.conj(psi(xs)) * psi(xs + shift)

    def den(xs):
        return np.abs(psi(xs)) ** 2 + 0j

    return complex(_ratio(num, den, a, b, tol))


def osmotic_unbiasedness(params: PacketParams, t: float, tol: float = QUAD_TOL) -> float:
    """``int P (m u) dx`` over ``mean +/- 12 sigma`` for one channel; should vanish."""
    sig = float(sigma_at(params, t))
    mu = float(params.mean(t))

    def fn(xs):
        return marginal_density(params, xs, t) * params.mass * osmotic_velocity(params, xs, t, +1)

    value, _ = integrate(fn, mu - 12.0 * sig, mu + 12.0 * sig, tol=tol, n0=4097)
    return float(value)


def osmotic_unbiasedness_total(config: SlitConfig, t: float, tol: float = QUAD_TOL) -> float:
    """Same integral for the two-channel density, with ``u = -D grad P_tot / P_tot``."""
    m = config.constants.mass
    D = config.constants.diffusivity
    a, b = _domain(config, t)

    def fn(xs):
        psi, grad = _psi_total(config, xs, t)
        grad_p = 2.0 * np.real(np.conj(psi) * grad)
        # P * (m u) = -m D grad P
        return -m * D * grad_p

    value, _ = integrate(fn, a, b, tol=tol, n0=4097)
    return float(value)
