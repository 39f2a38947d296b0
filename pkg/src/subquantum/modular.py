"""Modular-momentum bookkeeping for the two-slit phase.

With ``v_x = 0`` the relative phase is linear in the half separation ``X``,
``phi12 = -X k`` with the local wavenumber ``k = x D t / (sigma0^2 sigma^2)``.
Splitting ``X = X_n + delta_X`` so that ``X_n k`` is a whole number of turns
leaves only the remainder ``delta_X`` observable.  Opening the second slit
then shifts the momentum by ``(hbar/2) d(delta_X k)/dx``, which decays like
``m delta_X / t`` at large times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .doubleslit import SlitConfig
from .errors import UndefinedSplit, UnsupportedConfiguration

__all__ = [
    "ModularDecomposition",
    "MomentumShift",
    "MOMENTUM_SHIFT_CONVENTIONS",
    "phase_wavenumber",
    "decompose",
    "reconstructed_phase",
    "momentum_shift",
    "momentum_shift_forms",
    "momentum_shift_rate",
    "large_time_shift",
]

MOMENTUM_SHIFT_CONVENTIONS = ("halved", "full")
_FACTOR = {"halved": 1.0, "full": 2.0}


@dataclass(frozen=True)
class ModularDecomposition:
    """``X = X_n + delta_X`` at the evaluation point ``(x, t)``."""

    X: float
    X_n: float
    delta_X: float
    n: int
    x: float
    t: float


@dataclass(frozen=True)
class MomentumShift:
    value: float
    sign: int


def _require_static(config: SlitConfig) -> None:
    if config.v_x != 0.0:
        raise UnsupportedConfiguration(f"modular bookkeeping needs v_x = 0, got {config.v_x}")


def _rates(config: SlitConfig, t: float):
    D = config.constants.diffusivity
    s0 = config.sigma0
    u0 = D / s0
    sig2 = s0**2 + (u0 * t) ** 2
    return D, s0, u0, sig2


def _factor(convention: str) -> float:
    try:
        return _FACTOR[convention]
    except KeyError:
        raise ValueError(f"convention must be one of {MOMENTUM_SHIFT_CONVENTIONS}, got {convention!r}") from None


def _sign(sign: int) -> int:
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign


def phase_wavenumber(config: SlitConfig, x: float, t: float) -> float:
    """``k = x D t / (sigma0^2 sigma^2)``, so that ``phi12 = -X k`` (before any ramp)."""
    D, s0, _, sig2 = _rates(config, t)
    return x * D * t / (s0**2 * sig2)


def decompose(config: SlitConfig, x: float, t: float) -> ModularDecomposition:
    """Split ``X`` into whole phase turns and a remainder at ``(x, t)``.

    ``n`` is the number of complete turns in ``X k``, counted towards zero,
    so ``delta_X`` carries the sign of ``X`` and ``|delta_X k| < 2 pi``.

    Raises
    ------
    UndefinedSplit
        If ``x = 0`` or ``t = 0`` (the phase term vanishes identically).
    UnsupportedConfiguration
        If the channels drift (``v_x != 0``).
    """
    _require_static(config)
    x = float(x)
    t = float(t)
    if x == 0.0 or t == 0.0:
        raise UndefinedSplit(f"phase term vanishes at x={x}, t={t}; splitting undefined")
    k = phase_wavenumber(config, x, t)
    X = config.half_separation
    n = int(math.trunc(X * k / (2.0 * math.pi)))
    X_n = 2.0 * math.pi * n / k
    return ModularDecomposition(X=X, X_n=X_n, delta_X=X - X_n, n=n, x=x, t=t)


def reconstructed_phase(config: SlitConfig, decomposition: ModularDecomposition) -> float:
    """Relative phase rebuilt from ``(X_n, delta_X)`` at the decomposition point."""
    d = decomposition
    k = phase_wavenumber(config, d.x, d.t)
    return float(config.orientation * -(d.X_n * k + d.delta_X * k) + config.slit1_phase(d.t))


def momentum_shift(
    config: SlitConfig,
    decomposition: ModularDecomposition,
    t,
    sign: int = +1,
    convention: str = "halved",
) -> MomentumShift:
    """``sign m delta_X D^2 t / (sigma^2 sigma0^2)``.

    ``sign`` says which slit was opened.  ``convention="full"`` drops the
    factor one half relating the shift to the phase gradient.
    """
    _require_static(config)
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    sign = _sign(sign)
    D, s0, _, sig2 = _rates(config, np.asarray(t, dtype=float))
    m = config.constants.mass
    value = _factor(convention) * sign * m * decomposition.delta_X * D**2 * t / (sig2 * s0**2)
    return MomentumShift(value=value, sign=sign)


def momentum_shift_forms(config: SlitConfig, decomposition: ModularDecomposition, t, sign: int = +1):
    """The shift written three ways: via ``hbar^2/4m``, via ``m D^2`` and via ``sigma_dot/sigma``."""
    sign = _sign(sign)
    t = np.asarray(t, dtype=float)
    hbar = config.constants.hbar
    m = config.constants.mass
    D, s0, u0, sig2 = _rates(config, t)
    dX = decomposition.delta_X
    sigma = np.sqrt(sig2)
    sigma_dot = u0**2 * t / sigma
    return (
        sign * hbar**2 / (4.0 * m) * dX * t / (sig2 * s0**2),
        sign * m * D**2 * dX * t / (sig2 * s0**2),
        sign * m * dX * sigma_dot / sigma,
    )


def momentum_shift_rate(
    config: SlitConfig,
    decomposition: ModularDecomposition,
    t,
    sign: int = +1,
    convention: str = "halved",
):
    """Time derivative of :func:`momentum_shift`.

    ``sign m delta_X (sigma_ddot/sigma - (sigma_dot/sigma)^2)``, which reduces
    to ``sign m delta_X u0^2 (sigma0^2 - u0^2 t^2) / sigma^4``.
    """
    _require_static(config)
    sign = _sign(sign)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    _, s0, u0, sig2 = _rates(config, t)
    m = config.constants.mass
    return _factor(convention) * sign * m * decomposition.delta_X * u0**2 * (s0**2 - (u0 * t) ** 2) / sig2**2


def large_time_shift(
    config: SlitConfig,
    decomposition: ModularDecomposition,
    t,
    sign: int = +1,
    convention: str = "halved",
):
    """Asymptote ``sign m delta_X / t`` of the shift, using ``sigma_dot ~ sigma / t``."""
    _require_static(config)
    sign = _sign(sign)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be > 0")
    return _factor(convention) * sign * config.constants.mass * decomposition.delta_X / t
