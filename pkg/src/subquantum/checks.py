"""Named invariant checks behind the ``validate`` subcommand.

Each check returns a :class:`CheckResult` with the measured value and the
tolerance it was held to.  Results contain no timings, so a report built from
them is reproducible byte for byte.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import cml, qoracle
from .config import ExperimentConfig
from .doubleslit import sample_grid
from .packet import diffusivity_at, sigma_at
from .trajectories import integrate_ensemble, no_crossing_report

__all__ = ["CheckResult", "CHECKS", "run_checks", "oracle_deviation"]

ORACLE_TOL = 1e-8
ORACLE_DENSITY_CUT = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str

    def as_dict(self) -> dict:
        return asdict(self)


def oracle_deviation(config: ExperimentConfig) -> float:
    """Max relative gap between the classical and quantum currents where ``P_tot >= 1e-12``."""
    slits = config.slits
    fg = sample_grid(slits, config.grid)
    xx, tt = np.meshgrid(fg.x, fg.t)
    jq = qoracle.quantum_current(slits, xx, tt)
    mask = fg.P_tot >= ORACLE_DENSITY_CUT
    if not mask.any():
        return 0.0
    scale = np.abs(jq[mask])
    gap = np.abs(fg.J_x[mask] - jq[mask])
    # exact zeros of the current on the symmetry axis are compared absolutely
    rel = np.where(scale > 0, gap / np.where(scale > 0, scale, 1.0), gap)
    return float(rel.max())


def _oracle(cfg):
    dev = oracle_deviation(cfg)
    return CheckResult("oracle_equivalence", dev <= ORACLE_TOL, dev, ORACLE_TOL, "classical vs quantum current")


def _dispersion(cfg):
    ts = cfg.grid.t
    worst = 0.0
    for p in cfg.slits.channels():
        lhs = sigma_at(p, ts) ** 2 - p.sigma0**2
        rhs = diffusivity_at(p, ts) * ts
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs)))))
    tol = 1e-14
    return CheckResult("dispersion_identity", worst <= tol, worst, tol, "sigma^2 - sigma0^2 = D_t t")


def _normalization(cfg):
    from .packet import marginal_density

    worst = 0.0
    ts = np.linspace(cfg.grid.t_min, cfg.grid.t_max, 9)
    for p in cfg.slits.channels():
        for t in ts:
            s = float(sigma_at(p, t))
            mu = float(p.mean(t))
            value, _ = qoracle.integrate(lambda x: marginal_density(p, x, t), mu - 12 * s, mu + 12 * s, n0=4097)
            worst = max(worst, abs(float(value) - 1.0))
    tol = 1e-10
    return CheckResult("normalization", worst <= tol, worst, tol, "channel densities integrate to one")


def _osmotic(cfg):
    ts = np.linspace(max(cfg.grid.t_min, 0.0), cfg.grid.t_max, 9)
    worst = 0.0
    for p in cfg.slits.channels():
        for t in ts:
            worst = max(worst, abs(qoracle.osmotic_unbiasedness(p, float(t))))
    tol = 1e-10
    return CheckResult("osmotic_mean_zero", worst <= tol, worst, tol, "mean osmotic momentum vanishes")


def _modular(cfg):
    base = sample_grid(cfg.slits, cfg.grid)
    worst = 0.0
    for turns in (1, 2):
        shifted = cfg.slits.with_(phase_offset=cfg.slits.phase_offset + 2.0 * np.pi * turns)
        other = sample_grid(shifted, cfg.grid)
        for name in ("P_tot", "J_x", "J_e"):
            worst = max(worst, float(np.max(np.abs(base.field(name) - other.field(name)))))
    tol = 1e-12
    return CheckResult("modular_invariance", worst <= tol, worst, tol, "whole turns of phase change nothing")


def _no_crossing(cfg):
    ens = integrate_ensemble(cfg.slits, cfg.trajectories)
    rep = no_crossing_report(ens)
    total = rep["axis_crossings"] + rep["order_violations"]
    detail = f"axis_crossings={rep['axis_crossings']} order_violations={rep['order_violations']}"
    if not cfg.slits.is_symmetric:
        return CheckResult("no_crossing", True, float(total), 0.0, "skipped: configuration is not symmetric; " + detail)
    return CheckResult("no_crossing", total == 0, float(total), 0.0, detail)


def _cml(cfg):
    params = cfg.slits.channels()[0]
    params = type(params)(params.constants, params.sigma0, 0.0, 0.0)
    series = cml.run_dispersion(cfg.lattice, params, cfg.lattice_t_end)
    exact = series.analytic_variance(params)
    rel = float(abs(series.variance[-1] - exact[-1]) / exact[-1])
    tol = 0.01
    mass = float(np.max(np.abs(series.mass - 1.0)))
    half = series.t >= 0.5 * series.t[-1]
    r2 = 1.0
    if half.sum() >= 3 and cfg.lattice_t_end > 0:
        t2 = series.t[half] ** 2
        y = series.variance[half]
        coef = np.polyfit(t2, y, 1)
        resid = y - np.polyval(coef, t2)
        ss = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    ok = rel <= tol and r2 >= 0.999
    if cfg.lattice.boundary == "reflecting":
        ok = ok and mass <= 1e-12
    detail = f"final variance relative error; R^2 vs t^2 = {r2!r}; mass drift = {mass!r}"
    return CheckResult("cml_variance_law", ok, rel, tol, detail)


CHECKS = {
    "oracle_equivalence": _oracle,
    "dispersion_identity": _dispersion,
    "normalization": _normalization,
    "osmotic_mean_zero": _osmotic,
    "modular_invariance": _modular,
    "no_crossing": _no_crossing,
    "cml_variance_law": _cml,
}


def run_checks(config: ExperimentConfig, names=None) -> list[CheckResult]:
    return [CHECKS[n](config) for n in (names or CHECKS)]
