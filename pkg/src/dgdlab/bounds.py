"""Stepsize bounds and the trajectory radius constant.

All bound formulas take plain scalars so each can be checked against known
values in isolation; `build_report` assembles the full comparison table
from an ensemble, a mixing matrix, and a certified threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .costs import QuadraticEnsemble
from .errors import RadiusUndefinedError
from .lifted import LiftedObjective, ThresholdResult
from .topology import MixingMatrix


def classical_gd_bound(mu: float, smooth: float) -> float:
    """Single-agent gradient-descent stability bound 2 / (mu + L)."""
    if not (0 < mu <= smooth):
        raise ValueError("requires 0 < mu <= L")
    return 2.0 / (mu + smooth)


def lambda_min_bound(lambda_min: float, smooth: float) -> float:
    """Stepsize bound (1 + lambda_min(W)) / L tied to the mixing spectrum floor."""
    if smooth <= 0:
        raise ValueError("smoothness constant must be positive")
    if not (-1.0 < lambda_min <= 1.0):
        raise ValueError("lambda_min must lie in (-1, 1]")
    return (1.0 + lambda_min) / smooth


def harmonic_rate(mu: float, smooth: float) -> float:
    """eta = mu * L / (mu + L)."""
    if not (0 < mu <= smooth):
        raise ValueError("requires 0 < mu <= L")
    return mu * smooth / (mu + smooth)


def spectral_gap_bound(mu: float, smooth: float, beta: float) -> float:
    """Stepsize bound eta * (1 - beta) / (L * (eta + L)) from the spectral gap."""
    if not (0 < mu <= smooth):
        raise ValueError("requires 0 < mu <= L")
    if not (0 < beta < 1):
        raise ValueError("beta must lie in (0, 1)")
    eta = harmonic_rate(mu, smooth)
    return eta * (1.0 - beta) / (smooth * (eta + smooth))


def combined_bound(lambda_min_b: float, certified_threshold: float) -> float:
    """min of the spectrum-floor bound and the certified threshold alpha_A."""
    return min(lambda_min_b, certified_threshold)


def ordering_check(mu: float, smooth: float, beta: float, lambda_min: float):
    """Compare the spectral-gap and spectrum-floor bounds on one parameter point.

    Returns (gap_bound, floor_bound, holds). The strict ordering
    gap_bound < floor_bound is provable for lambda_min >= -(1 + beta)/2 but
    can fail for very negative lambda_min; callers record counterexamples
    instead of asserting blindly.
    """
    gap = spectral_gap_bound(mu, smooth, beta)
    floor = lambda_min_bound(lambda_min, smooth)
    return gap, floor, gap < floor


def trajectory_radius(
    ensemble: QuadraticEnsemble,
    mixing: MixingMatrix,
    x0: np.ndarray,
    alpha0: float,
    mu: float | None = None,
) -> float:
    """Uniform trajectory radius R for an initial stepsize below the gap bound.

    R = max( ||xbar(0) - x*||,
             (L/eta) * ||x(0) - 1 kron xbar(0)||,
             sqrt(m) * D * alpha0 / (eta*(1-beta)/L - (eta+L)*alpha0) ).

    `mu` defaults to the aggregate strong-convexity constant; pass another
    value to move the eta source. Raises RadiusUndefinedError when alpha0
    is at or above the spectral-gap bound (third denominator nonpositive).
    """
    x0 = np.asarray(x0, dtype=float)
    m, n = ensemble.m, ensemble.n
    if x0.shape != (m * n,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({m * n},)")
    if alpha0 <= 0:
        raise ValueError("alpha0 must be positive")
    smooth = ensemble.smoothness_constant()
    if mu is None:
        mu = ensemble.aggregate_mu()
    eta = harmonic_rate(mu, smooth)
    beta = mixing.spectral.beta
    denom = eta * (1.0 - beta) / smooth - (eta + smooth) * alpha0
    if denom <= 0:
        raise RadiusUndefinedError(
            f"radius undefined at alpha0={alpha0:g}: stepsize is not below the spectral-gap bound"
        )
    x_star = ensemble.aggregate_minimizer()
    blocks = x0.reshape(m, n)
    xbar = blocks.mean(axis=0)
    term_center = float(np.linalg.norm(xbar - x_star))
    term_spread = (smooth / eta) * float(np.linalg.norm(blocks - xbar))
    term_drive = math.sqrt(m) * ensemble.grad_bound_D() * alpha0 / denom
    return max(term_center, term_spread, term_drive)


@dataclass(frozen=True)
class BoundReport:
    """All stepsize bounds for one problem instance, ready to serialize."""

    alpha_gd: float
    alpha_L: float
    alpha_S: float | None
    alpha_A: float
    alpha_main: float
    eta: float
    radius_R: float | None
    threshold_method: str
    threshold_resolution: float

    def to_dict(self) -> dict:
        def _num(v):
            if v is None:
                return None
            if math.isinf(v):
                return "inf"
            if math.isnan(v):
                return "nan"
            return v

        return {
            "alpha_gd": _num(self.alpha_gd),
            "alpha_L": _num(self.alpha_L),
            "alpha_S": _num(self.alpha_S),
            "alpha_A": _num(self.alpha_A),
            "alpha_main": _num(self.alpha_main),
            "eta": _num(self.eta),
            "radius_R": _num(self.radius_R),
            "alpha_A_provenance": {
                "method": self.threshold_method,
                "resolution": self.threshold_resolution,
            },
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def build_report(
    ensemble: QuadraticEnsemble,
    mixing: MixingMatrix,
    threshold: ThresholdResult | None = None,
    x0: np.ndarray | None = None,
    alpha0: float | None = None,
) -> BoundReport:
    """Assemble the bound comparison table for one (ensemble, mixing) pair.

    The certified threshold is computed by bisection when not supplied. The
    radius uses x0 = 0 and alpha0 = half the spectral-gap bound unless given;
    it is omitted (None) when the gap bound itself is unavailable.
    """
    smooth = ensemble.smoothness_constant()
    mu = ensemble.aggregate_mu()
    summary = mixing.spectral

    if threshold is None:
        threshold = LiftedObjective(ensemble, mixing).strong_convexity_threshold()

    alpha_gd = classical_gd_bound(mu, smooth) if 0 < mu <= smooth else math.nan
    alpha_l = lambda_min_bound(summary.lambda_min, smooth)
    eta = harmonic_rate(mu, smooth) if 0 < mu <= smooth else math.nan
    if 0 < mu <= smooth and 0 < summary.beta < 1:
        alpha_s = spectral_gap_bound(mu, smooth, summary.beta)
    else:
        alpha_s = None

    radius = None
    if alpha_s is not None:
        if alpha0 is None:
            alpha0 = 0.5 * alpha_s
        if x0 is None:
            x0 = np.zeros(ensemble.m * ensemble.n)
        try:
            radius = trajectory_radius(ensemble, mixing, x0, alpha0)
        except RadiusUndefinedError:
            radius = None

    return BoundReport(
        alpha_gd=alpha_gd,
        alpha_L=alpha_l,
        alpha_S=alpha_s,
        alpha_A=threshold.alpha,
        alpha_main=combined_bound(alpha_l, threshold.alpha),
        eta=eta,
        radius_R=radius,
        threshold_method=threshold.method,
        threshold_resolution=threshold.resolution,
    )
