"""The lifted objective on R^(n*m) and its strong-convexity machinery.

Stacking the agent states x = (x_1, ..., x_m) turns one synchronous DGD
step with stepsize alpha into one plain gradient-descent step on

    G_alpha(x) = alpha * F(x) + 0.5 * x^T ((I - W) kron I_n) x,

where F(x) = (1/m) sum_k f_k(x_k). For quadratic costs G_alpha is a
quadratic form, so strong convexity is exactly the positivity of the
smallest Hessian eigenvalue, and the set of certified stepsizes is an
interval (0, alpha_A]: scaling alpha down mixes in more of the convex
consensus term, never less.

The threshold alpha_A is located either by the ascending-grid scan
(alpha = k/N for growing k, return the last certified point) or by
bisection on the certified interval's right edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .costs import QuadraticEnsemble
from .errors import NotInClassError, NotStronglyConvexError
from .numerics import min_eigenvalue, solve_spd
from .topology import MixingMatrix

SC_TOLERANCE = 1e-10
DEFAULT_SCAN_CAP = 1e3
DEFAULT_GRID_N = 10_000
DEFAULT_RESOLUTION = 1e-6
_SEED_LADDER = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12)


@dataclass(frozen=True)
class ConvexityCertificate:
    """Exact (global, for quadratics) strong-convexity verdict at one alpha.

    is_strongly_convex holds iff the smallest Hessian eigenvalue clears the
    +1e-10 tolerance; values within the tolerance band around zero are
    flagged as boundary and treated as not certified.
    """

    alpha: float
    min_hessian_eig: float
    is_strongly_convex: bool
    modulus: float
    is_boundary: bool = False


@dataclass(frozen=True)
class ThresholdResult:
    """Right edge of the certified stepsize interval (0, alpha_A].

    alpha is math.inf when every stepsize up to the scan cap certifies
    (capped=True); bracket gives the final certified/uncertified pair for
    the bisection method.
    """

    alpha: float
    method: str
    resolution: float
    bracket: tuple[float, float] | None = None
    capped: bool = False


class LiftedObjective:
    """G_alpha assembled from an ensemble and a mixing matrix."""

    def __init__(self, ensemble: QuadraticEnsemble, mixing: MixingMatrix):
        if ensemble.m != mixing.m:
            raise ValueError(
                f"ensemble has {ensemble.m} agents but mixing matrix has {mixing.m}"
            )
        self.ensemble = ensemble
        self.mixing = mixing

    @property
    def dim(self) -> int:
        return self.ensemble.m * self.ensemble.n

    @cached_property
    def consensus_matrix(self) -> np.ndarray:
        """(I - W) kron I_n, the stepsize-independent Hessian part."""
        m, n = self.ensemble.m, self.ensemble.n
        return np.kron(np.eye(m) - self.mixing.w, np.eye(n))

    @cached_property
    def block_curvature(self) -> np.ndarray:
        """blockdiag(A_1, ..., A_m) as a dense (nm, nm) array."""
        m, n = self.ensemble.m, self.ensemble.n
        out = np.zeros((m * n, m * n))
        for k, cost in enumerate(self.ensemble.costs):
            out[k * n : (k + 1) * n, k * n : (k + 1) * n] = cost.a
        return out

    @cached_property
    def stacked_linear(self) -> np.ndarray:
        """(b_1, ..., b_m) stacked to length nm."""
        return self.ensemble.linear_terms.reshape(-1)

    def _split(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"state has shape {x.shape}, expected ({self.dim},)")
        return x.reshape(self.ensemble.m, self.ensemble.n)

    def separable_value(self, x: np.ndarray) -> float:
        """F(x) = (1/m) sum_k f_k(x_k)."""
        blocks = self._split(x)
        return sum(c.value(blocks[k]) for k, c in enumerate(self.ensemble.costs)) / self.ensemble.m

    def separable_gradient(self, x: np.ndarray) -> np.ndarray:
        """grad F(x) = (1/m) (grad f_1(x_1), ..., grad f_m(x_m)) stacked."""
        blocks = self._split(x)
        grads = np.stack([c.gradient(blocks[k]) for k, c in enumerate(self.ensemble.costs)])
        return grads.reshape(-1) / self.ensemble.m

    def value(self, x: np.ndarray, alpha: float) -> float:
        x = np.asarray(x, dtype=float)
        return alpha * self.separable_value(x) + 0.5 * float(x @ self.consensus_matrix @ x)

    def gradient(self, x: np.ndarray, alpha: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return alpha * self.separable_gradient(x) + self.consensus_matrix @ x

    def hessian(self, alpha: float) -> np.ndarray:
        """(alpha/m) blockdiag(A_k) + (I - W) kron I_n."""
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        return (alpha / self.ensemble.m) * self.block_curvature + self.consensus_matrix

    def certify(self, alpha: float) -> ConvexityCertificate:
        """Strong-convexity certificate from the smallest Hessian eigenvalue."""
        lam = min_eigenvalue(self.hessian(alpha))
        boundary = abs(lam) <= SC_TOLERANCE
        certified = lam > SC_TOLERANCE
        return ConvexityCertificate(
            alpha=alpha,
            min_hessian_eig=lam,
            is_strongly_convex=certified,
            modulus=lam if lam > 0 else 0.0,
            is_boundary=boundary,
        )

    def _certified(self, alpha: float) -> bool:
        return self.certify(alpha).is_strongly_convex

    def strong_convexity_threshold(
        self,
        method: str = "bisection",
        resolution: float = DEFAULT_RESOLUTION,
        grid_n: int = DEFAULT_GRID_N,
        scan_cap: float = DEFAULT_SCAN_CAP,
    ) -> ThresholdResult:
        """Find alpha_A, the largest certified stepsize.

        method "grid" scans alpha = k/N ascending and returns the last
        certified point before the first failure; method "bisection" brackets
        the certified interval's right edge to within `resolution`. Either
        way, if certification still holds at `scan_cap` the result is the
        +inf sentinel with capped=True. Raises NotInClassError when no
        stepsize certifies at all.
        """
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        if method == "grid":
            return self._threshold_grid(grid_n, scan_cap)
        if method == "bisection":
            return self._threshold_bisection(resolution, scan_cap)
        raise ValueError(f"unknown threshold method {method!r}")

    def _threshold_grid(self, grid_n: int, scan_cap: float) -> ThresholdResult:
        if grid_n < 1:
            raise ValueError("grid_n must be at least 1")
        step = 1.0 / grid_n
        if not self._certified(step):
            raise NotInClassError(
                f"lifted objective is not strongly convex at the first grid point {step:g}"
            )
        k = 1
        while True:
            alpha_next = (k + 1) * step
            if alpha_next > scan_cap:
                return ThresholdResult(
                    alpha=math.inf, method="grid", resolution=step, capped=True
                )
            if not self._certified(alpha_next):
                return ThresholdResult(alpha=k * step, method="grid", resolution=step)
            k += 1

    def _threshold_bisection(self, resolution: float, scan_cap: float) -> ThresholdResult:
        lo = None
        for probe in _SEED_LADDER:
            if probe <= scan_cap and self._certified(probe):
                lo = probe
                break
        if lo is None:
            raise NotInClassError(
                f"no strongly convex stepsize found down to {_SEED_LADDER[-1]:g}"
            )
        hi = None
        width = lo
        while hi is None:
            candidate = min(lo + 2.0 * width, scan_cap)
            if self._certified(candidate):
                if candidate >= scan_cap:
                    return ThresholdResult(
                        alpha=math.inf, method="bisection", resolution=resolution, capped=True
                    )
                lo = candidate
                width = 2.0 * width
            else:
                hi = candidate
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if self._certified(mid):
                lo = mid
            else:
                hi = mid
        return ThresholdResult(
            alpha=lo, method="bisection", resolution=resolution, bracket=(lo, hi)
        )

    def minimizer(self, alpha: float) -> np.ndarray:
        """Unique minimizer of G_alpha; requires a strong-convexity certificate."""
        cert = self.certify(alpha)
        if not cert.is_strongly_convex:
            raise NotStronglyConvexError(
                f"G is not strongly convex at alpha={alpha:g} "
                f"(min Hessian eigenvalue {cert.min_hessian_eig:g})"
            )
        rhs = -(alpha / self.ensemble.m) * self.stacked_linear
        return solve_spd(self.hessian(alpha), rhs)

    def segment_gradient_bound(
        self, x_a: np.ndarray, x_b: np.ndarray, samples: int = 17
    ) -> float:
        """Max of ||grad F|| over evenly sampled points of the segment [x_a, x_b]."""
        x_a = np.asarray(x_a, dtype=float)
        x_b = np.asarray(x_b, dtype=float)
        best = 0.0
        for s in np.linspace(0.0, 1.0, samples):
            point = x_a + s * (x_b - x_a)
            best = max(best, float(np.linalg.norm(self.separable_gradient(point))))
        return best


@dataclass(frozen=True, eq=False)
class CurvePoint:
    alpha: float
    minimizer: np.ndarray
    norm: float


@dataclass(frozen=True)
class CurveSegment:
    """Adjacent pair on the minimizer curve with its empirical Lipschitz data."""

    alpha_lo: float
    alpha_hi: float
    distance: float
    lipschitz_ratio: float
    gradient_bound: float  # max ||grad F|| sampled on the connecting segment


@dataclass(frozen=True, eq=False)
class MinimizerCurve:
    points: list[CurvePoint]
    segments: list[CurveSegment]


def minimizer_curve(
    objective: LiftedObjective, alphas: list[float], samples: int = 17
) -> MinimizerCurve:
    """Minimizers of G_alpha along an alpha grid plus adjacent-pair Lipschitz ratios.

    Every alpha must be certified; the offending value is named otherwise.
    """
    alphas = sorted(float(a) for a in alphas)
    points = []
    for alpha in alphas:
        cert = objective.certify(alpha)
        if not cert.is_strongly_convex:
            raise NotStronglyConvexError(f"alpha={alpha:g} is not certified strongly convex")
        x = objective.minimizer(alpha)
        points.append(CurvePoint(alpha=alpha, minimizer=x, norm=float(np.linalg.norm(x))))
    segments = []
    for lo, hi in zip(points, points[1:]):
        gap = hi.alpha - lo.alpha
        dist = float(np.linalg.norm(hi.minimizer - lo.minimizer))
        segments.append(
            CurveSegment(
                alpha_lo=lo.alpha,
                alpha_hi=hi.alpha,
                distance=dist,
                lipschitz_ratio=dist / gap if gap > 0 else 0.0,
                gradient_bound=objective.segment_gradient_bound(
                    lo.minimizer, hi.minimizer, samples=samples
                ),
            )
        )
    return MinimizerCurve(points=points, segments=segments)
