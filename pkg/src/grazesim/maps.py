"""Square-root return map of near-grazing dynamics and its noisy variants.

The deterministic map acts on the plane: for x <= 0 it is linear, for
x >= 0 a square-root term is subtracted, which is what makes grazing
bifurcations non-smooth.  Three stochastic variants inject randomness that
acts only through impact events:

* ``n1_step``: the switching decision itself is perturbed by a noise value
  (a randomly trembling boundary), so crossings can happen for x < 0 too;
* ``n2_step``: the square-root coefficient is rescaled by a per-cycle noise
  value through the support stiffness;
* ``n3_step``: the white-noise limit: each impact consumes one draw (r, h)
  of the first-return pair of an integrated-noise excursion, which modifies
  both the square-root coefficient and the linear part.

With their noise inputs at the deterministic values (0, 0, and (2, 1)
respectively) all three variants reproduce ``det_step`` exactly, branch
logic included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    DegenerateParametersError,
    InvalidNoiseDrawError,
    InvalidSampleError,
    NumericOverflowError,
)

__all__ = [
    "MapState",
    "NordmarkParams",
    "StochasticMapCoeffs",
    "FixedPoint",
    "det_step",
    "fixed_point",
    "n1_step",
    "n2_step",
    "n3_step",
    "rho_for_state",
]


class MapState(NamedTuple):
    x: float
    y: float


class FixedPoint(NamedTuple):
    x: float
    y: float
    admissible: bool


@dataclass(frozen=True)
class NordmarkParams:
    """Parameters of the square-root map: trace, determinant, root sign, offset."""

    tau: float
    delta: float
    chi: int
    mu: float

    def __post_init__(self):
        if self.chi not in (-1, 1):
            raise ValueError(f"chi must be -1 or +1, got {self.chi!r}")
        for name in ("tau", "delta", "mu"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.delta <= 0:
            raise ValueError("delta must be positive (orientation-preserving contraction)")


@dataclass(frozen=True)
class StochasticMapCoeffs:
    """Coefficients the stochastic variants need beyond (tau, delta, chi, mu).

    a11 and a12 are entries of the return-time monodromy matrix of the
    underlying oscillator, c is its square-root coefficient, and the Greek
    pairs are the local linearization coefficients on either side of the
    switching manifold (L: free flight, R: in contact with the support).
    """

    a11: float
    a12: float
    c: float
    alphaL: float
    betaL: float
    gammaL: float
    betaR: float
    gammaR: float

    def __post_init__(self):
        if self.a12 == 0.0:
            raise DegenerateParametersError("a12 = 0: normal-form scaling undefined")
        if self.c == 0.0:
            raise DegenerateParametersError("square-root coefficient c = 0: grazing is degenerate")
        for name in ("alphaL", "betaL", "betaR"):
            if getattr(self, name) <= 0.0:
                raise DegenerateParametersError(f"{name} must be positive")
        if self.gammaL / self.betaL - self.gammaR / self.betaR == 0.0:
            raise DegenerateParametersError(
                "gammaL/betaL - gammaR/betaR = 0: slope gap across the switch vanishes"
            )

    @property
    def kappa1(self) -> float:
        """Scale factor carrying raw noise into the normal-form x coordinate."""
        return 1.0 / (self.a12 * self.a12 * self.c * self.c)

    @property
    def slope_gap(self) -> float:
        return self.gammaL / self.betaL - self.gammaR / self.betaR


def _check_finite(x: float, y: float, sx: float, sy: float) -> None:
    if not (math.isfinite(x) and math.isfinite(y)):
        raise NumericOverflowError(f"map iterate diverged from state ({sx!r}, {sy!r})")


def det_step(s: MapState, p: NordmarkParams) -> MapState:
    """One iterate of the deterministic square-root map."""
    x, y = s
    if x <= 0.0:
        xn = p.tau * x + y
        yn = -p.delta * x + p.mu
    else:
        sx = math.sqrt(x if x > 0.0 else 0.0)
        xn = p.tau * x + (y - p.chi * sx)
        yn = -p.delta * x + p.mu
    _check_finite(xn, yn, x, y)
    return MapState(xn, yn)


def fixed_point(p: NordmarkParams) -> FixedPoint:
    """Fixed point of the linear branch; admissible when it lies in x < 0."""
    den = p.delta - p.tau + 1.0
    if den == 0.0:
        raise DegenerateParametersError("delta - tau + 1 = 0: linear branch has no isolated fixed point")
    x = p.mu / den
    y = (1.0 - p.tau) * p.mu / den
    return FixedPoint(x, y, x < 0.0)


def n1_step(s: MapState, xi: float, p: NordmarkParams, q: StochasticMapCoeffs) -> MapState:
    """Variant with a noisy switching decision.

    The branch is selected by the sign of x + kappa1*xi rather than x, and
    the same shifted quantity sits under the square root, so impacts can be
    triggered (or suppressed) by the noise alone.
    """
    x, y = s
    shifted = x + q.kappa1 * xi
    if shifted <= 0.0:
        xn = p.tau * x + y
        yn = -p.delta * x + p.mu
    else:
        sx = math.sqrt(shifted if shifted > 0.0 else 0.0)
        xn = p.tau * x + (y - p.chi * sx)
        yn = -p.delta * x + p.mu
    _check_finite(xn, yn, x, y)
    return MapState(xn, yn)


def n2_step(s: MapState, xi: float, p: NordmarkParams, q: StochasticMapCoeffs) -> MapState:
    """Variant with a noisy square-root coefficient.

    The per-cycle noise value perturbs the support's deceleration rate, which
    rescales the square-root coefficient by
    (gammaL/betaL - gammaR/(betaR - xi)) / (gammaL/betaL - gammaR/betaR).
    The draw must satisfy xi < betaR; at xi = 0 the factor is exactly 1.
    """
    x, y = s
    if xi >= q.betaR:
        raise InvalidNoiseDrawError(
            f"noise draw xi = {xi!r} >= betaR = {q.betaR!r}: contact deceleration lost"
        )
    if x <= 0.0:
        xn = p.tau * x + y
        yn = -p.delta * x + p.mu
    else:
        kappa2 = (q.gammaL / q.betaL - q.gammaR / (q.betaR - xi)) / q.slope_gap
        sx = math.sqrt(x if x > 0.0 else 0.0)
        xn = p.tau * x + (y - p.chi * (kappa2 * sx))
        yn = -p.delta * x + p.mu
    _check_finite(xn, yn, x, y)
    return MapState(xn, yn)


def n3_step(s: MapState, r: float, h: float, p: NordmarkParams, q: StochasticMapCoeffs) -> MapState:
    """White-noise-limit variant driven by first-return samples.

    Each impact consumes one draw (r, h) of the scaled return time and return
    slope of a noisy excursion.  r rescales the square-root coefficient, h
    additionally distorts the linear part through a11 and delta.  At the
    deterministic values (r, h) = (2, 1) this is exactly ``det_step``.
    """
    x, y = s
    if not (r > 0.0 and h > 0.0):
        raise InvalidSampleError(f"first-return sample (r, h) = ({r!r}, {h!r}) outside r, h > 0")
    if x <= 0.0:
        xn = p.tau * x + y
        yn = -p.delta * x + p.mu
    else:
        kappa3 = (q.gammaL * (h + 1.0) / (2.0 * q.betaL) - q.gammaR * r / (2.0 * q.betaR)) / q.slope_gap
        h2 = h * h
        sx = math.sqrt(x if x > 0.0 else 0.0)
        xn = (p.tau + q.a11 * (h2 - 1.0)) * x + (y - p.chi * (kappa3 * sx))
        yn = -(p.delta * h2) * x + p.mu
    _check_finite(xn, yn, x, y)
    return MapState(xn, yn)


def rho_for_state(x: float, eps: float, q: StochasticMapCoeffs) -> float:
    """Effective noise strength of the first-return pair at map state x > 0.

    Grows like 1/sqrt(x): shallower impacts feel relatively more noise.
    """
    if x <= 0.0:
        raise ValueError(f"rho_for_state requires x > 0, got {x!r}")
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    return (
        eps
        * eps
        * math.sqrt(q.alphaL)
        / (q.betaR * math.sqrt(2.0 * q.betaL) * abs(q.a12 * q.c) * math.sqrt(x))
    )
