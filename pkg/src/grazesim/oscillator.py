"""Harmonically forced linear oscillator with a compliant one-sided support.

For u < 0 the mass oscillates freely (stiffness k_osc, damping b_osc,
forcing F cos t); for u > 0 an extra prestressed spring-damper (k_supp,
b_supp, preload k_supp*d) decelerates it.  Grazing happens when the
non-impacting steady state just touches u = 0, which fixes the forcing
amplitude F_graz and phase t_graz.

This module derives everything the return maps need from the oscillator:
the local linearization coefficients on both sides of u = 0, the
square-root coefficient c, the period-map linearization (A, b) via a
closed-form 2x2 matrix exponential, the (tau, delta, chi) map parameters,
and the affine change of variables between oscillator coordinates
(u, w, eta) and map coordinates (x, y, mu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateParametersError
from .maps import NordmarkParams, StochasticMapCoeffs

__all__ = [
    "TWO_PI",
    "OscillatorParams",
    "LocalCoeffs",
    "GlobalLinearization",
    "NormalFormTransform",
    "grazing_forcing",
    "grazing_phase",
    "steady_state",
    "steady_state_velocity",
    "local_coeffs",
    "sqrt_coefficient",
    "expm2",
    "global_linearization",
    "normal_form_params",
    "stochastic_map_coeffs",
    "to_normal_form",
    "check_regular_grazing",
    "regular_grazing_sign_check",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OscillatorParams:
    """Free-side stiffness/damping, support stiffness/damping, preload gap, forcing.

    F defaults to the grazing amplitude, so a bare parameter set sits exactly
    at the grazing orbit; pass F (or build it from a map offset mu) to move
    off grazing.
    """

    k_osc: float
    b_osc: float
    k_supp: float
    b_supp: float = 0.0
    d: float = 0.1
    F: float | None = None

    def __post_init__(self):
        if self.k_osc <= 0.0:
            raise ValueError("k_osc must be positive")
        if self.b_osc <= 0.0:
            raise ValueError("b_osc must be positive (orbit must contract)")
        if self.k_supp < 0.0 or self.b_supp < 0.0:
            raise ValueError("support coefficients must be non-negative")
        if self.d <= 0.0:
            raise ValueError("preload gap d must be positive")
        if self.F is None:
            object.__setattr__(self, "F", grazing_forcing(self))
        if self.F <= 0.0:
            raise ValueError("forcing amplitude F must be positive")


@dataclass(frozen=True)
class LocalCoeffs:
    """Leading-order flow coefficients at the grazing point, per side."""

    alphaL: float
    betaL: float
    gammaL: float
    alphaR: float
    betaR: float
    gammaR: float

    def __post_init__(self):
        for name in ("alphaL", "betaL", "alphaR", "betaR"):
            if getattr(self, name) <= 0.0:
                raise DegenerateParametersError(
                    f"{name} must be positive for a regular grazing point"
                )


@dataclass(frozen=True)
class GlobalLinearization:
    """Period map of the free flow linearized about the grazing orbit."""

    A: np.ndarray
    b: np.ndarray

    @property
    def tau(self) -> float:
        return float(self.A[0, 0] + self.A[1, 1])

    @property
    def delta(self) -> float:
        return float(self.A[0, 0] * self.A[1, 1] - self.A[0, 1] * self.A[1, 0])


def grazing_forcing(p: OscillatorParams) -> float:
    """Forcing amplitude at which the free steady state grazes u = 0."""
    km1 = p.k_osc - 1.0
    return math.sqrt(km1 * km1 + p.b_osc * p.b_osc)


def grazing_phase(p: OscillatorParams) -> float:
    """Forcing phase in (0, pi) at which the grazing contact happens."""
    return math.atan2(p.b_osc, p.k_osc - 1.0)


def steady_state(p: OscillatorParams, t):
    """Non-impacting steady-state displacement u_ss(t) (valid while < 0)."""
    km1 = p.k_osc - 1.0
    den = km1 * km1 + p.b_osc * p.b_osc
    return -1.0 + (km1 * np.cos(t) + p.b_osc * np.sin(t)) * p.F / den


def steady_state_velocity(p: OscillatorParams, t):
    km1 = p.k_osc - 1.0
    den = km1 * km1 + p.b_osc * p.b_osc
    return (-km1 * np.sin(t) + p.b_osc * np.cos(t)) * p.F / den


def local_coeffs(p: OscillatorParams) -> LocalCoeffs:
    """Per-side flow coefficients at the grazing point.

    Scaled time makes alpha = gamma = 1 on both sides; beta is the contact
    deceleration: 1 on the free side, 1 + k_supp*d with the support engaged.
    """
    return LocalCoeffs(
        alphaL=1.0,
        betaL=1.0,
        gammaL=1.0,
        alphaR=1.0,
        betaR=1.0 + p.k_supp * p.d,
        gammaR=1.0,
    )


def sqrt_coefficient(lc: LocalCoeffs) -> float:
    """Square-root coefficient c of the induced return map."""
    c = (
        2.0
        * math.sqrt(2.0 * lc.betaL)
        / math.sqrt(lc.alphaL)
        * (lc.gammaL / lc.betaL - lc.gammaR / lc.betaR)
    )
    if c == 0.0:
        raise DegenerateParametersError(
            "square-root coefficient c = 0 (support indistinguishable from free flight)"
        )
    return c


# ---------------------------------------------------------------------------
# 2x2 matrix exponential


def _expm2_closed(M: np.ndarray) -> np.ndarray:
    m11, m12 = M[0]
    m21, m22 = M[1]
    a = 0.5 * (m11 + m22)
    disc = a * a - (m11 * m22 - m12 * m21)
    # cosh(sqrt(disc)) and sinh(sqrt(disc))/sqrt(disc), with a series branch
    # through the defective (repeated-eigenvalue) region
    if disc > 2.5e-10:
        s = math.sqrt(disc)
        f = math.cosh(s)
        g = math.sinh(s) / s
    elif disc < -2.5e-10:
        s = math.sqrt(-disc)
        f = math.cos(s)
        g = math.sin(s) / s
    else:
        f = 1.0 + disc / 2.0 + disc * disc / 24.0
        g = 1.0 + disc / 6.0 + disc * disc / 120.0
    ea = math.exp(a)
    B = M - a * np.eye(2)
    return ea * (f * np.eye(2) + g * B)


def _expm2_series(M: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor fallback, used as a cross-check."""
    norm = float(np.abs(M).sum(axis=1).max())
    j = max(0, int(math.ceil(math.log2(norm / 0.25))) if norm > 0.25 else 0)
    S = M / (2.0**j)
    E = np.eye(2)
    term = np.eye(2)
    for k in range(1, 24):
        term = term @ S / k
        E = E + term
        if float(np.abs(term).max()) < 1e-20:
            break
    for _ in range(j):
        E = E @ E
    return E


def expm2(M: np.ndarray) -> np.ndarray:
    """exp(M) for a real 2x2 matrix, closed form cross-checked by series."""
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise ValueError("expm2 expects a 2x2 matrix")
    E = _expm2_closed(M)
    E_chk = _expm2_series(M)
    scale = max(1.0, float(np.abs(E).max()))
    if float(np.abs(E - E_chk).max()) > 1e-12 * scale:
        raise ArithmeticError("closed-form matrix exponential failed its series cross-check")
    return E


def global_linearization(p: OscillatorParams) -> GlobalLinearization:
    """Monodromy matrix A over one forcing period and forcing-offset column b."""
    M = TWO_PI * np.array([[0.0, 1.0], [-p.k_osc, -p.b_osc]])
    A = expm2(M)
    Fg = grazing_forcing(p)
    b = np.array([(1.0 - A[0, 0]) / Fg, -A[1, 0] / Fg])
    return GlobalLinearization(A, b)


def normal_form_params(p: OscillatorParams, mu: float = 0.0) -> NordmarkParams:
    """(tau, delta, chi) of the induced square-root map, with offset mu."""
    lin = global_linearization(p)
    c = sqrt_coefficient(local_coeffs(p))
    a12 = float(lin.A[0, 1])
    if a12 == 0.0:
        raise DegenerateParametersError("A[0,1] = 0: normal-form scaling undefined")
    chi = 1 if a12 * c > 0.0 else -1
    return NordmarkParams(tau=lin.tau, delta=lin.delta, chi=chi, mu=mu)


def stochastic_map_coeffs(p: OscillatorParams) -> StochasticMapCoeffs:
    """Coefficient bundle consumed by the stochastic map variants."""
    lin = global_linearization(p)
    lc = local_coeffs(p)
    return StochasticMapCoeffs(
        a11=float(lin.A[0, 0]),
        a12=float(lin.A[0, 1]),
        c=sqrt_coefficient(lc),
        alphaL=lc.alphaL,
        betaL=lc.betaL,
        gammaL=lc.gammaL,
        betaR=lc.betaR,
        gammaR=lc.gammaR,
    )


@dataclass(frozen=True)
class NormalFormTransform:
    """Affine map between oscillator coordinates (u, w, eta) and map (x, y, mu).

    u is displacement on the v = 0 section, w the forcing phase relative to
    grazing, eta = F - F_graz the forcing offset.
    """

    a11: float
    a12: float
    a21: float
    a22: float
    b1: float
    b2: float
    c: float
    scale: float = field(init=False)
    m33: float = field(init=False)

    def __post_init__(self):
        if self.a12 == 0.0 or self.c == 0.0:
            raise DegenerateParametersError("normal-form transform needs a12 != 0 and c != 0")
        object.__setattr__(self, "scale", self.a12 * self.a12 * self.c * self.c)
        object.__setattr__(self, "m33", (1.0 - self.a22) * self.b1 + self.a12 * self.b2)
        if self.m33 == 0.0:
            raise DegenerateParametersError("forcing offset does not unfold the grazing (m33 = 0)")

    @classmethod
    def from_oscillator(cls, p: OscillatorParams) -> "NormalFormTransform":
        lin = global_linearization(p)
        c = sqrt_coefficient(local_coeffs(p))
        return cls(
            a11=float(lin.A[0, 0]),
            a12=float(lin.A[0, 1]),
            a21=float(lin.A[1, 0]),
            a22=float(lin.A[1, 1]),
            b1=float(lin.b[0]),
            b2=float(lin.b[1]),
            c=c,
        )

    def forward(self, u, w, eta):
        """Oscillator (u, w, eta) -> map (x, y, mu)."""
        x = u / self.scale
        y = (-self.a22 * u + self.a12 * w + self.b1 * eta) / self.scale
        mu = self.m33 * eta / self.scale
        return x, y, mu

    def inverse(self, x, y, mu):
        u = self.scale * x
        eta = self.scale * mu / self.m33
        w = (self.scale * y + self.a22 * u - self.b1 * eta) / self.a12
        return u, w, eta

    def mu_from_eta(self, eta: float) -> float:
        return self.m33 * eta / self.scale

    def eta_from_mu(self, mu: float) -> float:
        return self.scale * mu / self.m33


def to_normal_form(u, w, eta, transform: NormalFormTransform):
    """Oscillator section coordinates to map coordinates (x, y, mu)."""
    return transform.forward(u, w, eta)


def regular_grazing_sign_check(fL_u, fR_u, scale: float = 1e-3, n: int = 5) -> bool:
    """True when both vector fields push u the same way near the grazing point.

    fL_u / fR_u are callables (u, v, w, eta) -> du/dt.  The check samples a
    small grid around the origin and compares signs wherever both are
    nonzero.
    """
    vals = scale * np.array([-1.0, -0.5, 0.5, 1.0][: max(2, n - 1)])
    for v in vals:
        for w in vals:
            for eta in vals:
                a = fL_u(0.0, v, w, eta)
                b = fR_u(0.0, v, w, eta)
                if a == 0.0 or b == 0.0:
                    continue
                if (a > 0.0) != (b > 0.0):
                    return False
    return True


def check_regular_grazing(p: OscillatorParams) -> bool:
    """Both branches of the oscillator move u identically at u = 0 (du/dt = v)."""

    def f_u(u, v, w, eta):
        return v

    return regular_grazing_sign_check(f_u, f_u)
