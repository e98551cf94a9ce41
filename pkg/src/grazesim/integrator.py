"""Event-located fixed-step integration of the two-branch impact oscillator.

Fixed-step RK4 advances the flow; whenever the switching function changes
sign inside a step, the crossing time is bisected down to ``event_tol``,
the step is split there, and integration resumes on the other branch.  A
step that starts and ends on the same side is additionally probed at its
interior velocity extremum, so shallow graze-in/graze-out excursions
shorter than one step are not missed.

Four noise modes:

* ``none``: deterministic flow;
* ``switching_ou``: an exact-transition OU value xi(t), frozen per base
  step, perturbs only the switching decision (u + xi crosses 0);
* ``impact_ou``: the frozen OU value is added to the acceleration while
  the support is engaged (u > 0);
* ``impact_white``: white noise: each committed u > 0 piece of length L
  adds eps*sqrt(L)*z to the velocity (Euler-Maruyama, noise confined to
  contact).

Poincare returns are taken on the section v = 0 with v decreasing, i.e. at
local maxima of u.  For an oscillation whose maximum happens in contact
the recorded return is the *virtual* free-flow maximum: the free branch is
continued forward from the contact-entry event ignoring the switch, which
is the section construction the return maps are built on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import ChatteringError, ConfigError, NumericOverflowError
from .noise import OUParams
from .oscillator import (
    TWO_PI,
    NormalFormTransform,
    OscillatorParams,
    grazing_forcing,
    grazing_phase,
    steady_state,
    steady_state_velocity,
)

__all__ = [
    "NOISE_MODES",
    "FlowState",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "poincare_returns",
    "ode_return_points",
]

NOISE_MODES = ("none", "switching_ou", "impact_ou", "impact_white")


class FlowState(NamedTuple):
    u: float
    v: float
    t: float


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    event_tol: float = 1e-12
    noise_mode: str = "none"
    ou: OUParams = OUParams(eps=0.0, nu=0.5)
    seed: int = 0
    chatter_events_per_time: float = 1e4

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.event_tol <= 0.0 or self.event_tol >= self.dt:
            raise ValueError("event_tol must satisfy 0 < event_tol < dt")
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"unknown noise mode {self.noise_mode!r}; choose from {NOISE_MODES}")
        if self.chatter_events_per_time <= 0.0:
            raise ValueError("chatter guard must be positive")


@dataclass
class Trajectory:
    """Recorded nodes: every base-step boundary plus every switching event.

    branch[k] is the branch active on the segment starting at node k
    (-1 free side, +1 contact side); xi[k] is the frozen noise value on that
    segment for the OU modes, None otherwise.  event_index marks the nodes
    created by switching events.
    """

    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    branch: np.ndarray
    xi: np.ndarray | None
    event_index: np.ndarray
    params: OscillatorParams
    config: IntegratorConfig

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("t,u,v,branch,xi\n")
            has_xi = self.xi is not None
            for k in range(len(self.t)):
                xi_txt = f"{self.xi[k]:.17g}" if has_xi else ""
                fh.write(
                    f"{self.t[k]:.17g},{self.u[k]:.17g},{self.v[k]:.17g},"
                    f"{int(self.branch[k])},{xi_txt}\n"
                )


def _rk4_piece(u, v, t, h, ko, b, spring, d, F, xi_add):
    """One RK4 step of du/dt = v, dv/dt = -ko(u+1) - b v - spring(u+d) + F cos t + xi_add."""
    half = 0.5 * h
    c0 = F * math.cos(t) + xi_add
    ch = F * math.cos(t + half) + xi_add
    c1 = F * math.cos(t + h) + xi_add
    a1 = -ko * (u + 1.0) - b * v - spring * (u + d) + c0
    u2 = u + half * v
    v2 = v + half * a1
    a2 = -ko * (u2 + 1.0) - b * v2 - spring * (u2 + d) + ch
    u3 = u + half * v2
    v3 = v + half * a2
    a3 = -ko * (u3 + 1.0) - b * v3 - spring * (u3 + d) + ch
    u4 = u + h * v3
    v4 = v + h * a3
    a4 = -ko * (u4 + 1.0) - b * v4 - spring * (u4 + d) + c1
    return (
        u + h * (v + 2.0 * v2 + 2.0 * v3 + v4) / 6.0,
        v + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0,
    )


class _Flow:
    """Stateful stepper; persists across recording windows."""

    def __init__(self, par: OscillatorParams, cfg: IntegratorConfig, s0: FlowState, rng):
        self.par = par
        self.cfg = cfg
        self.rng = rng
        self.ko = par.k_osc
        self.b_left = par.b_osc
        self.b_right = par.b_osc + par.b_supp
        self.ks = par.k_supp
        self.d = par.d
        self.F = par.F
        self.mode = cfg.noise_mode
        self.eps = cfg.ou.eps
        self.nu = cfg.ou.nu
        self.u, self.v, self.t = float(s0[0]), float(s0[1]), float(s0[2])
        self.t_start = self.t
        self.events_seen = 0
        if self.mode in ("switching_ou", "impact_ou"):
            self.xi = cfg.ou.stationary_std * rng.standard_normal()
        else:
            self.xi = 0.0
        self.branch = 1 if self._switch_val(self.u) > 0.0 else -1
        # exact OU transition factors for the base step, reused every step
        self._ou_decay = math.exp(-cfg.dt / self.nu)
        self._ou_sd = math.sqrt(
            self.eps * self.eps / (2.0 * self.nu) * (1.0 - self._ou_decay**2)
        )

    def _switch_val(self, u: float) -> float:
        if self.mode == "switching_ou":
            return u + self.xi
        return u

    def _branch_args(self, branch: int):
        if branch > 0:
            xi_add = self.xi if self.mode == "impact_ou" else 0.0
            return self.b_right, self.ks, xi_add
        return self.b_left, 0.0, 0.0

    def _drift(self, th: float, branch: int):
        b, spring, xi_add = self._branch_args(branch)
        return _rk4_piece(self.u, self.v, self.t, th, self.ko, b, spring, self.d, self.F, xi_add)

    def _bisect_switch(self, hi: float, sigma: float) -> float:
        """First time in (0, hi] where the switching function leaves region sigma."""
        lo = 0.0
        tol = self.cfg.event_tol
        xi = self.xi if self.mode == "switching_ou" else 0.0
        branch = self.branch
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            um, _ = self._drift(mid, branch)
            if sigma * (um + xi) > 0.0:
                lo = mid
            else:
                hi = mid
        return hi

    def _bisect_v_zero(self, hi: float, v_end: float) -> float:
        lo = 0.0
        tol = self.cfg.event_tol
        sign0 = 1.0 if self.v > 0.0 else -1.0
        branch = self.branch
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            _, vm = self._drift(mid, branch)
            if sign0 * vm > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _advance_piece(self, h: float, record_event) -> float:
        """Advance by at most h on the current branch; split at a switching event."""
        branch = self.branch
        right = branch > 0
        white = self.mode == "impact_white" and right and self.eps > 0.0
        z = self.rng.standard_normal() if white else 0.0
        u1, v1 = self._drift(h, branch)
        xi = self.xi if self.mode == "switching_ou" else 0.0
        sigma = 1.0 if right else -1.0
        s_end = u1 + xi

        h_cross = None
        if sigma * s_end < 0.0:
            h_cross = self._bisect_switch(h, sigma)
        elif self.v * v1 < 0.0:
            # same-side endpoints with an interior u-extremum: probe for a
            # graze-through shorter than the step
            th_ext = self._bisect_v_zero(h, v1)
            u_ext, _ = self._drift(th_ext, branch)
            if sigma * (u_ext + xi) < 0.0:
                h_cross = self._bisect_switch(th_ext, sigma)

        if h_cross is None:
            self.u = u1
            self.v = v1 + (self.eps * math.sqrt(h) * z if white else 0.0)
            self.t += h
            return h

        ue, ve = self._drift(h_cross, branch)
        if white:
            ve += self.eps * math.sqrt(h_cross) * z
        self.u = ue
        self.v = ve
        self.t += h_cross
        self.branch = -branch
        self.events_seen += 1
        elapsed = max(self.t - self.t_start, 1.0)
        if self.events_seen > self.cfg.chatter_events_per_time * elapsed:
            raise ChatteringError(
                f"more than {self.cfg.chatter_events_per_time:g} switching events per unit "
                f"time near t = {self.t:.6f}",
                state=FlowState(self.u, self.v, self.t),
            )
        record_event()
        return h_cross

    def run(self, t_end: float):
        """Step to t_end; returns node arrays (t, u, v, branch, xi, event_idx)."""
        ts = [self.t]
        us = [self.u]
        vs = [self.v]
        brs = [self.branch]
        xis = [self.xi]
        ev = []

        def record_event():
            ts.append(self.t)
            us.append(self.u)
            vs.append(self.v)
            brs.append(self.branch)
            xis.append(self.xi)
            ev.append(len(ts) - 1)

        dt = self.cfg.dt
        ou_mode = self.mode in ("switching_ou", "impact_ou")
        while self.t < t_end - 1e-12:
            h_base = min(dt, t_end - self.t)
            t_next = self.t + h_base
            while self.t < t_next - 1e-13:
                self._advance_piece(t_next - self.t, record_event)
            if not (math.isfinite(self.u) and math.isfinite(self.v)):
                raise NumericOverflowError(
                    f"flow diverged near t = {self.t:.6f}: u = {self.u!r}, v = {self.v!r}"
                )
            if ou_mode:
                if h_base == dt:
                    self.xi = self.xi * self._ou_decay + self._ou_sd * self.rng.standard_normal()
                else:
                    decay = math.exp(-h_base / self.nu)
                    sd = math.sqrt(self.eps**2 / (2.0 * self.nu) * (1.0 - decay * decay))
                    self.xi = self.xi * decay + sd * self.rng.standard_normal()
            ts.append(self.t)
            us.append(self.u)
            vs.append(self.v)
            brs.append(self.branch)
            xis.append(self.xi)
        return ts, us, vs, brs, xis, ev


def _make_trajectory(par, cfg, arrays) -> Trajectory:
    ts, us, vs, brs, xis, ev = arrays
    xi_arr = np.array(xis) if cfg.noise_mode in ("switching_ou", "impact_ou") else None
    return Trajectory(
        t=np.array(ts),
        u=np.array(us),
        v=np.array(vs),
        branch=np.array(brs, dtype=np.int8),
        xi=xi_arr,
        event_index=np.array(ev, dtype=np.int64),
        params=par,
        config=cfg,
    )


def integrate(
    par: OscillatorParams,
    cfg: IntegratorConfig,
    s0: FlowState,
    t_end: float,
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Integrate from s0 up to time t_end, recording every node."""
    if t_end < s0[2]:
        raise ValueError("t_end must not precede the initial time")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    flow = _Flow(par, cfg, FlowState(*s0), rng)
    return _make_trajectory(par, cfg, flow.run(t_end))


# ---------------------------------------------------------------------------
# Poincare section v = 0, v decreasing


def _segment_refine_v_zero(traj: Trajectory, k: int):
    """Bisect the v = 0 crossing inside segment [k, k+1] along the drift flow."""
    par = traj.params
    branch = int(traj.branch[k])
    b = par.b_osc + (par.b_supp if branch > 0 else 0.0)
    spring = par.k_supp if branch > 0 else 0.0
    xi_add = 0.0
    if branch > 0 and traj.config.noise_mode == "impact_ou" and traj.xi is not None:
        xi_add = float(traj.xi[k])
    u0 = float(traj.u[k])
    v0 = float(traj.v[k])
    t0 = float(traj.t[k])
    dt_seg = float(traj.t[k + 1] - traj.t[k])
    if dt_seg <= 0.0:
        return u0, t0

    z_rate = 0.0
    if branch > 0 and traj.config.noise_mode == "impact_white" and traj.config.ou.eps > 0.0:
        # recover the segment's committed noise so the refined path lands on
        # the recorded endpoint
        _, v_det = _rk4_piece(u0, v0, t0, dt_seg, par.k_osc, b, spring, par.d, par.F, xi_add)
        z_rate = (float(traj.v[k + 1]) - v_det) / math.sqrt(dt_seg)

    lo, hi = 0.0, dt_seg
    tol = traj.config.event_tol
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        _, vm = _rk4_piece(u0, v0, t0, mid, par.k_osc, b, spring, par.d, par.F, xi_add)
        vm += z_rate * math.sqrt(mid)
        if vm > 0.0:
            lo = mid
        else:
            hi = mid
    th = 0.5 * (lo + hi)
    um, _ = _rk4_piece(u0, v0, t0, th, par.k_osc, b, spring, par.d, par.F, xi_add)
    return um, t0 + th


def _virtual_free_maximum(traj: Trajectory, entry_node: int):
    """Continue the free branch from a contact-entry event to its v = 0 crossing."""
    par = traj.params
    u = float(traj.u[entry_node])
    v = float(traj.v[entry_node])
    t = float(traj.t[entry_node])
    h = traj.config.dt
    for _ in range(100000):
        if v <= 0.0:
            break
        un, vn = _rk4_piece(u, v, t, h, par.k_osc, par.b_osc, 0.0, par.d, par.F, 0.0)
        if vn <= 0.0:
            lo, hi = 0.0, h
            while hi - lo > traj.config.event_tol:
                mid = 0.5 * (lo + hi)
                _, vm = _rk4_piece(u, v, t, mid, par.k_osc, par.b_osc, 0.0, par.d, par.F, 0.0)
                if vm > 0.0:
                    lo = mid
                else:
                    hi = mid
            th = 0.5 * (lo + hi)
            um, _ = _rk4_piece(u, v, t, th, par.k_osc, par.b_osc, 0.0, par.d, par.F, 0.0)
            return um, t + th
        u, v, t = un, vn, t + h
    return u, t


def poincare_returns(traj: Trajectory) -> np.ndarray:
    """Section points (u, w, t) at v = 0 crossings with v decreasing.

    w is the forcing phase relative to grazing.  Crossings that happen in
    contact are replaced by the virtual free-flow maximum continued from the
    contact-entry event.
    """
    tg = grazing_phase(traj.params)
    v = traj.v
    br = traj.branch
    ev = set(int(j) for j in traj.event_index)
    out = []
    for k in range(len(v) - 1):
        if v[k] <= 0.0:
            continue
        if v[k + 1] >= 0.0:
            # count an exact zero only if the flow actually goes negative next
            if not (v[k + 1] == 0.0 and k + 2 < len(v) and v[k + 2] < 0.0):
                continue
        if br[k] < 0:
            u_star, t_star = _segment_refine_v_zero(traj, k)
        else:
            entry = None
            for j in range(k, -1, -1):
                if j in ev and br[j] > 0 and (j == 0 or br[j - 1] < 0):
                    entry = j
                    break
            if entry is None:
                u_star, t_star = _segment_refine_v_zero(traj, k)
            else:
                u_star, t_star = _virtual_free_maximum(traj, entry)
        w = math.fmod(t_star, TWO_PI) - tg
        out.append((u_star, w, t_star))
    return np.array(out).reshape(-1, 3)


def ode_return_points(
    par: OscillatorParams,
    cfg: IntegratorConfig,
    n: int,
    rng: np.random.Generator | None = None,
    transient: int = 100,
    s0: FlowState | None = None,
    window_periods: int = 20,
) -> np.ndarray:
    """n map-coordinate return points (x, y) of the oscillator flow.

    Integrates window by window, extracts section returns, discards the
    first ``transient`` of them, and pushes the rest through the
    normal-form change of variables at eta = F - F_graz.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if s0 is None:
        s0 = FlowState(float(steady_state(par, 0.0)), float(steady_state_velocity(par, 0.0)), 0.0)
    tf = NormalFormTransform.from_oscillator(par)
    eta = par.F - grazing_forcing(par)
    flow = _Flow(par, cfg, s0, rng)
    needed = transient + n
    window = window_periods * TWO_PI
    collected: list[tuple[float, float]] = []
    carry = None  # last node of the previous window, for boundary brackets
    guard = 0
    while len(collected) < needed:
        guard += 1
        if guard > 100 + 10 * needed:
            raise NumericOverflowError("return-point harvest stalled; flow may be stuck")
        arrays = flow.run(flow.t + window)
        if carry is not None:
            ts, us, vs, brs, xis, ev = arrays
            ts = [carry[0]] + ts
            us = [carry[1]] + us
            vs = [carry[2]] + vs
            brs = [carry[3]] + brs
            xis = [carry[4]] + xis
            ev = [j + 1 for j in ev]
            arrays = (ts, us, vs, brs, xis, ev)
        traj = _make_trajectory(par, cfg, arrays)
        pts = poincare_returns(traj)
        for u, w, _t in pts:
            collected.append((u, w))
        ts, us, vs, brs, xis, _ = arrays
        carry = (ts[-1], us[-1], vs[-1], brs[-1], xis[-1])
    kept = collected[transient : transient + n]
    xs = np.empty(n)
    ys = np.empty(n)
    for i, (u, w) in enumerate(kept):
        x, y, _mu = tf.forward(u, w, eta)
        xs[i] = x
        ys[i] = y
    return np.column_stack([xs, ys])
