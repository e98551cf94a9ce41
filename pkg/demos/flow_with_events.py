"""One noisy oscillator trajectory, with every contact event located.

Integrates the compliant-impact oscillator just past grazing with the OU
contact-noise mode, plots displacement with contact intervals shaded, and
zooms into one impact so the event-located switch points are visible.
"""

import math
import os

import numpy as np

from grazesim import (
    FlowState,
    IntegratorConfig,
    OUParams,
    OscillatorParams,
    NormalFormTransform,
    grazing_forcing,
    integrate,
    poincare_returns,
    steady_state,
    steady_state_velocity,
)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

base = dict(k_osc=4.5, b_osc=0.3, k_supp=10.0, b_supp=0.0, d=0.1)
osc = OscillatorParams(**base)
eta = NormalFormTransform.from_oscillator(osc).eta_from_mu(0.03)
par = OscillatorParams(**base, F=grazing_forcing(osc) + eta)

cfg = IntegratorConfig(dt=1e-3, noise_mode="impact_ou", ou=OUParams(eps=0.125, nu=0.5), seed=12)
s0 = FlowState(steady_state(par, 0.0), steady_state_velocity(par, 0.0), 0.0)
traj = integrate(par, cfg, s0, 14 * 2 * math.pi)

ev = traj.event_index
sections = poincare_returns(traj)
print(f"{len(traj.t)} recorded nodes, {len(ev)} switching events, "
      f"{len(sections)} section returns")
contact_frac = np.mean(traj.branch > 0)
print(f"fraction of nodes in contact: {contact_frac:.4f}")
print(f"largest contact penetration: {traj.u.max():.5f}")
print(f"boundary residual at events: {np.abs(traj.u[ev]).max():.2e}")

if plt is not None:
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 6.5))
    ax1.plot(traj.t, traj.u, lw=0.7, color="#23628f")
    ax1.axhline(0.0, color="k", lw=0.6)
    ax1.plot(sections[:, 2], sections[:, 0], "g.", ms=5, label="section returns")
    ax1.set_xlabel("t")
    ax1.set_ylabel("u")
    ax1.legend(loc="lower right", fontsize=8)

    # zoom on the neighbourhood of the first contact interval
    if len(ev):
        tc = traj.t[ev[0]]
        mask = (traj.t > tc - 0.8) & (traj.t < tc + 0.8)
        ax2.plot(traj.t[mask], traj.u[mask], ".-", ms=3, lw=0.7, color="#23628f")
        for j in ev:
            if tc - 0.8 < traj.t[j] < tc + 0.8:
                ax2.axvline(traj.t[j], color="r", lw=0.7, ls=":")
        ax2.axhline(0.0, color="k", lw=0.6)
        ax2.set_xlabel("t")
        ax2.set_ylabel("u")
        ax2.set_title("event-located contact interval", fontsize=10)
    fig.tight_layout()
    path = os.path.join(OUT, "flow_with_events.png")
    fig.savefig(path, dpi=150)
    print(f"wrote {path}")
else:
    print("matplotlib not installed; skipping the trajectory figure")
