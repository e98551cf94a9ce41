"""grazesim command line: reproducible data files for plotting.

Every command resolves its options in three layers (built-in defaults,
then an optional ``--config`` key=value file, then command-line flags),
resolves the seed (flag, else GRAZESIM_SEED, else 0), and writes plain
text output with 17-significant-digit reals so identical invocations give
identical bytes.  ``--dump-config`` writes the fully resolved option set;
re-running from that file reproduces the output exactly.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import (
    bifurcation_scan,
    compare_clouds,
    detect_cycle,
    epsilon_for_alpha,
    invariant_density,
    orbit_points,
    return_fractions,
)
from .errors import ConfigError, DegenerateClusteringError, GrazesimError
from .integrator import FlowState, IntegratorConfig, integrate, ode_return_points
from .maps import NordmarkParams
from .noise import OUParams, first_return_cov_gauss, sample_first_return
from .oscillator import (
    NormalFormTransform,
    OscillatorParams,
    global_linearization,
    grazing_forcing,
    grazing_phase,
    local_coeffs,
    normal_form_params,
    sqrt_coefficient,
    steady_state,
    steady_state_velocity,
    stochastic_map_coeffs,
)

__all__ = ["main"]

_MAP_MODELS = ("det", "n1", "n2", "n3")
_ODE_MODELS = ("ode-none", "ode-switching", "ode-impact-ou", "ode-impact-white")
_ODE_MODE = {
    "ode-none": "none",
    "ode-switching": "switching_ou",
    "ode-impact-ou": "impact_ou",
    "ode-impact-white": "impact_white",
}
# noise-amplitude calibration id shared by a map variant and its flow analogue
_MODEL_ID = {
    "n1": 1,
    "n2": 2,
    "n3": 3,
    "ode-switching": 1,
    "ode-impact-ou": 2,
    "ode-impact-white": 3,
}
_MODE_FOR_MAP = {"n1": "switching_ou", "n2": "impact_ou", "n3": "impact_white"}


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _count(s: str) -> int:
    """Integer option that also accepts scientific notation like 1e6."""
    v = float(s)
    n = int(v)
    if n != v:
        raise ValueError(f"expected an integer count, got {s!r}")
    return n


# ---------------------------------------------------------------------------
# Option table (one source for the parser, the config reader, and the dump)


@dataclass(frozen=True)
class _Opt:
    flag: str
    type: object = str
    default: object = None
    required: bool = False
    choices: tuple | None = None
    help: str = ""

    @property
    def dest(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")


def _common() -> list[_Opt]:
    return [
        _Opt("--config", str, None, help="key=value file of option defaults (flags win)"),
        _Opt("--dump-config", str, None, help="write the effective option set to this path"),
        _Opt("--seed", int, None, help="rng seed (default: GRAZESIM_SEED env var, else 0)"),
    ]


def _oscillator_opts() -> list[_Opt]:
    return [
        _Opt("--k-osc", float, 4.5, help="free-side stiffness"),
        _Opt("--b-osc", float, 0.3, help="free-side damping"),
        _Opt("--k-supp", float, 10.0, help="support stiffness"),
        _Opt("--b-supp", float, 0.0, help="support damping"),
        _Opt("--d", float, 0.1, help="support preload gap"),
    ]


def _offset_opts(default_mu=None) -> list[_Opt]:
    return [
        _Opt("--mu", float, default_mu, help="map-side distance from grazing"),
        _Opt("--F", float, None, help="forcing amplitude (alternative to --mu)"),
    ]


def _noise_opts() -> list[_Opt]:
    return [
        _Opt("--alpha", float, None, help="calibrated noise level (excludes --eps)"),
        _Opt("--eps", float, None, help="raw noise amplitude (excludes --alpha)"),
        _Opt("--nu", float, 0.5, help="noise correlation time"),
    ]


def _direct_opts() -> list[_Opt]:
    return [
        _Opt("--tau", float, None, help="map trace (direct parameters, det only)"),
        _Opt("--delta", float, None, help="map determinant (direct parameters, det only)"),
        _Opt("--chi", int, None, help="square-root sign, +1 or -1 (direct parameters)"),
    ]


_COMMAND_OPTS: dict[str, list[_Opt]] = {
    "osc-params": (
        _common()
        + _oscillator_opts()
        + _offset_opts(default_mu=0.0)
        + [_Opt("--out", str, None, help="also write the report to this file")]
    ),
    "bifdiag": (
        _common()
        + _oscillator_opts()
        + _direct_opts()
        + _noise_opts()
        + [
            _Opt("--model", str, "det", choices=_MAP_MODELS),
            _Opt("--mu-min", float, required=True),
            _Opt("--mu-max", float, required=True),
            _Opt("--mu-steps", _count, 201),
            _Opt("--transient", _count, 500, help="iterates discarded per mu"),
            _Opt("--keep", _count, 200, help="iterates kept per mu"),
            _Opt("--threads", int, 1, help="worker processes (output independent of this)"),
            _Opt("--chunks", int, 16, help="warm-start continuation chunks"),
            _Opt("--x0", float, None, help="continuation start x (default: fixed point)"),
            _Opt("--y0", float, None, help="continuation start y"),
            _Opt("--out", str, required=True, help="CSV output path (columns mu,x)"),
        ]
    ),
    "density": (
        _common()
        + _oscillator_opts()
        + _direct_opts()
        + _offset_opts()
        + _noise_opts()
        + [
            _Opt("--model", str, "det", choices=_MAP_MODELS),
            _Opt("--n", _count, 1_000_000, help="orbit length after transient"),
            _Opt("--grid", str, "256x256", help="resolution NX or NXxNY"),
            _Opt("--bounds", str, None, help="x_min,x_max,y_min,y_max (default: auto-fit)"),
            _Opt("--transient", _count, 1000),
            _Opt("--out", str, required=True, help="text grid output path"),
        ]
    ),
    "sigma": (
        _common()
        + _oscillator_opts()
        + _direct_opts()
        + _noise_opts()
        + [
            _Opt("--model", str, "det", choices=_MAP_MODELS),
            _Opt("--mu", float, required=True),
            _Opt("--n", _count, 10_000, help="number of measured returns"),
            _Opt("--transient", _count, 1000),
            _Opt("--out", str, required=True, help="CSV output path (columns j,sigma)"),
        ]
    ),
    "orbit": (
        _common()
        + _oscillator_opts()
        + _offset_opts(default_mu=0.0)
        + _noise_opts()
        + [
            _Opt("--model", str, "ode-none", choices=_ODE_MODELS),
            _Opt("--t-end", float, 20.0 * math.tau, help="integration length"),
            _Opt("--dt", float, 1e-3),
            _Opt("--event-tol", float, 1e-12),
            _Opt("--u0", float, None, help="initial displacement (default: steady state)"),
            _Opt("--v0", float, None, help="initial velocity"),
            _Opt("--t0", float, 0.0),
            _Opt("--out", str, required=True, help="CSV output path (t,u,v,branch,xi)"),
        ]
    ),
    "compare": (
        _common()
        + _oscillator_opts()
        + _noise_opts()
        + [
            _Opt("--model", str, required=True, choices=("n1", "n2", "n3")),
            _Opt("--mu", float, required=True),
            _Opt("--n", _count, 1000, help="points per cloud"),
            _Opt("--dt", float, 2e-3),
            _Opt("--event-tol", float, 1e-12),
            _Opt("--transient-map", _count, 1000),
            _Opt("--transient-ode", _count, 100),
            _Opt("--k", int, None, help="cluster count (default: detected cycle period)"),
            _Opt("--out", str, required=True, help="CSV output path (per-cluster stats)"),
        ]
    ),
    "sample-fr": (
        _common()
        + [
            _Opt("--rho", float, required=True, help="noise strength of the return density"),
            _Opt("--n", _count, 100_000),
            _Opt("--out", str, required=True, help="CSV output path (columns r,h)"),
        ]
    ),
}

_PAIRS = (("mu", "F"), ("alpha", "eps"))

_HELP = {
    "osc-params": "print the derived map parameters of an impact oscillator",
    "bifdiag": "attractor scan over a mu range (CSV mu,x)",
    "density": "long-orbit occupancy histogram on a fixed grid",
    "sigma": "fractions of returns to x > 0 by gap length (CSV j,sigma)",
    "orbit": "integrate the oscillator and dump the trajectory (CSV)",
    "compare": "cluster statistics of map iterates vs oscillator returns",
    "sample-fr": "draw first-return samples (r, h) at fixed rho (CSV)",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grazesim",
        description="Grazing-impact map and oscillator simulations, reproducibly.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for cmd, opts in _COMMAND_OPTS.items():
        sp = sub.add_parser(cmd, help=_HELP[cmd])
        for o in opts:
            kwargs = {"type": o.type, "default": argparse.SUPPRESS, "help": o.help}
            if o.choices:
                kwargs["choices"] = o.choices
            if o.default is not None and o.help:
                kwargs["help"] = f"{o.help} (default: {o.default})"
            sp.add_argument(o.flag, **kwargs)
    return parser


def _read_config(path: str, optmap: dict[str, _Opt]) -> dict:
    values = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip().replace("-", "_")
            val = val.strip()
            if key in ("config", "dump_config"):
                continue
            if key not in optmap:
                raise ConfigError(f"{path}:{lineno}: unknown option {key!r} for this command")
            try:
                values[key] = optmap[key].type(val)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
            opt = optmap[key]
            if opt.choices and values[key] not in opt.choices:
                raise ConfigError(
                    f"{path}:{lineno}: {key!r} must be one of {', '.join(map(str, opt.choices))}"
                )
    return values


def _effective(ns: argparse.Namespace) -> dict:
    """Merge defaults <- config file <- explicit flags, then validate."""
    cmd = ns.command
    opts = _COMMAND_OPTS[cmd]
    optmap = {o.dest: o for o in opts}
    explicit = {k: v for k, v in vars(ns).items() if k != "command"}
    config = {}
    cfg_path = explicit.pop("config", None)
    if cfg_path is not None:
        config = _read_config(cfg_path, optmap)
    # a flag on one side of an exclusive pair silences the config's other side
    for a, b in _PAIRS:
        if a in explicit:
            config.pop(b, None)
        if b in explicit:
            config.pop(a, None)
    eff = {o.dest: o.default for o in opts}
    eff.update(config)
    eff.update(explicit)
    eff.pop("config", None)
    # exclusivity is judged on user-supplied values only; a supplied side
    # also clears the other side's built-in default so dumps stay loadable
    user = {**config, **explicit}
    for a, b in _PAIRS:
        ua = user.get(a) is not None
        ub = user.get(b) is not None
        if ua and ub:
            raise ConfigError(f"--{a} and --{b} are mutually exclusive")
        if ub and a in eff:
            eff[a] = None
        elif ua and b in eff:
            eff[b] = None
    if eff.get("seed") is None:
        env = os.environ.get("GRAZESIM_SEED", "").strip()
        if env:
            try:
                eff["seed"] = int(env)
            except ValueError as exc:
                raise ConfigError(f"GRAZESIM_SEED must be an integer, got {env!r}") from exc
        else:
            eff["seed"] = 0
    for o in opts:
        if o.required and eff.get(o.dest) is None:
            raise ConfigError(f"missing required option {o.flag}")
    eff["command"] = cmd
    return eff


def _dump_config(eff: dict, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# grazesim {eff['command']} effective configuration\n")
        for key in sorted(eff):
            if key in ("command", "dump_config") or eff[key] is None:
                continue
            val = eff[key]
            fh.write(f"{key} = {val!r}\n" if isinstance(val, float) else f"{key} = {val}\n")


# ---------------------------------------------------------------------------
# Shared resolution helpers


def _oscillator(eff: dict, F: float | None = None) -> OscillatorParams:
    try:
        return OscillatorParams(
            k_osc=eff["k_osc"], b_osc=eff["b_osc"], k_supp=eff["k_supp"],
            b_supp=eff["b_supp"], d=eff["d"], F=F,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_mu(eff: dict, transform: NormalFormTransform, Fg: float) -> tuple[float, float]:
    """(mu, eta) from whichever of --mu / --F is set."""
    if eff.get("F") is not None:
        eta = eff["F"] - Fg
        return transform.mu_from_eta(eta), eta
    mu = eff.get("mu")
    if mu is None:
        raise ConfigError("one of --mu or --F is required")
    return mu, transform.eta_from_mu(mu)


def _resolve_eps(eff: dict, model: str) -> float:
    mid = _MODEL_ID.get(model)
    eps = eff.get("eps")
    alpha = eff.get("alpha")
    if mid is None:
        if eps not in (None, 0.0) or alpha not in (None, 0.0):
            raise ConfigError(f"model {model} takes no noise; drop --eps/--alpha")
        return 0.0
    if eps is not None:
        if eps < 0.0:
            raise ConfigError("--eps must be non-negative")
        return eps
    if alpha is not None:
        if alpha < 0.0:
            raise ConfigError("--alpha must be non-negative")
        return epsilon_for_alpha(mid, alpha)
    return 0.0


def _map_setup(eff: dict, need_mu: bool = True):
    """Resolve (params, coeffs) for a map command from direct or oscillator flags."""
    model = eff["model"]
    direct = [eff.get("tau"), eff.get("delta"), eff.get("chi")]
    if any(v is not None for v in direct):
        if not all(v is not None for v in direct):
            raise ConfigError("direct parameters need all three of --tau --delta --chi")
        if model != "det":
            raise ConfigError(
                "direct --tau/--delta/--chi support only --model det; "
                "stochastic variants need the oscillator-derived coefficients"
            )
        if eff.get("F") is not None:
            raise ConfigError("--F needs the oscillator parameters; use --mu")
        if eff.get("chi") not in (-1, 1):
            raise ConfigError("--chi must be +1 or -1")
        mu = eff.get("mu")
        if mu is None:
            if need_mu:
                raise ConfigError("--mu is required with direct parameters")
            mu = 0.0
        params = NordmarkParams(tau=eff["tau"], delta=eff["delta"], chi=eff["chi"], mu=mu)
        return params, None
    p0 = _oscillator(eff)
    transform = NormalFormTransform.from_oscillator(p0)
    if need_mu or eff.get("mu") is not None or eff.get("F") is not None:
        mu, _ = _resolve_mu(eff, transform, p0.F)
    else:
        mu = 0.0
    params = normal_form_params(p0, mu)
    coeffs = stochastic_map_coeffs(p0) if model != "det" else None
    return params, coeffs


def _parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        if len(parts) == 1:
            nx = ny = int(parts[0])
        elif len(parts) == 2:
            nx, ny = int(parts[0]), int(parts[1])
        else:
            raise ValueError
        if nx < 1 or ny < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"--grid must be N or NXxNY with positive integers, got {text!r}")
    return nx, ny


def _parse_bounds(text: str | None):
    if text is None:
        return None
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 4:
        raise ConfigError("--bounds needs four numbers: x_min,x_max,y_min,y_max")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--bounds: {exc}") from exc
    if not (vals[0] < vals[1] and vals[2] < vals[3]):
        raise ConfigError("--bounds must satisfy x_min < x_max and y_min < y_max")
    return vals


# ---------------------------------------------------------------------------
# Commands


def _cmd_osc_params(eff: dict) -> int:
    p0 = _oscillator(eff)
    Fg = grazing_forcing(p0)
    tg = grazing_phase(p0)
    lc = local_coeffs(p0)
    c = sqrt_coefficient(lc)
    lin = global_linearization(p0)
    transform = NormalFormTransform.from_oscillator(p0)
    params = normal_form_params(p0)
    mu, eta = _resolve_mu(eff, transform, Fg)
    lines = [
        f"k_osc = {_fmt(p0.k_osc)}",
        f"b_osc = {_fmt(p0.b_osc)}",
        f"k_supp = {_fmt(p0.k_supp)}",
        f"b_supp = {_fmt(p0.b_supp)}",
        f"d = {_fmt(p0.d)}",
        f"F_graz = {_fmt(Fg)}",
        f"t_graz = {_fmt(tg)}",
        f"alphaL = {_fmt(lc.alphaL)}",
        f"betaL = {_fmt(lc.betaL)}",
        f"gammaL = {_fmt(lc.gammaL)}",
        f"alphaR = {_fmt(lc.alphaR)}",
        f"betaR = {_fmt(lc.betaR)}",
        f"gammaR = {_fmt(lc.gammaR)}",
        f"c = {_fmt(c)}",
        f"A11 = {_fmt(lin.A[0, 0])}",
        f"A12 = {_fmt(lin.A[0, 1])}",
        f"A21 = {_fmt(lin.A[1, 0])}",
        f"A22 = {_fmt(lin.A[1, 1])}",
        f"b1 = {_fmt(lin.b[0])}",
        f"b2 = {_fmt(lin.b[1])}",
        f"tau = {_fmt(params.tau)}",
        f"delta = {_fmt(params.delta)}",
        f"chi = {params.chi}",
        f"kappa1 = {_fmt(1.0 / transform.scale)}",
        f"mu_per_eta = {_fmt(transform.m33 / transform.scale)}",
        f"eta_per_mu = {_fmt(transform.scale / transform.m33)}",
        f"mu = {_fmt(mu)}",
        f"eta = {_fmt(eta)}",
        f"F = {_fmt(Fg + eta)}",
    ]
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if eff.get("out"):
        with open(eff["out"], "w", newline="\n") as fh:
            fh.write(report)
    return 0


def _cmd_bifdiag(eff: dict) -> int:
    model = eff["model"]
    eff_mu_probe = dict(eff)
    eff_mu_probe["mu"] = eff["mu_min"]
    params, coeffs = _map_setup(eff_mu_probe)
    eps = _resolve_eps(eff, model)
    if eff["mu_steps"] < 1:
        raise ConfigError("--mu-steps must be at least 1")
    mus = np.linspace(eff["mu_min"], eff["mu_max"], eff["mu_steps"])
    result = bifurcation_scan(
        model, params.tau, params.delta, params.chi, mus,
        coeffs=coeffs, eps=eps, nu=eff["nu"],
        n_transient=eff["transient"], n_keep=eff["keep"], seed=eff["seed"],
        threads=eff["threads"], n_chunks=eff["chunks"], x0=eff.get("x0"), y0=eff.get("y0"),
    )
    with open(eff["out"], "w", newline="\n") as fh:
        fh.write("mu,x\n")
        for mu, xs in zip(result.mu_values, result.points):
            mu_txt = _fmt(mu)
            for x in xs:
                fh.write(f"{mu_txt},{_fmt(x)}\n")
    for mu, msg in result.flagged:
        print(f"flagged mu = {_fmt(mu)}: {msg}", file=sys.stderr)
    return 0


def _cmd_density(eff: dict) -> int:
    model = eff["model"]
    params, coeffs = _map_setup(eff)
    eps = _resolve_eps(eff, model)
    nx, ny = _parse_grid(eff["grid"])
    bounds = _parse_bounds(eff.get("bounds"))
    grid = invariant_density(
        model, params, coeffs, n=eff["n"], eps=eps, nu=eff["nu"],
        bounds=bounds, nx=nx, ny=ny, transient=eff["transient"], seed=eff["seed"],
    )
    with open(eff["out"], "w", newline="\n") as fh:
        fh.write(
            f"x_min {_fmt(grid.x_min)} x_max {_fmt(grid.x_max)} "
            f"y_min {_fmt(grid.y_min)} y_max {_fmt(grid.y_max)}\n"
        )
        fh.write(
            f"nx {grid.nx} ny {grid.ny} total {grid.total} out_of_range {grid.out_of_range}\n"
        )
        for row in grid.counts:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")
    return 0


def _cmd_sigma(eff: dict) -> int:
    model = eff["model"]
    params, coeffs = _map_setup(eff)
    eps = _resolve_eps(eff, model)
    stats = return_fractions(
        model, params, coeffs, returns=eff["n"], eps=eps, nu=eff["nu"],
        seed=eff["seed"], transient=eff["transient"],
    )
    with open(eff["out"], "w", newline="\n") as fh:
        fh.write("j,sigma\n")
        for j in sorted(stats.sigma):
            fh.write(f"{j},{_fmt(stats.sigma[j])}\n")
    return 0


def _cmd_orbit(eff: dict) -> int:
    model = eff["model"]
    p0 = _oscillator(eff)
    transform = NormalFormTransform.from_oscillator(p0)
    mu, eta = _resolve_mu(eff, transform, p0.F)
    F_run = eff["F"] if eff.get("F") is not None else p0.F + eta
    par = _oscillator(eff, F=F_run)
    eps = _resolve_eps(eff, model)
    try:
        cfg = IntegratorConfig(
            dt=eff["dt"], event_tol=eff["event_tol"], noise_mode=_ODE_MODE[model],
            ou=OUParams(eps=eps, nu=eff["nu"]), seed=eff["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    t0 = eff["t0"]
    u0 = eff.get("u0")
    v0 = eff.get("v0")
    if u0 is None:
        u0 = float(steady_state(par, t0))
    if v0 is None:
        v0 = float(steady_state_velocity(par, t0))
    if eff["t_end"] <= 0.0:
        raise ConfigError("--t-end must be positive")
    traj = integrate(par, cfg, FlowState(u0, v0, t0), t0 + eff["t_end"])
    traj.write_csv(eff["out"])
    return 0


def _cmd_compare(eff: dict) -> int:
    model = eff["model"]
    p0 = _oscillator(eff)
    transform = NormalFormTransform.from_oscillator(p0)
    mu, eta = _resolve_mu(eff, transform, p0.F)
    params = normal_form_params(p0, mu)
    coeffs = stochastic_map_coeffs(p0)
    eps = _resolve_eps(eff, model)
    k = eff.get("k")
    detected = detect_cycle(params, max_period=k if k is not None else 50)
    if detected is None:
        raise DegenerateClusteringError(
            f"no deterministic cycle of period <= {k if k is not None else 50} at mu = {mu!r}; "
            "pass --k or choose a periodic mu"
        )
    period, cycle = detected
    if k is not None and period != k:
        raise ConfigError(f"--k {k} does not match the detected cycle period {period}")
    xs, ys = orbit_points(
        model, params, coeffs, n=eff["n"], transient=eff["transient_map"],
        eps=eps, nu=eff["nu"], rng=np.random.default_rng([eff["seed"], 0]),
    )
    map_cloud = np.column_stack([xs, ys])
    F_run = eff["F"] if eff.get("F") is not None else p0.F + eta
    par = _oscillator(eff, F=F_run)
    try:
        cfg = IntegratorConfig(
            dt=eff["dt"], event_tol=eff["event_tol"], noise_mode=_MODE_FOR_MAP[model],
            ou=OUParams(eps=eps, nu=eff["nu"]), seed=eff["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ode_cloud = ode_return_points(
        par, cfg, eff["n"], rng=np.random.default_rng([eff["seed"], 1]),
        transient=eff["transient_ode"],
    )
    report = compare_clouds(map_cloud, ode_cloud, period, cycle)
    with open(eff["out"], "w", newline="\n") as fh:
        fh.write(
            "cluster,n_map,n_ode,centroid_map_x,centroid_map_y,"
            "centroid_ode_x,centroid_ode_y,offset_x,offset_y,offset_norm,"
            "std_map,std_ode,std_ratio,std_map_x,std_map_y,std_ode_x,std_ode_y\n"
        )
        for i, cl in enumerate(report.clusters):
            fh.write(
                f"{i},{cl.n_a},{cl.n_b},"
                f"{_fmt(cl.centroid_a[0])},{_fmt(cl.centroid_a[1])},"
                f"{_fmt(cl.centroid_b[0])},{_fmt(cl.centroid_b[1])},"
                f"{_fmt(cl.offset[0])},{_fmt(cl.offset[1])},{_fmt(cl.offset_norm)},"
                f"{_fmt(cl.std_a)},{_fmt(cl.std_b)},{_fmt(cl.std_ratio)},"
                f"{_fmt(cl.axis_std_a[0])},{_fmt(cl.axis_std_a[1])},"
                f"{_fmt(cl.axis_std_b[0])},{_fmt(cl.axis_std_b[1])}\n"
            )
    worst = max(cl.std_ratio for cl in report.clusters)
    print(
        f"{period} clusters, {eff['n']} points per cloud, "
        f"largest per-cluster std ratio {worst:.3g}"
    )
    return 0


def _cmd_sample_fr(eff: dict) -> int:
    rho = eff["rho"]
    if rho <= 0.0:
        raise ConfigError("--rho must be positive")
    rng = np.random.default_rng(eff["seed"])
    r, h = sample_first_return(rho, rng, size=eff["n"])
    with open(eff["out"], "w", newline="\n") as fh:
        fh.write("r,h\n")
        for i in range(len(r)):
            fh.write(f"{_fmt(r[i])},{_fmt(h[i])}\n")
    cov = first_return_cov_gauss(rho)
    print(
        f"{len(r)} samples at rho = {_fmt(rho)}; "
        f"small-noise reference std(r) = {math.sqrt(cov[0, 0]):.3g}, "
        f"std(h) = {math.sqrt(cov[1, 1]):.3g}"
    )
    return 0


_COMMANDS = {
    "osc-params": _cmd_osc_params,
    "bifdiag": _cmd_bifdiag,
    "density": _cmd_density,
    "sigma": _cmd_sigma,
    "orbit": _cmd_orbit,
    "compare": _cmd_compare,
    "sample-fr": _cmd_sample_fr,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        eff = _effective(ns)
        if eff.get("dump_config"):
            _dump_config(eff, eff["dump_config"])
        return _COMMANDS[eff["command"]](eff)
    except ConfigError as exc:
        print(f"grazesim: config error: {exc}", file=sys.stderr)
        return 2
    except GrazesimError as exc:
        print(f"grazesim: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"grazesim: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
