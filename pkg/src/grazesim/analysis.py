"""Long-orbit studies of the map variants: scans, densities, return statistics.

Everything here is seed-reproducible: orbits consume a
``numpy.random.Generator`` and identical seeds give identical results,
independent of how work is chunked or how many worker processes a scan
uses (scan chunking is fixed, workers only schedule chunks).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateClusteringError,
    InvalidNoiseDrawError,
    NumericOverflowError,
    StarvationError,
)
from .maps import MapState, NordmarkParams, StochasticMapCoeffs, det_step, fixed_point
from .noise import (
    TWO_PI,
    OUParams,
    ou_sequence,
    sample_first_return,
)

__all__ = [
    "MAP_MODELS",
    "EPS_TILDE",
    "epsilon_for_alpha",
    "MapOrbit",
    "orbit_points",
    "DensityGrid",
    "invariant_density",
    "ReturnStats",
    "return_fractions",
    "ScanResult",
    "bifurcation_scan",
    "detect_cycle",
    "largest_lyapunov",
    "ClusterStats",
    "CloudComparison",
    "compare_clouds",
    "concentration_fraction",
]

MAP_MODELS = ("det", "n1", "n2", "n3")

# Noise amplitude per unit alpha for each stochastic variant, calibrated so
# alpha = 1 contributes a displacement spread of about 0.01 at the reference
# impacting state.
EPS_TILDE = {1: 0.0001, 2: 0.125, 3: 0.022}


def epsilon_for_alpha(model_id: int, alpha: float) -> float:
    """Noise amplitude eps = eps_tilde(model) * alpha."""
    if model_id not in EPS_TILDE:
        raise ValueError(f"unknown stochastic model id {model_id!r}; expected 1, 2 or 3")
    if alpha < 0.0:
        raise ValueError("alpha must be non-negative")
    return EPS_TILDE[model_id] * alpha


def _model_id(model: str) -> int:
    if model not in MAP_MODELS:
        raise ValueError(f"unknown map model {model!r}; expected one of {MAP_MODELS}")
    return 0 if model == "det" else int(model[1])


class MapOrbit:
    """Stateful chunked orbit generator for one map variant.

    Successive ``take`` calls continue the same orbit (map state, per-cycle
    noise value, and generator stream all carry over), so statistics can be
    streamed without holding the whole orbit.
    """

    def __init__(
        self,
        model: str,
        params: NordmarkParams,
        coeffs: StochasticMapCoeffs | None = None,
        *,
        eps: float = 0.0,
        nu: float = 0.5,
        period: float = TWO_PI,
        x0: float | None = None,
        y0: float | None = None,
        rng: np.random.Generator | None = None,
        seed: int = 0,
    ):
        self.model = model
        self.model_id = _model_id(model)
        if self.model_id > 0 and coeffs is None:
            raise ValueError(f"model {model!r} needs StochasticMapCoeffs")
        if eps < 0.0:
            raise ValueError("eps must be non-negative")
        self.params = params
        self.coeffs = coeffs
        self.eps = eps
        self.nu = nu
        self.period = period
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        if x0 is None or y0 is None:
            fp = fixed_point(params)
            x0 = fp.x if x0 is None else x0
            y0 = fp.y if y0 is None else y0
        self.x = float(x0)
        self.y = float(y0)
        if self.model_id in (1, 2):
            ou = OUParams(eps=eps, nu=nu)
            self.xi = ou.stationary_std * self.rng.standard_normal()
        else:
            self.xi = 0.0

    def take(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Advance n iterates; returns their (x, y) arrays."""
        if n <= 0:
            return np.empty(0), np.empty(0)
        if self.model_id == 0:
            xs, ys = self._take_det(n)
        elif self.model_id == 1:
            xs, ys = self._take_n1(n)
        elif self.model_id == 2:
            xs, ys = self._take_n2(n)
        else:
            xs, ys = self._take_n3(n)
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            bad = int(np.flatnonzero(~np.isfinite(xs))[0]) if not np.all(np.isfinite(xs)) else n - 1
            raise NumericOverflowError(
                f"{self.model} orbit diverged at chunk step {bad}: "
                f"state ({xs[max(bad - 1, 0)]!r}, {ys[max(bad - 1, 0)]!r}), mu = {self.params.mu!r}"
            )
        return xs, ys

    def _take_det(self, n):
        tau, delta, mu = self.params.tau, self.params.delta, self.params.mu
        chi = float(self.params.chi)
        x, y = self.x, self.y
        xs = np.empty(n)
        ys = np.empty(n)
        sqrt = math.sqrt
        for i in range(n):
            if x <= 0.0:
                x, y = tau * x + y, -delta * x + mu
            else:
                sx = sqrt(x if x > 0.0 else 0.0)
                x, y = tau * x + (y - chi * sx), -delta * x + mu
            xs[i] = x
            ys[i] = y
        self.x, self.y = x, y
        return xs, ys

    def _take_n1(self, n):
        tau, delta, mu = self.params.tau, self.params.delta, self.params.mu
        chi = float(self.params.chi)
        kappa1 = self.coeffs.kappa1
        ou = OUParams(eps=self.eps, nu=self.nu)
        xi_seq = ou_sequence(n, ou, self.rng, T=self.period, xi0=self.xi)
        if n:
            self.xi = float(xi_seq[-1])
        xi_list = xi_seq.tolist()
        x, y = self.x, self.y
        xs = np.empty(n)
        ys = np.empty(n)
        sqrt = math.sqrt
        for i in range(n):
            shifted = x + kappa1 * xi_list[i]
            if shifted <= 0.0:
                x, y = tau * x + y, -delta * x + mu
            else:
                sx = sqrt(shifted if shifted > 0.0 else 0.0)
                x, y = tau * x + (y - chi * sx), -delta * x + mu
            xs[i] = x
            ys[i] = y
        self.x, self.y = x, y
        return xs, ys

    def _take_n2(self, n):
        tau, delta, mu = self.params.tau, self.params.delta, self.params.mu
        chi = float(self.params.chi)
        q = self.coeffs
        gL_over_bL = q.gammaL / q.betaL
        gR = q.gammaR
        bR = q.betaR
        gap = q.slope_gap
        ou = OUParams(eps=self.eps, nu=self.nu)
        xi_seq = ou_sequence(n, ou, self.rng, T=self.period, xi0=self.xi)
        if n:
            self.xi = float(xi_seq[-1])
        xi_list = xi_seq.tolist()
        x, y = self.x, self.y
        xs = np.empty(n)
        ys = np.empty(n)
        sqrt = math.sqrt
        for i in range(n):
            xi = xi_list[i]
            if xi >= bR:
                raise InvalidNoiseDrawError(
                    f"noise draw xi = {xi!r} >= betaR = {bR!r} at iterate {i}"
                )
            if x <= 0.0:
                x, y = tau * x + y, -delta * x + mu
            else:
                kappa2 = (gL_over_bL - gR / (bR - xi)) / gap
                sx = sqrt(x if x > 0.0 else 0.0)
                x, y = tau * x + (y - chi * (kappa2 * sx)), -delta * x + mu
            xs[i] = x
            ys[i] = y
        self.x, self.y = x, y
        return xs, ys

    def _take_n3(self, n):
        tau, delta, mu = self.params.tau, self.params.delta, self.params.mu
        chi = float(self.params.chi)
        q = self.coeffs
        a11 = q.a11
        gL = q.gammaL
        gR = q.gammaR
        bL = q.betaL
        bR = q.betaR
        gap = q.slope_gap
        rho_const = (
            self.eps
            * self.eps
            * math.sqrt(q.alphaL)
            / (bR * math.sqrt(2.0 * bL) * abs(q.a12 * q.c))
        )
        rng = self.rng
        x, y = self.x, self.y
        xs = np.empty(n)
        ys = np.empty(n)
        sqrt = math.sqrt
        deterministic = self.eps == 0.0
        for i in range(n):
            if x <= 0.0:
                x, y = tau * x + y, -delta * x + mu
            else:
                if deterministic:
                    r, h = 2.0, 1.0
                else:
                    rho = rho_const / sqrt(x)
                    if not math.isfinite(rho):
                        raise NumericOverflowError(
                            f"n3 noise strength diverged at iterate {i}: x = {x!r}"
                        )
                    r, h = sample_first_return(rho, rng)
                kappa3 = (gL * (h + 1.0) / (2.0 * bL) - gR * r / (2.0 * bR)) / gap
                h2 = h * h
                sx = sqrt(x if x > 0.0 else 0.0)
                x, y = (
                    (tau + a11 * (h2 - 1.0)) * x + (y - chi * (kappa3 * sx)),
                    -(delta * h2) * x + mu,
                )
            xs[i] = x
            ys[i] = y
        self.x, self.y = x, y
        return xs, ys


def orbit_points(
    model: str,
    params: NordmarkParams,
    coeffs: StochasticMapCoeffs | None = None,
    *,
    n: int,
    transient: int = 0,
    eps: float = 0.0,
    nu: float = 0.5,
    period: float = TWO_PI,
    x0: float | None = None,
    y0: float | None = None,
    rng: np.random.Generator | None = None,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """n post-transient orbit points of the chosen map variant."""
    orbit = MapOrbit(
        model, params, coeffs, eps=eps, nu=nu, period=period, x0=x0, y0=y0, rng=rng, seed=seed
    )
    if transient:
        orbit.take(transient)
    return orbit.take(n)


# ---------------------------------------------------------------------------
# Invariant densities


@dataclass
class DensityGrid:
    """Fixed-resolution occupancy counts over a rectangle, merge-friendly."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = 256
    ny: int = 256
    counts: np.ndarray = field(default=None)
    total: int = 0
    out_of_range: int = 0

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("density grid needs a non-empty rectangle")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid resolution must be at least 1x1")
        if self.counts is None:
            self.counts = np.zeros((self.nx, self.ny), dtype=np.int64)

    def add(self, xs: np.ndarray, ys: np.ndarray) -> None:
        H, _, _ = np.histogram2d(
            xs, ys, bins=[self.nx, self.ny],
            range=[[self.x_min, self.x_max], [self.y_min, self.y_max]],
        )
        self.counts += H.astype(np.int64)
        self.total += len(xs)
        self.out_of_range += len(xs) - int(H.sum())

    def merge(self, other: "DensityGrid") -> None:
        same = (
            (self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny)
            == (other.x_min, other.x_max, other.y_min, other.y_max, other.nx, other.ny)
        )
        if not same:
            raise ValueError("cannot merge density grids with different geometry")
        self.counts += other.counts
        self.total += other.total
        self.out_of_range += other.out_of_range

    def density(self) -> np.ndarray:
        """Counts normalized to a probability density (integrates to <= 1)."""
        if self.total == 0:
            return np.zeros_like(self.counts, dtype=float)
        cell = (self.x_max - self.x_min) / self.nx * (self.y_max - self.y_min) / self.ny
        return self.counts / (self.total * cell)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        cx = self.x_min + (np.arange(self.nx) + 0.5) * (self.x_max - self.x_min) / self.nx
        cy = self.y_min + (np.arange(self.ny) + 0.5) * (self.y_max - self.y_min) / self.ny
        return cx, cy


def invariant_density(
    model: str,
    params: NordmarkParams,
    coeffs: StochasticMapCoeffs | None = None,
    *,
    n: int,
    eps: float = 0.0,
    nu: float = 0.5,
    bounds: tuple[float, float, float, float] | None = None,
    nx: int = 256,
    ny: int = 256,
    transient: int = 1000,
    seed: int = 0,
    chunk: int = 200_000,
) -> DensityGrid:
    """Occupancy histogram of a long orbit.

    bounds = None fits the rectangle to a pilot orbit (10% margin on each
    side) drawn from an independent sub-stream of the same seed.
    """
    if bounds is None:
        px, py = orbit_points(
            model, params, coeffs, n=10_000, transient=transient, eps=eps, nu=nu,
            rng=np.random.default_rng([seed, 1]),
        )
        mx = 0.1 * (px.max() - px.min() + 1e-12)
        my = 0.1 * (py.max() - py.min() + 1e-12)
        bounds = (px.min() - mx, px.max() + mx, py.min() - my, py.max() + my)
    grid = DensityGrid(*bounds, nx=nx, ny=ny)
    orbit = MapOrbit(model, params, coeffs, eps=eps, nu=nu, rng=np.random.default_rng([seed, 0]))
    orbit.take(transient)
    left = n
    while left > 0:
        m = min(chunk, left)
        xs, ys = orbit.take(m)
        grid.add(xs, ys)
        left -= m
    return grid


# ---------------------------------------------------------------------------
# Return-time fractions


@dataclass(frozen=True)
class ReturnStats:
    """sigma[j]: fraction of returns to x > 0 that took exactly j iterations."""

    sigma: dict[int, float]
    returns: int


def return_fractions(
    model: str,
    params: NordmarkParams,
    coeffs: StochasticMapCoeffs | None = None,
    *,
    returns: int,
    eps: float = 0.0,
    nu: float = 0.5,
    seed: int = 0,
    transient: int = 1000,
    cap: int = 10_000,
    chunk: int = 50_000,
) -> ReturnStats:
    """Distribution of gap lengths between successive x > 0 visits."""
    if params.mu <= 0.0:
        raise ValueError("return fractions need mu > 0 so that x > 0 recurs")
    orbit = MapOrbit(model, params, coeffs, eps=eps, nu=nu, rng=np.random.default_rng([seed, 0]))
    orbit.take(transient)
    gaps: list[int] = []
    prev = None  # global iterate index of the last x > 0 visit
    gidx = 0  # global iterate index of the next chunk's first element
    searched = 0  # iterates seen since the last visit (or since the start)
    while len(gaps) < returns:
        xs, _ = orbit.take(chunk)
        pos = np.flatnonzero(xs > 0.0)
        if len(pos):
            gpos = pos + gidx
            before = len(gaps)
            if prev is not None:
                gaps.append(int(gpos[0]) - prev)
            gaps.extend(np.diff(gpos).tolist())
            prev = int(gpos[-1])
            searched = gidx + len(xs) - 1 - prev
            new = gaps[before:]
            if new and max(new) > cap:
                searched = max(new)
        else:
            searched += len(xs)
        gidx += len(xs)
        if searched > cap:
            raise StarvationError(
                f"no return to x > 0 within {cap} iterations (model {model}, mu = {params.mu})"
            )
    gaps = gaps[:returns]
    counts: dict[int, int] = {}
    for g in gaps:
        counts[g] = counts.get(g, 0) + 1
    sigma = {j: counts[j] / returns for j in sorted(counts)}
    return ReturnStats(sigma=sigma, returns=returns)


# ---------------------------------------------------------------------------
# Bifurcation scans


@dataclass
class ScanResult:
    mu_values: np.ndarray
    points: list[np.ndarray]  # kept x iterates per mu
    flagged: list[tuple[float, str]]


def _scan_chunk(args) -> tuple[list[np.ndarray], list[tuple[float, str]]]:
    (model, tau, delta, chi, mus, coeffs, eps, nu, n_transient, n_keep, seed, chunk_id, x0, y0) = args
    rng = np.random.default_rng([seed, chunk_id])
    points: list[np.ndarray] = []
    flagged: list[tuple[float, str]] = []
    state_x, state_y = x0, y0
    xi_carry = None
    orbit = None
    for mu in mus:
        params = NordmarkParams(tau=tau, delta=delta, chi=chi, mu=mu)
        if state_x is None:
            fp = fixed_point(params)
            sx, sy = fp.x, fp.y
        else:
            sx, sy = state_x, state_y
        orbit = MapOrbit(model, params, coeffs, eps=eps, nu=nu, x0=sx, y0=sy, rng=rng)
        if xi_carry is not None:
            orbit.xi = xi_carry
        try:
            orbit.take(n_transient)
            xs, _ = orbit.take(n_keep)
            points.append(xs)
            state_x, state_y = orbit.x, orbit.y
        except NumericOverflowError as exc:
            flagged.append((mu, str(exc)))
            points.append(np.full(n_keep, np.nan))
            state_x, state_y = None, None  # cold-restart the continuation
        xi_carry = orbit.xi
    return points, flagged


def bifurcation_scan(
    model: str,
    tau: float,
    delta: float,
    chi: int,
    mu_values: Sequence[float],
    *,
    coeffs: StochasticMapCoeffs | None = None,
    eps: float = 0.0,
    nu: float = 0.5,
    n_transient: int = 500,
    n_keep: int = 200,
    seed: int = 0,
    threads: int = 1,
    n_chunks: int = 16,
    x0: float | None = None,
    y0: float | None = None,
) -> ScanResult:
    """Attractor x-values against mu, warm-started along each chunk.

    mu values are split into n_chunks contiguous chunks (fixed regardless of
    ``threads``); inside a chunk each mu continues from the previous one's
    end state, the first mu of a chunk cold-starts at the linear fixed
    point.  Worker processes only schedule chunks, so results are identical
    for any thread count.
    """
    mu_values = np.asarray(list(mu_values), dtype=float)
    _model_id(model)
    n_chunks = max(1, min(n_chunks, len(mu_values)))
    splits = np.array_split(np.arange(len(mu_values)), n_chunks)
    jobs = [
        (
            model, tau, delta, chi, mu_values[idx].tolist(), coeffs, eps, nu,
            n_transient, n_keep, seed, int(ci), x0, y0,
        )
        for ci, idx in enumerate(splits)
        if len(idx)
    ]
    if threads <= 1:
        results = [_scan_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_scan_chunk, jobs))
    points: list[np.ndarray] = []
    flagged: list[tuple[float, str]] = []
    for pts, fl in results:
        points.extend(pts)
        flagged.extend(fl)
    return ScanResult(mu_values=mu_values, points=points, flagged=flagged)


# ---------------------------------------------------------------------------
# Attractor classification helpers


def detect_cycle(
    params: NordmarkParams,
    *,
    x0: float | None = None,
    y0: float | None = None,
    transient: int = 20_000,
    max_period: int = 50,
    tol: float = 1e-9,
) -> tuple[int, np.ndarray] | None:
    """Minimal period <= max_period of the attractor reached from (x0, y0).

    Returns (period, cycle points (p, 2)) or None if no such period fits.
    """
    xs, ys = orbit_points("det", params, n=4 * max_period, transient=transient, x0=x0, y0=y0)
    for p in range(1, max_period + 1):
        if np.all(np.abs(xs[:-p] - xs[p:]) < tol) and np.all(np.abs(ys[:-p] - ys[p:]) < tol):
            return p, np.column_stack([xs[:p], ys[:p]])
    return None


def largest_lyapunov(
    params: NordmarkParams,
    *,
    n: int = 20_000,
    transient: int = 2_000,
    x0: float | None = None,
    y0: float | None = None,
) -> float:
    """Largest Lyapunov exponent of the deterministic map along one orbit."""
    if x0 is None or y0 is None:
        fp = fixed_point(params)
        x0 = fp.x if x0 is None else x0
        y0 = fp.y if y0 is None else y0
    s = MapState(float(x0), float(y0))
    for _ in range(transient):
        s = det_step(s, params)
    tau, delta, chi = params.tau, params.delta, float(params.chi)
    vx, vy = 1.0, 0.0
    acc = 0.0
    for _ in range(n):
        x = s.x
        if x <= 0.0:
            jx = tau * vx + vy
        else:
            jx = (tau - chi / (2.0 * math.sqrt(max(x, 1e-280)))) * vx + vy
        jy = -delta * vx
        norm = math.hypot(jx, jy)
        if norm == 0.0:
            return -math.inf
        acc += math.log(norm)
        vx, vy = jx / norm, jy / norm
        s = det_step(s, params)
    return acc / n


# ---------------------------------------------------------------------------
# Cloud comparison (map iterates vs flow return points)


@dataclass(frozen=True)
class ClusterStats:
    n_a: int
    n_b: int
    centroid_a: np.ndarray
    centroid_b: np.ndarray
    offset: np.ndarray
    offset_norm: float
    std_a: float
    std_b: float
    std_ratio: float
    axis_std_a: np.ndarray
    axis_std_b: np.ndarray


@dataclass(frozen=True)
class CloudComparison:
    seeds: np.ndarray
    clusters: tuple[ClusterStats, ...]


def compare_clouds(a: np.ndarray, b: np.ndarray, k: int, seeds: np.ndarray) -> CloudComparison:
    """Per-cluster offsets and spread ratios of two point clouds.

    Points are assigned to the nearest of k seed points (the deterministic
    cycle); std is the rms distance to the cluster's own centroid and the
    ratio is std_a / std_b.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both point sets must be non-empty")
    if k < 1 or len(seeds) != k:
        raise ValueError("need k >= 1 seed points")

    def assign(pts):
        d2 = ((pts[:, None, :] - seeds[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1)

    la = assign(a)
    lb = assign(b)
    stats = []
    for i in range(k):
        pa = a[la == i]
        pb = b[lb == i]
        if len(pa) == 0 or len(pb) == 0:
            raise DegenerateClusteringError(
                f"cluster {i} is empty (map: {len(pa)} points, flow: {len(pb)} points)"
            )
        ca = pa.mean(axis=0)
        cb = pb.mean(axis=0)
        std_a = float(np.sqrt(((pa - ca) ** 2).sum(axis=1).mean()))
        std_b = float(np.sqrt(((pb - cb) ** 2).sum(axis=1).mean()))
        if std_b == 0.0 and std_a == 0.0:
            ratio = 1.0
        elif std_b == 0.0:
            ratio = math.inf
        else:
            ratio = std_a / std_b
        stats.append(
            ClusterStats(
                n_a=len(pa),
                n_b=len(pb),
                centroid_a=ca,
                centroid_b=cb,
                offset=ca - cb,
                offset_norm=float(np.linalg.norm(ca - cb)),
                std_a=std_a,
                std_b=std_b,
                std_ratio=ratio,
                axis_std_a=pa.std(axis=0),
                axis_std_b=pb.std(axis=0),
            )
        )
    return CloudComparison(seeds=seeds, clusters=tuple(stats))


def concentration_fraction(grid: DensityGrid, centers: np.ndarray, n_std: float = 5.0) -> float:
    """Fraction of all recorded mass within n_std local-spread radii of centers.

    Grid cells are assigned to the nearest center; each cluster's spread is
    the mass-weighted rms distance of its cells to that center.  Mass that
    fell outside the grid counts against the fraction.
    """
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    if grid.total == 0:
        raise ValueError("empty density grid")
    cx, cy = grid.cell_centers()
    X, Y = np.meshgrid(cx, cy, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    w = grid.counts.ravel().astype(float)
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    lab = np.argmin(d2, axis=1)
    dist2 = d2[np.arange(len(pts)), lab]
    inside = 0.0
    for i in range(len(centers)):
        m = lab == i
        wm = w[m]
        if wm.sum() == 0.0:
            continue
        sigma2 = float((wm * dist2[m]).sum() / wm.sum())
        inside += float(wm[dist2[m] <= n_std * n_std * sigma2].sum())
    return inside / grid.total
