"""Quadrature, log-gamma and seeded random streams.

Quadrature routines return a :class:`QuadResult` carrying an error estimate
and a convergence flag; they never raise on non-convergence.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .geometry import SpaceKind, distance_from_origin, radius_at_distance


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 2000
    base_order: int = 20

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1 or self.base_order < 2:
            raise ValueError("bad subdivision/order settings")


DEFAULT_1D = QuadratureConfig()
DEFAULT_2D = QuadratureConfig(rel_tol=1e-8, abs_tol=1e-12)
DEFAULT_4D = QuadratureConfig(rel_tol=1e-6, abs_tol=1e-10, base_order=12)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool
    evaluations: int = 0

    def __float__(self):
        return float(self.value)


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _panel(f, a, b, n):
    x, w = gauss_legendre(n)
    nodes = a + (b - a) * x
    return (b - a) * np.dot(w, f(nodes))


def adaptive_gauss_legendre(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_1D,
    breakpoints=(),
) -> QuadResult:
    """Globally adaptive bisection with Gauss-Legendre panels.

    Each panel is estimated with ``base_order`` nodes and compared with the
    sum over its two halves; the worst panel is split until the summed error
    meets ``max(abs_tol, rel_tol * |I|)``.
    """
    n = cfg.base_order
    edges = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    panels = []  # (err, a, b, fine_value)
    evals = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        coarse = _panel(f, lo, hi, n)
        fine = _panel(f, lo, mid, n) + _panel(f, mid, hi, n)
        evals += 3 * n
        panels.append((abs(fine - coarse), lo, hi, fine))
    splits = 0
    while True:
        total = sum(p[3] for p in panels)
        err = sum(p[0] for p in panels)
        if err <= max(cfg.abs_tol, cfg.rel_tol * abs(total)):
            return QuadResult(float(total), float(err), True, evals)
        if splits >= cfg.max_subdivisions:
            return QuadResult(float(total), float(err), False, evals)
        idx = max(range(len(panels)), key=lambda i: panels[i][0])
        _, lo, hi, _ = panels.pop(idx)
        mid = 0.5 * (lo + hi)
        for l2, h2 in ((lo, mid), (mid, hi)):
            m2 = 0.5 * (l2 + h2)
            coarse = _panel(f, l2, h2, n)
            fine = _panel(f, l2, m2, n) + _panel(f, m2, h2, n)
            evals += 3 * n
            panels.append((abs(fine - coarse), l2, h2, fine))
        splits += 1


def integrate_radial(
    f: Callable[[np.ndarray], np.ndarray],
    r_max: float = np.inf,
    cfg: QuadratureConfig = DEFAULT_1D,
    breakpoints=(),
) -> QuadResult:
    """Integral of f(r) over [0, r_max); r_max = inf uses r = t / (1 - t)."""
    if np.isfinite(r_max):
        return adaptive_gauss_legendre(f, 0.0, float(r_max), cfg, breakpoints)

    def g(t):
        r = t / (1.0 - t)
        return f(r) / (1.0 - t) ** 2

    tb = [p / (1.0 + p) for p in breakpoints]
    return adaptive_gauss_legendre(g, 0.0, 1.0, cfg, tb)


def _trapezoid_angle(f, center, r, n_theta):
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    z = center + np.multiply.outer(r, np.exp(1j * theta))
    return (2 * np.pi / n_theta) * f(z).sum(axis=-1)


def integrate_disk(
    f: Callable[[np.ndarray], np.ndarray],
    center: complex = 0j,
    radius: float = 1.0,
    cfg: QuadratureConfig = DEFAULT_2D,
    breakpoints=(),
    n_theta: int = 32,
    max_theta: int = 4096,
) -> QuadResult:
    """Polar tensor rule: trapezoid in angle, adaptive Gauss-Legendre in r.

    ``f`` maps a complex array to a real (or complex) array of the same
    shape. ``radius`` may be inf. The angular resolution is doubled until
    two successive results agree.
    """
    prev = None
    total_evals = 0
    while True:
        res = integrate_radial(
            lambda r: r * _trapezoid_angle(f, center, r, n_theta), radius, cfg, breakpoints
        )
        total_evals += res.evaluations * n_theta
        if prev is not None:
            ang_err = abs(res.value - prev.value)
            tol = max(cfg.abs_tol, cfg.rel_tol * abs(res.value))
            if ang_err <= tol or n_theta >= max_theta:
                err = res.error + ang_err
                return QuadResult(res.value, err, res.converged and ang_err <= tol, total_evals)
        prev = res
        n_theta *= 2


def integrate_invariant(
    f: Callable[[np.ndarray], np.ndarray],
    space: SpaceKind,
    radius: float = np.inf,
    cfg: QuadratureConfig = DEFAULT_2D,
    breakpoints=(),
    n_theta: int = 32,
    max_theta: int = 4096,
) -> QuadResult:
    """Integral of f d(nu) over the centred disk of chart radius ``radius``.

    Uses geodesic polar coordinates (d, theta), d = dist(0, z), so the sphere
    (radius = inf) becomes the finite interval d < pi/2.
    """
    space = SpaceKind.parse(space)
    if space is SpaceKind.HYPERBOLIC and radius >= 1:
        # whole disk: chart polar coordinates, f must vanish fast enough at |z| = 1
        def g(z):
            return f(z) / (1.0 - np.abs(z) ** 2) ** 2
        return integrate_disk(g, 0j, 1.0, cfg, [b for b in breakpoints if b < 1], n_theta, max_theta)
    d_max = _outer_distance(space, radius)
    d_breaks = [float(distance_from_origin(space, b)) for b in breakpoints if 0 < b < radius]

    def radial(d, nth):
        r = radius_at_distance(space, d)
        return _geodesic_jacobian(space, d) * _trapezoid_angle(f, 0j, r, nth).real

    def one(nth):
        if np.isfinite(d_max):
            return adaptive_gauss_legendre(lambda d: radial(d, nth), 0.0, d_max, cfg, d_breaks)
        return integrate_radial(lambda d: radial(d, nth), np.inf, cfg, d_breaks)

    prev = None
    evals = 0
    while True:
        res = one(n_theta)
        evals += res.evaluations * n_theta
        if prev is not None:
            ang_err = abs(res.value - prev.value)
            tol = max(cfg.abs_tol, cfg.rel_tol * abs(res.value))
            if ang_err <= tol or n_theta >= max_theta:
                return QuadResult(res.value, res.error + ang_err, res.converged and ang_err <= tol, evals)
        prev = res
        n_theta *= 2


def _polar_nodes(r_edges, n_r, n_theta):
    """Tensor nodes in (r, theta) with weights for dr dtheta (no Jacobian)."""
    x, w = gauss_legendre(n_r)
    rs, ws = [], []
    for lo, hi in zip(r_edges[:-1], r_edges[1:]):
        rs.append(lo + (hi - lo) * x)
        ws.append((hi - lo) * w)
    r = np.concatenate(rs)
    wr = np.concatenate(ws)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    return r, wr, theta, np.full(n_theta, 2 * np.pi / n_theta)


def integrate_pair(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    space: SpaceKind,
    rho: float,
    outer_radius: float,
    inner_radius: float,
    cfg: QuadratureConfig = DEFAULT_4D,
    outer_breaks=(),
    resolution: int = 1,
) -> QuadResult:
    """Double integral of f(z, w) dnu(z) dnu(w) near the diagonal.

    The outer variable z runs over the centred geodesic disk of chart radius
    ``outer_radius`` (inf allowed for the sphere). The inner variable is
    w = T_z^{-1}(zeta) with zeta = t e^{i phi} / sqrt(rho), t <= inner_radius,
    where T_z is the isometry moving z to the origin; nu is invariant so
    dnu(w) = dnu(zeta). The rule is evaluated at two resolutions and their
    difference is reported as the error.
    """
    space = SpaceKind.parse(space)

    def run(level):
        n_r = cfg.base_order * level
        d_max = _outer_distance(space, outer_radius)
        d_breaks = sorted({0.0, d_max, *[float(distance_from_origin(space, b)) for b in outer_breaks
                                          if 0 < b < outer_radius]})
        edges = []
        for lo, hi in zip(d_breaks[:-1], d_breaks[1:]):
            k = max(1, int(np.ceil(4 * (hi - lo) / max(d_max, 1e-300))))
            edges.extend(np.linspace(lo, hi, k + 1)[:-1])
        edges.append(d_max)
        d, wd, th, wth = _polar_nodes(np.array(edges), n_r, 16 * level)
        r = radius_at_distance(space, d)
        jac = _geodesic_jacobian(space, d)
        z = np.multiply.outer(r, np.exp(1j * th)).ravel()
        wz = np.multiply.outer(wd * jac, wth).ravel()

        t_max = inner_radius
        if space is SpaceKind.HYPERBOLIC:
            t_max = min(t_max, np.sqrt(rho))
        t, wt, ph, wph = _polar_nodes(np.linspace(0, t_max, 3 * level + 1), n_r, 32 * level)
        zeta_r = t / np.sqrt(rho)
        eta = _density_radial(space, zeta_r)
        zeta = np.multiply.outer(zeta_r, np.exp(1j * ph)).ravel()
        wzeta = np.multiply.outer(wt * zeta_r / np.sqrt(rho) * eta, wph).ravel()

        total = 0.0
        chunk = max(1, 2_000_000 // zeta.size)
        for s in range(0, z.size, chunk):
            zc = z[s:s + chunk, None]
            w = _from_origin(space, zc, zeta[None, :])
            vals = f(np.broadcast_to(zc, w.shape), w)
            total += np.sum(wz[s:s + chunk] * (vals @ wzeta))
        return float(np.real(total))

    coarse = run(resolution)
    fine = run(resolution + 1)
    err = abs(fine - coarse)
    ok = err <= max(cfg.abs_tol, cfg.rel_tol * abs(fine))
    return QuadResult(fine, err, ok)


def _outer_distance(space, radius):
    if space is SpaceKind.SPHERE and not np.isfinite(radius):
        return np.pi / 2
    if space is SpaceKind.HYPERBOLIC and radius >= 1:
        return np.inf
    return float(distance_from_origin(space, radius))


def _geodesic_jacobian(space, d):
    """dnu = J(d) dd dtheta in geodesic polar coordinates."""
    if space is SpaceKind.PLANE:
        return d
    if space is SpaceKind.SPHERE:
        return 0.5 * np.sin(2 * d)
    return 0.5 * np.sinh(2 * d)


def _density_radial(space, r):
    if space is SpaceKind.PLANE:
        return np.ones_like(r)
    if space is SpaceKind.SPHERE:
        return (1 + r * r) ** -2.0
    return (1 - r * r) ** -2.0


def _from_origin(space, z, zeta):
    """T_z^{-1}(zeta), broadcasting over arrays."""
    if space is SpaceKind.PLANE:
        return z + zeta
    if space is SpaceKind.SPHERE:
        return (zeta + z) / (1 - np.conj(z) * zeta)
    return (zeta + z) / (1 + np.conj(z) * zeta)


def log_gamma(x):
    """log Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma needs x > 0")
    out = special.gammaln(x)
    return out.item() if out.ndim == 0 else out


def log_binom(n, k):
    """log C(n, k) for real n >= k >= 0."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    out = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    return out.item() if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class RngStream:
    """Reproducible, independent streams keyed by (master_seed, stream_id).

    Backed by numpy's counter-based Philox generator keyed through
    SeedSequence, so sequences are platform independent.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.master_seed, stream_id)


def rng_stream(master_seed: int, stream_id: int = 0) -> np.random.Generator:
    return RngStream(master_seed, stream_id).generator()


def complex_gaussian(rng: np.random.Generator, size=None) -> np.ndarray:
    """Standard complex Gaussians with E|g|^2 = 1."""
    x = rng.standard_normal(size=(2,) if size is None else (2, *np.atleast_1d(size)))
    return (x[0] + 1j * x[1]) * np.sqrt(0.5)
