"""Linear statistics: norms, trace-formula moments, quadrature variance,
reproducing residuals, the alpha constant and Monte Carlo summaries.

Trace formulas work in the orthonormal basis psi_0..psi_{N-1} of the rank-N
kernel. For a function g the Gram matrix ``G_ab = int conj(psi_a) g psi_b dz``
is computed by an FFT in the angle and Gauss-Legendre panels in the radius;
then for example

    Var(sum f) = tr(M(f^2)) - tr(M(f) M(f)),

and cumulants of every order are traces of products of the M(f^j).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special, stats

from . import combinatorics
from .geometry import (
    SpaceKind,
    _pseudo_chordal,
    distance_from_origin,
    intrinsic_gradient_norm,
    invariant_density,
)
from .kernels import (
    BasisEvaluator,
    KernelSpec,
    invariant_kernel_sq_radial,
    log_basis_modulus,
    log_reference_density,
)
from .numerics import (
    DEFAULT_1D,
    DEFAULT_2D,
    DEFAULT_4D,
    QuadratureConfig,
    QuadResult,
    RngStream,
    gauss_legendre,
    integrate_disk,
    integrate_invariant,
    integrate_pair,
    integrate_radial,
)
from .sampler import PointSample, truncation_choice
from .testfunctions import TestFunction

#: relative tail mass tolerated when an infinite-rank kernel is truncated
#: for trace formulas (squared-kernel errors scale like its square root)
TRACE_TAIL_TOL = 1e-24


# -- basic functionals ------------------------------------------------------------

def linear_statistic(sample: PointSample, f: TestFunction) -> float:
    """sum over the points of f."""
    if len(sample.points) == 0:
        return 0.0
    return float(np.sum(f(sample.points)))


def integral_nu(f: TestFunction, space, cfg: QuadratureConfig = DEFAULT_2D) -> QuadResult:
    """int f d(nu) over the support of f."""
    return integrate_invariant(f, space, f.support_radius, cfg, (f.support_radius,))


def expected_statistic(spec: KernelSpec, f: TestFunction) -> float:
    """(rho/pi) int f d(nu), the mean of the linear statistic."""
    return spec.rho / np.pi * integral_nu(f, spec.space).value


def centered_statistic(sample: PointSample, f: TestFunction, spec: Optional[KernelSpec] = None,
                       mean: Optional[float] = None) -> float:
    """linear_statistic - (rho/pi) int f d(nu); ``mean`` skips the quadrature."""
    spec = sample.spec if spec is None else spec
    mean = expected_statistic(spec, f) if mean is None else mean
    return linear_statistic(sample, f) - mean


def h1_norm_sq(f: TestFunction, space=SpaceKind.PLANE, route: str = "planar",
               cfg: QuadratureConfig = DEFAULT_2D) -> float:
    """Dirichlet energy int |grad f|^2 dz.

    ``route="planar"`` integrates the planar gradient in chart polar
    coordinates; ``route="intrinsic"`` integrates |grad_iota f|^2 d(nu) in
    geodesic polar coordinates of ``space``. Both give the same number
    because the energy is conformally invariant.
    """
    R = f.support_radius
    if route == "planar":
        def integrand(z):
            g = f.gradient(z)
            return g[..., 0] ** 2 + g[..., 1] ** 2
        return integrate_disk(integrand, 0j, R, cfg, (R,)).value
    if route == "intrinsic":
        def integrand(z):
            return np.asarray(intrinsic_gradient_norm(space, f.gradient(z), z)) ** 2
        return integrate_invariant(integrand, space, R, cfg, (R,)).value
    raise ValueError(f"unknown route {route!r}")


def l1_norm_invariant(f: TestFunction, space, cfg: QuadratureConfig = DEFAULT_2D) -> float:
    return integrate_invariant(lambda z: np.abs(f(z)), space, f.support_radius, cfg,
                               (f.support_radius,)).value


def asymptotic_variance(f: TestFunction) -> float:
    """||f||^2_{H^1} / (4 pi)."""
    return h1_norm_sq(f) / (4 * np.pi)


# -- Gram matrices ------------------------------------------------------------------

def trace_rank(spec: KernelSpec, radius: float) -> int:
    """Rank used by trace formulas for functions supported in |z| <= radius."""
    if spec.truncation_rank is not None:
        return spec.truncation_rank
    tol = TRACE_TAIL_TOL * spec.rho / np.pi
    return truncation_choice(spec.rho, radius, tol, spec.space)


def resolve_spec(spec: KernelSpec, radius: float) -> KernelSpec:
    """A finite-rank spec adequate for functions supported in |z| <= radius."""
    return spec.with_rank(trace_rank(spec, radius))


def _chart_radius_for(spec: KernelSpec, radius: float, n: int) -> float:
    """Finite integration radius in the chart coordinate."""
    if np.isfinite(radius):
        return float(radius)
    if spec.space is SpaceKind.PLANE:
        # beyond this the psi_k, k < n, carry less than e^-60 of their mass
        return float(np.sqrt((n + 12 * np.sqrt(n) + 60) / spec.rho))
    if spec.space is SpaceKind.HYPERBOLIC:
        return 1.0
    return np.inf


def _radial_rule(spec: KernelSpec, radius: float, breakpoints, n: int, resolution: int = 1):
    """Nodes r_i and log of (weight_i * r_i * dr/ds) for int_0^radius h(r) r dr.

    The integration variable s is r (plane, disk) or arctan r (sphere), which
    makes every |psi_a psi_b| r a trigonometric polynomial on the sphere.
    Panels have width <= 1/sqrt(rho) in s and break at ``breakpoints``.
    """
    radius = _chart_radius_for(spec, radius, n)
    sphere = spec.space is SpaceKind.SPHERE
    to_s = (lambda r: np.arctan(r)) if sphere else (lambda r: r)
    s_max = np.pi / 2 if (sphere and not np.isfinite(radius)) else float(to_s(radius))
    brk = sorted({0.0, s_max, *[float(to_s(b)) for b in breakpoints if 0 < b < radius]})
    h = 1.0 / np.sqrt(spec.rho)
    x, w = gauss_legendre(20 * resolution)
    nodes, weights = [], []
    for lo, hi in zip(brk[:-1], brk[1:]):
        k = max(1, int(np.ceil((hi - lo) / h)))
        e = np.linspace(lo, hi, k + 1)
        for a, b in zip(e[:-1], e[1:]):
            nodes.append(a + (b - a) * x)
            weights.append((b - a) * w)
    s = np.concatenate(nodes)
    ws = np.concatenate(weights)
    if sphere:
        r = np.tan(s)
        logjac = np.log1p(r * r)
    else:
        r = s
        logjac = np.zeros_like(r)
    return r, np.log(ws) + np.log(r) + logjac


def _angular_modes(g: Callable, r: np.ndarray, n_theta: int = 64, max_theta: int = 8192,
                   tol: float = 1e-15):
    """g_hat[m](r) = int_0^2pi g(r e^{i theta}) e^{i m theta} d theta for all m (FFT).

    Doubles the angular resolution until the upper half of the spectrum is
    negligible. Returns the (n_r, n_theta) array indexed by m mod n_theta.
    """
    while True:
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        vals = g(np.multiply.outer(r, np.exp(1j * theta)))
        vals = np.broadcast_to(np.asarray(vals, dtype=complex), (r.size, n_theta))
        ghat = 2 * np.pi * np.fft.ifft(vals, axis=1)
        scale = np.abs(ghat).max()
        m = np.abs(np.fft.fftfreq(n_theta, 1.0 / n_theta))
        tail = np.abs(ghat[:, m >= n_theta // 4]).max() if n_theta >= 8 else scale
        if tail <= tol * max(scale, 1e-300) or n_theta >= max_theta:
            return ghat, n_theta
        n_theta *= 2


def matrix_elements(spec: KernelSpec, g: Callable, n: Optional[int] = None,
                    radius: float = np.inf, breakpoints: Sequence[float] = (),
                    resolution: int = 1, hermitian: Optional[bool] = None) -> np.ndarray:
    """G_ab = int_{|z| <= radius} conj(psi_a(z)) g(z) psi_b(z) dz for a, b < n.

    ``g`` maps a complex array to a real or complex array. For real ``g``
    the result is symmetrised to be exactly Hermitian.
    """
    n = spec.truncation_rank if n is None else n
    if n is None:
        raise ValueError("number of basis functions required (spec has infinite rank)")
    r, logw = _radial_rule(spec, radius, breakpoints, n, resolution)
    ks = np.arange(n)
    psi = np.exp(log_basis_modulus(spec, r, ks) + 0.5 * logw[:, None])  # (n_r, n)
    ghat, n_theta = _angular_modes(g, r)
    scale = np.abs(ghat).max()
    out = np.zeros((n, n), dtype=complex)
    mmax = min(n - 1, n_theta // 2 - 1)
    for m in range(-mmax, mmax + 1):
        gm = ghat[:, m % n_theta]
        if np.abs(gm).max() <= 1e-15 * max(scale, 1e-300):
            continue
        am = abs(m)
        band = np.einsum("ia,ia,i->a", psi[:, : n - am], psi[:, am:], gm)
        if m >= 0:
            out[np.arange(n - am), np.arange(am, n)] = band  # b = a + m
        else:
            out[np.arange(am, n), np.arange(n - am)] = band  # a = b + |m|
    if hermitian is None:
        probe = g(np.array([0.3 + 0.2j, -0.1 + 0.05j]) * min(1.0, radius))
        hermitian = np.isrealobj(probe) or np.allclose(np.imag(probe), 0)
    if hermitian:
        out = 0.5 * (out + out.conj().T)
    return out


def _power_matrices(spec: KernelSpec, f: TestFunction, kmax: int, resolution: int = 1):
    spec_n = resolve_spec(spec, f.support_radius)
    R = f.support_radius
    mats = [
        matrix_elements(spec_n, (lambda z, j=j: f(z) ** j), radius=R, breakpoints=(R,),
                        resolution=resolution, hermitian=True)
        for j in range(1, kmax + 1)
    ]
    return spec_n, mats


def mean_trace(spec: KernelSpec, f: TestFunction, resolution: int = 1) -> float:
    _, (F,) = _power_matrices(spec, f, 1, resolution)
    return float(np.trace(F).real)


def variance_trace(spec: KernelSpec, f: TestFunction, resolution: int = 1) -> float:
    """tr(M(f^2)) - tr(M(f)^2) for the rank-N kernel."""
    _, (F, F2) = _power_matrices(spec, f, 2, resolution)
    return float(np.trace(F2).real - np.sum(np.abs(F) ** 2))


def covariance_trace(spec: KernelSpec, f: Callable, g: Callable, radius: float,
                     breakpoints=(), resolution: int = 1) -> float:
    """Cov(sum f, sum g) = tr(M(fg)) - tr(M(f) M(g)) over |z| <= radius."""
    spec_n = resolve_spec(spec, radius)
    kw = dict(radius=radius, breakpoints=tuple(breakpoints) + (radius,), resolution=resolution,
              hermitian=True)
    Mfg = matrix_elements(spec_n, lambda z: f(z) * g(z), **kw)
    Mf = matrix_elements(spec_n, f, **kw)
    Mg = matrix_elements(spec_n, g, **kw)
    return float(np.trace(Mfg).real - np.sum(Mf * Mg.T).real)


def cumulant_coefficients(k: int) -> list[tuple[tuple[int, ...], Fraction]]:
    """(composition, k! (-1)^(m-1) / (m k_1! ... k_m!)) for every composition of k."""
    out = []
    for c in combinatorics.compositions(k):
        m = len(c)
        denom = m
        for part in c:
            denom *= factorial(part)
        out.append((c, Fraction((-1) ** (m - 1) * factorial(k), denom)))
    return out


def cumulant_trace(spec: KernelSpec, f: TestFunction, k: int, resolution: int = 1) -> float:
    """k-th cumulant of the linear statistic from traces of M(f^j) products."""
    if not 1 <= k <= 4:
        raise ValueError("cumulants are provided for 1 <= k <= 4")
    _, mats = _power_matrices(spec, f, k, resolution)
    total = 0.0
    for comp, coef in cumulant_coefficients(k):
        prod = mats[comp[0] - 1]
        for part in comp[1:]:
            prod = prod @ mats[part - 1]
        total += float(coef) * np.trace(prod).real
    return float(total)


# -- quadrature variance ------------------------------------------------------------

def _kernel_reach(space: SpaceKind, rho: float, tol: float) -> float:
    """a with int_{|zeta| > a} |K_inv(0, zeta)|^2 d(nu) <= tol * rho / pi."""
    if space is SpaceKind.PLANE:
        return float(np.sqrt(-np.log(tol) / rho))
    if space is SpaceKind.SPHERE:
        return float(np.sqrt(np.expm1(-np.log(tol) / rho)))
    return float(np.sqrt(-np.expm1(np.log(tol) / rho)))


def variance_quadrature(spec: KernelSpec, f: TestFunction, cfg: QuadratureConfig = DEFAULT_4D,
                        resolution: int = 1, tail_tol: float = 1e-13,
                        max_resolution: int = 4) -> QuadResult:
    """1/2 int int (f(z) - f(w))^2 |K_inv(z, w)|^2 d(nu) d(nu), exact kernel.

    The inner variable is w = T_z^{-1}(zeta), zeta = t e^{i phi}/sqrt(rho),
    so the kernel factor is a fixed radial function of |zeta|. The rule is
    refined from ``resolution`` up to ``max_resolution`` until its error
    estimate meets ``cfg``.
    """
    space, rho = spec.space, float(spec.rho)
    R = f.support_radius
    a = _kernel_reach(space, rho, tail_tol)
    d_out = float(distance_from_origin(space, R)) + float(distance_from_origin(space, a))
    if space is SpaceKind.SPHERE and d_out >= np.pi / 2:
        outer = np.inf
    elif space is SpaceKind.PLANE:
        outer = d_out
    elif space is SpaceKind.SPHERE:
        outer = float(np.tan(d_out))
    else:
        outer = float(np.tanh(d_out))

    def integrand(z, w):
        kz = invariant_kernel_sq_radial(space, rho, _pseudo_chordal(space, z, w))
        return 0.5 * (f(z) - f(w)) ** 2 * kz

    while True:
        res = integrate_pair(integrand, space, rho, outer, a * np.sqrt(rho), cfg, (R,), resolution)
        if res.converged or resolution >= max_resolution:
            return res
        resolution += 1


# -- reproducing residuals ----------------------------------------------------------

def _grid(radius: float, grid) -> np.ndarray:
    n_r, n_t = grid
    rs = np.linspace(0, radius, n_r)
    th = 2 * np.pi * np.arange(n_t) / n_t
    pts = np.multiply.outer(rs[1:], np.exp(1j * th)).ravel()
    return np.concatenate([[0j], pts])


def llap_residual(spec: KernelSpec, p: int, B: float, B2: float, grid=(9, 16),
                  conjugate: bool = False) -> float:
    """sup over x, z in the B2 grid of |x^p K(x,z) - int_{|y|<=B} K(x,y) y^p K(y,z) dy|.

    With ``conjugate`` the multiplier is conj(y)^p and the reference term
    K(x,z) conj(z)^p.
    """
    if p not in (0, 1, 2):
        raise ValueError("p must be 0, 1 or 2")
    if not 0 < B2 <= B:
        raise ValueError("need 0 < B2 <= B")
    spec_n = resolve_spec(spec, B)
    if conjugate:
        g = lambda y: np.conj(y) ** p  # noqa: E731
    else:
        g = lambda y: y ** p  # noqa: E731
    G = matrix_elements(spec_n, lambda y: g(y) * np.ones_like(y), radius=B, breakpoints=(B,),
                        hermitian=(p == 0))
    pts = _grid(B2, grid)
    V = BasisEvaluator(spec_n)(pts)  # (P, n)
    K = V @ V.conj().T
    if conjugate:
        ref = K * (np.conj(pts) ** p)[None, :]
    else:
        ref = (pts ** p)[:, None] * K
    return float(np.abs(ref - V @ G @ V.conj().T).max())


def co_residual(spec: KernelSpec, F: TestFunction, B: float, resolution: int = 1) -> float:
    """|Cov(sum dF/dz dzbar, sum |z|^2 1_{|z| <= B})| by trace formulas."""
    if F.support_radius > B:
        raise ValueError("F must be supported inside |z| <= B")
    return abs(covariance_trace(spec, F.dzdzbar, lambda z: np.abs(z) ** 2, B,
                                (F.support_radius,), resolution))


# -- alpha ----------------------------------------------------------------------------

def alpha(spec: KernelSpec, cfg: QuadratureConfig = DEFAULT_1D) -> float:
    """(pi / eta(0)) int_0^R r dist(0, r)^2 |K(0, r)|^2 dr with the exact kernel.

    The raw kernel equals 1 at z = 0, so |K(0, r)|^2 = kappa(0) kappa(r).
    """
    space, rho = spec.space, float(spec.rho)
    ref = KernelSpec(space, spec.rho)
    log_k0 = float(log_reference_density(ref, 0.0))
    r_max = 1.0 if space is SpaceKind.HYPERBOLIC else np.inf

    def integrand(r):
        d = np.asarray(distance_from_origin(space, r))
        return r * d * d * np.exp(log_k0 + log_reference_density(ref, r))

    brk = [c / np.sqrt(rho) for c in (0.5, 1.0, 2.0, 4.0, 8.0)]
    brk = [b for b in brk if b < r_max]
    eta0 = float(invariant_density(space, 0j))
    return float(np.pi / eta0 * integrate_radial(integrand, r_max, cfg, brk).value)


# -- Monte Carlo summaries ------------------------------------------------------------

def k_statistics(x: np.ndarray, axis: int = -1) -> tuple[np.ndarray, ...]:
    """Unbiased cumulant estimators k1..k4 along ``axis`` (NaN if too few values)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    mean = x.mean(axis=axis, keepdims=True)
    d = x - mean
    m2 = np.mean(d ** 2, axis=axis)
    m3 = np.mean(d ** 3, axis=axis)
    m4 = np.mean(d ** 4, axis=axis)
    nan = np.full_like(m2, np.nan)
    k1 = np.squeeze(mean, axis=axis)
    k2 = n / (n - 1) * m2 if n > 1 else nan
    k3 = n * n / ((n - 1) * (n - 2)) * m3 if n > 2 else nan
    k4 = (n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 ** 2) / ((n - 1) * (n - 2) * (n - 3))
          if n > 3 else nan)
    return k1, k2, k3, k4


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    se: float


@dataclass
class MomentReport:
    mean: MomentEstimate
    variance: MomentEstimate
    cum3: MomentEstimate
    cum4: MomentEstimate
    predictions: dict  # name -> (trace-formula value, asymptotic value)
    count: int
    spec: dict
    flags: list = field(default_factory=list)

    def within(self, name: str, target: float, n_se: float = 4.0) -> bool:
        est = getattr(self, name)
        return bool(abs(est.value - target) <= n_se * est.se)


def moment_report(values: Sequence[float], predictions: Optional[dict] = None,
                  spec_echo: Optional[dict] = None, n_boot: int = 1000,
                  seed: int = 0) -> MomentReport:
    """k-statistics of ``values`` with bootstrap standard errors."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("no values")
    est = [float(v) for v in k_statistics(x)]
    flags = []
    if n > 1:
        rng = RngStream(seed, 0x5EED).generator()
        idx = rng.integers(0, n, size=(n_boot, n))
        boot = k_statistics(x[idx], axis=1)
        ses = [float(np.std(b, ddof=1)) for b in boot]
    else:
        ses = [np.nan] * 4
        flags.append("standard errors undefined for a single value")
    parts = [MomentEstimate(v, s) for v, s in zip(est, ses)]
    return MomentReport(*parts, predictions=predictions or {}, count=n, spec=spec_echo or {},
                        flags=flags)


def empirical_report(samples: Sequence[PointSample], f: TestFunction, spec: KernelSpec,
                     predict: bool = True, n_boot: int = 1000, seed: int = 0) -> MomentReport:
    """Moments of the centred statistic over ``samples`` with trace predictions."""
    mean = expected_statistic(spec, f)
    values = [centered_statistic(s, f, spec, mean) for s in samples]
    preds = {}
    if predict:
        asym = asymptotic_variance(f)
        preds = {
            "mean": (mean_trace(spec, f) - mean, 0.0),
            "variance": (variance_trace(spec, f), asym),
            "cum3": (cumulant_trace(spec, f, 3), 0.0),
            "cum4": (cumulant_trace(spec, f, 4), 0.0),
        }
    echo = {"space": spec.space.value, "rho": spec.rho, "rank": spec.truncation_rank,
            "f": f.label}
    return moment_report(values, preds, echo, n_boot, seed)


@dataclass(frozen=True)
class NormalityReport:
    n: int
    ks_statistic: float
    ks_pvalue: float
    ad_statistic: float
    ad_pvalue: float

    def passes(self, level: float = 0.01) -> bool:
        return self.ks_pvalue > level and self.ad_pvalue > level


def anderson_darling_statistic(z: np.ndarray) -> float:
    """A^2 of ``z`` against the fully specified standard normal."""
    z = np.sort(np.asarray(z, dtype=float))
    n = z.size
    i = np.arange(1, n + 1)
    logcdf = special.log_ndtr(z)
    logsf = special.log_ndtr(-z[::-1])
    return float(-n - np.sum((2 * i - 1) * (logcdf + logsf)) / n)


def anderson_darling_pvalue(a2: float) -> float:
    """Upper tail of the limiting A^2 distribution (Marsaglia's approximation)."""
    if a2 <= 0:
        return 1.0
    if a2 < 2:
        cdf = (np.exp(-1.2337141 / a2) / np.sqrt(a2)
               * (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * a2)
                                                      * a2) * a2) * a2) * a2))
    else:
        cdf = np.exp(-np.exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * a2)
                                                             * a2) * a2) * a2) * a2))
    return float(min(1.0, max(0.0, 1.0 - cdf)))


def normality_test(values: Sequence[float], predicted_var: float, mean: float = 0.0) -> NormalityReport:
    """KS and Anderson-Darling tests of (values - mean)/sqrt(predicted_var) against N(0, 1)."""
    if not predicted_var > 0:
        raise ValueError("predicted variance must be positive")
    z = (np.asarray(values, dtype=float) - mean) / np.sqrt(predicted_var)
    ks = stats.kstest(z, "norm")
    a2 = anderson_darling_statistic(z)
    return NormalityReport(z.size, float(ks.statistic), float(ks.pvalue), a2,
                           anderson_darling_pvalue(a2))
