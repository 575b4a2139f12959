"""Projection kernels of the three invariant models.

Raw kernel ``Kr(z, w)`` is taken with respect to the reference measure
``kappa(z) dz``; the weighted kernel ``K(z, w) = Kr(z, w) sqrt(kappa(z) kappa(w))``
is with respect to Lebesgue measure, and the invariant kernel
``K_inv = K / sqrt(eta(z) eta(w))`` with respect to the invariant measure.

Everything is assembled from log-magnitudes and phases so that rho in the
thousands does not overflow.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import SpaceKind, check_domain, invariant_density
from .numerics import log_binom, log_gamma

LOG_PI = np.log(np.pi)


@dataclass(frozen=True)
class KernelSpec:
    """Model, density parameter and rank.

    ``truncation_rank=None`` means the exact infinite-rank kernel (closed
    form) for the plane and hyperbolic models. For the sphere the rank is
    always rho.
    """

    space: SpaceKind
    rho: float
    truncation_rank: Optional[int] = field(default=None)

    def __post_init__(self):
        space = SpaceKind.parse(self.space)
        object.__setattr__(self, "space", space)
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if space is SpaceKind.SPHERE:
            if float(self.rho) != int(self.rho):
                raise ValueError("the spherical model needs an integer rho")
            object.__setattr__(self, "rho", int(self.rho))
            if self.truncation_rank not in (None, self.rho):
                raise ValueError("sphere truncation_rank must equal rho")
            object.__setattr__(self, "truncation_rank", int(self.rho))
        elif self.truncation_rank is not None and self.truncation_rank < 1:
            raise ValueError("truncation_rank must be >= 1")

    @property
    def finite(self) -> bool:
        return self.truncation_rank is not None

    def with_rank(self, n: Optional[int]) -> "KernelSpec":
        return KernelSpec(self.space, self.rho, n)


@dataclass(frozen=True)
class EnvelopeSpec:
    space: SpaceKind
    rho: float
    restriction_radius: float = 0.0

    def __post_init__(self):
        space = SpaceKind.parse(self.space)
        object.__setattr__(self, "space", space)
        if space is not SpaceKind.PLANE and self.rho < 2:
            raise ValueError("envelope bounds need rho >= 2")
        if space is SpaceKind.HYPERBOLIC and not 0 <= self.restriction_radius < 1:
            raise ValueError("hyperbolic restriction radius must lie in [0, 1)")


# -- coefficients and densities -------------------------------------------------

def log_coefficient_sq(spec: KernelSpec, k):
    """log c_k^2, the squared coefficient of (z conj(w))^k in the raw kernel."""
    k = np.asarray(k, dtype=float)
    rho = float(spec.rho)
    if spec.space is SpaceKind.PLANE:
        return k * np.log(rho) - log_gamma(k + 1)
    if spec.space is SpaceKind.SPHERE:
        if np.any(k > rho - 1):
            raise ValueError("sphere basis index must be < rho")
        return log_binom(rho - 1, k)
    return log_binom(rho + k, k)


def log_reference_density(spec: KernelSpec, z):
    r2 = np.abs(np.asarray(z)) ** 2
    rho = float(spec.rho)
    base = np.log(rho) - LOG_PI
    if spec.space is SpaceKind.PLANE:
        return base - rho * r2
    if spec.space is SpaceKind.SPHERE:
        return base - (rho + 1) * np.log1p(r2)
    return base + (rho - 1) * np.log1p(-r2)


def reference_density(spec: KernelSpec, z):
    z = check_domain(spec.space, z)
    out = np.exp(log_reference_density(spec, z))
    return out.item() if np.ndim(out) == 0 else out


def _log_raw_closed(spec: KernelSpec, u):
    """log of the closed-form raw kernel as a function of u = z conj(w)."""
    rho = float(spec.rho)
    if spec.space is SpaceKind.PLANE:
        return rho * u
    if spec.space is SpaceKind.SPHERE:
        if rho == 1:
            return np.zeros(np.shape(u), dtype=complex)
        return (rho - 1) * np.log(1 + u + 0j)
    return -(rho + 1) * np.log(1 - u + 0j)


def _rank(spec: KernelSpec) -> Optional[int]:
    return spec.truncation_rank


# -- basis ----------------------------------------------------------------------

def log_basis_modulus(spec: KernelSpec, r, ks):
    """log |psi_k| at modulus r for the index array ks; shape r.shape + ks.shape."""
    r = np.asarray(r, dtype=float)
    ks = np.asarray(ks)
    logc = 0.5 * log_coefficient_sq(spec, ks)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(r)[..., None]
        kr = np.where(ks == 0, 0.0, ks * logr)
    return logc + kr + 0.5 * log_reference_density(spec, r)[..., None]


def basis_matrix(spec: KernelSpec, z, n: Optional[int] = None) -> np.ndarray:
    """psi_k(z) for k < n, shape z.shape + (n,)."""
    n = spec.truncation_rank if n is None else n
    if n is None:
        raise ValueError("an explicit number of basis functions is required")
    z = check_domain(spec.space, z)
    ks = np.arange(n)
    mod = np.exp(log_basis_modulus(spec, np.abs(z), ks))
    return mod * np.exp(1j * np.multiply.outer(np.angle(z), ks))


class BasisEvaluator:
    """Evaluates (psi_0(z), ..., psi_{n-1}(z)) with the coefficients cached."""

    def __init__(self, spec: KernelSpec, n: Optional[int] = None):
        n = spec.truncation_rank if n is None else n
        if n is None:
            raise ValueError("an explicit number of basis functions is required")
        self.spec = spec
        self.n = n
        self.ks = np.arange(n)
        self.half_logc = 0.5 * log_coefficient_sq(spec, self.ks)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            logz = np.log(z)[..., None]
            expo = self.ks * logz
        expo[..., 0] = 0.0
        expo += self.half_logc + 0.5 * log_reference_density(self.spec, z)[..., None]
        return np.exp(expo)


def basis_function(spec: KernelSpec, k: int, z):
    if k < 0 or (spec.truncation_rank is not None and k >= spec.truncation_rank):
        raise IndexError("basis index out of range")
    z = check_domain(spec.space, z)
    out = np.exp(log_basis_modulus(spec, np.abs(z), np.array([k]))[..., 0]) * np.exp(1j * k * np.angle(z))
    return out.item() if np.ndim(out) == 0 else out


# -- kernels --------------------------------------------------------------------

def _truncated_log_sum(spec: KernelSpec, z, w, n: int, extra_log=0.0):
    """sum_{k<n} c_k^2 (z conj w)^k e^{extra_log}, summed in log domain."""
    u = z * np.conj(w)
    ks = np.arange(n)
    logc = log_coefficient_sq(spec, ks)
    with np.errstate(divide="ignore", invalid="ignore"):
        logu = np.log(np.abs(u))[..., None]
        logs = logc + np.where(ks == 0, 0.0, ks * logu) + np.asarray(extra_log)[..., None]
    m = np.max(logs, axis=-1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    phase = np.exp(1j * np.multiply.outer(np.angle(u), ks))
    s = np.sum(np.exp(logs - m) * phase, axis=-1)
    return s * np.exp(m[..., 0])


def kernel_raw(spec: KernelSpec, z, w):
    z = check_domain(spec.space, z)
    w = check_domain(spec.space, w)
    z, w = np.broadcast_arrays(z, w)
    n = _rank(spec)
    if n is None or spec.space is SpaceKind.SPHERE:
        out = np.exp(_log_raw_closed(spec, z * np.conj(w)))
    else:
        out = _truncated_log_sum(spec, z, w, n)
    return out.item() if np.ndim(out) == 0 else out


def kernel_weighted(spec: KernelSpec, z, w):
    """K(z, w) = Kr(z, w) (kappa(z) kappa(w))^(1/2)."""
    z = check_domain(spec.space, z)
    w = check_domain(spec.space, w)
    z, w = np.broadcast_arrays(z, w)
    half = 0.5 * (log_reference_density(spec, z) + log_reference_density(spec, w))
    n = _rank(spec)
    if n is None and spec.space is SpaceKind.PLANE:
        # rho Re(z conj w) - rho(|z|^2 + |w|^2)/2 = -rho |z - w|^2 / 2, without cancellation
        rho = float(spec.rho)
        logmod = np.log(rho) - LOG_PI - 0.5 * rho * np.abs(z - w) ** 2
        out = np.exp(logmod + 1j * rho * np.imag(z * np.conj(w)))
    elif n is None or spec.space is SpaceKind.SPHERE:
        out = np.exp(_log_raw_closed(spec, z * np.conj(w)) + half)
    else:
        out = _truncated_log_sum(spec, z, w, n, half)
    return out.item() if np.ndim(out) == 0 else out


def kernel_diagonal(spec: KernelSpec, z):
    """K(z, z), real."""
    return np.real(kernel_weighted(spec, z, z))


def kernel_invariant(spec: KernelSpec, z, w):
    k = np.asarray(kernel_weighted(spec, z, w))
    scale = np.sqrt(np.asarray(invariant_density(spec.space, z)) * np.asarray(invariant_density(spec.space, w)))
    out = k / scale
    return out.item() if np.ndim(out) == 0 else out


def invariant_kernel_sq_radial(space: SpaceKind, rho: float, r):
    """|K_inv(0, w)|^2 for |w| = r and the exact (infinite rank) kernel.

    (rho/pi)^2 times exp(-rho r^2), (1 + r^2)^(1 - rho) or (1 - r^2)^(rho + 1).
    """
    space = SpaceKind.parse(space)
    r2 = np.asarray(r, dtype=float) ** 2
    c = (rho / np.pi) ** 2
    if space is SpaceKind.PLANE:
        return c * np.exp(-rho * r2)
    if space is SpaceKind.SPHERE:
        return c * np.exp(-(rho - 1) * np.log1p(r2))
    return c * np.exp((rho + 1) * np.log1p(-r2))


def kernel_truncated_sphere(spec: KernelSpec, p: int, z, w):
    """Weighted sphere kernel keeping only degrees k <= rho - 1 - p."""
    if spec.space is not SpaceKind.SPHERE:
        raise ValueError("the truncated kernel is defined for the sphere only")
    if p < 0 or spec.rho < 1 + p:
        raise ValueError("need 0 <= p <= rho - 1")
    z = check_domain(spec.space, z)
    w = check_domain(spec.space, w)
    z, w = np.broadcast_arrays(z, w)
    half = 0.5 * (log_reference_density(spec, z) + log_reference_density(spec, w))
    out = _truncated_log_sum(spec, z, w, spec.rho - p, half)
    return out.item() if np.ndim(out) == 0 else out


def envelope(env: EnvelopeSpec, s):
    """Radial dominating function phi_rho(s) for |K(z, w)| with s = z - w."""
    s2 = np.abs(np.asarray(s)) ** 2
    rho = float(env.rho)
    if env.space is SpaceKind.PLANE:
        out = rho / np.pi * np.exp(-rho * s2 / 2)
    elif env.space is SpaceKind.HYPERBOLIC:
        out = rho / (1 - env.restriction_radius) ** 2 * np.exp(-(rho - 1) * s2 / 8)
    else:
        b = (1 + env.restriction_radius ** 2) ** 2
        out = rho * np.exp(-(rho - 1) * s2 / (2 * b))
    return out.item() if np.ndim(out) == 0 else out


# -- truncation tails -----------------------------------------------------------

def log_diagonal_terms(spec: KernelSpec, radius: float, kmax: int) -> np.ndarray:
    """log of the k-th term c_k^2 R^{2k} kappa(R), k < kmax, of K(R, R)."""
    ks = np.arange(kmax, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr2 = np.log(radius ** 2)
        kr = np.where(ks == 0, 0.0, ks * logr2)
    return log_coefficient_sq(spec, ks) + kr + log_reference_density(spec, radius)
