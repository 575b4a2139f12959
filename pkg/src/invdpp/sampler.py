"""Exact samplers for the rank-N projection processes.

The main path is the sequential (chain-rule) sampler for projection DPPs:
point j+1 has density (K(x,x) - sum_i |e_i(x)|^2) / (N - j), where e_i is an
orthonormal basis of span{K(., x_1), ..., K(., x_j)}. Each draw is a rejection
step against the base intensity K(x,x) / N.

For the sphere there is an independent route through the eigenvalues of
A^{-1} B with A, B independent Ginibre matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg as sla

from . import eigen
from .geometry import SpaceKind
from .kernels import BasisEvaluator, KernelSpec, log_diagonal_terms
from .numerics import RngStream, complex_gaussian

NEGATIVITY_TOL = 1e-9
PIVOT_RATIO = 1e-12
MAX_TRUNCATION = 1_000_000


class SamplingError(RuntimeError):
    """Sampling failed; ``diagnostics`` describes where."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class SampleConfig:
    spec: KernelSpec
    stream: RngStream
    window_radius: float = np.inf
    max_rejections: int = 10_000_000

    def __post_init__(self):
        if self.spec.truncation_rank is None:
            raise ValueError("sampling needs a finite truncation rank")
        if self.spec.space is SpaceKind.HYPERBOLIC and not self.window_radius < 1:
            raise ValueError("hyperbolic window radius must be < 1")
        if self.max_rejections <= 0:
            raise ValueError("max_rejections must be positive")


@dataclass
class PointSample:
    points: np.ndarray
    spec: KernelSpec
    rejection_count: int = 0
    stream_id: int = 0
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)


# -- truncation -----------------------------------------------------------------

def kernel_tail(space, rho: float, radius: float, n: int) -> float:
    """sup over |z| <= radius of the dropped diagonal mass sum_{k>=n} |psi_k(z)|^2.

    Each term grows with |z|, so the supremum sits on the window edge.
    """
    tails = _log_tails(KernelSpec(space, rho), radius, n + 1)
    return float(np.exp(tails[n]))


def _log_tails(spec: KernelSpec, radius: float, kmin: int) -> np.ndarray:
    """log sum_{k>=n} term_k for n = 0..K, with K beyond kmin and the geometric regime."""
    rho = float(spec.rho)
    r2 = radius * radius
    # term ratio: plane rho r^2/(k+1); hyperbolic r^2 (rho+k+1)/(k+1), both decreasing in k
    if spec.space is SpaceKind.PLANE:
        k_geo = int(np.ceil(2 * rho * r2))
    else:
        if r2 >= 1:
            raise TruncationError("hyperbolic window must be inside the unit disk")
        k_geo = int(np.ceil((rho * r2) / ((1 - r2) * 0.5) + 1))
    kmax = max(kmin + 2, 2 * k_geo + 64)
    while kmax <= MAX_TRUNCATION:
        logt = log_diagonal_terms(spec, radius, kmax)
        last_ratio = np.exp(logt[-1] - logt[-2])
        if last_ratio < 1:
            # remainder beyond kmax is dominated by a geometric series
            rem = logt[-1] + np.log(last_ratio) - np.log1p(-last_ratio) if last_ratio > 0 else -np.inf
            acc = np.logaddexp.accumulate(np.concatenate([[rem], logt[::-1]]))
            return acc[::-1]
        kmax *= 2
    raise TruncationError("tail tolerance not reachable within the truncation cap")


def truncation_choice(rho: float, window_radius: float, tail_tol: float, space=SpaceKind.PLANE) -> int:
    """Smallest rank N with kernel_tail(rho, R, N) <= tail_tol (at least 1).

    The tail is the weighted diagonal mass dropped on the window |z| <= R;
    for the plane it is (rho/pi) P(Poisson(rho R^2) >= N).
    """
    space = SpaceKind.parse(space)
    if space is SpaceKind.SPHERE:
        raise ValueError("the sphere has finite rank rho")
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    spec = KernelSpec(space, rho)
    if window_radius <= 0:
        return 1
    log_eps = np.log(tail_tol)
    kmin = 16
    while True:
        tails = _log_tails(spec, window_radius, kmin)
        ok = np.nonzero(tails <= log_eps)[0]
        if ok.size:
            return max(1, int(ok[0]))
        kmin = 2 * len(tails)
        if kmin > MAX_TRUNCATION:
            raise TruncationError("tail tolerance not reachable within the truncation cap")


# -- proposals ------------------------------------------------------------------

def _radius_squared(spec: KernelSpec, k: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    rho = float(spec.rho)
    if spec.space is SpaceKind.PLANE:
        return rng.gamma(k + 1.0, 1.0 / rho)
    one = np.nextafter(1.0, 0.0)
    if spec.space is SpaceKind.SPHERE:
        u = np.minimum(rng.beta(k + 1.0, rho - k), one)
        return u / (1.0 - u)
    return np.minimum(rng.beta(k + 1.0, rho), one)


def sample_base_intensity(spec: KernelSpec, rng: np.random.Generator, size: Optional[int] = None):
    """Draw from K(x,x) dx / N: a uniform mixture of the |psi_k|^2, k < N.

    |psi_k|^2 is radial with |z|^2 ~ Gamma(k+1, 1/rho) on the plane,
    |z|^2/(1+|z|^2) ~ Beta(k+1, rho-k) on the sphere and
    |z|^2 ~ Beta(k+1, rho) on the disk; the angle is uniform.
    """
    n = spec.truncation_rank
    m = 1 if size is None else size
    u = rng.random(2 * m)
    k = np.minimum(np.floor(n * u[:m]), n - 1)
    r = np.sqrt(_radius_squared(spec, k, rng))
    z = r * np.exp(2j * np.pi * u[m:])
    return complex(z[0]) if size is None else z


def sample_projection(cfg: SampleConfig) -> PointSample:
    spec = cfg.spec
    n = spec.truncation_rank
    rng = cfg.stream.generator()
    basis = BasisEvaluator(spec, n)
    coeffs = np.zeros((n, n), dtype=complex)  # row i: e_i in the psi basis
    points = np.empty(n, dtype=complex)
    rejections = 0
    worst = 0.0
    for j in range(n):
        remaining = n - j
        batch = int(min(4096, max(4, np.ceil(1.5 * n / remaining))))
        while True:
            x = sample_base_intensity(spec, rng, batch)
            v = basis(x)
            vr = v.view(float)
            diag = np.einsum("ij,ij->i", vr, vr)
            if j:
                proj = (v @ coeffs[:j].T).view(float)
                taken = np.einsum("ij,ij->i", proj, proj)
            else:
                taken = 0.0
            resid = diag - taken
            rel = resid / diag
            worst = min(worst, float(rel.min()))
            if np.any(rel < -NEGATIVITY_TOL):
                raise SamplingError(
                    "conditional density negative: orthonormal basis lost accuracy",
                    point_index=j, relative_residual=float(rel.min()),
                )
            u = rng.random(batch)
            hit = np.nonzero(u < rel)[0]
            if hit.size:
                i = int(hit[0])
                rejections += i
                break
            rejections += batch
            if rejections > cfg.max_rejections:
                raise SamplingError(
                    "rejection budget exhausted", point_index=j, rejections=rejections,
                )
        points[j] = x[i]
        w = np.conj(v[i])
        for _ in range(2):  # Gram-Schmidt, repeated once to restore orthogonality
            if j:
                w = w - coeffs[:j].T @ (np.conj(coeffs[:j]) @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            raise SamplingError("degenerate point (zero residual)", point_index=j)
        coeffs[j] = w / nrm
    return PointSample(
        points=points,
        spec=spec,
        rejection_count=rejections,
        stream_id=cfg.stream.stream_id,
        extra={"min_relative_residual": worst},
    )


def sample_sphere_matrix_model(rho: int, stream: RngStream, max_resamples: int = 100) -> PointSample:
    """Eigenvalues of A^{-1} B for independent rho x rho Ginibre A, B."""
    rho = int(rho)
    if rho < 1:
        raise ValueError("rho must be >= 1")
    rng = stream.generator()
    b = complex_gaussian(rng, (rho, rho))
    resampled = 0
    while True:
        a = complex_gaussian(rng, (rho, rho))
        lu, piv = sla.lu_factor(a, check_finite=False)
        d = np.abs(np.diag(lu))
        if d.min() > PIVOT_RATIO * d.max():
            break
        resampled += 1
        if resampled > max_resamples:
            raise SamplingError("A is numerically singular too often", resamples=resampled)
    x = sla.lu_solve((lu, piv), b, check_finite=False)
    try:
        ev = eigen.eigvals(x, max_iter=100 * rho)
    except eigen.ConvergenceError as exc:
        raise SamplingError(str(exc), rho=rho) from exc
    return PointSample(
        points=ev,
        spec=KernelSpec(SpaceKind.SPHERE, rho),
        rejection_count=resampled,
        stream_id=stream.stream_id,
        extra={"a_resamples": resampled},
    )


def sample_many(spec: KernelSpec, master_seed: int, count: int, window_radius=np.inf,
                first_stream: int = 0, jobs: int = 1) -> list[PointSample]:
    """Independent replicates on streams first_stream .. first_stream+count-1."""
    cfgs = [SampleConfig(spec, RngStream(master_seed, first_stream + i), window_radius) for i in range(count)]
    if jobs <= 1:
        return [sample_projection(c) for c in cfgs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(sample_projection, cfgs, chunksize=max(1, count // (4 * jobs))))
