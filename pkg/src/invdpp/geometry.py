"""The three symmetric spaces: plane, sphere (one chart) and hyperbolic disk.

All functions are vectorised over numpy arrays of complex points. The sphere
lives in the chart C; the point at infinity is never a valid input.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class SpaceKind(enum.Enum):
    PLANE = "plane"
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"

    @classmethod
    def parse(cls, value: "SpaceKind | str") -> "SpaceKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class DomainError(ValueError):
    """A point lies outside the chart domain of its space."""


class PointAtInfinity(ArithmeticError):
    """A spherical Moebius map sent a finite point to infinity."""


def check_domain(space: SpaceKind, z) -> np.ndarray:
    space = SpaceKind.parse(space)
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("non-finite point")
    if space is SpaceKind.HYPERBOLIC and np.any(np.abs(z) >= 1.0):
        raise DomainError("hyperbolic points must satisfy |z| < 1")
    return z


def _scalar_or_array(x):
    return x.item() if np.ndim(x) == 0 else x


def conformal_factor(space: SpaceKind, z):
    """psi(z): 1, 1+|z|^2 or 1-|z|^2; the invariant metric is |dz|/psi."""
    space = SpaceKind.parse(space)
    z = check_domain(space, z)
    r2 = np.abs(z) ** 2
    if space is SpaceKind.PLANE:
        out = np.ones_like(r2)
    elif space is SpaceKind.SPHERE:
        out = 1.0 + r2
    else:
        out = 1.0 - r2
    return _scalar_or_array(out)


def invariant_density(space: SpaceKind, z):
    """d(nu)/dz = psi(z)^-2."""
    return _scalar_or_array(np.asarray(conformal_factor(space, z)) ** -2.0)


def distance_from_origin(space: SpaceKind, r):
    """Geodesic distance from 0 to a point of modulus r."""
    space = SpaceKind.parse(space)
    r = np.asarray(r, dtype=float)
    if space is SpaceKind.PLANE:
        return _scalar_or_array(r)
    if space is SpaceKind.SPHERE:
        return _scalar_or_array(np.arctan(r))
    if np.any(r >= 1.0):
        raise DomainError("hyperbolic points must satisfy |z| < 1")
    return _scalar_or_array(np.arctanh(r))


def radius_at_distance(space: SpaceKind, d):
    """Inverse of distance_from_origin. Sphere distances must be < pi/2."""
    space = SpaceKind.parse(space)
    d = np.asarray(d, dtype=float)
    if space is SpaceKind.PLANE:
        return _scalar_or_array(d)
    if space is SpaceKind.SPHERE:
        if np.any(d >= np.pi / 2):
            raise PointAtInfinity("distance reaches the antipode of 0")
        return _scalar_or_array(np.tan(d))
    return _scalar_or_array(np.tanh(d))


@dataclass(frozen=True)
class Isometry:
    """An orientation-preserving isometry of one of the three spaces.

    plane:       z -> e^{i theta} z + b
    sphere:      z -> (alpha z + beta) / (-conj(beta) z + conj(alpha)),
                 |alpha|^2 + |beta|^2 = 1
    hyperbolic:  z -> e^{i theta} (z - a) / (1 - conj(a) z),  |a| < 1
    """

    space: SpaceKind
    theta: float = 0.0
    b: complex = 0j
    alpha: complex = 1 + 0j
    beta: complex = 0j
    a: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "space", SpaceKind.parse(self.space))
        if self.space is SpaceKind.SPHERE:
            norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
            if not np.isclose(norm, 1.0, rtol=0, atol=1e-12):
                raise ValueError("sphere isometry needs |alpha|^2 + |beta|^2 = 1")
        if self.space is SpaceKind.HYPERBOLIC and abs(self.a) >= 1.0:
            raise ValueError("hyperbolic isometry needs |a| < 1")

    @classmethod
    def identity(cls, space) -> "Isometry":
        return cls(SpaceKind.parse(space))

    @classmethod
    def to_origin(cls, space, z: complex) -> "Isometry":
        """The isometry T_z with T_z(z) = 0."""
        space = SpaceKind.parse(space)
        z = complex(check_domain(space, z))
        if space is SpaceKind.PLANE:
            return cls(space, b=-z)
        if space is SpaceKind.SPHERE:
            s = np.sqrt(1.0 + abs(z) ** 2)
            return cls(space, alpha=1 / s, beta=-z / s)
        return cls(space, a=z)

    @classmethod
    def from_origin(cls, space, z: complex) -> "Isometry":
        """The isometry taking 0 to z (inverse of to_origin)."""
        space = SpaceKind.parse(space)
        z = complex(check_domain(space, z))
        if space is SpaceKind.PLANE:
            return cls(space, b=z)
        if space is SpaceKind.SPHERE:
            s = np.sqrt(1.0 + abs(z) ** 2)
            return cls(space, alpha=1 / s, beta=z / s)
        return cls(space, a=-z)

    @classmethod
    def random(cls, space, rng: np.random.Generator, scale: float = 1.0) -> "Isometry":
        space = SpaceKind.parse(space)
        theta = float(rng.uniform(0, 2 * np.pi))
        if space is SpaceKind.PLANE:
            b = complex(*(scale * rng.standard_normal(2)))
            return cls(space, theta=theta, b=b)
        if space is SpaceKind.SPHERE:
            v = rng.standard_normal(4)
            v /= np.linalg.norm(v)
            return cls(space, alpha=complex(v[0], v[1]), beta=complex(v[2], v[3]))
        a = np.sqrt(rng.uniform(0, 0.81)) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        return cls(space, theta=theta, a=complex(a))

    def _matrix(self) -> np.ndarray:
        """SU(1,1) / SU(2) / affine matrix of the Moebius map."""
        if self.space is SpaceKind.PLANE:
            return np.array([[np.exp(1j * self.theta), self.b], [0, 1]], dtype=complex)
        if self.space is SpaceKind.SPHERE:
            al, be = self.alpha, self.beta
            return np.array([[al, be], [-np.conj(be), np.conj(al)]], dtype=complex)
        ph = np.exp(1j * self.theta)
        return np.array([[ph, -ph * self.a], [-np.conj(self.a), 1]], dtype=complex)

    def __call__(self, z):
        return apply_isometry(self, z)

    def compose(self, other: "Isometry") -> "Isometry":
        """self o other, returned in canonical parameters."""
        if self.space is not other.space:
            raise ValueError("cannot compose isometries of different spaces")
        m = self._matrix() @ other._matrix()
        if self.space is SpaceKind.PLANE:
            return Isometry(self.space, theta=float(np.angle(m[0, 0])), b=complex(m[0, 1]))
        if self.space is SpaceKind.SPHERE:
            m = m / np.sqrt(np.linalg.det(m))
            return Isometry(self.space, alpha=complex(m[0, 0]), beta=complex(m[0, 1]))
        # m = c * [[ph, -ph a], [-conj(a), 1]]
        c = m[1, 1]
        a = -np.conj(m[1, 0] / c)
        ph = m[0, 0] / c
        return Isometry(self.space, theta=float(np.angle(ph)), a=complex(a))


def apply_isometry(T: Isometry, z):
    z = check_domain(T.space, z)
    if T.space is SpaceKind.PLANE:
        out = np.exp(1j * T.theta) * z + T.b
    elif T.space is SpaceKind.SPHERE:
        den = -np.conj(T.beta) * z + np.conj(T.alpha)
        if np.any(den == 0):
            raise PointAtInfinity("Moebius denominator vanishes")
        out = (T.alpha * z + T.beta) / den
    else:
        out = np.exp(1j * T.theta) * (z - T.a) / (1 - np.conj(T.a) * z)
    return _scalar_or_array(out)


def _pseudo_chordal(space: SpaceKind, z, w):
    """|T_z(w)|, the modulus of w after moving z to the origin."""
    if space is SpaceKind.PLANE:
        return np.abs(w - z)
    if space is SpaceKind.SPHERE:
        return np.abs(w - z) / np.abs(1 + np.conj(z) * w)
    return np.abs(w - z) / np.abs(1 - np.conj(z) * w)


def invariant_distance(space: SpaceKind, z, w):
    """Geodesic distance of the metric |dz|/psi(z).

    Sphere distances equal arctan |T_z(w)|, so antipodal points (w = -1/conj z)
    sit at distance pi/2.
    """
    space = SpaceKind.parse(space)
    z = check_domain(space, z)
    w = check_domain(space, w)
    rho = _pseudo_chordal(space, z, w)
    if space is SpaceKind.SPHERE:
        return _scalar_or_array(np.arctan2(np.abs(w - z), np.abs(1 + np.conj(z) * w)))
    if space is SpaceKind.HYPERBOLIC:
        return _scalar_or_array(np.arctanh(np.minimum(rho, 1.0)))
    return _scalar_or_array(rho)


def intrinsic_gradient_norm(space: SpaceKind, planar_gradient, z):
    """|grad_iota f|(z) = psi(z) |grad f(z)|.

    ``planar_gradient`` has shape (..., 2) holding (df/dx, df/dy).
    """
    g = np.asarray(planar_gradient, dtype=float)
    psi = np.asarray(conformal_factor(space, z))
    return _scalar_or_array(psi * np.hypot(g[..., 0], g[..., 1]))
