"""Built-in compactly supported C^3 test functions with exact derivatives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class TestFunction:
    """A real function on the chart with its planar gradient and Laplacian.

    ``gradient`` returns an array of shape z.shape + (2,) holding (df/dx, df/dy).
    ``support_radius`` is inf for functions without compact support.
    """

    __test__ = False  # not a pytest class

    value: Callable[[Array], Array]
    gradient: Callable[[Array], Array]
    laplacian: Callable[[Array], Array]
    support_radius: float
    label: str
    smoothness: str = "C3"

    def __call__(self, z):
        return self.value(np.asarray(z, dtype=complex))

    def scaled(self, c: float) -> "TestFunction":
        return TestFunction(
            lambda z: c * self.value(z),
            lambda z: c * self.gradient(z),
            lambda z: c * self.laplacian(z),
            self.support_radius,
            f"{c}*{self.label}",
            self.smoothness,
        )

    def __add__(self, other: "TestFunction") -> "TestFunction":
        return TestFunction(
            lambda z: self.value(z) + other.value(z),
            lambda z: self.gradient(z) + other.gradient(z),
            lambda z: self.laplacian(z) + other.laplacian(z),
            max(self.support_radius, other.support_radius),
            f"{self.label}+{other.label}",
            min(self.smoothness, other.smoothness),
        )

    def dzdzbar(self, z):
        """d^2 f / dz dzbar = Laplacian / 4."""
        return 0.25 * self.laplacian(np.asarray(z, dtype=complex))


def _q(z, radius):
    return np.maximum(1.0 - np.abs(z) ** 2 / radius ** 2, 0.0)


def bump(radius: float = 1.0) -> TestFunction:
    """(1 - |z|^2/R^2)_+^4."""
    R2 = radius * radius

    def value(z):
        return _q(z, radius) ** 4

    def gradient(z):
        q3 = _q(z, radius) ** 3
        return np.stack([-8 * z.real * q3 / R2, -8 * z.imag * q3 / R2], axis=-1)

    def laplacian(z):
        q = _q(z, radius)
        return -16 * q ** 3 / R2 + 48 * np.abs(z) ** 2 * q ** 2 / R2 ** 2

    return TestFunction(value, gradient, laplacian, float(radius), f"bump:{radius:g}")


def angular(radius: float = 1.0, m: int = 1) -> TestFunction:
    """Re(z^m) (1 - |z|^2/R^2)_+^4."""
    b = bump(radius)

    def value(z):
        return np.real(z ** m) * b.value(z)

    def grad_h(z):
        d = m * z ** (m - 1)
        return np.stack([d.real, -d.imag], axis=-1)

    def gradient(z):
        return grad_h(z) * b.value(z)[..., None] + np.real(z ** m)[..., None] * b.gradient(z)

    def laplacian(z):
        cross = np.sum(grad_h(z) * b.gradient(z), axis=-1)
        return np.real(z ** m) * b.laplacian(z) + 2 * cross

    return TestFunction(value, gradient, laplacian, float(radius), f"angular:{radius:g}:{m}")


def constant(c: float = 1.0) -> TestFunction:
    """The constant c (no compact support; meaningful on the sphere)."""
    return TestFunction(
        lambda z: np.full(np.shape(z), float(c)),
        lambda z: np.zeros(np.shape(z) + (2,)),
        lambda z: np.zeros(np.shape(z)),
        np.inf,
        f"const:{c:g}",
        "Cinf",
    )


def builtin_test_functions(radius: float = 1.0) -> list[TestFunction]:
    return [bump(radius), angular(radius, 1), angular(radius, 2)]


def parse_test_function(label: str) -> TestFunction:
    """'bump:R', 'angular:R:m' or 'const:c'."""
    kind, *args = label.split(":")
    if kind == "bump":
        return bump(float(args[0]) if args else 1.0)
    if kind == "angular":
        return angular(float(args[0]) if args else 1.0, int(args[1]) if len(args) > 1 else 1)
    if kind == "const":
        return constant(float(args[0]) if args else 1.0)
    raise ValueError(f"unknown test function {label!r}")
