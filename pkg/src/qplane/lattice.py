"""Multiplicative lattice of circles |z| = q^k, its closure, and its measures.

Points are stored as ``(k, theta)``: the complex number ``q**k * exp(1j*theta)``
with ``theta`` normalized to ``[0, 2*pi)``. The origin is never a point; it
only appears as the limit ``k -> +inf`` and carries no mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class EmptyWindowError(ValueError):
    """Raised when an operation receives no radial data at all."""


def normalize_angle(theta: float) -> float:
    t = math.fmod(float(theta), TWO_PI)
    if t < 0.0:
        t += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if t >= TWO_PI:
        t = 0.0
    return t


@dataclass(frozen=True)
class QLattice:
    """Deformation parameter ``q`` together with the lattice it generates."""

    q: float

    def __post_init__(self):
        q = float(self.q)
        if not (0.0 < q < 1.0) or not math.isfinite(q):
            raise ValueError(f"deformation parameter must satisfy 0 < q < 1, got {self.q!r}")
        object.__setattr__(self, "q", q)

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    def power(self, n) -> float:
        return self.q ** n

    def mu_weight(self, k: int) -> float:
        """Weight ``q**(2k)`` of the covariant measure on circle ``k``."""
        return self.q ** (2 * int(k))

    def point(self, k: int, theta: float) -> "CirclePoint":
        return CirclePoint(k, theta)

    def value(self, p: "CirclePoint") -> complex:
        """The complex number represented by ``p``."""
        return self.q ** p.k * complex(math.cos(p.theta), math.sin(p.theta))

    def from_phi(self, k: int, phi: float) -> "CirclePoint":
        """Build a point from the exponent form ``q**(i*phi + k)``."""
        return CirclePoint(k, phi * self.log_q)


@dataclass(frozen=True)
class CirclePoint:
    """Lattice point ``q**k * e^{i theta}``; ``k`` is the radial index."""

    k: int
    theta: float

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k:
            raise TypeError(f"radial index must be an integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def __mul__(self, other: "CirclePoint") -> "CirclePoint":
        return CirclePoint(self.k + other.k, self.theta + other.theta)

    def inverse(self) -> "CirclePoint":
        return CirclePoint(-self.k, -self.theta)


def chi(g1: CirclePoint, g2: CirclePoint) -> complex:
    """Bicharacter ``exp(i (theta1 k2 + theta2 k1))``."""
    phase = g1.theta * g2.k + g2.theta * g1.k
    return complex(math.cos(phase), math.sin(phase))


def mu_weight(lattice: QLattice, k: int) -> float:
    return lattice.mu_weight(k)


def integrate_haar_gamma(values) -> complex:
    """Haar integral over the lattice group: sum over circles of the angular mean.

    ``values`` maps circle index to uniform angular samples, or is any object
    with ``k_min``, ``k_max`` and a 2-D ``values`` array (one row per circle).
    The per-circle mean is exact for band-limited integrands.
    """
    rows = _circle_rows(values)
    if not rows:
        raise EmptyWindowError("no circles supplied to the Haar integral")
    total = 0j
    for _, row in sorted(rows.items()):
        row = np.asarray(row)
        if row.size == 0:
            raise EmptyWindowError("circle with no angular samples")
        total += complex(row.mean())
    return total


def _circle_rows(values) -> dict[int, np.ndarray]:
    if hasattr(values, "k_min") and hasattr(values, "values"):
        arr = np.asarray(values.values)
        return {values.k_min + i: arr[i] for i in range(arr.shape[0])}
    return dict(values)

