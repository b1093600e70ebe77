"""Functions on the closed lattice as finite sums over the basis g_{k,l}.

``g_{k,l}`` equals ``exp(i l theta)`` on the circle of radius ``q**k`` and
vanishes elsewhere. A :class:`ModeFunction` stores the finitely many nonzero
coefficients of ``f = sum c_{k,l} g_{k,l}`` in a sparse map keyed by
``(k, l)``. Operations never clip: supports simply grow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .lattice import TWO_PI, EmptyWindowError, QLattice

Key = tuple[int, int]


class AliasingError(ValueError):
    """Angular sampling too coarse for the requested band limit."""


def _as_lattice(lattice) -> QLattice:
    return lattice if isinstance(lattice, QLattice) else QLattice(lattice)


class ModeFunction:
    """Immutable finite combination of basis functions ``g_{k,l}``."""

    __slots__ = ("lattice", "_c")

    def __init__(self, lattice, coeffs: Mapping[Key, complex] | None = None):
        self.lattice = _as_lattice(lattice)
        c: dict[Key, complex] = {}
        for key, v in (coeffs or {}).items():
            k, l = key
            if int(k) != k or int(l) != l:
                raise TypeError(f"mode indices must be integers, got {key!r}")
            v = complex(v)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"non-finite coefficient at {key!r}")
            if v != 0:
                c[(int(k), int(l))] = c.get((int(k), int(l)), 0j) + v
        self._c = c

    @classmethod
    def _wrap(cls, lattice: QLattice, c: dict[Key, complex]) -> "ModeFunction":
        # trusted constructor for internal results; c is owned by the new object
        obj = cls.__new__(cls)
        obj.lattice = lattice
        obj._c = c
        return obj

    @property
    def q(self) -> float:
        return self.lattice.q

    @property
    def coeffs(self) -> Mapping[Key, complex]:
        return MappingProxyType(self._c)

    def items(self):
        return self._c.items()

    def __getitem__(self, key: Key) -> complex:
        return self._c.get(key, 0j)

    def __len__(self) -> int:
        return len(self._c)

    def __bool__(self) -> bool:
        return any(v != 0 for v in self._c.values())

    def __repr__(self) -> str:
        return f"ModeFunction(q={self.q}, modes={len(self._c)})"

    def support(self) -> list[Key]:
        return sorted(key for key, v in self._c.items() if v != 0)

    def k_range(self) -> tuple[int, int] | None:
        ks = [k for (k, _), v in self._c.items() if v != 0]
        return (min(ks), max(ks)) if ks else None

    def l_range(self) -> tuple[int, int] | None:
        ls = [l for (_, l), v in self._c.items() if v != 0]
        return (min(ls), max(ls)) if ls else None

    def max_abs(self) -> float:
        return max((abs(v) for v in self._c.values()), default=0.0)

    def _check(self, other: "ModeFunction") -> None:
        if self.lattice != other.lattice:
            raise ValueError(f"lattice mismatch: q={self.q} vs q={other.q}")

    def __add__(self, other: "ModeFunction") -> "ModeFunction":
        self._check(other)
        c = dict(self._c)
        for key, v in other._c.items():
            c[key] = c.get(key, 0j) + v
        return ModeFunction._wrap(self.lattice, c)

    def __sub__(self, other: "ModeFunction") -> "ModeFunction":
        return self + (-other)

    def __neg__(self) -> "ModeFunction":
        return ModeFunction._wrap(self.lattice, {key: -v for key, v in self._c.items()})

    def __mul__(self, scalar) -> "ModeFunction":
        if isinstance(scalar, ModeFunction):
            return multiply(self, scalar)
        s = complex(scalar)
        return ModeFunction._wrap(self.lattice, {key: s * v for key, v in self._c.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "ModeFunction":
        return self * (1.0 / complex(scalar))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModeFunction):
            return NotImplemented
        return self.lattice == other.lattice and self.pruned(0.0)._c == other.pruned(0.0)._c

    __hash__ = None

    def pruned(self, eps: float = 0.0) -> "ModeFunction":
        """Drop coefficients with modulus ``<= eps`` (exact zeros always)."""
        return ModeFunction._wrap(
            self.lattice, {key: v for key, v in self._c.items() if v != 0 and abs(v) > eps}
        )

    def restrict(self, k_window: tuple[int, int]) -> "ModeFunction":
        lo, hi = k_window
        return ModeFunction._wrap(
            self.lattice, {key: v for key, v in self._c.items() if lo <= key[0] <= hi}
        )

    def circle(self, k: int) -> dict[int, complex]:
        return {l: v for (kk, l), v in self._c.items() if kk == k}

    def evaluate(self, k: int, theta) -> np.ndarray | complex:
        """Pointwise values at ``q**k * exp(i theta)``; zero off the support."""
        theta_arr = np.asarray(theta, dtype=float)
        out = np.zeros(theta_arr.shape, dtype=complex)
        for l, v in self.circle(k).items():
            out += v * np.exp(1j * l * theta_arr)
        return complex(out) if out.ndim == 0 else out

    def max_diff(self, other: "ModeFunction") -> float:
        """Largest coefficient-wise absolute difference."""
        return (self - other).max_abs()


def zero(lattice) -> ModeFunction:
    return ModeFunction(_as_lattice(lattice))


def basis(lattice, k: int, l: int) -> ModeFunction:
    """The basis function ``g_{k,l}``."""
    return ModeFunction(_as_lattice(lattice), {(k, l): 1.0})


def from_terms(lattice, terms: Iterable[tuple[int, int, complex]]) -> ModeFunction:
    return ModeFunction(lattice, {(k, l): v for k, l, v in terms})


@dataclass(frozen=True)
class SampledFunction:
    """Uniform angular samples ``values[i, j] = f(q**(k_min+i) e^{2 pi i j / n_theta})``."""

    lattice: QLattice
    k_min: int
    k_max: int
    n_theta: int
    values: np.ndarray

    def __post_init__(self):
        if self.n_theta <= 0 or self.n_theta % 2:
            raise ValueError(f"n_theta must be a positive even integer, got {self.n_theta}")
        if self.k_max < self.k_min:
            raise EmptyWindowError(f"empty radial window [{self.k_min}, {self.k_max}]")
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.k_max - self.k_min + 1, self.n_theta):
            raise ValueError(
                f"sample grid has shape {vals.shape}, expected "
                f"({self.k_max - self.k_min + 1}, {self.n_theta})"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def thetas(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_theta) / self.n_theta

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def row(self, k: int) -> np.ndarray:
        return self.values[k - self.k_min]

    def pointwise(self, other: "SampledFunction", op) -> "SampledFunction":
        if (self.k_min, self.k_max, self.n_theta) != (other.k_min, other.k_max, other.n_theta):
            raise ValueError("sample grids differ")
        return SampledFunction(self.lattice, self.k_min, self.k_max, self.n_theta,
                               op(self.values, other.values))


def to_samples(f: ModeFunction, window: tuple[int, int], n_theta: int) -> SampledFunction:
    """Sample ``f`` on circles ``window[0]..window[1]`` at ``n_theta`` angles each.

    Modes on circles outside the window are not sampled.
    """
    k_min, k_max = window
    if k_max < k_min:
        raise EmptyWindowError(f"empty radial window {window}")
    lr = f.restrict(window).l_range()
    if lr is not None and n_theta <= 2 * max(abs(lr[0]), abs(lr[1])):
        raise AliasingError(
            f"n_theta={n_theta} cannot resolve angular mode {max(map(abs, lr))}"
        )
    spectrum = np.zeros((k_max - k_min + 1, n_theta), dtype=complex)
    for (k, l), v in f.items():
        if k_min <= k <= k_max:
            spectrum[k - k_min, l % n_theta] += v
    values = np.fft.ifft(spectrum, axis=1) * n_theta
    return SampledFunction(f.lattice, k_min, k_max, n_theta, values)


def from_samples(s: SampledFunction, l_window: tuple[int, int]) -> ModeFunction:
    """Per-circle discrete Fourier coefficients for ``l`` in ``l_window``."""
    l_min, l_max = l_window
    if l_max < l_min:
        raise EmptyWindowError(f"empty angular window {l_window}")
    if s.n_theta <= 2 * max(abs(l_min), abs(l_max)):
        raise AliasingError(
            f"n_theta={s.n_theta} cannot resolve angular window {l_window}"
        )
    spectrum = np.fft.fft(s.values, axis=1) / s.n_theta
    c: dict[Key, complex] = {}
    for i, k in enumerate(s.ks):
        for l in range(l_min, l_max + 1):
            v = complex(spectrum[i, l % s.n_theta])
            if v != 0:
                c[(int(k), l)] = v
    return ModeFunction._wrap(s.lattice, c)


def _by_circle(f: ModeFunction) -> dict[int, dict[int, complex]]:
    out: dict[int, dict[int, complex]] = {}
    for (k, l), v in f.items():
        out.setdefault(k, {})[l] = v
    return out


def multiply(f: ModeFunction, g: ModeFunction) -> ModeFunction:
    """Pointwise product: per-circle convolution in the angular index."""
    f._check(g)
    fc, gc = _by_circle(f), _by_circle(g)
    c: dict[Key, complex] = {}
    for k in fc.keys() & gc.keys():
        a, b = fc[k], gc[k]
        a0, a1 = min(a), max(a)
        b0, b1 = min(b), max(b)
        av = np.zeros(a1 - a0 + 1, dtype=complex)
        bv = np.zeros(b1 - b0 + 1, dtype=complex)
        for l, v in a.items():
            av[l - a0] = v
        for l, v in b.items():
            bv[l - b0] = v
        conv = np.convolve(av, bv)
        for i, v in enumerate(conv):
            if v != 0:
                c[(k, a0 + b0 + i)] = complex(v)
    return ModeFunction._wrap(f.lattice, c)


def conjugate(f: ModeFunction) -> ModeFunction:
    """Complex conjugation: ``(f*)_{k,l} = conj(f_{k,-l})``."""
    return ModeFunction._wrap(f.lattice, {(k, -l): v.conjugate() for (k, l), v in f.items()})


def integrate_mu(f: ModeFunction) -> complex:
    """Integral against the covariant measure: ``sum_k q**(2k) f_{k,0}``."""
    q2 = f.q ** 2
    return complex(sum(q2 ** k * v for (k, l), v in f.items() if l == 0))


def integrate_mu_samples(s: SampledFunction) -> complex:
    """Quadrature form of :func:`integrate_mu` on a sample grid."""
    w = s.lattice.q ** (2 * s.ks)
    return complex(np.sum(w * s.values.mean(axis=1)))


def inner_product(f: ModeFunction, g: ModeFunction) -> complex:
    """``<f, g> = sum q**(2k) conj(f_{k,l}) g_{k,l}``, antilinear in ``f``."""
    f._check(g)
    q2 = f.q ** 2
    small, big = (f._c, g._c) if len(f) <= len(g) else (g._c, f._c)
    total = 0j
    for key in small.keys() & big.keys():
        total += q2 ** key[0] * f._c[key].conjugate() * g._c[key]
    return total


def norm(f: ModeFunction) -> float:
    q2 = f.q ** 2
    return math.sqrt(sum(q2 ** k * abs(v) ** 2 for (k, _), v in f.items()))


def circle_masses(f: ModeFunction) -> dict[int, float]:
    """Squared L2 mass carried by each circle."""
    q2 = f.q ** 2
    out: dict[int, float] = {}
    for (k, _), v in f.items():
        out[k] = out.get(k, 0.0) + q2 ** k * abs(v) ** 2
    return out


def random_mode_function(lattice, k_window, l_window, rng) -> ModeFunction:
    """Complex Gaussian coefficients (unit mean square) on a rectangular window.

    ``rng`` is a :class:`numpy.random.Generator` (or an integer seed for
    ``numpy.random.default_rng``). Draws ``standard_normal((nk, nl, 2))`` in
    row-major order, k ascending then l ascending, real part first.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    k0, k1 = k_window
    l0, l1 = l_window
    draws = rng.standard_normal((k1 - k0 + 1, l1 - l0 + 1, 2)) / math.sqrt(2.0)
    c = {
        (k0 + i, l0 + j): complex(draws[i, j, 0], draws[i, j, 1])
        for i in range(k1 - k0 + 1)
        for j in range(l1 - l0 + 1)
    }
    return ModeFunction._wrap(_as_lattice(lattice), c)


def relative_gap(a: ModeFunction, b: ModeFunction, *scale_refs: ModeFunction) -> float:
    """Max coefficient difference divided by the largest coefficient involved.

    Extra ``scale_refs`` widen the scale, e.g. the separate terms of a sum
    whose cancellation is being checked.
    """
    scale = max([a.max_abs(), b.max_abs()] + [r.max_abs() for r in scale_refs])
    gap = a.max_diff(b)
    if scale == 0.0:
        return gap
    return gap / scale
