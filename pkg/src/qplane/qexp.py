"""The quantum exponential ``F_q(z) = prod_{j>=0} (1 + q^{2j} conj z) / (1 + q^{2j} z)``.

Truncation
----------
Every factor is unimodular, so the tail ``prod_{j>=N}`` is ``exp(i * sum phi_j)``
with ``|phi_j| = 2 |arg(1 + w_j)| <= 2 arcsin|w_j| <= pi |w_j|`` for
``w_j = q^{2j} z`` with ``|w_j| < 1``. Hence

    |F_q(z) - prod_{j<N}| <= pi |z| q^{2N} / (1 - q^2)

and ``N`` is the smallest index making this bound ``<= tol`` (and
``q^{2N}|z| < 1``). This is what :func:`truncation_index` returns.

Singular points
---------------
``F_q`` is undefined at ``z = -q^{-2j}``. On the circle ``|z| = q^{-2j}``
the factor with ``|w_j| = 1`` equals ``e^{-i arg w_j}`` everywhere except at
the pole, so it is replaced by that phase (value ``-1`` at the pole). This
keeps ``F_q`` smooth along every circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import TWO_PI, CirclePoint, QLattice


class PoleError(ValueError):
    """The extended product was asked for a value at one of its poles."""


def truncation_index(q: float, modulus: float, tol: float) -> int:
    """Number of factors needed so the neglected tail is below ``tol``."""
    if modulus == 0.0:
        return 0
    log_q2 = 2.0 * math.log(q)
    # q^{2N} |z| < 1
    n_unit = math.floor(math.log(modulus) / -log_q2) + 1 if modulus >= 1.0 else 0
    target = tol * (1.0 - q * q) / (math.pi * modulus)
    n_tol = math.ceil(math.log(target) / log_q2) if target < 1.0 else 0
    return max(n_unit, n_tol, 0)


def _extended_truncation(q: float, modulus: float, tol: float) -> int:
    # With |q^{2j} w| <= 1/2, |log(1 + x)| <= 2|x|, so the log of the tail is
    # at most 4 * modulus * q^{2N} / (1 - q^2).
    if modulus == 0.0:
        return 0
    log_q2 = 2.0 * math.log(q)
    n_half = math.ceil(math.log(0.5 / modulus) / log_q2) if modulus > 0.5 else 0
    target = tol * (1.0 - q * q) / (4.0 * modulus)
    n_tol = math.ceil(math.log(target) / log_q2) if target < 1.0 else 0
    return max(n_half, n_tol, 0)


@dataclass(frozen=True)
class FqEvaluator:
    lattice: QLattice
    tol: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.tol <= 1e-6):
            raise ValueError(f"truncation tolerance must lie in (0, 1e-6], got {self.tol}")

    @property
    def q(self) -> float:
        return self.lattice.q

    def is_singular(self, p: CirclePoint) -> bool:
        """True at the excluded points ``-q^{-2j}``, ``j >= 0``."""
        return p.k <= 0 and p.k % 2 == 0 and p.theta == math.pi

    def fq_circle(self, k: int, thetas) -> np.ndarray:
        """``F_q(q^k e^{i theta})`` for an array of angles, singular policy applied."""
        thetas = np.asarray(thetas, dtype=float)
        q = self.q
        phase = np.exp(1j * thetas)
        n_factors = truncation_index(q, q ** k, self.tol)
        out = np.ones(thetas.shape, dtype=complex)
        for j in range(n_factors):
            e = 2 * j + k
            if e == 0:
                # unit-modulus factor: along-circle limit e^{-i theta}
                out *= np.conj(phase)
                continue
            w = q ** e * phase
            out *= (1.0 + np.conj(w)) / (1.0 + w)
        return out

    def fq_point(self, p: CirclePoint) -> complex:
        return complex(self.fq_circle(p.k, p.theta))

    def fq_extended(self, u: complex, v: complex) -> complex:
        """``G(u, v) = prod (1 + q^{2j} v) / (1 + q^{2j} u)``, so ``F_q(z) = G(z, conj z)``."""
        q = self.q
        u, v = complex(u), complex(v)
        if u.imag == 0.0 and u.real < 0.0:
            j = round(-math.log(-u.real) / (2.0 * math.log(q)))
            if j >= 0 and math.isclose(-u.real, q ** (-2 * j), rel_tol=4e-16):
                raise PoleError(f"G has a pole at u = {u!r} (j = {j})")
        result = 1 + 0j
        for j in range(_extended_truncation(q, max(abs(u), abs(v)), self.tol)):
            s = q ** (2 * j)
            den = 1.0 + s * u
            if den == 0:
                raise PoleError(f"G has a pole at u = {u!r} (j = {j})")
            result *= (1.0 + s * v) / den
        return result

    def fq_circle_coeffs(self, n: int, l_window: tuple[int, int], n_theta: int) -> dict[int, complex]:
        """``a_{n,l} = mean_u F_q(q^n e^{iu}) e^{ilu}`` for ``l`` in ``l_window``."""
        spectrum = self.circle_spectrum(n, n_theta)
        l0, l1 = l_window
        if n_theta < 4 * (l1 - l0 + 1):
            raise ValueError(f"n_theta={n_theta} too small for angular window {l_window}")
        return {l: complex(spectrum[l % n_theta]) for l in range(l0, l1 + 1)}

    def circle_spectrum(self, n: int, n_theta: int) -> np.ndarray:
        """Full discrete spectrum; entry ``l mod n_theta`` is ``a_{n,l}``."""
        if n_theta < 4 or n_theta & (n_theta - 1):
            raise ValueError(f"n_theta must be a power of two >= 4, got {n_theta}")
        thetas = TWO_PI * np.arange(n_theta) / n_theta
        # ifft carries the +i sign: mean(F e^{+ilu})
        return np.fft.ifft(self.fq_circle(n, thetas))

    def fq_diff_identity_residual(self, zeta: CirclePoint, points, *,
                                  which: str = "LZ") -> tuple[float, list[CirclePoint]]:
        """Max over ``points`` of the gap in the left-derivative identity for ``F_q(zeta z)``.

        The left side is the literal difference quotient. Continuing
        ``f = F_q(zeta .)`` to ``f(q . q z)`` multiplies ``u = zeta z`` by
        ``q^2`` and leaves ``v = conj(u)`` alone; ``f(q . q^{-1} z)`` leaves
        ``u`` alone and divides ``v`` by ``q^2``. Points where either
        evaluation sits on a pole are skipped and returned.
        """
        if which not in ("LZ", "LZBAR"):
            raise ValueError(f"which must be 'LZ' or 'LZBAR', got {which!r}")
        q = self.q
        lat = self.lattice
        zeta_c = lat.value(zeta)
        worst = 0.0
        skipped: list[CirclePoint] = []
        for p in points:
            prod = zeta * p
            # poles of G(q^2 u, v) sit two circles further out than those of G(u, v)
            shift_k = 2 if which == "LZ" else 0
            if prod.theta == math.pi and prod.k + shift_k <= 0 and (prod.k + shift_k) % 2 == 0:
                skipped.append(p)
                continue
            z = lat.value(p)
            u = zeta_c * z
            v = u.conjugate()
            try:
                base = self.fq_extended(u, v)
                if which == "LZ":
                    cont = self.fq_extended(q * q * u, v)
                    lhs = (base - cont) / ((1.0 - q * q) * z)
                    rhs = -zeta_c / (1.0 - q * q) * base
                else:
                    cont = self.fq_extended(u, v / (q * q))
                    lhs = (cont - base) / ((q ** -2 - 1.0) * z.conjugate())
                    rhs = zeta_c.conjugate() / (1.0 - q * q) * base
            except PoleError:
                skipped.append(p)
                continue
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        return worst, skipped
