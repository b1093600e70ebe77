"""Covariant q-difference calculus on mode functions.

Continuation convention: ``f(q^s . q^m z)`` is the entire continuation of
``t -> f(q^{it} q^m z)`` evaluated at ``t = -i s``; on a single mode this is
the diagonal factor ``q**(l*s)``. With it, every operator below acts on the
basis by a short exact recurrence and the supports grow by at most one
circle and one angular mode.
"""

from __future__ import annotations

import cmath
from enum import Enum
from typing import Callable, Mapping

from .modes import Key, ModeFunction, inner_product


class OperatorId(str, Enum):
    RZ = "RZ"        # right derivative in z
    LZ = "LZ"        # left derivative in z
    RZBAR = "RZBAR"  # right derivative in conj(z)
    LZBAR = "LZBAR"  # left derivative in conj(z)
    Z = "Z"          # multiplication by z
    ZBAR = "ZBAR"    # multiplication by conj(z)
    SIGMA = "SIGMA"  # rotation group sigma_t (parameter t)
    SHIFT = "SHIFT"  # dilation + continuation (parameters m, s)


DIFF_OPS = (OperatorId.RZ, OperatorId.LZ, OperatorId.RZBAR, OperatorId.LZBAR)


def _op(which) -> OperatorId:
    return which if isinstance(which, OperatorId) else OperatorId(str(which).upper())


def shift(f: ModeFunction, m: int, s: int) -> ModeFunction:
    """``z -> f(q^s . q^m z)``: coefficients ``q**(l*s) * f_{k+m,l}`` at ``(k,l)``."""
    q = f.q
    if m == 0 and s == 0:
        return ModeFunction._wrap(f.lattice, dict(f.items()))
    return ModeFunction._wrap(
        f.lattice, {(k - m, l): q ** (l * s) * v for (k, l), v in f.items()}
    )


def theta(f: ModeFunction, power: int = 1) -> ModeFunction:
    """Dilation ``f(z) -> f(q**power z)``."""
    return shift(f, power, 0)


def sigma(f: ModeFunction, t: float) -> ModeFunction:
    """Rotation group ``(sigma_t f)(z) = f(q^{-it} z)``; unitary for real ``t``."""
    lq = f.lattice.log_q
    return ModeFunction._wrap(
        f.lattice, {(k, l): cmath.exp(-1j * l * t * lq) * v for (k, l), v in f.items()}
    )


def sigma_i(f: ModeFunction) -> ModeFunction:
    """Analytic generator ``sigma_i``: ``f(q . z)``, factor ``q**l``."""
    return shift(f, 0, 1)


def sigma_minus_i(f: ModeFunction) -> ModeFunction:
    """``sigma_{-i}``: factor ``q**(-l)``."""
    return shift(f, 0, -1)


def mult_coord(f: ModeFunction, which) -> ModeFunction:
    """Multiply by ``z`` (``Z``) or ``conj(z)`` (``ZBAR``)."""
    which = _op(which)
    q = f.q
    if which is OperatorId.Z:
        dl = 1
    elif which is OperatorId.ZBAR:
        dl = -1
    else:
        raise ValueError(f"mult_coord expects Z or ZBAR, got {which}")
    return ModeFunction._wrap(f.lattice, {(k, l + dl): q ** k * v for (k, l), v in f.items()})


def divide_coord(f: ModeFunction, which) -> ModeFunction:
    """Divide by ``z`` or ``conj(z)``; total since no lattice point is 0."""
    which = _op(which)
    q = f.q
    if which is OperatorId.Z:
        dl = -1
    elif which is OperatorId.ZBAR:
        dl = 1
    else:
        raise ValueError(f"divide_coord expects Z or ZBAR, got {which}")
    return ModeFunction._wrap(f.lattice, {(k, l + dl): q ** (-k) * v for (k, l), v in f.items()})


def _accumulate(c: dict[Key, complex], key: Key, v: complex) -> None:
    c[key] = c.get(key, 0j) + v


def q_diff(f: ModeFunction, which) -> ModeFunction:
    """Apply one of the four q-difference operators by its mode recurrence."""
    which = _op(which)
    q = f.q
    cr = 1.0 / (q ** -2 - 1.0)
    cl = 1.0 / (1.0 - q * q)
    c: dict[Key, complex] = {}
    if which is OperatorId.RZ:
        for (k, l), v in f.items():
            _accumulate(c, (k + 1, l - 1), cr * q ** (-l - (k + 1)) * v)
            _accumulate(c, (k, l - 1), -cr * q ** (-k) * v)
    elif which is OperatorId.LZ:
        for (k, l), v in f.items():
            _accumulate(c, (k, l - 1), cl * q ** (-k) * v)
            _accumulate(c, (k - 1, l - 1), -cl * q ** (l - (k - 1)) * v)
    elif which is OperatorId.RZBAR:
        for (k, l), v in f.items():
            _accumulate(c, (k, l + 1), cl * q ** (-k) * v)
            _accumulate(c, (k - 1, l + 1), -cl * q ** (-l - (k - 1)) * v)
    elif which is OperatorId.LZBAR:
        for (k, l), v in f.items():
            _accumulate(c, (k + 1, l + 1), cr * q ** (l - (k + 1)) * v)
            _accumulate(c, (k, l + 1), -cr * q ** (-k) * v)
    else:
        raise ValueError(f"q_diff expects one of {[o.value for o in DIFF_OPS]}, got {which}")
    return ModeFunction._wrap(f.lattice, c)


def q_diff_pointwise(f: ModeFunction, which) -> ModeFunction:
    """Same operators built literally as difference quotients of continuations."""
    which = _op(which)
    q = f.q
    if which is OperatorId.RZ:
        num = shift(f, -1, -1) - f
        return divide_coord(num, "Z") / (q ** -2 - 1.0)
    if which is OperatorId.LZ:
        num = f - shift(f, 1, 1)
        return divide_coord(num, "Z") / (1.0 - q * q)
    if which is OperatorId.LZBAR:
        num = shift(f, -1, 1) - f
        return divide_coord(num, "ZBAR") / (q ** -2 - 1.0)
    if which is OperatorId.RZBAR:
        num = f - shift(f, 1, -1)
        return divide_coord(num, "ZBAR") / (1.0 - q * q)
    raise ValueError(f"q_diff_pointwise expects a difference operator, got {which}")


def apply(which, f: ModeFunction, *params) -> ModeFunction:
    """Dispatch on an :class:`OperatorId` (``SIGMA`` takes ``t``, ``SHIFT`` takes ``m, s``)."""
    which = _op(which)
    if which in DIFF_OPS:
        return q_diff(f, which)
    if which in (OperatorId.Z, OperatorId.ZBAR):
        return mult_coord(f, which)
    if which is OperatorId.SIGMA:
        (t,) = params
        return sigma(f, t)
    m, s = params
    return shift(f, m, s)


def commutator(a: Callable[[ModeFunction], ModeFunction],
               b: Callable[[ModeFunction], ModeFunction],
               f: ModeFunction) -> ModeFunction:
    return a(b(f)) - b(a(f))


# (A, B, c): <f, A g> = c <B f, g>
ADJOINT_PAIRS: Mapping[tuple[OperatorId, OperatorId], Callable[[float], float]] = {
    (OperatorId.RZ, OperatorId.RZBAR): lambda q: -q * q,
    (OperatorId.LZBAR, OperatorId.LZ): lambda q: -q * q,
}


def adjoint_residual(pair, f: ModeFunction, g: ModeFunction) -> complex:
    """``<f, A g> - c <B f, g>`` for one of the claimed adjoint pairs."""
    a, b = (_op(x) for x in pair)
    try:
        c = ADJOINT_PAIRS[(a, b)](f.q)
    except KeyError:
        raise ValueError(f"no adjoint relation registered for {(a.value, b.value)}") from None
    return inner_product(f, q_diff(g, a)) - c * inner_product(q_diff(f, b), g)


def stokes_integral(f: ModeFunction, which, weights: Callable[[int], float] | None = None) -> complex:
    """Integral of ``q_diff(f, which)``; ``weights`` replaces ``q**(2k)`` when given."""
    out = q_diff(f, which)
    w = weights or f.lattice.mu_weight
    return complex(sum(w(k) * v for (k, l), v in out.items() if l == 0))


def perturbed_weights(lattice, k0: int, eps: float) -> Callable[[int], float]:
    """``q**(2k) * (1 + eps * [k == k0])``: a positive measure other than mu."""
    return lambda k: lattice.mu_weight(k) * (1.0 + eps * (k == k0))
