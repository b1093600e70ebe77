"""Quantum Fourier transform on mode space.

With ``z = q^k e^{i theta}`` and ``zeta = q^m e^{i psi}`` the angular
integral collapses to one Fourier coefficient of ``F_q`` per circle, so

    (F f)_{m,j}  = sum_k q^{2k} a_{m+k,-j} f_{k,-j}
    (F* h)_{n,J} = sum_m q^{2m} conj(a_{m+n,J}) h_{m,-J}

where ``a_{n,l}`` is the ``l``-th angular coefficient of ``F_q`` on circle
``n``. A finite table of ``a`` determines each output circle either exactly
(all needed entries present) or not at all; outputs are only ever produced
on the exact window, and the mass beyond it is estimated separately.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .calculus import OperatorId, mult_coord, q_diff, shift
from .lattice import TWO_PI, CirclePoint, QLattice
from .modes import Key, ModeFunction, basis, circle_masses
from .qexp import FqEvaluator

Window = tuple[int, int]

# Entries of the a-table below this modulus are indistinguishable from FFT
# round-off (the floor is ~1e-16) and are stored as exact zeros.
DEFAULT_CLIP = 2e-15
# Circles whose weighted mass is below this fraction of the total carry no
# usable decay information.
_NEGLIGIBLE_MASS = 1e-26


class WindowError(ValueError):
    """Kernel data does not cover what an operation needs."""


@dataclass(frozen=True)
class FourierData:
    lattice: QLattice
    n_window: Window
    l_window: Window
    n_theta: int
    table: np.ndarray = field(repr=False)
    parseval_defect: np.ndarray = field(repr=False)

    def a(self, n: int, l: int) -> complex:
        n0, n1 = self.n_window
        l0, l1 = self.l_window
        if not (n0 <= n <= n1 and l0 <= l <= l1):
            raise WindowError(f"a[{n},{l}] outside kernel window n={self.n_window}, l={self.l_window}")
        return complex(self.table[n - n0, l - l0])

    def column(self, l: int) -> np.ndarray:
        l0, l1 = self.l_window
        if not l0 <= l <= l1:
            raise WindowError(f"angular mode {l} outside kernel window {self.l_window}")
        return self.table[:, l - l0]

    def exact_window(self, f: ModeFunction) -> Window:
        """Output circles of ``F f`` (or ``F* f``) fully determined by the table."""
        kr = f.k_range()
        if kr is None:
            return self.n_window
        return self.n_window[0] - kr[0], self.n_window[1] - kr[1]

    def max_parseval_defect(self) -> float:
        return float(np.max(self.parseval_defect))


def build_fourier_data(lattice: QLattice, n_window: Window, l_window: Window, n_theta: int,
                       *, tol: float = 1e-12, clip: float = DEFAULT_CLIP,
                       threads: int | None = None) -> FourierData:
    n0, n1 = n_window
    l0, l1 = l_window
    if n1 < n0 or l1 < l0:
        raise WindowError(f"empty kernel window n={n_window}, l={l_window}")
    ev = FqEvaluator(lattice, tol)
    if n_theta <= 2 * max(abs(l0), abs(l1)):
        raise ValueError(f"n_theta={n_theta} aliases angular window {l_window}")
    ls = np.arange(l0, l1 + 1)

    def one_circle(n: int):
        spectrum = ev.circle_spectrum(n, n_theta)
        defect = abs(float(np.sum(np.abs(spectrum) ** 2)) - 1.0)
        row = spectrum[ls % n_theta]
        row[np.abs(row) < clip] = 0.0
        return row, defect

    ns = range(n0, n1 + 1)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one_circle, ns))
    else:
        rows = [one_circle(n) for n in ns]
    table = np.array([r for r, _ in rows])
    defect = np.array([d for _, d in rows])
    table.setflags(write=False)
    defect.setflags(write=False)
    return FourierData(lattice, (n0, n1), (l0, l1), n_theta, table, defect)


@dataclass(frozen=True)
class TransformResult:
    function: ModeFunction
    window: Window
    tail: float  # estimated relative L2 mass beyond the window, inf if unresolved


def _resolve_window(exact: Window, requested: Window | None) -> Window:
    if requested is None:
        requested = exact
    lo, hi = requested
    if hi < lo:
        raise WindowError(f"empty output window {requested}")
    if lo < exact[0] or hi > exact[1]:
        raise WindowError(f"output window {requested} exceeds the exact window {exact}")
    return lo, hi


def _kernel_apply(f: ModeFunction, data: FourierData, window: Window, adjoint: bool) -> ModeFunction:
    q2 = data.lattice.q ** 2
    n0 = data.n_window[0]
    by_mode: dict[int, list[tuple[int, complex]]] = {}
    for (k, l), v in f.items():
        by_mode.setdefault(l, []).append((k, v))
    out: dict[Key, complex] = {}
    ms = np.arange(window[0], window[1] + 1)
    for l, terms in sorted(by_mode.items()):
        terms.sort()
        ks = np.array([k for k, _ in terms])
        vals = np.array([v for _, v in terms]) * q2 ** ks.astype(float)
        col = data.column(-l if adjoint else l)
        if adjoint:
            col = np.conj(col)
        idx = ms[:, None] + ks[None, :] - n0
        if idx.min() < 0 or idx.max() >= col.shape[0]:
            raise WindowError(f"output window {window} needs circles outside {data.n_window}")
        coeffs = col[idx] @ vals
        for m, c in zip(ms.tolist(), coeffs.tolist()):
            if c != 0:
                out[(m, -l)] = c
    return ModeFunction._wrap(data.lattice, out)


def fourier_apply(f: ModeFunction, data: FourierData, out_k_window: Window | None = None) -> TransformResult:
    window = _resolve_window(data.exact_window(f), out_k_window)
    g = _kernel_apply(f, data, window, adjoint=False)
    return TransformResult(g, window, tail_fraction(g, window))


def fourier_adjoint_apply(h: ModeFunction, data: FourierData,
                          out_k_window: Window | None = None) -> TransformResult:
    window = _resolve_window(data.exact_window(h), out_k_window)
    g = _kernel_apply(h, data, window, adjoint=True)
    return TransformResult(g, window, tail_fraction(g, window))


def fourier_direct_quadrature(f: ModeFunction, points: Sequence[CirclePoint], n_theta: int,
                              radial_window: Window | None = None, *, tol: float = 1e-12) -> np.ndarray:
    """``sum_k q^{2k} mean_theta F_q(zeta q^k e^{i theta}) f(q^k e^{i theta})`` per point."""
    lattice = f.lattice
    ev = FqEvaluator(lattice, tol)
    kr = radial_window or f.k_range()
    out = np.zeros(len(points), dtype=complex)
    if kr is None:
        return out
    thetas = TWO_PI * np.arange(n_theta) / n_theta
    ks = range(kr[0], kr[1] + 1)
    circles = {}
    for k in ks:
        row = f.circle(k)
        if not row:
            continue
        vals = np.zeros(n_theta, dtype=complex)
        for l, c in row.items():
            vals += c * np.exp(1j * l * thetas)
        circles[k] = vals
    for i, p in enumerate(points):
        total = 0j
        for k, vals in circles.items():
            kernel = ev.fq_circle(p.k + k, p.theta + thetas)
            total += lattice.mu_weight(k) * complex(np.mean(kernel * vals))
        out[i] = total
    return out


# --- residual machinery ------------------------------------------------------

def _window_mass(masses: dict[int, float], window: Window) -> float:
    return sum(m for k, m in masses.items() if window[0] <= k <= window[1])


def tail_fraction(f: ModeFunction, window: Window) -> float:
    """Relative L2 mass of ``f`` beyond ``window``, extrapolated geometrically.

    Each end uses the two outermost circles; a non-decaying end yields ``inf``.
    """
    masses = circle_masses(f)
    total = _window_mass(masses, window)
    if total == 0.0:
        return 0.0
    lo, hi = window
    if hi - lo < 2:
        return math.inf
    tail = 0.0
    for edge, inner in ((lo, lo + 1), (hi, hi - 1)):
        m1, m2 = masses.get(edge, 0.0), masses.get(inner, 0.0)
        if m1 <= _NEGLIGIBLE_MASS * total:
            continue
        if m2 == 0.0 or m1 >= m2:
            return math.inf
        r = m1 / m2
        tail += m1 * r / (1.0 - r)
    return math.sqrt(tail / total)


def _stencil(op: Callable[[ModeFunction], ModeFunction], lattice: QLattice) -> tuple[int, int]:
    """Range of input offsets ``o`` such that ``op(h)_k`` reads ``h_{k+o}``."""
    probe = ModeFunction(lattice, {(0, l): 1.0 for l in range(-3, 4)})
    ks = {k for k, _ in op(probe).coeffs}
    if not ks:
        return 0, 0
    return -max(ks), -min(ks)


def _after(window: Window, stencil: tuple[int, int]) -> Window:
    return window[0] - stencil[0], window[1] - stencil[1]


def _intersect(a: Window, b: Window) -> Window:
    return max(a[0], b[0]), min(a[1], b[1])


@dataclass(frozen=True)
class Relation:
    id: str
    anchor: str
    outer: Callable[[ModeFunction], ModeFunction]   # applied after the transform
    inner: Callable[[ModeFunction], ModeFunction]   # applied before the transform
    coeff: Callable[[float], float]


def _z(f):
    return mult_coord(f, OperatorId.Z)


def _zbar(f):
    return mult_coord(f, OperatorId.ZBAR)


def _d(which):
    return lambda f: q_diff(f, which)


def _ident(f):
    return f


RELATIONS: dict[str, Relation] = {r.id: r for r in [
    Relation("z_transform", "multiplication by z after the transform vs right z-derivative before",
             _z, _d(OperatorId.RZ), lambda q: q ** -2 - 1.0),
    Relation("zbar_transform", "multiplication by conj z after the transform vs right conj-z derivative before",
             _zbar, _d(OperatorId.RZBAR), lambda q: -(q ** 2 - q ** 4)),
    Relation("lz_transform", "left z-derivative after the transform vs multiplication by z before",
             _d(OperatorId.LZ), _z, lambda q: -1.0 / (1.0 - q * q)),
    Relation("lzbar_transform", "left conj-z derivative after the transform vs multiplication by conj z before",
             _d(OperatorId.LZBAR), _zbar, lambda q: 1.0 / (1.0 - q * q)),
    Relation("rz_transform", "right z-derivative after the transform vs z times rotated dilation before",
             _d(OperatorId.RZ), lambda f: _z(shift(f, 1, 1)), lambda q: -q ** 4 / (1.0 - q * q)),
    Relation("rzbar_transform", "right conj-z derivative after the transform vs conj z times rotated inverse dilation before",
             _d(OperatorId.RZBAR), lambda f: _zbar(shift(f, -1, 1)), lambda q: q ** -4 / (1.0 - q * q)),
    Relation("scaling_up", "inverse dilation with sigma_{-i} intertwined with dilation with sigma_i",
             lambda f: shift(f, -1, -1), lambda f: shift(f, 1, 1), lambda q: q * q),
    Relation("scaling_down", "dilation with sigma_{-i} intertwined with inverse dilation with sigma_i",
             lambda f: shift(f, 1, -1), lambda f: shift(f, -1, 1), lambda q: q ** -2),
    Relation("sigma_transform", "sigma_{-i} after the transform equals sigma_i before",
             lambda f: shift(f, 0, -1), lambda f: shift(f, 0, 1), lambda q: 1.0),
]}

# Coefficient exactly as first printed for the conj-z right-derivative
# relation; kept so the discrepancy stays measurable.
RZBAR_PRINTED = Relation(
    "rzbar_transform_printed", "right conj-z derivative relation with coefficient q^4/(1-q^2)",
    _d(OperatorId.RZBAR), lambda f: _zbar(shift(f, -1, 1)), lambda q: q ** 4 / (1.0 - q * q))


@dataclass(frozen=True)
class ResidualResult:
    interior: float   # relative L2 gap on the common exact window
    tail: float       # unverified relative mass beyond that window
    window: Window

    @property
    def residual(self) -> float:
        return self.interior + self.tail


def _restrict_norm(f: ModeFunction, window: Window) -> float:
    return math.sqrt(_window_mass(circle_masses(f), window))


def relation_residual(relation: Relation | str, f: ModeFunction, data: FourierData) -> ResidualResult:
    rel = RELATIONS[relation] if isinstance(relation, str) else relation
    lattice = data.lattice
    if f.k_range() is None:
        return ResidualResult(0.0, 0.0, data.n_window)
    # left side: transform on its exact window, then the outer operator
    f_win = data.exact_window(f)
    if f_win[1] < f_win[0]:
        raise WindowError(f"support of f does not fit kernel window {data.n_window}")
    lhs_in = _kernel_apply(f, data, f_win, adjoint=False)
    lhs = rel.outer(lhs_in)
    lhs_win = _after(f_win, _stencil(rel.outer, lattice))
    # right side: inner operator, then the transform on its exact window
    g = rel.inner(f)
    rhs_win = data.exact_window(g)
    win = _intersect(lhs_win, rhs_win)
    if win[1] - win[0] < 2:
        raise WindowError(f"common exact window {win} too small; enlarge the kernel window {data.n_window}")
    rhs = rel.coeff(lattice.q) * _kernel_apply(g, data, win, adjoint=False)
    lhs = lhs.restrict(win)
    denom = _restrict_norm(rhs, win) or _restrict_norm(lhs, win)
    if denom == 0.0:
        return ResidualResult(0.0, 0.0, win)
    interior = _restrict_norm(lhs - rhs, win) / denom
    tail = max(tail_fraction(lhs, win), tail_fraction(rhs, win))
    return ResidualResult(interior, tail, win)


def plancherel_residual(k: int, l: int, data: FourierData,
                        out_window: Window | None = None) -> ResidualResult:
    """Relative gap between ``F* F g_{k,l}`` and ``q^{2-2l} g_{k,l}`` on ``out_window``.

    The intermediate ``F g_{k,l}`` is kept on the largest window for which the
    adjoint still reads only tabulated kernel entries, so the only error is
    the truncation of that intermediate sum.
    """
    lattice = data.lattice
    out_window = out_window or (k - 3, k + 3)
    n0, n1 = data.n_window
    mid = (n0 - out_window[0], n1 - out_window[1])
    if not out_window[0] <= k <= out_window[1]:
        raise WindowError(f"output window {out_window} must contain circle {k}")
    if mid[1] - mid[0] < 2:
        raise WindowError(f"kernel window {data.n_window} too small for output window {out_window}")
    g = basis(lattice, k, l)
    h = _kernel_apply(g, data, mid, adjoint=False)
    back = _kernel_apply(h, data, out_window, adjoint=True)
    expected = lattice.q ** (2 - 2 * l) * g
    gap = _restrict_norm(back - expected, out_window) / _restrict_norm(expected, out_window)
    return ResidualResult(gap, 0.0, out_window)


def unitarity_defect(test_window: tuple[Window, Window], data: FourierData, *, literal: bool = False) -> float:
    """Max Gram-matrix defect of ``q^{-1} F sigma_i`` on normalized basis functions.

    ``test_window`` is ``((k_min, k_max), (l_min, l_max))``. With
    ``literal=True`` the rescaled operator uses ``sigma_{-i}`` instead.
    """
    lattice = data.lattice
    q = lattice.q
    (k0, k1), (l0, l1) = test_window
    win = (data.n_window[0] - k0, data.n_window[1] - k1)
    if win[1] < win[0]:
        raise WindowError(f"test window {test_window[0]} does not fit kernel window {data.n_window}")
    s = -1 if literal else 1
    images: dict[Key, ModeFunction] = {}
    for k in range(k0, k1 + 1):
        for l in range(l0, l1 + 1):
            b = shift(basis(lattice, k, l), 0, s) * (q ** -k / q)
            images[(k, l)] = _kernel_apply(b, data, win, adjoint=False)
    keys = sorted(images)
    worst = 0.0
    for i, a in enumerate(keys):
        for b in keys[i:]:
            gram = _gram(images[a], images[b])
            worst = max(worst, abs(gram - (1.0 if a == b else 0.0)))
    return worst


def _gram(f: ModeFunction, g: ModeFunction) -> complex:
    gc = g.coeffs
    return complex(sum(f.lattice.mu_weight(k) * v.conjugate() * gc.get((k, l), 0j)
                       for (k, l), v in f.items()))
