"""Verification suites and their report.

Every check yields one :class:`Record`. ``hard`` records decide the exit
code; ``reference`` records carry target figures that are reported but do
not gate (the truncated transform only approaches them as windows grow).
Random test functions come from ``numpy.random.default_rng([seed, suite])``
(PCG64 seeded through ``SeedSequence``), so every suite draws the same
functions whichever other suites run alongside it.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import calculus as qc
from . import forms as qf
from .calculus import OperatorId
from .fourier import (RELATIONS, WindowError, build_fourier_data, fourier_adjoint_apply,
                      fourier_apply, fourier_direct_quadrature, plancherel_residual,
                      relation_residual, unitarity_defect)
from .io import dumps, fmt_float
from .lattice import TWO_PI, CirclePoint, QLattice, chi, integrate_haar_gamma
from .modes import (ModeFunction, basis, conjugate, inner_product, integrate_mu, integrate_mu_samples,
                    multiply, norm, random_mode_function, relative_gap, to_samples)
from .qexp import FqEvaluator

SUITES = ("measure", "calculus", "forms", "fq", "fourier")
FORMATS = ("json", "csv", "text")

# test functions for the transform suite live on this (k, l) rectangle
FOURIER_TEST_K = (-3, 3)
FOURIER_TEST_L = (-4, 4)
# kernel windows extend the configured window by this many circles / modes
FOURIER_PAD = 4
FOURIER_SWEEP_STEP = 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class VerifyConfig:
    q: float = 0.5
    k_window: tuple[int, int] = (-8, 8)
    l_window: tuple[int, int] = (-12, 12)
    n_theta: int = 256
    tol_exact: float = 1e-12
    tol_quad: float = 1e-3
    suites: tuple[str, ...] = SUITES
    seed: int = 0
    n_functions: int = 50
    n_fourier_functions: int = 5
    threads: int = 1
    fmt: str = "json"

    def __post_init__(self):
        if not (isinstance(self.q, (int, float)) and 0.0 < self.q < 1.0):
            raise ConfigError(f"q must satisfy 0 < q < 1, got {self.q}")
        for name in ("k_window", "l_window"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise ConfigError(f"{name} is empty: {(lo, hi)}")
        if self.n_theta < 4 or self.n_theta & (self.n_theta - 1):
            raise ConfigError(f"n_theta must be a power of two >= 4, got {self.n_theta}")
        if self.n_theta <= 2 * max(abs(self.l_window[0]), abs(self.l_window[1])) + 2:
            raise ConfigError(f"n_theta={self.n_theta} cannot resolve l_window={self.l_window}")
        if not (0.0 < self.tol_exact <= self.tol_quad):
            raise ConfigError(f"need 0 < tol_exact <= tol_quad, got {self.tol_exact}, {self.tol_quad}")
        bad = [s for s in self.suites if s not in SUITES]
        if bad or not self.suites:
            raise ConfigError(f"unknown or empty suite selection {list(self.suites)}; choose from {list(SUITES)}")
        if self.n_functions < 1 or self.n_fourier_functions < 1:
            raise ConfigError("need at least one random test function")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.fmt!r}")

    @property
    def lattice(self) -> QLattice:
        return QLattice(self.q)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        d.pop("fmt")
        d["k_window"] = list(self.k_window)
        d["l_window"] = list(self.l_window)
        d["suites"] = list(self.suites)
        return d

    def rng(self, suite: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, SUITES.index(suite)])


@dataclass
class Record:
    id: str
    anchor: str
    residual: float | None
    threshold: float
    passed: bool
    comparison: str = "<="
    kind: str = "hard"
    tail: float | None = None
    params: dict = field(default_factory=dict)
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "kind": self.kind,
            "passed": self.passed,
            "residual": self.residual,
            "comparison": self.comparison,
            "threshold": self.threshold,
            "tail": self.tail,
            "params": self.params,
            "error": self.error,
        }


def _judge(residual: float, threshold: float, comparison: str) -> bool:
    if residual is None or math.isnan(residual):
        return False
    return residual <= threshold if comparison == "<=" else residual >= threshold


class Checks:
    """Accumulates the records of one suite."""

    def __init__(self):
        self.records: list[Record] = []

    def add(self, id: str, anchor: str, residual: float, threshold: float, *,
            comparison: str = "<=", kind: str = "hard", tail: float | None = None, **params) -> Record:
        residual = float(residual)
        rec = Record(id, anchor, residual, threshold, _judge(residual, threshold, comparison),
                     comparison, kind, tail, params)
        self.records.append(rec)
        return rec

    def fail(self, id: str, anchor: str, threshold: float, error: Exception, kind: str = "hard", **params) -> None:
        self.records.append(Record(id, anchor, None, threshold, False, kind=kind, params=params,
                                   error=f"{type(error).__name__}: {error}"))


@dataclass
class Report:
    config: VerifyConfig
    records: list[Record]
    wall_time: float = 0.0

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: r.id)
        ids = [r.id for r in self.records]
        if len(ids) != len(set(ids)):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise RuntimeError(f"duplicate check ids {dup}")

    @property
    def hard_failures(self) -> list[Record]:
        return [r for r in self.records if r.kind == "hard" and not r.passed]

    @property
    def exit_code(self) -> int:
        return 1 if self.hard_failures else 0

    def summary(self) -> dict:
        hard = [r for r in self.records if r.kind == "hard"]
        ref = [r for r in self.records if r.kind == "reference"]
        return {
            "total": len(self.records),
            "hard_passed": sum(r.passed for r in hard),
            "hard_failed": sum(not r.passed for r in hard),
            "reference_met": sum(r.passed for r in ref),
            "reference_missed": sum(not r.passed for r in ref),
        }

    def to_json(self, include_time: bool = True) -> str:
        doc = {
            "config": self.config.echo(),
            "summary": self.summary(),
            "records": [r.as_dict() for r in self.records],
        }
        if include_time:
            doc["wall_time_s"] = self.wall_time
        return dumps(doc) + "\n"

    def to_csv(self) -> str:
        lines = ["id,kind,passed,residual,comparison,threshold,tail,error"]
        for r in self.records:
            cells = [r.id, r.kind, "true" if r.passed else "false",
                     "" if r.residual is None else fmt_float(r.residual).strip('"'),
                     r.comparison, fmt_float(r.threshold),
                     "" if r.tail is None else fmt_float(r.tail).strip('"'),
                     (r.error or "").replace(",", ";")]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        out = []
        for r in self.records:
            status = "PASS" if r.passed else ("MISS" if r.kind == "reference" else "FAIL")
            res = "error" if r.residual is None else f"{r.residual:.3e}"
            line = f"{status:4} {r.id:44} {res:>10} {r.comparison} {r.threshold:.1e}"
            if r.error:
                line += f"  [{r.error}]"
            out.append(line)
        s = self.summary()
        out.append(f"hard: {s['hard_passed']} passed, {s['hard_failed']} failed; "
                   f"reference: {s['reference_met']} met, {s['reference_missed']} missed")
        return "\n".join(out) + "\n"

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "csv": self.to_csv, "text": self.to_text}[fmt]()


# --- helpers -----------------------------------------------------------------

def _gap(a: ModeFunction, b: ModeFunction, *refs: ModeFunction) -> float:
    return relative_gap(a, b, *refs)


def _functions(cfg: VerifyConfig, suite: str, n: int | None = None,
               k_window=None, l_window=None) -> list[ModeFunction]:
    rng = cfg.rng(suite)
    lat = cfg.lattice
    return [random_mode_function(lat, k_window or cfg.k_window, l_window or cfg.l_window, rng)
            for _ in range(n or cfg.n_functions)]


def _pairs(fs: list[ModeFunction]) -> list[tuple[ModeFunction, ModeFunction]]:
    return list(zip(fs, fs[1:] + fs[:1]))


def _max(values: Iterable[float]) -> float:
    return max(values, default=0.0)


# --- measure -----------------------------------------------------------------

def suite_measure(cfg: VerifyConfig) -> list[Record]:
    c = Checks()
    lat = cfg.lattice
    q = lat.q
    k0, k1 = cfg.k_window
    l0, l1 = cfg.l_window
    tol = cfg.tol_exact
    fs = _functions(cfg, "measure")
    rng = cfg.rng("measure")

    worst = 0.0
    for k, l in itertools.product(range(k0, k1 + 1), range(l0, l1 + 1)):
        g = basis(lat, k, l)
        for kk in (k - 1, k, k + 1):
            for ll in range(l0, l1 + 1):
                expected = lat.mu_weight(k) if (kk, ll) == (k, l) else 0.0
                worst = max(worst, abs(inner_product(g, basis(lat, kk, ll)) - expected) / lat.mu_weight(k))
    c.add("measure.orthogonality", "orthogonality of the circle-mode basis", worst, tol)

    # Gram matrix of sampled basis modes on one circle, by quadrature
    thetas = TWO_PI * np.arange(cfg.n_theta) / cfg.n_theta
    modes = np.exp(1j * np.outer(thetas, np.arange(l0, l1 + 1)))
    gram = modes.conj().T @ modes / cfg.n_theta
    c.add("measure.orthogonality_quadrature", "orthogonality of the circle-mode basis by quadrature",
          float(np.max(np.abs(gram - np.eye(l1 - l0 + 1)))), tol)

    worst_q = worst_h = worst_s = 0.0
    for f in fs:
        exact = integrate_mu(f)
        scale = sum(lat.mu_weight(k) * abs(v) for (k, l), v in f.items() if l == 0) or 1.0
        s = to_samples(f, cfg.k_window, cfg.n_theta)
        worst_q = max(worst_q, abs(integrate_mu_samples(s) - exact) / scale)
        weighted = {k: lat.mu_weight(k) * s.row(k) for k in range(k0, k1 + 1)}
        worst_h = max(worst_h, abs(integrate_haar_gamma(weighted) - exact) / scale)
        worst_s = max(worst_s, abs(integrate_mu(qc.shift(f, 1, 0)) - exact / (q * q)) / (scale / (q * q)))
    c.add("measure.integral_quadrature", "covariant measure as weighted circle means", worst_q, tol)
    c.add("measure.haar_push_forward", "covariant measure as push-forward of |gamma|^2 times Haar", worst_h, tol)
    c.add("measure.dilation_scaling", "integral of a dilated function scales by q^-2", worst_s, tol)

    for op in qc.DIFF_OPS:
        worst = 0.0
        for f in fs:
            out = qc.q_diff(f, op)
            scale = sum(lat.mu_weight(k) * abs(v) for (k, l), v in out.items() if l == 0) or 1.0
            worst = max(worst, abs(qc.stokes_integral(f, op)) / scale)
        c.add(f"measure.stokes.{op.value.lower()}", "integral of a q-derivative vanishes", worst, tol)

    # any other weighting breaks Stokes for some function and operator
    probe = fs[: min(len(fs), 5)]
    weakest = math.inf
    for kp in range(-2, 3):
        w = qc.perturbed_weights(lat, kp, 0.1)
        strongest = 0.0
        for f in probe:
            for op in qc.DIFF_OPS:
                out = qc.q_diff(f, op)
                scale = sum(w(k) * abs(v) for (k, l), v in out.items() if l == 0) or 1.0
                strongest = max(strongest, abs(qc.stokes_integral(f, op, w)) / scale)
        weakest = min(weakest, strongest)
    c.add("measure.uniqueness_probe", "perturbed circle weights violate Stokes", weakest, 1e3 * tol,
          comparison=">=", k0_range=[-2, 2], epsilon=0.1)

    pts = [CirclePoint(int(rng.integers(k0, k1 + 1)), float(rng.uniform(0, TWO_PI))) for _ in range(300)]
    sym = mult = uni = 0.0
    for a, b, d in zip(pts[0::3], pts[1::3], pts[2::3]):
        sym = max(sym, abs(chi(a, b) - chi(b, a)))
        mult = max(mult, abs(chi(a * b, d) - chi(a, d) * chi(b, d)))
        uni = max(uni, abs(abs(chi(a, b)) - 1.0))
    c.add("measure.chi_symmetric", "bicharacter symmetry", sym, 1e-15)
    c.add("measure.chi_multiplicative", "bicharacter multiplicativity", mult, tol)
    c.add("measure.chi_unimodular", "bicharacter has modulus one", uni, 1e-15)
    return c.records


# --- calculus ----------------------------------------------------------------

def printed_action(which: OperatorId, k: int, l: int, q: float) -> list[tuple[int, int, float]]:
    """Image of ``g_{k,l}`` under a q-derivative as ``(k', l', coefficient)`` terms."""
    cr = 1.0 / (q ** -2 - 1.0)
    cl = 1.0 / (1.0 - q * q)
    return {
        OperatorId.RZ: [(k + 1, l - 1, cr * q ** (-l - (k + 1))), (k, l - 1, -cr * q ** (-k))],
        OperatorId.LZ: [(k, l - 1, cl * q ** (-k)), (k - 1, l - 1, -cl * q ** (l - (k - 1)))],
        OperatorId.RZBAR: [(k, l + 1, cl * q ** (-k)), (k - 1, l + 1, -cl * q ** (-l - (k - 1)))],
        OperatorId.LZBAR: [(k + 1, l + 1, cr * q ** (l - (k + 1))), (k, l + 1, -cr * q ** (-k))],
    }[which]


def suite_calculus(cfg: VerifyConfig) -> list[Record]:
    c = Checks()
    lat = cfg.lattice
    q = lat.q
    tol = cfg.tol_exact
    fs = _functions(cfg, "calculus")
    rng = cfg.rng("calculus")
    pairs = _pairs(fs)
    d = {op: [qc.q_diff(f, op) for f in fs] for op in qc.DIFF_OPS}
    RZ, LZ, RZBAR, LZBAR = OperatorId.RZ, OperatorId.LZ, OperatorId.RZBAR, OperatorId.LZBAR

    for op in qc.DIFF_OPS:
        worst = 0.0
        for k, l in itertools.product(range(cfg.k_window[0], cfg.k_window[1] + 1),
                                      range(cfg.l_window[0], cfg.l_window[1] + 1)):
            expected = ModeFunction(lat, {(kk, ll): v for kk, ll, v in printed_action(op, k, l, q)})
            worst = max(worst, _gap(qc.q_diff(basis(lat, k, l), op), expected))
        c.add(f"calculus.generator_action.{op.value.lower()}", "q-derivatives on the circle-mode basis", worst, tol)

    for op in qc.DIFF_OPS:
        worst = _max(_gap(out, qc.q_diff_pointwise(f, op)) for f, out in zip(fs, d[op]))
        c.add(f"calculus.two_route.{op.value.lower()}", "difference quotient of continuations vs mode recurrence",
              worst, tol)

    c.add("calculus.left_right.z", "right z-derivative is a shifted left z-derivative",
          _max(_gap(r, qc.shift(lft, -1, -1)) for r, lft in zip(d[RZ], d[LZ])), tol)
    c.add("calculus.left_right.zbar", "right conj-z derivative is a shifted left conj-z derivative",
          _max(_gap(r, qc.shift(lft, 1, -1)) for r, lft in zip(d[RZBAR], d[LZBAR])), tol)

    conj = [conjugate(f) for f in fs]
    c.add("calculus.star.lz", "conjugation exchanges left z and right conj-z derivatives",
          _max(_gap(qc.q_diff(cf, LZ), conjugate(x)) for cf, x in zip(conj, d[RZBAR])), tol)
    c.add("calculus.star.lzbar", "conjugation exchanges left conj-z and right z derivatives",
          _max(_gap(qc.q_diff(cf, LZBAR), conjugate(x)) for cf, x in zip(conj, d[RZ])), tol)

    leibniz = {
        RZ: lambda f, g, df, dg: (multiply(df, qc.shift(g, -1, -1)), multiply(f, dg)),
        LZBAR: lambda f, g, df, dg: (multiply(df, g), multiply(qc.shift(f, -1, 1), dg)),
        LZ: lambda f, g, df, dg: (multiply(df, g), multiply(qc.shift(f, 1, 1), dg)),
        RZBAR: lambda f, g, df, dg: (multiply(df, qc.shift(g, 1, -1)), multiply(f, dg)),
    }
    n_leibniz = min(len(pairs), 10)
    for op, rule in leibniz.items():
        worst = 0.0
        for f, g in pairs[:n_leibniz]:
            a, b = rule(f, g, qc.q_diff(f, op), qc.q_diff(g, op))
            worst = max(worst, _gap(qc.q_diff(multiply(f, g), op), a + b, a, b))
        c.add(f"calculus.leibniz.{op.value.lower()}", "twisted Leibniz rule on products", worst, tol,
              pairs=n_leibniz)

    mixed = {"normality.right": (RZ, RZBAR), "normality.left": (LZ, LZBAR),
             "commute.rz_lzbar": (RZ, LZBAR), "commute.lz_rzbar": (LZ, RZBAR)}
    for name, (a, b) in mixed.items():
        worst = _max(_gap(qc.q_diff(x, a), qc.q_diff(y, b))
                     for x, y in zip(d[b], d[a]))
        c.add(f"calculus.{name}", "z and conj-z derivatives commute", worst, tol)
    # same-variable pairs only commute up to a power of q
    c.add("calculus.q_commute.z", "left and right z-derivatives q-commute",
          _max(_gap(qc.q_diff(x, RZ), q * q * qc.q_diff(y, LZ)) for x, y in zip(d[LZ], d[RZ])), tol)
    c.add("calculus.q_commute.zbar", "left and right conj-z derivatives q-commute",
          _max(_gap(qc.q_diff(x, RZBAR), qc.q_diff(y, LZBAR) / (q * q)) for x, y in zip(d[LZBAR], d[RZBAR])),
          tol)

    for pair in qc.ADJOINT_PAIRS:
        a, b = pair
        coeff = abs(qc.ADJOINT_PAIRS[pair](q))
        worst = 0.0
        for f, g in pairs:
            scale = norm(f) * norm(qc.q_diff(g, a)) + coeff * norm(qc.q_diff(f, b)) * norm(g)
            worst = max(worst, abs(qc.adjoint_residual(pair, f, g)) / scale)
        c.add(f"calculus.adjoint.{a.value.lower()}_{b.value.lower()}",
              "adjoint of a q-derivative in the covariant inner product", worst, tol)

    worst = 0.0
    for f in fs[:10]:
        t, s = rng.uniform(-5, 5, size=2)
        worst = max(worst, _gap(qc.sigma(qc.sigma(f, s), t), qc.sigma(f, t + s)))
    c.add("calculus.sigma_group", "rotation automorphisms form a one-parameter group", worst, tol)

    worst = 0.0
    for f in fs[:10]:
        m1, s1, m2, s2 = (int(x) for x in rng.integers(-2, 3, size=4))
        worst = max(worst, _gap(qc.shift(qc.shift(f, m1, s1), m2, s2), qc.shift(f, m1 + m2, s1 + s2)))
    c.add("calculus.shift_group", "dilations and continuations compose additively", worst, tol)

    c.add("calculus.coordinates_commute", "multiplication by z and conj z commute",
          _max(_gap(qc.mult_coord(qc.mult_coord(f, "Z"), "ZBAR"), qc.mult_coord(qc.mult_coord(f, "ZBAR"), "Z"))
               for f in fs), tol)
    return c.records


# --- forms -------------------------------------------------------------------

def _form_gap(a, b, *refs) -> float:
    scale = max([a.max_abs(), b.max_abs()] + [r.max_abs() for r in refs])
    gap = a.max_diff(b)
    return gap / scale if scale else gap


def suite_forms(cfg: VerifyConfig) -> list[Record]:
    c = Checks()
    tol = cfg.tol_exact
    fs = _functions(cfg, "forms")
    pairs = _pairs(fs)[: min(len(fs), 10)]

    worst = 0.0
    for f in fs:
        df = qf.d0(f)
        # d1 d0 f is the difference of these two second derivatives
        a, b = qc.q_diff(df.beta, OperatorId.LZ), qc.q_diff(df.alpha, OperatorId.LZBAR)
        worst = max(worst, qf.d1(df).gamma.max_abs() / max(a.max_abs(), b.max_abs()))
    c.add("forms.d_squared", "exterior derivative squares to zero", worst, tol)

    worst = 0.0
    for f, g in pairs:
        a, b = qf.d0(f).right_mul(g), qf.d0(g).left_mul(f)
        worst = max(worst, _form_gap(qf.d0(multiply(f, g)), a + b, a, b))
    c.add("forms.leibniz_d0", "Leibniz rule for d on functions", worst, tol, pairs=len(pairs))

    worst_l = worst_r = 0.0
    for f, g in pairs:
        w = qf.Form1(g, f)
        a, b = qf.wedge(qf.d0(f), w), qf.d1(w).left_mul(f)
        worst_l = max(worst_l, _form_gap(qf.d1(w.left_mul(f)), a + b, a, b))
        a, b = qf.d1(w).right_mul(g), qf.wedge(w, qf.d0(g))
        worst_r = max(worst_r, _form_gap(qf.d1(w.right_mul(g)), a - b, a, b))
    c.add("forms.leibniz_d1_left", "graded Leibniz rule for d on f.w", worst_l, tol, pairs=len(pairs))
    c.add("forms.leibniz_d1_right", "graded Leibniz rule for d on w.g", worst_r, tol, pairs=len(pairs))

    c.add("forms.star_d0", "d commutes with the star structure",
          _max(_form_gap(qf.star(qf.d0(f)), qf.d0(conjugate(f))) for f in fs), tol)
    c.add("forms.star_involution", "star on 1-forms is an involution",
          _max(_form_gap(qf.star(qf.star(qf.Form1(f, g))), qf.Form1(f, g)) for f, g in pairs), tol)

    worst = 0.0
    for f in fs:
        ex = qf.df_expansions(f)
        worst = max(worst, *(_form_gap(ex["left"], v) for v in ex.values()))
    c.add("forms.df_expansions", "four expansions of df agree", worst, tol)

    worst = 0.0
    for f in fs:
        for direction in qf.Direction:
            worst = max(worst, _gap(qf.commute_back(qf.commute_through(f, direction), direction), f))
    c.add("forms.commute_round_trip", "moving a coefficient across dz or dzbar and back", worst, tol)

    worst = 0.0
    for f, g in pairs:
        w = qf.Form1(f, g)
        worst = max(worst, _form_gap(qf.from_omega_frame(*qf.to_omega_frame(w)), w))
    c.add("forms.omega_frame_round_trip", "dz/dzbar frame to omega frame and back", worst, tol)
    return c.records


# --- quantum exponential -----------------------------------------------------

def suite_fq(cfg: VerifyConfig) -> list[Record]:
    c = Checks()
    lat = cfg.lattice
    q = lat.q
    ev = FqEvaluator(lat)
    rng = cfg.rng("fq")
    k0, k1 = cfg.k_window

    pts = [CirclePoint(int(rng.integers(k0, k1 + 1)), float(rng.uniform(0, TWO_PI))) for _ in range(1000)]
    singular = [CirclePoint(k, math.pi) for k in range(min(k0, 0), 1) if k % 2 == 0]
    worst = _max(abs(abs(ev.fq_point(p)) - 1.0) for p in pts + singular)
    c.add("fq.unimodular", "quantum exponential has modulus one", worst, 1e-10,
          points=len(pts) + len(singular))
    c.add("fq.positive_axis", "quantum exponential is 1 on the positive real axis",
          _max(abs(ev.fq_point(CirclePoint(k, 0.0)) - 1.0) for k in range(k0, k1 + 1)), 1e-14)
    c.add("fq.minus_one", "along-circle value at z = -1", abs(ev.fq_point(CirclePoint(0, math.pi)) + 1.0), 1e-12)

    n_theta = 2 * cfg.n_theta
    worst = 0.0
    for n in range(k0 - FOURIER_PAD, k1 + FOURIER_PAD + 1):
        spectrum = ev.circle_spectrum(n, n_theta)
        worst = max(worst, abs(float(np.sum(np.abs(spectrum) ** 2)) - 1.0))
    c.add("fq.circle_parseval", "angular coefficients of the quantum exponential have unit energy", worst, 1e-10,
          n_theta=n_theta)

    small = ev.fq_circle_coeffs(20, (-4, 4), n_theta)
    c.add("fq.small_circle", "kernel tends to 1 near the origin", abs(small[0] - 1.0), 1e-8, circle=20)
    # first-order term (conj z - z)/(1 - q^2) bounds the other modes
    bound = 2.0 * q ** 20 / (1.0 - q * q)
    c.add("fq.small_circle_modes", "kernel tends to 1 near the origin",
          _max(abs(v) for l, v in small.items() if l != 0) / bound, 1.0, circle=20)

    worst = 0.0
    for _ in range(200):
        u = complex(*rng.standard_normal(2)) * 10 ** rng.uniform(-3, 3)
        v = complex(*rng.standard_normal(2)) * 10 ** rng.uniform(-3, 3)
        lhs = ev.fq_extended(q * q * u, q * q * v)
        rhs = ev.fq_extended(u, v) * (1 + u) / (1 + v)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    c.add("fq.functional_equation", "two-argument product telescopes under q^2 scaling", worst, 1e-10)

    for which in ("LZ", "LZBAR"):
        worst, skipped = 0.0, 0
        for _ in range(200):
            zeta = CirclePoint(int(rng.integers(k0, k1 + 1)), float(rng.uniform(0, TWO_PI)))
            z = CirclePoint(int(rng.integers(k0, k1 + 1)), float(rng.uniform(0, TWO_PI)))
            r, s = ev.fq_diff_identity_residual(zeta, [z], which=which)
            worst, skipped = max(worst, r), skipped + len(s)
        c.add(f"fq.derivative_identity.{which.lower()}", "left derivatives of the quantum exponential",
              worst, 1e-9, skipped=skipped)
    real = [CirclePoint(k, 0.0) for k in range(k0, k1 + 1)]
    c.add("fq.derivative_identity.real_axis", "left derivative on the real axis",
          _max(ev.fq_diff_identity_residual(CirclePoint(k, 0.0), real)[0] for k in range(k0, k1 + 1)), 1e-10)
    return c.records


# --- Fourier transform -------------------------------------------------------

def fourier_windows(cfg: VerifyConfig) -> tuple[list[tuple[int, int]], tuple[int, int]]:
    """Kernel radial windows of the sweep (middle one is the reference) and the angular window."""
    k0, k1 = cfg.k_window
    base = (k0 - FOURIER_PAD, k1 + FOURIER_PAD)
    step = FOURIER_SWEEP_STEP
    sweep = [(base[0] + step, base[1] - step), base, (base[0] - step, base[1] + step)]
    l_win = (cfg.l_window[0] - FOURIER_PAD, cfg.l_window[1] + FOURIER_PAD)
    return sweep, l_win


def convergence_figure(curve: list[float]) -> float:
    """Below 1 iff every step strictly decreases and the total drop is at least 2x."""
    ratios = []
    for a, b in zip(curve, curve[1:]):
        if math.isinf(a) and math.isinf(b):
            return math.inf
        ratios.append(0.0 if math.isinf(a) else (b / a if a > 0 else (0.0 if b == 0 else math.inf)))
    if not ratios:
        return math.nan
    total = 0.0 if math.isinf(curve[0]) else (curve[-1] / curve[0] if curve[0] > 0 else 0.0)
    return max(max(ratios), 2.0 * total)


def suite_fourier(cfg: VerifyConfig) -> list[Record]:
    c = Checks()
    lat = cfg.lattice
    sweep, l_win = fourier_windows(cfg)
    n_theta = 2 * cfg.n_theta
    rng = cfg.rng("fourier")
    fs = _functions(cfg, "fourier", cfg.n_fourier_functions, FOURIER_TEST_K, FOURIER_TEST_L)
    test_fns = [basis(lat, 0, 0)] + fs
    plancherel_keys = [(k, l) for k in range(-2, 3) for l in range(-3, 4)]
    unit_window = ((-2, 2), (-3, 3))

    datas = [build_fourier_data(lat, w, l_win, n_theta, threads=cfg.threads) for w in sweep]
    ref = datas[1]
    params = {"kernel_window": list(ref.n_window), "l_window": list(l_win), "n_theta": n_theta}

    c.add("fourier.kernel_parseval", "angular coefficients of the kernel have unit energy",
          max(d.max_parseval_defect() for d in datas), 1e-8, **params)

    def guarded(id_, anchor, threshold, fn: Callable[[], float], **kw):
        try:
            c.add(id_, anchor, fn(), threshold, **kw)
        except WindowError as exc:
            c.fail(id_, anchor, threshold, exc, **kw)

    def two_route() -> float:
        worst = 0.0
        for f in (test_fns[0], test_fns[1 % len(test_fns)]):
            res = fourier_apply(f, ref)
            lo, hi = res.window
            pts = [CirclePoint(int(rng.integers(max(lo, -6), min(hi, 6) + 1)), float(rng.uniform(0, TWO_PI)))
                   for _ in range(20)]
            direct = fourier_direct_quadrature(f, pts, n_theta)
            mode = np.array([res.function.evaluate(p.k, p.theta) for p in pts])
            worst = max(worst, float(np.max(np.abs(direct - mode)) / np.max(np.abs(direct))))
        return worst

    guarded("fourier.two_route", "transform by kernel table vs direct quadrature", 1e-8, two_route, **params)

    def mode_sign() -> float:
        worst = 0.0
        for k, l in itertools.product(range(-2, 3), range(-3, 4)):
            g = basis(lat, k, l)
            for res in (fourier_apply(g, ref), fourier_adjoint_apply(g, ref)):
                worst = max(worst, _max(abs(v) for (m, j), v in res.function.items() if j != -l))
        return worst

    guarded("fourier.mode_sign", "transform maps mode l to mode -l", 0.0, mode_sign, **params)

    def adjointness() -> float:
        worst = 0.0
        for f, h in _pairs(fs):
            a = inner_product(h, fourier_apply(f, ref).function)
            b = inner_product(fourier_adjoint_apply(h, ref).function, f)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
        return worst

    guarded("fourier.adjointness", "conjugate kernel gives the adjoint transform", 1e-10, adjointness, **params)

    for rid, rel in RELATIONS.items():
        anchor = rel.anchor
        try:
            curve, interiors = [], []
            for d in datas:
                results = [relation_residual(rel, f, d) for f in test_fns]
                curve.append(max(r.residual for r in results))
                interiors.append(max(r.interior for r in results))
        except WindowError as exc:
            c.fail(f"fourier.relation.{rid}", anchor, cfg.tol_quad, exc, kind="reference", **params)
            c.fail(f"fourier.relation.{rid}.convergence", anchor, 1.0, exc, **params)
            c.fail(f"fourier.relation.{rid}.interior", anchor, cfg.tol_exact * 1e3, exc, **params)
            continue
        windows = [list(d.n_window) for d in datas]
        c.add(f"fourier.relation.{rid}", anchor, curve[1], cfg.tol_quad, kind="reference",
              curve=curve, windows=windows, **params)
        c.add(f"fourier.relation.{rid}.convergence", anchor, convergence_figure(curve), 1.0,
              curve=curve, windows=windows)
        # inside the exact window the relation holds to rounding
        c.add(f"fourier.relation.{rid}.interior", anchor, max(interiors), 1e3 * cfg.tol_exact,
              curve=interiors, windows=windows)

    try:
        pl_curve = [max(plancherel_residual(k, l, d).residual for k, l in plancherel_keys) for d in datas]
        un_curve = [unitarity_defect(unit_window, d) for d in datas]
    except WindowError as exc:
        for id_ in ("fourier.plancherel", "fourier.unitarity"):
            c.fail(id_, "adjoint transform inverts the transform up to q^(2-2l)", cfg.tol_quad, exc)
            c.fail(id_ + ".convergence", "adjoint transform inverts the transform up to q^(2-2l)", 1.0, exc)
        return c.records
    windows = [list(d.n_window) for d in datas]
    c.add("fourier.plancherel", "adjoint transform inverts the transform up to q^(2-2l)",
          pl_curve[-1], cfg.tol_quad, curve=pl_curve, windows=windows)
    c.add("fourier.plancherel.convergence", "adjoint transform inverts the transform up to q^(2-2l)",
          convergence_figure(pl_curve), 1.0, curve=pl_curve, windows=windows)
    c.add("fourier.unitarity", "rescaled transform is unitary on the basis window",
          un_curve[-1], cfg.tol_quad, curve=un_curve, windows=windows)
    c.add("fourier.unitarity.convergence", "rescaled transform is unitary on the basis window",
          convergence_figure(un_curve), 1.0, curve=un_curve, windows=windows)
    return c.records


SUITE_FUNCS: dict[str, Callable[[VerifyConfig], list[Record]]] = {
    "measure": suite_measure,
    "calculus": suite_calculus,
    "forms": suite_forms,
    "fq": suite_fq,
    "fourier": suite_fourier,
}


def run_verify(cfg: VerifyConfig) -> Report:
    start = time.perf_counter()
    workers = max(1, min(cfg.threads, len(cfg.suites)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda s: SUITE_FUNCS[s](cfg), cfg.suites))
    else:
        chunks = [SUITE_FUNCS[s](cfg) for s in cfg.suites]
    records = [r for chunk in chunks for r in chunk]
    return Report(cfg, records, time.perf_counter() - start)
