"""First- and second-order differential forms over mode functions.

A 1-form is stored as ``alpha dz + beta dzbar`` with both coefficients on the
left. Functions move across the generators by

    dz . g = shift(g, 1, 1) . dz        dzbar . g = shift(g, -1, 1) . dzbar

and the only surviving 2-form direction is ``dz ^ dzbar``, which satisfies
``dz ^ dzbar . g = shift(g, 0, 2) . dz ^ dzbar``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .calculus import OperatorId, divide_coord, mult_coord, q_diff, shift
from .modes import ModeFunction, conjugate, multiply, zero


class Direction(str, Enum):
    PAST_DZ = "past_dz"
    PAST_DZBAR = "past_dzbar"


# (m, s) such that  dir . g = shift(g, m, s) . dir
_RIGHT_TO_LEFT = {Direction.PAST_DZ: (1, 1), Direction.PAST_DZBAR: (-1, 1)}


def _dir(direction) -> Direction:
    return direction if isinstance(direction, Direction) else Direction(direction)


def commute_through(c: ModeFunction, direction) -> ModeFunction:
    """The ``c'`` with ``c . dz = dz . c'`` (or the same with ``dzbar``)."""
    m, s = _RIGHT_TO_LEFT[_dir(direction)]
    return shift(c, -m, -s)


def commute_back(c: ModeFunction, direction) -> ModeFunction:
    """Inverse of :func:`commute_through`: the ``c'`` with ``dz . c = c' . dz``."""
    m, s = _RIGHT_TO_LEFT[_dir(direction)]
    return shift(c, m, s)


def _check_same(a: ModeFunction, b: ModeFunction) -> None:
    if a.lattice != b.lattice:
        raise ValueError(f"coefficients live on different lattices: q={a.q} vs q={b.q}")


@dataclass(frozen=True)
class Form1:
    alpha: ModeFunction
    beta: ModeFunction

    def __post_init__(self):
        _check_same(self.alpha, self.beta)

    @classmethod
    def from_right(cls, alpha_r: ModeFunction, beta_r: ModeFunction) -> "Form1":
        """Build ``dz . alpha_r + dzbar . beta_r``."""
        return cls(commute_back(alpha_r, Direction.PAST_DZ),
                   commute_back(beta_r, Direction.PAST_DZBAR))

    def right_coefficients(self) -> tuple[ModeFunction, ModeFunction]:
        return (commute_through(self.alpha, Direction.PAST_DZ),
                commute_through(self.beta, Direction.PAST_DZBAR))

    @property
    def lattice(self):
        return self.alpha.lattice

    def __add__(self, other: "Form1") -> "Form1":
        return Form1(self.alpha + other.alpha, self.beta + other.beta)

    def __sub__(self, other: "Form1") -> "Form1":
        return Form1(self.alpha - other.alpha, self.beta - other.beta)

    def __neg__(self) -> "Form1":
        return Form1(-self.alpha, -self.beta)

    def left_mul(self, f: ModeFunction) -> "Form1":
        """``f . w``."""
        return Form1(multiply(f, self.alpha), multiply(f, self.beta))

    def right_mul(self, g: ModeFunction) -> "Form1":
        """``w . g``: ``g`` is carried to the left of each generator."""
        return Form1(multiply(self.alpha, commute_back(g, Direction.PAST_DZ)),
                     multiply(self.beta, commute_back(g, Direction.PAST_DZBAR)))

    def max_diff(self, other: "Form1") -> float:
        return max(self.alpha.max_diff(other.alpha), self.beta.max_diff(other.beta))

    def max_abs(self) -> float:
        return max(self.alpha.max_abs(), self.beta.max_abs())

    def is_zero(self) -> bool:
        return not self.alpha and not self.beta


@dataclass(frozen=True)
class Form2:
    gamma: ModeFunction

    @property
    def lattice(self):
        return self.gamma.lattice

    def __add__(self, other: "Form2") -> "Form2":
        return Form2(self.gamma + other.gamma)

    def __sub__(self, other: "Form2") -> "Form2":
        return Form2(self.gamma - other.gamma)

    def __neg__(self) -> "Form2":
        return Form2(-self.gamma)

    def left_mul(self, f: ModeFunction) -> "Form2":
        return Form2(multiply(f, self.gamma))

    def right_mul(self, g: ModeFunction) -> "Form2":
        return Form2(multiply(self.gamma, shift(g, 0, 2)))

    def max_diff(self, other: "Form2") -> float:
        return self.gamma.max_diff(other.gamma)

    def max_abs(self) -> float:
        return self.gamma.max_abs()

    def is_zero(self) -> bool:
        return not self.gamma


def zero_form1(lattice) -> Form1:
    return Form1(zero(lattice), zero(lattice))


def d0(f: ModeFunction) -> Form1:
    return Form1(q_diff(f, OperatorId.LZ), q_diff(f, OperatorId.LZBAR))


def d1(w: Form1) -> Form2:
    return Form2(q_diff(w.beta, OperatorId.LZ) - q_diff(w.alpha, OperatorId.LZBAR))


def wedge(a: Form1, b: Form1) -> Form2:
    """``a ^ b`` with ``dz ^ dz = dzbar ^ dzbar = 0`` and ``dzbar ^ dz = -dz ^ dzbar``."""
    _check_same(a.alpha, b.alpha)
    return Form2(
        multiply(a.alpha, commute_back(b.beta, Direction.PAST_DZ))
        - multiply(a.beta, commute_back(b.alpha, Direction.PAST_DZBAR))
    )


def df_expansions(f: ModeFunction) -> dict[str, Form1]:
    """The four ways of writing ``df``, each converted to left coefficients.

    ``left``: ``LZ f dz + LZBAR f dzbar``;
    ``right``: ``dz RZ f + dzbar RZBAR f``;
    ``mixed_z``: ``dz RZ f + LZBAR f dzbar``;
    ``mixed_zbar``: ``LZ f dz + dzbar RZBAR f``.
    """
    lz, lzb = q_diff(f, OperatorId.LZ), q_diff(f, OperatorId.LZBAR)
    rz_left = commute_back(q_diff(f, OperatorId.RZ), Direction.PAST_DZ)
    rzb_left = commute_back(q_diff(f, OperatorId.RZBAR), Direction.PAST_DZBAR)
    return {
        "left": Form1(lz, lzb),
        "right": Form1(rz_left, rzb_left),
        "mixed_z": Form1(rz_left, lzb),
        "mixed_zbar": Form1(lz, rzb_left),
    }


def to_omega_frame(w: Form1) -> tuple[ModeFunction, ModeFunction]:
    """Coefficients ``(a, b)`` with ``w = a . omega + b . omegabar``.

    ``dz = (q^2 - 1) z omega`` and ``dzbar = (q^2 - 1) omegabar zbar``; moving
    ``zbar`` left through ``omegabar`` gives ``q^{-2} zbar``.
    """
    q2 = w.lattice.q ** 2
    return ((q2 - 1.0) * mult_coord(w.alpha, "Z"),
            (1.0 - 1.0 / q2) * mult_coord(w.beta, "ZBAR"))


def from_omega_frame(a: ModeFunction, b: ModeFunction) -> Form1:
    q2 = a.lattice.q ** 2
    return Form1(divide_coord(a, "Z") / (q2 - 1.0),
                 divide_coord(b, "ZBAR") / (1.0 - 1.0 / q2))


def star(w: Form1) -> Form1:
    """Involution on 1-forms fixed by ``dz* = dzbar`` and ``(f w)* = w* f*``."""
    return Form1(commute_back(conjugate(w.beta), Direction.PAST_DZ),
                 commute_back(conjugate(w.alpha), Direction.PAST_DZBAR))
