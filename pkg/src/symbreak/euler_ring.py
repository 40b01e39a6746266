"""Exact arithmetic in the Euler ring U(SO(2)).

As an abelian group U(SO(2)) is free on the unit I = chi(SO(2)/SO(2)^+) and
the classes g_k = chi(SO(2)/Z_k^+), k >= 1.  Every orbit SO(2)/Z_k is a
circle, so products of two such classes have a one-dimensional orbit space
with vanishing Euler characteristic; the multiplication table is therefore

    I * I = I,    I * g_k = g_k,    g_k * g_l = 0.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import InputError, NotAUnitError


def _clean(coeffs) -> tuple:
    return tuple(sorted((int(k), int(c)) for k, c in dict(coeffs).items() if c != 0))


@dataclass(frozen=True)
class RingElement:
    unit: int = 0
    cyclic: tuple = field(default=())  # sorted ((k, coeff), ...) with nonzero coeffs

    def __post_init__(self):
        object.__setattr__(self, "unit", int(self.unit))
        object.__setattr__(self, "cyclic", _clean(self.cyclic))
        if any(k < 1 for k, _ in self.cyclic):
            raise InputError("cyclic classes are indexed by positive integers")

    @classmethod
    def from_coeffs(cls, unit: int = 0, cyclic: Mapping[int, int] | None = None) -> "RingElement":
        return cls(unit, tuple((cyclic or {}).items()))

    @property
    def coeffs(self) -> dict:
        return dict(self.cyclic)

    def coeff(self, k: int) -> int:
        return self.coeffs.get(k, 0)

    # -- additive structure -------------------------------------------------
    def __add__(self, other: "RingElement") -> "RingElement":
        if not isinstance(other, RingElement):
            return NotImplemented
        merged = self.coeffs
        for k, c in other.cyclic:
            merged[k] = merged.get(k, 0) + c
        return RingElement(self.unit + other.unit, tuple(merged.items()))

    def __neg__(self) -> "RingElement":
        return RingElement(-self.unit, tuple((k, -c) for k, c in self.cyclic))

    def __sub__(self, other: "RingElement") -> "RingElement":
        return self + (-other)

    def scale(self, n: int) -> "RingElement":
        return RingElement(n * self.unit, tuple((k, n * c) for k, c in self.cyclic))

    # -- multiplicative structure ---------------------------------------------
    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return star(self, other)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return NotImplemented

    def is_zero(self) -> bool:
        return self.unit == 0 and not self.cyclic

    def __str__(self) -> str:
        return to_text(self)


ZERO = RingElement()
UNIT = RingElement(1)


def gamma(k: int) -> RingElement:
    return RingElement(0, ((k, 1),))


def add(x: RingElement, y: RingElement) -> RingElement:
    return x + y


def star(x: RingElement, y: RingElement) -> RingElement:
    # (u + N)(v + M) = uv + uM + vN, since N*M = 0
    merged: dict = {}
    for k, c in x.cyclic:
        merged[k] = merged.get(k, 0) + y.unit * c
    for k, c in y.cyclic:
        merged[k] = merged.get(k, 0) + x.unit * c
    return RingElement(x.unit * y.unit, tuple(merged.items()))


def invert(x: RingElement) -> RingElement:
    """Multiplicative inverse; exists exactly when the unit coefficient is +-1."""
    u = x.unit
    if u not in (1, -1):
        raise NotAUnitError(f"{to_text(x)} is not a unit of U(SO(2))")
    # x = u(I + uN) and (I + uN)^-1 = I - uN because N*N = 0
    return RingElement(u, tuple((k, -c) for k, c in x.cyclic))


def deg_minus_id(trivial_total: int, mode_mults: Mapping[int, int]) -> RingElement:
    """Degree of -Id on the unit ball of R^t + sum_m j_m C_m.

    Each trivial line contributes -I, each plane with kernel Z_m contributes
    I - g_m; cross terms between g's vanish.
    """
    if trivial_total < 0 or any(j < 0 for j in mode_mults.values()):
        raise InputError("dimensions must be nonnegative")
    sign = -1 if trivial_total % 2 else 1
    return RingElement(sign, tuple((m, -sign * j) for m, j in mode_mults.items()))


def degrees_distinct(x: RingElement, y: RingElement) -> bool:
    return x != y


# ---------------------------------------------------------------------------
# canonical text form:  "I+g_1", "-I+2*g_2", "3*g_4", "0"

def to_text(x: RingElement) -> str:
    terms = []
    if x.unit:
        terms.append((x.unit, "I"))
    terms += [(c, f"g_{k}") for k, c in x.cyclic]
    if not terms:
        return "0"
    out = ""
    for i, (c, sym) in enumerate(terms):
        sign = "-" if c < 0 else ("+" if i else "")
        mag = abs(c)
        out += sign + (sym if mag == 1 else f"{mag}*{sym}")
    return out


_TERM = re.compile(r"([+-]?)(?:(\d+)\*)?(I|g_(\d+))")


def from_text(text: str) -> RingElement:
    s = text.replace(" ", "")
    if s == "0":
        return ZERO
    pos, unit, cyc = 0, 0, {}
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or (pos and not m.group(1)):
            raise InputError(f"cannot parse ring element {text!r}")
        c = int(m.group(2) or 1) * (-1 if m.group(1) == "-" else 1)
        if m.group(3) == "I":
            unit += c
        else:
            k = int(m.group(4))
            cyc[k] = cyc.get(k, 0) + c
        pos = m.end()
    if not s:
        raise InputError("empty ring element")
    return RingElement.from_coeffs(unit, cyc)
