"""Closed-form parameter families of the Active Flux scheme.

Each family is a small frozen dataclass carrying its free parameters;
:func:`resolve` turns one into concrete
:class:`~activeflux.core.SchemeParameters` for a Courant number.

The formulas are generic arithmetic, so they also accept ``mpmath`` numbers;
the spectral order checks use that to work in extended precision.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from typing import ClassVar, Union

from activeflux.core import SchemeParameters


def second_order_U(R, S, T):
    """``U`` making the principal eigenvalue second-order correct (``R > 0`` branch).

    The other branch, ``R = 0`` with ``T = 1/2``, leaves ``U`` free and is
    expressed with :class:`Custom`.
    """
    if R == 0:
        raise ValueError("second_order_U needs R != 0; use R = 0, T = 1/2 via Custom")
    return (R - 2 * S * T + S) / (2 * R)


def third_order_TU(R, S, nu):
    if R + S == 0:
        raise ValueError("third-order conditions need R + S != 0")
    T = -(nu + 1) * R / 3 + R * R / (R + S) + 0.5
    U = (2 * S * (nu - 3 * R / (R + S) + 1) + 3) / 6
    return T, U


def fourth_order_STU(R, nu):
    # -nu^2 + nu + 2 = (2 - nu)(1 + nu) is nonzero on (0, 1]
    S = 18 / (-nu * nu + nu + 2) - R
    T = (9 - (nu + 1) * R * ((nu - 2) * R + 6)) / 18
    U = (-(nu - 2) * (nu + 1) * R * R - 6 * (nu + 4) * R + 9 * (nu - 14) / (nu - 2)) / 18
    return S, T, U


def super_duper(nu) -> SchemeParameters:
    return SchemeParameters(6 / (2 - nu), 6 / (1 + nu), 0.5, 0.5)


def _fmt(value: float) -> str:
    return repr(float(value))


@dataclass(frozen=True)
class Traditional:
    key: ClassVar[str] = "traditional"
    eigen_order: ClassVar[int | None] = 3

    def resolve_raw(self, nu):
        return (3, 3, 1 - nu, nu)


@dataclass(frozen=True)
class SecondOrder:
    R: float
    S: float
    T: float
    key: ClassVar[str] = "second"
    eigen_order: ClassVar[int | None] = 2

    def resolve_raw(self, nu):
        return (self.R, self.S, self.T, second_order_U(self.R, self.S, self.T))


@dataclass(frozen=True)
class ThirdOrder:
    R: float
    S: float
    key: ClassVar[str] = "third"
    eigen_order: ClassVar[int | None] = 3

    def resolve_raw(self, nu):
        return (self.R, self.S, *third_order_TU(self.R, self.S, nu))


@dataclass(frozen=True)
class Method3:
    """Third-order family restricted to ``R = S``."""

    R: float
    key: ClassVar[str] = "method3"
    eigen_order: ClassVar[int | None] = 3

    def resolve_raw(self, nu):
        return ThirdOrder(self.R, self.R).resolve_raw(nu)


@dataclass(frozen=True)
class FourthOrder:
    R: float
    key: ClassVar[str] = "fourth"
    eigen_order: ClassVar[int | None] = 4

    def resolve_raw(self, nu):
        return (self.R, *fourth_order_STU(self.R, nu))


@dataclass(frozen=True)
class SuperDuper:
    key: ClassVar[str] = "superduper"
    eigen_order: ClassVar[int | None] = 4

    def resolve_raw(self, nu):
        return (6 / (2 - nu), 6 / (1 + nu), 0.5, 0.5)


@dataclass(frozen=True)
class HalfCflExact:
    """Parameters that make the scheme exact at ``nu = 1/2``; independent of ``nu``."""

    R: float
    key: ClassVar[str] = "halfcfl"
    eigen_order: ClassVar[int | None] = None

    def resolve_raw(self, nu):
        R = self.R
        return (R, 8 - R, (R - 2) ** 2 / 8, (R - 6) ** 2 / 8)


@dataclass(frozen=True)
class Custom:
    R: float
    S: float
    T: float
    U: float
    key: ClassVar[str] = "custom"
    eigen_order: ClassVar[int | None] = None

    def resolve_raw(self, nu):
        return (self.R, self.S, self.T, self.U)


FamilySpec = Union[
    Traditional, SecondOrder, ThirdOrder, Method3, FourthOrder, SuperDuper, HalfCflExact, Custom
]

_FAMILIES: dict[str, type] = {
    cls.key: cls
    for cls in (
        Traditional, SecondOrder, ThirdOrder, Method3, FourthOrder, SuperDuper, HalfCflExact, Custom
    )
}


def family_text(spec) -> str:
    """Canonical text form, e.g. ``method3:R=4.0``."""
    args = [f"{f.name}={_fmt(getattr(spec, f.name))}" for f in fields(spec)]
    return spec.key + (":" + ",".join(args) if args else "")


for _cls in _FAMILIES.values():
    _cls.__str__ = family_text


def resolve(spec, nu: float) -> SchemeParameters:
    """Concrete scheme parameters of ``spec`` at Courant number ``nu``."""
    try:
        values = spec.resolve_raw(nu)
    except ZeroDivisionError as exc:
        raise ValueError(f"{family_text(spec)} is undefined at nu={nu!r}") from exc
    return SchemeParameters(*(float(v) for v in values))


_ARG = re.compile(r"^\s*([A-Za-z])\s*=\s*([-+0-9.eE]+)\s*$")


def parse_family(text: str):
    """Parse ``traditional``, ``method3:R=4``, ``custom:R=..,S=..,T=..,U=..`` etc."""
    name, _, rest = text.strip().partition(":")
    cls = _FAMILIES.get(name.strip().lower())
    if cls is None:
        raise ValueError(f"unknown family {name!r}; expected one of {sorted(_FAMILIES)}")
    wanted = [f.name for f in fields(cls)]
    given: dict[str, float] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        m = _ARG.match(item)
        if not m:
            raise ValueError(f"malformed family argument {item!r} in {text!r}")
        key = m.group(1).upper()
        if key not in wanted:
            raise ValueError(f"family {cls.key!r} takes {wanted}, got {key!r}")
        try:
            given[key] = float(m.group(2))
        except ValueError:
            raise ValueError(f"invalid number {m.group(2)!r} for {key}") from None
    missing = [k for k in wanted if k not in given]
    if missing:
        raise ValueError(f"family {cls.key!r} is missing {', '.join(missing)}")
    return cls(**given)
