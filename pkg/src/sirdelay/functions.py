"""Incidence, vaccination and treatment function families.

Every family is a small frozen dataclass that evaluates itself and its
analytic derivatives.  The module-level helpers (``evaluate_*``, ``partial``,
``lipschitz_bounds``) add input checking on top of the raw methods; the
integrator kernels call the unchecked methods (or their own inlined copies)
because tiny negative excursions of the state must not abort a run.

Kind codes (``KIND_CODES``) are shared with the compiled kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Mapping

from .errors import DomainError

INCIDENCE_KINDS = ("mass_action", "power", "saturated_in_x", "saturated_in_y")
TREATMENT_KINDS = ("constant", "linear", "saturating", "hyperbolic_sine",
                   "hyperbolic_tangent")
VACCINATION_KINDS = ("constant", "linear", "saturating", "hyperbolic_sine")

INCIDENCE_CODES = {k: i for i, k in enumerate(INCIDENCE_KINDS)}
RATE_CODES = {k: i for i, k in enumerate(TREATMENT_KINDS)}


def _finite_nonneg(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if value < 0:
        raise DomainError(f"{name} must be nonnegative, got {value!r}")
    return value


@dataclass(frozen=True)
class IncidenceSpec:
    """Incidence f(x, y).

    ``mass_action``: x*y; ``power``: c*x**p*y**q;
    ``saturated_in_x``: x*y/(1+b*x); ``saturated_in_y``: x*y/(1+a*y).
    """

    kind: str = "mass_action"
    c_pow: float = 1.0
    p_exp: float = 1.0
    q_exp: float = 1.0
    b_sat: float = 0.0
    a_sat: float = 0.0

    # config record key -> dataclass field, per kind
    _RECORD_KEYS = {
        "mass_action": {},
        "power": {"c": "c_pow", "p": "p_exp", "q": "q_exp"},
        "saturated_in_x": {"b": "b_sat"},
        "saturated_in_y": {"a": "a_sat"},
    }

    def __post_init__(self):
        if self.kind not in INCIDENCE_KINDS:
            raise DomainError(f"unknown incidence kind {self.kind!r}")
        for f_ in fields(self):
            if f_.name == "kind":
                continue
            value = getattr(self, f_.name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"incidence coefficient {f_.name} must be finite and >= 0")
        if self.kind == "power" and (self.p_exp <= 0 or self.q_exp <= 0):
            raise DomainError("power incidence needs positive exponents")
        # coefficients the kind does not use are reset so equality is by formula
        used = set(self._RECORD_KEYS[self.kind].values())
        for f_ in fields(self):
            if f_.name != "kind" and f_.name not in used:
                object.__setattr__(self, f_.name, f_.default)

    @property
    def code(self) -> int:
        return INCIDENCE_CODES[self.kind]

    def coefficients(self) -> tuple[float, float, float]:
        """Packed coefficients in the order the kernels expect."""
        if self.kind == "power":
            return (self.c_pow, self.p_exp, self.q_exp)
        if self.kind == "saturated_in_x":
            return (self.b_sat, 0.0, 0.0)
        if self.kind == "saturated_in_y":
            return (self.a_sat, 0.0, 0.0)
        return (0.0, 0.0, 0.0)

    def __call__(self, x: float, y: float) -> float:
        k = self.kind
        if k == "mass_action":
            return x * y
        if k == "power":
            return self.c_pow * x ** self.p_exp * y ** self.q_exp
        if k == "saturated_in_x":
            return x * y / (1.0 + self.b_sat * x)
        return x * y / (1.0 + self.a_sat * y)

    def dx(self, x: float, y: float) -> float:
        k = self.kind
        if k == "mass_action":
            return y
        if k == "power":
            if y == 0.0:
                return 0.0
            return self.c_pow * self.p_exp * x ** (self.p_exp - 1.0) * y ** self.q_exp
        if k == "saturated_in_x":
            den = 1.0 + self.b_sat * x
            return y / (den * den)
        return y / (1.0 + self.a_sat * y)

    def dy(self, x: float, y: float) -> float:
        k = self.kind
        if k == "mass_action":
            return x
        if k == "power":
            if x == 0.0:
                return 0.0
            return self.c_pow * self.q_exp * x ** self.p_exp * y ** (self.q_exp - 1.0)
        if k == "saturated_in_x":
            return x / (1.0 + self.b_sat * x)
        den = 1.0 + self.a_sat * y
        return x / (den * den)

    def to_record(self) -> dict:
        record = {"kind": self.kind}
        for key, attr in self._RECORD_KEYS[self.kind].items():
            record[key] = getattr(self, attr)
        return record

    @classmethod
    def from_record(cls, record: Mapping) -> "IncidenceSpec":
        return cls(**_parse_record(record, cls._RECORD_KEYS, "incidence"))


def _parse_record(record, key_map, label):
    record = dict(record)
    kind = record.pop("kind", None)
    if kind not in key_map:
        raise DomainError(f"{label}: unknown kind {kind!r}")
    allowed = key_map[kind]
    kwargs = {"kind": kind}
    for key, value in record.items():
        if key not in allowed:
            raise DomainError(f"{label}: key {key!r} not valid for kind {kind!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DomainError(f"{label}.{key} must be a number")
        kwargs[allowed[key]] = float(value)
    return kwargs


@dataclass(frozen=True)
class _RateSpec:
    """Shared implementation of the one-argument treatment/vaccination families.

    ``constant`` violates the zero-at-origin property the positivity argument
    relies on, so it is refused unless ``allow_constant`` is set.
    """

    kind: str = "linear"
    k_const: float = 0.0
    a_sat: float = 1.0
    allow_constant: bool = field(default=False, compare=False)

    KINDS = TREATMENT_KINDS
    LABEL = "rate"
    _RECORD_KEYS = {
        "constant": {"k": "k_const"},
        "linear": {},
        "saturating": {"a": "a_sat"},
        "hyperbolic_sine": {},
        "hyperbolic_tangent": {},
    }

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown {self.LABEL} kind {self.kind!r}")
        for name in ("k_const", "a_sat"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"{self.LABEL} coefficient {name} must be finite and >= 0")
        if self.kind == "saturating" and self.a_sat <= 0:
            raise DomainError(f"saturating {self.LABEL} needs a > 0")
        if self.kind == "constant" and not self.allow_constant:
            raise DomainError(
                f"constant {self.LABEL} function does not vanish at 0 and breaks "
                "the positivity hypothesis; pass allow_constant=True to accept it")
        used = set(self._RECORD_KEYS[self.kind].values())
        for name in ("k_const", "a_sat"):
            if name not in used:
                object.__setattr__(self, name, type(self).__dataclass_fields__[name].default)

    @property
    def code(self) -> int:
        return RATE_CODES[self.kind]

    @property
    def conforming(self) -> bool:
        return self.kind != "constant"

    def coefficients(self) -> tuple[float, float]:
        return (self.k_const, self.a_sat)

    def __call__(self, u: float) -> float:
        k = self.kind
        if k == "linear":
            return u
        if k == "saturating":
            return u / (self.a_sat + u)
        if k == "hyperbolic_sine":
            return math.sinh(u)
        if k == "hyperbolic_tangent":
            return math.tanh(u)
        return self.k_const

    def slope(self, u: float) -> float:
        k = self.kind
        if k == "linear":
            return 1.0
        if k == "saturating":
            den = self.a_sat + u
            return self.a_sat / (den * den)
        if k == "hyperbolic_sine":
            return math.cosh(u)
        if k == "hyperbolic_tangent":
            c = math.cosh(u)
            return 1.0 / (c * c)
        return 0.0

    def to_record(self) -> dict:
        record = {"kind": self.kind}
        for key, attr in self._RECORD_KEYS[self.kind].items():
            record[key] = getattr(self, attr)
        return record

    @classmethod
    def from_record(cls, record: Mapping, allow_constant: bool = False):
        keys = {k: v for k, v in cls._RECORD_KEYS.items() if k in cls.KINDS}
        return cls(**_parse_record(record, keys, cls.LABEL), allow_constant=allow_constant)


@dataclass(frozen=True)
class TreatmentSpec(_RateSpec):
    """Treatment p(y): k, y, y/(a+y), sinh y or tanh y."""

    KINDS = TREATMENT_KINDS
    LABEL = "treatment"


@dataclass(frozen=True)
class VaccinationSpec(_RateSpec):
    """Vaccination v(x): k, x, x/(a+x) or sinh x."""

    KINDS = VACCINATION_KINDS
    LABEL = "vaccination"


def evaluate_incidence(spec: IncidenceSpec, x: float, y: float) -> float:
    x = _finite_nonneg("x", x)
    y = _finite_nonneg("y", y)
    return spec(x, y)


def evaluate_treatment(spec: TreatmentSpec, y: float) -> float:
    return spec(_finite_nonneg("y", y))


def evaluate_vaccination(spec: VaccinationSpec, x: float) -> float:
    return spec(_finite_nonneg("x", x))


def partial(spec, which: str, point) -> float:
    """Analytic partial derivative of a family member at ``point``.

    For an incidence spec ``which`` is ``"x"`` or ``"y"`` and ``point`` is an
    ``(x, y)`` pair; for treatment/vaccination specs ``point`` is the scalar
    argument and ``which`` must name that argument (``"y"``/``"x"``).
    """
    try:
        if isinstance(spec, IncidenceSpec):
            x, y = point
            x = _finite_nonneg("x", x)
            y = _finite_nonneg("y", y)
            if which == "x":
                value = spec.dx(x, y)
            elif which == "y":
                value = spec.dy(x, y)
            else:
                raise DomainError(f"incidence has no argument {which!r}")
        elif isinstance(spec, _RateSpec):
            expected = "y" if isinstance(spec, TreatmentSpec) else "x"
            if which not in (expected, None):
                raise DomainError(f"{spec.LABEL} has no argument {which!r}")
            value = spec.slope(_finite_nonneg(expected, point))
        else:
            raise DomainError(f"not a function spec: {spec!r}")
    except (ZeroDivisionError, OverflowError) as exc:
        raise DomainError(f"derivative undefined at {point!r}: {exc}") from None
    if not math.isfinite(value):
        raise DomainError(f"derivative undefined at {point!r}")
    return value


@dataclass(frozen=True)
class DomainBox:
    """Compact region [x_min, x_max] x [y_min, y_max] of the nonnegative quadrant."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "x_max", "y_min", "y_max"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"box {name} must be finite")
        if not (0 <= self.x_min < self.x_max):
            raise DomainError("box needs 0 <= x_min < x_max")
        if not (0 <= self.y_min < self.y_max):
            raise DomainError("box needs 0 <= y_min < y_max")

    def corners(self):
        return [(x, y) for x in (self.x_min, self.x_max) for y in (self.y_min, self.y_max)]


@dataclass(frozen=True)
class LipschitzBounds:
    """Two-sided slope constants of f, v and p over a box.

    K1/K3 bound |df/dx| from below/above, K2/K4 bound |df/dy|, M1/M2 the
    vaccination slope and L1/L2 the treatment slope.
    """

    K1: float
    K2: float
    K3: float
    K4: float
    M1: float
    M2: float
    L1: float
    L2: float
    box: DomainBox | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        pairs = (("K1", "K3"), ("K2", "K4"), ("M1", "M2"), ("L1", "L2"))
        for lo, hi in pairs:
            a, b = getattr(self, lo), getattr(self, hi)
            if not (0 <= a <= b) or not math.isfinite(b):
                raise DomainError(f"need 0 <= {lo} <= {hi} < inf, got {a}, {b}")

    @classmethod
    def unit(cls) -> "LipschitzBounds":
        """All constants equal to one (the reference values used for the
        published delay ranges)."""
        return cls(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
                   warnings=("unit constants, not derived from a box",))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("K1", "K2", "K3", "K4", "M1", "M2", "L1", "L2")}


def _extrema(values, label):
    values = [abs(v) for v in values]
    if not all(math.isfinite(v) for v in values):
        raise DomainError(f"{label} slope unbounded on box")
    return min(values), max(values)


def lipschitz_bounds(f: IncidenceSpec, v: VaccinationSpec, p: TreatmentSpec,
                     box: DomainBox) -> LipschitzBounds:
    """Extremal slopes over ``box``.

    Every family's partials are monotone in each coordinate on the quadrant,
    so extrema sit on the box corners (x-interval ends for v, y-interval ends
    for p).
    """
    if not isinstance(box, DomainBox):
        raise DomainError("box must be a DomainBox")
    try:
        corners = box.corners()
        K1, K3 = _extrema([f.dx(x, y) for x, y in corners], "incidence x")
        K2, K4 = _extrema([f.dy(x, y) for x, y in corners], "incidence y")
        M1, M2 = _extrema([v.slope(box.x_min), v.slope(box.x_max)], "vaccination")
        L1, L2 = _extrema([p.slope(box.y_min), p.slope(box.y_max)], "treatment")
    except (ZeroDivisionError, OverflowError) as exc:
        raise DomainError(f"slope undefined on box: {exc}") from None
    warnings = []
    if K1 == 0.0 or K2 == 0.0:
        warnings.append("incidence lower constant is zero on this box "
                        "(box touches an axis); lower-bound conditions degenerate")
    if M1 == 0.0:
        warnings.append("vaccination lower constant is zero")
    if L1 == 0.0:
        warnings.append("treatment lower constant is zero")
    return LipschitzBounds(K1, K2, K3, K4, M1, M2, L1, L2, box=box, warnings=tuple(warnings))
