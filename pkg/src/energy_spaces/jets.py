"""Truncated Taylor series ("jets") for exact higher-order derivatives at a point.

A :class:`Jet` stores ``c_k = f^(k)(t0) / k!`` for ``k = 0..order``.  Products
are Cauchy convolutions, quotients and elementary functions use the usual
coefficient recurrences.  Coefficients may be real or complex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

MAX_ORDER = 24

AXES = ("time", "space")

Scalar = Union[float, complex]


class JetError(ValueError):
    """Invalid jet operation (order budget, base-point mismatch, zero divisor)."""


def _check_order(order: int) -> int:
    if int(order) != order:
        raise JetError(f"jet order must be an integer, got {order!r}")
    order = int(order)
    if order < 0:
        raise JetError(f"jet order must be non-negative, got {order}")
    if order > MAX_ORDER:
        raise JetError(f"jet order {order} exceeds the supported maximum {MAX_ORDER}")
    return order


def check_axis(axis: Optional[str]) -> Optional[str]:
    if axis is not None and axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    return axis


def _cauchy(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    # Symmetrised so that a*b and b*a agree bit for bit.
    return 0.5 * (np.convolve(a[: m + 1], b[: m + 1]) + np.convolve(b[: m + 1], a[: m + 1]))[: m + 1]


class Jet:
    """Truncated Taylor expansion of a smooth function at ``base_point``.

    Jets are immutable values.  Binary operations between jets require equal
    base points and truncate to the smaller order; plain scalars are promoted
    to constant jets.
    """

    __slots__ = ("base_point", "coeffs")

    def __init__(self, base_point: float, coeffs: Sequence[Scalar]):
        c = np.array(coeffs)
        if c.ndim != 1 or c.size == 0:
            raise JetError("coeffs must be a non-empty 1-D sequence")
        if not (np.issubdtype(c.dtype, np.floating) or np.issubdtype(c.dtype, np.complexfloating)):
            c = c.astype(np.complex128 if np.iscomplexobj(c) else np.float64)
        _check_order(c.size - 1)
        c.setflags(write=False)
        object.__setattr__(self, "base_point", float(base_point))
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.coeffs)

    @property
    def value(self) -> Scalar:
        return self.coeffs[0].item()

    def derivative_value(self, k: int) -> Scalar:
        """``k! * c_k``, the k-th derivative at the base point."""
        if not 0 <= k <= self.order:
            raise JetError(f"derivative {k} outside jet order {self.order}")
        return (math.factorial(k) * self.coeffs[k]).item()

    def derivatives(self) -> np.ndarray:
        fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return fact * self.coeffs

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError(f"cannot raise jet order from {self.order} to {order}")
        return Jet(self.base_point, self.coeffs[: _check_order(order) + 1])

    @property
    def real(self) -> "Jet":
        return Jet(self.base_point, self.coeffs.real.copy())

    @property
    def imag(self) -> "Jet":
        return Jet(self.base_point, self.coeffs.imag.copy())

    def conj(self) -> "Jet":
        return Jet(self.base_point, np.conj(self.coeffs))

    def derivative(self, k: int = 1) -> "Jet":
        return jet_derivative(self, k)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.base_point != self.base_point:
                raise JetError(
                    f"base points differ: {self.base_point!r} vs {other.base_point!r}"
                )
            return other
        if np.isscalar(other):
            return constant_jet(self.base_point, other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        m = min(self.order, other.order)
        return Jet(self.base_point, self.coeffs[: m + 1] + other.coeffs[: m + 1])

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base_point, -self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        m = min(self.order, other.order)
        return Jet(self.base_point, self.coeffs[: m + 1] - other.coeffs[: m + 1])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return Jet(self.base_point, self.coeffs * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        m = min(self.order, other.order)
        return Jet(self.base_point, _cauchy(self.coeffs, other.coeffs, m))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return Jet(self.base_point, self.coeffs / other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _divide(self, other)

    def __rtruediv__(self, other):
        return _divide(constant_jet(self.base_point, other, self.order), self)

    def __pow__(self, n):
        return pow_int(self, n)

    def __repr__(self):
        return f"Jet(base_point={self.base_point!r}, coeffs={self.coeffs.tolist()!r})"

    def allclose(self, other: "Jet", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        m = min(self.order, other.order)
        return self.base_point == other.base_point and bool(
            np.allclose(self.coeffs[: m + 1], other.coeffs[: m + 1], rtol=rtol, atol=atol)
        )


def constant_jet(t0: float, value: Scalar, order: int) -> Jet:
    order = _check_order(order)
    c = np.zeros(order + 1, dtype=np.result_type(value, np.float64))
    c[0] = value
    return Jet(t0, c)


def jet_var(t0: float, order: int) -> Jet:
    """Jet of the identity function ``f(t) = t`` at ``t0``."""
    order = _check_order(order)
    c = np.zeros(order + 1)
    c[0] = t0
    if order >= 1:
        c[1] = 1.0
    return Jet(t0, c)


def _divide(a: Jet, b: Jet) -> Jet:
    if a.base_point != b.base_point:
        raise JetError(f"base points differ: {a.base_point!r} vs {b.base_point!r}")
    b0 = b.coeffs[0]
    if b0 == 0:
        raise JetError("division by a jet with zero constant term")
    m = min(a.order, b.order)
    q = np.zeros(m + 1, dtype=np.result_type(a.coeffs, b.coeffs))
    for k in range(m + 1):
        q[k] = (a.coeffs[k] - np.dot(q[:k], b.coeffs[k:0:-1])) / b0
    return Jet(a.base_point, q)


def jet_arith(op: str, a: Jet, b: Jet) -> Jet:
    """Pointwise ``add``, ``sub``, ``mul`` or ``div`` of two jets."""
    ops = {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "mul": lambda: a * b,
        "div": lambda: _divide(a, b),
    }
    if op not in ops:
        raise ValueError(f"unknown jet operation {op!r}")
    if not isinstance(a, Jet) or not isinstance(b, Jet):
        raise TypeError("jet_arith expects two Jet operands")
    if a.base_point != b.base_point:
        raise JetError(f"base points differ: {a.base_point!r} vs {b.base_point!r}")
    return ops[op]()


def exp(a: Jet) -> Jet:
    c = a.coeffs
    m = a.order
    out = np.zeros(m + 1, dtype=np.result_type(c, np.float64))
    out[0] = np.exp(c[0])
    ja = np.arange(m + 1) * c
    for k in range(1, m + 1):
        out[k] = np.dot(ja[1 : k + 1], out[k - 1 :: -1][:k]) / k
    return Jet(a.base_point, out)


def _sincos(a: Jet):
    c = a.coeffs
    m = a.order
    dt = np.result_type(c, np.float64)
    s = np.zeros(m + 1, dtype=dt)
    co = np.zeros(m + 1, dtype=dt)
    s[0] = np.sin(c[0])
    co[0] = np.cos(c[0])
    ja = np.arange(m + 1) * c
    for k in range(1, m + 1):
        s[k] = np.dot(ja[1 : k + 1], co[k - 1 :: -1][:k]) / k
        co[k] = -np.dot(ja[1 : k + 1], s[k - 1 :: -1][:k]) / k
    return Jet(a.base_point, s), Jet(a.base_point, co)


def sin(a: Jet) -> Jet:
    return _sincos(a)[0]


def cos(a: Jet) -> Jet:
    return _sincos(a)[1]


def pow_int(a: Jet, n: int) -> Jet:
    """Integer power.  Negative powers need a non-zero constant term."""
    if int(n) != n:
        raise ValueError(f"pow_int needs an integer exponent, got {n!r}")
    n = int(n)
    if n >= 0:
        result = constant_jet(a.base_point, 1.0, a.order)
        base = a
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    a0 = a.coeffs[0]
    if a0 == 0:
        raise JetError("negative power of a jet with zero constant term")
    # b = a**n:  k a0 b_k = sum_{j=1..k} ((n + 1) j - k) a_j b_{k-j}
    c = a.coeffs
    m = a.order
    b = np.zeros(m + 1, dtype=np.result_type(c, np.float64))
    b[0] = a0 ** n
    for k in range(1, m + 1):
        j = np.arange(1, k + 1)
        b[k] = np.dot(((n + 1) * j - k) * c[1 : k + 1], b[k - 1 :: -1][:k]) / (k * a0)
    return Jet(a.base_point, b)


_ELEMENTARY = {"exp": exp, "sin": sin, "cos": cos}


def jet_elementary(fn: str, a: Jet, n: Optional[int] = None) -> Jet:
    """Apply ``exp``, ``sin``, ``cos`` or ``pow_int`` (with exponent ``n``)."""
    if fn == "pow_int":
        if n is None:
            raise ValueError("pow_int requires an exponent n")
        return pow_int(a, n)
    if fn not in _ELEMENTARY:
        raise ValueError(f"unknown elementary function {fn!r}")
    return _ELEMENTARY[fn](a)


def jet_derivative(a: Jet, k: int) -> Jet:
    """Jet of the k-th derivative; the order drops by ``k``."""
    if k < 0:
        raise JetError(f"derivative order must be non-negative, got {k}")
    if k > a.order:
        raise JetError(f"cannot differentiate {k} times a jet of order {a.order}")
    if k == 0:
        return a
    j = np.arange(a.order - k + 1)
    scale = np.array([math.perm(int(i) + k, k) for i in j], dtype=float)
    return Jet(a.base_point, scale * a.coeffs[k:])


# --------------------------------------------------------------------------
# smooth functions


Evaluator = Callable[[float, int, Optional[str]], Jet]


@dataclass(frozen=True)
class SmoothFn:
    """A smooth function known through its jets.

    ``evaluator(point, order, axis)`` must be deterministic.  ``primitive``
    optionally supplies an antiderivative, which the index-0 energy operators
    need.  ``free_axis`` restricts the axis a slice of a two-variable field may
    be differentiated along (``None`` accepts any axis label).
    """

    label: str
    evaluator: Evaluator = field(repr=False, compare=False)
    primitive: Optional["SmoothFn"] = field(default=None, repr=False, compare=False)
    free_axis: Optional[str] = None

    def jet(self, point: float, order: int, axis: Optional[str] = None) -> Jet:
        check_axis(axis)
        if axis is not None and self.free_axis is not None and axis != self.free_axis:
            raise ValueError(
                f"{self.label}: free axis is {self.free_axis!r}, cannot differentiate along {axis!r}"
            )
        return self.evaluator(float(point), _check_order(order), axis)

    def __call__(self, point: float, axis: Optional[str] = None) -> Scalar:
        return self.jet(point, 0, axis).value

    @classmethod
    def from_expression(
        cls,
        label: str,
        expr: Callable[[Jet], Jet],
        primitive: Optional["SmoothFn"] = None,
        free_axis: Optional[str] = None,
    ) -> "SmoothFn":
        """Build from a function of the jet variable, e.g. ``lambda x: sin(x) * x``."""

        def evaluator(point, order, axis=None):
            out = expr(jet_var(point, order))
            if not isinstance(out, Jet):
                out = constant_jet(point, out, order)
            return out

        return cls(label, evaluator, primitive, free_axis)

    def real_part(self) -> "SmoothFn":
        prim = self.primitive.real_part() if self.primitive is not None else None
        return SmoothFn(
            f"Re[{self.label}]",
            lambda p, o, a=None: self.jet(p, o, a).real,
            prim,
            self.free_axis,
        )


def constant(value: Scalar) -> SmoothFn:
    return SmoothFn(f"{value}", lambda p, o, a=None: constant_jet(p, value, o))


def zero() -> SmoothFn:
    z = SmoothFn("0", lambda p, o, a=None: constant_jet(p, 0.0, o))
    return SmoothFn("0", z.evaluator, primitive=z)


def polynomial(coeffs: Sequence[float], label: Optional[str] = None) -> SmoothFn:
    """``sum coeffs[k] t**k`` (ascending powers)."""
    coeffs = list(coeffs)

    def expr(x):
        acc = constant_jet(x.base_point, 0.0, x.order)
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    return SmoothFn.from_expression(label or f"poly{coeffs}", expr)


def exponential(a: Scalar, amplitude: Scalar = 1.0) -> SmoothFn:
    """``amplitude * exp(a t)`` with primitive ``amplitude/a * exp(a t)``."""
    if a == 0:
        raise ValueError("exponential rate must be non-zero")
    prim = SmoothFn.from_expression(f"{amplitude}/{a}*exp({a}t)", lambda x: exp(x * a) * (amplitude / a))
    return SmoothFn.from_expression(f"{amplitude}*exp({a}t)", lambda x: exp(x * a) * amplitude, prim)


def cosine(omega: float, amplitude: float = 1.0, phase: float = 0.0) -> SmoothFn:
    """``amplitude * cos(omega t + phase)``; the primitive is the zero-mean one."""
    if omega == 0:
        raise ValueError("cosine frequency must be non-zero")
    prim = SmoothFn.from_expression(
        f"{amplitude}/{omega}*sin({omega}t+{phase})",
        lambda x: sin(x * omega + phase) * (amplitude / omega),
    )
    return SmoothFn.from_expression(
        f"{amplitude}*cos({omega}t+{phase})",
        lambda x: cos(x * omega + phase) * amplitude,
        prim,
    )


@dataclass(frozen=True)
class Field2D:
    """A function of ``(r, t)`` written against jets or scalars in either slot.

    Only one variable is ever free at a time; slices fix the other one.
    """

    label: str
    func: Callable[[object, object], Jet] = field(repr=False, compare=False)

    def slice(self, axis: str, fixed: float) -> SmoothFn:
        check_axis(axis)

        def evaluator(point, order, ax=None):
            x = jet_var(point, order)
            c = constant_jet(point, fixed, order)
            out = self.func(c, x) if axis == "time" else self.func(x, c)
            if not isinstance(out, Jet):
                out = constant_jet(point, out, order)
            return out

        which = "r" if axis == "time" else "t"
        return SmoothFn(f"{self.label}|{which}={fixed}", evaluator, free_axis=axis)

    def transposed(self) -> "Field2D":
        return Field2D(f"{self.label}^T", lambda r, t: self.func(t, r))


# --------------------------------------------------------------------------
# finite-difference oracle


def fd_oracle(f: SmoothFn, t0: float, k: int, axis: Optional[str] = None, levels: int = 4):
    """Central-difference estimate of the k-th derivative with Richardson extrapolation.

    Uses only point values of ``f``.  Returns ``(estimate, error_bound)``;
    the bound adds the extrapolation spread to a rounding estimate.
    """
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    scale = max(1.0, abs(t0))
    if k == 0:
        v = f(t0, axis)
        return v, abs(v) * np.finfo(float).eps
    eps = np.finfo(float).eps
    h0 = eps ** (1.0 / (k + 2 * levels)) * scale
    weights = np.array([(-1) ** (k - j) * math.comb(k, j) for j in range(k + 1)], dtype=float)
    offsets = np.arange(k + 1) - k / 2.0

    table = []
    rounding = []
    for m in range(levels):
        h = h0 * 2.0 ** m
        vals = np.array([f(t0 + o * h, axis) for o in offsets])
        table.append(np.dot(weights, vals) / h ** k)
        rounding.append(eps * np.dot(np.abs(weights), np.abs(vals)) / h ** k)

    # Neville extrapolation to h -> 0; entry 0 has the smallest step.
    col = list(table)
    prev = col[0]
    for j in range(1, levels):
        prev = col[0]
        col = [col[m] + (col[m] - col[m + 1]) / (4.0 ** j - 1.0) for m in range(len(col) - 1)]
    est = col[0]
    amp = sum(1.0 + 1.0 / (4.0 ** j - 1.0) for j in range(1, levels))
    bound = abs(est - prev) + amp * rounding[0] * 2.0
    return est, float(bound)
