"""Evanescent plane waves ``A exp(k2 r) exp(j(w t - k1 r))`` and their closed forms."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Dict, Optional, Tuple

import numpy as np

from .jets import Field2D, Jet, SmoothFn, check_axis, exp, jet_var, pow_int
from .operators import OperatorSpec, psi

SPEED_OF_LIGHT = 299_792_458.0

CONVENTIONS = ("power-then-real", "real-then-power")


@dataclass(frozen=True)
class WaveParams:
    """Evanescent wave amplitude, wavenumbers, frequency, speed and domain box."""

    A: float = 1.0
    k1: float = 0.0
    k2: float = 0.0
    omega: float = 1.0
    c: float = SPEED_OF_LIGHT
    T: float = 1.0
    r1: float = 0.0
    r2: float = 1.0

    def __post_init__(self):
        for name, v in asdict(self).items():
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.A == 0:
            raise ValueError("amplitude A must be non-zero")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T!r}")
        if not self.r1 < self.r2:
            raise ValueError(f"need r1 < r2, got r1={self.r1!r}, r2={self.r2!r}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c!r}")

    @property
    def kappa(self) -> complex:
        """Complex spatial rate ``k2 - j k1``."""
        return complex(self.k2, -self.k1)

    def rate(self, axis: str) -> complex:
        """Eigenvalue of d/d(axis) acting on the complex wave."""
        check_axis(axis)
        return 1j * self.omega if axis == "time" else self.kappa

    def interval(self, axis: str) -> Tuple[float, float]:
        check_axis(axis)
        return (0.0, self.T) if axis == "time" else (self.r1, self.r2)

    def contains(self, r: float, t: float) -> bool:
        return 0.0 <= t <= self.T and self.r1 <= r <= self.r2

    def value(self, r: float, t: float) -> complex:
        return self.A * np.exp(self.kappa * r) * np.exp(1j * self.omega * t)

    def field(self) -> Field2D:
        A, kap, w = self.A, self.kappa, self.omega
        return Field2D(
            f"evanescent(A={A},k1={self.k1},k2={self.k2},w={w})",
            lambda r, t: exp(r * kap + t * (1j * w)) * A,
        )

    def with_overrides(self, **kw) -> "WaveParams":
        return replace(self, **kw)


SCENARIOS: Dict[int, WaveParams] = {
    1: WaveParams(A=1.0, k1=1e-10, k2=1e-10, omega=0.03, T=100.0, r1=2.0, r2=140.0),
    2: WaveParams(A=1.0, k1=0.001, k2=1e-5, omega=3000.0, T=100.0, r1=2.0, r2=140.0),
}


def scenario(preset: int) -> WaveParams:
    try:
        return SCENARIOS[int(preset)]
    except (KeyError, ValueError, TypeError):
        raise ValueError(f"unknown preset {preset!r}; known presets: {sorted(SCENARIOS)}") from None


@dataclass(frozen=True)
class ComplexWaveSlice:
    """The complex wave restricted to one free axis.

    ``fixed`` is r0 for a time slice and t0 for a space slice.  ``convention``
    decides how a real function is read off powers of the wave:
    ``power-then-real`` takes ``Re(g**n)``, ``real-then-power`` takes
    ``(Re g)**n``.
    """

    params: WaveParams
    axis: str = "time"
    fixed: Optional[float] = None
    convention: str = "power-then-real"

    def __post_init__(self):
        check_axis(self.axis)
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")
        if self.fixed is None:
            default = self.params.r1 if self.axis == "time" else 0.0
            object.__setattr__(self, "fixed", default)
        lo, hi = self.params.interval("space" if self.axis == "time" else "time")
        if not lo <= self.fixed <= hi:
            raise ValueError(f"fixed coordinate {self.fixed!r} outside [{lo!r}, {hi!r}]")

    def coords(self, point: float) -> Tuple[float, float]:
        return (self.fixed, point) if self.axis == "time" else (point, self.fixed)

    def _check(self, point: float):
        r, t = self.coords(point)
        if not self.params.contains(r, t):
            raise ValueError(f"point (r={r!r}, t={t!r}) outside the domain box")

    def complex_jet(self, point: float, order: int) -> Jet:
        p = self.params
        r, t = self.coords(point)
        x = jet_var(point, order)
        # same factorization as WaveParams.value so the 0th coefficient agrees
        if self.axis == "time":
            return exp(x * (1j * p.omega)) * (p.A * np.exp(p.kappa * r))
        return exp(x * p.kappa) * (p.A * np.exp(1j * p.omega * t))

    def jets(self, point: float, order: int, n: int = 1) -> Tuple[Jet, Jet]:
        """``(jet of g**n, real jet per the convention)``."""
        self._check(point)
        g = self.complex_jet(point, order)
        gn = pow_int(g, n)
        if self.convention == "power-then-real":
            return gn, gn.real
        return gn, pow_int(g.real, n)

    def smooth_fn(self, real: bool = False, check_domain: bool = True) -> SmoothFn:
        """The slice as a :class:`SmoothFn` (complex ``g`` or ``Re g``) with its primitive."""
        rate = self.params.rate(self.axis)

        def ev(point, order, axis=None):
            if check_domain:
                self._check(point)
            j = self.complex_jet(point, order)
            return j.real if real else j

        def prim_ev(point, order, axis=None):
            j = self.complex_jet(point, order) / rate
            return j.real if real else j

        which = "r0" if self.axis == "time" else "t0"
        label = f"{'Re ' if real else ''}g({which}={self.fixed})"
        prim = SmoothFn(f"primitive of {label}", prim_ev, free_axis=self.axis) if rate != 0 else None
        return SmoothFn(label, ev, prim, free_axis=self.axis)


def wave_eval(params: WaveParams, slc: ComplexWaveSlice, point: float, order: int, n: int = 1):
    """Complex jet of ``g**n`` along the slice axis and its real-part jet."""
    if slc.params != params:
        slc = replace(slc, params=params)
    return slc.jets(point, order, n)


def closed_form_derivative(params: WaveParams, i: int, n: int, axis: str, point: Tuple[float, float]) -> complex:
    """``(rate * n)**i * g**n`` at ``point = (r, t)``."""
    if i < 0:
        raise ValueError("i must be non-negative")
    if n < 2:
        raise ValueError("n must be >= 2")
    r, t = point
    return (n * params.rate(axis)) ** i * params.value(r, t) ** n


@dataclass(frozen=True)
class PsiDerivativeDiscrepancy:
    i: int
    axis: str
    literal: complex
    jet_value: complex
    abs_discrepancy: float
    rel_discrepancy: float

    @property
    def literal_real(self) -> float:
        return self.literal.real

    @property
    def jet_real(self) -> float:
        return self.jet_value.real


def closed_form_psi_derivative(
    params: WaveParams, i: int, axis: str, point: Tuple[float, float]
) -> PsiDerivativeDiscrepancy:
    """Compare the shortcut form ``2 i rate g**2`` of ``d^i Psi_1^+(g)``
    with the jet value, which is ``(2 rate)**(i+1) g**2``.

    The jet value is the reference; the shortcut is kept only to report
    how far it is off.
    """
    if i < 1:
        raise ValueError("i must be >= 1")
    r, t = point
    g2 = params.value(r, t) ** 2
    literal = 2 * i * params.rate(axis) * g2
    slc = ComplexWaveSlice(params, axis, r if axis == "time" else t)
    free = t if axis == "time" else r
    gj = slc.complex_jet(free, i + 1)
    pj = psi(OperatorSpec("+", 1, 0, axis), gj)
    jet_value = complex(pj.derivative_value(i))
    diff = abs(literal - jet_value)
    rel = diff / abs(jet_value) if jet_value != 0 else (0.0 if diff == 0 else math.inf)
    return PsiDerivativeDiscrepancy(i, axis, complex(literal), jet_value, float(diff), float(rel))


@dataclass(frozen=True)
class DispersionResult:
    i: int
    n: int
    residual: complex
    real_expression: float


def dispersion_residual(params: WaveParams, i: int, n: int, point: Tuple[float, float]) -> DispersionResult:
    """Normalized d'Alembertian of ``d_t^i g**n``.

    ``box h = d_r^2 h - d_t^2 h / c**2`` is evaluated from jets of the
    separable factors ``a(r)**n`` and ``b(t)**n`` and divided by
    ``n**2 (j w n)**i g**n``.  For this family the ratio is
    ``kappa**2 + w**2/c**2`` whatever ``i`` and ``n``.  The real expression
    ``Re{(j w)**2/c**2 - kappa**2}`` is returned alongside.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if i < 0:
        raise ValueError("i must be non-negative")
    r, t = point
    p = params
    a = exp(jet_var(r, 2) * p.kappa) * p.A
    b = exp(jet_var(t, i + 2) * (1j * p.omega))
    an = pow_int(a, n)
    bn = pow_int(b, n)
    d2r_an = an.derivative_value(2)
    box = d2r_an * bn.derivative_value(i) - an.value * bn.derivative_value(i + 2) / p.c ** 2
    norm = n ** 2 * (1j * p.omega * n) ** i * p.value(r, t) ** n
    if norm == 0:
        raise ZeroDivisionError("normalizer vanishes (omega = 0 with i > 0, or g = 0)")
    real_expr = ((1j * p.omega) ** 2 / p.c ** 2 - p.kappa ** 2).real
    return DispersionResult(i, n, complex(box / norm), float(real_expr))
