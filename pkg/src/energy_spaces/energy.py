"""Signal energy ``E(tau) = int_q^tau |f|^2``, its Taylor extrapolation and the
cavity duplication test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from .jets import JetError, MAX_ORDER, SmoothFn
from .operators import OperatorSpec, psi

MAX_PANELS = 2 ** 20


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the tolerance within the panel budget."""


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    interval: Tuple[float, float]
    tol: float
    error: float
    subdivisions: int


def adaptive_simpson(
    g: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    rel_tol: float = 0.0,
    min_panels: int = 16,
    max_panels: int = MAX_PANELS,
) -> Tuple[float, float, int]:
    """Adaptive Simpson with Richardson correction.

    Starts from ``min_panels`` equal panels and halves any panel whose local
    error exceeds its share of ``max(tol, rel_tol * |I|)``.  Returns
    ``(integral, error_estimate, panels)``.
    """
    if a == b:
        return 0.0, 0.0, 0
    if tol <= 0 and rel_tol <= 0:
        raise ValueError("need a positive tolerance")
    cache = {}

    def ev(x):
        v = cache.get(x)
        if v is None:
            v = cache[x] = float(g(x))
        return v

    def simpson(lo, hi):
        mid = 0.5 * (lo + hi)
        return (hi - lo) / 6.0 * (ev(lo) + 4.0 * ev(mid) + ev(hi))

    edges = np.linspace(a, b, min_panels + 1)
    panels = [(float(lo), float(hi), simpson(lo, hi)) for lo, hi in zip(edges[:-1], edges[1:])]
    coarse = sum(p[2] for p in panels)
    length = abs(b - a)

    # Process panels depth-first and keep the accepted results in order so the
    # final sum is independent of dictionary/ordering effects.
    accepted: List[Tuple[float, float]] = []
    stack = list(reversed(panels))
    count = len(panels)
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left = simpson(lo, mid)
        right = simpson(mid, hi)
        err = (left + right - whole) / 15.0
        budget = max(tol, rel_tol * abs(coarse)) * abs(hi - lo) / length
        if abs(err) <= budget or mid in (lo, hi):
            accepted.append((left + right + err, abs(err)))
            continue
        count += 1
        if count > max_panels:
            raise QuadratureError(
                f"adaptive Simpson exceeded {max_panels} panels on [{a!r}, {b!r}]"
            )
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    value = math.fsum(v for v, _ in accepted)
    error = math.fsum(e for _, e in accepted)
    return value, error, count


def _integrand(f: SmoothFn, part: str, axis: Optional[str]):
    if part == "modulus":
        return lambda x: abs(f(x, axis)) ** 2
    if part == "real":
        return lambda x: np.real(f(x, axis)) ** 2
    raise ValueError(f"part must be 'modulus' or 'real', got {part!r}")


def energy(
    f: SmoothFn,
    q: float,
    tau: float,
    tol: float = 1e-10,
    rel_tol: float = 0.0,
    part: str = "modulus",
    axis: Optional[str] = None,
) -> EnergyEstimate:
    """Energy of ``f`` on ``[q, tau]``: the integral of ``|f|**2``.

    With ``part="real"`` the integrand is ``(Re f)**2``.  The error bound is
    ``max(tol, rel_tol * |E|)``.
    """
    if q > tau:
        raise ValueError(f"need q <= tau, got q={q!r}, tau={tau!r}")
    value, err, n = adaptive_simpson(_integrand(f, part, axis), q, tau, tol, rel_tol)
    return EnergyEstimate(max(value, 0.0), (q, tau), tol, err, n)


def _bracket_tail_terms(f: SmoothFn, T: float, dt: float, terms: int, axis: Optional[str]):
    """Taylor terms of ``E(T + dt) - E(T)`` written through ``Psi_1^{+/-}``.

    Term 1 is ``f(T)**2 dt``; term ``k + 1`` is
    ``d^(k-1)(Psi_1^+ + Psi_1^-)(f)(T) dt**(k+1)/(k+1)!``.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if terms > MAX_ORDER:
        raise JetError(f"terms={terms} exceeds the jet order budget {MAX_ORDER}")
    fj = f.jet(T, terms - 1, axis)
    if fj.is_complex:
        raise TypeError("Taylor energy extrapolation needs a real-valued function")
    out = [fj.value ** 2 * dt]
    if terms > 1:
        plus = psi(OperatorSpec("+", 1, 0, axis or "time"), fj)
        minus = psi(OperatorSpec("-", 1, 0, axis or "time"), fj)
        s = plus + minus
        for k in range(1, terms):
            out.append(s.derivative_value(k - 1) * dt ** (k + 1) / math.factorial(k + 1))
    return out


def _raw_tail_terms(f: SmoothFn, T: float, dt: float, terms: int, axis: Optional[str]):
    """Same series from the jet of ``f**2`` directly."""
    fj = f.jet(T, terms - 1, axis)
    sq = (fj * fj).derivatives()
    return [sq[k - 1] * dt ** k / math.factorial(k) for k in range(1, terms + 1)]


def taylor_energy_extrapolate(
    f: SmoothFn,
    q: float,
    T: float,
    dt: float,
    terms: int = 10,
    tol: float = 1e-12,
    axis: Optional[str] = None,
) -> float:
    """``E(T + dt) ~ E(T) + sum_{k=1..terms} d^(k-1)(f**2)(T) dt**k / k!``.

    ``E(T)`` is integrated from ``q``; the series is summed in its
    energy-operator form.
    """
    base = energy(f, q, T, tol=tol, rel_tol=tol, axis=axis).value
    return base + math.fsum(_bracket_tail_terms(f, T, dt, terms, axis))


class Duplication(str, Enum):
    FIRST_ORDER_SUFFICIENT = "FirstOrderSufficient"
    DUPLICATION_REQUIRED = "DuplicationRequired"


@dataclass
class DuplicationResult:
    verdict: Duplication
    first_order: float
    bracket_terms: List[float]
    epsilon: float
    tail_dominated: bool
    breaches: List[int] = field(default_factory=list)

    def as_dict(self):
        return {
            "verdict": self.verdict.value,
            "first_order": self.first_order,
            "bracket_terms": list(self.bracket_terms),
            "epsilon": self.epsilon,
            "tail_dominated": self.tail_dominated,
            "breaches": list(self.breaches),
        }


def duplication_classify(
    f: SmoothFn,
    r0: float,
    T: float,
    dt: float,
    epsilon: float = 1e-3,
    terms: int = 12,
    axis: str = "time",
) -> DuplicationResult:
    """Decide whether ``E(T + dt) ~ E(T) + f**2 dt`` is enough at the cavity point.

    Bracket term ``k`` is ``|d^(k-1) Psi_1^+(f)(T)| dt**(k+1)/(k+1)!``.  All of
    them below ``epsilon |f(T)|**2 dt`` means first order suffices; otherwise
    the ``Psi_1^+`` solutions have to be added (duplication).
    ``tail_dominated`` records whether the k=1 term also dominates the later
    ones by the factor ``epsilon``.  ``r0`` only labels the slice; ``f`` is
    already the function of ``t`` at that location.  Complex ``f`` is handled
    through moduli.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if terms < 2 or terms > MAX_ORDER:
        raise ValueError(f"terms must lie in [2, {MAX_ORDER}]")
    fj = f.jet(T, terms, axis)
    first = abs(fj.value) ** 2 * abs(dt)
    plus = psi(OperatorSpec("+", 1, 0, axis), fj)
    bracket_terms = [
        abs(plus.derivative_value(k - 1)) * abs(dt) ** (k + 1) / math.factorial(k + 1)
        for k in range(1, terms)
    ]
    limit = epsilon * first
    breaches = [k for k, v in enumerate(bracket_terms, start=1) if v > limit]
    tail_dominated = all(v <= epsilon * bracket_terms[0] for v in bracket_terms[1:])
    verdict = Duplication.DUPLICATION_REQUIRED if breaches else Duplication.FIRST_ORDER_SUFFICIENT
    return DuplicationResult(verdict, first, bracket_terms, epsilon, tail_dominated, breaches)
