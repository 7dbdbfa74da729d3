"""Executable forms of the derivative decomposition identities.

The realized plan for ``d^v f^n`` (``n >= 2``) is

    d^v f^n = (n/2) sum_j C(v-1, j) d^(v-1-j)(f^(n-2)) d^j (Psi_1^+ + Psi_1^-)(f)

which follows from ``d(f^n) = (n/2) f^(n-2) (Psi_1^+ + Psi_1^-)(f)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .jets import Jet, JetError, SmoothFn, pow_int
from .operators import OperatorSpec, bracket_from_jet, psi


@dataclass(frozen=True)
class InnerTerm:
    """``coefficient * d^shift Psi_k^{sign}(f)`` inside the outer binomial sum."""

    coefficient: Fraction
    k: int
    sign: str
    shift: int


@dataclass(frozen=True)
class DecompositionPlan:
    v: int
    n: int
    alpha: Fraction
    shift: int
    weights: Tuple[int, ...]
    inner: Tuple[Tuple[InnerTerm, ...], ...]

    @classmethod
    def realized(cls, v: int, n: int) -> "DecompositionPlan":
        if v < 1:
            raise ValueError("v must be >= 1")
        if n < 2:
            raise ValueError("the realized plan needs n >= 2")
        alpha = Fraction(n, 2)
        weights = tuple(math.comb(v - 1, j) for j in range(v))
        inner = tuple(
            (InnerTerm(alpha, 1, "+", j), InnerTerm(alpha, 1, "-", j)) for j in range(v)
        )
        return cls(v, n, alpha, 2, weights, inner)


def _scale(*values) -> float:
    return max([abs(complex(x)) for x in values] + [np.finfo(float).tiny])


def first_identity_residual(f: SmoothFn, n: int, point: float, axis: Optional[str] = None) -> float:
    """``|d(f^n) - (n/2) f^(n-2) (Psi_1^+ + Psi_1^-)(f)|`` at ``point``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    fj = f.jet(point, 2, axis)
    lhs = pow_int(fj, n).derivative_value(1)
    s = psi(OperatorSpec("+", 1, 0, axis or "time"), fj) + psi(OperatorSpec("-", 1, 0, axis or "time"), fj)
    rhs = n / 2 * pow_int(fj, n - 2).value * s.value
    return float(abs(lhs - rhs))


def direct_derivative(f: SmoothFn, n: int, v: int, point: float, axis: Optional[str] = None):
    """``d^v f^n`` straight from the jet of ``f``."""
    return pow_int(f.jet(point, v, axis), n).derivative_value(v)


def leibniz_terms(plan: DecompositionPlan, f: SmoothFn, point: float, axis: Optional[str] = None) -> list:
    v, n = plan.v, plan.n
    fj = f.jet(point, v, axis)
    ax = axis or "time"
    ops = {s: psi(OperatorSpec(s, 1, 0, ax), fj) for s in ("+", "-")}
    outer = pow_int(fj, n - plan.shift)
    terms = []
    for j, w in enumerate(plan.weights):
        left = outer.derivative_value(v - 1 - j)
        right = sum(
            float(t.coefficient) * ops[t.sign].derivative_value(t.shift) for t in plan.inner[j]
        )
        terms.append(w * left * right)
    return terms


def leibniz_expand(plan: DecompositionPlan, f: SmoothFn, point: float, axis: Optional[str] = None):
    """Right-hand side of the realized decomposition of ``d^v f^n``."""
    terms = leibniz_terms(plan, f, point, axis)
    return sum(terms[1:], terms[0])


def leibniz_relative_error(plan: DecompositionPlan, f: SmoothFn, point: float, axis: Optional[str] = None) -> float:
    terms = leibniz_terms(plan, f, point, axis)
    expanded = sum(terms[1:], terms[0])
    direct = direct_derivative(f, plan.n, plan.v, point, axis)
    scale = _scale(direct, sum(abs(t) for t in terms))
    return float(abs(expanded - direct) / scale)


@dataclass(frozen=True)
class Uniqueness:
    beta1: float
    beta2: Optional[float]
    residual: float
    rank: int


class SingularSystemError(np.linalg.LinAlgError):
    pass


def recover_uniqueness(
    S: Callable[[Jet], Jet],
    f: SmoothFn,
    k: int,
    points: Sequence[float],
    axis: Optional[str] = None,
    rcond: float = 1e-10,
) -> Uniqueness:
    """Least-squares ``(beta1, beta2)`` with ``S(f) = beta1 Psi_k^+(f) + beta2 Psi_k^-(f)``.

    ``S`` maps a jet of ``f`` to a jet (like :func:`psi`).  When ``Psi_k^-(f)``
    vanishes on the samples (always for k=1) only ``beta1`` is identifiable and
    ``beta2`` is returned as ``None``.
    """
    points = list(points)
    if len(points) < 2:
        raise ValueError("need at least two sample points")
    ax = axis or "time"
    need = max(k, 1)
    rows, rhs = [], []
    for t in points:
        fj = f.jet(t, need, axis)
        prim = f.primitive.jet(t, 1, axis) if (k == 0 and f.primitive is not None) else None
        rows.append([psi(OperatorSpec(s, k, 0, ax), fj, prim).value for s in ("+", "-")])
        rhs.append(S(fj).value)
    A = np.array(rows)
    b = np.array(rhs)
    col = np.abs(A).max(axis=0)
    if col[0] <= rcond * max(col.max(), 1e-300) or col.max() == 0:
        raise SingularSystemError("Psi_k^+(f) vanishes on the samples; f is outside s^-")
    if col[1] <= rcond * col[0]:
        beta1 = np.dot(A[:, 0].conj(), b) / np.dot(A[:, 0].conj(), A[:, 0])
        res = np.linalg.norm(A[:, 0] * beta1 - b) / max(np.linalg.norm(b), 1e-300)
        return Uniqueness(_real(beta1), None, float(res), 1)
    sol, _, rank, sv = np.linalg.lstsq(A, b, rcond=None)
    if rank < 2 or sv[-1] <= rcond * sv[0]:
        raise SingularSystemError("Psi_k^+ and Psi_k^- samples are collinear")
    res = np.linalg.norm(A @ sol - b) / max(np.linalg.norm(b), 1e-300)
    return Uniqueness(_real(sol[0]), _real(sol[1]), float(res), 2)


def _real(x):
    x = complex(x)
    return x.real if abs(x.imag) <= 1e-12 * max(abs(x.real), 1e-300) else x


def _leibniz_product(a: Jet, b: Jet, v: int):
    return sum(math.comb(v, j) * a.derivative_value(j) * b.derivative_value(v - j) for j in range(v + 1))


def nonpositive_power_decompose(
    f: SmoothFn,
    n: int,
    v: int,
    point: float,
    level: int = 0,
    axis: Optional[str] = None,
    tiny: float = 1e-300,
):
    """``d^v (B**n)`` with ``B = [[f]^level]_1^+`` for ``n`` in ``{1, -1}`` or ``n < -1``.

    ``n < -1`` goes through ``h = 1/B`` and ``h**|n|``; ``n = 1`` splits
    ``B = B**3 * B**-2`` and ``n = -1`` splits ``B**-1 = B**2 * B**-3``, each
    differentiated with the product rule.  ``B`` must not vanish at ``point``.
    """
    if n >= 2 or n == 0:
        raise ValueError("n must be 1, -1 or < -1")
    if v < 0:
        raise ValueError("v must be >= 0")
    ax = axis or "time"
    fj = f.jet(point, v + level + 1, axis)
    B = bracket_from_jet(OperatorSpec("+", 1, level, ax), fj)
    if abs(B.value) <= tiny:
        raise JetError(f"[[f]^{level}]_1^+ vanishes at {point!r}")
    h = 1.0 / B
    if n < -1:
        return pow_int(h, -n).derivative_value(v)
    cube = pow_int(B, 3)
    square = pow_int(B, 2)
    inv_square = pow_int(h, 2)
    inv_cube = pow_int(h, 3)
    if n == 1:
        return _leibniz_product(cube, inv_square, v)
    return _leibniz_product(square, inv_cube, v)


def direct_bracket_power(f: SmoothFn, n: int, v: int, point: float, level: int = 0, axis: Optional[str] = None):
    ax = axis or "time"
    fj = f.jet(point, v + level + 1, axis)
    B = bracket_from_jet(OperatorSpec("+", 1, level, ax), fj)
    return pow_int(B, n).derivative_value(v)


def identity_suite(
    functions: Sequence[Tuple[SmoothFn, float]],
    n_range: Sequence[int] = range(2, 7),
    v_range: Sequence[int] = range(1, 5),
    reciprocal_ns: Sequence[int] = (-3, -2, -1, 1),
    tol: float = 1e-12,
    axis: Optional[str] = None,
) -> list:
    """Run the first-identity, realized-plan and reciprocal-power checks.

    Each row is a dict with ``check``, ``function``, ``n``, ``v``, ``error``
    (relative), ``tol`` and ``passed``.
    """
    rows = []
    for f, t in functions:
        for n in n_range:
            fj = f.jet(t, 2, axis)
            scale = _scale(pow_int(fj, n).derivative_value(1), n / 2 * abs(pow_int(fj, n - 2).value) * abs(2 * fj.value * fj.coeffs[1]))
            err = first_identity_residual(f, n, t, axis) / scale
            rows.append(dict(check="first_identity", function=f.label, n=n, v=1, error=err, tol=tol, passed=err <= tol))
            for v in v_range:
                err = leibniz_relative_error(DecompositionPlan.realized(v, n), f, t, axis)
                rows.append(dict(check="leibniz", function=f.label, n=n, v=v, error=err, tol=tol, passed=err <= tol))
        for n in reciprocal_ns:
            for v in v_range:
                direct = direct_bracket_power(f, n, v, t, 0, axis)
                routed = nonpositive_power_decompose(f, n, v, t, 0, axis)
                err = float(abs(routed - direct) / _scale(direct))
                rows.append(dict(check="reciprocal", function=f.label, n=n, v=v, error=err, tol=tol, passed=err <= tol))
    return rows
