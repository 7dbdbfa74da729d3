"""Energy operators Psi_k^{+/-} and their generalized (bracket) iterates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .jets import Jet, JetError, SmoothFn, check_axis, jet_derivative

DEFAULT_EPSILON = 1e-10


@dataclass(frozen=True)
class OperatorSpec:
    """One operator: ``sign`` in ``{"+", "-"}``, index ``k``, level ``p``, axis."""

    sign: str = "+"
    k: int = 1
    level: int = 0
    axis: str = "time"

    def __post_init__(self):
        aliases = {"plus": "+", "minus": "-"}
        object.__setattr__(self, "sign", aliases.get(self.sign, self.sign))
        if self.sign not in ("+", "-"):
            raise ValueError(f"sign must be '+' or '-', got {self.sign!r}")
        if int(self.k) != self.k:
            raise ValueError(f"k must be an integer, got {self.k!r}")
        if int(self.level) != self.level or self.level < 0:
            raise ValueError(f"level must be a non-negative integer, got {self.level!r}")
        check_axis(self.axis)

    @property
    def order_cost(self) -> int:
        """Jet orders consumed by one application of Psi_k."""
        return max(self.k, 1)

    def __str__(self):
        name = "Psi" if self.level == 0 else f"[[.]^{self.level}]"
        return f"{name}_{self.k}^{{{self.sign},{self.axis[0]}}}"


def psi(spec: OperatorSpec, f_jet: Jet, primitive: Optional[Jet] = None) -> Jet:
    """``Psi_k^{+/-}(f) = f' * f^(k-1) +/- f * f^(k)`` as a jet.

    The output order is ``f_jet.order - max(k, 1)``.  For ``k = 0`` the
    ``f^(-1)`` factor is taken from ``primitive``.  Negative ``k`` is not
    supported.
    """
    k = spec.k
    if k < 0:
        raise ValueError(f"Psi_k with k={k} < 0 needs iterated antiderivatives; not supported")
    cost = spec.order_cost
    if f_jet.order < cost:
        raise JetError(f"Psi_{k} needs a jet of order >= {cost}, got {f_jet.order}")
    df = jet_derivative(f_jet, 1)
    if k == 0:
        if primitive is None:
            raise ValueError("Psi_0 needs the primitive of f")
        lower = primitive
    else:
        lower = jet_derivative(f_jet, k - 1)
    upper = jet_derivative(f_jet, k)
    first = df * lower
    second = f_jet * upper
    out = first + second if spec.sign == "+" else first - second
    return out.truncate(f_jet.order - cost)


def psi_fn(spec: OperatorSpec, f: SmoothFn, point: float, out_order: int = 0) -> Jet:
    """Evaluate ``Psi_k^{+/-}(f)`` at ``point`` with ``out_order`` output coefficients."""
    fj = f.jet(point, out_order + spec.order_cost, spec.axis)
    prim = None
    if spec.k == 0:
        if f.primitive is None:
            raise ValueError(f"{f.label}: Psi_0 needs a primitive, none supplied")
        prim = f.primitive.jet(point, out_order + 1, spec.axis)
    return psi(spec, fj, prim)


def bracket_from_jet(spec: OperatorSpec, f_jet: Jet, primitive: Optional[Jet] = None) -> Jet:
    """``[[f]^p]_k^{+/-}`` from a jet of ``f``.

    Level ``p`` applies ``Psi_k^{+/-}`` once to ``[[f]^{p-1}]_1^+``; level 0 is
    plain ``Psi_k^{+/-}``.  Each inner level costs one jet order.
    """
    if spec.level > 0 and spec.k == 0:
        raise ValueError("index-0 brackets above level 0 need primitives of brackets; not supported")
    g = f_jet
    inner = OperatorSpec("+", 1, 0, spec.axis)
    for _ in range(spec.level):
        g = psi(inner, g)
    return psi(OperatorSpec(spec.sign, spec.k, 0, spec.axis), g, primitive)


def bracket(spec: OperatorSpec, f: SmoothFn, point: float, out_order: int = 0) -> Jet:
    """Evaluate ``[[f]^p]_k^{+/-}`` at ``point`` to ``out_order``."""
    need = out_order + spec.level + spec.order_cost
    fj = f.jet(point, need, spec.axis)
    prim = None
    if spec.k == 0:
        if f.primitive is None:
            raise ValueError(f"{f.label}: Psi_0 needs a primitive, none supplied")
        prim = f.primitive.jet(point, out_order + 1, spec.axis)
    return bracket_from_jet(spec, fj, prim)


@dataclass
class MembershipReport:
    """Kernel sups of the energy operators over a sample grid."""

    label: str
    sups: Dict[Tuple[str, int], float]
    epsilon: float
    in_s_minus: bool
    schwartz_decay_ok: Optional[bool] = None
    grid: str = ""
    level: int = 0
    vanishing: Sequence[Tuple[str, int]] = field(default_factory=tuple)

    def as_dict(self):
        return {
            "label": self.label,
            "grid": self.grid,
            "level": self.level,
            "epsilon": self.epsilon,
            "in_s_minus": self.in_s_minus,
            "schwartz_decay_ok": self.schwartz_decay_ok,
            "sups": {f"{s}{k}": v for (s, k), v in sorted(self.sups.items())},
            "vanishing": [f"{s}{k}" for s, k in self.vanishing],
        }


def _grid_description(grid: np.ndarray) -> str:
    return f"{grid.size} points in [{grid.min()!r}, {grid.max()!r}]"


def _term_scale(spec: OperatorSpec, f: SmoothFn, t: float) -> float:
    """``|f' g^(k-1)| + |g g^(k)|`` for the argument ``g`` of the outer operator."""
    fj = f.jet(t, spec.level + spec.order_cost, spec.axis)
    g = fj
    for _ in range(spec.level):
        g = psi(OperatorSpec("+", 1, 0, spec.axis), g)
    d = g.derivatives()
    if spec.k == 0:
        lower = abs(f.primitive(t, spec.axis)) if spec.level == 0 and f.primitive is not None else 0.0
    else:
        lower = abs(d[spec.k - 1])
    return float(abs(d[1]) * lower + abs(d[0]) * abs(d[spec.k]))


def kernel_scan(
    f: SmoothFn,
    k_range: Iterable[int],
    grid: Sequence[float],
    epsilon: float = DEFAULT_EPSILON,
    axis: str = "time",
    level: int = 0,
) -> MembershipReport:
    """Sup of ``|[[f]^level]_k^{+/-}|`` over ``grid`` for every k in ``k_range``.

    ``f`` belongs to the sampled s^- (or s_p^-) class when every sup exceeds
    ``epsilon``; the ``-`` operator at k=1 is identically zero and exempt.
    Values are judged against ``max(1, |f' f^(k-1)| + |f f^(k)|)`` so that
    cancellation residue on large functions does not count as non-zero.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("kernel_scan needs a non-empty grid")
    sups: Dict[Tuple[str, int], float] = {}
    judged: Dict[Tuple[str, int], float] = {}
    for k in k_range:
        for sign in ("+", "-"):
            spec = OperatorSpec(sign, int(k), level, axis)
            vals, scaled = [], []
            for t in grid:
                v = abs(bracket(spec, f, t).value)
                vals.append(v)
                scaled.append(v / max(1.0, _term_scale(spec, f, t)))
            sups[(sign, int(k))] = float(max(vals))
            judged[(sign, int(k))] = float(max(scaled))
    vanishing = tuple(key for key, v in sorted(judged.items()) if v <= epsilon and key != ("-", 1))
    return MembershipReport(
        label=f.label,
        sups=sups,
        epsilon=epsilon,
        in_s_minus=not vanishing,
        grid=_grid_description(grid),
        level=level,
        vanishing=vanishing,
    )


def schwartz_decay_check(
    f: SmoothFn,
    grid: Sequence[float],
    k_max: int = 3,
    j_max: int = 3,
    bound: float = 10.0,
    axis: Optional[str] = None,
):
    """Check ``sup |t^k f^(j)(t)| < bound`` on the negative part of ``grid``.

    Returns ``(ok, worst)`` with ``worst = (k, j, t, value)`` the largest
    sampled product.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    neg = grid[grid < 0]
    if neg.size == 0:
        raise ValueError("schwartz_decay_check needs negative sample points")
    worst = (0, 0, float(neg[0]), 0.0)
    for t in neg:
        d = f.jet(t, j_max, axis).derivatives()
        for k in range(k_max + 1):
            for j in range(j_max + 1):
                v = float(abs(t ** k * d[j]))
                if v > worst[3]:
                    worst = (k, j, float(t), v)
    return worst[3] < bound, worst
