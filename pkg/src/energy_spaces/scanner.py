"""Energy-space emptiness scan.

For every level ``p`` and derivative order ``i`` the scanner integrates the
energy of

    d^i [ (n/2) B^(n-2) [[f]^p]_1^+ ],   B = [[f]^(p-1)]_1^+  (B = f at p = 0),

which for ``n = 2`` is the operator energy ``E(d^i [[f]^p]_1^+)`` and in
general equals ``E(d^(i+1) B^n)``.  Cells whose supremum over ``n`` falls
below ``epsilon`` are declared empty; the cutoff ``i1`` of a level is the
first order from which every later cell is empty.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .energy import QuadratureError, adaptive_simpson
from .jets import MAX_ORDER, Jet, JetError, SmoothFn, check_axis, pow_int
from .operators import DEFAULT_EPSILON, OperatorSpec, bracket_from_jet
from .waves import CONVENTIONS, ComplexWaveSlice, WaveParams

ENERGY_MODES = ("modulus", "real")


@dataclass(frozen=True)
class ScanConfig:
    """What to scan and how.

    Give either ``wave`` (an evanescent wave, sliced along ``axis`` at the
    fixed coordinate ``fixed``) or ``fn`` with an explicit ``interval``.
    ``energy_mode="modulus"`` integrates ``|h|**2`` of the complex wave;
    ``"real"`` integrates ``(Re h)**2``.
    """

    wave: Optional[WaveParams] = None
    fn: Optional[SmoothFn] = None
    axis: str = "time"
    fixed: Optional[float] = None
    interval: Optional[Tuple[float, float]] = None
    i_max: int = 6
    p_max: int = 1
    n_values: Tuple[int, ...] = (2,)
    epsilon: float = DEFAULT_EPSILON
    quad_tol: float = 1e-10
    energy_mode: str = "modulus"
    convention: str = "power-then-real"

    def __post_init__(self):
        check_axis(self.axis)
        if (self.wave is None) == (self.fn is None):
            raise ValueError("give exactly one of wave or fn")
        if self.fn is not None and self.interval is None:
            raise ValueError("an explicit interval is required with fn")
        if self.i_max < 0 or self.p_max < 0:
            raise ValueError("i_max and p_max must be non-negative")
        if self.i_max * (self.p_max + 1) + 2 > MAX_ORDER:
            raise JetError(
                f"i_max*(p_max+1)+2 = {self.i_max * (self.p_max + 1) + 2} exceeds the jet budget {MAX_ORDER}"
            )
        n_values = tuple(int(n) for n in self.n_values)
        if not n_values or min(n_values) < 2:
            raise ValueError("n_values must be a non-empty list of integers >= 2")
        object.__setattr__(self, "n_values", n_values)
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.quad_tol > 0:
            raise ValueError("quad_tol must be positive")
        if self.energy_mode not in ENERGY_MODES:
            raise ValueError(f"energy_mode must be one of {ENERGY_MODES}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        if self.interval is not None:
            a, b = self.interval
            if not a < b:
                raise ValueError("interval must satisfy a < b")
        if self.wave is not None and self.fixed is None:
            object.__setattr__(self, "fixed", self.wave.r1 if self.axis == "time" else 0.0)

    def resolve(self) -> Tuple[SmoothFn, Tuple[float, float]]:
        if self.fn is not None:
            return self.fn, tuple(self.interval)
        slc = ComplexWaveSlice(self.wave, self.axis, self.fixed, self.convention)
        f = slc.smooth_fn(real=self.convention == "real-then-power")
        interval = tuple(self.interval) if self.interval is not None else self.wave.interval(self.axis)
        return f, interval

    def echo(self) -> dict:
        out = {
            "axis": self.axis,
            "fixed": self.fixed,
            "interval": list(self.resolve()[1]),
            "i_max": self.i_max,
            "p_max": self.p_max,
            "n_values": list(self.n_values),
            "epsilon": self.epsilon,
            "quad_tol": self.quad_tol,
            "energy_mode": self.energy_mode,
            "convention": self.convention,
        }
        if self.wave is not None:
            out["wave"] = asdict(self.wave)
        else:
            out["function"] = self.fn.label
        return out


@dataclass
class ScanCell:
    p: int
    i: int
    n: int
    energy: float
    error: float
    panels: int
    failure: Optional[str] = None


@dataclass
class MinkowskiMargin:
    p: int
    K: int
    n: int
    lhs: float
    rhs: float
    margin: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.margin >= -self.tolerance


@dataclass
class ScanReport:
    config: dict
    cells: List[ScanCell]
    m: Dict[Tuple[int, int], float]
    M: Dict[int, float]
    cutoffs: Dict[int, int]
    cutoff_found: Dict[int, bool]
    below_epsilon: Dict[Tuple[int, int], bool]
    epsilon: float
    minkowski: List[MinkowskiMargin] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(c.failure for c in self.cells)

    def levels(self) -> List[int]:
        return sorted(self.M)

    def orders(self, p: int) -> List[int]:
        return sorted(i for (q, i) in self.m if q == p)

    def energies(self, p: int, n: Optional[int] = None) -> np.ndarray:
        if n is None:
            return np.array([self.m[(p, i)] for i in self.orders(p)])
        return np.array([c.energy for c in self.cells if c.p == p and c.n == n])

    def decay_ratios(self, p: int) -> np.ndarray:
        e = self.energies(p)
        with np.errstate(divide="ignore", invalid="ignore"):
            return e[1:] / e[:-1]

    def cell(self, p: int, i: int, n: int) -> ScanCell:
        for c in self.cells:
            if (c.p, c.i, c.n) == (p, i, n):
                return c
        raise KeyError((p, i, n))


class _CellFunction:
    """Jets of ``(n/2) B^(n-2) [[f]^p]_1^+`` memoized per point."""

    def __init__(self, f: SmoothFn, p: int, n: int, order: int, axis: str):
        self.f, self.p, self.n, self.order, self.axis = f, p, n, order, axis
        self._cache: Dict[float, Jet] = {}

    def jet(self, t: float) -> Jet:
        j = self._cache.get(t)
        if j is None:
            fj = self.f.jet(t, self.order + self.p + 1, self.axis)
            top = bracket_from_jet(OperatorSpec("+", 1, self.p, self.axis), fj)
            if self.n == 2:
                j = top
            else:
                base = fj if self.p == 0 else bracket_from_jet(OperatorSpec("+", 1, self.p - 1, self.axis), fj)
                j = pow_int(base, self.n - 2) * top * (self.n / 2)
            self._cache[t] = j
        return j

    def derivative(self, i: int, t: float) -> complex:
        return self.jet(t).derivative_value(i)

    def smooth_fn(self, i: int) -> SmoothFn:
        def ev(point, order, axis=None):
            if i + order > self.order:
                raise JetError("cell jet order exceeded")
            return self.jet(point).derivative(i).truncate(order)

        return SmoothFn(f"d^{i} cell(p={self.p}, n={self.n})", ev, free_axis=self.axis)


def _square(mode: str):
    if mode == "modulus":
        return lambda z: abs(z) ** 2
    return lambda z: np.real(z) ** 2


def _integrate(fun, a, b, config: ScanConfig):
    floor = config.epsilon * 1e-4
    return adaptive_simpson(fun, a, b, tol=floor, rel_tol=config.quad_tol)


def _cutoff(values: Sequence[float], epsilon: float) -> Tuple[int, bool]:
    c = len(values)
    for i in range(len(values) - 1, -1, -1):
        v = values[i]
        if not (v < epsilon):
            break
        c = i
    return c, c < len(values)


def scan_energy_spaces(config: ScanConfig, minkowski: bool = True) -> ScanReport:
    """Run the (p, i, n) energy grid described by ``config``."""
    f, (a, b) = config.resolve()
    sq = _square(config.energy_mode)
    cells: List[ScanCell] = []
    cellfns: Dict[Tuple[int, int], _CellFunction] = {}
    for p in range(config.p_max + 1):
        for n in config.n_values:
            cf = _CellFunction(f, p, n, config.i_max, config.axis)
            cellfns[(p, n)] = cf
            for i in range(config.i_max + 1):
                try:
                    val, err, panels = _integrate(lambda t: sq(cf.derivative(i, t)), a, b, config)
                    cells.append(ScanCell(p, i, n, max(val, 0.0), err, panels))
                except (QuadratureError, JetError, FloatingPointError, ValueError) as exc:
                    cells.append(ScanCell(p, i, n, math.nan, math.nan, 0, str(exc)))
    cells.sort(key=lambda c: (c.p, c.i, c.n))

    grouped: Dict[Tuple[int, int], List[float]] = {}
    for c in cells:
        grouped.setdefault((c.p, c.i), []).append(c.energy)
    m = {k: (math.nan if any(math.isnan(v) for v in vs) else max(vs)) for k, vs in grouped.items()}
    M, cutoffs, found = {}, {}, {}
    for p in range(config.p_max + 1):
        vals = [m[(p, i)] for i in range(config.i_max + 1)]
        M[p] = max(vals)
        cutoffs[p], found[p] = _cutoff(vals, config.epsilon)
    below = {k: bool(v < config.epsilon) for k, v in m.items()}

    report = ScanReport(
        config=config.echo(),
        cells=cells,
        m=m,
        M=M,
        cutoffs=cutoffs,
        cutoff_found=found,
        below_epsilon=below,
        epsilon=config.epsilon,
        notes=[
            "m_i is the energy at the right end of the interval (energy is nondecreasing in tau)",
            "emptiness means energy < epsilon; a finite scan up to i_max stands in for the infinite tail",
        ],
    )
    if minkowski and not report.failed:
        report.minkowski = _minkowski(report, cellfns, config, (a, b))
    return report


def _minkowski(report, cellfns, config, interval) -> List[MinkowskiMargin]:
    a, b = interval
    sq = _square(config.energy_mode)
    out = []
    for (p, n), cf in sorted(cellfns.items()):
        for K in range(config.i_max + 1):
            def partial(t, K=K, cf=cf):
                d = cf.jet(t).derivatives()
                return sq(sum(d[: K + 1]))

            val, err, _ = _integrate(partial, a, b, config)
            lhs = math.sqrt(max(val, 0.0))
            rhs = math.fsum(math.sqrt(report.m[(p, i)]) for i in range(K + 1))
            errs = [report.cell(p, i, n).error for i in range(K + 1)]
            tol = math.sqrt(abs(err)) + math.fsum(math.sqrt(abs(e)) for e in errs)
            out.append(MinkowskiMargin(p, K, n, lhs, rhs, rhs - lhs, tol))
    return out


def minkowski_check(
    report: ScanReport,
    f: Optional[SmoothFn] = None,
    interval: Optional[Tuple[float, float]] = None,
    config: Optional[ScanConfig] = None,
) -> List[MinkowskiMargin]:
    """Margins ``sum_{i<=K} sqrt(m_i) - sqrt(E(F_K))`` with ``F_K = sum_{i<=K} d^i cell``.

    Uses the margins stored on ``report`` unless a function (or config) is
    given, in which case the partial sums are re-integrated for it.
    """
    if f is None and config is None:
        return list(report.minkowski)
    if config is None:
        echo = report.config
        a, b = interval if interval is not None else tuple(echo["interval"])
        config = ScanConfig(
            fn=f,
            axis=echo["axis"],
            interval=(a, b),
            i_max=echo["i_max"],
            p_max=echo["p_max"],
            n_values=tuple(echo["n_values"]),
            epsilon=echo["epsilon"],
            quad_tol=echo["quad_tol"],
            energy_mode=echo["energy_mode"],
        )
    fn, iv = config.resolve()
    cellfns = {
        (p, n): _CellFunction(fn, p, n, config.i_max, config.axis)
        for p in range(config.p_max + 1)
        for n in config.n_values
    }
    return _minkowski(report, cellfns, config, iv)


@dataclass
class LevelComparison:
    lower: int
    upper: int
    ratios: Dict[int, Optional[float]]
    upper_cutoff: int
    upper_empty: bool
    notes: List[str] = field(default_factory=list)


def generalized_level_comparison(report: ScanReport, lower: int = 0, upper: int = 1) -> LevelComparison:
    """Per-order ratio ``m_{i,upper} / m_{i,lower}`` and the emptiness of the upper level.

    Ratios with a denominator below the smallest normal float are reported as
    ``None``.  ``upper_empty`` is true when the upper level's cutoff is 0,
    i.e. every scanned cell of that level is below epsilon.
    """
    if upper not in report.M or lower not in report.M:
        raise ValueError(f"report lacks level {lower} or {upper}")
    floor = np.finfo(float).tiny
    ratios: Dict[int, Optional[float]] = {}
    for i in report.orders(lower):
        den = report.m[(lower, i)]
        num = report.m.get((upper, i))
        if num is None:
            continue
        ratios[i] = None if not den >= floor else num / den
    notes = []
    if all(r is None for r in ratios.values()):
        notes.append(f"level {upper} empty: every ratio is 0/0")
    return LevelComparison(lower, upper, ratios, report.cutoffs[upper], report.cutoffs[upper] == 0, notes)
