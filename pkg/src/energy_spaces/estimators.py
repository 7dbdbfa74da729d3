"""scikit-learn style front ends.

``EnergyOperatorTransformer`` maps sample points to operator values of a
fitted function; ``EnergySpaceScanner`` fits a scan to a wave or function and
exposes the energy table, cutoffs and level ratios as fitted attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .jets import SmoothFn
from .operators import DEFAULT_EPSILON, OperatorSpec, bracket
from .scanner import ScanConfig, generalized_level_comparison, scan_energy_spaces
from .waves import ComplexWaveSlice, WaveParams


def check_points(X) -> np.ndarray:
    """Validate sample points: finite, real, returned as a flat float array."""
    arr = check_array(X, ensure_2d=False, dtype=np.float64, input_name="X")
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected one column of sample points, got shape {arr.shape}")
        arr = arr[:, 0]
    return arr


def check_function(f) -> SmoothFn:
    if not isinstance(f, SmoothFn):
        raise TypeError(f"expected a SmoothFn, got {type(f).__name__}")
    return f


class EnergyOperatorTransformer(TransformerMixin, BaseEstimator):
    """Evaluate ``d^derivative [[f]^level]_k^{sign}`` at sample points.

    ``fit`` takes the function (a :class:`SmoothFn`, or a :class:`WaveParams`
    sliced at ``fixed`` along ``axis``); ``transform`` takes points.
    """

    def __init__(self, sign="+", k=1, level=0, axis="time", derivative=0, fixed=None, real=False):
        self.sign = sign
        self.k = k
        self.level = level
        self.axis = axis
        self.derivative = derivative
        self.fixed = fixed
        self.real = real

    def fit(self, X, y=None):
        if isinstance(X, WaveParams):
            X = ComplexWaveSlice(X, self.axis, self.fixed).smooth_fn(real=self.real)
        self.function_ = check_function(X)
        self.spec_ = OperatorSpec(self.sign, self.k, self.level, self.axis)
        if self.derivative < 0:
            raise ValueError("derivative must be non-negative")
        return self

    def transform(self, X):
        check_is_fitted(self, "function_")
        pts = check_points(X)
        vals = [bracket(self.spec_, self.function_, t, self.derivative).derivative_value(self.derivative) for t in pts]
        out = np.array(vals)
        if self.real and np.iscomplexobj(out):
            out = out.real
        return out.reshape(-1, 1)


class EnergySpaceScanner(BaseEstimator):
    """Energy-space scan as an estimator.

    Fitted attributes: ``report_``, ``energies_`` (levels x orders, sup over
    ``n_values``), ``cutoffs_`` (one per level) and ``level_ratios_``
    (level 1 over level 0 when ``p_max >= 1``).
    """

    def __init__(
        self,
        axis="time",
        fixed=None,
        interval=None,
        i_max=6,
        p_max=1,
        n_values=(2,),
        epsilon=DEFAULT_EPSILON,
        quad_tol=1e-10,
        energy_mode="modulus",
        convention="power-then-real",
    ):
        self.axis = axis
        self.fixed = fixed
        self.interval = interval
        self.i_max = i_max
        self.p_max = p_max
        self.n_values = n_values
        self.epsilon = epsilon
        self.quad_tol = quad_tol
        self.energy_mode = energy_mode
        self.convention = convention

    def _config(self, X) -> ScanConfig:
        common = dict(
            axis=self.axis,
            fixed=self.fixed,
            interval=None if self.interval is None else tuple(self.interval),
            i_max=self.i_max,
            p_max=self.p_max,
            n_values=tuple(self.n_values),
            epsilon=self.epsilon,
            quad_tol=self.quad_tol,
            energy_mode=self.energy_mode,
            convention=self.convention,
        )
        if isinstance(X, WaveParams):
            return ScanConfig(wave=X, **common)
        return ScanConfig(fn=check_function(X), **common)

    def fit(self, X, y=None):
        self.report_ = scan_energy_spaces(self._config(X))
        r = self.report_
        self.energies_ = np.array([r.energies(p) for p in r.levels()])
        self.cutoffs_ = np.array([r.cutoffs[p] for p in r.levels()])
        if self.p_max >= 1:
            lc = generalized_level_comparison(r, 0, 1)
            self.level_ratios_ = np.array([np.nan if v is None else v for _, v in sorted(lc.ratios.items())])
        return self

    def predict(self, X=None):
        """Emptiness flags (levels x orders): True where the cell is declared {0}."""
        check_is_fitted(self, "report_")
        return self.energies_ < self.epsilon
