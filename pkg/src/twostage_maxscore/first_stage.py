"""First-stage estimation of G(x) = E(y | x, d=1) - E(y | x, d=0).

Either OLS of y on (1, x) or Nadaraya-Watson regression is fitted separately
on the d=1 and d=0 subsamples; G-hat is the difference of the two fits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import (
    DegenerateCovariateError,
    DegenerateDenominatorError,
    FirstStageError,
    InsufficientDataError,
    SingularFitError,
)
from .kernels import KernelSpec, kernel_values

DENOMINATOR_TOL = 1e-10

# Evaluation points are processed in blocks of at most this many kernel values.
_BLOCK = 1 << 21


class Method(str, enum.Enum):
    OLS = "ols"
    KERNEL = "kernel"


@dataclass(frozen=True)
class FirstStageConfig:
    method: Method = Method.OLS
    kernel: KernelSpec | None = None
    trim_bound: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.KERNEL and self.kernel is None:
            raise ValueError("kernel first stage needs a KernelSpec")
        if self.trim_bound is not None and not self.trim_bound > 0:
            raise ValueError(f"trim_bound must be positive, got {self.trim_bound}")


def trim_indicator(x, bound: float) -> int:
    """1 if every coordinate of x satisfies |x_c| <= bound."""
    return int(np.all(np.abs(np.asarray(x, dtype=float)) <= bound))


def trim_flags(x: np.ndarray, bound: float | None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if bound is None:
        return np.ones(x.shape[0], dtype=np.int8)
    return np.all(np.abs(x) <= bound, axis=1).astype(np.int8)


def conditional_std(data: Dataset, j: int, coord: int = 0) -> float:
    """Sample standard deviation (ddof=1) of x[:, coord] over the d=j subsample."""
    xs = data.x[data.mask(j), coord]
    if xs.size < 2:
        raise InsufficientDataError(
            f"d={j} subsample has {xs.size} observation(s); need at least 2"
        )
    s = float(np.std(xs, ddof=1))
    if not s > 0:
        raise DegenerateCovariateError(f"x[{coord}] has zero spread in the d={j} subsample")
    return s


def _nw_block(x_eval, xs, ys, spec, h, sigma):
    """Numerator (M, p) and denominator (M,) of the NW ratio."""
    m = x_eval.shape[0]
    num = np.empty((m, ys.shape[1]))
    den = np.empty(m)
    step = max(1, _BLOCK // max(1, xs.shape[0]))
    for start in range(0, m, step):
        stop = min(m, start + step)
        w = None
        for c in range(xs.shape[1]):
            u = (x_eval[start:stop, c, None] - xs[None, :, c]) / (sigma[c] * h)
            kc = kernel_values(u, spec)
            w = kc if w is None else w * kc
        num[start:stop] = w @ ys
        den[start:stop] = w.sum(axis=1)
    return num, den


def nw_estimate(data: Dataset, j: int, x0, spec: KernelSpec, h: float, sigma) -> np.ndarray:
    """Nadaraya-Watson estimate of E(y | x=x0, d=j).

    Raises DegenerateDenominatorError when the kernel weights sum to less
    than 1e-10 in absolute value.
    """
    mask = data.mask(j)
    if not mask.any():
        raise InsufficientDataError(f"d={j} subsample is empty")
    q = data.dims[2]
    x0 = np.asarray(x0, dtype=float).reshape(1, q)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (q,))
    if not np.all(np.isfinite(x0)):
        raise ValueError("evaluation point must be finite")
    num, den = _nw_block(x0, data.x[mask], data.y[mask], spec, h, sigma)
    if abs(den[0]) < DENOMINATOR_TOL:
        raise DegenerateDenominatorError(f"kernel weights sum to {den[0]!r} at x0={x0[0]}")
    return num[0] / den[0]


@dataclass(frozen=True, eq=False)
class FirstStageFit:
    """Immutable result of :func:`fit_first_stage`.

    ``g_hat_at_obs`` holds NaN rows where the kernel denominator degenerated;
    those rows always carry ``tau == 0``.
    """

    method: Method
    g_hat_at_obs: np.ndarray
    tau: np.ndarray
    sigma_hat: dict[int, np.ndarray] | None = None
    bandwidth: float | None = None
    n_degenerate: int = 0
    ols_coef: dict[int, np.ndarray] | None = None
    kernel: KernelSpec | None = None
    _subsamples: dict = field(default_factory=dict, repr=False)

    def evaluate(self, x) -> np.ndarray:
        """G-hat at arbitrary points; x has shape (M, q) or (q,) -> (M, p)."""
        x = np.asarray(x, dtype=float)
        q = self._q
        x = x.reshape(-1, q) if x.ndim <= 1 else x
        if self.method is Method.OLS:
            design = np.column_stack([np.ones(x.shape[0]), x])
            return design @ self.ols_coef[1] - design @ self.ols_coef[0]
        est = []
        for j in (1, 0):
            xs, ys = self._subsamples[j]
            num, den = _nw_block(x, xs, ys, self.kernel, self.bandwidth, self.sigma_hat[j])
            with np.errstate(divide="ignore", invalid="ignore"):
                val = num / den[:, None]
            val[np.abs(den) < DENOMINATOR_TOL] = np.nan
            est.append(val)
        return est[0] - est[1]

    @property
    def _q(self) -> int:
        if self.method is Method.OLS:
            return self.ols_coef[1].shape[0] - 1
        return self._subsamples[1][0].shape[1]

    __call__ = evaluate


def _ols(data: Dataset, j: int) -> np.ndarray:
    mask = data.mask(j)
    x = data.x[mask]
    design = np.column_stack([np.ones(x.shape[0]), x])
    if x.shape[0] < design.shape[1] or np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularFitError(f"OLS design for the d={j} subsample is rank deficient")
    coef, *_ = np.linalg.lstsq(design, data.y[mask], rcond=None)
    return coef


def fit_first_stage(data: Dataset, cfg: FirstStageConfig) -> FirstStageFit:
    for j in (0, 1):
        if not data.mask(j).any():
            raise InsufficientDataError(f"d={j} subsample is empty")
    tau = trim_flags(data.x, cfg.trim_bound)

    if cfg.method is Method.OLS:
        coef = {j: _ols(data, j) for j in (0, 1)}
        fit = FirstStageFit(Method.OLS, np.empty((0, 0)), tau, ols_coef=coef)
        g = fit.evaluate(data.x)
        object.__setattr__(fit, "g_hat_at_obs", g)
        return fit

    q = data.dims[2]
    sigma = {j: np.array([conditional_std(data, j, c) for c in range(q)]) for j in (0, 1)}
    h = cfg.kernel.bandwidth(data.n)
    subs = {j: (data.x[data.mask(j)], data.y[data.mask(j)]) for j in (0, 1)}
    fit = FirstStageFit(
        Method.KERNEL,
        np.empty((0, 0)),
        tau,
        sigma_hat=sigma,
        bandwidth=h,
        kernel=cfg.kernel,
        _subsamples=subs,
    )
    g = fit.evaluate(data.x)
    bad = ~np.all(np.isfinite(g), axis=1)
    tau = np.where(bad, 0, tau).astype(np.int8)
    if not tau.any():
        raise FirstStageError(
            "no usable observation: every trimmed-in point has a degenerate kernel denominator"
        )
    object.__setattr__(fit, "g_hat_at_obs", g)
    object.__setattr__(fit, "tau", tau)
    object.__setattr__(fit, "n_degenerate", int(bad.sum()))
    return fit
