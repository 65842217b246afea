"""Maximum score objective and its grid maximization.

Parameters are scale-normalized: the first coefficient on z is fixed to
-1 or +1 and the remaining ``k + p - 1`` coefficients range over a grid.

The index ``w_i'b`` is always accumulated left to right,
``((b11*w_i0 + bt_1*w_i1) + bt_2*w_i2) + ...``, with separately rounded
products. :func:`score` and :func:`maximize_score` share that arithmetic, so
every grid point in the returned argmax set reproduces the maximum exactly
under :func:`score`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset
from .errors import EstimationError
from .first_stage import FirstStageConfig, FirstStageFit, fit_first_stage


@dataclass(frozen=True)
class ParameterPoint:
    b11: int
    btilde: tuple[float, ...]

    def __post_init__(self):
        if self.b11 not in (-1, 1):
            raise ValueError(f"b11 must be -1 or +1, got {self.b11!r}")
        object.__setattr__(self, "btilde", tuple(float(v) for v in self.btilde))

    def as_array(self) -> np.ndarray:
        return np.array((float(self.b11),) + self.btilde)

    @property
    def beta2(self) -> float:
        """Coefficient on the last generated regressor."""
        return self.btilde[-1]


@dataclass(frozen=True, eq=False)
class ScoreProblem:
    """Rows ``w_i = (z_i, G(x_i))``, choices d and trimming weights tau.

    Rows with ``tau == 0`` may contain NaN; they never enter the score.
    """

    w: np.ndarray
    d: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        d = np.asarray(self.d).astype(np.int64)
        tau = np.asarray(self.tau).astype(np.int64)
        n = w.shape[0]
        if w.ndim != 2 or w.shape[1] < 1:
            raise ValueError(f"w must be an (N, k+p) matrix, got shape {w.shape}")
        if d.shape != (n,) or tau.shape != (n,):
            raise ValueError("d and tau must have one entry per row of w")
        if n < 1:
            raise ValueError("score problem needs at least one observation")
        if not np.all((d == 0) | (d == 1)) or not np.all((tau == 0) | (tau == 1)):
            raise ValueError("d and tau must be binary")
        if not np.all(np.isfinite(w[tau == 1])):
            raise ValueError("rows with tau == 1 must be finite")
        for name, arr in (("w", w), ("d", d), ("tau", tau)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def dim(self) -> int:
        return self.w.shape[1]

    @property
    def n_effective(self) -> int:
        return int(self.tau.sum())

    def _active(self):
        keep = self.tau == 1
        return self.w[keep], 2 * self.d[keep] - 1


def _index(w: np.ndarray, b11: int, btilde: Sequence[float]) -> np.ndarray:
    lin = float(b11) * w[:, 0]
    for j, bj in enumerate(btilde, start=1):
        lin = lin + float(bj) * w[:, j]
    return lin


def score_count(problem: ScoreProblem, b: ParameterPoint) -> int:
    """Integer numerator N * S_N(b)."""
    if len(b.btilde) != problem.dim - 1:
        raise ValueError(
            f"parameter has {1 + len(b.btilde)} coordinates, problem has {problem.dim}"
        )
    w, sign = problem._active()
    return int(sign[_index(w, b.b11, b.btilde) > 0].sum())


def score(problem: ScoreProblem, b: ParameterPoint) -> float:
    """S_N(b) = (1/N) sum_i tau_i (2 d_i - 1) 1{w_i'b > 0}."""
    return score_count(problem, b) / problem.n


@dataclass(frozen=True)
class GridSpec:
    """Per-coordinate (lower, upper, count) for the free coefficients."""

    axes: tuple[tuple[float, float, int], ...]

    def __post_init__(self):
        axes = []
        for lower, upper, count in self.axes:
            lower, upper, count = float(lower), float(upper), int(count)
            if not (math.isfinite(lower) and math.isfinite(upper)) or lower > upper:
                raise ValueError(f"invalid grid bounds [{lower}, {upper}]")
            if count < 1:
                raise ValueError(f"grid count must be >= 1, got {count}")
            axes.append((lower, upper, count))
        if not axes:
            raise ValueError("grid needs at least one axis")
        object.__setattr__(self, "axes", tuple(axes))

    @classmethod
    def uniform(cls, lower: float, upper: float, count: int, dim: int = 1) -> GridSpec:
        return cls(((lower, upper, count),) * dim)

    @property
    def dim(self) -> int:
        return len(self.axes)

    def points(self, axis: int) -> np.ndarray:
        lower, upper, count = self.axes[axis]
        if count == 1:
            return np.array([lower])
        j = np.arange(count, dtype=float)
        return lower + j * (upper - lower) / (count - 1)

    @property
    def size(self) -> int:
        return math.prod(c for _, _, c in self.axes)


DEFAULT_GRID = GridSpec(((-5.0, 5.0, 5001),))


@dataclass(frozen=True)
class MaxScoreEstimate:
    estimate: ParameterPoint
    score_value: float
    argmax_set: tuple[ParameterPoint, ...]
    n_effective: int
    n: int

    @property
    def n_trimmed(self) -> int:
        return self.n - self.n_effective


def _first_index(base, coef, grid, value: bool):
    """Per row, the first grid index where ``(base + coef*grid > 0) == value``.

    The rounded predicate must be monotone in the grid index with ``value``
    on the tail, which holds whenever every coef has the same sign. Returns
    len(grid) when the tail is empty.
    """
    g = len(grid)
    lo = np.zeros(base.shape[0], dtype=np.int64)
    hi = np.full(base.shape[0], g, dtype=np.int64)
    active = lo < hi
    while active.any():
        mid = (lo + hi) // 2
        probe = np.minimum(mid, g - 1)
        hit = ((base + coef * grid[probe]) > 0) == value
        hi = np.where(active & hit, mid, hi)
        lo = np.where(active & ~hit, mid + 1, lo)
        active = lo < hi
    return lo


def _line_counts(base, coef, sign, grid) -> np.ndarray:
    """Score numerator at every point of the last grid axis.

    Each row's indicator ``base + coef*t > 0`` is monotone in t, so it holds
    on a suffix (coef > 0), a prefix (coef < 0) or everywhere/nowhere
    (coef == 0). Counts are accumulated through a difference array.
    """
    g = len(grid)
    diff = np.zeros(g + 1, dtype=np.int64)
    pos = coef > 0
    if pos.any():
        k = _first_index(base[pos], coef[pos], grid, True)
        np.add.at(diff, k, sign[pos])
    neg = coef < 0
    if neg.any():
        k = _first_index(base[neg], coef[neg], grid, False)
        diff[0] += sign[neg].sum()
        np.add.at(diff, k, -sign[neg])
    flat = coef == 0
    if flat.any():
        diff[0] += sign[flat][base[flat] > 0].sum()
    return np.cumsum(diff[:g])


def scan_counts(problem: ScoreProblem, grid: GridSpec) -> np.ndarray:
    """Score numerators over {-1, +1} x grid, shape (2, n_1, ..., n_m).

    Axis 0 is b11 in the order (-1, +1).
    """
    if grid.dim != problem.dim - 1:
        raise ValueError(
            f"grid has {grid.dim} axes, problem needs {problem.dim - 1}"
        )
    w, sign = problem._active()
    axes = [grid.points(a) for a in range(grid.dim)]
    shape = (2,) + tuple(len(a) for a in axes)
    out = np.zeros(shape, dtype=np.int64)
    if w.shape[0] == 0:
        return out
    last = w[:, -1]
    outer_ranges = [range(len(a)) for a in axes[:-1]]
    for s, b11 in enumerate((-1, 1)):
        for idx in itertools.product(*outer_ranges):
            base = _index(w[:, :-1], b11, [axes[a][i] for a, i in enumerate(idx)])
            out[(s,) + idx] = _line_counts(base, last, sign, axes[-1])
    return out


def maximize_score(problem: ScoreProblem, grid: GridSpec) -> MaxScoreEstimate:
    """Exact maximizer of the score over {-1, +1} x grid.

    The canonical estimate is the first maximizer in scan order: b11 = -1
    before +1, then lexicographic in the grid indices of btilde.
    """
    if grid.size < 1:
        raise ValueError("empty grid")
    counts = scan_counts(problem, grid)
    best = int(counts.max())
    axes = [grid.points(a) for a in range(grid.dim)]
    hits = np.argwhere(counts == best)  # row-major == scan order
    argmax = tuple(
        ParameterPoint(1 if h[0] == 1 else -1, tuple(axes[a][i] for a, i in enumerate(h[1:])))
        for h in hits
    )
    return MaxScoreEstimate(
        estimate=argmax[0],
        score_value=best / problem.n,
        argmax_set=argmax,
        n_effective=problem.n_effective,
        n=problem.n,
    )


def build_problem(data: Dataset, g_at_obs, tau) -> ScoreProblem:
    g = np.asarray(g_at_obs, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    k, p, _ = data.dims
    if g.shape != (data.n, p):
        raise ValueError(f"G values must have shape {(data.n, p)}, got {g.shape}")
    tau = np.ones(data.n, dtype=np.int8) if tau is None else np.asarray(tau)
    return ScoreProblem(np.column_stack([data.z, g]), data.d, tau)


def single_stage_estimate(data: Dataset, true_g_at_obs, tau, grid: GridSpec) -> MaxScoreEstimate:
    """Infeasible estimator that uses known G(x_i) as the regressor."""
    return maximize_score(build_problem(data, true_g_at_obs, tau), grid)


def two_stage_estimate(
    data: Dataset, fs_cfg: FirstStageConfig, grid: GridSpec, *, return_fit: bool = False
):
    """Fit the first stage, then maximize the score with (z, G-hat).

    With ``return_fit=True`` returns ``(estimate, fit)``.
    """
    fit: FirstStageFit = fit_first_stage(data, fs_cfg)
    est = maximize_score(build_problem(data, fit.g_hat_at_obs, fit.tau), grid)
    return (est, fit) if return_fit else est


@dataclass(frozen=True)
class SubsamplingResult:
    estimate: MaxScoreEstimate
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    level: float
    m: int
    B: int
    n_failed: int
    draws: np.ndarray  # (B_used, k+p-1) subsample estimates of btilde


def default_subsample_size(n: int) -> int:
    return math.ceil(n ** (2.0 / 3.0))


def subsampling_ci(
    data: Dataset,
    fs_cfg: FirstStageConfig,
    grid: GridSpec,
    m: int | None = None,
    B: int = 200,
    level: float = 0.90,
    seed=0,
) -> SubsamplingResult:
    """Subsampling confidence intervals for each free coefficient.

    Draws B subsamples of size m without replacement, recomputes the
    two-stage estimate on each and uses the quantiles of
    ``m**(1/3) * (b*_b - b_hat)`` as the law of ``N**(1/3) * (b_hat - beta)``.
    Subsamples whose first stage fails are dropped and counted.
    """
    n = data.n
    m = default_subsample_size(n) if m is None else int(m)
    if not 1 < m < n:
        raise ValueError(f"subsample size must satisfy 1 < m < N={n}, got {m}")
    if B < 2:
        raise ValueError(f"need at least 2 subsamples, got B={B}")
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")

    full = two_stage_estimate(data, fs_cfg, grid)
    theta = np.array(full.estimate.btilde)
    rng = np.random.default_rng(seed)
    draws = []
    failed = 0
    for _ in range(B):
        idx = np.sort(rng.choice(n, size=m, replace=False))
        try:
            est = two_stage_estimate(data.subset(idx), fs_cfg, grid)
        except EstimationError:
            failed += 1
            continue
        draws.append(est.estimate.btilde)
    if len(draws) < 2:
        raise EstimationError(f"only {len(draws)} of {B} subsamples produced an estimate")
    draws = np.array(draws)
    stats = m ** (1.0 / 3.0) * (draws - theta)
    alpha = 1.0 - level
    q_lo = np.quantile(stats, alpha / 2.0, axis=0)
    q_hi = np.quantile(stats, 1.0 - alpha / 2.0, axis=0)
    scale = n ** (-1.0 / 3.0)
    return SubsamplingResult(
        estimate=full,
        lower=tuple(theta - scale * q_hi),
        upper=tuple(theta - scale * q_lo),
        level=level,
        m=m,
        B=B,
        n_failed=failed,
        draws=draws,
    )
