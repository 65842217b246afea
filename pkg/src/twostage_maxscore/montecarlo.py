"""Replicated simulation studies, summary statistics and EDF curves."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CellFailureError, EstimationError
from .first_stage import FirstStageConfig, Method
from .kernels import KernelSpec
from .maxscore import DEFAULT_GRID, GridSpec, single_stage_estimate, two_stage_estimate
from .simulation import DgpConfig, draw_sample, true_G

VARIANT_KINDS = ("single", "ols", "kernel2", "kernel8")
TRIM_BOUND = 1.95


@dataclass(frozen=True)
class Variant:
    """One estimator column of a study.

    ``trim=None`` applies the default policy: both two-stage estimators
    (OLS and kernel first stage) trim, the single-stage estimator does not.
    """

    kind: str
    c: float | None = None
    trim: bool | None = None

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"unknown variant {self.kind!r}; expected one of {VARIANT_KINDS}")
        is_kernel = self.kind.startswith("kernel")
        if is_kernel and (self.c is None or not self.c > 0):
            raise ValueError(f"variant {self.kind} needs a positive bandwidth scale c")
        if not is_kernel and self.c is not None:
            raise ValueError(f"variant {self.kind} takes no bandwidth scale")

    @property
    def trims(self) -> bool:
        return self.kind != "single" if self.trim is None else self.trim

    @property
    def label(self) -> str:
        return self.kind if self.c is None else f"{self.kind}@{self.c!r}"

    def kernel_spec(self) -> KernelSpec | None:
        if self.kind == "kernel2":
            return KernelSpec.gaussian2(self.c)
        if self.kind == "kernel8":
            return KernelSpec.multigauss8(self.c)
        return None


@dataclass(frozen=True)
class StudyConfig:
    dgp: DgpConfig = field(default_factory=DgpConfig)
    sample_sizes: tuple[int, ...] = (300, 500, 1000)
    reps: int = 1000
    master_seed: int = 0
    variants: tuple[Variant, ...] = (Variant("single"),)
    grid: GridSpec = DEFAULT_GRID
    trim_bound: float = TRIM_BOUND
    threads: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not self.sample_sizes:
            raise ValueError("sample_sizes must be nonempty")
        if any(int(n) < 2 for n in self.sample_sizes):
            raise ValueError("every sample size must be >= 2")
        if not self.variants:
            raise ValueError("at least one variant is required")
        if not self.trim_bound > 0:
            raise ValueError("trim_bound must be positive")
        if self.threads < 0:
            raise ValueError("threads must be >= 0 (0 = all cores)")
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "variants", tuple(self.variants))


@dataclass(frozen=True)
class Summary:
    bias: float
    rmse: float
    median: float
    mean_ad: float
    median_ad: float


@dataclass(frozen=True)
class SummaryRow:
    variant: str
    N: int
    c: float | None
    bias: float
    rmse: float
    median: float
    mean_ad: float
    median_ad: float
    reps_used: int


@dataclass(frozen=True)
class EdfCurve:
    variant: str
    N: int
    values: np.ndarray
    fractions: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.fractions.tolist()))


@dataclass(frozen=True)
class StudyResult:
    rows: list[SummaryRow]
    curves: list[EdfCurve]
    estimates: dict[tuple[str, int], np.ndarray]


def summarize(estimates, true_beta2: float) -> Summary:
    """Bias, RMSE, median, and mean/median absolute deviation about the truth."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise ValueError("cannot summarize an empty list of estimates")
    err = est - true_beta2
    abs_err = np.abs(err)
    return Summary(
        bias=float(err.mean()),
        rmse=float(np.sqrt(np.mean(err * err))),
        median=float(np.median(est)),
        mean_ad=float(abs_err.mean()),
        median_ad=float(np.median(abs_err)),
    )


def edf_points(estimates, true_beta2: float, n: int, variant: str = "") -> EdfCurve:
    """Step points of the EDF of N**(1/3) * (estimate - truth)."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise ValueError("cannot build an EDF from an empty list of estimates")
    values = np.sort(float(n) ** (1.0 / 3.0) * (est - true_beta2))
    fractions = np.arange(1, est.size + 1) / est.size
    return EdfCurve(variant, int(n), values, fractions)


def replication_seed(master_seed: int, variant: Variant, n: int, rep: int) -> int:
    """128-bit seed from SHA-256 of ``"master|kind|N|c|rep"``.

    ``c`` is written with ``repr`` (``None`` for variants without one).
    """
    key = f"{int(master_seed)}|{variant.kind}|{int(n)}|{variant.c!r}|{int(rep)}"
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:16], "little")


def run_replication(
    dgp: DgpConfig, variant: Variant, n: int, seed: int, grid: GridSpec, trim_bound: float
) -> float | None:
    """One estimate of beta2, or None if the estimator failed."""
    data = draw_sample(dgp, n, seed)
    bound = trim_bound if variant.trims else None
    try:
        if variant.kind == "single":
            g = true_G(data.x[:, 0], dgp)
            tau = (np.abs(data.x[:, 0]) <= bound) if bound is not None else None
            est = single_stage_estimate(data, g, tau, grid)
        else:
            method = Method.OLS if variant.kind == "ols" else Method.KERNEL
            fs = FirstStageConfig(method, variant.kernel_spec(), bound)
            est = two_stage_estimate(data, fs, grid)
    except EstimationError:
        return None
    return est.estimate.beta2


def _run_chunk(args):
    dgp, variant, n, seeds, grid, trim_bound = args
    return [run_replication(dgp, variant, n, s, grid, trim_bound) for s in seeds]


def _resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def run_cell(
    cfg: StudyConfig, variant: Variant, n: int, pool=None, workers: int = 1
) -> list[float | None]:
    seeds = [replication_seed(cfg.master_seed, variant, n, r) for r in range(cfg.reps)]
    if pool is None:
        return _run_chunk((cfg.dgp, variant, n, seeds, cfg.grid, cfg.trim_bound))
    size = max(1, -(-len(seeds) // (4 * workers)))
    chunks = [
        (cfg.dgp, variant, n, seeds[i : i + size], cfg.grid, cfg.trim_bound)
        for i in range(0, len(seeds), size)
    ]
    out: list[float | None] = []
    for part in pool.map(_run_chunk, chunks):  # map preserves chunk order
        out.extend(part)
    return out


def run_study(cfg: StudyConfig) -> StudyResult:
    """Run every (variant, N) cell of the study.

    Replications are seeded independently of scheduling, so results do not
    depend on ``cfg.threads``. Raises CellFailureError when every
    replication of a cell fails.
    """
    threads = _resolve_threads(cfg.threads)
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    rows, curves, estimates = [], [], {}
    try:
        for variant in cfg.variants:
            for n in cfg.sample_sizes:
                raw = run_cell(cfg, variant, n, pool, threads)
                kept = np.array([v for v in raw if v is not None], dtype=float)
                if kept.size == 0:
                    raise CellFailureError(
                        f"all {cfg.reps} replications failed for {variant.label}, N={n}"
                    )
                s = summarize(kept, cfg.dgp.beta2)
                rows.append(
                    SummaryRow(
                        variant.kind, n, variant.c,
                        s.bias, s.rmse, s.median, s.mean_ad, s.median_ad,
                        int(kept.size),
                    )
                )
                curves.append(edf_points(kept, cfg.dgp.beta2, n, variant.label))
                estimates[(variant.label, n)] = kept
    finally:
        if pool is not None:
            pool.shutdown()
    return StudyResult(rows, curves, estimates)
