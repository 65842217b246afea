"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (printed in the terminal summary) and
then asserts at the pinned tolerance. Monte Carlo cells are computed once
per session with a fixed master seed and shared between criteria.
"""

import functools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import simpson

from twostage_maxscore.first_stage import nw_estimate
from twostage_maxscore.kernels import KernelSpec, constraint_residuals, eval_kernel8, solve_eighth_order_coefficients
from twostage_maxscore.maxscore import GridSpec, ParameterPoint, ScoreProblem, maximize_score, score
from twostage_maxscore.montecarlo import StudyConfig, Variant, edf_points, run_study, summarize
from twostage_maxscore.simulation import DgpConfig

from .conftest import ACCEPTANCE_LINES, cell_oracle_argmax, make_dataset

MASTER_SEED = 20240601
LINEAR = DgpConfig()
NONLINEAR = DgpConfig(design="nonlinear")


def record(label, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    assert ok, f"{label}: {detail}"


def within_rel(value, target, rel):
    return abs(value - target) <= rel * abs(target)


@functools.lru_cache(maxsize=None)
def cell(design, variant, n, reps):
    dgp = LINEAR if design == "linear" else NONLINEAR
    cfg = StudyConfig(dgp=dgp, sample_sizes=(n,), reps=reps, master_seed=MASTER_SEED, variants=(variant,), threads=0)
    return run_study(cfg).rows[0]


def describe(row, bias_target, bias_tol, rmse_target, rmse_rel):
    ok = abs(row.bias - bias_target) <= bias_tol and within_rel(row.rmse, rmse_target, rmse_rel)
    text = (
        f"{row.variant} N={row.N} reps={row.reps_used}: bias {row.bias:+.3f} "
        f"(target {bias_target:+.3f} ± {bias_tol}), RMSE {row.rmse:.3f} (target {rmse_target:.3f} ± {rmse_rel:.0%})"
    )
    return ok, text


def test_c1_kernel_coefficients():
    exact = [Fraction(-1, 6), Fraction(4), Fraction(-27, 2), Fraction(32, 3)]
    # independent Lagrange basis at nodes 1/s, evaluated at 0
    nodes = [Fraction(1, s) for s in range(1, 5)]
    lag = []
    for i, ti in enumerate(nodes):
        v = Fraction(1)
        for j, tj in enumerate(nodes):
            if i != j:
                v *= -tj / (ti - tj)
        lag.append(v)
    b = [s**-0.5 for s in range(1, 5)]
    a = solve_eighth_order_coefficients(b)
    err = max(abs(x - float(e)) for x, e in zip(a, exact))
    res = max(constraint_residuals(a, b))
    ok = lag == exact and err < 1e-12 and res < 1e-12
    record("C1 kernel coefficients", ok, f"max |a - exact| {err:.1e}, max residual {res:.1e}")


def test_c2_kernel_moments():
    u = np.linspace(-12.0, 12.0, 24001)
    k = eval_kernel8(u, KernelSpec.multigauss8(1.0))
    m0 = simpson(k, x=u)
    ms = [abs(simpson(u ** (2 * l) * k, x=u)) for l in (1, 2, 3)]
    ok = abs(m0 - math.sqrt(2 * math.pi)) < 1e-6 and max(ms) < 1e-6
    record(
        "C2 kernel moments",
        ok,
        f"|int K - sqrt(2pi)| {abs(m0 - math.sqrt(2 * math.pi)):.1e}, max |moment 2,4,6| {max(ms):.1e}",
    )


def test_c3_single_stage_linear():
    ok1, t1 = describe(cell("linear", Variant("single"), 1000, 1000), -0.031, 0.05, 0.264, 0.15)
    ok2, t2 = describe(cell("linear", Variant("single"), 300, 1000), -0.112, 0.06, 0.410, 0.15)
    record("C3 single-stage linear", ok1 and ok2, f"{t1}; {t2}")


def test_c4_ols_linear():
    ok, t = describe(cell("linear", Variant("ols"), 1000, 1000), -0.033, 0.05, 0.301, 0.15)
    record("C4 OLS two-stage linear", ok, t)


def test_c5_misspecification():
    ols = cell("nonlinear", Variant("ols"), 1000, 1000)
    ok1 = abs(ols.bias + 0.400) <= 0.06 and abs(ols.bias) > 0.3
    ok2, t2 = describe(cell("nonlinear", Variant("single"), 1000, 1000), -0.020, 0.05, 0.212, 0.15)
    t1 = f"ols nonlinear N=1000: bias {ols.bias:+.3f} (target -0.400 ± 0.06, |bias| > 0.3)"
    record("C5 misspecification signature", ok1 and ok2, f"{t1}; single nonlinear {t2}")


def test_c6_gaussian_kernel():
    ok1, t1 = describe(cell("linear", Variant("kernel2", 0.8), 1000, 300), -0.028, 0.06, 0.301, 0.20)
    ok2, t2 = describe(cell("nonlinear", Variant("kernel2", 0.8), 1000, 300), -0.012, 0.06, 0.272, 0.20)
    record("C6 Gaussian kernel two-stage", ok1 and ok2, f"linear {t1}; nonlinear {t2}")


def test_c7_eighth_order_kernel():
    ok, t = describe(cell("linear", Variant("kernel8", 5.6), 1000, 300), 0.008, 0.08, 0.380, 0.25)
    record("C7 8th-order kernel two-stage", ok, t)


def test_c8_cube_root_rate():
    scaled = {n: cell("linear", Variant("single"), n, 1000).rmse * n ** (1 / 3) for n in (300, 500, 1000)}
    spread = (max(scaled.values()) - min(scaled.values())) / min(scaled.values())
    detail = ", ".join(f"N={n}: {v:.2f}" for n, v in scaled.items()) + f"; spread {spread:.1%} (limit 25%)"
    record("C8 cube-root rate", spread < 0.25, detail)


def test_c9_oracle_equivalence():
    rng = np.random.default_rng(MASTER_SEED)
    mismatches = 0
    for i in range(1000):
        n = int(rng.integers(1, 9))
        if i % 3 == 0:
            w = rng.integers(-3, 4, size=(n, 2)).astype(float)
        else:
            w = rng.standard_normal((n, 2))
        d = rng.integers(0, 2, n)
        tau = (rng.random(n) < 0.8).astype(int)
        lo = float(rng.uniform(-4, 0))
        grid = GridSpec(((lo, lo + float(rng.uniform(0.5, 6)), int(rng.integers(1, 80))),))
        pts = grid.points(0)
        best, arg = cell_oracle_argmax(w[:, 0], w[:, 1], d, tau, pts)
        est = maximize_score(ScoreProblem(w, d, tau), grid)
        got = sorted((b.b11, int(np.flatnonzero(pts == b.btilde[0])[0])) for b in est.argmax_set)
        mismatches += got != arg or round(est.score_value * n) != best
    record("C9 oracle equivalence", mismatches == 0, f"{mismatches} mismatches in 1000 instances")


def test_c10_property_suites():
    rng = np.random.default_rng(MASTER_SEED + 1)
    failures = []

    bad = 0
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        w = rng.standard_normal((n, 3))
        p = ScoreProblem(w, rng.integers(0, 2, n), rng.integers(0, 2, n))
        b11, bt = int(rng.choice([-1, 1])), rng.normal(size=2)
        lam = 2.0 ** int(rng.integers(-20, 21))
        active, sign = p._active()
        scaled = ((lam * b11) * active[:, 0] + (lam * bt[0]) * active[:, 1]) + (lam * bt[1]) * active[:, 2]
        v = score(p, ParameterPoint(b11, bt))
        perm = rng.permutation(n)
        q = ScoreProblem(w[perm], p.d[perm], p.tau[perm])
        bad += sign[scaled > 0].sum() / n != v or score(q, ParameterPoint(b11, bt)) != v
    if bad:
        failures.append(f"scale/permutation invariance failed {bad}/1000")

    bad = 0
    spec2, spec8 = KernelSpec.gaussian2(1.0), KernelSpec.multigauss8(1.0)
    for _ in range(1000):
        n = int(rng.integers(1, 20))
        c = float(rng.uniform(-50, 50))
        data = make_dataset(np.ones(n, dtype=int), np.full(n, c), rng.uniform(-2, 2, n))
        for spec in (spec2, spec8):
            got = nw_estimate(data, 1, [float(rng.uniform(-2, 2))], spec, float(rng.uniform(0.5, 3)), [1.0])[0]
            bad += not math.isclose(got, c, rel_tol=1e-9, abs_tol=1e-9)
    if bad:
        failures.append(f"NW constant exactness failed {bad}/2000")

    bad = 0
    for _ in range(1000):
        est = rng.normal(1.0, 0.5, int(rng.integers(1, 100)))
        curve = edf_points(est, 1.0, int(rng.integers(1, 5000)))
        bad += not (np.all(np.diff(curve.values) >= 0) and np.all(np.diff(curve.fractions) > 0))
        s = summarize(est, 1.0)
        bad += not math.isclose(s.rmse**2, s.bias**2 + np.var(est - 1.0), rel_tol=1e-9, abs_tol=1e-12)
    if bad:
        failures.append(f"EDF monotonicity / RMSE identity failed {bad}")

    base = dict(
        sample_sizes=(150,), reps=8, master_seed=MASTER_SEED,
        variants=(Variant("single"), Variant("ols"), Variant("kernel2", 0.8), Variant("kernel8", 5.6)),
        grid=GridSpec(((-5, 5, 1001),)),
    )
    runs = [run_study(StudyConfig(**base, threads=t)) for t in (1, 2, 0)]
    ref = runs[0]
    for other in runs[1:]:
        if other.rows != ref.rows or any(
            ref.estimates[k].tobytes() != other.estimates[k].tobytes() for k in ref.estimates
        ):
            failures.append("run_study differs across thread counts")

    record("C10 property suites", not failures, "; ".join(failures) or "all property checks hold")
