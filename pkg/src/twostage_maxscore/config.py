"""INI configuration files for the command-line tools.

Every section and key is checked against a whitelist; anything unknown is
an error so that a typo cannot silently fall back to a default. Example::

    [study]
    sample_sizes = 300, 500, 1000
    reps = 1000
    master_seed = 1
    variants = single, ols, kernel2@0.8, kernel8@5.6

    [dgp]
    design = nonlinear

    [grid]
    lower = -5
    upper = 5
    count = 5001

    [trim]
    bound = 1.95
    ols = true
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .first_stage import FirstStageConfig, Method
from .kernels import KernelFamily, KernelSpec
from .maxscore import DEFAULT_GRID, GridSpec
from .montecarlo import TRIM_BOUND, VARIANT_KINDS, StudyConfig, Variant
from .simulation import Design, DgpConfig


class ConfigError(ValueError):
    pass


_DGP_KEYS = {
    "beta1": float, "beta2": float, "g01": float, "g11": float, "g00": float,
    "g10": float, "rho": float, "sigma_u": float, "design": str, "error_scale": float,
}
_GRID_KEYS = {"lower", "upper", "count"}

SCHEMAS = {
    "simulate": {
        "study": {"sample_sizes", "reps", "master_seed", "threads", "variants"},
        "dgp": set(_DGP_KEYS),
        "grid": _GRID_KEYS,
        "trim": {"bound", *VARIANT_KINDS},
    },
    "estimate": {
        "first_stage": {"method", "kernel", "c", "trim_bound"},
        "dgp": set(_DGP_KEYS),
        "grid": _GRID_KEYS,
        "subsampling": {"enabled", "m", "b", "level", "seed"},
    },
    "export": {
        "dgp": set(_DGP_KEYS),
        "export": {"n", "seed"},
    },
}


def load(path, command: str) -> configparser.ConfigParser:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    schema = SCHEMAS[command]
    for section in cp.sections():
        if section not in schema:
            raise ConfigError(f"unknown section [{section}] (allowed: {', '.join(schema)})")
        for key in cp[section]:
            if key not in schema[section]:
                raise ConfigError(f"unknown key {section}.{key}")
    return cp


def _get(cp, section, key, conv, default=None):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}.{key}: invalid value {raw!r} ({exc})") from None


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _float_list(raw: str) -> list[float]:
    return [float(v) for v in raw.split(",") if v.strip()]


def _int_list(raw: str) -> list[int]:
    return [int(v) for v in raw.split(",") if v.strip()]


def _optional_float(raw: str) -> float | None:
    return None if raw.lower() in ("", "none") else float(raw)


def _wrap(section: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def dgp_from(cp) -> DgpConfig:
    kw = {}
    for key, conv in _DGP_KEYS.items():
        val = _get(cp, "dgp", key, conv)
        if val is not None:
            kw[key] = val
    if "design" in kw and kw["design"] not in {d.value for d in Design}:
        raise ConfigError(f"dgp.design: expected linear or nonlinear, got {kw['design']!r}")
    return _wrap("dgp", DgpConfig, **kw)


def grid_from(cp, dim: int = 1) -> GridSpec:
    if not cp.has_section("grid"):
        return DEFAULT_GRID if dim == 1 else GridSpec((DEFAULT_GRID.axes[0],) * dim)
    lo = _get(cp, "grid", "lower", _float_list, [DEFAULT_GRID.axes[0][0]])
    hi = _get(cp, "grid", "upper", _float_list, [DEFAULT_GRID.axes[0][1]])
    ct = _get(cp, "grid", "count", _int_list, [DEFAULT_GRID.axes[0][2]])
    cols = []
    for name, vals in (("lower", lo), ("upper", hi), ("count", ct)):
        if len(vals) == 1:
            vals = vals * dim
        if len(vals) != dim:
            raise ConfigError(f"grid.{name}: expected 1 or {dim} values, got {len(vals)}")
        cols.append(vals)
    return _wrap("grid", GridSpec, tuple(zip(*cols)))


def parse_variant(token: str) -> Variant:
    token = token.strip()
    kind, _, c = token.partition("@")
    try:
        return Variant(kind.strip(), float(c) if c else None)
    except ValueError as exc:
        raise ConfigError(f"study.variants: {token!r}: {exc}") from None


def study_from(cp) -> StudyConfig:
    if not cp.has_section("study"):
        raise ConfigError("missing section [study]")
    tokens = _get(cp, "study", "variants", lambda r: [t for t in r.split(",") if t.strip()])
    if not tokens:
        raise ConfigError("study.variants: at least one variant is required")
    overrides = {}
    for kind in VARIANT_KINDS:
        flag = _get(cp, "trim", kind, _bool)
        if flag is not None:
            overrides[kind] = flag
    variants = []
    for t in tokens:
        v = parse_variant(t)
        if v.kind in overrides:
            v = Variant(v.kind, v.c, overrides[v.kind])
        variants.append(v)
    return _wrap(
        "study",
        StudyConfig,
        dgp=dgp_from(cp),
        sample_sizes=tuple(_get(cp, "study", "sample_sizes", _int_list, [300, 500, 1000])),
        reps=_get(cp, "study", "reps", int, 1000),
        master_seed=_get(cp, "study", "master_seed", int, 0),
        variants=tuple(variants),
        grid=grid_from(cp),
        trim_bound=_get(cp, "trim", "bound", float, TRIM_BOUND),
        threads=_get(cp, "study", "threads", int, 1),
    )


@dataclass(frozen=True)
class EstimateConfig:
    """Parsed ``estimate`` command configuration.

    ``first_stage is None`` selects the infeasible single-stage estimator,
    with G taken from the [dgp] section.
    """

    first_stage: FirstStageConfig | None
    dgp: DgpConfig
    trim_bound: float | None
    grid_section: bool
    subsampling: bool
    m: int | None
    B: int
    level: float
    seed: int


def estimate_from(cp) -> EstimateConfig:
    method = _get(cp, "first_stage", "method", str, "ols").lower()
    # same default trimming policy as the Monte Carlo variants
    trim = _get(cp, "first_stage", "trim_bound", _optional_float, None if method == "single" else TRIM_BOUND)
    if trim is not None and not trim > 0:
        raise ConfigError("first_stage.trim_bound must be positive or none")
    if method == "single":
        fs = None
    elif method in (Method.OLS.value, Method.KERNEL.value):
        kernel = None
        if method == Method.KERNEL.value:
            fam = _get(cp, "first_stage", "kernel", str, "gaussian2").lower()
            if fam not in {f.value for f in KernelFamily}:
                raise ConfigError(f"first_stage.kernel: expected gaussian2 or multigauss8, got {fam!r}")
            c = _get(cp, "first_stage", "c", float)
            if c is None:
                raise ConfigError("first_stage.c is required for a kernel first stage")
            kernel = _wrap(
                "first_stage",
                KernelSpec.gaussian2 if fam == "gaussian2" else KernelSpec.multigauss8,
                c,
            )
        fs = _wrap("first_stage", FirstStageConfig, Method(method), kernel, trim)
    else:
        raise ConfigError(f"first_stage.method: expected ols, kernel or single, got {method!r}")
    level = _get(cp, "subsampling", "level", float, 0.90)
    if not 0 < level < 1:
        raise ConfigError("subsampling.level must lie in (0, 1)")
    return EstimateConfig(
        first_stage=fs,
        dgp=dgp_from(cp),
        trim_bound=trim,
        grid_section=cp.has_section("grid"),
        subsampling=_get(cp, "subsampling", "enabled", _bool, cp.has_section("subsampling")),
        m=_get(cp, "subsampling", "m", int),
        B=_get(cp, "subsampling", "b", int, 200),
        level=level,
        seed=_get(cp, "subsampling", "seed", int, 0),
    )


def export_from(cp) -> tuple[DgpConfig, int, int]:
    n = _get(cp, "export", "n", int, 1000)
    if n < 1:
        raise ConfigError("export.n must be >= 1")
    return dgp_from(cp), n, _get(cp, "export", "seed", int, 0)
