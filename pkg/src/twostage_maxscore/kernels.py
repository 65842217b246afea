"""Kernel functions and deterministic bandwidth rules for the first stage.

Two configurations are supported: the second-order Gaussian kernel with
bandwidth ``c * N**(-1/5)`` and an 8th-order kernel built as a signed mixture
of four Gaussians with bandwidth ``c * N**(-19/360)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularSystemError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Every Gaussian term is below 1e-300 past this point.
CUTOFF = 40.0

CONSTRAINT_TOL = 1e-12


class KernelFamily(str, enum.Enum):
    GAUSSIAN2 = "gaussian2"
    MULTIGAUSS8 = "multigauss8"

    @property
    def rate_exponent(self) -> float:
        if self is KernelFamily.GAUSSIAN2:
            return 1.0 / 5.0
        return 19.0 / 360.0


def default_scales() -> tuple[float, ...]:
    """b_s = s**(-1/2) for s = 1..4."""
    return tuple(s**-0.5 for s in range(1, 5))


def solve_eighth_order_coefficients(b) -> tuple[float, ...]:
    """Solve for the mixture weights of the 8th-order Gaussian kernel.

    The constraints ``sum(a) = 1`` and ``sum(a * b**(2l)) = 0`` for
    ``l = 1, 2, 3`` form a Vandermonde system in the nodes ``t_s = b_s**2``.
    Its solution is the vector of Lagrange basis polynomials evaluated at
    zero, ``a_s = prod_{t != s} (0 - t_t) / (t_s - t_t)``.

    Raises
    ------
    SingularSystemError
        If two of the squared scales coincide.
    """
    b = [float(v) for v in b]
    if len(b) != 4:
        raise ValueError(f"expected 4 scales, got {len(b)}")
    if not all(math.isfinite(v) and v > 0 for v in b):
        raise ValueError("kernel scales must be finite and positive")
    nodes = [v * v for v in b]
    a = []
    for s, ts in enumerate(nodes):
        num = 1.0
        den = 1.0
        for t, tt in enumerate(nodes):
            if t == s:
                continue
            if ts == tt:
                raise SingularSystemError(
                    f"duplicate squared scales b[{s}]**2 == b[{t}]**2 == {ts!r}"
                )
            num *= -tt
            den *= ts - tt
        a.append(num / den)
    return tuple(a)


def constraint_residuals(a, b) -> tuple[float, float, float, float]:
    """|sum a - 1|, |sum a b^2|, |sum a b^4|, |sum a b^6|."""
    a = np.asarray(a, dtype=float)
    b2 = np.asarray(b, dtype=float) ** 2
    return (
        abs(math.fsum(a) - 1.0),
        abs(math.fsum(a * b2)),
        abs(math.fsum(a * b2**2)),
        abs(math.fsum(a * b2**3)),
    )


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, mixture constants and bandwidth scale.

    Use :meth:`gaussian2` or :meth:`multigauss8` rather than the raw
    constructor; the latter solves the mixture weights.
    """

    family: KernelFamily
    c: float
    a: tuple[float, ...] = field(default=())
    b: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"bandwidth scale c must be positive, got {self.c!r}")
        if self.family is KernelFamily.MULTIGAUSS8:
            if len(self.a) != 4 or len(self.b) != 4:
                raise ValueError("multigauss8 needs four (a, b) pairs")
            if not all(v > 0 for v in self.b):
                raise ValueError("kernel scales b must be positive")
            worst = max(constraint_residuals(self.a, self.b))
            if worst > CONSTRAINT_TOL:
                raise ValueError(
                    f"kernel coefficients violate moment constraints (residual {worst:.3g})"
                )

    @classmethod
    def gaussian2(cls, c: float) -> KernelSpec:
        return cls(KernelFamily.GAUSSIAN2, float(c))

    @classmethod
    def multigauss8(cls, c: float, b=None) -> KernelSpec:
        b = default_scales() if b is None else tuple(float(v) for v in b)
        return cls(KernelFamily.MULTIGAUSS8, float(c), solve_eighth_order_coefficients(b), b)

    @property
    def rate_exponent(self) -> float:
        return self.family.rate_exponent

    def bandwidth(self, n: int) -> float:
        return bandwidth(self.c, n, self.family)

    def __call__(self, u):
        return eval_kernel(u, self)


def _check_finite(u) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("kernel argument must be finite")
    return arr


def _gaussian2(u: np.ndarray) -> np.ndarray:
    out = _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    return np.where(np.abs(u) > CUTOFF, 0.0, out)


def _multigauss8(u: np.ndarray, a, b) -> np.ndarray:
    u2 = u * u
    out = np.zeros_like(u2)
    for a_s, b_s in zip(a, b):
        out += (a_s / abs(b_s)) * np.exp(-u2 / (2.0 * b_s * b_s))
    return np.where(np.abs(u) > CUTOFF, 0.0, out)


def _as_output(arr: np.ndarray, u):
    return float(arr) if np.ndim(u) == 0 else arr


def eval_gaussian2(u):
    """Standard normal density; accepts scalars or arrays."""
    arr = _check_finite(u)
    return _as_output(_gaussian2(arr), u)


def eval_kernel8(u, spec: KernelSpec):
    """The 8th-order kernel ``sum_s a_s |b_s|^-1 exp(-u^2 / (2 b_s^2))``.

    Unnormalized: it integrates to sqrt(2 pi), which cancels in the
    Nadaraya-Watson ratio. Takes negative values away from the origin.
    """
    if spec.family is not KernelFamily.MULTIGAUSS8:
        raise ValueError("eval_kernel8 requires a multigauss8 KernelSpec")
    arr = _check_finite(u)
    return _as_output(_multigauss8(arr, spec.a, spec.b), u)


def eval_kernel(u, spec: KernelSpec):
    if spec.family is KernelFamily.GAUSSIAN2:
        return eval_gaussian2(u)
    return eval_kernel8(u, spec)


def kernel_values(u: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Unchecked array evaluation used on hot paths."""
    if spec.family is KernelFamily.GAUSSIAN2:
        return _gaussian2(u)
    return _multigauss8(u, spec.a, spec.b)


def bandwidth(c: float, n: int, family) -> float:
    family = KernelFamily(family)
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if not c > 0:
        raise ValueError(f"bandwidth scale must be positive, got {c}")
    return float(c) * float(n) ** (-family.rate_exponent)
