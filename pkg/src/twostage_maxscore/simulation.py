"""Synthetic data from the binary-choice-under-uncertainty design.

Randomness
----------
Each dataset uses one ``numpy.random.PCG64`` stream. Its uniform draws are
laid out as an (N, 5) array in row-major order, so observation i consumes
five consecutive doubles for (z, x, eta, u1-driver, u0-driver). They are
mapped through inverse CDFs (logistic quantile for z, standard normal
quantile for the rest), which keeps datasets identical on every platform
for a given seed. A zero uniform is replaced by 2**-54.

(u1, u0) are built from two independent standard normals e1, e2 with the
lower-triangular factor of the correlation matrix:
``u1 = s*e1`` and ``u0 = s*(rho*e1 + sqrt(1 - rho**2)*e2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logit, ndtri

from .dataset import Dataset


class Design(str, enum.Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


@dataclass(frozen=True)
class DgpConfig:
    """Parameters of the simulation design; defaults give the standard design.

    ``rho`` is the correlation of (u1, u0), so their covariance is
    ``rho * sigma_u**2``.
    """

    beta1: float = 1.0
    beta2: float = 1.0
    g01: float = 0.2
    g11: float = 0.1
    g00: float = 0.1
    g10: float = 0.4
    rho: float = -0.8
    sigma_u: float = 0.33
    design: Design = Design.LINEAR
    error_scale: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "design", Design(self.design))
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")
        if not self.sigma_u >= 0:
            raise ValueError(f"sigma_u must be nonnegative, got {self.sigma_u}")


def m_function(x, design):
    design = Design(design)
    x = np.asarray(x, dtype=float)
    out = x if design is Design.LINEAR else x * x * np.arctan(x)
    return float(out) if out.ndim == 0 else out


def true_G(x, cfg: DgpConfig):
    """G(x) = g01 - g00 + (g11 - g10) m(x)."""
    return cfg.g01 - cfg.g00 + (cfg.g11 - cfg.g10) * m_function(x, cfg.design)


class Draw(NamedTuple):
    z: np.ndarray
    x: np.ndarray
    eta: np.ndarray
    eps: np.ndarray
    u1: np.ndarray
    u0: np.ndarray
    d: np.ndarray
    y: np.ndarray


def choice(z, x, eps, cfg: DgpConfig) -> np.ndarray:
    return (z * cfg.beta1 + true_G(x, cfg) * cfg.beta2 > eps).astype(np.int8)


def draw_components(cfg: DgpConfig, n: int, seed) -> Draw:
    """All latent and observed variables for n observations."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random((n, 5))
    u = np.where(u == 0.0, 2.0**-54, u)
    z = logit(u[:, 0])
    x = ndtri(u[:, 1])
    eta = ndtri(u[:, 2])
    e1 = ndtri(u[:, 3])
    e2 = ndtri(u[:, 4])

    eps = cfg.error_scale * eta * np.sqrt(1.0 + z * z + x * x)
    u1 = cfg.sigma_u * e1
    u0 = cfg.sigma_u * (cfg.rho * e1 + math.sqrt(1.0 - cfg.rho**2) * e2)
    d = choice(z, x, eps, cfg)
    m = m_function(x, cfg.design)
    y = np.where(d == 1, cfg.g01 + cfg.g11 * m + u1, cfg.g00 + cfg.g10 * m + u0)
    return Draw(z, x, eta, eps, u1, u0, d, y)


def draw_sample(cfg: DgpConfig, n: int, seed) -> Dataset:
    """Draw a dataset with k = p = q = 1. ``seed`` is anything PCG64 accepts."""
    dr = draw_components(cfg, n, seed)
    return Dataset(dr.d, dr.y, dr.z, dr.x)
