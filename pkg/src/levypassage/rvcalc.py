"""Slowly varying functions and regularly varying Lévy-measure tails.

Two concrete slowly-varying-at-zero families are supported:

* ``constant``:  ell(x) = c,  c > 0
* ``log-power``: ell(x) = (ln(e + 1/x))**p

A regularly varying tail is the jump density |x|**(-alpha-1) * ell(1/|x|) on
one side of the origin, written in the magnitude coordinate x > 0.  Tail
masses are integrated adaptively; the integrand is truncated where it has
dropped below 1e-16 of its value at the left endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8
TAIL_DROP = 1e-16

CONSTANT = "constant"
LOG_POWER = "log-power"


@dataclass(frozen=True)
class SlowlyVaryingSpec:
    """One member of the supported slowly-varying-at-zero families."""

    family: str
    c: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        if self.family not in (CONSTANT, LOG_POWER):
            raise ValueError(f"unknown slowly varying family {self.family!r}")
        if self.family == CONSTANT and not (math.isfinite(self.c) and self.c > 0):
            raise ValueError("constant family requires c > 0")
        if self.family == LOG_POWER and not math.isfinite(self.p):
            raise ValueError("log-power family requires finite p")

    @property
    def is_constant(self) -> bool:
        return self.family == CONSTANT


def eval_slowly_varying(spec: SlowlyVaryingSpec, x):
    """Evaluate ell(x) for x > 0.  Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("eval_slowly_varying requires finite x > 0")
    if spec.family == CONSTANT:
        out = np.full_like(arr, spec.c)
    else:
        out = np.log(np.e + 1.0 / arr) ** spec.p
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


@dataclass(frozen=True)
class RegVaryingTail:
    """One-sided jump density x**(-alpha-1) * ell(1/x), x > 0 in magnitude."""

    alpha: float
    ell: SlowlyVaryingSpec
    side: str  # "left" or "right"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"tail side must be 'left' or 'right', got {self.side!r}")
        if not (0.0 < self.alpha < 2.0):
            raise ValueError("tail index alpha must lie in (0, 2)")

    def density(self, x):
        """Jump density at magnitude x > 0."""
        arr = np.asarray(x, dtype=float)
        out = arr ** (-self.alpha - 1.0) * eval_slowly_varying(self.ell, 1.0 / arr)
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def truncation_point(tail: RegVaryingTail, x: float, drop: float = TAIL_DROP) -> float:
    """Upper cutoff where the tail density falls below `drop` of its value at x."""
    target = tail.density(x) * drop
    # pure power-law guess, then expand for slowly varying corrections
    hi = x * drop ** (-1.0 / (tail.alpha + 1.0))
    while tail.density(hi) > target:
        hi *= 10.0
    return hi


def power_tail_remainder(density, x: float) -> float:
    """int_x^inf of a regularly varying density, from its local log-log slope.

    Locally density ~ C * u**s with s = d ln g / d ln u measured at x, so the
    remainder is g(x) * x / (-(s + 1)); exact for pure power laws, accurate
    to second order in the slowly varying drift otherwise.
    """
    g0, g1 = float(density(x)), float(density(2.0 * x))
    if g0 <= 0.0:
        return 0.0
    s = math.log(g1 / g0) / math.log(2.0)
    if s >= -1.0:
        raise ValueError("density does not decay fast enough for a tail remainder")
    return g0 * x / (-(s + 1.0))


def tail_mass(tail: RegVaryingTail, x: float) -> float:
    """nu_+(x) or nu_-(x): integrated density from x to infinity, x > 0."""
    if not (math.isfinite(x) and x > 0):
        raise ValueError("tail_mass requires finite x > 0")
    if tail.alpha <= 0:
        raise ValueError("tail mass diverges for alpha <= 0")
    if tail.ell.is_constant:
        return tail.ell.c * x ** (-tail.alpha) / tail.alpha
    # integrate in v = ln u where the integrand decays exponentially, then
    # complete the truncated tail with its regular-variation asymptotic
    hi = truncation_point(tail, x)
    val, _ = integrate.quad(lambda v: tail.density(math.exp(v)) * math.exp(v),
                            math.log(x), math.log(hi),
                            epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
    return val + power_tail_remainder(tail.density, hi)


def potter_lambda0(spec: SlowlyVaryingSpec, epsilon: float,
                   lam_hi: float = 0.1, lam_lo: float = 1e-8,
                   per_decade: int = 16) -> float | None:
    """Largest grid point lam0 with ell(lam) >= lam**epsilon for all lam < lam0.

    Scans a geometric grid from lam_hi down to lam_lo.  Returns None if the
    bound fails even at the bottom of the grid.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = int(math.ceil(per_decade * math.log10(lam_hi / lam_lo))) + 1
    grid = np.geomspace(lam_lo, lam_hi, n)
    ok = eval_slowly_varying(spec, grid) >= grid ** epsilon
    if not ok[0]:
        return None
    bad = np.nonzero(~ok)[0]
    return float(grid[bad[0]]) if bad.size else float(lam_hi)


def slow_variation_threshold(spec: SlowlyVaryingSpec, lam: float,
                             tol: float = 0.01, x_hi: float = 1.0,
                             x_lo: float = 1e-280, per_decade: int = 2) -> float | None:
    """Largest grid x0 with |ell(lam*x)/ell(x) - 1| < tol for all grid x < x0.

    Log-power ratios converge like p*ln(lam)/ln(1/x), so for a 1% tolerance
    x0 sits around exp(-100*p*ln lam): astronomically small, hence the very
    deep default grid floor.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    n = int(math.ceil(per_decade * math.log10(x_hi / x_lo))) + 1
    grid = np.geomspace(x_lo, x_hi, n)
    ratio = eval_slowly_varying(spec, lam * grid) / eval_slowly_varying(spec, grid)
    ok = np.abs(ratio - 1.0) < tol
    if not ok[0]:
        return None
    bad = np.nonzero(~ok)[0]
    return float(grid[bad[0]]) if bad.size else float(x_hi)
