"""T-dependent subordinator split of a heavy-tailed Lévy process.

For a horizon T the jump measure beyond |x| > 1 on the chosen side is thinned
with probability

    delta(T) * ell(delta(T)**(1/alpha) / |x|) / ell(1 / |x|)

into a finite-mass subordinator measure nu_S; the remainder nu_rest keeps the
process law intact: nu_S + nu_rest = nu pointwise.  The "negative" side
removes big negative jumps (X = Y_T - S_T), the "positive" side big positive
ones (X = Y_T + S_T).  The thinning probability must stay <= 1 for nu_rest to
be a measure; that is validated on a log grid at build time and is a genuine
runtime failure mode for strongly varying ell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from .levymodel import LevyModel
from .rvcalc import (QUAD_EPSABS, QUAD_EPSREL, RegVaryingTail,
                     eval_slowly_varying, power_tail_remainder,
                     truncation_point)

NEGATIVE = "negative"   # thin big negative jumps (decreasing-boundary side)
POSITIVE = "positive"   # thin big positive jumps (increasing-boundary side)

VALIDATION_GRID_POINTS = 512
VALIDATION_GRID_HI = 1e6
TABLE_KNOTS = 4096
TABLE_HI = 1e10
MIN_EXPERIMENT_T = 16.0
LAPLACE_REGIME_MAX = 0.1


class InvalidDecompositionError(ValueError):
    """nu_rest went negative: the thinning ratio exceeded 1/delta somewhere."""


def delta(T: float) -> float:
    """delta(T) = min(1 / ln ln T, 1/2); requires T > e so ln ln T > 0."""
    if not (math.isfinite(T) and T > math.e):
        raise ValueError("delta(T) requires T > e")
    return min(1.0 / math.log(math.log(T)), 0.5)


def t0_threshold(T: float, alpha: float, gamma: float, epsilon: float) -> int:
    """floor((ln T)**(3 / (1 - alpha*gamma - epsilon))) for the integer-grid split."""
    ag = alpha * gamma
    if not (ag - epsilon > 0 and ag + epsilon < 1):
        raise ValueError("need 0 < alpha*gamma - epsilon and alpha*gamma + epsilon < 1")
    if T < 1:
        raise ValueError("t0_threshold requires T >= 1")
    return int(math.floor(math.log(T) ** (3.0 / (1.0 - ag - epsilon))))


class JumpTable:
    """Inverse-CDF sampler for a density on [x_lo, inf), log-space interpolated.

    Stores ln(tail mass) on 4096 log-spaced knots; segment masses come from
    vectorized Gauss-Legendre panels and the mass past the last knot from the
    regular-variation tail asymptotic.  Draws landing beyond the last knot
    fall back to the pure power-law inverse.
    """

    _GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)

    def __init__(self, density: Callable[[np.ndarray], np.ndarray], x_lo: float,
                 alpha: float, x_hi: float = TABLE_HI, knots: int = TABLE_KNOTS,
                 breakpoints: tuple[float, ...] = ()):
        pts = np.geomspace(x_lo, x_hi, knots)
        for bp in breakpoints:
            if x_lo < bp < x_hi:
                pts = np.union1d(pts, [bp])
        # Gauss-Legendre in u = ln x per segment
        lo, hi = np.log(pts[:-1]), np.log(pts[1:])
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        u = mid[:, None] + half[:, None] * self._GL_NODES[None, :]
        x = np.exp(u)
        seg = half * np.sum(self._GL_WEIGHTS[None, :] * density(x) * x, axis=1)
        rest = power_tail_remainder(lambda v: density(np.asarray([v]))[0], x_hi)
        mass = np.concatenate([np.cumsum(seg[::-1])[::-1] + rest, [rest]])
        self.alpha = alpha
        self.total_mass = float(mass[0])
        self._ln_x = np.log(pts)
        self._ln_mass = np.log(mass)
        self._ln_rest = math.log(rest)

    def tail_prob(self, x) -> np.ndarray:
        """P(jump > x) under the normalized jump law."""
        lnm = np.interp(np.log(np.asarray(x, float)), self._ln_x, self._ln_mass)
        return np.exp(lnm) / self.total_mass

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n == 0:
            return np.empty(0)
        target = np.log(rng.uniform(size=n) * self.total_mass)
        # ln(mass) decreases in ln(x); np.interp needs increasing xp
        lnx = np.interp(target, self._ln_mass[::-1], self._ln_x[::-1])
        beyond = target < self._ln_rest
        if np.any(beyond):
            lnx[beyond] = self._ln_x[-1] + (self._ln_rest - target[beyond]) / self.alpha
        return np.exp(lnx)


@dataclass(frozen=True)
class DecompositionT:
    """The pair (nu_S, nu_rest) with delta(T), on one side of the origin."""

    T: float
    delta: float
    side: str
    tail: RegVaryingTail | None
    total_mass: float
    table: JumpTable | None

    def thinning_probability(self, x):
        """delta * ell(delta**(1/alpha)/x) / ell(1/x) at magnitude x > 1."""
        if self.tail is None:
            return np.zeros_like(np.asarray(x, float))
        a = self.tail.alpha
        num = eval_slowly_varying(self.tail.ell, self.delta ** (1.0 / a) / np.asarray(x, float))
        den = eval_slowly_varying(self.tail.ell, 1.0 / np.asarray(x, float))
        return self.delta * num / den

    def nu_S(self, x):
        """Subordinator jump density at magnitude x (zero for x <= 1)."""
        arr = np.asarray(x, dtype=float)
        out = np.where(arr > 1.0,
                       self.thinning_probability(arr) * self._tail_density(arr), 0.0)
        return float(out) if arr.ndim == 0 else out

    def nu_rest(self, x):
        """Remainder density at magnitude x on the decomposed side."""
        arr = np.asarray(x, dtype=float)
        keep = np.where(arr > 1.0, 1.0 - self.thinning_probability(arr), 1.0)
        out = keep * self._tail_density(arr)
        return float(out) if arr.ndim == 0 else out

    def _tail_density(self, x):
        if self.tail is None:
            return np.zeros_like(np.asarray(x, float))
        return self.tail.density(x)

    @classmethod
    def empty(cls, side: str = NEGATIVE, T: float = 100.0) -> "DecompositionT":
        """Degenerate split with S_T identically zero (tests and edge cases)."""
        return cls(T=T, delta=delta(T), side=side, tail=None,
                   total_mass=0.0, table=None)


def build_decomposition(model: LevyModel, T: float, side: str) -> DecompositionT:
    """Construct nu_S / nu_rest for the given side, validating nu_rest >= 0."""
    if side not in (NEGATIVE, POSITIVE):
        raise ValueError(f"side must be {NEGATIVE!r} or {POSITIVE!r}")
    if T < MIN_EXPERIMENT_T:
        raise ValueError(f"decomposition experiments require T >= {MIN_EXPERIMENT_T}")
    tail = model.tail_left if side == NEGATIVE else model.tail_right
    if tail is None:
        raise ValueError(f"model lacks the {'left' if side == NEGATIVE else 'right'} "
                         f"tail needed for the {side} side")
    d = delta(T)
    a = tail.alpha

    def thin(x):
        num = eval_slowly_varying(tail.ell, d ** (1.0 / a) / x)
        den = eval_slowly_varying(tail.ell, 1.0 / x)
        return d * num / den

    grid = np.union1d(np.geomspace(1.0, VALIDATION_GRID_HI, VALIDATION_GRID_POINTS), [1.0])
    probs = thin(grid)
    bad = np.nonzero(probs > 1.0 + 1e-12)[0]
    if bad.size:
        x_bad = grid[bad[0]]
        raise InvalidDecompositionError(
            f"nu_rest < 0 at x = {x_bad:.6g}: thinning probability {probs[bad[0]]:.6g} > 1")

    def nu_s_density(x):
        return thin(x) * tail.density(x)

    hi = truncation_point(tail, 1.0)
    total, _ = integrate.quad(
        lambda v: float(nu_s_density(np.asarray(math.exp(v)))) * math.exp(v),
        0.0, math.log(hi), epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
    total += power_tail_remainder(lambda v: float(nu_s_density(np.asarray(v))), hi)
    table = JumpTable(nu_s_density, x_lo=1.0, alpha=a)
    return DecompositionT(T=T, delta=d, side=side, tail=tail,
                          total_mass=total, table=table)


class LaplaceBound(NamedTuple):
    value: float
    lam: float
    in_regime: bool


def laplace_bound(decomp: DecompositionT, lam: float) -> LaplaceBound:
    """exp(-(1/(4*alpha)) * delta * lam**alpha * ell(lam * delta**(1/alpha))).

    Upper bound for E exp(-lam * S_T(1)), valid in the small-lam Karamata
    regime; lam > 0.1 flags the result as out of regime instead of raising.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if decomp.tail is None:
        return LaplaceBound(1.0, lam, lam <= LAPLACE_REGIME_MAX)
    a = decomp.tail.alpha
    ell_val = eval_slowly_varying(decomp.tail.ell, lam * decomp.delta ** (1.0 / a))
    value = math.exp(-decomp.delta * lam ** a * ell_val / (4.0 * a))
    return LaplaceBound(value, lam, lam <= LAPLACE_REGIME_MAX)
