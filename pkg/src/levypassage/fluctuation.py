"""Numerical fluctuation theory: kappa(a, 0), ladder records, renewal sums.

kappa uses the local-time normalization c = 1, so for a constant positivity
profile rho the Frullani identity gives kappa(a, 0) = a**rho exactly; that is
the quadrature oracle.  Ladder extraction on discretely monitored paths uses
strict records of the running supremum as the computable stand-in for the
continuous ladder process; only its refinement behaviour is asserted, never
its absolute normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decompose import DecompositionT
from .levymodel import LevyModel
from .rng import PHASE_PATHS, stream
from .simulate import (PathSample, PerturbedPlan, TimeGrid, _gaussian_path,
                       _merge_with_epochs, sample_path)

KAPPA_U_RANGE = 40.0
KAPPA_PANELS = 10_000


@dataclass(frozen=True, eq=False)
class PositivityProfile:
    """Either a constant rho or tabulated MC estimates of P(X(t) >= 0)."""

    rho: float | None = None
    t: np.ndarray | None = None
    p: np.ndarray | None = None
    se: np.ndarray | None = None

    def __post_init__(self):
        if (self.rho is None) == (self.t is None):
            raise ValueError("profile is either constant or tabulated")
        if self.p is not None and (np.any(self.p < 0) or np.any(self.p > 1)):
            raise ValueError("probabilities must lie in [0, 1]")

    @classmethod
    def constant(cls, rho: float) -> "PositivityProfile":
        return cls(rho=rho)

    @classmethod
    def tabulated(cls, t, p, se=None) -> "PositivityProfile":
        t, p = np.asarray(t, float), np.asarray(p, float)
        se = None if se is None else np.asarray(se, float)
        return cls(rho=None, t=t, p=p, se=se)

    def prob(self, t: np.ndarray) -> np.ndarray:
        """P(X(t) >= 0), interpolated in ln t and clamped at the table ends."""
        if self.rho is not None:
            return np.full_like(np.asarray(t, float), self.rho)
        return np.interp(np.log(t), np.log(self.t), self.p)


def kappa(profile: PositivityProfile, a: float, b: float = 0.0) -> float:
    """kappa(a, 0) = exp( int_0^inf (e**-t - e**-at) t**-1 P(X(t) >= 0) dt ).

    Quadrature after t = e**u, trapezoid on u in [-40, 40] with 10^4 panels;
    the integrand decays double-exponentially at both ends.  b > 0 would need
    the joint inverse-local-time / ladder-height marginal and is unsupported.
    """
    if b != 0.0:
        raise ValueError("kappa is only supported for b = 0 in this artifact")
    if not (math.isfinite(a) and a > 0):
        raise ValueError("kappa requires a > 0")
    if a == 1.0:
        return 1.0
    u = np.linspace(-KAPPA_U_RANGE, KAPPA_U_RANGE, KAPPA_PANELS + 1)
    t = np.exp(u)
    with np.errstate(under="ignore"):
        integrand = (np.exp(-t) - np.exp(-a * t)) * profile.prob(t)
    return float(np.exp(np.trapezoid(integrand, u)))


@dataclass(frozen=True, eq=False)
class LadderSample:
    epochs: np.ndarray
    heights: np.ndarray

    def __post_init__(self):
        if self.epochs.shape != self.heights.shape:
            raise ValueError("epochs and heights must have equal length")


def ladder_process(path: PathSample) -> LadderSample:
    """Strict records of the running supremum along the monitored points.

    t = 0 is always a record (the initial supremum 0); later points are
    records iff they exceed every earlier value.
    """
    v = path.values
    rec = np.empty(v.size, dtype=bool)
    rec[0] = True
    if v.size > 1:
        rec[1:] = v[1:] > np.maximum.accumulate(v)[:-1]
    return LadderSample(epochs=path.grid.points[rec], heights=v[rec])


def renewal_estimate(samples, x: float) -> float:
    """MC estimate of V(x): mean number of ladder heights strictly below x."""
    samples = list(samples)
    if not samples:
        raise ValueError("renewal_estimate needs at least one ladder sample")
    return float(np.mean([np.count_nonzero(s.heights < x) for s in samples]))


def spitzer_profile(model: LevyModel, t_grid, n_paths: int, seed: int,
                    phase: int = PHASE_PATHS) -> PositivityProfile:
    """Tabulated MC estimates of P(X(t) >= 0) with binomial standard errors."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be positive and increasing")
    grid = TimeGrid(np.concatenate([[0.0], t_grid]), "geometric")
    plan = None if model.stable is not None else PerturbedPlan.from_model(model)
    counts = np.zeros(t_grid.size, dtype=np.int64)
    for i in range(n_paths):
        path = sample_path(model, grid, stream(seed, i, phase), plan=plan)
        idx = np.searchsorted(path.grid.points, t_grid)
        counts += path.values[idx] >= 0.0
    p = counts / n_paths
    se = np.sqrt(p * (1.0 - p) / n_paths)
    return PositivityProfile.tabulated(t_grid, p, se)


def small_time_positivity(model: LevyModel, t_values=(1e-3, 1e-2),
                          n_paths: int = 20_000, seed: int = 0,
                          margin: float = 1e-3) -> dict[float, tuple[float, bool]]:
    """Diagnostic for limsup_{t->0+} P(X(t) >= 0) < 1; reported, not asserted."""
    prof = spitzer_profile(model, np.asarray(t_values, float), n_paths, seed)
    return {float(t): (float(p), bool(p <= 1.0 - margin))
            for t, p in zip(prof.t, prof.p)}


def renewal_convergence_gaps(model: LevyModel, decomp_by_T: dict[float, DecompositionT],
                             grid: TimeGrid, x: float, n_paths: int,
                             seed: int) -> dict[float, float]:
    """|V_T(x) - V(x)| per T with common seeds and coupled thinning.

    Simulates X once per path and derives each Y_T by thinning with a shared
    per-jump uniform; when the thinning probability decreases with T (always
    true for constant ell) the removed-jump sets are nested across T and the
    gaps shrink monotonically as delta(T) decreases.
    """
    Ts = sorted(decomp_by_T)
    plan = PerturbedPlan.from_model(model)
    count_x = 0.0
    count_y = {T: 0.0 for T in Ts}
    for i in range(n_paths):
        rng = stream(seed, i)
        epochs, signed = plan.draw_jumps(rng, grid.horizon)
        u = rng.uniform(size=epochs.size)
        merged, acc = _merge_with_epochs(grid.points, epochs, signed)
        vx = _gaussian_path(plan, merged, acc, rng)
        count_x += _record_count_below(vx, x)
        for T in Ts:
            d = decomp_by_T[T]
            side = signed < -1.0 if d.side == "negative" else signed > 1.0
            thin = side & (u < d.thinning_probability(np.abs(signed)))
            acc_s = np.zeros(merged.size)
            np.add.at(acc_s, np.searchsorted(merged, epochs[thin]), np.abs(signed[thin]))
            s = np.concatenate([[0.0], np.cumsum(acc_s[1:])])
            vy = vx + s if d.side == "negative" else vx - s
            count_y[T] += _record_count_below(vy, x)
    v_x = count_x / n_paths
    return {T: abs(count_y[T] / n_paths - v_x) for T in Ts}


def _record_count_below(values: np.ndarray, x: float) -> int:
    rec = np.empty(values.size, dtype=bool)
    rec[0] = True
    rec[1:] = values[1:] > np.maximum.accumulate(values)[:-1]
    return int(np.count_nonzero(values[rec] < x))
