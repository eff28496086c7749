import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from levypassage.rng import stream
from levypassage.stable import (StableParams, norming_function,
                                positivity_parameter, sample_stable,
                                subordinator_unit_scale)

# two-sample KS critical value at the 1% level: c(0.01) * sqrt(2/n)
KS_CRIT_1PCT = 1.628


def ks_threshold(n: int, m: int | None = None) -> float:
    m = m or n
    return KS_CRIT_1PCT * math.sqrt((n + m) / (n * m))


def test_params_validation():
    with pytest.raises(ValueError):
        StableParams(2.0, 0.0)
    with pytest.raises(ValueError):
        StableParams(0.5, 1.5)
    with pytest.raises(ValueError):
        StableParams(0.5, 0.0, -1.0)
    with pytest.raises(ValueError):
        sample_stable(StableParams(0.5, 0.0), 0, stream(0, 0))


def test_cauchy_symmetry_and_cdf():
    z = sample_stable(StableParams(1.0, 0.0), 10 ** 6, stream(42, 0))
    assert np.mean(z <= 0.0) == pytest.approx(0.5, abs=0.002)
    # Cauchy CDF at 1 is 1/2 + arctan(1)/pi = 3/4
    assert np.mean(z <= 1.0) == pytest.approx(0.75, abs=0.002)


def test_cauchy_skew_unsupported():
    with pytest.raises(ValueError):
        sample_stable(StableParams(1.0, 0.5), 10, stream(0, 0))
    with pytest.raises(ValueError):
        positivity_parameter(StableParams(1.0, -0.3))


def test_one_sided_draws_strictly_positive():
    z = sample_stable(StableParams(0.5, 1.0), 10 ** 5, stream(7, 0))
    assert np.all(z > 0)


def test_subordinator_laplace_normalization():
    # unit scale: E exp(-Z) = exp(-1)
    alpha = 0.5
    params = StableParams(alpha, 1.0, subordinator_unit_scale(alpha))
    z = sample_stable(params, 10 ** 6, stream(1, 0))
    assert np.mean(np.exp(-z)) == pytest.approx(math.exp(-1.0), abs=3e-3)


def test_positivity_parameter_closed_forms():
    assert positivity_parameter(StableParams(0.7, 0.0)) == 0.5
    assert positivity_parameter(StableParams(0.5, 1.0)) == pytest.approx(1.0, abs=1e-15)
    assert positivity_parameter(StableParams(1.0, 0.0)) == 0.5


def test_positivity_parameter_against_sampler():
    params = StableParams(0.7, 0.5)
    rho = positivity_parameter(params)
    n = 10 ** 6
    freq = np.mean(sample_stable(params, n, stream(3, 0)) > 0)
    assert abs(freq - rho) < 3.0 * math.sqrt(rho * (1 - rho) / n)


@given(st.floats(0.05, 1.95).filter(lambda a: abs(a - 1.0) > 1e-6),
       st.floats(-1.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_positivity_reflection_identity(alpha, beta):
    p1 = positivity_parameter(StableParams(alpha, beta))
    p2 = positivity_parameter(StableParams(alpha, -beta))
    assert p1 + p2 == pytest.approx(1.0, abs=1e-15)


def test_norming_function():
    class M:
        alpha, scale = 0.5, 1.0
    assert norming_function(M, 4.0) == pytest.approx(16.0, rel=1e-15)
    M.alpha, M.scale = 1.0, 2.0
    assert norming_function(M, 3.0) == pytest.approx(6.0, rel=1e-15)
    with pytest.raises(ValueError):
        norming_function(M, 0.0)


@pytest.mark.parametrize("c", [2.0, 8.0])
def test_self_similarity_ks(c):
    # Z(ct)/c**(1/alpha) should match Z(t) in law
    params = StableParams(0.7, 0.0)
    n = 10 ** 5
    z1 = (c * 1.0) ** (1 / 0.7) * sample_stable(params, n, stream(5, 0))
    z2 = 1.0 ** (1 / 0.7) * sample_stable(params, n, stream(5, 1))
    stat = ks_2samp(z1 / c ** (1 / 0.7), z2).statistic
    assert stat < ks_threshold(n)


def test_norming_check_at_large_t():
    # X(t)/c(t) vs Z(1) for exact stable increments, t = 1024
    params = StableParams(0.7, 0.0)
    n = 10 ** 5
    t = 1024.0
    xt = t ** (1 / 0.7) * sample_stable(params, n, stream(9, 0))
    z = sample_stable(params, n, stream(9, 1))

    class M:
        alpha, scale = 0.7, 1.0

    stat = ks_2samp(xt / norming_function(M, t), z).statistic
    assert stat < 0.02


def test_streams_are_reproducible_and_distinct():
    params = StableParams(0.7, 0.0)
    a = sample_stable(params, 64, stream(123, 5))
    b = sample_stable(params, 64, stream(123, 5))
    c = sample_stable(params, 64, stream(123, 6))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
