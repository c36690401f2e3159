import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critlab.circle import (
    circle_trial,
    count_law,
    gaf_zeros_from_coefficients,
    poisson_binomial_pmf,
    power_sum_coefficients,
    radial_bin_edges,
    sample_gaf_zeros,
)
from critlab.errors import ConfigurationError, DomainError
from critlab.measures import UniformCircle, UniformDisk, sample_roots

from oracles import poisson_binomial_bruteforce


# ---------------------------------------------------------------------------
# Power-sum coefficients
# ---------------------------------------------------------------------------


def _circle_sample(roots):
    s = sample_roots(UniformCircle(1.0), len(roots), 0)
    object.__setattr__(s, "roots", np.asarray(roots, dtype=complex))
    return s


def test_power_sums_single_root_at_one():
    s = _circle_sample([1 + 0j])
    cv = power_sum_coefficients(s, 2)
    assert cv.entries == pytest.approx(np.ones(3))


def test_power_sums_roots_of_unity_character_sums():
    n = 8
    s = _circle_sample(np.exp(2j * np.pi * np.arange(n) / n))
    cv = power_sum_coefficients(s, n)
    # a_{n,r} = 0 unless n divides r+1, where the sum is n/sqrt(n) = sqrt(n)
    for r in range(n + 1):
        if (r + 1) % n == 0:
            assert abs(cv.entries[r] - math.sqrt(n)) < 1e-9
        else:
            assert abs(cv.entries[r]) < 1e-9


def test_power_sums_reject_off_circle_roots():
    s = _circle_sample([0.5 + 0j, 1j])
    with pytest.raises(DomainError):
        power_sum_coefficients(s, 1)


def test_power_sums_bounded_by_sqrt_n():
    for seed in range(5):
        s = sample_roots(UniformCircle(1.0), 200, seed)
        cv = power_sum_coefficients(s, 4)
        assert np.all(np.abs(cv.entries) <= math.sqrt(200) * (1 + 1e-12))


def test_power_sum_component_variance_near_half():
    # E Re(a_{n,1})^2 = E Im(a_{n,1})^2 = 1/2 in the CLT limit
    trials = 400
    n = 2000
    re, im = [], []
    for t in range(trials):
        s = sample_roots(UniformCircle(1.0), n, 50_000 + t)
        cv = power_sum_coefficients(s, 1)
        re.append(cv.entries[1].real)
        im.append(cv.entries[1].imag)
    se = math.sqrt(2.0 / trials) * 0.5  # SE of the sample variance of a normal
    assert abs(np.var(re, ddof=1) - 0.5) < 4 * se
    assert abs(np.var(im, ddof=1) - 0.5) < 4 * se


# ---------------------------------------------------------------------------
# Count law
# ---------------------------------------------------------------------------


def test_count_law_mean_geometric_series():
    law = count_law(0.5)
    assert law.mean == pytest.approx(1.0 / 3.0, abs=1e-7)
    assert law.pmf.sum() == pytest.approx(1.0, abs=1e-12)
    assert all(a > b for a, b in zip(law.means, law.means[1:]))


def test_count_law_probability_of_zero_matches_truncated_product():
    law = count_law(0.5, tail_tol=1e-10)
    product = 1.0
    for k in range(1, len(law.means) + 1):
        product *= 1.0 - 0.25**k
    assert law.pmf[0] == pytest.approx(product, abs=1e-12)


def test_count_law_small_rho_is_point_mass():
    law = count_law(0.05)
    assert law.pmf[0] > 0.99


def test_count_law_validates_rho():
    with pytest.raises(ConfigurationError):
        count_law(1.0)
    with pytest.raises(ConfigurationError):
        count_law(0.0)


def test_poisson_binomial_matches_bruteforce_enumeration():
    probs = [0.3 ** (2 * k) for k in range(1, 9)]
    dp = poisson_binomial_pmf(probs)
    brute = poisson_binomial_bruteforce(probs)
    assert np.max(np.abs(dp - brute)) < 1e-12


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10))
@settings(max_examples=30)
def test_poisson_binomial_dp_property(probs):
    dp = poisson_binomial_pmf(probs)
    brute = poisson_binomial_bruteforce(probs)
    assert np.max(np.abs(dp - brute)) < 1e-12
    assert dp.sum() == pytest.approx(1.0, abs=1e-9)


def test_radial_bin_edges_quantiles():
    edges = radial_bin_edges(0.5, 10)
    assert edges[0] == 0.0 and edges[-1] == pytest.approx(0.5)
    cdf_vals = (edges**2 / (1 - edges**2)) / (0.25 / 0.75)
    assert cdf_vals == pytest.approx(np.linspace(0, 1, 11), abs=1e-12)


# ---------------------------------------------------------------------------
# GAF zeros
# ---------------------------------------------------------------------------


def test_gaf_truncation_degree_minimal():
    g = sample_gaf_zeros(0.5, 1e-8, 1)
    tail = lambda M: 0.5 ** (M + 1) / 0.5
    assert tail(g.M) < 1e-8 <= tail(g.M - 1)


def test_gaf_deterministic_in_seed():
    a = sample_gaf_zeros(0.5, 1e-8, 37)
    b = sample_gaf_zeros(0.5, 1e-8, 37)
    assert np.array_equal(a.coefficients, b.coefficients)
    assert np.array_equal(a.zeros_in_B_rho, b.zeros_in_B_rho)


def test_gaf_zeros_inside_disk():
    for seed in range(30):
        g = sample_gaf_zeros(0.6, 1e-8, seed)
        if len(g.zeros_in_B_rho):
            assert np.max(np.abs(g.zeros_in_B_rho)) < 0.6


def test_gaf_conjugation_symmetry():
    for seed in (3, 11, 19):
        g = sample_gaf_zeros(0.7, 1e-8, seed)
        conj = gaf_zeros_from_coefficients(np.conj(g.coefficients), 0.7)
        a = np.sort_complex(np.conj(g.zeros_in_B_rho))
        b = np.sort_complex(conj.zeros_in_B_rho)
        assert len(a) == len(b)
        if len(a):
            assert np.max(np.abs(a - b)) < 1e-10


def test_gaf_mean_count_matches_law_smoke():
    trials = 300
    counts = [len(sample_gaf_zeros(0.5, 1e-8, 7_000 + t).zeros_in_B_rho) for t in range(trials)]
    counts = np.asarray(counts)
    se = counts.std(ddof=1) / math.sqrt(trials)
    assert abs(counts.mean() - 1.0 / 3.0) < 4 * se + 1e-9


# ---------------------------------------------------------------------------
# Circle trials
# ---------------------------------------------------------------------------


def test_circle_trial_bookkeeping():
    res = circle_trial(40, 0.5, seed=5, k=2)
    assert res.cp_count == 39
    assert res.modulus_hist.sum() == 39
    assert res.N_rho <= 39
    assert len(res.coefficients.entries) == 3
    frag = res.fragment()
    assert frag["n"] == 40 and frag["cp_count"] == 39


def test_circle_trial_gauss_lucas_modulus_bound():
    for seed in range(10):
        res = circle_trial(60, 0.5, seed=seed)
        # histogram is over [0,1]; all critical points land inside
        assert res.modulus_hist.sum() == res.cp_count


def test_circle_outlier_fraction_grows_with_n():
    # Theorem-level behavior at desk scale: critical points pile up near the
    # circle as n grows, so the fraction with modulus > 0.9 increases
    medians = []
    for n in (50, 150, 300):
        fractions = []
        for t in range(30):
            res = circle_trial(n, 0.5, seed=31_000 + 17 * t + n)
            top = res.modulus_hist[-2:].sum()  # bins covering (0.9, 1.0]
            fractions.append(top / res.cp_count)
        medians.append(float(np.median(fractions)))
    assert medians[0] < medians[1] < medians[2]
