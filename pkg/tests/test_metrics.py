import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critlab.errors import ConfigurationError, PoleError
from critlab.measures import UniformCircle, UniformDisk, sample_roots
from critlab.metrics import (
    DiscreteMeasure,
    _feasible_exact,
    _feasible_int,
    empirical_potential,
    ks_statistic,
    lower_modulus,
    min_gap_statistic,
    pairing_report,
    prohorov_distance,
)
from critlab.polyroots import RootPolynomial, critical_points
from scipy.spatial import cKDTree

from oracles import kolmogorov_sup_distance, prohorov_bruteforce

# hypothesis strategy: small discrete measures with moderate coordinates
_atom = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def small_measures(max_atoms=4):
    return st.lists(
        st.tuples(_atom, st.floats(0.05, 1.0)), min_size=1, max_size=max_atoms
    ).map(
        lambda aw: DiscreteMeasure(
            np.array([a for a, _ in aw]),
            np.array([w for _, w in aw]) / sum(w for _, w in aw),
        )
    )


# ---------------------------------------------------------------------------
# DiscreteMeasure
# ---------------------------------------------------------------------------


def test_discrete_measure_validation():
    with pytest.raises(ConfigurationError):
        DiscreteMeasure(np.array([0j]), np.array([0.5]))
    with pytest.raises(ConfigurationError):
        DiscreteMeasure(np.array([0j, 1j]), np.array([0.5, -0.5]))


def test_discrete_measure_merges_duplicates():
    m = DiscreteMeasure(np.array([0j, 0j, 1j]), np.array([0.25, 0.25, 0.5]))
    assert len(m.atoms) == 2
    assert m.weights[m.atoms == 0j][0] == pytest.approx(0.5)


def test_discrete_measure_csv_roundtrip(tmp_path):
    m = DiscreteMeasure(np.array([0.1 + 0.2j, -3j]), np.array([0.25, 0.75]))
    path = tmp_path / "m.csv"
    m.to_csv(path)
    back = DiscreteMeasure.from_csv(path)
    assert np.array_equal(back.atoms, m.atoms)
    assert back.weights == pytest.approx(m.weights)


# ---------------------------------------------------------------------------
# Prohorov distance
# ---------------------------------------------------------------------------


def test_prohorov_identical_measures():
    m = DiscreteMeasure.from_points([0j, 1j, 1 + 1j])
    assert prohorov_distance(m, m, 1e-9) == 0.0


def test_prohorov_two_deltas():
    d0 = DiscreteMeasure.from_points([0j])
    assert prohorov_distance(d0, DiscreteMeasure.from_points([0.3 + 0j]), 1e-9) == pytest.approx(
        0.3, abs=2e-9
    )
    assert prohorov_distance(d0, DiscreteMeasure.from_points([7 + 0j]), 1e-9) == pytest.approx(
        1.0, abs=2e-9
    )


def test_prohorov_matches_bruteforce_on_two_atom_measures():
    rng = np.random.default_rng(42)
    for _ in range(25):
        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        wa = rng.dirichlet([1, 1])
        wb = rng.dirichlet([1, 1])
        mu = DiscreteMeasure(a, wa)
        nu = DiscreteMeasure(b, wb)
        got = prohorov_distance(mu, nu, 1e-9)
        want = prohorov_bruteforce(mu.atoms, mu.weights, nu.atoms, nu.weights)
        assert got == pytest.approx(want, abs=1e-8)


@given(small_measures(), small_measures())
@settings(max_examples=30)
def test_prohorov_symmetry_and_bounds(mu, nu):
    d = prohorov_distance(mu, nu, 1e-6)
    assert 0.0 <= d <= 1.0
    assert d == prohorov_distance(nu, mu, 1e-6)  # exactly symmetric


@given(small_measures())
@settings(max_examples=20)
def test_prohorov_identity_of_indiscernibles(mu):
    assert prohorov_distance(mu, mu, 1e-6) == 0.0


def test_prohorov_triangle_inequality_on_random_triples():
    rng = np.random.default_rng(777)
    tol = 1e-6
    for _ in range(100):
        ms = []
        for _ in range(3):
            k = rng.integers(1, 4)
            atoms = rng.standard_normal(k) + 1j * rng.standard_normal(k)
            w = rng.dirichlet(np.ones(k))
            ms.append(DiscreteMeasure(atoms, w))
        dab = prohorov_distance(ms[0], ms[1], tol)
        dbc = prohorov_distance(ms[1], ms[2], tol)
        dac = prohorov_distance(ms[0], ms[2], tol)
        assert dac <= dab + dbc + 2 * tol


def test_prohorov_exact_and_integer_flow_paths_agree():
    rng = np.random.default_rng(5)
    atoms_a = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    atoms_b = rng.standard_normal(11) + 1j * rng.standard_normal(11)
    mu = DiscreteMeasure(atoms_a, rng.dirichlet(np.ones(10)))
    nu = DiscreteMeasure(atoms_b, rng.dirichlet(np.ones(11)))
    tree_mu = cKDTree(np.column_stack([mu.atoms.real, mu.atoms.imag]))
    tree_nu = cKDTree(np.column_stack([nu.atoms.real, nu.atoms.imag]))
    for eps in np.linspace(0.05, 1.5, 12):
        exact = _feasible_exact(mu, nu, float(eps))
        integer = _feasible_int(mu, nu, float(eps), tree_mu, tree_nu)
        assert exact == integer


def test_prohorov_large_supports_run_through_flow_solver():
    rng = np.random.default_rng(123)
    mu = DiscreteMeasure.from_points(rng.standard_normal(300) + 1j * rng.standard_normal(300))
    nu = DiscreteMeasure.from_points(rng.standard_normal(400) + 1j * rng.standard_normal(400))
    d = prohorov_distance(mu, nu, 1e-2)
    assert 0.0 < d < 1.0


# ---------------------------------------------------------------------------
# KS statistic
# ---------------------------------------------------------------------------


def test_ks_single_point():
    assert ks_statistic([0.5], lambda x: min(1.0, max(0.0, x))) == pytest.approx(0.5)


def test_ks_regular_grid():
    n = 100
    sample = [(k + 1) / n for k in range(n)]
    assert ks_statistic(sample, lambda x: min(1.0, max(0.0, x))) == pytest.approx(1.0 / n)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=60))
@settings(max_examples=40)
def test_ks_in_unit_interval_and_permutation_invariant(sample):
    cdf = lambda x: np.clip(x, 0.0, 1.0)
    d = ks_statistic(sample, cdf)
    assert 0.0 <= d <= 1.0
    assert d == ks_statistic(list(reversed(sample)), cdf)
    assert d == pytest.approx(kolmogorov_sup_distance(sample, lambda x: min(1.0, max(0.0, x))))


def test_ks_kolmogorov_calibration():
    # P(sqrt(n) D_n <= 1.36) ~ 0.949 asymptotically; over 200 pinned seeds
    # the empirical frequency stays well inside [0.88, 0.99]
    n = 10**4
    hits = 0
    reps = 200
    for seed in range(reps):
        rng = np.random.default_rng(900_000 + seed)
        sample = rng.random(n)
        d = ks_statistic(sample, lambda x: np.clip(x, 0.0, 1.0))
        hits += d < 1.36 / math.sqrt(n)
    assert 0.88 <= hits / reps <= 0.99


# ---------------------------------------------------------------------------
# Empirical potential
# ---------------------------------------------------------------------------


def test_empirical_potential_symmetric_pair():
    s = sample_roots(UniformDisk(1.0), 4, 0)
    object.__setattr__(s, "roots", np.array([1 + 0j, -1 + 0j]))
    assert empirical_potential(s, 0j) == 0j


def test_empirical_potential_far_field_close_to_inverse():
    s = sample_roots(UniformDisk(1.0), 200, 31)
    z = 10.0 * np.max(np.abs(s.roots))
    v = empirical_potential(s, z)
    assert abs(v - 1.0 / z) < 0.2 * abs(1.0 / z)


def test_empirical_potential_concentrates_at_disk_value():
    s = sample_roots(UniformDisk(1.0), 10**4, 71)
    z = 2.0 + 0j
    terms = 1.0 / (z - s.roots)
    se = math.sqrt(terms.real.var(ddof=1) + terms.imag.var(ddof=1)) / math.sqrt(s.n)
    assert abs(empirical_potential(s, z) - 0.5) < 5 * se


def test_empirical_potential_matches_log_derivative():
    from critlab.polyroots import eval_log_derivative

    s = sample_roots(UniformDisk(1.0), 50, 3)
    z = 1.7 - 0.4j
    lhs = empirical_potential(s, z) * s.n
    rhs = eval_log_derivative(RootPolynomial(s.roots, 53), z)
    assert abs(lhs - rhs) < 2.0 ** (-53 / 2)
    rhs256 = eval_log_derivative(RootPolynomial(s.roots, 256), z)
    assert abs(lhs - rhs256) < 2.0 ** (-53 / 2)


def test_empirical_potential_pole_error():
    s = sample_roots(UniformDisk(1.0), 5, 1)
    with pytest.raises(PoleError):
        empirical_potential(s, complex(s.roots[2]))


# ---------------------------------------------------------------------------
# Lower modulus
# ---------------------------------------------------------------------------


def test_lower_modulus_vanishes_by_symmetry():
    s = sample_roots(UniformDisk(1.0), 2, 0)
    object.__setattr__(s, "roots", np.array([1 + 0j, -1 + 0j]))
    lm = lower_modulus(s, 0j, 0.1)
    assert lm.value == pytest.approx(0.0, abs=1e-15)


def test_lower_modulus_pole_inside_gives_zero():
    s = sample_roots(UniformDisk(1.0), 10, 5)
    lm = lower_modulus(s, complex(s.roots[0]), 1.0)
    assert lm.value == 0.0
    assert not lm.grid_approximate or lm.value == 0.0


def test_lower_modulus_concentrates_at_disk_potential():
    # V_disk(z) = conj(z) inside, so the lower modulus near a fresh center
    # concentrates at |center|
    vals = []
    centers = []
    for seed in range(5):
        s = sample_roots(UniformDisk(1.0), 500, 100 + seed)
        center = sample_roots(UniformDisk(1.0), 1, 999 + seed).roots[0]
        lm = lower_modulus(s, center, 1.0)
        vals.append(lm.value)
        centers.append(abs(center))
    err = np.abs(np.array(vals) - np.array(centers))
    assert np.median(err) < 0.25


# ---------------------------------------------------------------------------
# Pairing report
# ---------------------------------------------------------------------------


def test_pairing_symmetric_pair_all_unmatched():
    s = sample_roots(UniformDisk(1.0), 2, 0)
    object.__setattr__(s, "roots", np.array([1 + 0j, -1 + 0j]))
    cps = critical_points(RootPolynomial(s.roots))
    rep = pairing_report(s, cps, 0.1)
    assert (rep.matched, rep.crowded, rep.unmatched) == (0, 0, 2)


def test_pairing_roots_of_unity_all_unmatched():
    roots = np.exp(2j * np.pi * np.arange(10) / 10)
    s = sample_roots(UniformCircle(1.0), 10, 0)
    object.__setattr__(s, "roots", roots)
    cps = critical_points(RootPolynomial(roots))
    rep = pairing_report(s, cps, 1.0)
    # spacing 2 sin(pi/10) ~ 0.618 > 2/10, no critical point within 0.1 of a root
    assert (rep.matched, rep.crowded, rep.unmatched) == (0, 0, 10)


def test_pairing_atomic_multiplicities_match():
    from critlab.measures import Atomic

    s = sample_roots(Atomic(((1 + 0j, 0.5), (-1 + 0j, 0.5))), 50, 99)
    cps = critical_points(RootPolynomial(s.roots))
    rep = pairing_report(s, cps, 1.0)
    assert rep.matched == 50
    assert rep.crowded == 0 and rep.unmatched == 0


@given(st.integers(0, 2**32), st.integers(3, 30))
@settings(max_examples=15)
def test_pairing_partitions_n(seed, n):
    s = sample_roots(UniformDisk(1.0), n, seed)
    cps = critical_points(RootPolynomial(s.roots))
    rep = pairing_report(s, cps, 1.0)
    assert rep.matched + rep.crowded + rep.unmatched == n


def test_pairing_mechanism_validates_at_larger_radius():
    # the Rouche pairing needs |V(X)| > 1/C; for the disk that means most
    # roots pair once C exceeds ~2, and decrowding improves it with n
    fractions = {}
    for n in (100, 500):
        s = sample_roots(UniformDisk(1.0), n, 2024)
        cps = critical_points(RootPolynomial(s.roots))
        rep = pairing_report(s, cps, 4.0)
        fractions[n] = rep.matched / n
    assert fractions[100] >= 0.3
    assert fractions[500] >= 0.5
    assert fractions[500] > fractions[100]


# ---------------------------------------------------------------------------
# Minimum gap
# ---------------------------------------------------------------------------


def test_min_gap_simple():
    s = sample_roots(UniformDisk(1.0), 3, 0)
    object.__setattr__(s, "roots", np.array([0j, 3 + 0j, 1 + 0j]))
    assert min_gap_statistic(s) == pytest.approx(1.0)


def test_min_gap_roots_of_unity():
    n = 16
    roots = np.exp(2j * np.pi * np.arange(1, n + 1) / n)  # last point is 1
    s = sample_roots(UniformCircle(1.0), n, 0)
    object.__setattr__(s, "roots", roots)
    assert min_gap_statistic(s) == pytest.approx(2 * math.sin(math.pi / n))


def test_min_gap_small_ball_probability_decreases():
    # P(min_j |X_j - X_n| <= C/n) -> 0 for finite-energy measures
    C = 1.0
    fractions = []
    for n in (20, 320):
        hits = 0
        trials = 400
        for t in range(trials):
            s = sample_roots(UniformDisk(1.0), n, 10_000 * n + t)
            hits += min_gap_statistic(s) <= C / n
        fractions.append(hits / trials)
    assert fractions[1] < fractions[0]
