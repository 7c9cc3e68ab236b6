import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewlab.groups import FiniteGroup, FreeGroup, GroupExtendedSystem, HomCandidate, LatticeGroup, SymbolMap
from skewlab.potentials import LocallyConstantPotential, potential_from_symbol_weights
from skewlab.recurrence import (TiltedFamily, UnboundedTilt, classify_series, fit_homomorphism, positive_recurrence_dichotomy,
                                pressure_gap, product_structure_check, recurrence_diagnose, skew_transfer,
                                symmetric_on_average, tilted_pressure_check)
from skewlab.shift import MarkovShift, sigma_free
from skewlab.suite import cyclic_extension, signed_walk, walk_system
from skewlab.transfer import (PartitionSeries, base_pressure, build_transfer, partition_Z, partition_Z_star,
                              perron_eigen, skew_partition_Z)

from conftest import rational_weights

FULL2 = MarkovShift.full(2)
THREE = MarkovShift.from_rows(["110", "011", "111"])
LOG2, LOG4, LOG5 = math.log(2), math.log(4), math.log(5)


def zero(shift):
    return LocallyConstantPotential.zero(shift)


def skew_series(system, phi, N):
    return skew_partition_Z(system, phi, 0, N), skew_partition_Z(system, phi, 0, N, star=True)


# series classification


def test_classify_series_reference_tails():
    n = np.arange(1, 41, dtype=float)
    assert classify_series(n ** -0.5).verdict == "divergent"
    assert classify_series(np.ones(40)).verdict == "divergent"
    assert classify_series(n ** -2.0).verdict == "convergent"
    assert classify_series(0.5 ** n).verdict == "convergent"
    grow = classify_series(1.5 ** n)
    assert grow.verdict == "inconclusive" and "geometric" in grow.reason
    assert classify_series([0, 0, 1]).verdict == "inconclusive"


# recurrence_diagnose


def test_recurrence_base_shift_is_positive():
    phi = potential_from_symbol_weights(THREE, [Fraction(1), Fraction(2), Fraction(1, 2)])
    P = base_pressure(THREE, phi)
    rep = recurrence_diagnose(partition_Z(THREE, phi, 0, 40), partition_Z_star(THREE, phi, 0, 40), P)
    assert rep.verdict == "recurrent-divergent" and rep.sub_verdict == "positive"
    # linear growth: discounted terms tend to a positive constant
    increments = np.diff(rep.partial_sums)
    assert increments[-1] == pytest.approx(increments[-2], rel=1e-6) and increments[-1] > 0.1


def test_recurrence_simple_walk_on_Z_is_null():
    system, phi = signed_walk([1, 1])
    rep = recurrence_diagnose(*skew_series(system, phi, 40), LOG2)
    assert rep.verdict == "recurrent-divergent" and rep.sub_verdict == "null"
    assert rep.main.beta == pytest.approx(0.5, abs=0.05)
    assert all(b >= a for a, b in zip(rep.partial_sums, rep.partial_sums[1:]))


def test_recurrence_simple_walk_on_Z3_is_transient():
    system = walk_system(3)
    rep = recurrence_diagnose(*skew_series(system, zero(system.shift), 24), math.log(6))
    assert rep.verdict == "transient-converged"
    assert rep.main.beta == pytest.approx(1.5, abs=0.1)


def test_recurrence_rejects_mismatched_series():
    system, phi = signed_walk([1, 1])
    Z, Zs = skew_series(system, phi, 10)
    with pytest.raises(ValueError):
        recurrence_diagnose(Z, skew_partition_Z(system, phi, 1, 10, star=True), LOG2)
    with pytest.raises(ValueError):
        recurrence_diagnose(Z, skew_partition_Z(system, phi, 0, 8, star=True), LOG2)


@given(st.lists(st.floats(0, 10), min_size=5, max_size=30), st.floats(0, 2))
@settings(max_examples=50)
def test_partial_sums_nondecreasing(values, P):
    Z = PartitionSeries("base", 0, values)
    rep = recurrence_diagnose(Z, PartitionSeries("base-star", 0, values), P)
    assert all(b >= a for a, b in zip(rep.partial_sums, rep.partial_sums[1:]))
    assert all(b >= a for a, b in zip(rep.weighted_star_sums, rep.weighted_star_sums[1:]))


# fitting


def test_fit_examples():
    system, phi = signed_walk([1, 1])
    fit = fit_homomorphism(system, phi)
    assert fit.converged and abs(fit.theta.values[0] - 1) < 1e-12 and abs(fit.drift[0]) < 1e-10
    system, phi = signed_walk([1, 4])
    fit = fit_homomorphism(system, phi)
    assert fit.converged
    assert float(fit.theta.values[0]) == pytest.approx(0.5, abs=1e-9)
    assert fit.fitted_pressure == pytest.approx(LOG4, abs=1e-10)
    system = walk_system(2)
    fit = fit_homomorphism(system, zero(system.shift))
    assert np.allclose([float(v) for v in fit.theta.values], 1) and fit.fitted_pressure == pytest.approx(LOG4)


def test_fit_finite_group_is_trivial():
    system = cyclic_extension(3, (1, 2))
    phi = potential_from_symbol_weights(FULL2, [2, 3])
    fit = fit_homomorphism(system, phi)
    assert fit.iterations == 0 and fit.fitted_pressure == pytest.approx(LOG5)


def test_fit_signals_unbounded_direction():
    # every step is +1: the tilted pressure falls without bound
    system = GroupExtendedSystem(FULL2, SymbolMap(LatticeGroup(1), ((1,), (1,))))
    with pytest.raises(UnboundedTilt):
        fit_homomorphism(system, zero(FULL2))


def lattice_cases():
    yield walk_system(1), potential_from_symbol_weights(FULL2, [1, 4])
    yield GroupExtendedSystem(THREE, SymbolMap(LatticeGroup(2), ((1, 0), (-1, 1), (0, -1)))), \
        potential_from_symbol_weights(THREE, [1.0, 2.0, 0.5])
    s = walk_system(2).shift
    yield walk_system(2), potential_from_symbol_weights(s, [1.0, 3.0, 2.0, 0.7])


@pytest.mark.parametrize("system,phi", list(lattice_cases()))
def test_tilted_pressure_properties(system, phi):
    fam = TiltedFamily(system, phi)
    rng = np.random.default_rng(0)
    d = fam.dim
    for _ in range(10):
        t1, t2 = rng.uniform(-1, 1, d), rng.uniform(-1, 1, d)
        assert fam.pressure((t1 + t2) / 2) <= (fam.pressure(t1) + fam.pressure(t2)) / 2 + 1e-9
        g = fam.gradient(t1)
        for j in range(d):
            e = np.zeros(d)
            e[j] = 1e-5
            fd = (fam.pressure(t1 + e) - fam.pressure(t1 - e)) / 2e-5
            assert abs(fd - g[j]) <= 1e-6
    fit = fit_homomorphism(system, phi)
    assert fit.converged and np.max(np.abs(fit.drift)) <= 1e-10
    star = np.log([float(v) for v in fit.theta.values])
    for _ in range(20):
        assert fit.fitted_pressure <= fam.pressure(star + rng.uniform(-1, 1, d)) + 1e-12


@given(st.lists(rational_weights, min_size=3, max_size=3))
@settings(max_examples=10, deadline=None)
def test_skew_pressure_sandwich(ws):
    system = GroupExtendedSystem(THREE, SymbolMap(LatticeGroup(1), ((1,), (-1,), (0,))))
    phi = potential_from_symbol_weights(THREE, ws)
    rep = tilted_pressure_check(system, phi, 40)
    if rep.recurrence.verdict == "recurrent-divergent":
        assert rep.passed
    assert rep.bracket.lower <= rep.fitted_pressure + 1e-9


# tilted pressure against the skew bracket


@pytest.mark.parametrize("weights,truth", [([1, 1], LOG2), ([1, 4], LOG4)])
def test_tilted_pressure_matches_bracket(weights, truth):
    rep = tilted_pressure_check(*signed_walk(weights), 40)
    assert rep.asserted and rep.passed
    assert rep.fitted_pressure == pytest.approx(truth, abs=1e-10) and rep.bracket.contains(truth)


def test_tilted_pressure_on_finite_extension():
    rep = tilted_pressure_check(cyclic_extension(2, (0, 1)), zero(FULL2), 30)
    assert rep.passed and rep.fitted_pressure == pytest.approx(LOG2) == rep.base
    with pytest.raises(ValueError):
        tilted_pressure_check(GroupExtendedSystem(sigma_free(2), SymbolMap(FreeGroup(2), ((1,), (-1,), (2,), (-2,)))),
                       zero(sigma_free(2)), 10)


# symmetric on average


def test_symmetry_examples():
    rep = symmetric_on_average(*signed_walk([1, 1]), LOG2, 12, 6)
    assert rep.bounded and all(r == pytest.approx(1, abs=1e-12) for r in rep.ratios.values())
    rep = symmetric_on_average(*signed_walk([1, 4]), LOG4, 12, 6)
    for k in range(1, 7):
        assert rep.ratios[(k,)] == pytest.approx(4.0 ** -k, rel=1e-9)
        assert rep.ratios[(-k,)] == pytest.approx(4.0 ** k, rel=1e-9)
    assert not rep.bounded and rep.sup_ratio == pytest.approx(4.0 ** 6)
    rep = symmetric_on_average(cyclic_extension(3, (1, 2)), potential_from_symbol_weights(FULL2, [1, 7]), LOG2, 12, 1)
    assert rep.bounded and len(rep.ratios) == 3


def test_symmetry_requires_length():
    with pytest.raises(ValueError):
        symmetric_on_average(*signed_walk([1, 1]), LOG2, 3, 2)


@given(st.lists(rational_weights, min_size=3, max_size=3))
@settings(max_examples=15, deadline=None)
def test_symmetry_ratio_products(ws):
    system = GroupExtendedSystem(THREE, SymbolMap(LatticeGroup(2), ((1, 0), (-1, 1), (0, -1))))
    phi = potential_from_symbol_weights(THREE, ws)
    rep = symmetric_on_average(system, phi, base_pressure(THREE, phi), 10, 3)
    G = system.group
    for g, r in rep.ratios.items():
        if G.invert(g) in rep.ratios:
            assert r * rep.ratios[G.invert(g)] >= 1 - 1e-9


# pressure gap


def test_gap_examples():
    rep = pressure_gap(*signed_walk([1, 1]), 40)
    assert rep.gap == 0 and rep.equal
    rep = pressure_gap(*signed_walk([1, 4]), 40)
    assert not rep.equal and rep.base == pytest.approx(LOG5)
    assert rep.gap_estimate == pytest.approx(LOG5 - LOG4, abs=0.01)
    assert rep.gap == pytest.approx(LOG5 - LOG4, abs=rep.bracket.width + 1e-9) and rep.gap > 0


def test_gap_free_group_quotient():
    # the six generator images of F3 -> F2 do not generate an amenable kernel
    system = GroupExtendedSystem(sigma_free(3), SymbolMap(FreeGroup(2), ((1,), (-1,), (2,), (-2,), (1, 2), (-2, -1))))
    rep = pressure_gap(system, zero(sigma_free(3)), 16)
    assert rep.base == pytest.approx(LOG5)
    assert rep.gap_estimate > 0.2 and rep.bracket.raw_rate < LOG5 - 0.2


# product structure


def test_product_structure_examples():
    rep = product_structure_check(cyclic_extension(3, (1, 2)), zero(FULL2))
    assert rep.passed and rep.c == pytest.approx((1, 1, 1)) and rep.rho_skew == pytest.approx(2)
    phi = potential_from_symbol_weights(FULL2, [2, 3])
    rep = product_structure_check(cyclic_extension(2, (0, 1)), phi)
    assert rep.passed and rep.rho_skew == pytest.approx(5) and rep.h_base_error < 1e-8
    rep = product_structure_check(cyclic_extension(1, (0, 0)), phi)
    base = perron_eigen(build_transfer(FULL2, phi))
    M, _, T = skew_transfer(cyclic_extension(1, (0, 0)), phi)
    assert (M.toarray() == T.dense()).all() and rep.rho_skew == base.rho


def test_product_structure_reports_period():
    # every symbol steps by 1 in Z/2: the product graph has period 2
    rep = product_structure_check(cyclic_extension(2, (1, 1)), zero(FULL2))
    assert not rep.mixing and rep.period == 2 and not rep.passed


@given(st.lists(rational_weights, min_size=3, max_size=3), st.lists(st.integers(0, 3), min_size=3, max_size=3))
@settings(max_examples=20, deadline=None)
def test_finite_product_structure(ws, psi):
    system = GroupExtendedSystem(THREE, SymbolMap(FiniteGroup.cyclic(4), tuple(psi)))
    rep = product_structure_check(system, potential_from_symbol_weights(THREE, ws))
    if rep.mixing:
        assert rep.passed
        assert rep.rho_skew == pytest.approx(rep.rho_base, rel=1e-10)


# dichotomy


def test_dichotomy_examples():
    rep = positive_recurrence_dichotomy(cyclic_extension(2, (0, 1)), zero(FULL2))
    assert rep.finite_group and rep.finitely_primitive and rep.positive and rep.star_ratio < 0.9
    rep = positive_recurrence_dichotomy(*signed_walk([1, 1]))
    assert not rep.finitely_primitive and not rep.positive and rep.recurrence.sub_verdict == "null"
    lengths = dict(rep.connecting_lengths)
    assert [lengths[r] for r in (1, 2, 4, 8)] == [1, 2, 4, 8]
    rep = positive_recurrence_dichotomy(cyclic_extension(1, (0, 0)), potential_from_symbol_weights(FULL2, [2, 3]))
    assert rep.positive and rep.pressure == pytest.approx(LOG5)
