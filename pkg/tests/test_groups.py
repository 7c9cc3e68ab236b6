import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewlab.groups import (FiniteGroup, FreeGroup, GroupExtendedSystem, HomCandidate, LatticeGroup, SymbolMap,
                            eval_hom, extend_hom, reachable_elements, subgroup_G0)
from skewlab.potentials import potential_from_symbol_weights, sup_weight_on_cylinder
from skewlab.shift import MarkovShift, admissible_words, sigma_free

FULL2 = MarkovShift.full(2)
WALK = GroupExtendedSystem(FULL2, SymbolMap(LatticeGroup(1), ((1,), (-1,))))
S3 = FiniteGroup([[0, 1, 2, 3, 4, 5], [1, 2, 0, 4, 5, 3], [2, 0, 1, 5, 3, 4],
                  [3, 5, 4, 0, 2, 1], [4, 3, 5, 1, 0, 2], [5, 4, 3, 2, 1, 0]])


def test_extend_hom_examples():
    assert extend_hom(WALK.psi, (0, 1, 0)) == (1,)
    free = SymbolMap(FreeGroup(2), ((1,), (-1,)))
    assert extend_hom(free, (0, 1)) == ()
    z3 = SymbolMap(FiniteGroup.cyclic(3), (1, 1))
    assert extend_hom(z3, (0, 1, 0)) == 0


def test_finite_table_validation():
    with pytest.raises(ValueError, match="permutation"):
        FiniteGroup([[0, 1], [0, 1]])
    with pytest.raises(ValueError, match="identity"):
        FiniteGroup([[1, 0], [0, 1]], identity=0)
    with pytest.raises(ValueError, match="associative"):
        # a Latin square with identity 0 that is not a group
        FiniteGroup([[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]])


backends = st.sampled_from([LatticeGroup(2), FiniteGroup.cyclic(5), S3, FreeGroup(2)])


def element(G, draw):
    if G.kind == "lattice":
        return draw(st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
    if G.kind == "finite":
        return draw(st.integers(0, G.order - 1))
    letters = draw(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=6))
    return G.element(letters) if letters else G.identity


@given(backends, st.data())
@settings(max_examples=100)
def test_group_axioms(G, data):
    a, b, c = (element(G, data.draw) for _ in range(3))
    assert G.multiply(G.multiply(a, b), c) == G.multiply(a, G.multiply(b, c))
    assert G.multiply(a, G.identity) == a == G.multiply(G.identity, a)
    assert G.multiply(a, G.invert(a)) == G.identity


def test_free_reduction_is_canonical():
    G = FreeGroup(2)
    assert G.element([1, 2, -2, -1, 2]) == (2,)
    assert G.multiply((1, 2), (-2, -1)) == ()


@given(st.lists(st.integers(0, 3), min_size=1, max_size=4), st.lists(st.integers(0, 3), min_size=1, max_size=4))
def test_extend_hom_is_a_semigroup_homomorphism(u, v):
    for psi in (SymbolMap(LatticeGroup(2), ((1, 0), (-1, 0), (0, 1), (0, -1))),
                SymbolMap(FreeGroup(2), ((1,), (-1,), (2,), (-2,))), SymbolMap(S3, (1, 3, 4, 5))):
        G = psi.group
        assert extend_hom(psi, tuple(u + v)) == G.multiply(extend_hom(psi, u), extend_hom(psi, v))


def test_extend_hom_exhaustive_to_length_8():
    psi = WALK.psi
    for w in itertools.product((0, 1), repeat=8):
        for k in range(1, 8):
            assert extend_hom(psi, w) == psi.group.multiply(extend_hom(psi, w[:k]), extend_hom(psi, w[k:]))


def test_reachable_elements_examples():
    phi = potential_from_symbol_weights(FULL2, [Fraction(2), Fraction(3)])
    layer = reachable_elements(WALK, 2, phi)
    assert layer == {(2,): {(0, 0): 4}, (0,): {(0, 1): 6, (1, 0): 6}, (-2,): {(1, 1): 9}}
    z2 = GroupExtendedSystem(FULL2, SymbolMap(FiniteGroup.cyclic(2), (0, 1)))
    assert all(len(reachable_elements(z2, n)) <= 2 for n in range(1, 8))
    free = GroupExtendedSystem(sigma_free(2), SymbolMap(FreeGroup(2), ((1,), (-1,), (2,), (-2,))))
    layer = reachable_elements(free, 2)
    assert len(layer) == 12 and all(sum(b.values()) == 1 for b in layer.values())


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_reachable_totals_match_unannotated_weight(n):
    shift = MarkovShift.from_rows(["110", "011", "101"])
    phi = potential_from_symbol_weights(shift, [Fraction(1, 2), Fraction(2), Fraction(3)])
    system = GroupExtendedSystem(shift, SymbolMap(LatticeGroup(1), ((1,), (0,), (-1,))))
    total = sum(sum(b.values()) for b in reachable_elements(system, n, phi).values())
    assert total == sum(sup_weight_on_cylinder(phi, w) for w in admissible_words(shift, n))


def test_reachable_elements_budget():
    from skewlab.paths import BudgetExceeded
    free = GroupExtendedSystem(sigma_free(2), SymbolMap(FreeGroup(2), ((1,), (-1,), (2,), (-2,))))
    with pytest.raises(BudgetExceeded) as err:
        reachable_elements(free, 8, budget=50)
    assert err.value.buckets > 50 and err.value.n <= 8


def test_subgroup_G0_examples():
    rep = subgroup_G0(WALK, 2, 4)
    assert rep.basis == ((2,),) and rep.inverse_closed
    assert all(g[0] % 2 == 0 for g in rep.elements)
    mixing = GroupExtendedSystem(MarkovShift.full(3), SymbolMap(LatticeGroup(1), ((1,), (-1,), (0,))))
    assert subgroup_G0(mixing, 1, 3).basis == ((1,),)
    z2 = GroupExtendedSystem(FULL2, SymbolMap(FiniteGroup.cyclic(2), (1, 1)))
    assert subgroup_G0(z2, 2, 4).elements == frozenset({0})


def test_subgroup_G0_lattice_basis_in_two_dimensions():
    system = GroupExtendedSystem(MarkovShift.full(4), SymbolMap(LatticeGroup(2), ((1, 0), (-1, 0), (0, 1), (0, -1))))
    rep = subgroup_G0(system, 2, 3)
    # sums of an even number of unit steps: the checkerboard sublattice
    assert rep.basis == ((1, 1), (0, 2)) and rep.inverse_closed and rep.product_closed


def test_eval_hom_examples():
    Z = LatticeGroup(1)
    assert eval_hom(HomCandidate.trivial(Z), (7,)) == 1
    assert eval_hom(HomCandidate.from_theta(Z, [math.log(2)]), (3,)) == pytest.approx(8)
    assert eval_hom(HomCandidate(Z, (Fraction(2),)), (-3,)) == Fraction(1, 8)
    assert eval_hom(HomCandidate.trivial(S3), 4) == 1
    with pytest.raises(ValueError):
        HomCandidate(Z, (0,))
    with pytest.raises(ValueError):
        HomCandidate(S3, (2,))


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3),
       st.tuples(*[st.integers(-6, 6)] * 3), st.tuples(*[st.integers(-6, 6)] * 3))
def test_eval_hom_multiplicative_on_lattices(theta, g, h):
    G = LatticeGroup(3)
    c = HomCandidate.from_theta(G, theta)
    lhs = eval_hom(c, G.multiply(g, h))
    assert math.isclose(lhs, eval_hom(c, g) * eval_hom(c, h), rel_tol=1e-12)


def test_free_hom_factors_through_abelianisation():
    G = FreeGroup(2)
    c = HomCandidate(G, (Fraction(2), Fraction(3)))
    assert c(G.element([1, 2, -1, -2])) == 1
    assert c(G.element([1, 1, -2])) == Fraction(4, 3)
