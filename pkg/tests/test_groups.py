"""Finite abelian groups, quotients, characters, rational orbits."""

import itertools
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rubinstark.groups import (
    Character,
    FiniteAbelianGroup,
    Subgroup,
    enumerate_characters,
    quotient_and_projection,
    rational_orbits,
)


def test_invariant_factor_validation():
    with pytest.raises(ValueError):
        FiniteAbelianGroup([3, 2])  # not a chain
    with pytest.raises(ValueError):
        FiniteAbelianGroup([1, 2])
    G = FiniteAbelianGroup([2, 4])
    assert G.order == 8 and G.exponent == 4


def test_from_generator_orders_normalizes():
    assert FiniteAbelianGroup.from_generator_orders([2, 2, 3]).invariant_factors == (2, 6)
    assert FiniteAbelianGroup.from_generator_orders([4, 6]).invariant_factors == (2, 12)
    assert FiniteAbelianGroup.from_generator_orders([1, 1]).invariant_factors == ()
    assert FiniteAbelianGroup.from_generator_orders([5]).invariant_factors == (5,)


def test_characters_c2():
    G = FiniteAbelianGroup([2])
    chars = enumerate_characters(G)
    assert len(chars) == 2
    assert chars[0].is_trivial()
    sigma = (1,)
    assert chars[0].power_of_zeta(sigma) == 0  # chi0(sigma) = 1
    assert chars[1].power_of_zeta(sigma) == 1  # chi1(sigma) = -1 (zeta_2)


def test_characters_c2xc2_all_real():
    G = FiniteAbelianGroup([2, 2])
    chars = enumerate_characters(G)
    assert len(chars) == 4
    assert all(c.is_real() for c in chars)


def test_characters_c6_orders():
    G = FiniteAbelianGroup([6])
    chars = enumerate_characters(G)
    assert sorted(c.order for c in chars) == [1, 2, 3, 3, 6, 6]


def test_character_multiplicativity_on_elements():
    G = FiniteAbelianGroup([2, 4])
    m = G.exponent
    for chi in enumerate_characters(G):
        for g in G.elements():
            for h in G.elements():
                lhs = chi.power_of_zeta(G.compose(g, h))
                rhs = (chi.power_of_zeta(g) + chi.power_of_zeta(h)) % m
                assert lhs == rhs


def test_dual_group_size_and_distinctness():
    for factors in ([2], [3], [2, 2], [2, 4], [6], [2, 6]):
        G = FiniteAbelianGroup(factors)
        chars = enumerate_characters(G)
        assert len({c.powers for c in chars}) == G.order


def test_quotient_c4_by_square():
    G = FiniteAbelianGroup([4])
    H = Subgroup(G, [(2,)])
    delta, pi, reps = quotient_and_projection(G, H)
    assert delta.invariant_factors == (2,)
    assert reps[0] == (0,)
    assert len(reps) == 2
    assert pi((2,)) == delta.identity
    assert pi((1,)) != delta.identity


def test_quotient_by_full_group():
    G = FiniteAbelianGroup([4])
    delta, pi, reps = quotient_and_projection(G, Subgroup.full(G))
    assert delta.order == 1 and reps == [(0,)]


def test_quotient_c2xc2():
    G = FiniteAbelianGroup([2, 2])
    H = Subgroup(G, [(1, 0)])
    delta, pi, reps = quotient_and_projection(G, H)
    assert delta.invariant_factors == (2,)
    assert pi((1, 0)) == delta.identity
    assert pi((0, 1)) != delta.identity


def test_quotient_kernel_is_exactly_h():
    G = FiniteAbelianGroup([2, 4])
    H = Subgroup(G, [(1, 2)])
    delta, pi, reps = quotient_and_projection(G, H)
    kernel = {g for g in G.elements() if pi(g) == delta.identity}
    assert kernel == set(H.element_set)
    assert delta.order * H.order == G.order
    # reps hit every class exactly once
    assert len({pi(r) for r in reps}) == delta.order


def test_rational_orbit_sizes():
    assert [o.size for o in rational_orbits(FiniteAbelianGroup([2]))] == [1, 1]
    assert sorted(o.size for o in rational_orbits(FiniteAbelianGroup([3]))) == [1, 2]
    assert sorted(o.size for o in rational_orbits(FiniteAbelianGroup([5]))) == [1, 4]


def test_orbits_partition_dual():
    for factors in ([2, 4], [6], [12]):
        G = FiniteAbelianGroup(factors)
        orbits = rational_orbits(G)
        all_powers = [c.powers for o in orbits for c in o.members]
        assert len(all_powers) == G.order
        assert len(set(all_powers)) == G.order
        for o in orbits:
            n = o.representative.order
            phi = sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)
            assert o.size == phi


def test_chi_trivial_on_h_iff_factors_through_quotient():
    G = FiniteAbelianGroup([2, 4])
    H = Subgroup(G, [(0, 2)])
    delta, pi, reps = quotient_and_projection(G, H)
    trivial_on_h = [c for c in enumerate_characters(G) if c.trivial_on(H)]
    assert len(trivial_on_h) == delta.order
    # inflation of Delta-characters matches that set exactly
    m, md = G.exponent, delta.exponent
    inflated = set()
    for psi in enumerate_characters(delta):
        values = {}
        for g in G.elements():
            values[g] = psi.power_of_zeta(pi(g)) * (m // md) % m
        inflated.add(tuple(values[g] for g in G.elements()))
    direct = {
        tuple(c.power_of_zeta(g) for g in G.elements()) for c in trivial_on_h
    }
    assert inflated == direct


@settings(max_examples=60)
@given(
    st.lists(st.sampled_from([2, 3, 4, 6]), min_size=1, max_size=2),
    st.data(),
)
def test_subgroup_closure_properties(factors, data):
    G = FiniteAbelianGroup.from_generator_orders(factors)
    els = G.elements()
    gens = data.draw(
        st.lists(st.sampled_from(els), min_size=0, max_size=2)
    )
    H = Subgroup(G, gens)
    S = H.element_set
    assert G.identity in S
    for a in S:
        assert G.inverse(a) in S
        for b in S:
            assert G.compose(a, b) in S
    assert G.order % H.order == 0  # Lagrange


def test_element_order_and_power():
    G = FiniteAbelianGroup([2, 6])
    for g in G.elements():
        n = G.element_order(g)
        assert G.power(g, n) == G.identity
        for k in range(1, n):
            assert G.power(g, k) != G.identity
