"""Finite abelian groups in invariant-factor form, subgroups, quotients,
and exact character theory.

Elements are exponent tuples (e_1, ..., e_k) against the invariant factors
d_1 | d_2 | ... | d_k; composition is componentwise addition mod d_i.
Characters take values in the group of m-th roots of unity, m = exp(G),
stored exactly as powers of a fixed primitive root zeta_m.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, prod

from . import _kernels

MAX_ORDER = 10**6  # desk scale; enumeration-based operations stay tractable


class FiniteAbelianGroup:
    """Z/d_1 x ... x Z/d_k with d_1 | d_2 | ... | d_k, every d_i >= 2.

    >>> G = FiniteAbelianGroup([2, 4])
    >>> G.order, G.exponent
    (8, 4)
    >>> G.compose((1, 3), (1, 2))
    (0, 1)
    """

    def __init__(self, invariant_factors):
        factors = [int(d) for d in invariant_factors]
        if any(d < 2 for d in factors):
            raise ValueError("invariant factors must be >= 2")
        for a, b in zip(factors, factors[1:]):
            if b % a:
                raise ValueError(f"not a divisibility chain: {factors}")
        if prod(factors) > MAX_ORDER:
            raise ValueError(f"group order exceeds {MAX_ORDER}")
        self.invariant_factors = tuple(factors)
        self.rank = len(factors)
        self.order = prod(factors) if factors else 1
        self.exponent = factors[-1] if factors else 1
        self.identity = (0,) * self.rank

    @staticmethod
    def from_generator_orders(orders) -> "FiniteAbelianGroup":
        """Normalize arbitrary cyclic-factor orders to invariant factors.

        >>> FiniteAbelianGroup.from_generator_orders([2, 2, 3]).invariant_factors
        (2, 6)
        """
        orders = [int(d) for d in orders if int(d) != 1]
        if not orders:
            return FiniteAbelianGroup([])
        k = len(orders)
        rel = [[orders[i] if i == j else 0 for j in range(k)] for i in range(k)]
        D, _, _ = _kernels.snf(rel)
        inv = [D[i][i] for i in range(k) if D[i][i] > 1]
        return FiniteAbelianGroup(inv)

    # -- element arithmetic -------------------------------------------------

    def reduce(self, vec) -> tuple:
        return tuple(int(v) % d for v, d in zip(vec, self.invariant_factors))

    def compose(self, a, b) -> tuple:
        return tuple(
            (x + y) % d for x, y, d in zip(a, b, self.invariant_factors)
        )

    def inverse(self, a) -> tuple:
        return tuple((-x) % d for x, d in zip(a, self.invariant_factors))

    def power(self, a, n: int) -> tuple:
        return tuple((x * n) % d for x, d in zip(a, self.invariant_factors))

    def element_order(self, a) -> int:
        n = 1
        for x, d in zip(a, self.invariant_factors):
            n = n * (d // gcd(d, x)) // gcd(n, d // gcd(d, x))
        return n

    def elements(self):
        """All elements, identity first, lexicographic."""
        return list(
            itertools.product(*(range(d) for d in self.invariant_factors))
        )

    def contains(self, a) -> bool:
        return (
            isinstance(a, tuple)
            and len(a) == self.rank
            and all(0 <= x < d for x, d in zip(a, self.invariant_factors))
        )

    def __eq__(self, other):
        return (
            isinstance(other, FiniteAbelianGroup)
            and self.invariant_factors == other.invariant_factors
        )

    def __hash__(self):
        return hash(self.invariant_factors)

    def __repr__(self):
        if not self.invariant_factors:
            return "FiniteAbelianGroup(trivial)"
        return "FiniteAbelianGroup(%s)" % " x ".join(
            f"Z/{d}" for d in self.invariant_factors
        )


class Subgroup:
    """Subgroup given by generators, with a cached element set.

    >>> G = FiniteAbelianGroup([4])
    >>> sorted(Subgroup(G, [(2,)]).element_set)
    [(0,), (2,)]
    """

    def __init__(self, parent: FiniteAbelianGroup, generators):
        self.parent = parent
        gens = [parent.reduce(g) for g in generators]
        for g in generators:
            if not parent.contains(parent.reduce(g)):
                raise ValueError(f"generator {g} not in parent group")
        self.generators = tuple(gens)
        self.element_set = self._closure(gens)
        self.order = len(self.element_set)

    def _closure(self, gens) -> frozenset:
        G = self.parent
        seen = {G.identity}
        frontier = [G.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = G.compose(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    @staticmethod
    def trivial(parent: FiniteAbelianGroup) -> "Subgroup":
        return Subgroup(parent, [])

    @staticmethod
    def full(parent: FiniteAbelianGroup) -> "Subgroup":
        gens = [
            tuple(1 if j == i else 0 for j in range(parent.rank))
            for i in range(parent.rank)
        ]
        return Subgroup(parent, gens)

    def contains(self, a) -> bool:
        return self.parent.reduce(a) in self.element_set

    def elements(self):
        # deterministic order: lexicographic, identity first
        return sorted(self.element_set)

    def join(self, other: "Subgroup") -> "Subgroup":
        if other.parent != self.parent:
            raise ValueError("subgroups of different groups")
        return Subgroup(self.parent, self.generators + other.generators)

    def __eq__(self, other):
        return (
            isinstance(other, Subgroup)
            and self.parent == other.parent
            and self.element_set == other.element_set
        )

    def __hash__(self):
        return hash((self.parent, self.element_set))

    def __repr__(self):
        return f"Subgroup(order={self.order} of {self.parent!r})"


@dataclass(frozen=True)
class Character:
    """Character of G with chi(gen_i) = zeta_m^{powers[i]}, m = exp(G)."""

    group: FiniteAbelianGroup
    powers: tuple

    def __post_init__(self):
        m = self.group.exponent
        object.__setattr__(
            self, "powers", tuple(int(j) % m for j in self.powers)
        )
        for j, d in zip(self.powers, self.group.invariant_factors):
            # chi(gen_i)^{d_i} = 1 forces j*d_i = 0 mod m
            if (j * d) % m:
                raise ValueError("character powers incompatible with orders")

    def power_of_zeta(self, g) -> int:
        """j with chi(g) = zeta_m^j, m = exp(G)."""
        m = self.group.exponent
        return sum(e * j for e, j in zip(g, self.powers)) % m

    @property
    def order(self) -> int:
        m = self.group.exponent
        g = m
        for j in self.powers:
            g = gcd(g, j)
        return m // g

    def is_trivial(self) -> bool:
        return all(j == 0 for j in self.powers)

    def is_real(self) -> bool:
        return self.order <= 2

    def mul(self, other: "Character") -> "Character":
        m = self.group.exponent
        return Character(
            self.group,
            tuple((a + b) % m for a, b in zip(self.powers, other.powers)),
        )

    def pow(self, k: int) -> "Character":
        m = self.group.exponent
        return Character(self.group, tuple((j * k) % m for j in self.powers))

    def conj(self) -> "Character":
        return self.pow(-1)

    def trivial_on(self, H: Subgroup) -> bool:
        return all(self.power_of_zeta(h) == 0 for h in H.generators)

    def __repr__(self):
        return f"Character(powers={self.powers}, m={self.group.exponent})"


def enumerate_characters(G: FiniteAbelianGroup) -> list:
    """All |G| characters; the trivial character comes first.

    >>> [c.powers for c in enumerate_characters(FiniteAbelianGroup([2]))]
    [(0,), (1,)]
    """
    m = G.exponent
    ranges = [range(0, m, m // d) for d in G.invariant_factors]
    chars = [Character(G, p) for p in itertools.product(*ranges)]
    chars.sort(key=lambda c: (not c.is_trivial(), c.powers))
    assert len(chars) == G.order
    return chars


def quotient_and_projection(G: FiniteAbelianGroup, H: Subgroup):
    """(Delta, pi, coset_reps) for Delta = G/H in invariant-factor form.

    pi maps G-elements onto Delta-elements, kernel exactly H; coset_reps
    lists one preimage per Delta element, identity first, bijective under pi.
    """
    if H.parent != G:
        raise ValueError("H is not a subgroup of G")
    k = G.rank
    if k == 0:
        triv = FiniteAbelianGroup([])
        return triv, (lambda g: ()), [()]

    rel = [
        [G.invariant_factors[i] if i == j else 0 for j in range(k)]
        for i in range(k)
    ]
    rel += [list(h) for h in sorted(H.element_set)]
    D, U, V = _kernels.snf(rel)
    diag = [D[i][i] for i in range(min(len(rel), k))]
    kept = [i for i, s in enumerate(diag) if s > 1]
    delta = FiniteAbelianGroup([diag[i] for i in kept])

    def pi(g):
        y = [sum(g[a] * V[a][i] for a in range(k)) for i in range(k)]
        return tuple(y[i] % diag[i] for i in kept)

    # section: invert V on a lift supported on the kept coordinates
    Vinv = _invert_unimodular(V)
    reps = []
    for d_el in delta.elements():
        y = [0] * k
        for pos, i in enumerate(kept):
            y[i] = d_el[pos]
        x = G.reduce([sum(y[a] * Vinv[a][i] for a in range(k)) for i in range(k)])
        reps.append(x)
    assert reps[0] == G.identity
    assert len({pi(r) for r in reps}) == delta.order
    for h in H.generators:
        assert pi(h) == delta.identity
    return delta, pi, reps


def _invert_unimodular(V):
    # HNF of a unimodular matrix is the identity, so U*V = I gives U = V^{-1}
    n = len(V)
    H, U, pivots = _kernels.hnf(V)
    if len(pivots) != n or any(
        H[i][j] != (1 if i == j else 0) for i in range(n) for j in range(n)
    ):
        raise ValueError("matrix is not unimodular")
    return U


@dataclass(frozen=True)
class RationalCharacterOrbit:
    """Galois orbit of a character under chi -> chi^k, gcd(k, order)=1."""

    representative: Character
    members: tuple

    @property
    def size(self) -> int:
        return len(self.members)


def rational_orbits(G: FiniteAbelianGroup) -> list:
    """Partition of the dual group into Galois orbits.

    Orbit sizes sum to |G|; each size equals phi(order of the orbit).
    """
    chars = enumerate_characters(G)
    seen = set()
    orbits = []
    for chi in chars:
        if chi.powers in seen:
            continue
        n = chi.order
        members = []
        mseen = set()
        for kk in range(1, n + 1):
            if gcd(kk, n) == 1:
                psi = chi.pow(kk)
                if psi.powers not in mseen:
                    mseen.add(psi.powers)
                    members.append(psi)
        members.sort(key=lambda c: c.powers)
        for psi in members:
            seen.add(psi.powers)
        orbits.append(RationalCharacterOrbit(chi, tuple(members)))
    assert sum(o.size for o in orbits) == G.order
    return orbits
