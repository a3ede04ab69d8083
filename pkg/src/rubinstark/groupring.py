"""Group rings Q[G], Q(zeta_m)[G], R[G], C[G].

Elements are dense coefficient vectors against the canonical element order
(lexicographic exponent tuples, identity first).  The convolution product is
table-driven.  Exact coefficients are rationals or cyclotomics over
Q(zeta_{exp(G)}); numeric coefficients are mpmath reals/complexes carrying
the precision they were built at.

Also home of the distinguished elements: character idempotents e_chi,
rational-orbit idempotents, e_{S,r}, delta_T, inertia idempotents e_I, and
norm elements s(H).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .cyclo import CycloField, CycloNum
from .groups import (
    Character,
    FiniteAbelianGroup,
    Subgroup,
    enumerate_characters,
)
from .rationals import Q, is_rational


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision (decimal digits) and comparison tolerance."""

    digits: int = 50

    def __post_init__(self):
        if self.digits < 30:
            raise ValueError("precision below 30 digits is not supported")

    @property
    def tau(self):
        with self.workdps():
            return mp.mpf(10) ** (-(self.digits - 10))

    def workdps(self):
        return mp.workdps(self.digits)

    def close(self, a, b) -> bool:
        with self.workdps():
            return abs(mp.mpf(a) - mp.mpf(b)) < self.tau


def rationalize(x, tol, max_den: int = 10**6):
    """Nearest rational with denominator <= max_den within tol, else None.

    Continued-fraction expansion of an mpmath real.
    """
    x = mp.mpf(x)
    p0, q0, p1, q1 = 0, 1, 1, 0
    y = x
    for _ in range(64):
        a = int(mp.floor(y))
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        if q1 > max_den:
            break
        if abs(x - mp.mpf(p1) / q1) < tol:
            return Q(p1, q1)
        frac = y - a
        if frac == 0:
            break
        y = 1 / frac
    return None


def mpf_from_q(q):
    """Exact rational -> mpf at the ambient working precision."""
    return mp.mpf(int(q.numerator)) / int(q.denominator)


# -- scalar tower helpers ----------------------------------------------------


def _is_exact(a) -> bool:
    return is_rational(a) or isinstance(a, CycloNum)


def _s_add(a, b):
    if isinstance(a, CycloNum) or isinstance(b, CycloNum):
        if not isinstance(a, CycloNum):
            a, b = b, a
        return a + b
    if _is_exact(a) and _is_exact(b):
        return Q(a) + Q(b)
    return _to_num(a) + _to_num(b)


def _s_mul(a, b):
    if isinstance(a, CycloNum) or isinstance(b, CycloNum):
        if not isinstance(a, CycloNum):
            a, b = b, a
        return a * b
    if _is_exact(a) and _is_exact(b):
        return Q(a) * Q(b)
    return _to_num(a) * _to_num(b)


def _to_num(a):
    if is_rational(a):
        return mpf_from_q(Q(a))
    if isinstance(a, CycloNum):
        return a.numeric(mp.mp.dps)
    return a


def _s_is_zero(a) -> bool:
    if isinstance(a, CycloNum):
        return a.is_zero()
    return a == 0


class GroupRing:
    """Shared convolution tables for one group; element factory."""

    _instances: dict = {}

    def __new__(cls, G: FiniteAbelianGroup):
        key = G.invariant_factors
        if key not in cls._instances:
            inst = super().__new__(cls)
            inst._init(G)
            cls._instances[key] = inst
        return cls._instances[key]

    def _init(self, G: FiniteAbelianGroup):
        self.group = G
        self.elements = G.elements()
        self.index = {g: i for i, g in enumerate(self.elements)}
        n = len(self.elements)
        self.n = n
        self.mult_table = [
            [self.index[G.compose(a, b)] for b in self.elements]
            for a in self.elements
        ]
        self.inv_index = [self.index[G.inverse(a)] for a in self.elements]
        self.cyclo = CycloField(G.exponent)
        self._idem_cache: dict = {}

    # -- constructors --------------------------------------------------

    def zero(self) -> "GroupRingElement":
        return GroupRingElement(self, (Q(0),) * self.n)

    def one(self) -> "GroupRingElement":
        return self.basis(self.group.identity)

    def basis(self, g, scalar=1) -> "GroupRingElement":
        c = [Q(0)] * self.n
        c[self.index[self.group.reduce(g)]] = (
            scalar if not is_rational(scalar) else Q(scalar)
        )
        return GroupRingElement(self, tuple(c))

    def from_coeff_map(self, mapping) -> "GroupRingElement":
        c = [Q(0)] * self.n
        for g, s in mapping.items():
            c[self.index[self.group.reduce(g)]] = (
                s if not is_rational(s) else Q(s)
            )
        return GroupRingElement(self, tuple(c))

    def from_coeffs(self, coeffs) -> "GroupRingElement":
        coeffs = tuple(
            (Q(s) if is_rational(s) else s) for s in coeffs
        )
        if len(coeffs) != self.n:
            raise ValueError("coefficient vector has wrong length")
        return GroupRingElement(self, coeffs)

    # -- distinguished elements -----------------------------------------

    def idempotent(self, chi: Character) -> "GroupRingElement":
        """e_chi = (1/|G|) sum_sigma chi(sigma) sigma^{-1}, exact cyclotomic."""
        if chi.powers in self._idem_cache:
            return self._idem_cache[chi.powers]
        F = self.cyclo
        inv_order = Q(1, self.n)
        coeffs = [None] * self.n
        for i, g in enumerate(self.elements):
            # coefficient at g is chi(g^{-1})/|G|
            j = chi.power_of_zeta(self.group.inverse(g))
            coeffs[i] = F.zeta(j) * inv_order
        el = GroupRingElement(self, tuple(coeffs))
        self._idem_cache[chi.powers] = el
        return el

    def orbit_idempotent(self, orbit) -> "GroupRingElement":
        """Sum of e_chi over a rational character orbit; exact rational."""
        total = self.zero()
        for chi in orbit.members:
            total = total + self.idempotent(chi)
        return total.rational_form()

    def inertia_idempotent(self, I: Subgroup) -> "GroupRingElement":
        inv = Q(1, I.order)
        return self.from_coeff_map({h: inv for h in I.element_set})

    def norm_element(self, H: Subgroup) -> "GroupRingElement":
        return self.from_coeff_map({h: Q(1) for h in H.element_set})


class GroupRingElement:
    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: GroupRing, coeffs: tuple):
        self.ring = ring
        self.coeffs = coeffs

    # -- inspection -----------------------------------------------------

    def coeff(self, g):
        return self.coeffs[self.ring.index[self.ring.group.reduce(g)]]

    def is_zero(self) -> bool:
        return all(_s_is_zero(c) for c in self.coeffs)

    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(
            is_rational(c) or (isinstance(c, CycloNum) and c.is_rational())
            for c in self.coeffs
        )

    def rational_form(self) -> "GroupRingElement":
        """Coefficients as plain rationals; error if any is irrational."""
        out = []
        for c in self.coeffs:
            if isinstance(c, CycloNum):
                out.append(c.rational_value())
            elif is_rational(c):
                out.append(Q(c))
            else:
                raise ValueError("numeric element has no exact rational form")
        return GroupRingElement(self.ring, tuple(out))

    # -- arithmetic -----------------------------------------------------

    def _check(self, other) -> "GroupRingElement":
        if not isinstance(other, GroupRingElement):
            raise TypeError("expected a group-ring element")
        if other.ring is not self.ring:
            raise ValueError("elements of different group rings")
        return other

    def __add__(self, other):
        o = self._check(other)
        return GroupRingElement(
            self.ring,
            tuple(_s_add(a, b) for a, b in zip(self.coeffs, o.coeffs)),
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return GroupRingElement(self.ring, tuple(-c for c in self.coeffs))

    def scale(self, s) -> "GroupRingElement":
        if is_rational(s):
            s = Q(s)
        return GroupRingElement(
            self.ring, tuple(_s_mul(c, s) for c in self.coeffs)
        )

    def __mul__(self, other):
        if not isinstance(other, GroupRingElement):
            return self.scale(other)
        o = self._check(other)
        table = self.ring.mult_table
        out = [Q(0)] * self.ring.n
        for i, a in enumerate(self.coeffs):
            if _s_is_zero(a):
                continue
            row = table[i]
            for j, b in enumerate(o.coeffs):
                if not _s_is_zero(b):
                    k = row[j]
                    out[k] = _s_add(out[k], _s_mul(a, b))
        return GroupRingElement(self.ring, tuple(out))

    def __rmul__(self, other):
        return self.scale(other)

    def act_by(self, g) -> "GroupRingElement":
        """Left translation by the group element g."""
        idx = self.ring.index[self.ring.group.reduce(g)]
        row = self.ring.mult_table[idx]
        out = [Q(0)] * self.ring.n
        for j, b in enumerate(self.coeffs):
            out[row[j]] = b
        return GroupRingElement(self.ring, tuple(out))

    def involution(self) -> "GroupRingElement":
        """g -> g^{-1} extended linearly."""
        inv = self.ring.inv_index
        out = [None] * self.ring.n
        for i, c in enumerate(self.coeffs):
            out[inv[i]] = c
        return GroupRingElement(self.ring, tuple(out))

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        if other.ring is not self.ring:
            return False
        if self.is_exact() and other.is_exact():
            return all(
                _s_is_zero(_s_add(a, -b))
                for a, b in zip(self.coeffs, other.coeffs)
            )
        raise ValueError(
            "numeric group-ring elements compare via close_to(ctx)"
        )

    def __hash__(self):
        raise TypeError("group-ring elements are unhashable")

    def close_to(self, other, ctx: PrecisionContext) -> bool:
        with ctx.workdps():
            return self.distance(other) < ctx.tau

    def distance(self, other):
        o = self._check(other)
        return max(
            abs(_to_num(a) - _to_num(b))
            for a, b in zip(self.coeffs, o.coeffs)
        )

    # -- character transforms ---------------------------------------------

    def char_value(self, chi: Character):
        """Ring homomorphism: x -> sum_g coeff(g) chi(g).

        Exact CycloNum for exact elements, complex for numeric ones.
        """
        if self.is_exact():
            F = self.ring.cyclo
            total = F.zero()
            for i, g in enumerate(self.ring.elements):
                c = self.coeffs[i]
                if _s_is_zero(c):
                    continue
                total = total + F.zeta(chi.power_of_zeta(g)) * c
            return total
        m = self.ring.group.exponent
        total = mp.mpc(0)
        for i, g in enumerate(self.ring.elements):
            c = self.coeffs[i]
            if _s_is_zero(c):
                continue
            j = chi.power_of_zeta(g)
            total += _to_num(c) * mp.expjpi(mp.mpf(2 * j) / m)
        return total

    def numeric(self, ctx: PrecisionContext) -> "GroupRingElement":
        with ctx.workdps():
            return GroupRingElement(
                self.ring, tuple(_to_num(c) for c in self.coeffs)
            )

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if not _s_is_zero(c):
                g = self.ring.elements[i]
                terms.append(f"({c})*{g}")
        return "GRElt[%s]" % (" + ".join(terms) or "0")


def from_char_values(ring: GroupRing, values, ctx: PrecisionContext):
    """Numeric element with prescribed character values (inverse transform).

    values: map Character -> complex/real; characters omitted get value 0.
    coeff(g) = (1/|G|) sum_chi v_chi chi(g^{-1}).
    """
    m = ring.group.exponent
    with ctx.workdps():
        out = [mp.mpc(0)] * ring.n
        for chi, v in values.items():
            for i, g in enumerate(ring.elements):
                j = chi.power_of_zeta(ring.group.inverse(g))
                out[i] += v * mp.expjpi(mp.mpf(2 * j) / m)
        scale = mp.mpf(1) / ring.n
        reals = []
        for z in out:
            z = z * scale
            # totally real setting: legitimate elements have real coefficients
            reals.append(z.real if abs(z.imag) < ctx.tau else z)
        return GroupRingElement(ring, tuple(reals))


def delta_T(ring: GroupRing, t_places) -> GroupRingElement:
    """delta_T = prod_{q in T} (1 - sigma_q^{-1} Nq); exact rational.

    Nq is the norm of the prime downstairs (`base_norm`), which is what
    the twisted zeta multiplier (1 - sigma_q^{-1} Nq^{1-s}) carries.
    Raises on ramified places in T; verifies the non-zero-divisor property
    (no character annihilates the product).
    """
    total = ring.one()
    for place in t_places:
        if place.inertia.order != 1:
            raise ValueError(
                f"place {place.label} in T is ramified (nontrivial inertia)"
            )
        factor = ring.one() - ring.basis(
            ring.group.inverse(place.frobenius), Q(place.base_norm)
        )
        total = total * factor
    for chi in enumerate_characters(ring.group):
        if total.char_value(chi).is_zero():
            raise ValueError(
                "delta_T is a zero-divisor: annihilated by a character"
            )
    return total


def frobenius_unit_factor(ring: GroupRing, place) -> GroupRingElement:
    """(1 - sigma_p^{-1}) for an unramified place; exact rational."""
    if place.inertia.order != 1:
        raise ValueError(f"place {place.label} is ramified")
    return ring.one() - ring.basis(ring.group.inverse(place.frobenius))


def euler_factor(ring: GroupRing, place) -> GroupRingElement:
    """(1 - sigma_p^{-1} e_{I_p}); representative-independent."""
    e_i = ring.inertia_idempotent(place.inertia)
    return ring.one() - ring.basis(
        ring.group.inverse(place.frobenius)
    ) * e_i


def e_S_r(ring: GroupRing, ext, r: int) -> GroupRingElement:
    """Sum of e_chi over the characters with r_S(chi) = r; exact rational.

    Rationality holds because the character set is Galois-stable (the
    vanishing order only depends on chi through its kernel data).
    """
    from .arithdata import order_of_vanishing  # deferred: avoids a cycle

    total = ring.zero()
    for chi in enumerate_characters(ring.group):
        if order_of_vanishing(chi, ext) == r:
            total = total + ring.idempotent(chi)
    return total.rational_form()


def project_to_quotient(
    x: GroupRingElement, pi, target: GroupRing
) -> GroupRingElement:
    """Linear extension of a group surjection pi to the group rings."""
    out = [Q(0)] * target.n
    for i, g in enumerate(x.ring.elements):
        c = x.coeffs[i]
        if not _s_is_zero(c):
            k = target.index[pi(g)]
            out[k] = _s_add(out[k], c)
    return GroupRingElement(target, tuple(out))
