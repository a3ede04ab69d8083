"""Dirichlet L-series data at s = 0 and the leading equivariant element.

Everything reduces to finite character sums.  For an even, nontrivial,
primitive character psi of modulus f,

    L'(0, psi) = -(1/2) * sum_{a mod f} psi(a) * log|1 - zeta_f^a|,

and this is the full leading Taylor coefficient, since such a series
vanishes to order exactly one at s = 0.  The S,T-truncated series picks up
exact multipliers on top of that: (1 - psi(sigma_p)) or log(p) at the
finite S-places where psi is unramified, and (1 - psi(sigma_q) * q) at the
T-places, with q the norm of the prime downstairs.  The trivial character
rides on zeta(0) = -1/2.

The leading element at order r collects the truncated leading values of
the conjugate characters as e_chi-coefficients; characters whose series
vanishes to order > r contribute zero there and are omitted.
"""

from __future__ import annotations

import mpmath as mp

import itertools

from .arithdata import order_of_vanishing
from .groupring import (
    GroupRing,
    GroupRingElement,
    PrecisionContext,
    delta_T,
    euler_factor,
    from_char_values,
    mpf_from_q,
)
from .groups import Character, enumerate_characters
from .rationals import Q

RIEMANN_ZETA_AT_0 = Q(-1, 2)

_GUARD = 15


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _units_mod(f):
    return [a for a in range(1, f) if _gcd(a, f) == 1]


class DirichletCharacter:
    """Character of (Z/f)^x with values stored as exact powers of zeta_m.

    `powers[a]` holds k with psi(a) = zeta_m^k for every unit a; non-units
    are outside the table (value zero).
    """

    def __init__(self, modulus: int, m: int, powers: dict):
        self.modulus = int(modulus)
        self.m = int(m)
        # modulus 1: the lone residue class represents the trivial group
        units = [0] if self.modulus == 1 else _units_mod(self.modulus)
        if self.modulus == 1 and not powers:
            powers = {0: 0}
        if sorted(powers) != units:
            raise ValueError("character table must cover exactly the "
                             "units mod f")
        self.powers = {a: int(k) % self.m for a, k in powers.items()}
        if self.powers[1 % self.modulus] != 0:
            raise ValueError("character must send 1 to 1")
        for a in units:
            for b in units:
                lhs = self.powers[(a * b) % self.modulus]
                if lhs != (self.powers[a] + self.powers[b]) % self.m:
                    raise ValueError("character table is not "
                                     "multiplicative")

    @staticmethod
    def from_instance(inst, chi: Character) -> "DirichletCharacter":
        """Mod-conductor character attached to a character of the Galois
        group, via the instance's residue -> element dictionary."""
        f = inst.conductor
        m = inst.group.exponent
        powers = {a: chi.power_of_zeta(inst.element_of_residue[a])
                  for a in _units_mod(f)}
        return DirichletCharacter(f, m, powers)

    # -- values --------------------------------------------------------------

    def value_power(self, a: int):
        """Exact power k with psi(a) = zeta_m^k, or None on non-units."""
        return self.powers.get(a % self.modulus)

    def value_numeric(self, a: int):
        """psi(a) at the ambient working precision (0 on non-units)."""
        k = self.value_power(a)
        if k is None:
            return mp.mpf(0)
        if 2 * k % self.m == 0:
            return mp.mpf(1 if k == 0 else -1)
        return mp.expjpi(mp.mpf(2 * k) / self.m)

    # -- structure -----------------------------------------------------------

    @property
    def is_trivial(self) -> bool:
        return all(k == 0 for k in self.powers.values())

    @property
    def is_even(self) -> bool:
        return self.powers[(-1) % self.modulus] == 0

    @property
    def order(self) -> int:
        g = self.m
        for k in self.powers.values():
            g = _gcd(g, k)
        return self.m // g

    @property
    def is_real(self) -> bool:
        return all(2 * k % self.m == 0 for k in self.powers.values())

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.modulus, self.m,
            {a: (-k) % self.m for a, k in self.powers.items()})

    def conductor(self) -> int:
        """Smallest d | f such that the character factors through (Z/d)^x."""
        f = self.modulus
        for d in range(1, f + 1):
            if f % d:
                continue
            if all(self.powers[a] == 0
                   for a in self.powers if a % d == 1 % d):
                return d
        return f  # unreachable: d = f always works

    def is_primitive(self) -> bool:
        return self.conductor() == self.modulus

    def primitive_part(self) -> "DirichletCharacter":
        """The primitive character of modulus cond(psi) inducing psi."""
        d = self.conductor()
        if d == self.modulus:
            return self
        f = self.modulus
        powers = {}
        for a in _units_mod(d):
            b = a
            while _gcd(b, f) != 1:
                b += d
            powers[a] = self.powers[b % f]
        return DirichletCharacter(d, self.m, powers)

    def __eq__(self, other):
        return (isinstance(other, DirichletCharacter)
                and self.modulus == other.modulus
                and self.m == other.m and self.powers == other.powers)

    def __hash__(self):
        return hash((self.modulus, self.m,
                     tuple(sorted(self.powers.items()))))

    def __repr__(self):
        return (f"DirichletCharacter(mod {self.modulus}, "
                f"order {self.order})")


def primitive_part(psi: DirichletCharacter) -> DirichletCharacter:
    return psi.primitive_part()


# -- leading values ------------------------------------------------------------


def l_derivative_at_0(psi: DirichletCharacter, ctx: PrecisionContext):
    """L'(0, psi) for a primitive, even, nontrivial character.

    Finite sum -(1/2) sum_a psi(a) log|1 - zeta_f^a| over the units mod f;
    |1 - zeta_f^a| = 2 sin(pi a / f).  Real characters give a real result.
    """
    if psi.is_trivial:
        raise ValueError("the trivial character has no vanishing at 0; "
                         "its leading value is zeta(0)")
    if not psi.is_even:
        raise ValueError("odd characters vanish to order 0 at s = 0; "
                         "only even characters are supported here")
    if not psi.is_primitive():
        raise ValueError("character must be primitive; take its "
                         "primitive part first")
    f = psi.modulus
    with mp.workdps(ctx.digits + _GUARD):
        total = mp.mpf(0) if psi.is_real else mp.mpc(0)
        for a in _units_mod(f):
            total += psi.value_numeric(a) * mp.log(2 * mp.sin(mp.pi * a / f))
        return -total / 2


def _bare_leading(inst, chi: Character, ctx: PrecisionContext):
    """Leading value at 0 of the primitive L-series attached to chi:
    zeta(0) for the trivial character, L'(0, hat psi) otherwise."""
    if chi.is_trivial():
        with mp.workdps(ctx.digits + _GUARD):
            return mpf_from_q(RIEMANN_ZETA_AT_0)
    psi = DirichletCharacter.from_instance(inst, chi).primitive_part()
    return l_derivative_at_0(psi, ctx)


def l_ST_derivative(inst, chi: Character, ctx: PrecisionContext, ext=None):
    """Leading Taylor coefficient at s = 0 of the S,T-truncated L-series
    of chi, i.e. lim_{s->0} s^{-rho} L_{S,T}(s, chi) at rho = its exact
    vanishing order.

    Euler factors are removed at ALL finite S-places where chi kills the
    inertia group; each such factor contributes (1 - psi(sigma_p)) when
    nonzero and a log(p) derivative when psi(sigma_p) = 1.  T-places
    multiply by (1 - psi(sigma_q) * q) with q the base norm.
    """
    if ext is None:
        ext = inst.ext
    if getattr(inst, "kind", "genuine") != "genuine":
        raise ValueError("truncated L-series need a genuine instance; "
                         "synthetic instances ship their own table")
    m = inst.group.exponent

    rational = Q(1)       # exact product of the nonvanishing multipliers
    logs = []             # one log per vanishing Euler factor

    if chi.is_trivial():
        for p in ext.s_finite:
            logs.append(p.base_norm)
        for q_pl in ext.T:
            rational *= Q(1) - Q(q_pl.base_norm)
        with mp.workdps(ctx.digits + _GUARD):
            acc = mpf_from_q(RIEMANN_ZETA_AT_0 * rational)
            for p in logs:
                acc *= mp.log(p)
        return acc

    psi = DirichletCharacter.from_instance(inst, chi)
    base = l_derivative_at_0(psi.primitive_part(), ctx)
    complex_part = None
    for p in ext.s_finite:
        if not chi.trivial_on(p.inertia):
            continue  # the primitive series already omits this factor
        k = chi.power_of_zeta(p.frobenius)
        if k == 0:
            logs.append(p.base_norm)
        elif 2 * k % m == 0:
            rational *= Q(2)
        else:
            z = mp.expjpi(mp.mpf(2 * k) / m)
            complex_part = (1 - z) if complex_part is None \
                else complex_part * (1 - z)
    for q_pl in ext.T:
        k = chi.power_of_zeta(q_pl.frobenius)
        if 2 * k % m == 0:
            rational *= Q(1) - (Q(1) if k == 0 else Q(-1)) \
                * Q(q_pl.base_norm)
        else:
            z = mp.expjpi(mp.mpf(2 * k) / m)
            term = 1 - z * q_pl.base_norm
            complex_part = term if complex_part is None \
                else complex_part * term
    with mp.workdps(ctx.digits + _GUARD):
        acc = base * mpf_from_q(rational)
        for p in logs:
            acc *= mp.log(p)
        if complex_part is not None:
            acc *= complex_part
    return acc


def omega_K(inst, r: int, ctx: PrecisionContext, ext=None):
    """The bare leading element: sum over the characters with vanishing
    order exactly r of the primitive leading value of the conjugate
    character, times e_chi.

    This is the factor that carries the transcendental content of the
    leading element; the exact Euler/T multipliers are split off so that
    integral identities can treat them as group-ring elements.  Synthetic
    instances ship this table exactly.
    """
    if ext is None:
        ext = inst.ext
    ring = GroupRing(ext.group)
    if getattr(inst, "kind", "genuine") == "synthetic":
        total = ring.zero()
        for powers, val in inst.l_table.items():
            chi = Character(ext.group, powers)
            total = total + ring.idempotent(chi).rational_form().scale(val)
        return total
    values = {}
    for chi in enumerate_characters(ext.group):
        if order_of_vanishing(chi, ext) == r:
            values[chi] = _bare_leading(inst, chi.conj(), ctx)
    return from_char_values(ring, values, ctx)


def stickelberger_leading(inst, r: int, ctx: PrecisionContext, ext=None):
    """Leading element of the S,T-truncated equivariant series at order r:
    the e_chi-coefficient is the truncated leading value of the conjugate
    character when its order is exactly r, and zero when the order
    exceeds r (only the order-r part survives the r-th idempotent)."""
    if ext is None:
        ext = inst.ext
    ring = GroupRing(ext.group)
    if getattr(inst, "kind", "genuine") == "synthetic":
        total = omega_K(inst, r, ctx, ext)
        total = total * delta_T(ring, ext.T)
        for p in ext.s_finite:
            total = total * euler_factor(ring, p)
        return total
    values = {}
    for chi in enumerate_characters(ext.group):
        if order_of_vanishing(chi, ext) == r:
            values[chi] = l_ST_derivative(inst, chi.conj(), ctx, ext)
    return from_char_values(ring, values, ctx)


class LValueTable:
    """Truncated and bare leading values per character, computed lazily
    and cached per precision context."""

    def __init__(self, inst, ctx: PrecisionContext, ext=None):
        self.inst = inst
        self.ctx = ctx
        self.ext = ext if ext is not None else inst.ext
        self._leading = {}
        self._bare = {}

    def order(self, chi: Character) -> int:
        return order_of_vanishing(chi, self.ext)

    def leading(self, chi: Character):
        key = chi.powers
        if key not in self._leading:
            self._leading[key] = l_ST_derivative(
                self.inst, chi, self.ctx, self.ext)
        return self._leading[key]

    def bare(self, chi: Character):
        key = chi.powers
        if key not in self._bare:
            self._bare[key] = _bare_leading(self.inst, chi, self.ctx)
        return self._bare[key]


def zeta_star_product(inst, r: int, ctx: PrecisionContext,
                      regulators: dict, ext=None):
    """Two evaluations of the product of bare leading values over the
    order-r characters.

    (a) the character product itself, and (b) the base-change alternating
    product of zeta*(0) = -h * Reg / 2 over the fixed fields of the
    decomposition spans, with the empty subset contributing the field
    itself.  `regulators` maps frozensets of finite S-labels to the
    corresponding regulator values (the empty frozenset names the top
    field).  Returns (a), (b), and |a - b|.
    """
    if getattr(inst, "kind", "genuine") != "genuine":
        raise ValueError("zeta* comparisons need class numbers and "
                         "regulators; synthetic instances have neither")
    if ext is None:
        ext = inst.ext
    labels = sorted(p.label for p in ext.s_finite)
    with mp.workdps(ctx.digits + _GUARD):
        char_product = mp.mpf(1)
        any_complex = False
        for chi in enumerate_characters(ext.group):
            if order_of_vanishing(chi, ext) == r:
                v = _bare_leading(inst, chi, ctx)
                if isinstance(v, mp.mpc):
                    any_complex = True
                char_product = char_product * v
        if any_complex and abs(char_product.imag) < ctx.tau:
            char_product = char_product.real

        field_product = mp.mpf(1)
        for size in range(len(labels) + 1):
            for J in itertools.combinations(labels, size):
                key = frozenset(J)
                h = inst.class_numbers[key]
                reg = regulators[key]
                star = -mp.mpf(h) * reg / 2
                if size % 2 == 0:
                    field_product *= star
                else:
                    field_product /= star
        diff = abs(char_product - field_product)
    return char_product, field_product, diff
