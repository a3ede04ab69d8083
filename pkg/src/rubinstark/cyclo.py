"""Exact arithmetic in Q(zeta_m).

Elements are dense rational coefficient vectors against the power basis
1, zeta, ..., zeta^{phi(m)-1}, reduced mod the m-th cyclotomic polynomial.
All character-value computations in the package flow through this module;
numeric evaluation happens only on demand at caller-chosen precision.
"""

from __future__ import annotations

import mpmath as mp

from .rationals import ONE, ZERO, Q

# -- rational polynomial helpers (ascending coefficients, exact) ------------


def _poly_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(a, b):
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y != 0:
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_divmod(a, b):
    a = _poly_trim(list(a))
    q = [ZERO] * max(1, len(a) - len(b) + 1)
    inv_lead = ONE / b[-1]
    while len(a) >= len(b) and _poly_trim(a):
        if len(a) < len(b):
            break
        c = a[-1] * inv_lead
        d = len(a) - len(b)
        q[d] = c
        for i, y in enumerate(b):
            a[d + i] -= c * y
        _poly_trim(a)
    return _poly_trim(q), _poly_trim(a)


_cyclo_cache: dict = {}


def cyclotomic_poly(m: int):
    """Coefficients of the m-th cyclotomic polynomial, ascending, monic."""
    if m in _cyclo_cache:
        return _cyclo_cache[m]
    p = [-ONE] + [ZERO] * (m - 1) + [ONE]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            p, rem = _poly_divmod(p, cyclotomic_poly(d))
            assert not rem
    _cyclo_cache[m] = [Q(c) for c in p]
    return _cyclo_cache[m]


class CycloField:
    """Q(zeta_m) with cached power-reduction tables."""

    _instances: dict = {}

    def __new__(cls, m: int):
        if m not in cls._instances:
            inst = super().__new__(cls)
            inst._init(m)
            cls._instances[m] = inst
        return cls._instances[m]

    def _init(self, m: int):
        self.m = m
        self.poly = cyclotomic_poly(m)
        self.degree = len(self.poly) - 1
        d = self.degree
        # x^t mod Phi_m for all t needed by products (t < 2d-1) and Galois
        # substitution (t < m)
        table = [[ZERO] * d for _ in range(max(m, 2 * d))]
        cur = [ZERO] * d
        cur[0] = ONE
        table[0] = cur[:]
        for t in range(1, len(table)):
            nxt = [ZERO] + cur[: d - 1]
            lead = cur[d - 1]
            if lead != 0:
                for i in range(d):
                    nxt[i] -= lead * self.poly[i]
            cur = nxt
            table[t] = cur[:]
        self._pow = table

    def zero(self) -> "CycloNum":
        return CycloNum(self, (ZERO,) * self.degree)

    def one(self) -> "CycloNum":
        return self.rational(ONE)

    def rational(self, q) -> "CycloNum":
        c = [ZERO] * self.degree
        c[0] = Q(q)
        return CycloNum(self, tuple(c))

    def zeta(self, j: int = 1) -> "CycloNum":
        """zeta_m^j."""
        return CycloNum(self, tuple(self._pow[j % self.m]))

    def from_coeffs(self, coeffs) -> "CycloNum":
        c = [Q(x) for x in coeffs]
        if len(c) > self.degree:
            raise ValueError("coefficient vector too long")
        c += [ZERO] * (self.degree - len(c))
        return CycloNum(self, tuple(c))

    def __repr__(self):
        return f"CycloField(zeta_{self.m})"


class CycloNum:
    __slots__ = ("field", "c")

    def __init__(self, field: CycloField, coeffs: tuple):
        self.field = field
        self.c = coeffs

    def _coerce(self, other):
        if isinstance(other, CycloNum):
            if other.field is not self.field:
                raise ValueError("mixed cyclotomic fields")
            return other
        return self.field.rational(other)

    def __add__(self, other):
        o = self._coerce(other)
        return CycloNum(self.field, tuple(a + b for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return CycloNum(self.field, tuple(a - b for a, b in zip(self.c, o.c)))

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __neg__(self):
        return CycloNum(self.field, tuple(-a for a in self.c))

    def __mul__(self, other):
        if not isinstance(other, CycloNum):
            q = Q(other)
            return CycloNum(self.field, tuple(a * q for a in self.c))
        o = self._coerce(other)
        d = self.field.degree
        conv = [ZERO] * (2 * d - 1)
        for i, x in enumerate(self.c):
            if x == 0:
                continue
            for j, y in enumerate(o.c):
                if y != 0:
                    conv[i + j] += x * y
        out = list(conv[:d])
        pow_table = self.field._pow
        for t in range(d, 2 * d - 1):
            ct = conv[t]
            if ct != 0:
                red = pow_table[t]
                for i in range(d):
                    out[i] += ct * red[i]
        return CycloNum(self.field, tuple(out))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, CycloNum):
            return self.field is other.field and self.c == other.c
        try:
            return self.c == self._coerce(other).c
        except (ValueError, TypeError):
            return NotImplemented

    def __hash__(self):
        return hash((self.field.m, self.c))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.c)

    def is_rational(self) -> bool:
        return all(a == 0 for a in self.c[1:])

    def rational_value(self):
        if not self.is_rational():
            raise ValueError(f"not rational: {self}")
        return self.c[0]

    def galois(self, k: int) -> "CycloNum":
        """Image under zeta -> zeta^k, gcd(k, m) = 1."""
        m = self.field.m
        from math import gcd

        if gcd(k, m) != 1:
            raise ValueError(f"zeta -> zeta^{k} is not a field map mod {m}")
        d = self.field.degree
        out = [ZERO] * d
        pow_table = self.field._pow
        for j, a in enumerate(self.c):
            if a != 0:
                red = pow_table[(j * k) % m]
                for i in range(d):
                    out[i] += a * red[i]
        return CycloNum(self.field, tuple(out))

    def conj(self) -> "CycloNum":
        if self.field.m <= 2:
            return self
        return self.galois(self.field.m - 1)

    def inverse(self) -> "CycloNum":
        if self.is_zero():
            raise ZeroDivisionError("cyclotomic zero has no inverse")
        # extended Euclid in Q[x] against the (irreducible) minimal polynomial
        a = _poly_trim(list(self.c))
        b = list(self.field.poly)
        s0, s1 = [ONE], []
        r0, r1 = a, b
        while r1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1) if q and s1 else [])
        # r0 = gcd = nonzero constant
        assert len(r0) == 1, "minimal polynomial not coprime to element"
        inv_const = ONE / r0[0]
        s = [x * inv_const for x in s0]
        # reduce mod Phi_m
        _, rem = _poly_divmod(s, self.field.poly)
        return self.field.from_coeffs(rem)

    def numeric(self, dps: int = 50):
        """Complex value at zeta_m = exp(2 pi i / m), dps decimal digits."""
        with mp.workdps(dps):
            m = self.field.m
            total = mp.mpc(0)
            for j, a in enumerate(self.c):
                if a != 0:
                    arg = mp.mpf(2 * j) / m
                    scale = mp.mpf(int(a.numerator)) / int(a.denominator)
                    total += scale * mp.expjpi(arg)
            return total

    def __repr__(self):
        terms = []
        for j, a in enumerate(self.c):
            if a != 0:
                terms.append(f"{a}*z^{j}" if j else f"{a}")
        return "CycloNum(%s; m=%d)" % (" + ".join(terms) or "0", self.field.m)


def _poly_sub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else ZERO) - (b[i] if i < len(b) else ZERO) for i in range(n)]
    return _poly_trim(out)
