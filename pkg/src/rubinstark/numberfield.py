"""Exact arithmetic in Q(theta) for a monic integral minimal polynomial.

Elements are polynomials in theta with rational coefficients, reduced mod
the minimal polynomial.  Degrees stay desk-scale (<= 8), so dense tuples
and Gauss/cofactor algorithms are all we need.  Nothing here computes
class groups, unit groups or Galois groups; homomorphisms are applied,
not discovered.
"""

from __future__ import annotations

from mpmath import mp

from .rationals import Q, ZERO, is_rational


def _as_q(x):
    if is_rational(x):
        return Q(x)
    raise TypeError(f"expected a rational scalar, got {type(x).__name__}")


def _poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_divmod(a, b):
    """Quotient and remainder of rational coefficient lists (ascending)."""
    a = _poly_trim(a)
    b = _poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [ZERO] * max(0, len(a) - len(b) + 1)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b):
        k = len(r) - len(b)
        f = r[-1] / lead
        q[k] = f
        for i, bc in enumerate(b):
            r[k + i] -= f * bc
        r = _poly_trim(r)
        if not r:
            break
    return q, r


class NumberField:
    """Q[x]/(m(x)) with m monic and integral.

    Irreducibility is the caller's contract; the arithmetic itself only
    needs m monic.  One shared instance per minimal polynomial.
    """

    _cache: dict = {}

    def __new__(cls, coeffs):
        key = tuple(int(c) for c in coeffs)
        if key in cls._cache:
            return cls._cache[key]
        if len(key) < 2 or key[-1] != 1:
            raise ValueError("minimal polynomial must be monic of degree >= 1")
        self = super().__new__(cls)
        self.minpoly = key
        n = self.degree = len(key) - 1
        # x^k mod m for k = n .. 2n-2, the only powers a product can reach
        table = []
        row = [Q(-c) for c in key[:n]]
        table.append(tuple(row))
        for _ in range(max(0, n - 2)):
            shifted = [ZERO] + list(row[:-1])
            top = row[-1]
            row = [shifted[j] + top * table[0][j] for j in range(n)]
            table.append(tuple(row))
        self._pow_table = tuple(table)
        cls._cache[key] = self
        return self

    def __repr__(self):
        return f"NumberField({list(self.minpoly)})"

    def element(self, coords):
        c = [_as_q(x) for x in coords]
        if len(c) > self.degree:
            raise ValueError("coordinate vector longer than the field degree")
        c += [ZERO] * (self.degree - len(c))
        return NFElement(self, tuple(c))

    def zero(self):
        return self.element([])

    def one(self):
        return self.element([1])

    def gen(self):
        return self.element([0, 1])

    def _reduce(self, coeffs):
        """Reduce an ascending coefficient list of length <= 2n-1."""
        n = self.degree
        out = list(coeffs[:n]) + [ZERO] * max(0, n - len(coeffs))
        for k in range(n, len(coeffs)):
            c = coeffs[k]
            if c == 0:
                continue
            row = self._pow_table[k - n]
            for j in range(n):
                out[j] += c * row[j]
        return NFElement(self, tuple(out))

    def hom(self, gen_image) -> "NFHom":
        """Field map determined by theta |-> gen_image.

        The image must be a root of the minimal polynomial — asserted, so a
        bad table in a data file fails loudly instead of corrupting results.
        """
        if gen_image.field is not self:
            raise ValueError("generator image lives in a different field")
        acc = self.zero()
        for c in reversed(self.minpoly):
            acc = acc * gen_image + self.element([c])
        if not acc.is_zero():
            raise ValueError("claimed generator image is not a root")
        return NFHom(self, gen_image)


class NFHom:
    """Q-algebra endomorphism of a NumberField, applied by Horner."""

    __slots__ = ("field", "gen_image")

    def __init__(self, field, gen_image):
        self.field = field
        self.gen_image = gen_image

    def __call__(self, elt: "NFElement") -> "NFElement":
        if elt.field is not self.field:
            raise ValueError("element belongs to a different field")
        acc = self.field.zero()
        for c in reversed(elt.coords):
            acc = acc * self.gen_image + self.field.element([c])
        return acc

    def compose(self, other: "NFHom") -> "NFHom":
        # (self . other)(x) = self(other(x))
        return NFHom(self.field, self(other.gen_image))


class NFElement:
    __slots__ = ("field", "coords")

    def __init__(self, field, coords):
        self.field = field
        self.coords = coords

    # -- ring structure ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, NFElement):
            if other.field is not self.field:
                raise ValueError("mixed number fields")
            return other
        if is_rational(other):
            return self.field.element([other])
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NFElement(
            self.field, tuple(a + b for a, b in zip(self.coords, o.coords))
        )

    __radd__ = __add__

    def __neg__(self):
        return NFElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = self.field.degree
        prod = [ZERO] * (2 * n - 1)
        for i, a in enumerate(self.coords):
            if a == 0:
                continue
            for j, b in enumerate(o.coords):
                if b == 0:
                    continue
                prod[i + j] += a * b
        return self.field._reduce(prod)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        acc = self.field.one()
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base
            k >>= 1
        return acc

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        # extended Euclid in Q[x]: s*u + t*m = gcd (a nonzero constant)
        m = [Q(c) for c in self.field.minpoly]
        r0, r1 = m, _poly_trim(self.coords)
        s0, s1 = [], [Q(1)]
        while True:
            q, r = _poly_divmod(r0, r1)
            if not r:
                break
            s = list(s0) + [ZERO] * max(0, len(q) + len(s1) - 1 - len(s0))
            for i, qc in enumerate(q):
                if qc == 0:
                    continue
                for j, sc in enumerate(s1):
                    s[i + j] -= qc * sc
            r0, s0, r1, s1 = r1, s1, r, _poly_trim(s)
        if len(r1) != 1:
            raise ZeroDivisionError("element is a zero divisor (m reducible?)")
        c = r1[0]
        return self.field.element([x / c for x in s1])

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coords == o.coords

    def __hash__(self):
        return hash((id(self.field), self.coords))

    def __repr__(self):
        return f"NFElement{self.coords}"

    # -- predicates and invariants ------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def rational_value(self):
        if not self.is_rational():
            raise ValueError("element is irrational")
        return self.coords[0]

    def mult_matrix(self):
        """Rows: coordinates of self * theta^i."""
        rows = []
        cur = self
        gen = self.field.gen()
        for _ in range(self.field.degree):
            rows.append(cur.coords)
            cur = cur * gen
        return rows

    def norm(self):
        return _q_det([list(r) for r in self.mult_matrix()])

    def trace(self):
        rows = self.mult_matrix()
        return sum(rows[i][i] for i in range(self.field.degree))

    def denominator(self) -> int:
        d = 1
        for c in self.coords:
            cd = int(Q(c).denominator)
            d = d * cd // _gcd(d, cd)
        return d

    def numeric(self, theta):
        """Horner evaluation at an mpmath value of theta (caller sets dps)."""
        acc = mp.mpf(0)
        for c in reversed(self.coords):
            q = Q(c)
            acc = acc * theta + mp.mpf(int(q.numerator)) / int(q.denominator)
        return acc


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _q_det(rows):
    """Fraction-free-ish Gauss determinant over rationals, n <= 8."""
    n = len(rows)
    det = Q(1)
    m = [list(r) for r in rows]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            return ZERO
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f == 0:
                continue
            for c in range(col, n):
                m[r][c] -= f * m[col][c]
    return det


def solve_q(rows, target):
    """Coordinates of target in the row span, or None.

    Plain Gauss over Q with an identity tail to recover the combination;
    rows need not be square or independent.
    """
    k = len(rows)
    n = len(rows[0]) if rows else 0
    aug = []
    for i, r in enumerate(rows):
        aug.append([Q(x) for x in r] + [Q(1) if j == i else ZERO for j in range(k)])
    t = [Q(x) for x in target] + [ZERO] * k
    pivots = []
    row = 0
    for col in range(n):
        piv = None
        for r in range(row, k):
            if aug[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        p = aug[row][col]
        aug[row] = [x / p for x in aug[row]]
        for r in range(k):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
        if row == k:
            break
    combo = [ZERO] * k
    for r, col in enumerate(pivots):
        if t[col] != 0:
            f = t[col]
            t = [a - f * b for a, b in zip(t, aug[r])]
            combo = [c + f * b for c, b in zip(combo, aug[r][n:])]
    if any(x != 0 for x in t[:n]):
        return None
    return combo


# -- residue fields ---------------------------------------------------------


def poly_mod_p(coeffs, p):
    return _poly_trim([int(Q(c)) % p for c in coeffs])


def factor_mod(minpoly, p):
    """Monic irreducible factors of the minimal polynomial over F_p.

    Brute trial division by all monic polynomials of increasing degree —
    fine for degree <= 8 and the single-digit p used at T-places.
    """
    rem = [int(c) % p for c in minpoly]
    factors = []
    d = 1
    while len(rem) - 1 >= 1:
        if len(rem) - 1 == 1:
            factors.append(tuple(_monic_scale(rem, p)))
            break
        found = False
        while 2 * d <= len(rem) - 1:
            for cand in _monic_polys(d, p):
                q, r = _poly_divmod_p(rem, list(cand), p)
                if not r:
                    factors.append(cand)
                    rem = q
                    found = True
                    break
            if found:
                break
            d += 1
        if not found:
            # remainder itself is irreducible
            factors.append(tuple(_monic_scale(rem, p)))
            break
    return factors


def _monic_scale(c, p):
    c = [x % p for x in c]
    inv = pow(c[-1], -1, p)
    return [x * inv % p for x in c]


def _monic_polys(d, p):
    """All monic degree-d polynomials over F_p, constant-first."""
    total = p**d
    for code in range(total):
        coeffs = []
        x = code
        for _ in range(d):
            coeffs.append(x % p)
            x //= p
        yield tuple(coeffs + [1])


def _poly_divmod_p(a, b, p):
    a = [x % p for x in a]
    b = [x % p for x in b]
    while a and a[-1] == 0:
        a.pop()
    while b and b[-1] == 0:
        b.pop()
    inv = pow(b[-1], -1, p)
    q = [0] * max(0, len(a) - len(b) + 1)
    r = list(a)
    while len(r) >= len(b):
        k = len(r) - len(b)
        f = r[-1] * inv % p
        q[k] = f
        for i, bc in enumerate(b):
            r[k + i] = (r[k + i] - f * bc) % p
        while r and r[-1] == 0:
            r.pop()
    return q, r


class ResidueField:
    """F_p[y]/(g(y)) for a monic irreducible factor g of the minimal
    polynomial mod p.  Used for multiplicative congruence conditions at
    unramified places whose residue degree is deg g.

    Only valid when p does not divide the index [O_K : Z[theta]] — the
    loader asserts that before constructing one.
    """

    def __init__(self, p, g):
        self.p = p
        self.g = tuple(int(x) % p for x in g)
        self.f = len(g) - 1
        self.order = p**self.f - 1

    def reduce(self, elt: NFElement):
        """Image of a p-integral element, as a coefficient tuple."""
        p = self.p
        coeffs = []
        for c in elt.coords:
            q = Q(c)
            den = int(q.denominator)
            if den % p == 0:
                raise ValueError(f"element is not integral at {p}")
            coeffs.append(int(q.numerator) % p * pow(den, -1, p) % p)
        _, r = _poly_divmod_p(coeffs, list(self.g), p)
        return tuple(r + [0] * (self.f - len(r)))

    def one(self):
        return tuple([1] + [0] * (self.f - 1))

    def mul(self, a, b):
        p = self.p
        prod = [0] * (2 * self.f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % p
        _, r = _poly_divmod_p(prod, list(self.g), p)
        return tuple(r + [0] * (self.f - len(r)))

    def pow(self, a, k):
        k %= self.order
        acc = self.one()
        base = a
        while k:
            if k & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            k >>= 1
        return acc

    def is_zero(self, a):
        return all(x % self.p == 0 for x in a)

    def generator(self):
        """A generator of the cyclic unit group, by search (order <= 2400)."""
        for code in range(1, self.p**self.f):
            cand = []
            x = code
            for _ in range(self.f):
                cand.append(x % self.p)
                x //= self.p
            cand = tuple(cand)
            if self._order(cand) == self.order:
                return cand
        raise RuntimeError("no generator found (g not irreducible?)")

    def _order(self, a):
        acc = a
        for k in range(1, self.order + 1):
            if acc == self.one():
                return k
            acc = self.mul(acc, a)
        return 0

    def dlog(self, a, gen):
        """Discrete log base gen, brute force over the full unit group."""
        acc = self.one()
        for k in range(self.order):
            if acc == a:
                return k
            acc = self.mul(acc, gen)
        raise ValueError("element is zero mod p (not a unit)")
