"""Exact lattices, generalized indices, Tate H^0, semisimplification, and
exterior powers over the group ring, including the saturated wedge lattice.

Conventions: lattice elements are row vectors in Q^n; a group element g acts
on the ambient space by v |-> v @ A_g.  The generalized index of two lattices
spanning the same subspace is (M : N) = |det gamma| for any linear gamma on
the span with gamma(M) = N; it is an exact positive rational in Q mode, a
positive real in R mode, and p^{v_p(det gamma)} in Q_p mode.

Exterior powers over Z[G] are computed in evaluation coordinates: a G-hom
M -> Z[G] is determined by its identity-coefficient functional, so the dual
basis f_1..f_k of a Z-basis of M lifts to a basis phi_{f_j} of the hom
module, and the wedge pairings

    Phi_J(m_1 ^ ... ^ m_r) = det( phi_{f_{j_a}}(m_b) )_{a,b}  in  Z[G]

embed the r-th exterior power over Q[G] into a direct sum of copies of Q[G]
indexed by r-subsets J.  The integrality conditions defining the dual wedge
lattice become exactly "all coordinates integral", i.e. saturation.
"""

from __future__ import annotations

from itertools import combinations
from math import comb, gcd

import mpmath as mp

from . import _kernels
from .groupring import GroupRing, GroupRingElement, PrecisionContext, mpf_from_q
from .groups import FiniteAbelianGroup, Subgroup, rational_orbits
from .rationals import Q

# -- exact matrix/vector helpers (row-vector convention) ---------------------


def _qrow(row, n=None):
    out = tuple(Q(x) for x in row)
    if n is not None and len(out) != n:
        raise ValueError(f"row length {len(out)} != ambient dimension {n}")
    return out


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _den_lcm(rows) -> int:
    d = 1
    for row in rows:
        for x in row:
            d = _lcm(d, int(x.denominator))
    return d


def _int_rows(rows):
    """(integer matrix, denominator d) with rows = int_rows / d."""
    d = _den_lcm(rows)
    return [[int(x * d) for x in row] for row in rows], d


def q_identity(n):
    return [[Q(1) if i == j else Q(0) for j in range(n)] for i in range(n)]


def q_mat_mul(A, B):
    n = len(A)
    p = len(B[0]) if B else 0
    out = [[Q(0)] * p for _ in range(n)]
    for i, row in enumerate(A):
        oi = out[i]
        for t, a in enumerate(row):
            if a == 0:
                continue
            bt = B[t]
            for j in range(p):
                if bt[j] != 0:
                    oi[j] += a * bt[j]
    return out


def q_vec_mat(v, A):
    n = len(A[0]) if A else 0
    out = [Q(0)] * n
    for t, a in enumerate(v):
        if a == 0:
            continue
        At = A[t]
        for j in range(n):
            if At[j] != 0:
                out[j] += a * At[j]
    return tuple(out)


def q_det(A):
    """Determinant of a square matrix with rational entries (exact)."""
    n = len(A)
    if n == 0:
        return Q(1)
    scale = Q(1)
    int_rows = []
    for row in A:
        d = 1
        for x in row:
            d = _lcm(d, int(x.denominator))
        scale = scale * d
        int_rows.append([int(x * d) for x in row])
    return Q(_kernels.det_int(int_rows)) / scale


def _q_mat_eq(A, B) -> bool:
    return len(A) == len(B) and all(
        ra == rb for ra, rb in zip(map(tuple, A), map(tuple, B))
    )


# -- lattice types -----------------------------------------------------------


class RationalLattice:
    """Z-span of finitely many rational row vectors in Q^n.

    The cached basis is the (row-style) Hermite normal form of the
    generators, rescaled back to the rational ambient; pivot columns make
    exact membership and coordinate solves a single back-substitution.
    """

    def __init__(self, n: int, generators):
        self.n = int(n)
        gens = [_qrow(row, self.n) for row in generators]
        self._gens = tuple(gens)
        if gens and self.n > 0:
            int_rows, d = _int_rows(gens)
            H, _, pivots = _kernels.hnf(int_rows)
            self._pivots = tuple(pivots)
            self._basis = tuple(
                tuple(Q(x, d) for x in H[i]) for i in range(len(pivots))
            )
        else:
            self._pivots = ()
            self._basis = ()

    @staticmethod
    def standard(n: int) -> "RationalLattice":
        return RationalLattice(n, q_identity(n))

    @property
    def rank(self) -> int:
        return len(self._basis)

    @property
    def basis(self):
        return self._basis

    @property
    def pivots(self):
        return self._pivots

    def coords(self, v):
        """Exact coordinates of v against the basis, or None if v is
        outside the Q-span."""
        res = list(_qrow(v, self.n))
        cs = []
        for row, p in zip(self._basis, self._pivots):
            c = res[p] / row[p]
            cs.append(c)
            if c != 0:
                for j in range(p, self.n):
                    if row[j] != 0:
                        res[j] -= c * row[j]
        if any(x != 0 for x in res):
            return None
        return tuple(cs)

    def contains(self, v) -> bool:
        cs = self.coords(v)
        return cs is not None and all(int(c.denominator) == 1 for c in cs)

    def in_span(self, v) -> bool:
        return self.coords(v) is not None

    def integer_basis(self):
        """(integer row matrix, denominator) with basis = rows / den."""
        if not self._basis:
            return [], 1
        return _int_rows(self._basis)

    def __eq__(self, other):
        return (
            isinstance(other, RationalLattice)
            and self.n == other.n
            and self._basis == other._basis
        )

    def __hash__(self):
        return hash((self.n, self._basis))

    def __repr__(self):
        return f"RationalLattice(n={self.n}, rank={self.rank})"


class RealLattice:
    """Numeric lattice: independent generator rows at a working precision."""

    def __init__(self, n: int, rows, ctx: PrecisionContext):
        self.n = int(n)
        self.ctx = ctx
        with ctx.workdps():
            self.rows = [[mp.mpf(x) for x in row] for row in rows]
            for row in self.rows:
                if len(row) != self.n:
                    raise ValueError("row length != ambient dimension")
            frame, rejected = _orthonormal_frame(self.rows, ctx)
            if rejected:
                raise ValueError("generators are numerically dependent")
            self._frame = frame

    @property
    def rank(self) -> int:
        return len(self.rows)

    def __repr__(self):
        return f"RealLattice(n={self.n}, rank={self.rank})"


def _orthonormal_frame(rows, ctx: PrecisionContext):
    """Modified Gram-Schmidt; returns (frame vectors, count of dropped rows).

    A row is dropped when its residual against the accepted frame falls
    below tau * scale, i.e. it is numerically dependent.
    """
    scale = max([mp.mpf(1)] + [mp.norm(mp.matrix(r)) for r in rows])
    frame = []
    rejected = 0
    for row in rows:
        v = [mp.mpf(x) for x in row]
        for f in frame:
            c = mp.fsum(a * b for a, b in zip(v, f))
            v = [a - c * b for a, b in zip(v, f)]
        nv = mp.sqrt(mp.fsum(a * a for a in v))
        if nv <= ctx.tau * scale:
            rejected += 1
            continue
        frame.append([a / nv for a in v])
    return frame, rejected


class GModuleLattice:
    """A G-stable rational lattice with an exact ambient G-action.

    The action is given by one matrix per invariant-factor generator of the
    group; construction verifies the group relations (orders, commutativity)
    exactly and that every basis vector stays in the lattice under every
    generator.
    """

    def __init__(self, group: FiniteAbelianGroup, lattice: RationalLattice,
                 gen_actions):
        self.group = group
        self.lattice = lattice
        n = lattice.n
        acts = []
        for A in gen_actions:
            M = [list(_qrow(row, n)) for row in A]
            if len(M) != n:
                raise ValueError("action matrix is not n x n")
            acts.append(M)
        if len(acts) != group.rank:
            raise ValueError("one action matrix per group generator required")
        self.gen_actions = acts
        ident = q_identity(n)
        for A, d in zip(acts, group.invariant_factors):
            P = ident
            for _ in range(d):
                P = q_mat_mul(P, A)
            if not _q_mat_eq(P, ident):
                raise ValueError("action matrix violates its generator order")
        for i in range(len(acts)):
            for j in range(i + 1, len(acts)):
                if not _q_mat_eq(
                    q_mat_mul(acts[i], acts[j]), q_mat_mul(acts[j], acts[i])
                ):
                    raise ValueError("action matrices do not commute")
        for b in lattice.basis:
            for A in acts:
                if not lattice.contains(q_vec_mat(b, A)):
                    raise ValueError("lattice is not stable under the action")
        self._elt_matrices = {group.identity: ident}

    @property
    def rank(self) -> int:
        return self.lattice.rank

    def action_matrix(self, g):
        g = self.group.reduce(g)
        if g in self._elt_matrices:
            return self._elt_matrices[g]
        M = q_identity(self.lattice.n)
        for e, A in zip(g, self.gen_actions):
            for _ in range(e):
                M = q_mat_mul(M, A)
        self._elt_matrices[g] = M
        return M

    def act(self, v, g):
        return q_vec_mat(_qrow(v, self.lattice.n), self.action_matrix(g))

    def ring_matrix(self, x: GroupRingElement):
        """Ambient matrix of a rational group-ring element."""
        x = x.rational_form()
        if x.ring.group != self.group:
            raise ValueError("group-ring element for a different group")
        n = self.lattice.n
        out = [[Q(0)] * n for _ in range(n)]
        for idx, g in enumerate(x.ring.elements):
            c = x.coeffs[idx]
            if c == 0:
                continue
            A = self.action_matrix(g)
            for i in range(n):
                Ai = A[i]
                oi = out[i]
                for j in range(n):
                    if Ai[j] != 0:
                        oi[j] += c * Ai[j]
        return out

    def ring_image(self, x: GroupRingElement) -> RationalLattice:
        """The lattice generated by (basis of M) . x."""
        E = self.ring_matrix(x)
        return RationalLattice(
            self.lattice.n, [q_vec_mat(b, E) for b in self.lattice.basis]
        )

    def induced_coordinate_matrix(self, g):
        """Integer matrix of g on basis coordinates (rows = images)."""
        rows = []
        for b in self.lattice.basis:
            cs = self.lattice.coords(self.act(b, g))
            assert cs is not None
            rows.append([int(c) for c in cs])
        return rows

    def with_lattice(self, lattice: RationalLattice) -> "GModuleLattice":
        return GModuleLattice(self.group, lattice, self.gen_actions)

    def __repr__(self):
        return (
            f"GModuleLattice({self.group!r}, n={self.lattice.n}, "
            f"rank={self.rank})"
        )


# -- generalized index --------------------------------------------------------


def _as_lattice(L):
    return L.lattice if isinstance(L, GModuleLattice) else L


def sinnott_index(M, N, mode: str = "Q", p: int = None,
                  ctx: PrecisionContext = None):
    """Generalized index (M : N) of two lattices spanning the same space.

    mode "Q": exact positive rational.  mode "Qp": p^{v_p(index)} for the
    given prime p.  mode "R": positive real at ctx's precision, inputs may
    be RealLattice or exact lattices.  Rank-0 common span gives 1.
    """
    if mode == "Q" or mode == "Qp":
        M, N = _as_lattice(M), _as_lattice(N)
        idx = _rational_index(M, N)
        if mode == "Q":
            return idx
        if p is None or p < 2:
            raise ValueError("Qp mode requires a prime p")
        v = _p_valuation(idx, p)
        return Q(p) ** v if v >= 0 else Q(1, p ** (-v))
    if mode == "R":
        if ctx is None:
            ctx = PrecisionContext()
        return _real_index(M, N, ctx)
    raise ValueError(f"unknown index mode: {mode!r}")


def _rational_index(M: RationalLattice, N: RationalLattice):
    if M.n != N.n or M.rank != N.rank:
        raise ValueError("incomparable lattices")
    if M.rank == 0:
        return Q(1)
    rows = []
    for b in N.basis:
        cs = M.coords(b)
        if cs is None:
            raise ValueError("incomparable lattices")
        rows.append(list(cs))
    d = q_det(rows)
    if d == 0:
        # equal rank and N inside span(M) with zero determinant cannot
        # happen for genuine lattices; guard against degenerate input
        raise ValueError("incomparable lattices")
    return abs(d)


def _p_valuation(q, p: int) -> int:
    num, den = int(q.numerator), int(q.denominator)
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _real_rows(L):
    if isinstance(L, RealLattice):
        return [[mp.mpf(x) for x in row] for row in L.rows], L.n
    L = _as_lattice(L)
    return [[mpf_from_q(x) for x in row] for row in L.basis], L.n


def _real_index(M, N, ctx: PrecisionContext):
    with ctx.workdps():
        rows_m, nm = _real_rows(M)
        rows_n, nn = _real_rows(N)
        if nm != nn or len(rows_m) != len(rows_n):
            raise ValueError("incomparable lattices")
        if not rows_m:
            return mp.mpf(1)
        scale = max(
            [mp.mpf(1)]
            + [mp.norm(mp.matrix(r)) for r in rows_m + rows_n]
        )
        frame, rejected = _orthonormal_frame(rows_m, ctx)
        if rejected:
            raise ValueError("precision exhausted")
        for row in rows_n:
            v = [mp.mpf(x) for x in row]
            for f in frame:
                c = mp.fsum(a * b for a, b in zip(v, f))
                v = [a - c * b for a, b in zip(v, f)]
            if mp.sqrt(mp.fsum(a * a for a in v)) > ctx.tau * scale:
                raise ValueError("incomparable lattices")
        k = len(frame)
        pm = mp.matrix(
            [[mp.fsum(a * b for a, b in zip(r, f)) for f in frame]
             for r in rows_m]
        )
        pn = mp.matrix(
            [[mp.fsum(a * b for a, b in zip(r, f)) for f in frame]
             for r in rows_n]
        )
        dm, dn = mp.det(pm), mp.det(pn)
        if abs(dm) <= (ctx.tau * max(mp.mpf(1), scale)) ** k:
            raise ValueError("precision exhausted")
        return abs(dn) / abs(dm)


# -- Tate H^0 and semisimplification ------------------------------------------


def tate_h0(H: Subgroup, M: GModuleLattice) -> int:
    """Order of M^H / N_H M, computed exactly on basis coordinates."""
    k = M.rank
    if k == 0:
        return 1
    stacked = [[0] * 0 for _ in range(k)]
    for h in H.generators:
        C = M.induced_coordinate_matrix(h)
        for i in range(k):
            stacked[i].extend(
                C[i][j] - (1 if i == j else 0) for j in range(k)
            )
    if stacked[0]:
        # row vectors c with c . (C_h - I) = 0 for all generators h
        fixed_rows = _kernels.int_kernel(
            [[stacked[i][j] for i in range(k)] for j in range(len(stacked[0]))]
        )
    else:
        fixed_rows = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    norm_rows = [[0] * k for _ in range(k)]
    for h in sorted(H.element_set):
        C = M.induced_coordinate_matrix(h)
        for i in range(k):
            for j in range(k):
                norm_rows[i][j] += C[i][j]
    idx = _rational_index(
        RationalLattice(k, fixed_rows), RationalLattice(k, norm_rows)
    )
    assert int(idx.denominator) == 1, "norm image not inside the fixed part"
    return int(idx)


def semisimplify(M: GModuleLattice):
    """(S(M), (S(M) : M)): the smallest completely decomposable overmodule.

    S(M) is the sum of the rational-orbit idempotent images e.M; the index
    is an exact rational dividing |G|^rank.
    """
    ring = GroupRing(M.group)
    gens = []
    for orbit in rational_orbits(M.group):
        E = M.ring_matrix(ring.orbit_idempotent(orbit))
        for b in M.lattice.basis:
            gens.append(q_vec_mat(b, E))
    S = GModuleLattice(
        M.group, RationalLattice(M.lattice.n, gens), M.gen_actions
    )
    return S, _rational_index(S.lattice, M.lattice)


# -- exterior powers over the group ring --------------------------------------


def _gr_det(rows):
    """Determinant of a small square matrix over a commutative group ring."""
    n = len(rows)
    if n == 0:
        raise ValueError("empty determinant")
    if n == 1:
        return rows[0][0]
    ring = rows[0][0].ring
    total = ring.zero()
    for t in range(n):
        minor = [row[:t] + row[t + 1 :] for row in rows[1:]]
        term = rows[0][t] * _gr_det(minor)
        total = total + term if t % 2 == 0 else total - term
    return total


def _regular_rep_matrix(ring: GroupRing, x: GroupRingElement):
    """|G| x |G| matrix of left multiplication by x on coefficient rows."""
    x = x.rational_form()
    n = ring.n
    table, inv = ring.mult_table, ring.inv_index
    return [
        [x.coeffs[table[s][inv[r]]] for s in range(n)] for r in range(n)
    ]


class WedgeSpace:
    """The degree-r exterior power of a G-module lattice over the group
    ring, realized in evaluation coordinates.

    Coordinates are indexed by (J, tau): J an r-subset of the dual basis,
    tau a group element; the block for a fixed J carries the regular
    representation.  `image` is the lattice generated by the wedges of
    lattice basis vectors and their G-translates.
    """

    def __init__(self, module: GModuleLattice, degree: int, subsets,
                 ring: GroupRing, gen_rows, gen_tags, image: RationalLattice,
                 isotypic, multiplicities):
        self.module = module
        self.degree = degree
        self.subsets = subsets
        self.ring = ring
        self.gen_rows = gen_rows
        self.gen_tags = gen_tags
        self.image = image
        self.isotypic = isotypic
        self.multiplicities = multiplicities

    @property
    def ambient_dim(self) -> int:
        return len(self.subsets) * self.ring.n

    def apply_ring(self, x: GroupRingElement, rows):
        """Image of ev-coordinate rows under the group-ring element x."""
        R = _regular_rep_matrix(self.ring, x)
        n = self.ring.n
        out = []
        for row in rows:
            new = [Q(0)] * len(row)
            for b in range(len(self.subsets)):
                off = b * n
                for r in range(n):
                    c = row[off + r]
                    if c == 0:
                        continue
                    Rr = R[r]
                    for s in range(n):
                        if Rr[s] != 0:
                            new[off + s] += c * Rr[s]
            out.append(tuple(new))
        return out

    def translate(self, g, row):
        """Coordinates of g . x from the coordinates of x."""
        ginv = self.ring.index[self.ring.group.inverse(g)]
        table = self.ring.mult_table
        n = self.ring.n
        out = [Q(0)] * len(row)
        for b in range(len(self.subsets)):
            off = b * n
            for t in range(n):
                out[off + t] = row[off + table[ginv][t]]
        return tuple(out)

    def gen_action_matrices(self):
        """Ambient matrices of the group generators on ev coordinates."""
        n = self.ring.n
        nblocks = len(self.subsets)
        N = nblocks * n
        mats = []
        for i in range(self.module.group.rank):
            g = tuple(
                1 if j == i else 0 for j in range(self.module.group.rank)
            )
            R = _regular_rep_matrix(self.ring, self.ring.basis(g))
            A = [[Q(0)] * N for _ in range(N)]
            for b in range(nblocks):
                off = b * n
                for r in range(n):
                    for s in range(n):
                        if R[r][s] != 0:
                            A[off + r][off + s] = R[r][s]
            mats.append(A)
        return mats

    def __repr__(self):
        return (
            f"WedgeSpace(degree={self.degree}, blocks={len(self.subsets)}, "
            f"rank={self.image.rank})"
        )


def wedge_image(M: GModuleLattice, r: int) -> WedgeSpace:
    """Evaluation-coordinate model of the r-th exterior power over Z[G].

    Builds the pairing table phi_{f_j}(b_i) = sum_sigma coord_j(sigma.b_i)
    sigma^{-1}, the determinant coordinates for every r-subset J, and the
    image lattice spanned by G-translates of basis wedges.  Isotypic
    components and their multiplicities are computed and the dimension
    count sum_O binom(m_O, r) |O| is checked against the actual rank.
    """
    if r < 1:
        raise ValueError("wedge degree must be >= 1")
    ring = GroupRing(M.group)
    k = M.rank
    nG = ring.n
    subsets = tuple(combinations(range(k), r))
    N = len(subsets) * nG

    # integer coordinates of sigma . b_i against the basis
    P = []
    for b in M.lattice.basis:
        per_sigma = []
        for g in ring.elements:
            cs = M.lattice.coords(M.act(b, g))
            assert cs is not None
            per_sigma.append([int(c) for c in cs])
        P.append(per_sigma)

    # phi[j][i] = phi_{f_j}(b_i) as an exact group-ring element
    phi = [[None] * k for _ in range(k)]
    for j in range(k):
        for i in range(k):
            co = [Q(0)] * nG
            for s in range(nG):
                co[ring.inv_index[s]] += Q(P[i][s][j])
            phi[j][i] = ring.from_coeffs(co)

    gen_rows = []
    gen_tags = []
    for I in combinations(range(k), r):
        row = [Q(0)] * N
        for bidx, J in enumerate(subsets):
            det = _gr_det([[phi[j][i] for i in I] for j in J])
            off = bidx * nG
            for t in range(nG):
                row[off + t] = det.coeffs[t]
        base = tuple(row)
        ws_row_cache = {}
        for g in ring.elements:
            ginv = ring.index[M.group.inverse(g)]
            table = ring.mult_table
            out = [Q(0)] * N
            for b in range(len(subsets)):
                off = b * nG
                for t in range(nG):
                    out[off + t] = base[off + table[ginv][t]]
            key = tuple(out)
            if key in ws_row_cache:
                continue
            ws_row_cache[key] = True
            gen_rows.append(key)
            gen_tags.append((I, g))

    image = RationalLattice(N, gen_rows)
    ws = WedgeSpace(
        M, r, subsets, ring, tuple(gen_rows), tuple(gen_tags), image,
        isotypic={}, multiplicities={},
    )

    # isotypic decomposition and the dimension count
    total = 0
    for orbit in rational_orbits(M.group):
        e = ring.orbit_idempotent(orbit)
        amb = M.ring_image(e)
        dim_w = orbit.size
        assert amb.rank % dim_w == 0
        mult = amb.rank // dim_w
        comp = RationalLattice(N, ws.apply_ring(e, image.basis))
        expected = comb(mult, r) * dim_w if mult >= r else 0
        assert comp.rank == expected, "isotypic dimension count failed"
        total += expected
        ws.multiplicities[orbit.representative.powers] = mult
        ws.isotypic[orbit.representative.powers] = comp
    assert image.rank == total, "wedge rank != isotypic dimension count"
    return ws


def rubin_from_wedge(ws: WedgeSpace) -> GModuleLattice:
    """Saturation of the wedge image inside the integral coordinate lattice:
    exactly the vectors all of whose evaluation pairings are integral."""
    N = ws.ambient_dim
    if ws.image.rank == 0:
        lat = RationalLattice(N, [])
    else:
        rows, den = ws.image.integer_basis()
        assert den == 1, "wedge image must have integer coordinates"
        relations = _kernels.int_kernel(rows)
        if relations:
            sat = _kernels.int_kernel(relations)
        else:
            sat = [
                [1 if i == j else 0 for j in range(N)] for i in range(N)
            ]
        lat = RationalLattice(N, sat)
    return GModuleLattice(ws.module.group, lat, ws.gen_action_matrices())


def rubin_lattice(M: GModuleLattice, r: int) -> GModuleLattice:
    """The dual-wedge lattice: all rational wedge vectors with integral
    evaluation pairings; contains the wedge image with finite index."""
    return rubin_from_wedge(wedge_image(M, r))


def rubin_vs_wedge_index(M: GModuleLattice, r: int, e: GroupRingElement):
    """(e . dual-wedge lattice : e . wedge image), an exact positive
    rational.  e must be an exact idempotent."""
    if not (e.is_exact() and e * e == e):
        raise ValueError("e is not an exact idempotent")
    ws = wedge_image(M, r)
    rub = rubin_from_wedge(ws)
    N = ws.ambient_dim
    left = RationalLattice(N, ws.apply_ring(e, rub.lattice.basis))
    right = RationalLattice(N, ws.apply_ring(e, ws.image.basis))
    return sinnott_index(left, right, "Q")


def wedge_transport(ws_src: WedgeSpace, ws_dst: WedgeSpace):
    """Images of the source wedge-image basis inside the destination's
    evaluation coordinates, for a source module contained in the
    destination module (same ambient space, same group, same degree).

    Returns a list of rows, one per source image-basis vector.
    """
    Ms, Md = ws_src.module, ws_dst.module
    if (
        ws_src.degree != ws_dst.degree
        or Ms.group != Md.group
        or Ms.lattice.n != Md.lattice.n
    ):
        raise ValueError("incompatible wedge spaces")
    for b in Ms.lattice.basis:
        if not Md.lattice.contains(b):
            raise ValueError("source module is not inside the destination")
    ring = ws_dst.ring
    nG = ring.n
    r = ws_src.degree
    kd = Md.rank
    subsets_d = ws_dst.subsets
    Nd = ws_dst.ambient_dim

    P = []
    for b in Ms.lattice.basis:
        per_sigma = []
        for g in ring.elements:
            cs = Md.lattice.coords(Ms.act(b, g))
            assert cs is not None
            per_sigma.append([int(c) for c in cs])
        P.append(per_sigma)
    phi = [[None] * Ms.rank for _ in range(kd)]
    for j in range(kd):
        for i in range(Ms.rank):
            co = [Q(0)] * nG
            for s in range(nG):
                co[ring.inv_index[s]] += Q(P[i][s][j])
            phi[j][i] = ring.from_coeffs(co)

    def ev_dst(I):
        row = [Q(0)] * Nd
        for bidx, J in enumerate(subsets_d):
            det = _gr_det([[phi[j][i] for i in I] for j in J])
            off = bidx * nG
            for t in range(nG):
                row[off + t] = det.coeffs[t]
        return tuple(row)

    ev_cache = {}
    gen_images = []
    for I, g in ws_src.gen_tags:
        if I not in ev_cache:
            ev_cache[I] = ev_dst(I)
        gen_images.append(ws_dst.translate(g, ev_cache[I]))

    # source image basis rows as integer combinations of the generators
    src_rows, den = ws_src.image.integer_basis()
    assert den == 1
    gen_int = [[int(x) for x in row] for row in ws_src.gen_rows]
    out = []
    for row in src_rows:
        combo = _solve_integer_combination(gen_int, row)
        img = [Q(0)] * Nd
        for c, gi in zip(combo, gen_images):
            if c:
                for t in range(Nd):
                    if gi[t] != 0:
                        img[t] += c * gi[t]
        out.append(tuple(img))
    return out


def _solve_integer_combination(rows, target):
    """Integer coefficients c with c . rows = target (target must lie in
    the integer row span)."""
    H, U, pivots = _kernels.hnf(rows)
    res = list(target)
    combo = [0] * len(rows)
    for i, p in enumerate(pivots):
        q, rem = divmod(res[p], H[i][p])
        if rem:
            raise ValueError("target is not an integer combination")
        if q:
            for j in range(len(res)):
                res[j] -= q * H[i][j]
            for j in range(len(rows)):
                combo[j] += q * U[i][j]
    if any(res):
        raise ValueError("target is not an integer combination")
    return combo
