"""Logarithmic embeddings, equivariant regulators, and lattice constants.

The log embedding of an S-unit u is the vector -sum_w log|u|_w . w over
the places of K in S, with normalized absolute values: the ordinary one
under a real embedding, Nw^{-v_w(.)} at a finite place.  Units have zero
finite coordinates, and the product formula makes every row sum to zero,
which doubles as an integrity check on the shipped valuation data.

The group-ring regulator of vectors u_1, .., u_r against distinguished
places w_1, .., w_r is the determinant over R[G] of the r x r matrix with
entries -sum_g log|u_i^g|_{w_j} g^{-1}, extended linearly to sums of
wedges.  Genuine instances have r = 1 and take logs from the numeric
embeddings; synthetic instances ship exact rational log tables, so their
regulator is an exact element of Q[G].

The lattice constants compare log images of unit lattices with their
semi-simplifications (`c_constant`, `c_K_r`) and with the degree-zero
divisor lattice (`d_X`, `d_T`).  The log map intertwines the exact Galois
action on exponent vectors, so every one of these indices is computed in
exact rational arithmetic on exponent coordinates; `c_constant_numeric`
redoes the unit side on floating-point log lattices and recovers the
rational by continued fractions, as an independent check that the exact
reading is sound.
"""

from __future__ import annotations

from itertools import combinations

import mpmath as mp

from . import _kernels
from .arithdata import SubfieldData, regular_action_matrices
from .groupring import (GroupRing, GroupRingElement, PrecisionContext,
                        e_S_r, mpf_from_q, project_to_quotient, rationalize)
from .groups import Subgroup, quotient_and_projection
from .lattices import (GModuleLattice, RationalLattice, RealLattice,
                       q_vec_mat, semisimplify, sinnott_index, tate_h0)
from .rationals import Q, is_rational

_GUARD = 15


def _require_genuine(inst, what: str):
    if inst.kind != "genuine":
        raise ValueError(f"{what} requires number-field data; "
                         f"{inst.name!r} is synthetic")


# -- log tables and the log embedding -----------------------------------------


def _free_block(M):
    """Action matrix on the free exponent coordinates (torsion slot 0
    dropped; legal because the sign column never feeds back)."""
    return [row[1:] for row in M[1:]]


def _free_gen_matrices(inst):
    G = inst.group
    gens = [tuple(1 if j == i else 0 for j in range(G.rank))
            for i in range(G.rank)]
    if inst.kind == "synthetic":
        return [inst.action[g] for g in gens]
    return [_free_block(inst.action[g]) for g in gens]


def _log_table(inst, digits: int):
    """k x |G| table of log|sigma_g(u_i)| over the S-unit generators,
    cached per precision."""
    cache = inst.__dict__.setdefault("_reg_log_tables", {})
    table = cache.get(digits)
    if table is None:
        with mp.workdps(digits + _GUARD):
            table = [
                [mp.log(abs(inst.embedding_value(u, g, digits)))
                 for g in inst.group.elements()]
                for u in inst.sunit_elements
            ]
        cache[digits] = table
    return table


def infinite_log_rows(inst, free_rows, ctx: PrecisionContext = None):
    """-log|.| rows over the infinite places (group-element column order)
    for rational vectors in free exponent coordinates."""
    _require_genuine(inst, "log rows")
    ctx = ctx or PrecisionContext()
    table = _log_table(inst, ctx.digits)
    n = inst.group.order
    out = []
    with mp.workdps(ctx.digits + _GUARD):
        for vec in free_rows:
            out.append([
                -mp.fsum(mpf_from_q(Q(c)) * table[t][gi]
                         for t, c in enumerate(vec) if c)
                for gi in range(n)
            ])
    return out


def log_embedding(inst, vec, ctx: PrecisionContext = None, *,
                  infinite_only: bool = False):
    """The vector -sum_w log|u|_w . w over S_K for an exponent vector u.

    Coordinates: the |G| infinite places in group-element order, then the
    finite (place, coset) coordinates of `finite_coordinates`, carrying
    v_w(u) log Nw.  `infinite_only` truncates to the first block, i.e.
    the projection pi_inf.
    """
    _require_genuine(inst, "the log embedding")
    ctx = ctx or PrecisionContext()
    row = infinite_log_rows(inst, [[Q(x) for x in vec[1:]]], ctx)[0]
    if infinite_only:
        return row
    with mp.workdps(ctx.digits + _GUARD):
        vals = inst.valuation_row(vec)
        for (label, _), v in zip(inst.finite_coordinates, vals):
            row.append(v * mp.log(inst.ext.place(label).norm))
    return row


def unit_log_matrix(inst, ctx: PrecisionContext = None):
    """One `log_embedding` row per S-unit generator, over all of S_K."""
    _require_genuine(inst, "the unit log matrix")
    k = len(inst.sunit_elements)
    rows = []
    for i in range(k):
        e_i = [0] * (k + 1)
        e_i[i + 1] = 1
        rows.append(log_embedding(inst, e_i, ctx))
    return rows


def lambda_injectivity_check(inst, ctx: PrecisionContext = None):
    """Smallest singular value of the unit log matrix.

    Raises when it fails to clear tau times the matrix scale; a healthy
    value certifies that the log embedding is injective on the S-units
    modulo torsion, which the exact index computations below presuppose.
    """
    ctx = ctx or PrecisionContext()
    rows = unit_log_matrix(inst, ctx)
    with ctx.workdps():
        svals = mp.svd_r(mp.matrix(rows), compute_uv=False)
        scale = max([mp.mpf(1)] + [abs(x) for r in rows for x in r])
        smin = min(svals)
        if smin <= ctx.tau * scale:
            raise ValueError("unit log matrix is numerically rank "
                             "deficient at this precision")
        return smin


# -- unit and divisor lattices -------------------------------------------------


def unit_lattice(inst) -> GModuleLattice:
    """Units (zero valuation at every finite place) in free exponent
    coordinates, as a G-stable lattice of rank |G| - 1."""
    _require_genuine(inst, "the unit lattice")
    cached = inst.__dict__.get("_unit_module")
    if cached is not None:
        return cached
    k = len(inst.sunit_elements)
    cols = [list(col) for col in inst._val_columns]
    rows = _kernels.int_kernel(cols) if cols else \
        [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    M = GModuleLattice(inst.group, RationalLattice(k, rows),
                       _free_gen_matrices(inst))
    if M.rank != inst.group.order - 1:
        raise ValueError(f"unit lattice has rank {M.rank}, expected "
                         f"{inst.group.order - 1}")
    inst._unit_module = M
    return M


def place_module(inst) -> GModuleLattice:
    """X(K): the degree-zero sublattice of the free module on the
    infinite places, with the regular permutation action."""
    cached = inst.__dict__.get("_place_module")
    if cached is not None:
        return cached
    G = inst.group
    n = G.order
    rows = []
    for i in range(1, n):
        row = [Q(0)] * n
        row[0] = Q(-1)
        row[i] = Q(1)
        rows.append(row)
    M = GModuleLattice(G, RationalLattice(n, rows),
                       regular_action_matrices(G))
    inst._place_module = M
    return M


def fixed_sublattice(module: GModuleLattice, H: Subgroup) -> RationalLattice:
    """The sublattice of H-fixed vectors, in ambient coordinates."""
    k = module.rank
    if H.order == 1 or k == 0:
        return module.lattice
    stacked = [[] for _ in range(k)]
    for h in H.generators:
        C = module.induced_coordinate_matrix(h)
        for i in range(k):
            stacked[i].extend(C[i][j] - (1 if i == j else 0)
                              for j in range(k))
    # coefficient rows c with c . (C_h - I) = 0 for every generator h
    coeff_rows = _kernels.int_kernel(
        [[stacked[i][j] for i in range(k)] for j in range(len(stacked[0]))]
    )
    basis = [q_vec_mat([Q(c) for c in row], list(module.lattice.basis))
             for row in coeff_rows]
    return RationalLattice(module.lattice.n, basis)


def norm_image(module: GModuleLattice, H: Subgroup) -> RationalLattice:
    """N_H . M: the lattice spanned by norm images of a basis of M."""
    n = module.lattice.n
    N = [[Q(0)] * n for _ in range(n)]
    for h in sorted(H.element_set):
        A = module.action_matrix(h)
        for i in range(n):
            for j in range(n):
                N[i][j] += A[i][j]
    return RationalLattice(n, [q_vec_mat(b, N) for b in module.lattice.basis])


# -- classical regulators ------------------------------------------------------


def classical_regulator(inst, H: Subgroup = None,
                        ctx: PrecisionContext = None):
    """Regulator of the fixed field of H (H omitted: of K itself).

    |det| of the log embedding on a basis of the H-fixed unit lattice,
    one column per coset embedding with one column dropped; each row sums
    to zero over all cosets, so the drop does not matter.  The rational
    field gives the empty determinant, 1.  Raises on rank deficiency.
    """
    _require_genuine(inst, "a classical regulator")
    ctx = ctx or PrecisionContext()
    G = inst.group
    if H is None:
        H = Subgroup.trivial(G)
    fixed = fixed_sublattice(unit_lattice(inst), H)
    m = G.order // H.order
    if fixed.rank != m - 1:
        raise ValueError(f"fixed unit lattice has rank {fixed.rank}, "
                         f"expected {m - 1}: units are not independent")
    if m == 1:
        return mp.mpf(1)
    _, _, reps = quotient_and_projection(G, H)
    table = _log_table(inst, ctx.digits)
    eidx = {g: i for i, g in enumerate(G.elements())}
    with mp.workdps(ctx.digits + _GUARD):
        rows = []
        for v in fixed.basis:
            rows.append([
                mp.fsum(mpf_from_q(c) * table[t][eidx[G.reduce(g)]]
                        for t, c in enumerate(v) if c)
                for g in reps[:-1]
            ])
        det = mp.det(mp.matrix(rows))
        scale = max([mp.mpf(1)] + [abs(x) for r in rows for x in r])
        if abs(det) <= ctx.tau * scale ** len(rows):
            raise ValueError("regulator determinant vanishes at this "
                             "precision: units are not independent")
        return abs(det)


def subset_field_regulators(inst, ctx: PrecisionContext = None):
    """Regulators of the fields cut out by the decomposition groups of
    every subset of the finite S-places, keyed by frozenset of labels.

    The empty set keys the regulator of K; these are exactly the inputs
    the zeta-leading-term comparison consumes.
    """
    _require_genuine(inst, "subset regulators")
    labels = sorted(p.label for p in inst.ext.s_finite)
    by_label = {p.label: p for p in inst.ext.s_finite}
    out = {}
    for size in range(len(labels) + 1):
        for J in combinations(labels, size):
            H = Subgroup.trivial(inst.group)
            for lab in J:
                H = H.join(by_label[lab].decomposition)
            out[frozenset(J)] = classical_regulator(inst, H, ctx)
    return out


# -- the equivariant regulator -------------------------------------------------


def _ring_det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = rows[0][0].ring.zero()
    for t in range(n):
        minor = [row[:t] + row[t + 1:] for row in rows[1:]]
        term = rows[0][t] * _ring_det(minor)
        total = total + term if t % 2 == 0 else total - term
    return total


def _as_terms(wedge, r: int):
    """Normalize wedge input: either r vectors (a single wedge) or a list
    of (coefficient, [vectors]) terms; [] means the zero element."""
    wedge = list(wedge)
    if not wedge:
        return []
    first = wedge[0]
    if (isinstance(first, tuple) and len(first) == 2
            and isinstance(first[1], (list, tuple))
            and len(first[1]) > 0
            and isinstance(first[1][0], (list, tuple))):
        terms = [(Q(c), [list(v) for v in vs]) for c, vs in wedge]
    else:
        terms = [(Q(1), [list(v) for v in wedge])]
    for _, vs in terms:
        if len(vs) != r:
            raise ValueError(f"each wedge term needs exactly {r} vectors")
    return terms


def _synthetic_log(inst, vec, gi: int, j: int):
    return sum(Q(vec[t]) * inst.log_table[t][gi * inst.ext.r + j]
               for t in range(inst.rank))


def rubin_stark_regulator(inst, wedge, ctx: PrecisionContext = None,
                          frame=None) -> GroupRingElement:
    """R_w of a wedge, or of a sum of wedges, as a group-ring element.

    `wedge` is either r exponent vectors u_1 .. u_r or a list of
    (coefficient, [u_1 .. u_r]) terms, extended linearly.  `frame` picks
    the distinguished place of column j as the g_j-translate of the
    default one; omitted, every g_j is the identity.  Synthetic instances
    produce an exact element of Q[G], genuine ones a numeric element.
    """
    r = inst.ext.r
    G = inst.group
    ring = GroupRing(G)
    terms = _as_terms(wedge, r)
    if frame is None:
        frame = [G.identity] * r
    frame = [G.reduce(g) for g in frame]
    if len(frame) != r:
        raise ValueError("frame needs one group element per column")
    if not terms:
        return ring.zero()
    elements = G.elements()
    if inst.kind == "synthetic":
        # moving w_j to its h-translate reads the table at g h^{-1}
        shifts = [ring.index[G.inverse(h)] for h in frame]
        total = ring.zero()
        for coeff, vs in terms:
            lam = []
            for vec in vs:
                if len(vec) != inst.rank:
                    raise ValueError("exponent vector has the wrong length")
                row = []
                for j in range(r):
                    cs = [Q(0)] * ring.n
                    for gi, g in enumerate(elements):
                        gg = ring.mult_table[gi][shifts[j]]
                        cs[ring.inv_index[gi]] -= _synthetic_log(
                            inst, vec, gg, j)
                    row.append(ring.from_coeffs(cs))
                lam.append(row)
            total = total + _ring_det(lam).scale(coeff)
        return total
    if r != 1:
        raise ValueError("genuine instances carry a single distinguished "
                         "place; higher wedge degrees are synthetic only")
    ctx = ctx or PrecisionContext()
    table = _log_table(inst, ctx.digits)
    k = len(inst.sunit_elements)
    shift = ring.index[G.inverse(frame[0])]
    with mp.workdps(ctx.digits + _GUARD):
        coeffs = [mp.mpf(0)] * ring.n
        for coeff, (vec,) in terms:
            if len(vec) != k + 1:
                raise ValueError("exponent vector has the wrong length")
            c_mp = mpf_from_q(coeff)
            for gi in range(ring.n):
                gg = ring.mult_table[gi][shift]
                val = mp.fsum(mpf_from_q(Q(x)) * table[t][gg]
                              for t, x in enumerate(vec[1:]) if x)
                coeffs[ring.inv_index[gi]] -= c_mp * val
        return ring.from_coeffs(coeffs)


def _sup_norm(x: GroupRingElement):
    out = mp.mpf(0)
    for c in x.coeffs:
        a = abs(mpf_from_q(Q(c))) if is_rational(c) else abs(mp.mpc(c))
        if a > out:
            out = mp.mpf(a)
    return out


def restricted_regulator_identity_check(inst, sub: SubfieldData, wedge,
                                        ctx: PrecisionContext = None):
    """Max coefficient residual of the restriction identity: projecting
    the regulator of an H-fixed wedge to the quotient group ring must
    equal |H|^r times the quotient regulator at the restricted places.

    Exact log data gives a residual of exactly 0; numeric data must land
    below tau.  Raises if a wedge vector is not H-fixed (mod torsion).
    """
    ctx = ctx or PrecisionContext()
    r = inst.ext.r
    G = inst.group
    H = sub.H
    terms = _as_terms(wedge, r)
    for _, vs in terms:
        for vec in vs:
            ivec = [int(x) for x in vec]
            for h in H.generators:
                if inst.kind == "synthetic":
                    M = inst.action[G.reduce(h)]
                    img = [sum(ivec[t] * M[t][s] for t in range(inst.rank))
                           for s in range(inst.rank)]
                    same = img == ivec
                else:
                    same = inst.act_on_exponents(ivec, h)[1:] == ivec[1:]
                if not same:
                    raise ValueError("wedge vector is not fixed by H")
    target = GroupRing(sub.group)
    lhs = project_to_quotient(rubin_stark_regulator(inst, wedge, ctx),
                              sub.pi, target)
    rep_of = {sub.pi(rep): rep for rep in sub.reps}
    delta_elements = sub.group.elements()
    eidx = {g: i for i, g in enumerate(G.elements())}
    scale = Q(H.order) ** r
    if inst.kind == "synthetic":
        total = target.zero()
        for coeff, vs in terms:
            lam = []
            for vec in vs:
                row = []
                for j in range(r):
                    cs = [Q(0)] * target.n
                    for di, d in enumerate(delta_elements):
                        gi = eidx[rep_of[d]]
                        cs[target.inv_index[di]] -= _synthetic_log(
                            inst, vec, gi, j)
                    row.append(target.from_coeffs(cs))
                lam.append(row)
            total = total + _ring_det(lam).scale(coeff)
        rhs = total.scale(scale)
    else:
        table = _log_table(inst, ctx.digits)
        with mp.workdps(ctx.digits + _GUARD):
            coeffs = [mp.mpf(0)] * target.n
            for coeff, (vec,) in terms:
                c_mp = mpf_from_q(coeff)
                for di, d in enumerate(delta_elements):
                    gi = eidx[rep_of[d]]
                    val = mp.fsum(mpf_from_q(Q(x)) * table[t][gi]
                                  for t, x in enumerate(vec[1:]) if x)
                    coeffs[target.inv_index[di]] -= c_mp * val
            rhs = target.from_coeffs(coeffs).scale(mpf_from_q(scale))
    return _sup_norm(lhs - rhs)


# -- the lattice constants -----------------------------------------------------


def _semisimple_index(module: GModuleLattice):
    if module.rank == 0:
        return Q(1)
    return semisimplify(module)[1]


def c_constant(inst, H: Subgroup = None):
    """Exact c_F for F the fixed field of H (H omitted: F = K).

    Semi-simplification index of the norm-image unit lattice over that of
    the norm-image degree-zero lattice, divided by |Tate H^0(H, units)|.
    Both indices are computed on exponent coordinates, where the (injective)
    log embedding transports them verbatim from the transcendental side.
    """
    _require_genuine(inst, "c_F")
    G = inst.group
    if H is None:
        H = Subgroup.trivial(G)
    U = unit_lattice(inst)
    X = place_module(inst)
    NU = norm_image(U, H)
    NX = norm_image(X, H)
    num = _semisimple_index(U.with_lattice(NU))
    den = _semisimple_index(X.with_lattice(NX))
    return num / den / tate_h0(H, U)


def c_constant_numeric(inst, H: Subgroup = None,
                       ctx: PrecisionContext = None):
    """(float, rationalized) recomputation of `c_constant` with the unit
    side done on numeric log lattices.

    The norm-image unit lattice and its semi-simplification are pushed
    through the log embedding and compared by an R-mode index; continued
    fractions recover the rational (None when nothing within tolerance
    has denominator <= 10^6).  Matching `c_constant` certifies the
    exponent-coordinate reading.
    """
    _require_genuine(inst, "c_F")
    ctx = ctx or PrecisionContext()
    G = inst.group
    if H is None:
        H = Subgroup.trivial(G)
    U = unit_lattice(inst)
    X = place_module(inst)
    NU = norm_image(U, H)
    NX = norm_image(X, H)
    den = _semisimple_index(X.with_lattice(NX))
    h0 = tate_h0(H, U)
    with ctx.workdps():
        if NU.rank == 0:
            num = mp.mpf(1)
        else:
            S = semisimplify(U.with_lattice(NU))[0]
            num = sinnott_index(
                RealLattice(G.order,
                            infinite_log_rows(inst, S.lattice.basis, ctx),
                            ctx),
                RealLattice(G.order,
                            infinite_log_rows(inst, NU.basis, ctx), ctx),
                "R", ctx=ctx)
        val = num / mpf_from_q(den) / h0
        return val, rationalize(val, ctx.tau)


def c_K_r(inst, r: int = None):
    """Exact semi-simplification index ratio on the e_{S,r}-component:
    S-unit logs over the degree-zero lattice.  Rank-0 components give 1."""
    _require_genuine(inst, "c_{K,r}")
    if r is None:
        r = inst.ext.r
    G = inst.group
    e = e_S_r(GroupRing(G), inst.ext, r)
    k = len(inst.sunit_elements)
    US = GModuleLattice(G, RationalLattice.standard(k),
                        _free_gen_matrices(inst))
    X = place_module(inst)
    num = _semisimple_index(US.with_lattice(US.ring_image(e)))
    den = _semisimple_index(X.with_lattice(X.ring_image(e)))
    return num / den


def d_X(inst, r: int = None):
    """(e_{S,r} ZS_inf : e_{S,r} X): the full lattice on the infinite
    places against its degree-zero sublattice, on the e-component."""
    _require_genuine(inst, "d_X")
    if r is None:
        r = inst.ext.r
    G = inst.group
    e = e_S_r(GroupRing(G), inst.ext, r)
    X = place_module(inst)
    full = GModuleLattice(G, RationalLattice.standard(G.order),
                          X.gen_actions)
    return sinnott_index(full.ring_image(e), X.ring_image(e))


def d_T(inst, r: int = None):
    """(e_{S,r} lambda(units) : e_{S,r} lambda(U_{S,T})): how far the
    (S,T)-congruence shrinks the unit logs on the e-component."""
    _require_genuine(inst, "d_T")
    if r is None:
        r = inst.ext.r
    G = inst.group
    e = e_S_r(GroupRing(G), inst.ext, r)
    U = unit_lattice(inst)
    k = len(inst.sunit_elements)
    ust = GModuleLattice(
        G, RationalLattice(k, [[Q(x) for x in row[1:]]
                               for row in inst.u_st_basis]),
        _free_gen_matrices(inst))
    return sinnott_index(U.ring_image(e), ust.ring_image(e))


def log_span_coincidence(inst, r: int = None):
    """Exact index (e_{S,r} lambda(units) : e_{S,r} lambda(S-units)).

    The finite part of the S-unit space dies under e_{S,r} at the
    vanishing order of the instance, so the two images coincide and the
    index must be 1.
    """
    _require_genuine(inst, "the log span comparison")
    if r is None:
        r = inst.ext.r
    G = inst.group
    e = e_S_r(GroupRing(G), inst.ext, r)
    U = unit_lattice(inst)
    k = len(inst.sunit_elements)
    US = GModuleLattice(G, RationalLattice.standard(k),
                        _free_gen_matrices(inst))
    return sinnott_index(U.ring_image(e), US.ring_image(e))


def _orthonormal_rows(rows, tol):
    frame = []
    for row in rows:
        v = [mp.mpf(x) for x in row]
        for f in frame:
            c = mp.fsum(a * b for a, b in zip(v, f))
            v = [a - c * b for a, b in zip(v, f)]
        nv = mp.sqrt(mp.fsum(a * a for a in v))
        if nv > tol:
            frame.append([a / nv for a in v])
    return frame


def log_span_residual(inst, r: int = None, ctx: PrecisionContext = None):
    """Numeric counterpart of `log_span_coincidence`: the sine of the
    largest principal angle between the two log spans at the infinite
    places.  Equal spans give (numerically) zero."""
    _require_genuine(inst, "the log span comparison")
    ctx = ctx or PrecisionContext()
    if r is None:
        r = inst.ext.r
    G = inst.group
    e = e_S_r(GroupRing(G), inst.ext, r)
    U = unit_lattice(inst)
    k = len(inst.sunit_elements)
    US = GModuleLattice(G, RationalLattice.standard(k),
                        _free_gen_matrices(inst))
    rows_u = infinite_log_rows(inst, U.ring_image(e).basis, ctx)
    rows_s = infinite_log_rows(inst, US.ring_image(e).basis, ctx)
    with ctx.workdps():
        scale = max([mp.mpf(1)]
                    + [abs(x) for rs in (rows_u, rows_s) for rr in rs
                       for x in rr])
        fu = _orthonormal_rows(rows_u, ctx.tau * scale)
        fs = _orthonormal_rows(rows_s, ctx.tau * scale)
        if len(fu) != len(fs):
            return mp.mpf(1)
        if not fu:
            return mp.mpf(0)
        gram = mp.matrix([[mp.fsum(a * b for a, b in zip(u, s))
                           for s in fs] for u in fu])
        svals = mp.svd_r(gram, compute_uv=False)
        smin = min(svals)
        return mp.sqrt(max(mp.mpf(0), 1 - smin ** 2))
