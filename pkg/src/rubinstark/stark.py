"""Recognition of the units predicted by the leading terms.

For a divisor g of the conductor, the predicted element lives in the
subfield cut out by g: it is a unit away from the places dividing g and
S', congruent to 1 at T, and its equivariant logarithm over the quotient
group must reproduce the leading element of the truncated series for
that subfield.  The engine turns this defining property into the
construction: it solves the linear system for real exponents on the
isotypic subspace where the logarithm is injective, rounds to integer
exponents, and certifies the result twice -- the rounding distance and
the defining-property residual must both clear the context tolerance --
before pinning the exact element down with the T-congruence, the
Galois-fixedness and the valuation conditions, all checked exactly.

Synthetic instances ship their elements as exact wedge-term tables; the
solver repackages them and re-certifies the image law, which their data
encodes by construction.

The image law itself (the e_{S,r}-projected identity tying the regulator
image of every recognized element to the bare leading element, the
T-multiplier, the norm element of the subfield's group and the Euler
factors at the subfield's finite places) is exposed separately: it is
the deepest cross-module wiring check the engine has.
"""

from __future__ import annotations

import itertools

import mpmath as mp

from . import _kernels
from .arithdata import (CycleDivisor, ExtensionData, SubfieldData,
                        check_hypotheses, order_of_vanishing, subfield_K_g)
from .groupring import (GroupRing, PrecisionContext, e_S_r, delta_T,
                        euler_factor, from_char_values, mpf_from_q,
                        project_to_quotient)
from .groups import enumerate_characters
from .lattices import GModuleLattice, RationalLattice
from .lvalues import l_ST_derivative, omega_K, stickelberger_leading
from .rationals import Q
from .regulator import (_free_block, _free_gen_matrices, _log_table,
                        _sup_norm, rubin_stark_regulator)

_GUARD = 15

RECOGNITION_ERROR = "Stark element not recognized at this precision"

# desk-scale instances never need large exponents; a huge solution means
# the linear system was fed bad data, not that the element is exotic
_EXPONENT_BOUND = 20


class StarkRecognitionError(ValueError):
    """The rounded solution failed a certificate; raise the precision."""


def _as_divisor(inst, g) -> CycleDivisor:
    d = g if isinstance(g, CycleDivisor) else CycleDivisor(g)
    if not d.divides(inst.ext):
        raise ValueError(f"divisor {sorted(d.labels)} does not divide the "
                         f"conductor {sorted(inst.ext.conductor_labels)}")
    return d


def stark_divisors(inst):
    """All divisors of the conductor, smallest first."""
    labels = sorted(inst.ext.conductor_labels)
    return [CycleDivisor(combo)
            for size in range(len(labels) + 1)
            for combo in itertools.combinations(labels, size)]


def restricted_extension(ext: ExtensionData,
                         divisor: CycleDivisor) -> ExtensionData:
    """The parent-group data with S cut down to the divisor's places, S'
    and the infinite places (the S-set of the subfield, seen from above)."""
    ram = tuple(p for p in ext.ramified_places if p.label in divisor.labels)
    return ExtensionData(group=ext.group, r=ext.r, ramified_places=ram,
                         s_prime=ext.s_prime, T=ext.T)


def subfield_leading_element(inst, divisor, sub: SubfieldData,
                             ctx: PrecisionContext):
    """Leading element of the truncated series of the subfield, over the
    quotient group.

    Characters of the quotient are exactly the parent characters trivial
    on H, and their truncated values agree with the parent-level values
    at the restricted place set (base-field norms and Frobenius classes
    are insensitive to the quotient), so the element is assembled
    upstairs and pushed down; characters not trivial on H project to
    zero exactly.
    """
    ext_g = restricted_extension(inst.ext, divisor)
    ring = GroupRing(inst.group)
    target = GroupRing(sub.group)
    if inst.kind == "synthetic":
        theta = stickelberger_leading(inst, inst.ext.r, ctx, ext=ext_g)
        return project_to_quotient(theta, sub.pi, target)
    values = {}
    for chi in enumerate_characters(inst.group):
        if not chi.trivial_on(sub.H):
            continue
        if order_of_vanishing(chi, ext_g) == inst.ext.r:
            values[chi] = l_ST_derivative(inst, chi.conj(), ctx, ext_g)
    with ctx.workdps():
        theta = from_char_values(ring, values, ctx)
        return project_to_quotient(theta, sub.pi, target)


class StarkElement:
    """A recognized element together with its certificates.

    Genuine instances store an exponent vector on the ingested unit
    basis (sign slot first); synthetic ones a tuple of exact wedge
    terms.  `residual` is the defining-property (genuine) or image-law
    (synthetic) residual; `rounding_distance` is None when no rounding
    happened.
    """

    def __init__(self, divisor, sub, exponents, terms, residual,
                 rounding_distance, hypotheses):
        self.divisor = divisor
        self.sub = sub
        self.exponents = exponents
        self.terms = terms
        self.residual = residual
        self.rounding_distance = rounding_distance
        self.hypotheses = hypotheses

    @property
    def labels(self):
        return frozenset(self.divisor.labels)

    def wedge(self):
        """The element in the form the regulator functions consume."""
        if self.exponents is not None:
            return [list(self.exponents)]
        return [(c, [list(v) for v in vs]) for c, vs in self.terms]

    def __repr__(self):
        name = ",".join(sorted(self.divisor.labels)) or "1"
        return f"StarkElement(divisor=({name}))"


def _unit_row(n, i):
    return [1 if j == i else 0 for j in range(n)]


def _synthetic_terms(inst, divisor):
    key = ",".join(sorted(divisor.labels))
    if key not in inst.etas:
        raise ValueError(f"no synthetic element for divisor ({key or '1'})")
    terms = []
    for c, (i, j) in inst.etas[key]:
        terms.append((Q(c), [_unit_row(inst.rank, i),
                             _unit_row(inst.rank, j)]))
    return terms


def stark_image_law(inst, g, wedge, ctx: PrecisionContext = None):
    """Residual of the e_{S,r}-projected image law for a candidate
    element of the divisor g:

        e R_w(eta) = e omega delta_T s(H_g)^r prod_{p | g, p in S'} (
            1 - sigma_p^{-1} e_{I_p})

    with s(H_g) the norm element of the subfield's group and omega the
    bare leading element of the full S.  Synthetic data makes both sides
    exact; genuine data is numeric at the context precision.
    """
    ctx = ctx or PrecisionContext(100)
    divisor = _as_divisor(inst, g)
    sub = subfield_K_g(inst.ext, divisor)
    ext_g = restricted_extension(inst.ext, divisor)
    r = inst.ext.r
    ring = GroupRing(inst.group)
    e = e_S_r(ring, inst.ext, r)
    with mp.workdps(ctx.digits + _GUARD):
        rhs = e * omega_K(inst, r, ctx)
        rhs = rhs * delta_T(ring, inst.ext.T)
        for p in ext_g.s_finite:
            rhs = rhs * euler_factor(ring, p)
        norm = ring.norm_element(sub.H)
        for _ in range(r):
            rhs = rhs * norm
        lhs = e * rubin_stark_regulator(inst, wedge, ctx)
        return _sup_norm(lhs - rhs)


def _quotient_log_element(inst, vec, sub, target, ctx):
    """R of an exponent vector over the quotient group: logs at coset
    representatives of the parent embeddings."""
    table = _log_table(inst, ctx.digits)
    rep_of = {sub.pi(rep): rep for rep in sub.reps}
    eidx = {gg: i for i, gg in enumerate(inst.group.elements())}
    with mp.workdps(ctx.digits + _GUARD):
        coeffs = [mp.mpf(0)] * target.n
        for di, d in enumerate(sub.group.elements()):
            gi = eidx[rep_of[d]]
            val = mp.fsum(mpf_from_q(Q(x)) * table[t][gi]
                          for t, x in enumerate(vec[1:]) if x)
            coeffs[target.inv_index[di]] -= val
        return target.from_coeffs(coeffs)


def solve_stark_element(inst, g, ctx: PrecisionContext = None):
    """Recognize the element attached to a divisor of the conductor.

    Genuine path: build the solvable sublattice (fixed by the subfield's
    group, unit outside the divisor's places and S', isotypically
    restricted), match its quotient logarithm against the subfield's
    leading element by least squares, round, and certify.  Synthetic
    path: read the shipped wedge terms and re-certify the image law.
    """
    divisor = _as_divisor(inst, g)
    sub = subfield_K_g(inst.ext, divisor)
    r = inst.ext.r

    if inst.kind == "synthetic":
        ctx = ctx or PrecisionContext(100)
        hyp = check_hypotheses(sub.ext, r=r,
                               torsion_order=inst.torsion_order)
        terms = _synthetic_terms(inst, divisor)
        residual = stark_image_law(inst, divisor, terms, ctx)
        if not residual == 0:
            raise ValueError("synthetic table violates the image law "
                             f"for divisor {sorted(divisor.labels)}")
        return StarkElement(divisor, sub, None, tuple(terms), residual,
                            None, hyp)

    if r != 1:
        raise ValueError("recognition is rank-one only; higher ranks are "
                         "synthetic-mode territory")
    ctx = ctx or PrecisionContext(100)
    hyp = check_hypotheses(sub.ext, r=1, torsion_order=2,
                           torsion_survives=not inst.u_st_torsion_trivial)
    if not hyp.ok:
        raise ValueError(
            "running hypotheses fail for the subfield data: "
            + "; ".join(f"hypothesis ({c.number}): {c.detail}"
                        for c in hyp.failures()))

    G = inst.group
    k = len(inst.sunit_elements)
    target = GroupRing(sub.group)
    theta = subfield_leading_element(inst, divisor, sub, ctx)

    # exact candidate space: fixed by H, unit outside the divisor and S'
    cond = []
    for h in sub.H.generators:
        M = _free_block(inst.action[G.reduce(h)])
        for j in range(k):
            cond.append([M[i][j] - (1 if i == j else 0) for i in range(k)])
    excluded = inst.ext.conductor_labels - divisor.labels
    for (label, _), col in zip(inst.finite_coordinates, inst._val_columns):
        if label in excluded:
            cond.append([int(x) for x in col])
    W = _kernels.int_kernel(cond) if cond else \
        [_unit_row(k, i) for i in range(k)]

    # restrict to the isotypic part where the logarithm is injective
    e_bar = e_S_r(target, sub.ext, 1)
    rep_of = {sub.pi(rep): rep for rep in sub.reps}
    E = [[Q(0)] * k for _ in range(k)]
    for di, d in enumerate(sub.group.elements()):
        q = Q(e_bar.coeffs[di])
        if q == 0:
            continue
        M = _free_block(inst.action[G.reduce(rep_of[d])])
        for i in range(k):
            for j in range(k):
                E[i][j] += q * Q(M[i][j])
    image = [[sum(Q(w[i]) * E[i][j] for i in range(k)) for j in range(k)]
             for w in W]
    V = [list(b) for b in RationalLattice(k, image).basis]

    table = _log_table(inst, ctx.digits)
    eidx = {gg: i for i, gg in enumerate(G.elements())}
    delta_elements = sub.group.elements()
    with mp.workdps(ctx.digits + _GUARD):
        b = []
        for di in range(target.n):
            c = theta.coeffs[target.inv_index[di]]
            if isinstance(c, mp.mpc):
                if abs(c.imag) > ctx.tau:
                    raise StarkRecognitionError(RECOGNITION_ERROR)
                c = c.real
            b.append(mp.mpf(c) if not isinstance(c, mp.mpf) else c)
        if not V:
            if max(abs(x) for x in b) > ctx.tau:
                raise StarkRecognitionError(RECOGNITION_ERROR)
            n_vec, dist = [0] * k, mp.mpf(0)
        else:
            A = []
            for di, d in enumerate(delta_elements):
                gi = eidx[rep_of[d]]
                A.append([-mp.fsum(mpf_from_q(Q(v[t])) * table[t][gi]
                                   for t in range(k) if v[t])
                          for v in V])
            x, _ = mp.qr_solve(mp.matrix(A), mp.matrix(b))
            ambient = [mp.fsum(x[j] * mpf_from_q(Q(V[j][t]))
                               for j in range(len(V)))
                       for t in range(k)]
            n_vec = [int(mp.nint(y)) for y in ambient]
            dist = max(abs(y - m) for y, m in zip(ambient, n_vec))
    if dist > ctx.tau:
        raise StarkRecognitionError(RECOGNITION_ERROR)
    if any(abs(m) > _EXPONENT_BOUND for m in n_vec):
        raise ValueError(f"solved exponents {n_vec} exceed the sanity "
                         f"bound {_EXPONENT_BOUND}; the input data is "
                         "inconsistent")

    # exact certificates: T-congruent sign lift, fixedness, valuations
    sign = None
    for a in (0, 1):
        if inst.u_st_lattice.contains([Q(a)] + [Q(m) for m in n_vec]):
            sign = a
            break
    if sign is None:
        raise StarkRecognitionError(RECOGNITION_ERROR)
    vec = [sign] + n_vec
    for h in sub.H.generators:
        if inst.act_on_exponents(vec, h) != vec:
            raise StarkRecognitionError(RECOGNITION_ERROR)
    for (label, _), val in zip(inst.finite_coordinates,
                               inst.valuation_row(vec)):
        if label in excluded and val != 0:
            raise StarkRecognitionError(RECOGNITION_ERROR)

    log_el = _quotient_log_element(inst, vec, sub, target, ctx)
    with mp.workdps(ctx.digits + _GUARD):
        residual = _sup_norm(log_el - theta)
    if residual > ctx.tau:
        raise StarkRecognitionError(RECOGNITION_ERROR)
    return StarkElement(divisor, sub, tuple(vec), None, residual, dist,
                        hyp)


# -- the module the recognized elements generate -------------------------------


class StarkModule:
    """Z[G]-span of the recognized elements of every divisor.

    Genuine instances: `lattice` lives in sign+exponent coordinates (the
    row [2, 0, .., 0] implements the sign slot's order two) and `module`
    carries the G-action on the free quotient, where the action matrices
    satisfy the group relations on the nose.  Synthetic instances: both
    live in the antisymmetric pair coordinates of the unit module
    (`pairs` lists the coordinate order).
    """

    def __init__(self, elements, lattice, module, pairs=None):
        self.elements = elements
        self.lattice = lattice
        self.module = module
        self.pairs = pairs

    def element(self, labels):
        return self.elements[frozenset(str(x) for x in labels)]

    def free_rows(self):
        """Basis of the module's free quotient (genuine)."""
        if self.pairs is not None:
            raise ValueError("free rows are a genuine-instance notion")
        return [list(b) for b in self.module.lattice.basis]

    def __repr__(self):
        return (f"StarkModule({len(self.elements)} generators, "
                f"rank {self.lattice.rank})")


def _raw_act(vec, M):
    n = len(vec)
    return [sum(int(vec[i]) * M[i][j] for i in range(n)) for j in range(n)]


def _wedge_matrix(M, pairs, pidx):
    W = [[0] * len(pairs) for _ in pairs]
    for a, (p, q) in enumerate(pairs):
        for (r_, s_) in pairs:
            W[a][pidx[(r_, s_)]] = (M[p][r_] * M[q][s_]
                                    - M[p][s_] * M[q][r_])
    return W


def build_stark_module(inst, ctx: PrecisionContext = None) -> StarkModule:
    """Solve every divisor of the conductor and take the Z[G]-span."""
    elements = {}
    for d in stark_divisors(inst):
        el = solve_stark_element(inst, d, ctx)
        elements[frozenset(d.labels)] = el
    G = inst.group

    if inst.kind == "genuine":
        k = len(inst.sunit_elements)
        rows = []
        for el in elements.values():
            for gg in G.elements():
                rows.append(_raw_act(list(el.exponents), inst.action[gg]))
        rows.append([2] + [0] * k)
        lattice = RationalLattice(k + 1, rows)
        # the raw sign-augmented matrices only satisfy the group
        # relations modulo the [2, 0, ..] row, so the G-module structure
        # is carried by the free quotient
        free = RationalLattice(k, [list(b[1:]) for b in lattice.basis
                                   if any(b[1:])])
        module = GModuleLattice(G, free, _free_gen_matrices(inst))
        return StarkModule(elements, lattice, module)

    pairs = list(itertools.combinations(range(inst.rank), 2))
    pidx = {pq: a for a, pq in enumerate(pairs)}
    rows = []
    for el in elements.values():
        base = [Q(0)] * len(pairs)
        for c, (i, j) in inst.etas[",".join(sorted(el.divisor.labels))]:
            if i == j:
                continue
            if i < j:
                base[pidx[(i, j)]] += Q(c)
            else:
                base[pidx[(j, i)]] -= Q(c)
        for gg in G.elements():
            Wg = _wedge_matrix(inst.action[gg], pairs, pidx)
            rows.append([sum(base[a] * Q(Wg[a][t])
                             for a in range(len(pairs)))
                         for t in range(len(pairs))])
    lattice = RationalLattice(len(pairs), rows)
    gens = [tuple(1 if j == i else 0 for j in range(G.rank))
            for i in range(G.rank)]
    module = GModuleLattice(
        G, lattice, [_wedge_matrix(inst.action[g], pairs, pidx)
                     for g in gens])
    return StarkModule(elements, lattice, module, pairs=pairs)
