"""Places, extension data, subfields, and field-instance loading.

The objects here carry exactly the arithmetic a verification run needs:
a finite abelian Galois group, decomposition data for the finite places
of S and T, and (for genuine instances) an exact number-field backend
with S-units, valuations, and Galois action given as integer matrices
on exponent vectors.
"""

from dataclasses import dataclass
import itertools
import json
import os

from . import _kernels
from .groups import (
    FiniteAbelianGroup,
    Subgroup,
    Character,
    quotient_and_projection,
)
from .lattices import RationalLattice, GModuleLattice
from .numberfield import NumberField, ResidueField, factor_mod, solve_q
from .rationals import Q, qparse


# -- places and extensions ----------------------------------------------------


@dataclass(frozen=True)
class PlaceData:
    """Decomposition data of a finite place of the base field.

    `residue` is the rational prime under the place (None for synthetic
    instances); `norm` is the residue norm of a place of K above it.
    """

    label: str
    inertia: Subgroup
    decomposition: Subgroup
    frobenius: tuple
    norm: int = None
    residue: int = None

    def __post_init__(self):
        G = self.inertia.parent
        if self.decomposition.parent != G:
            raise ValueError("inertia and decomposition in different groups")
        frob = G.reduce(self.frobenius)
        object.__setattr__(self, "frobenius", frob)
        if not self.inertia.element_set <= self.decomposition.element_set:
            raise ValueError(f"place {self.label}: inertia not inside "
                             "decomposition")
        if frob not in self.decomposition.element_set:
            raise ValueError(f"place {self.label}: frobenius outside "
                             "decomposition group")
        # D/I must be generated by the frobenius coset
        if self.inertia.join(Subgroup(G, [frob])) != self.decomposition:
            raise ValueError(f"place {self.label}: frobenius does not "
                             "generate D/I")
        if self.norm is not None and self.residue is not None:
            if self.norm != self.residue ** self.residue_degree:
                raise ValueError(
                    f"place {self.label}: norm {self.norm} is not "
                    f"residue^f = {self.residue}^{self.residue_degree}"
                )

    @property
    def group(self) -> FiniteAbelianGroup:
        return self.inertia.parent

    @property
    def ramified(self) -> bool:
        return self.inertia.order > 1

    @property
    def base_norm(self) -> int:
        """Norm of the underlying prime of the base field.

        Genuine places sit over a rational prime (the `residue`); abstract
        places ship the base norm directly in `norm`.
        """
        return self.residue if self.residue is not None else self.norm

    @property
    def residue_degree(self) -> int:
        return self.decomposition.order // self.inertia.order

    def coset_reps(self):
        """One representative per coset of D in G: lexicographically
        smallest member, identity coset first."""
        G = self.group
        seen = set()
        reps = []
        for g in G.elements():
            if g in seen:
                continue
            coset = sorted(G.compose(g, d) for d in
                           self.decomposition.element_set)
            seen.update(coset)
            reps.append(coset[0])
        reps.sort()
        assert reps[0] == G.identity
        return reps


@dataclass(frozen=True)
class ExtensionData:
    """Group-level data of (K/k, S, T): S = infinite places + ramified + S'.

    `r` is the number of infinite places of k, all assumed split in K
    (totally real setting).
    """

    group: FiniteAbelianGroup
    r: int
    ramified_places: tuple
    s_prime: tuple
    T: tuple

    def __post_init__(self):
        object.__setattr__(self, "ramified_places",
                           tuple(self.ramified_places))
        object.__setattr__(self, "s_prime", tuple(self.s_prime))
        object.__setattr__(self, "T", tuple(self.T))
        if self.r < 1:
            raise ValueError("need at least one infinite place")
        for p in self.ramified_places:
            if not p.ramified:
                raise ValueError(f"place {p.label} listed as ramified but "
                                 "has trivial inertia")
        for p in self.s_prime + self.T:
            if p.ramified:
                raise ValueError(f"place {p.label} in S'/T is ramified")
        labels = [p.label for p in
                  self.ramified_places + self.s_prime + self.T]
        if len(labels) != len(set(labels)):
            raise ValueError("duplicate place labels across S and T")
        for p in self.ramified_places + self.s_prime + self.T:
            if p.group != self.group:
                raise ValueError("place data for a different group")

    @property
    def s_finite(self) -> tuple:
        return self.ramified_places + self.s_prime

    @property
    def s_size(self) -> int:
        return self.r + len(self.s_finite)

    @property
    def conductor_labels(self) -> frozenset:
        return frozenset(p.label for p in self.ramified_places)

    def place(self, label: str) -> PlaceData:
        for p in self.s_finite + self.T:
            if p.label == label:
                return p
        raise KeyError(f"no place labelled {label!r}")


@dataclass(frozen=True)
class CycleDivisor:
    """Squarefree divisor of the extension's conductor, as a label set."""

    labels: frozenset

    def __init__(self, labels):
        object.__setattr__(self, "labels", frozenset(str(x) for x in labels))

    def divides(self, ext: ExtensionData) -> bool:
        return self.labels <= ext.conductor_labels

    def complement_in(self, ext: ExtensionData) -> "CycleDivisor":
        return CycleDivisor(ext.conductor_labels - self.labels)


# -- vanishing orders and hypotheses ------------------------------------------


def order_of_vanishing(chi: Character, ext: ExtensionData) -> int:
    """Order of vanishing at s=0 of the S-truncated L-function of chi.

    Every infinite place is split (totally real), so each contributes 1;
    a finite place contributes 1 exactly when chi kills its decomposition
    group.  The trivial character gets |S| - 1.
    """
    if chi.is_trivial():
        return ext.r + len(ext.s_finite) - 1
    n = ext.r
    for p in ext.s_finite:
        if chi.trivial_on(p.decomposition):
            n += 1
    return n


@dataclass(frozen=True)
class HypothesisCheck:
    number: int
    passed: bool
    detail: str


@dataclass(frozen=True)
class HypothesisReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def lines(self):
        return [
            f"hypothesis ({c.number}): {'ok' if c.passed else 'FAIL'} - "
            f"{c.detail}"
            for c in self.checks
        ]


def check_hypotheses(ext: ExtensionData, r: int = None,
                     torsion_order: int = 2,
                     torsion_survives: bool = None) -> HypothesisReport:
    """Report the four running hypotheses on (K/k, S, T, r).

    Failures are reported, not raised; callers decide how to react.
    `torsion_survives` overrides the parity heuristic when the caller has
    computed the (S,T)-unit torsion exactly.
    """
    if r is None:
        r = ext.r
    checks = []

    ram = sorted(p.label for p in ext.ramified_places)
    checks.append(HypothesisCheck(
        1, True,
        f"S contains all infinite places and the ramified places {ram}"))

    split = ext.r + sum(1 for p in ext.s_finite
                        if p.decomposition.order == 1)
    checks.append(HypothesisCheck(
        2, split >= r,
        f"{split} completely split places in S, need {r}"))

    checks.append(HypothesisCheck(
        3, ext.s_size >= r + 1, f"|S| = {ext.s_size}, need {r + 1}"))

    if not ext.T:
        checks.append(HypothesisCheck(4, False, "T is empty"))
    else:
        s_labels = {p.label for p in ext.s_finite}
        s_residues = {p.residue for p in ext.s_finite if p.residue}
        disjoint = all(
            p.label not in s_labels and
            (p.residue is None or p.residue not in s_residues)
            for p in ext.T)
        if torsion_survives is None:
            # roots of unity in a totally real field are +-1, and -1 = 1
            # at a place q exactly when q has residue characteristic 2
            if torsion_order == 1:
                free = True
            elif torsion_order == 2:
                free = any(p.norm is not None and p.norm % 2 == 1
                           for p in ext.T)
            else:
                free = False
        else:
            free = not torsion_survives
        passed = disjoint and free
        detail = f"T = {sorted(p.label for p in ext.T)}"
        if not disjoint:
            detail += ", not disjoint from S"
        if not free:
            detail += ", (S,T)-units have torsion"
        if passed:
            detail += ", disjoint from S, torsion-free units"
        checks.append(HypothesisCheck(4, passed, detail))

    return HypothesisReport(tuple(checks))


# -- subfields ----------------------------------------------------------------


def inertia_span(ext: ExtensionData, labels) -> Subgroup:
    """Subgroup generated by the inertia groups of the listed ramified
    places; the trivial subgroup for an empty list."""
    labels = {str(x) for x in labels}
    unknown = labels - ext.conductor_labels
    if unknown:
        raise ValueError(f"labels {sorted(unknown)} do not divide the "
                         "conductor")
    H = Subgroup.trivial(ext.group)
    for p in ext.ramified_places:
        if p.label in labels:
            H = H.join(p.inertia)
    return H


class SubfieldData:
    """A quotient extension K_H/k together with the projection data."""

    def __init__(self, parent: ExtensionData, H: Subgroup,
                 ext: ExtensionData, pi, reps, place_map):
        self.parent = parent
        self.H = H
        self.ext = ext
        self.group = ext.group
        self.pi = pi
        self.reps = reps
        self.place_map = place_map  # parent label -> pushed PlaceData or None

    def __repr__(self):
        return (f"SubfieldData(|H|={self.H.order}, "
                f"quotient={self.group!r})")


def _push_place(place: PlaceData, delta, pi) -> PlaceData:
    I_img = Subgroup(delta, [pi(g) for g in place.inertia.generators])
    D_img = Subgroup(delta, [pi(g) for g in
                             place.decomposition.generators])
    frob = pi(place.frobenius)
    f_new = D_img.order // I_img.order
    norm = place.residue ** f_new if place.residue is not None else None
    return PlaceData(label=place.label, inertia=I_img, decomposition=D_img,
                     frobenius=frob, norm=norm, residue=place.residue)


def _quotient_extension(ext: ExtensionData, H: Subgroup,
                        keep_finite) -> SubfieldData:
    delta, pi, reps = quotient_and_projection(ext.group, H)
    ram, s_prime, place_map = [], [], {}
    for p in ext.s_finite:
        if p.label not in keep_finite:
            place_map[p.label] = None
            continue
        q = _push_place(p, delta, pi)
        place_map[p.label] = q
        if q.ramified:
            ram.append(q)
        else:
            s_prime.append(q)
    T = []
    for p in ext.T:
        q = _push_place(p, delta, pi)
        place_map[p.label] = q
        T.append(q)
    sub = ExtensionData(group=delta, r=ext.r, ramified_places=tuple(ram),
                        s_prime=tuple(s_prime), T=tuple(T))
    return SubfieldData(ext, H, sub, pi, reps, place_map)


def subfield_K_g(ext: ExtensionData, divisor) -> SubfieldData:
    """Subfield cut out by a divisor g of the conductor.

    K_g is fixed by the span of the inertia groups at the places *not*
    dividing g; its S consists of the infinite places, the places dividing
    g, and S'.
    """
    if not isinstance(divisor, CycleDivisor):
        divisor = CycleDivisor(divisor)
    if not divisor.divides(ext):
        raise ValueError(f"divisor {sorted(divisor.labels)} does not divide "
                         f"the conductor {sorted(ext.conductor_labels)}")
    H = inertia_span(ext, divisor.complement_in(ext).labels)
    keep = divisor.labels | {p.label for p in ext.s_prime}
    sub = _quotient_extension(ext, H, keep)
    # places of the conductor prime to g must become unramified
    for p in ext.ramified_places:
        if p.label not in divisor.labels:
            assert all(pi_h == sub.group.identity
                       for pi_h in map(sub.pi, p.inertia.generators))
    return sub


def subfield_K_I(ext: ExtensionData, labels) -> SubfieldData:
    """Subfield fixed by the decomposition groups of the listed finite
    S-places; every place of S and T is pushed to the quotient."""
    labels = {str(x) for x in labels}
    known = {p.label for p in ext.s_finite}
    unknown = labels - known
    if unknown:
        raise ValueError(f"labels {sorted(unknown)} are not finite "
                         "S-places")
    H = Subgroup.trivial(ext.group)
    for p in ext.s_finite:
        if p.label in labels:
            H = H.join(p.decomposition)
    keep = known
    return _quotient_extension(ext, H, keep)


# -- the module of punctured-cycle relations ----------------------------------


def regular_action_matrices(G: FiniteAbelianGroup):
    """Permutation matrices of the invariant-factor generators on the
    coefficient coordinates of the group ring (row-vector action)."""
    elements = G.elements()
    index = {g: i for i, g in enumerate(elements)}
    mats = []
    for k in range(G.rank):
        gen = tuple(1 if j == k else 0 for j in range(G.rank))
        A = [[0] * G.order for _ in range(G.order)]
        for i, g in enumerate(elements):
            A[i][index[G.compose(gen, g)]] = 1
        mats.append(A)
    return mats


def sinnott_module(ext: ExtensionData, r: int, divisor) -> GModuleLattice:
    """Lattice in Q[G] spanned by the G-orbits of the elements

        N(span of inertia at places in rho)^r
            * prod over places of s/rho of (1 - sigma_p^{-1} e_{I_p})

    for rho running over the subsets of the given conductor divisor s.
    """
    from .groupring import GroupRing, euler_factor

    if not isinstance(divisor, CycleDivisor):
        divisor = CycleDivisor(divisor)
    if not divisor.divides(ext):
        raise ValueError("divisor does not divide the conductor")
    ring = GroupRing(ext.group)
    labels = sorted(divisor.labels)
    gens = []
    for rho_size in range(len(labels) + 1):
        for rho in itertools.combinations(labels, rho_size):
            H = inertia_span(ext, rho)
            alpha = ring.norm_element(H)
            out = ring.one()
            for _ in range(r):
                out = out * alpha
            for p in ext.ramified_places:
                if p.label in divisor.labels and p.label not in rho:
                    out = out * euler_factor(ring, p)
            gens.append(out)
    rows = []
    for alpha in gens:
        for g in ext.group.elements():
            rows.append((ring.basis(g) * alpha).rational_form().coeffs)
    lattice = RationalLattice(ext.group.order, rows)
    return GModuleLattice(ext.group, lattice,
                          regular_action_matrices(ext.group))


# -- field instances -----------------------------------------------------------


def _data_dir():
    return os.path.join(os.path.dirname(__file__), "data")


def packaged_instances():
    d = _data_dir()
    if not os.path.isdir(d):
        return []
    return sorted(os.path.splitext(f)[0] for f in os.listdir(d)
                  if f.endswith(".json"))


def _resolve_path(name_or_path: str) -> str:
    if os.path.exists(name_or_path):
        return name_or_path
    candidate = os.path.join(_data_dir(), name_or_path + ".json")
    if os.path.exists(candidate):
        return candidate
    raise FileNotFoundError(
        f"no field instance {name_or_path!r}; packaged instances: "
        f"{', '.join(packaged_instances()) or '(none)'}")


def _parse_subgroup(G, gens) -> Subgroup:
    return Subgroup(G, [tuple(g) for g in gens])


def _elt_label(g) -> str:
    return ",".join(str(x) for x in g)


def _label_elt(s):
    return tuple(int(x) for x in s.split(",")) if s else ()


class FieldInstance:
    """A loaded, validated verification instance.

    Genuine instances carry an exact number field, S-units with valuations
    and Galois action, and a derived basis of the (S,T)-units.  Synthetic
    instances carry an abstract unit module with exact rational log data.
    All consistency checks run at load time; a file that fails them is
    rejected with a descriptive error.
    """

    def __init__(self, **kw):
        self.__dict__.update(kw)

    def __repr__(self):
        return f"FieldInstance({self.name!r}, kind={self.kind!r})"

    # -- numerics ----------------------------------------------------------

    def theta_value(self, digits: int):
        """The distinguished real root of the minimal polynomial, refined
        to the requested precision (genuine instances only)."""
        import mpmath as mp

        cached = self._theta_cache.get(digits)
        if cached is not None:
            return cached
        coeffs = self.nf.minpoly
        with mp.workdps(digits + 15):
            x0 = mp.mpf(self.theta_seed)
            f = lambda x: mp.polyval([mp.mpf(c) for c in coeffs[::-1]], x)
            root = mp.findroot(f, x0)
        self._theta_cache[digits] = root
        return root

    def embedding_value(self, elt, g, digits: int):
        """Real value of the embedding indexed by g on an exact element."""
        import mpmath as mp

        theta = self.theta_value(digits)
        with mp.workdps(digits + 15):
            return self.homs[self.group.reduce(g)](elt).numeric(theta)

    def exponent_element(self, vec):
        """Exact field element (-1)^{v_0} * prod gens_i^{v_i}."""
        out = self.nf.one() * (-1 if int(vec[0]) % 2 else 1)
        for e, u in zip(vec[1:], self.sunit_elements):
            if int(e):
                out = out * u ** int(e)
        return out

    def act_on_exponents(self, vec, g):
        g = self.group.reduce(g)
        M = self.action[g]
        out = [0] * len(vec)
        for i, e in enumerate(vec):
            if int(e):
                for j in range(len(vec)):
                    out[j] += int(e) * M[i][j]
        out[0] %= 2
        return out

    def valuation_row(self, vec):
        """Valuations of an exponent vector at the finite S-coordinates."""
        return [
            sum(int(e) * v for e, v in zip(vec[1:], col))
            for col in self._val_columns
        ]

    @property
    def finite_coordinates(self):
        """(place label, coset representative) pairs indexing the finite
        coordinates, in file order of places."""
        return self._finite_coords


def _element_power_coords(entry, nf):
    return nf.element([qparse(c) for c in entry])


def _validate_group_tables(G, kernel, conductor, gen_residues, coset_residues):
    """Rebuild the residue <-> element dictionary and check it is an
    isomorphism (Z/f)^x / kernel -> G."""
    units = [a for a in range(1, conductor) if _gcd(a, conductor) == 1]
    kernel = sorted(int(a) % conductor for a in kernel)
    if 1 not in kernel:
        raise ValueError("kernel subgroup does not contain 1")
    for a in kernel:
        if _gcd(a, conductor) != 1:
            raise ValueError("kernel contains a non-unit residue")
        for b in kernel:
            if (a * b) % conductor not in kernel:
                raise ValueError("kernel residues are not closed under "
                                 "multiplication")
    if len(units) != len(kernel) * G.order:
        raise ValueError("group order does not match (Z/f)^x / kernel")
    residue_of = {}
    for g in G.elements():
        r = 1
        for e, base in zip(g, gen_residues):
            r = (r * pow(int(base), int(e), conductor)) % conductor
        residue_of[g] = r
    claimed = {g: int(coset_residues[_elt_label(g)]) % conductor
               for g in G.elements()}
    element_of = {}
    for g, r in residue_of.items():
        for k in kernel:
            element_of[(r * k) % conductor] = g
    if sorted(element_of) != units:
        raise ValueError("coset representatives do not partition the "
                         "units mod conductor")
    for g, r in claimed.items():
        if element_of[r] != g:
            raise ValueError("coset_residues disagree with the generator "
                             "residues")
    # homomorphism property over all unit pairs
    for a in units:
        for b in units:
            ga, gb = element_of[a], element_of[b]
            if element_of[(a * b) % conductor] != G.compose(ga, gb):
                raise ValueError("residue-to-element map is not a "
                                 "homomorphism")
    return element_of, residue_of


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _expected_inertia(element_of, conductor, p):
    """Image in G of the units congruent to 1 modulo the prime-to-p part
    of the conductor."""
    fp = conductor
    while fp % p == 0:
        fp //= p
    gens = [element_of[a % conductor] for a in range(1, conductor)
            if _gcd(a, conductor) == 1 and a % fp == 1 % fp]
    return gens


def _check_place_arithmetic(place, element_of, conductor, G):
    p = place.residue
    if p is None:
        return
    if conductor % p == 0:
        gens = _expected_inertia(element_of, conductor, p)
        expected = Subgroup(G, gens)
        if expected != place.inertia:
            raise ValueError(f"place {place.label}: inertia does not match "
                             "the congruence subgroup")
        # frobenius class: image of any unit congruent to p modulo the
        # prime-to-p part, well defined modulo inertia
        fp = conductor
        while fp % p == 0:
            fp //= p
        cands = [a for a in range(1, conductor)
                 if _gcd(a, conductor) == 1 and a % fp == p % fp]
        cls = {element_of[a] for a in cands}
        frob_coset = {G.compose(place.frobenius, i)
                      for i in place.inertia.element_set}
        if cls != frob_coset:
            raise ValueError(f"place {place.label}: frobenius class "
                             "mismatch")
    else:
        if place.inertia.order != 1:
            raise ValueError(f"place {place.label}: unramified prime with "
                             "nontrivial inertia")
        if element_of[p % conductor] != place.frobenius:
            raise ValueError(f"place {place.label}: frobenius is not the "
                             f"class of {p}")
        if Subgroup(G, [place.frobenius]) != place.decomposition:
            raise ValueError(f"place {place.label}: decomposition group is "
                             "not generated by frobenius")


def _parse_place(G, entry) -> PlaceData:
    return PlaceData(
        label=str(entry["label"]),
        inertia=_parse_subgroup(G, entry.get("inertia", [])),
        decomposition=_parse_subgroup(G, entry.get("decomposition", [])),
        frobenius=tuple(entry["frobenius"]),
        norm=entry.get("norm"),
        residue=entry.get("residue"),
    )


def _sunit_validation(inst, data):
    """Exact checks on the shipped S-unit data."""
    nf = inst.nf
    G = inst.group
    gens = inst.sunit_elements
    k = len(gens)

    # norms factor over the S-residues with exponents matching the
    # valuation table: |N(u)| = prod over places p^{f_w v_w(u)}
    by_place = inst._finite_coords
    for i, u in enumerate(gens):
        total = Q(u.norm())
        for (label, rep), col in zip(by_place, inst._val_columns):
            place = inst.ext.place(label)
            f_w = place.residue_degree
            v = col[i]
            if v:
                total = total / Q(place.residue) ** (f_w * v)
        if abs(total) != 1:
            raise ValueError(
                f"unit {inst.sunit_names[i]}: norm does not factor over "
                f"the S-places (left over {total})")

    # valuation equivariance: v_{g w}(u) = v_w(g^{-1} u)
    coords_index = {pc: idx for idx, pc in enumerate(by_place)}
    for g in G.elements():
        ginv = G.inverse(g)
        for i in range(k):
            vec = [0] * (k + 1)
            vec[i + 1] = 1
            moved = inst.act_on_exponents(vec, ginv)
            row = inst.valuation_row(moved)
            orig = inst.valuation_row(vec)
            for idx, (label, rep) in enumerate(by_place):
                place = inst.ext.place(label)
                target = _coset_index(G, place, G.compose(g, rep))
                moved_idx = coords_index[(label, target)]
                if row[idx] != orig[moved_idx]:
                    raise ValueError(
                        f"valuation table is not Galois-equivariant at "
                        f"place {label}, unit {inst.sunit_names[i]}")

    # galois action rows are exact: g(u_i) = (-1)^{s} prod u_j^{e_j}
    for glabel, M in data["sunits"]["action"].items():
        g = _label_elt(glabel)
        hom = inst.homs[g]
        if M[0] != [1] + [0] * k:
            raise ValueError("action must fix -1")
        for i in range(k):
            lhs = hom(gens[i])
            rhs = inst.exponent_element(M[i + 1])
            if lhs != rhs:
                raise ValueError(
                    f"action row for {inst.sunit_names[i]} under "
                    f"{glabel} is wrong")


def _coset_index(G, place, g):
    """Representative of the coset g D_place among place.coset_reps()."""
    reps = place.coset_reps()
    dset = place.decomposition.element_set
    for rep in reps:
        if G.compose(G.inverse(rep), g) in dset:
            return rep
    raise AssertionError("coset representatives do not cover the group")


def _residue_dlog_columns(inst):
    """For each place above each T-residue: the dlog of -1 and of each
    S-unit generator in the residue field, with the group order.

    Returns a list of (modulus, [dlog_-1, dlog_u1, ...]); the residue
    fields themselves are cached on the instance for later congruence
    checks.
    """
    nf = inst.nf
    seen = set()
    out = []
    fields = []
    for place in inst.ext.T:
        ell = place.residue
        if ell in seen:
            continue
        seen.add(ell)
        if _gcd(ell, inst.index) != 1:
            raise ValueError(
                f"T-residue {ell} divides the index of the power basis; "
                "cannot build residue fields")
        factors = factor_mod(nf.minpoly, ell)
        f = place.residue_degree
        g_count = inst.group.order // place.decomposition.order
        if len(factors) != g_count or any(len(fac) - 1 != f
                                          for fac in factors):
            raise ValueError(
                f"minimal polynomial mod {ell} does not match the "
                f"decomposition data at {place.label}")
        for fac in factors:
            rf = ResidueField(ell, fac)
            fields.append(rf)
            gen = rf.generator()
            cols = [rf.dlog(rf.reduce(nf.element([-1])), gen)]
            for u in inst.sunit_elements:
                cols.append(rf.dlog(rf.reduce(u), gen))
            out.append((rf.order, cols))
    inst.t_residue_fields = fields
    return out


def _st_unit_basis(inst):
    """Basis of the (S,T)-units inside the exponent lattice.

    Returns (rows, torsion_trivial): `rows` are exponent vectors of the
    free generators in a canonical form (HNF of the projection away from
    the sign slot, sign bits normalized when well defined).
    """
    k = len(inst.sunit_elements)
    systems = _residue_dlog_columns(inst)
    # v in Z^{1+k} is an (S,T)-exponent vector iff v . cols = 0 mod m for
    # every residue-field column; int_kernel solves M x = 0, so feed it one
    # row per congruence with a slack column carrying the modulus
    n_sys = len(systems)
    M = [list(cols) + [0] * n_sys for (m, cols) in systems]
    for i in range(n_sys):
        M[i][1 + k + i] = systems[i][0]
    ker = _kernels.int_kernel(M)
    L_rows = [v[:1 + k] for v in ker]
    L = RationalLattice(1 + k, L_rows)
    # the exponent vector of (-1)^2 is always a relation
    two_e0 = [2] + [0] * k
    assert L.contains([Q(x) for x in two_e0]), "(-1)^2 must be a T-unit"
    e0 = [1] + [0] * k
    torsion_trivial = not L.contains([Q(x) for x in e0])

    # canonical basis of the free quotient: HNF of the projection to the
    # non-sign coordinates, then lift each row and fix its sign bit
    proj = [[int(b) for b in row[1:]] for row in
            ([list(map(int, b)) for b in _int_basis(L)])]
    H, _, pivots = _kernels.hnf([r for r in proj if any(r)])
    free_rows = []
    for i in range(len(pivots)):
        target = H[i]
        lift = _lift_with_sign(L, target, k)
        if torsion_trivial:
            lift[0] %= 2
        else:
            lift[0] = 0
        free_rows.append(lift)
    if len(free_rows) != k:
        raise ValueError("(S,T)-unit lattice has unexpected rank")
    return free_rows, torsion_trivial


def _int_basis(L: RationalLattice):
    rows = []
    for b in L.basis:
        assert all(c.denominator == 1 for c in b)
        rows.append([int(c) for c in b])
    return rows


def _lift_with_sign(L: RationalLattice, proj_row, k):
    """Find v in L with v[1:] = proj_row (the sign slot is determined
    modulo the torsion relation)."""
    for s in (0, 1, 2, 3):
        cand = [Q(s)] + [Q(x) for x in proj_row]
        if L.contains(cand):
            return [s] + list(proj_row)
    raise AssertionError("projection row does not lift to the lattice")


def load_field_instance(name_or_path: str) -> FieldInstance:
    """Load and validate a verification instance from JSON."""
    path = _resolve_path(str(name_or_path))
    with open(path) as fh:
        data = json.load(fh)
    kind = data.get("kind", "genuine")
    name = data.get("name") or os.path.splitext(os.path.basename(path))[0]
    if kind == "synthetic":
        return _load_synthetic(name, path, data)
    if kind != "genuine":
        raise ValueError(f"unknown instance kind {kind!r}")
    return _load_genuine(name, path, data)


def _load_genuine(name, path, data) -> FieldInstance:
    import mpmath as mp

    G = FiniteAbelianGroup(data["group"]["invariant_factors"])
    conductor = int(data["conductor"])
    kernel = [int(a) for a in data["kernel_subgroup"]]
    element_of, residue_of = _validate_group_tables(
        G, kernel, conductor, data["group"]["generator_residues"],
        data["group"]["coset_residues"])

    nf = NumberField([int(c) for c in data["minpoly"]])

    # integral basis and its index
    ib_rows = [[qparse(c) for c in row] for row in data["integral_basis"]]
    det = _q_det_local(ib_rows)
    if det == 0:
        raise ValueError("integral basis is singular")
    index = Q(1) / abs(det)
    if index.denominator != 1:
        raise ValueError("integral basis determinant must be 1/index")
    index = int(index)

    # galois action on the field, one hom per group element
    homs = {}
    for g in G.elements():
        img = _element_power_coords(data["galois_theta"][_elt_label(g)], nf)
        homs[g] = nf.hom(img)
    for g in G.elements():
        for h in G.elements():
            gh = G.compose(g, h)
            if homs[g](homs[h](nf.gen())) != homs[gh](nf.gen()):
                raise ValueError("galois_theta table is not a group action")

    # places
    finite = [_parse_place(G, e) for e in data["places"]["finite"]]
    t_places = [_parse_place(G, e) for e in data["places"]["T"]]
    roles = {str(e["label"]): e["role"] for e in data["places"]["finite"]}
    ram = tuple(p for p in finite if roles[p.label] == "ramified")
    s_prime = tuple(p for p in finite if roles[p.label] == "s_prime")
    if {p.label for p in ram} | {p.label for p in s_prime} != \
            {p.label for p in finite}:
        raise ValueError("every finite S-place needs role ramified or "
                         "s_prime")
    for p in finite + t_places:
        _check_place_arithmetic(p, element_of, conductor, G)
    for p in ram:
        if conductor % p.residue != 0:
            raise ValueError(f"ramified place {p.label} does not divide "
                             "the conductor")
    for p in s_prime + tuple(t_places):
        if conductor % p.residue == 0:
            raise ValueError(f"place {p.label} divides the conductor but "
                             "is listed as unramified")
    ext = ExtensionData(group=G, r=1, ramified_places=ram,
                        s_prime=s_prime, T=tuple(t_places))

    # s-units
    sdata = data["sunits"]
    names = [str(s) for s in sdata["names"]]
    gens = [_element_power_coords(c, nf) for c in sdata["coords"]]
    k = len(gens)

    inst = FieldInstance(
        kind="genuine", name=name, path=path,
        conductor=conductor, kernel_subgroup=sorted(kernel),
        group=G, ext=ext, nf=nf, homs=homs,
        element_of_residue=element_of, residue_of_element=residue_of,
        integral_basis=ib_rows, index=index,
        sunit_names=names, sunit_elements=gens,
        torsion_order=int(data["torsion_order"]),
        theta_seed=str(data["embeddings"]["values"][_elt_label(G.identity)]),
        _theta_cache={},
        class_numbers={},
    )

    # finite coordinates: (place, coset rep) in file order
    coords = []
    val_columns = []
    for p in finite:
        table = sdata["valuations"][p.label]
        reps = p.coset_reps()
        want = {_elt_label(rep) for rep in reps}
        if set(table) != want:
            raise ValueError(f"valuations at {p.label} must be keyed by "
                             f"coset representatives {sorted(want)}")
        for rep in reps:
            col = [int(x) for x in table[_elt_label(rep)]]
            if len(col) != k:
                raise ValueError("valuation column length mismatch")
            coords.append((p.label, rep))
            val_columns.append(col)
    inst._finite_coords = coords
    inst._val_columns = val_columns

    # action matrices per group element (extend from the shipped ones)
    action = {}
    shipped = {(_label_elt(gl)): M for gl, M in sdata["action"].items()}
    gen_list = [tuple(1 if j == i else 0 for j in range(G.rank))
                for i in range(G.rank)]
    for gen in gen_list:
        if gen not in shipped:
            raise ValueError("action must be shipped for every group "
                             "generator")
    ident = [[1 if i == j else 0 for j in range(k + 1)]
             for i in range(k + 1)]
    action[G.identity] = ident
    for g in G.elements():
        if g == G.identity:
            continue
        M = ident
        for e, gen in zip(g, gen_list):
            for _ in range(e):
                M = _int_mat_mul(M, shipped[gen])
        M = [row[:] for row in M]
        for row in M:
            row[0] %= 2
        action[g] = M
    inst.action = action

    _sunit_validation(inst, data)

    # torsion data
    if inst.torsion_order != 2:
        raise ValueError("totally real instances have torsion order 2")

    # embeddings cross-check at the shipped precision
    prec = int(data["embeddings"]["precision"])
    with mp.workdps(prec + 10):
        theta0 = inst.theta_value(prec)
        pol = mp.polyval([mp.mpf(c) for c in nf.minpoly[::-1]], theta0)
        if abs(pol) > mp.mpf(10) ** (-(prec - 8)):
            raise ValueError("theta seed does not refine to a root")
        seen = []
        for g in G.elements():
            val = homs[g](nf.gen()).numeric(theta0)
            claimed = mp.mpf(data["embeddings"]["values"][_elt_label(g)])
            if abs(val - claimed) > mp.mpf(10) ** (-(prec - 8)):
                raise ValueError(f"embedding value for {g} does not match")
            seen.append(val)
        for i in range(len(seen)):
            for j in range(i + 1, len(seen)):
                if abs(seen[i] - seen[j]) < mp.mpf(10) ** (-(prec - 8)):
                    raise ValueError("embeddings are not distinct")
        # shipped unit logs
        for i, u in enumerate(gens):
            for gi, g in enumerate(G.elements()):
                claimed = mp.mpf(sdata["logs"][i][gi])
                got = mp.log(abs(homs[g](u).numeric(theta0)))
                if abs(claimed - got) > mp.mpf(10) ** (-(prec - 12)):
                    raise ValueError(
                        f"log table mismatch for {names[i]} at {g}")

    # class numbers keyed by subsets of the finite S-labels
    cls = {}
    s_labels = sorted(p.label for p in ext.s_finite)
    for key, val in data["class_numbers"].items():
        labels = frozenset(key.split(",")) if key else frozenset()
        if not labels <= set(s_labels):
            raise ValueError(f"class number key {key!r} is not a subset "
                             "of the finite S-labels")
        cls[labels] = int(val)
        if cls[labels] < 1:
            raise ValueError("class numbers must be positive")
    need = [frozenset()]
    for sz in range(1, len(s_labels) + 1):
        need.extend(frozenset(c)
                    for c in itertools.combinations(s_labels, sz))
    for labels in need:
        if labels not in cls:
            raise ValueError(
                f"missing class number for subset {sorted(labels)}")
    inst.class_numbers = cls

    # the (S,T)-unit lattice
    rows, torsion_trivial = _st_unit_basis(inst)
    inst.u_st_basis = rows
    inst.u_st_torsion_trivial = torsion_trivial
    # independent exact congruence check: every basis element is 1 in
    # every residue field at T (the dlog kernel construction promises it)
    for row in rows:
        u = inst.exponent_element(row)
        for rf in inst.t_residue_fields:
            if rf.reduce(u) != rf.one():
                raise ValueError("derived (S,T)-unit fails its congruence")
    inst.u_st_lattice = RationalLattice(
        1 + k, [[Q(x) for x in r] for r in rows] + [[Q(2)] + [Q(0)] * k])

    # induced action of G on the free (S,T)-basis coordinates: express
    # (row_i . A_g) over (rows, 2e0) and drop the torsion coefficient
    solve_rows = [[Q(x) for x in r] for r in rows] + [[Q(2)] + [Q(0)] * k]
    u_st_action = {}
    for g in G.elements():
        mat = []
        for row in rows:
            img = inst.act_on_exponents(row, g)
            # the sign slot of the image is only defined mod 2; lift to
            # whichever representative lies in the lattice
            sol = solve_q(solve_rows, [Q(x) for x in img])
            if sol is None:
                img2 = list(img)
                img2[0] += 2
                sol = solve_q(solve_rows, [Q(x) for x in img2])
            if sol is None:
                raise ValueError("(S,T)-unit lattice is not Galois stable")
            coeffs = sol[:len(rows)]
            if any(c.denominator != 1 for c in coeffs):
                raise ValueError("(S,T)-unit action is not integral")
            mat.append([int(c) for c in coeffs])
        u_st_action[g] = mat
    inst.u_st_action = u_st_action

    inst.hypotheses = check_hypotheses(
        ext, r=1, torsion_order=2,
        torsion_survives=not torsion_trivial)
    return inst


def _load_synthetic(name, path, data) -> FieldInstance:
    G = FiniteAbelianGroup(data["group"]["invariant_factors"])
    finite = [_parse_place(G, e) for e in data["places"]["finite"]]
    t_places = [_parse_place(G, e) for e in data["places"]["T"]]
    roles = {str(e["label"]): e["role"] for e in data["places"]["finite"]}
    ram = tuple(p for p in finite if roles[p.label] == "ramified")
    s_prime = tuple(p for p in finite if roles[p.label] == "s_prime")
    r = int(data["r"])
    ext = ExtensionData(group=G, r=r, ramified_places=ram,
                        s_prime=s_prime, T=tuple(t_places))

    um = data["unit_module"]
    rank = int(um["rank"])
    action = {}
    gen_list = [tuple(1 if j == i else 0 for j in range(G.rank))
                for i in range(G.rank)]
    shipped = {_label_elt(gl): M for gl, M in um["action"].items()}
    ident = [[1 if i == j else 0 for j in range(rank)]
             for i in range(rank)]
    action[G.identity] = ident
    for g in G.elements():
        if g == G.identity:
            continue
        M = ident
        for e, gen in zip(g, gen_list):
            for _ in range(e):
                M = _int_mat_mul(M, shipped[gen])
        action[g] = M

    # exact rational log table: rows[i][g_index * r + j]
    logs = [[qparse(x) for x in row] for row in um["log_rows"]]
    if len(logs) != rank or any(len(row) != G.order * r for row in logs):
        raise ValueError("log table has the wrong shape")
    # equivariance: log(h(u), g, j) = log(u, g h, j)
    elements = G.elements()
    e_index = {g: i for i, g in enumerate(elements)}
    for h in elements:
        M = action[h]
        for i in range(rank):
            for g in elements:
                for j in range(r):
                    lhs = sum(Q(M[i][t]) * logs[t][e_index[g] * r + j]
                              for t in range(rank))
                    rhs = logs[i][e_index[G.compose(g, h)] * r + j]
                    if lhs != rhs:
                        raise ValueError("log table is not equivariant")

    lvalues = {tuple(int(x) for x in key.split(",")): qparse(val)
               for key, val in data["l_table"].items()}
    etas = {}
    for glabel, pairs in data.get("eta", {}).items():
        etas[glabel] = [(qparse(c), tuple(int(x) for x in ij))
                        for c, ij in pairs]

    inst = FieldInstance(
        kind="synthetic", name=name, path=path,
        group=G, ext=ext, r=r, rank=rank, action=action,
        log_table=logs, l_table=lvalues, etas=etas,
        torsion_order=int(data.get("torsion_order", 1)),
        class_numbers={},
    )
    inst.hypotheses = check_hypotheses(ext, r=r,
                                       torsion_order=inst.torsion_order)
    return inst


def _int_mat_mul(A, B):
    n, m = len(A), len(B[0])
    kk = len(B)
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        oi = out[i]
        for t in range(kk):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(m):
                    if Bt[j]:
                        oi[j] += a * Bt[j]
    return out


def _q_det_local(rows):
    n = len(rows)
    M = [[Q(x) for x in row] for row in rows]
    det = Q(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c] != 0), None)
        if piv is None:
            return Q(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        inv = Q(1) / M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] * inv
            if f != 0:
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return det
