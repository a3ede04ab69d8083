"""Tests for the arithmetic-data layer.

Covers place bookkeeping, vanishing orders, the hypothesis report,
subfield quotients, the relation module, and the packaged instances with
their derived congruence-unit lattices.  The lattice bases asserted here
were derived by hand from the congruence conditions and are frozen as
oracles; the loader must reproduce them exactly.
"""

import json
import os

import pytest

from rubinstark.arithdata import (
    CycleDivisor,
    ExtensionData,
    PlaceData,
    check_hypotheses,
    inertia_span,
    load_field_instance,
    order_of_vanishing,
    packaged_instances,
    sinnott_module,
    subfield_K_I,
    subfield_K_g,
)
from rubinstark.groups import Character, FiniteAbelianGroup, Subgroup
from rubinstark.lattices import RationalLattice, sinnott_index
from rubinstark.rationals import Q


@pytest.fixture(scope="module")
def sqrt5():
    return load_field_instance("q-sqrt5")


@pytest.fixture(scope="module")
def sqrt2():
    return load_field_instance("q-sqrt2")


@pytest.fixture(scope="module")
def quartic():
    return load_field_instance("q-sqrt2-sqrt5")


@pytest.fixture(scope="module")
def badt():
    return load_field_instance("q-sqrt5-badT")


@pytest.fixture(scope="module")
def synthetic():
    return load_field_instance("synthetic-r2")


C2 = FiniteAbelianGroup([2])
V4 = FiniteAbelianGroup([2, 2])


def _c2_place(**kw):
    full = Subgroup.full(C2)
    triv = Subgroup.trivial(C2)
    args = dict(label="p", inertia=triv, decomposition=full,
                frobenius=(1,), norm=None, residue=None)
    args.update(kw)
    return PlaceData(**args)


# -- place data ---------------------------------------------------------------


class TestPlaceData:
    def test_valid_inert_place(self):
        p = _c2_place(residue=7, norm=49)
        assert not p.ramified
        assert p.residue_degree == 2
        assert p.coset_reps() == [(0,)]

    def test_split_place_coset_reps(self):
        triv = Subgroup.trivial(C2)
        p = _c2_place(inertia=triv, decomposition=triv, frobenius=(0,),
                      residue=11, norm=11)
        # identity rep first, then the other coset
        assert p.coset_reps() == [(0,), (1,)]

    def test_frobenius_outside_decomposition(self):
        triv = Subgroup.trivial(C2)
        with pytest.raises(ValueError):
            _c2_place(inertia=triv, decomposition=triv, frobenius=(1,))

    def test_inertia_not_inside_decomposition(self):
        full = Subgroup.full(C2)
        triv = Subgroup.trivial(C2)
        with pytest.raises(ValueError):
            _c2_place(inertia=full, decomposition=triv, frobenius=(0,))

    def test_norm_residue_mismatch(self):
        with pytest.raises(ValueError):
            _c2_place(residue=7, norm=7)  # f = 2 forces norm 49

    def test_frobenius_and_inertia_generate_decomposition(self):
        triv = Subgroup.trivial(C2)
        with pytest.raises(ValueError):
            _c2_place(inertia=triv, decomposition=Subgroup.full(C2),
                      frobenius=(0,))


# -- vanishing orders ---------------------------------------------------------


class TestOrderOfVanishing:
    def test_quadratic(self, sqrt5):
        ext = sqrt5.ext
        triv = Character(C2, (0,))
        sgn = Character(C2, (1,))
        # both finite places have full decomposition group
        assert order_of_vanishing(sgn, ext) == 1
        # trivial character: r + |finite S-places of the base| - 1
        assert order_of_vanishing(triv, ext) == 2

    def test_quartic(self, quartic):
        ext = quartic.ext
        # the place prime to the conductor has decomposition <(1,1)>
        assert order_of_vanishing(Character(V4, (1, 0)), ext) == 1
        assert order_of_vanishing(Character(V4, (0, 1)), ext) == 1
        assert order_of_vanishing(Character(V4, (1, 1)), ext) == 2
        assert order_of_vanishing(Character(V4, (0, 0)), ext) == 3


# -- hypothesis report --------------------------------------------------------


class TestHypotheses:
    def test_packaged_instances_pass(self, sqrt5, sqrt2, quartic,
                                     synthetic):
        for inst in (sqrt5, sqrt2, quartic, synthetic):
            rep = inst.hypotheses
            assert rep.ok, rep.lines()

    def test_bad_torsion_fails_item_four(self, badt):
        rep = badt.hypotheses
        assert not rep.ok
        bad = rep.failures()
        assert [c.number for c in bad] == [4]
        assert "torsion" in bad[0].detail

    def test_empty_T_fails(self, sqrt5):
        ext = sqrt5.ext
        stripped = ExtensionData(group=ext.group, r=ext.r,
                                 ramified_places=ext.ramified_places,
                                 s_prime=ext.s_prime, T=())
        rep = check_hypotheses(stripped)
        assert not rep.ok
        assert rep.failures()[0].number == 4

    def test_torsion_parity_heuristic(self, sqrt5):
        ext = sqrt5.ext
        rep = check_hypotheses(ext, torsion_order=2)
        assert rep.ok  # T = {3}, odd norm kills -1
        rep2 = check_hypotheses(ext, torsion_order=2, torsion_survives=True)
        assert not rep2.ok

    def test_not_enough_places(self, sqrt5):
        ext = sqrt5.ext
        rep = check_hypotheses(ext, r=5)
        numbers = [c.number for c in rep.failures()]
        assert 2 in numbers and 3 in numbers

    def test_report_lines_one_per_check(self, sqrt5):
        lines = sqrt5.hypotheses.lines()
        assert len(lines) == 4
        assert all(isinstance(s, str) for s in lines)


# -- inertia spans and subfields ----------------------------------------------


class TestSubfields:
    def test_inertia_span(self, quartic):
        ext = quartic.ext
        assert inertia_span(ext, []).order == 1
        assert inertia_span(ext, ["2"]).elements() == [(0, 0), (1, 0)]
        assert inertia_span(ext, ["2", "5"]).order == 4
        with pytest.raises(ValueError):
            inertia_span(ext, ["3"])  # prime to the conductor

    def test_K_g_single_ramified_prime(self, quartic):
        sub = subfield_K_g(quartic.ext, ["2"])
        assert sub.group.order == 2
        assert sub.H.order == 2
        p2 = sub.place_map["2"]
        assert p2.ramified and p2.norm == 2
        assert sub.place_map["5"] is None
        p3 = sub.place_map["3"]
        assert not p3.ramified and p3.norm == 9
        (t7,) = sub.ext.T
        assert t7.decomposition.order == 1  # 7 splits here
        assert t7.norm == 7

    def test_K_g_empty_divisor(self, quartic):
        sub = subfield_K_g(quartic.ext, [])
        assert sub.group.order == 1
        assert sub.place_map["2"] is None and sub.place_map["5"] is None
        assert [p.norm for p in sub.ext.s_finite] == [3]
        assert [p.norm for p in sub.ext.T] == [7]

    def test_K_g_full_conductor(self, quartic):
        sub = subfield_K_g(quartic.ext, ["2", "5"])
        assert sub.group.order == 4
        assert sub.H.order == 1
        norms = {lbl: p.norm for lbl, p in sub.place_map.items()}
        # 2 is inert in the sqrt5 layer, so its residue degree stays 2
        assert norms == {"2": 4, "5": 25, "3": 9, "7": 49}

    def test_K_g_rejects_bad_divisor(self, quartic):
        with pytest.raises(ValueError):
            subfield_K_g(quartic.ext, ["3"])

    def test_K_g_quadratic(self, sqrt5):
        sub = subfield_K_g(sqrt5.ext, ["5"])
        assert sub.group.order == 2
        assert {lbl: p.norm for lbl, p in sub.place_map.items()} == \
            {"5": 5, "7": 49, "3": 9}

    def test_K_I_inert_prime_gives_sqrt10_layer(self, quartic):
        # killing the decomposition group at 3 leaves the quadratic layer
        # where 3 splits, 2 and 5 ramify, and 7 stays inert
        sub = subfield_K_I(quartic.ext, ["3"])
        assert sub.group.order == 2
        p3 = sub.place_map["3"]
        assert p3.norm == 3 and p3.decomposition.order == 1
        assert sub.place_map["2"].ramified
        assert sub.place_map["2"].norm == 2
        assert sub.place_map["5"].ramified
        assert sub.place_map["5"].norm == 5
        assert sub.place_map["7"].norm == 49
        # that layer has class number two, recorded under the subset key
        assert quartic.class_numbers[frozenset({"3"})] == 2

    def test_K_I_ramified_prime_kills_everything(self, quartic):
        sub = subfield_K_I(quartic.ext, ["2"])
        assert sub.group.order == 1
        assert {lbl: p.norm for lbl, p in sub.place_map.items()} == \
            {"2": 2, "5": 5, "3": 3, "7": 7}

    def test_K_I_rejects_T_label(self, quartic):
        with pytest.raises(ValueError):
            subfield_K_I(quartic.ext, ["7"])

    def test_K_I_keeps_all_of_S(self, quartic):
        for labels in (["3"], ["2"], ["2", "3"], []):
            sub = subfield_K_I(quartic.ext, labels)
            assert all(sub.place_map[lbl] is not None
                       for lbl in ("2", "5", "3", "7"))


# -- the relation module ------------------------------------------------------


class TestSinnottModule:
    def test_quadratic_full_divisor(self, sqrt5):
        mod = sinnott_module(sqrt5.ext, 1, ["5"])
        L = mod.lattice
        # generated by (1 - sigma)/2 and 1 + sigma
        assert L.contains([Q(1, 2), Q(-1, 2)])
        assert L.contains([Q(1), Q(1)])
        assert not L.contains([Q(1, 2), Q(1, 2)])
        assert sinnott_index(L, RationalLattice.standard(2)) == Q(1)

    def test_empty_divisor_is_group_ring(self, sqrt5):
        mod = sinnott_module(sqrt5.ext, 1, [])
        L = mod.lattice
        assert L == RationalLattice.standard(2)

    def test_quartic_stability_and_norm_element(self, quartic):
        mod = sinnott_module(quartic.ext, 1, ["2", "5"])
        L = mod.lattice
        assert L.rank == 4
        assert L.contains([Q(1)] * 4)  # the full norm element
        for g in V4.elements():
            for row in L.basis:
                assert L.contains(mod.act(row, g))

    def test_power_matches_rank(self, sqrt5):
        # r = 2 squares the norm elements
        mod = sinnott_module(sqrt5.ext, 2, ["5"])
        assert mod.lattice.contains([Q(2), Q(2)])


# -- packaged instances -------------------------------------------------------


class TestPackagedData:
    def test_listing(self):
        names = packaged_instances()
        assert names == sorted(names)
        for want in ("q-sqrt5", "q-sqrt2", "q-sqrt2-sqrt5",
                     "q-sqrt5-badT", "synthetic-r2"):
            assert want in names

    def test_load_by_name_and_by_path(self, sqrt5):
        from rubinstark.arithdata import _data_dir
        direct = load_field_instance(
            os.path.join(_data_dir(), "q-sqrt5.json"))
        assert direct.u_st_basis == sqrt5.u_st_basis

    def test_unknown_name(self):
        with pytest.raises(FileNotFoundError):
            load_field_instance("no-such-instance")


class TestDerivedUnits:
    """The congruence-unit bases the loader derives from the shipped
    valuation/residue data, frozen against hand derivations."""

    def test_sqrt5_basis(self, sqrt5):
        assert sqrt5.u_st_basis == [[0, 2, 1, 0], [1, 0, 2, 0],
                                    [0, 0, 0, 1]]
        assert sqrt5.u_st_torsion_trivial

    def test_sqrt5_matches_hand_lattice(self, sqrt5):
        # hand solution of the congruence at 3: -eps^4, eps^2 sqrt5, 7
        hand = RationalLattice(4, [
            [Q(1), Q(4), Q(0), Q(0)],
            [Q(0), Q(2), Q(1), Q(0)],
            [Q(0), Q(0), Q(0), Q(1)],
            [Q(2), Q(0), Q(0), Q(0)],
        ])
        assert hand == sqrt5.u_st_lattice

    def test_sqrt2_basis(self, sqrt2):
        assert sqrt2.u_st_basis == [[0, 3, 0, 1], [0, 0, 2, 1],
                                    [1, 0, 0, 2]]
        assert sqrt2.u_st_torsion_trivial

    def test_sqrt2_matches_hand_lattice(self, sqrt2):
        # hand solution of the congruence at 5: -eps^6, eps^3*3, 2/27
        hand = RationalLattice(4, [
            [Q(1), Q(6), Q(0), Q(0)],
            [Q(0), Q(3), Q(0), Q(1)],
            [Q(0), Q(0), Q(2), Q(-3)],
            [Q(2), Q(0), Q(0), Q(0)],
        ])
        assert hand == sqrt2.u_st_lattice

    def test_bad_torsion_basis(self, badt):
        assert badt.u_st_basis == [[0, 3, 0, 0], [0, 0, 1, 0],
                                   [0, 0, 0, 1]]
        assert not badt.u_st_torsion_trivial

    def test_quartic_basis(self, quartic):
        assert quartic.u_st_basis == [
            [1, 1, 0, 16, 0, 1, 0, 10],
            [0, 0, 2, 12, 0, 1, 0, 1],
            [0, 0, 0, 24, 0, 1, 0, 10],
            [0, 0, 0, 0, 1, 1, 0, 2],
            [1, 0, 0, 0, 0, 2, 0, 8],
            [0, 0, 0, 0, 0, 0, 1, 5],
            [1, 0, 0, 0, 0, 0, 0, 12],
        ]
        assert quartic.u_st_torsion_trivial

    def test_quartic_known_members(self, quartic):
        # coordinates: (sign, eps2, eps5, v, sqrt2, sqrt5, theta, theta')
        L = quartic.u_st_lattice
        members = [
            [0, 6, 0, 0, 0, 0, 0, 0],    # eps2^6
            [1, 0, -8, 0, 0, 0, 0, 0],   # -eps5^-8
            [1, 0, 0, 0, 0, 0, -3, -3],  # -1/27
        ]
        for v in members:
            assert L.contains([Q(x) for x in v])
        assert not L.contains([Q(0), Q(1)] + [Q(0)] * 6)  # eps2 itself

    def test_flagship_known_members(self, sqrt5, sqrt2):
        assert sqrt5.u_st_lattice.contains(
            [Q(1), Q(-4), Q(0), Q(0)])        # -eps^-4
        assert sqrt5.u_st_lattice.contains(
            [Q(0), Q(0), Q(0), Q(-1)])        # 1/7
        assert sqrt2.u_st_lattice.contains(
            [Q(1), Q(-6), Q(0), Q(0)])        # -eps^-6
        assert sqrt2.u_st_lattice.contains(
            [Q(1), Q(0), Q(0), Q(-2)])        # -1/9

    def test_congruence_holds_exactly(self, sqrt5, quartic):
        # every derived basis element reduces to 1 in every residue field
        # at the auxiliary places
        for inst in (sqrt5, quartic):
            for row in inst.u_st_basis:
                u = inst.exponent_element(row)
                for rf in inst.t_residue_fields:
                    assert rf.reduce(u) == rf.one()

    def test_action_is_a_group_homomorphism(self, sqrt5, quartic):
        for inst in (sqrt5, quartic):
            G = inst.group
            rows = inst.u_st_basis
            for g in G.elements():
                M = inst.u_st_action[g]
                assert len(M) == len(rows)
                # involution: M_g^2 = 1 for these two-torsion groups
                MM = [[sum(M[i][t] * M[t][j] for t in range(len(M)))
                       for j in range(len(M))]
                      for i in range(len(M))]
                assert MM == [[1 if i == j else 0
                               for j in range(len(M))]
                              for i in range(len(M))]

    def test_action_matches_exponent_action(self, sqrt5):
        # row_i . A_g agrees with sum_j M[i][j] row_j up to torsion
        g = (1,)
        M = sqrt5.u_st_action[g]
        rows = sqrt5.u_st_basis
        for i, row in enumerate(rows):
            img = sqrt5.act_on_exponents(row, g)
            lin = [sum(M[i][j] * rows[j][c] for j in range(len(rows)))
                   for c in range(len(row))]
            assert [x % 2 for x in lin[:1]] + lin[1:] == \
                [img[0] % 2] + list(img[1:])


class TestInstanceNumerics:
    def test_theta_values(self, sqrt5, sqrt2, quartic):
        import mpmath as mp
        with mp.workdps(80):
            assert abs(sqrt5.theta_value(60) - mp.sqrt(5)) < mp.mpf(10) ** -55
            assert abs(sqrt2.theta_value(60) - mp.sqrt(2)) < mp.mpf(10) ** -55
            target = mp.sqrt(2) + mp.sqrt(5)
            assert abs(quartic.theta_value(60) - target) < mp.mpf(10) ** -55

    def test_valuation_rows(self, sqrt5, quartic):
        # eps^2 sqrt5 has valuation 1 at the place above 5, none above 7
        assert sqrt5.valuation_row([0, 2, 1, 0]) == [1, 0]
        assert sqrt5.finite_coordinates == [("5", (0,)), ("7", (0,))]
        # theta is a uniformizer at the first place above 3 only
        row = [0, 0, 0, 0, 0, 0, 1, 0]
        assert quartic.valuation_row(row) == [0, 0, 1, 0]
        assert [lbl for lbl, _ in quartic.finite_coordinates] == \
            ["2", "5", "3", "3"]

    def test_exponent_element(self, sqrt5):
        # (0,0,1,0) is sqrt5, whose square is 5
        u = sqrt5.exponent_element([0, 0, 1, 0])
        assert u * u == sqrt5.nf.element([Q(5), Q(0)])
        minus_one = sqrt5.exponent_element([1, 0, 0, 0])
        assert minus_one == sqrt5.nf.element([Q(-1), Q(0)])

    def test_embedding_signs(self, quartic):
        import mpmath as mp
        # the four embeddings of theta are +-sqrt2 +- sqrt5
        vals = sorted(float(quartic.embedding_value(
            quartic.nf.gen(), g, 40)) for g in V4.elements())
        want = sorted(float(e2 * mp.sqrt(2) + e5 * mp.sqrt(5))
                      for e2 in (1, -1) for e5 in (1, -1))
        for a, b in zip(vals, want):
            assert abs(a - b) < 1e-12


class TestSyntheticInstance:
    def test_shape(self, synthetic):
        assert synthetic.kind == "synthetic"
        assert synthetic.ext.r == 2
        assert synthetic.rank == 8
        assert synthetic.group.order == 4

    def test_l_table_keys_are_rank_characters(self, synthetic):
        keys = set(synthetic.l_table)
        assert keys == {(0, 1), (1, 0)}
        for chi_powers in keys:
            chi = Character(synthetic.group, chi_powers)
            assert order_of_vanishing(chi, synthetic.ext) == 2

    def test_eta_subsets(self, synthetic):
        assert set(synthetic.etas) == {"", "p1", "p2", "p1,p2"}
        assert synthetic.etas[""] == []
        for key in ("p1", "p2", "p1,p2"):
            for coeff, (i, j) in synthetic.etas[key]:
                assert 0 <= i < j < synthetic.rank
                assert coeff.denominator >= 1

    def test_log_table_is_equivariant(self, synthetic):
        # spot check: log(h(u), g, j) = log(u, gh, j)
        G = synthetic.group
        elements = G.elements()
        idx = {g: i for i, g in enumerate(elements)}
        h = (1, 0)
        M = synthetic.action[h]
        logs = synthetic.log_table
        r = synthetic.r
        for i in (0, 3, 7):
            for g in elements:
                for j in range(r):
                    lhs = sum(Q(M[i][t]) * logs[t][idx[g] * r + j]
                              for t in range(synthetic.rank))
                    assert lhs == logs[i][idx[G.compose(g, h)] * r + j]


# -- loader rejects inconsistent files ----------------------------------------


def _tamper(tmp_path, mutate):
    from rubinstark.arithdata import _data_dir
    with open(os.path.join(_data_dir(), "q-sqrt5.json")) as fh:
        doc = json.load(fh)
    mutate(doc)
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestLoaderRejections:
    def test_broken_frobenius(self, tmp_path):
        def mutate(doc):
            for e in doc["places"]["finite"]:
                if e["label"] == "7":
                    e["frobenius"] = [0]
        with pytest.raises(ValueError):
            load_field_instance(_tamper(tmp_path, mutate))

    def test_broken_unit_action(self, tmp_path):
        def mutate(doc):
            doc["sunits"]["action"]["1"][1][1] *= -1
        with pytest.raises(ValueError):
            load_field_instance(_tamper(tmp_path, mutate))

    def test_broken_valuation(self, tmp_path):
        def mutate(doc):
            doc["sunits"]["valuations"]["5"]["0"][1] += 1
        with pytest.raises(ValueError):
            load_field_instance(_tamper(tmp_path, mutate))

    def test_missing_class_number(self, tmp_path):
        def mutate(doc):
            doc["class_numbers"].pop("5,7")
        with pytest.raises(ValueError):
            load_field_instance(_tamper(tmp_path, mutate))

    def test_broken_log_table(self, tmp_path):
        def mutate(doc):
            bad = float(doc["sunits"]["logs"][0][0]) + 1e-6
            doc["sunits"]["logs"][0][0] = repr(bad)
        with pytest.raises(ValueError):
            load_field_instance(_tamper(tmp_path, mutate))

    def test_broken_group_table(self, tmp_path):
        def mutate(doc):
            # residue 4 lies in the identity coset, killing injectivity
            doc["group"]["coset_residues"]["1"] = 4
        with pytest.raises(ValueError):
            load_field_instance(_tamper(tmp_path, mutate))

    def test_coset_representative_may_vary(self, tmp_path, sqrt5):
        # 3 and 2 represent the same coset mod the kernel; swapping the
        # representative is harmless and must load to the same lattice
        def mutate(doc):
            doc["group"]["coset_residues"]["1"] = 3
        inst = load_field_instance(_tamper(tmp_path, mutate))
        assert inst.u_st_basis == sqrt5.u_st_basis
