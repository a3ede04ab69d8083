"""Build the packaged verification instances.

Every exact datum is either hand-checkable (conductors, kernels, place
data, unit exponents) or recomputed here from the minimal polynomial;
numerics are evaluated at 120 digits.  Each file is round-tripped through
the loader, which re-validates all of it, before the script reports
success.
"""

import json
import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import mpmath as mp

from rubinstark.arithdata import (
    ExtensionData,
    PlaceData,
    load_field_instance,
)
from rubinstark.groups import FiniteAbelianGroup, Subgroup, enumerate_characters
from rubinstark.groupring import GroupRing, e_S_r, euler_factor, delta_T
from rubinstark.numberfield import NumberField, solve_q
from rubinstark.rationals import Q, qparse, qstr

PREC = 120
DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "src",
                        "rubinstark", "data")


def elt_label(g):
    return ",".join(str(x) for x in g)


def nstr(x):
    return mp.nstr(x, PREC, strip_zeros=False)


def numeric_tables(nf, G, galois_theta, units, theta0):
    """Embedding values and unit logs at PREC digits, in G.elements()
    order (which the loader also uses for the log columns)."""
    with mp.workdps(PREC + 20):
        embeddings = {}
        for g in G.elements():
            embeddings[elt_label(g)] = nstr(galois_theta[g].numeric(theta0))
        logs = []
        for u in units:
            row = []
            for g in G.elements():
                hom = nf.hom(galois_theta[g])
                row.append(nstr(mp.log(abs(hom(u).numeric(theta0)))))
            logs.append(row)
    return embeddings, logs


def genuine_quadratic(name, *, minpoly, conductor, kernel, gen_residue,
                      coset_res, sigma_theta, integral_basis, theta_expr,
                      unit_names, unit_coords, valuations, action_sigma,
                      places, T, cls):
    G = FiniteAbelianGroup([2])
    nf = NumberField(minpoly)
    galois_theta = {(0,): nf.gen(), (1,): nf.element(sigma_theta)}
    unit_elts = [nf.element([qparse(c) for c in u]) for u in unit_coords]
    with mp.workdps(PREC + 20):
        theta0 = theta_expr()
    embeddings, logs = numeric_tables(nf, G, galois_theta, unit_elts,
                                      theta0)
    return {
        "kind": "genuine",
        "name": name,
        "conductor": conductor,
        "kernel_subgroup": kernel,
        "group": {
            "invariant_factors": [2],
            "generator_residues": [gen_residue],
            "coset_residues": coset_res,
        },
        "minpoly": minpoly,
        "integral_basis": integral_basis,
        "embeddings": {"precision": PREC, "values": embeddings},
        "galois_theta": {elt_label(g): [qstr(c) for c in v.coords]
                         for g, v in galois_theta.items()},
        "places": {"finite": places, "T": T},
        "s_prime": [p["label"] for p in places if p["role"] == "s_prime"],
        "T_labels": [p["label"] for p in T],
        "sunits": {
            "names": unit_names,
            "coords": [[qstr(qparse(c)) for c in u] for u in unit_coords],
            "valuations": valuations,
            "action": {"1": action_sigma},
            "logs": logs,
        },
        "class_numbers": cls,
        "torsion_order": 2,
    }


def make_q_sqrt5():
    return genuine_quadratic(
        "q-sqrt5",
        minpoly=[-5, 0, 1],
        conductor=5,
        kernel=[1, 4],
        gen_residue=2,
        coset_res={"0": 1, "1": 2},
        sigma_theta=[Q(0), Q(-1)],
        integral_basis=[["1", "0"], ["1/2", "1/2"]],
        theta_expr=lambda: mp.sqrt(5),
        unit_names=["eps", "sqrt5", "seven"],
        unit_coords=[["1/2", "1/2"], ["0", "1"], ["7", "0"]],
        valuations={"5": {"0": [0, 1, 0]}, "7": {"0": [0, 0, 1]}},
        action_sigma=[[1, 0, 0, 0],
                      [1, -1, 0, 0],
                      [1, 0, 1, 0],
                      [0, 0, 0, 1]],
        places=[
            {"label": "5", "residue": 5, "norm": 5, "role": "ramified",
             "inertia": [[1]], "decomposition": [[1]], "frobenius": [0]},
            {"label": "7", "residue": 7, "norm": 49, "role": "s_prime",
             "inertia": [], "decomposition": [[1]], "frobenius": [1]},
        ],
        T=[{"label": "3", "residue": 3, "norm": 9,
            "inertia": [], "decomposition": [[1]], "frobenius": [1]}],
        cls={"": 1, "5": 1, "7": 1, "5,7": 1},
    )


def make_q_sqrt2():
    return genuine_quadratic(
        "q-sqrt2",
        minpoly=[-2, 0, 1],
        conductor=8,
        kernel=[1, 7],
        gen_residue=3,
        coset_res={"0": 1, "1": 3},
        sigma_theta=[Q(0), Q(-1)],
        integral_basis=[["1", "0"], ["0", "1"]],
        theta_expr=lambda: mp.sqrt(2),
        unit_names=["eps2", "sqrt2", "three"],
        unit_coords=[["1", "1"], ["0", "1"], ["3", "0"]],
        valuations={"2": {"0": [0, 1, 0]}, "3": {"0": [0, 0, 1]}},
        action_sigma=[[1, 0, 0, 0],
                      [1, -1, 0, 0],
                      [1, 0, 1, 0],
                      [0, 0, 0, 1]],
        places=[
            {"label": "2", "residue": 2, "norm": 2, "role": "ramified",
             "inertia": [[1]], "decomposition": [[1]], "frobenius": [0]},
            {"label": "3", "residue": 3, "norm": 9, "role": "s_prime",
             "inertia": [], "decomposition": [[1]], "frobenius": [1]},
        ],
        T=[{"label": "5", "residue": 5, "norm": 25,
            "inertia": [], "decomposition": [[1]], "frobenius": [1]}],
        cls={"": 1, "2": 1, "3": 1, "2,3": 1},
    )


def make_q_sqrt5_badT():
    # same field as q-sqrt5 presented on the power basis of (1+sqrt5)/2,
    # with T = {2}: -1 is congruent to 1 at the T-place, so the running
    # torsion hypothesis fails and verification must refuse to certify
    return genuine_quadratic(
        "q-sqrt5-badT",
        minpoly=[-1, -1, 1],
        conductor=5,
        kernel=[1, 4],
        gen_residue=2,
        coset_res={"0": 1, "1": 2},
        sigma_theta=[Q(1), Q(-1)],
        integral_basis=[["1", "0"], ["0", "1"]],
        theta_expr=lambda: (1 + mp.sqrt(5)) / 2,
        unit_names=["eps", "sqrt5", "seven"],
        unit_coords=[["0", "1"], ["-1", "2"], ["7", "0"]],
        valuations={"5": {"0": [0, 1, 0]}, "7": {"0": [0, 0, 1]}},
        action_sigma=[[1, 0, 0, 0],
                      [1, -1, 0, 0],
                      [1, 0, 1, 0],
                      [0, 0, 0, 1]],
        places=[
            {"label": "5", "residue": 5, "norm": 5, "role": "ramified",
             "inertia": [[1]], "decomposition": [[1]], "frobenius": [0]},
            {"label": "7", "residue": 7, "norm": 49, "role": "s_prime",
             "inertia": [], "decomposition": [[1]], "frobenius": [1]},
        ],
        T=[{"label": "2", "residue": 2, "norm": 4,
            "inertia": [], "decomposition": [[1]], "frobenius": [1]}],
        cls={"": 1, "5": 1, "7": 1, "5,7": 1},
    )


def make_quartic():
    nf = NumberField([9, 0, -14, 0, 1])
    G = FiniteAbelianGroup([2, 2])
    th = nf.gen()
    s2 = (th ** 3 - th * 11) * Q(1, 6)
    s5 = (th * 17 - th ** 3) * Q(1, 6)
    assert s2 * s2 == nf.element([2]) and s5 * s5 == nf.element([5])
    s10 = s2 * s5
    half = Q(1, 2)
    eps2 = nf.element([1]) + s2
    eps5 = nf.element([c * half for c in (nf.element([1]) + s5).coords])
    v = nf.element([c * half for c in
                    (nf.element([3]) + s2 + s5 + s10).coords])
    theta2 = s5 - s2
    units = [eps2, eps5, v, s2, s5, th, theta2]
    names = ["eps2", "eps5", "v", "sqrt2", "sqrt5", "theta", "theta2"]

    galois_theta = {
        (0, 0): th,
        (1, 0): theta2,                                   # tau2
        (0, 1): nf.element([-c for c in theta2.coords]),  # tau5
        (1, 1): nf.element([-c for c in th.coords]),      # tau10
    }
    # integral basis {1, sqrt2, (1+sqrt5)/2, (sqrt2+sqrt10)/2}
    b4 = nf.element([c * half for c in (s2 + s10).coords])
    ib = [nf.one(), s2, eps5, b4]
    rows = [[qstr(c) for c in b.coords] for b in ib]

    with mp.workdps(PREC + 20):
        theta0 = mp.sqrt(2) + mp.sqrt(5)
    embeddings, logs = numeric_tables(nf, G, galois_theta, units, theta0)

    act_tau2 = [
        [1, 0, 0, 0, 0, 0, 0, 0],
        [1, -1, 0, 0, 0, 0, 0, 0],   # eps2 -> -1/eps2
        [0, 0, 1, 0, 0, 0, 0, 0],    # eps5 fixed
        [0, 0, 1, -1, 0, 0, 0, 0],   # v -> eps5/v
        [1, 0, 0, 0, 1, 0, 0, 0],    # sqrt2 -> -sqrt2
        [0, 0, 0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 1],    # theta -> theta2
        [0, 0, 0, 0, 0, 0, 1, 0],
    ]
    act_tau5 = [
        [1, 0, 0, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0, 0, 0],
        [1, 0, -1, 0, 0, 0, 0, 0],   # eps5 -> -1/eps5
        [1, 1, 0, -1, 0, 0, 0, 0],   # v -> -eps2/v
        [0, 0, 0, 0, 1, 0, 0, 0],
        [1, 0, 0, 0, 0, 1, 0, 0],    # sqrt5 -> -sqrt5
        [1, 0, 0, 0, 0, 0, 0, 1],    # theta -> -theta2
        [1, 0, 0, 0, 0, 0, 1, 0],    # theta2 -> -theta
    ]

    return {
        "kind": "genuine",
        "name": "q-sqrt2-sqrt5",
        "conductor": 40,
        "kernel_subgroup": [1, 9, 31, 39],
        "group": {
            "invariant_factors": [2, 2],
            "generator_residues": [11, 33],
            "coset_residues": {"0,0": 1, "1,0": 11, "0,1": 33, "1,1": 3},
        },
        "minpoly": [9, 0, -14, 0, 1],
        "integral_basis": rows,
        "embeddings": {"precision": PREC, "values": embeddings},
        "galois_theta": {elt_label(g): [qstr(c) for c in v.coords]
                         for g, v in galois_theta.items()},
        "places": {
            "finite": [
                {"label": "2", "residue": 2, "norm": 4, "role": "ramified",
                 "inertia": [[1, 0]],
                 "decomposition": [[1, 0], [0, 1]],
                 "frobenius": [0, 1]},
                {"label": "5", "residue": 5, "norm": 25,
                 "role": "ramified",
                 "inertia": [[0, 1]],
                 "decomposition": [[1, 0], [0, 1]],
                 "frobenius": [1, 1]},
                {"label": "3", "residue": 3, "norm": 9, "role": "s_prime",
                 "inertia": [], "decomposition": [[1, 1]],
                 "frobenius": [1, 1]},
            ],
            "T": [
                {"label": "7", "residue": 7, "norm": 49,
                 "inertia": [], "decomposition": [[0, 1]],
                 "frobenius": [0, 1]},
            ],
        },
        "s_prime": ["3"],
        "T_labels": ["7"],
        "sunits": {
            "names": names,
            "coords": [[qstr(c) for c in u.coords] for u in units],
            "valuations": {
                "2": {"0,0": [0, 0, 0, 1, 0, 0, 0]},
                "5": {"0,0": [0, 0, 0, 0, 1, 0, 0]},
                "3": {"0,0": [0, 0, 0, 0, 0, 1, 0],
                      "0,1": [0, 0, 0, 0, 0, 0, 1]},
            },
            "action": {"1,0": act_tau2, "0,1": act_tau5},
            "logs": logs,
        },
        "class_numbers": {"": 1, "2": 1, "3": 2, "5": 1, "2,3": 1,
                          "2,5": 1, "3,5": 1, "2,3,5": 1},
        "torsion_order": 2,
    }


# -- synthetic rank-2 instance -------------------------------------------------


def chi_sign_value(x, chi):
    """chi(x) for a rational element of a group ring with exponent <= 2."""
    total = Q(0)
    for i, g in enumerate(x.ring.elements):
        c = x.coeffs[i]
        if c != 0:
            total += Q(c) * (1 if chi.power_of_zeta(g) == 0 else -1)
    return total


def make_synthetic():
    G = FiniteAbelianGroup([2, 2])
    ring = GroupRing(G)
    elements = G.elements()
    e_index = {g: i for i, g in enumerate(elements)}
    r = 2
    rank = 8

    p1 = PlaceData(label="p1", inertia=Subgroup(G, [(1, 0)]),
                   decomposition=Subgroup.full(G), frobenius=(0, 1))
    p2 = PlaceData(label="p2", inertia=Subgroup(G, [(0, 1)]),
                   decomposition=Subgroup.full(G), frobenius=(1, 0))
    q_pl = PlaceData(label="q", inertia=Subgroup.trivial(G),
                     decomposition=Subgroup(G, [(1, 1)]), frobenius=(1, 1))
    t_pl = PlaceData(label="t", inertia=Subgroup.trivial(G),
                     decomposition=Subgroup(G, [(0, 1)]), frobenius=(0, 1),
                     norm=7, residue=None)
    ext = ExtensionData(group=G, r=r, ramified_places=(p1, p2),
                        s_prime=(q_pl,), T=(t_pl,))

    rng = random.Random(20260819)
    base_log = {}
    for t in (0, 1):
        for g in elements:
            for j in range(r):
                base_log[(t, g, j)] = Q(rng.randint(-9, 9),
                                        rng.choice([1, 2, 3]))
    basis = [(t, h) for t in (0, 1) for h in elements]

    def loggy(i, g, j):
        t, h = basis[i]
        return base_log[(t, G.compose(g, h), j)]

    log_rows = [[loggy(i, g, j) for g in elements for j in range(r)]
                for i in range(rank)]

    def gen_action(gen):
        M = [[0] * rank for _ in range(rank)]
        for i, (t, h) in enumerate(basis):
            M[i][basis.index((t, G.compose(gen, h)))] = 1
        return M

    action = {"1,0": gen_action((1, 0)), "0,1": gen_action((0, 1))}

    # group-ring-valued pairing of a wedge with the distinguished places
    def lam(i, j):
        out = [Q(0)] * G.order
        for g in elements:
            out[e_index[G.inverse(g)]] -= loggy(i, g, j)
        return ring.from_coeffs(out)

    def wedge_image(i1, i2):
        a, b = lam(i1, 0), lam(i1, 1)
        c, d = lam(i2, 0), lam(i2, 1)
        return a * d - b * c

    pairs = [(i, j) for i in range(rank) for j in range(rank) if i < j]
    e = e_S_r(ring, ext, r)
    rows = [list((e * wedge_image(i, j)).rational_form().coeffs)
            for (i, j) in pairs]

    r_chars = [chi for chi in enumerate_characters(G)
               if chi.powers in ((0, 1), (1, 0))]

    # reference wedge for the full conductor: first single wedge whose
    # image is invertible on every relevant character component
    eta_full = None
    for (i, j) in pairs:
        img = (e * wedge_image(i, j)).rational_form()
        if all(chi_sign_value(img, chi) != 0 for chi in r_chars):
            eta_full = [(Q(1), (i, j))]
            break
    assert eta_full is not None, "no nondegenerate wedge found"
    rho = ring.zero()
    for c, (i, j) in eta_full:
        rho = rho + (e * wedge_image(i, j)).scale(c)
    rho = rho.rational_form()

    def euler_product(labels):
        out = delta_T(ring, [t_pl])
        for p in (p1, p2, q_pl):
            if p.label in labels:
                out = out * euler_factor(ring, p)
        return out

    def norm_sq(H):
        n = ring.norm_element(H)
        return n * n

    l_table = {}
    for chi in r_chars:
        denom = chi_sign_value(euler_product({"p1", "p2", "q"}), chi)
        assert denom != 0
        val = chi_sign_value(rho, chi) / denom
        assert val != 0, "degenerate reference wedge; adjust eta_full"
        l_table[",".join(str(p) for p in chi.powers)] = qstr(val)

    omega = ring.one()
    for chi in r_chars:
        e_chi = ring.idempotent(chi).rational_form()
        lv = qparse(l_table[",".join(str(p) for p in chi.powers)])
        omega = omega + e_chi.scale(lv - 1)

    inertia = {"p1": Subgroup(G, [(1, 0)]), "p2": Subgroup(G, [(0, 1)])}
    etas = {}
    for divisor in ((), ("p1",), ("p2",), ("p1", "p2")):
        H = Subgroup.trivial(G)
        for lbl in ("p1", "p2"):
            if lbl not in divisor:
                H = H.join(inertia[lbl])
        target = omega * euler_product(set(divisor) | {"q"}) * norm_sq(H)
        target = (e * target).rational_form()
        if divisor == ("p1", "p2"):
            sol_pairs = eta_full
        else:
            sol = solve_q([[Q(x) for x in row] for row in rows],
                          list(target.coeffs))
            assert sol is not None, f"no exact solution for {divisor}"
            sol_pairs = [(c, pairs[i]) for i, c in enumerate(sol)
                         if c != 0]
        key = ",".join(divisor)
        etas[key] = [[qstr(c), list(ij)] for c, ij in sol_pairs]

    return {
        "kind": "synthetic",
        "name": "synthetic-r2",
        "r": r,
        "group": {"invariant_factors": [2, 2]},
        "places": {
            "finite": [
                {"label": "p1", "role": "ramified", "inertia": [[1, 0]],
                 "decomposition": [[1, 0], [0, 1]], "frobenius": [0, 1]},
                {"label": "p2", "role": "ramified", "inertia": [[0, 1]],
                 "decomposition": [[1, 0], [0, 1]], "frobenius": [1, 0]},
                {"label": "q", "role": "s_prime", "inertia": [],
                 "decomposition": [[1, 1]], "frobenius": [1, 1]},
            ],
            "T": [
                {"label": "t", "inertia": [], "decomposition": [[0, 1]],
                 "frobenius": [0, 1], "norm": 7},
            ],
        },
        "unit_module": {
            "rank": rank,
            "action": action,
            "log_rows": [[qstr(x) for x in row] for row in log_rows],
        },
        "l_table": l_table,
        "eta": etas,
        "class_numbers": {},
        "torsion_order": 1,
    }


def main():
    os.makedirs(DATA_DIR, exist_ok=True)
    docs = [
        make_q_sqrt5(),
        make_q_sqrt2(),
        make_q_sqrt5_badT(),
        make_quartic(),
        make_synthetic(),
    ]
    for doc in docs:
        path = os.path.join(DATA_DIR, doc["name"] + ".json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print("wrote", path)
    for doc in docs:
        inst = load_field_instance(os.path.join(DATA_DIR,
                                                doc["name"] + ".json"))
        print(f"loaded {inst.name}: kind={inst.kind}, "
              f"hypotheses ok={inst.hypotheses.ok}")
        if inst.kind == "genuine":
            print(f"  (S,T)-basis rows: {inst.u_st_basis} "
                  f"torsion-free: {inst.u_st_torsion_trivial}")


if __name__ == "__main__":
    main()
