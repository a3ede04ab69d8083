# Integer matrix kernels: row Hermite form, Smith form, Bareiss determinant,
# integral nullspace.  Everything works on lists of lists of Python ints and
# returns new lists; inputs are never mutated.  These are the hot loops of the
# exact lattice engine; rubinstark._kernels._fast is a compiled twin with the
# same signatures and bit-identical outputs.

from math import gcd


def _copy(A):
    return [row[:] for row in A]


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def hnf(A):
    """Row Hermite normal form with transform.

    Returns (H, U, pivots) with U unimodular, U*A = H, pivot entries positive,
    entries above each pivot reduced into [0, pivot), zero rows at the bottom.
    `pivots` is the list of pivot column indices (one per nonzero row of H).
    """
    H = _copy(A)
    m = len(H)
    n = len(H[0]) if m else 0
    U = _identity(m)
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        # find a nonzero entry in column c at row >= r
        piv = None
        for i in range(r, m):
            if H[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            H[r], H[piv] = H[piv], H[r]
            U[r], U[piv] = U[piv], U[r]
        # clear below with extended gcd steps
        for i in range(r + 1, m):
            if H[i][c] == 0:
                continue
            a, b = H[r][c], H[i][c]
            Hr, Hi = H[r], H[i]
            Ur, Ui = U[r], U[i]
            if b % a == 0:
                q = b // a
                for k in range(n):
                    Hi[k] -= q * Hr[k]
                for k in range(m):
                    Ui[k] -= q * Ur[k]
                continue
            g, x, y = _gcdext(a, b)
            p, q = a // g, b // g
            for k in range(n):
                t = x * Hr[k] + y * Hi[k]
                Hi[k] = p * Hi[k] - q * Hr[k]
                Hr[k] = t
            for k in range(m):
                t = x * Ur[k] + y * Ui[k]
                Ui[k] = p * Ui[k] - q * Ur[k]
                Ur[k] = t
        if H[r][c] < 0:
            H[r] = [-v for v in H[r]]
            U[r] = [-v for v in U[r]]
        # reduce entries above the pivot
        d = H[r][c]
        for i in range(r):
            if H[i][c]:
                q = H[i][c] // d
                if q:
                    Hi, Hr = H[i], H[r]
                    for k in range(n):
                        Hi[k] -= q * Hr[k]
                    Ui, Ur = U[i], U[r]
                    for k in range(m):
                        Ui[k] -= q * Ur[k]
        pivots.append(c)
        r += 1
    return H, U, pivots


def _gcdext(a, b):
    # returns (g, x, y) with g = gcd(a,b) >= 0 (or sign of a if b == 0) and
    # x*a + y*b == g
    old_r, rr = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while rr:
        q = old_r // rr
        old_r, rr = rr, old_r - q * rr
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def snf(A):
    """Smith normal form with transforms: returns (D, U, V), U*A*V = D.

    D is diagonal (rectangular allowed) with d_1 | d_2 | ... >= 0.
    """
    D = _copy(A)
    m = len(D)
    n = len(D[0]) if m else 0
    U = _identity(m)
    V = _identity(n)
    t = 0
    while t < min(m, n):
        # find a nonzero pivot in the submatrix
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        i, j = piv
        if i != t:
            D[t], D[i] = D[i], D[t]
            U[t], U[i] = U[i], U[t]
        if j != t:
            for row in D:
                row[t], row[j] = row[j], row[t]
            for row in V:
                row[t], row[j] = row[j], row[t]
        # iterate row/column elimination until the cross is clear
        while True:
            changed = False
            for i in range(t + 1, m):
                if D[i][t] == 0:
                    continue
                changed = True
                a, b = D[t][t], D[i][t]
                Dt, Di = D[t], D[i]
                Ut, Ui = U[t], U[i]
                if b % a == 0:
                    # plain elimination keeps row t intact (termination
                    # depends on it: gcd steps must strictly shrink the pivot)
                    q = b // a
                    for k in range(n):
                        Di[k] -= q * Dt[k]
                    for k in range(m):
                        Ui[k] -= q * Ut[k]
                    continue
                g, x, y = _gcdext(a, b)
                p, q = a // g, b // g
                for k in range(n):
                    v = x * Dt[k] + y * Di[k]
                    Di[k] = p * Di[k] - q * Dt[k]
                    Dt[k] = v
                for k in range(m):
                    v = x * Ut[k] + y * Ui[k]
                    Ui[k] = p * Ui[k] - q * Ut[k]
                    Ut[k] = v
            for j in range(t + 1, n):
                if D[t][j] == 0:
                    continue
                changed = True
                a, b = D[t][t], D[t][j]
                if b % a == 0:
                    q = b // a
                    for row in D:
                        row[j] -= q * row[t]
                    for row in V:
                        row[j] -= q * row[t]
                    continue
                g, x, y = _gcdext(a, b)
                p, q = a // g, b // g
                for row in D:
                    v = x * row[t] + y * row[j]
                    row[j] = p * row[j] - q * row[t]
                    row[t] = v
                for row in V:
                    v = x * row[t] + y * row[j]
                    row[j] = p * row[j] - q * row[t]
                    row[t] = v
            if not changed:
                break
        # divisibility: fold any non-divisible entry into the pivot
        d = D[t][t]
        bad = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if D[i][j] % d:
                    bad = i
                    break
            if bad:
                break
        if bad is not None:
            Dt, Db = D[t], D[bad]
            for k in range(n):
                Dt[k] += Db[k]
            Ut, Ub = U[t], U[bad]
            for k in range(m):
                Ut[k] += Ub[k]
            continue  # redo elimination at the same t
        t += 1
    for i in range(min(m, n)):
        if D[i][i] < 0:
            D[i] = [-v for v in D[i]]
            U[i] = [-v for v in U[i]]
    return D, U, V


def det_int(A):
    """Determinant of a square integer matrix (Bareiss, fraction-free)."""
    n = len(A)
    if n == 0:
        return 1
    M = _copy(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            piv = None
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    piv = i
                    break
            if piv is None:
                return 0
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        Mk = M[k]
        for i in range(k + 1, n):
            Mi = M[i]
            for j in range(k + 1, n):
                Mi[j] = (Mi[j] * Mk[k] - Mi[k] * Mk[j]) // prev
            Mi[k] = 0
        prev = Mk[k]
    return sign * M[n - 1][n - 1]


def int_kernel(A):
    """Basis of {x in Z^n : A @ x = 0} as rows; the lattice is saturated."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return _identity(n)
    # HNF of the transpose: rows u of U with zero image span the kernel
    B = [[A[i][j] for i in range(m)] for j in range(n)]
    H, U, pivots = hnf(B)
    rank = len(pivots)
    return [U[i][:] for i in range(rank, n)]


def mat_mul(A, B):
    n = len(A)
    if n == 0:
        return []
    k = len(B)
    p = len(B[0]) if k else 0
    Bt = [[B[i][j] for i in range(k)] for j in range(p)]
    out = []
    for row in A:
        out.append([sum(row[t] * col[t] for t in range(k)) for col in Bt])
    return out


def content_gcd(row):
    g = 0
    for v in row:
        g = gcd(g, v)
        if g == 1:
            return 1
    return g
