# cython: language_level=3
# Compiled twin of rubinstark._kernels._pure.  Same algorithms, same
# signatures, bit-identical outputs; entries stay arbitrary-precision Python
# ints (the win is loop and indexing overhead, not machine arithmetic).

from math import gcd


def _copy(A):
    return [row[:] for row in A]


def _identity(Py_ssize_t n):
    cdef Py_ssize_t i
    out = []
    for i in range(n):
        row = [0] * n
        row[i] = 1
        out.append(row)
    return out


cdef tuple _gcdext_c(old_r, rr):
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


def _gcdext(a, b):
    return _gcdext_c(a, b)


def hnf(A):
    """Row Hermite normal form with transform; see the pure twin's docstring."""
    cdef Py_ssize_t m, n, r, c, i, k, piv
    H = _copy(A)
    m = len(H)
    n = len(H[0]) if m else 0
    U = _identity(m)
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if H[i][c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            H[r], H[piv] = H[piv], H[r]
            U[r], U[piv] = U[piv], U[r]
        for i in range(r + 1, m):
            if H[i][c] == 0:
                continue
            a = H[r][c]
            b = H[i][c]
            Hr = H[r]; Hi = H[i]
            Ur = U[r]; Ui = U[i]
            if b % a == 0:
                q = b // a
                for k in range(n):
                    Hi[k] = Hi[k] - q * Hr[k]
                for k in range(m):
                    Ui[k] = Ui[k] - q * Ur[k]
                continue
            g, x, y = _gcdext_c(a, b)
            p = a // g
            q = b // g
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
        d = H[r][c]
        for i in range(r):
            if H[i][c]:
                q = H[i][c] // d
                if q:
                    Hi = H[i]; Hr = H[r]
                    for k in range(n):
                        Hi[k] = Hi[k] - q * Hr[k]
                    Ui = U[i]; Ur = U[r]
                    for k in range(m):
                        Ui[k] = Ui[k] - q * Ur[k]
        pivots.append(c)
        r += 1
    return H, U, pivots


def snf(A):
    """Smith normal form with transforms; see the pure twin's docstring."""
    cdef Py_ssize_t m, n, t, i, j, k, bi, bj
    cdef bint changed
    D = _copy(A)
    m = len(D)
    n = len(D[0]) if m else 0
    U = _identity(m)
    V = _identity(n)
    t = 0
    while t < min(m, n):
        bi = -1; bj = -1
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] != 0:
                    bi = i; bj = j
                    break
            if bi >= 0:
                break
        if bi < 0:
            break
        if bi != t:
            D[t], D[bi] = D[bi], D[t]
            U[t], U[bi] = U[bi], U[t]
        if bj != t:
            for row in D:
                row[t], row[bj] = row[bj], row[t]
            for row in V:
                row[t], row[bj] = row[bj], row[t]
        while True:
            changed = False
            for i in range(t + 1, m):
                if D[i][t] == 0:
                    continue
                changed = True
                a = D[t][t]; b = D[i][t]
                Dt = D[t]; Di = D[i]
                Ut = U[t]; Ui = U[i]
                if b % a == 0:
                    # plain elimination keeps row t intact (termination
                    # depends on it: gcd steps must strictly shrink the pivot)
                    q = b // a
                    for k in range(n):
                        Di[k] = Di[k] - q * Dt[k]
                    for k in range(m):
                        Ui[k] = Ui[k] - q * Ut[k]
                    continue
                g, x, y = _gcdext_c(a, b)
                p = a // g; q = b // g
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
                a = D[t][t]; b = D[t][j]
                if b % a == 0:
                    q = b // a
                    for row in D:
                        row[j] = row[j] - q * row[t]
                    for row in V:
                        row[j] = row[j] - q * row[t]
                    continue
                g, x, y = _gcdext_c(a, b)
                p = a // g; q = b // g
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
        d = D[t][t]
        bi = -1
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if D[i][j] % d:
                    bi = i
                    break
            if bi >= 0:
                break
        if bi >= 0:
            Dt = D[t]; Db = D[bi]
            for k in range(n):
                Dt[k] = Dt[k] + Db[k]
            Ut = U[t]; Ub = U[bi]
            for k in range(m):
                Ut[k] = Ut[k] + Ub[k]
            continue
        t += 1
    for i in range(min(m, n)):
        if D[i][i] < 0:
            D[i] = [-v for v in D[i]]
            U[i] = [-v for v in U[i]]
    return D, U, V


def det_int(A):
    """Bareiss fraction-free determinant of a square integer matrix."""
    cdef Py_ssize_t n, k, i, j, piv
    cdef int sign = 1
    n = len(A)
    if n == 0:
        return 1
    M = _copy(A)
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            piv = -1
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    piv = i
                    break
            if piv < 0:
                return 0
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        Mk = M[k]
        pk = Mk[k]
        for i in range(k + 1, n):
            Mi = M[i]
            mik = Mi[k]
            for j in range(k + 1, n):
                Mi[j] = (Mi[j] * pk - mik * Mk[j]) // prev
            Mi[k] = 0
        prev = pk
    return sign * M[n - 1][n - 1]


def int_kernel(A):
    """Saturated basis of the integral nullspace {x : A @ x = 0}, as rows."""
    cdef Py_ssize_t m, n, i, j
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return _identity(n)
    B = [[A[i][j] for i in range(m)] for j in range(n)]
    H, U, pivots = hnf(B)
    rank = len(pivots)
    return [U[i][:] for i in range(rank, n)]


def mat_mul(A, B):
    cdef Py_ssize_t n, k, p, t
    n = len(A)
    if n == 0:
        return []
    k = len(B)
    p = len(B[0]) if k else 0
    Bt = [[B[i][j] for i in range(k)] for j in range(p)]
    out = []
    for row in A:
        orow = []
        for col in Bt:
            acc = 0
            for t in range(k):
                acc += row[t] * col[t]
            orow.append(acc)
        out.append(orow)
    return out


def content_gcd(row):
    g = 0
    for v in row:
        g = gcd(g, v)
        if g == 1:
            return 1
    return g
