# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: per-draw equilibrium play and batched ex-ante payoffs.

Arithmetic mirrors ``flipflop.core`` operation for operation; the fallback in
``flipflop._fallback`` must produce bit-identical output.
"""

from libc.math cimport fabs

cdef enum:
    IDENTICAL = 0
    SECURED = 1
    OPEN = 2
    WEAK = 3
    KNIFE = 4


cdef inline double utility(double t, double x, double y, double a) noexcept nogil:
    return -(t - y) * (t - y) - a * ((y - x) * (y - x))


cdef inline double adjust(double m, double x, double a) noexcept nogil:
    return (m + a * x) / (1 + a)


cdef int classify_c(double x1, double x2, double a1, double a2, double m, int *fav) noexcept nogil:
    cdef double d1, d2, xf, xc, af, ac, stay_f, adj_c, adj_f
    fav[0] = 0
    if x1 == x2:
        return KNIFE if m == x1 else IDENTICAL
    d1 = fabs(x1 - m)
    d2 = fabs(x2 - m)
    if d1 == d2:
        return KNIFE
    if d1 < d2:
        fav[0] = 1
        xf, af, xc, ac = x1, a1, x2, a2
    else:
        fav[0] = 2
        xf, af, xc, ac = x2, a2, x1, a1
    stay_f = utility(m, xf, xf, af)
    adj_c = utility(m, xc, adjust(m, xc, ac), ac)
    if stay_f > adj_c:
        return SECURED
    if stay_f == adj_c:
        return KNIFE
    adj_f = utility(m, xf, adjust(m, xf, af), af)
    if adj_c > adj_f:
        return WEAK
    if adj_c == adj_f:
        return KNIFE
    return OPEN


def play_draws(const double[:, ::1] u, double x1, double x2, double a1, double a2, double phi,
               signed char[::1] code, signed char[::1] fav,
               unsigned char[::1] adj1, unsigned char[::1] adj2, signed char[::1] winner):
    """Play the subgame equilibrium for each row ``(m, u1, u2, u_tie)`` of ``u``."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef int c, f
    cdef double m, p1, p2, y1, y2, v1, v2
    cdef bint b1, b2
    with nogil:
        for i in range(n):
            m = u[i, 0]
            c = classify_c(x1, x2, a1, a2, m, &f)
            code[i] = c
            fav[i] = f
            if c == KNIFE:
                adj1[i] = 0
                adj2[i] = 0
                winner[i] = 0
                continue
            if c == SECURED:
                p1 = 0.0
                p2 = 0.0
            elif c == OPEN:
                if f == 1:
                    p1 = 1.0 - phi
                    p2 = phi
                else:
                    p1 = phi
                    p2 = 1.0 - phi
            elif c == WEAK:
                p1 = 0.0 if f == 1 else 1.0
                p2 = 1.0 if f == 1 else 0.0
            elif a1 == a2:
                p1 = 1.0
                p2 = 1.0
            else:
                p1 = 1.0 if a1 < a2 else 0.0
                p2 = 1.0 - p1
            b1 = u[i, 1] < p1
            b2 = u[i, 2] < p2
            y1 = adjust(m, x1, a1) if b1 else x1
            y2 = adjust(m, x2, a2) if b2 else x2
            v1 = utility(m, x1, y1, a1)
            v2 = utility(m, x2, y2, a2)
            adj1[i] = b1
            adj2[i] = b2
            if v1 > v2:
                winner[i] = 1
            elif v2 > v1:
                winner[i] = 2
            else:
                winner[i] = 1 if u[i, 3] < 0.5 else 2


cdef double exante_one(double x1, double x2, double a1, double a2,
                       double al1, double al2, double phi, int responder) noexcept nogil:
    cdef double roots[7]
    cdef double edges[9]
    cdef int nr = 5, ne = 0, i, j, c, f
    cdef double r, lo, hi, g = 0.0, p
    if x1 == x2:
        if a1 == a2:
            return 0.5 - phi
        if (a1 < a2) == (responder == 1):
            return 1 - phi
        return 0.0
    roots[0] = (x1 + x2) / 2
    roots[1] = (al2 * x1 - x2) / (al2 - 1)
    roots[2] = (al2 * x1 + x2) / (al2 + 1)
    roots[3] = (al1 * x2 - x1) / (al1 - 1)
    roots[4] = (al1 * x2 + x1) / (al1 + 1)
    if al1 != al2:
        roots[5] = (al1 * x2 + al2 * x1) / (al1 + al2)
        roots[6] = (al1 * x2 - al2 * x1) / (al1 - al2)
        nr = 7
    edges[0] = 0.0
    ne = 1
    for i in range(nr):
        r = roots[i]
        if 0 < r < 1:
            j = ne
            while j > 1 and edges[j - 1] > r:
                edges[j] = edges[j - 1]
                j -= 1
            edges[j] = r
            ne += 1
    edges[ne] = 1.0
    ne += 1
    for i in range(ne - 1):
        lo = edges[i]
        hi = edges[i + 1]
        if hi <= lo:
            continue
        c = classify_c(x1, x2, a1, a2, (lo + hi) / 2, &f)
        if c == KNIFE:
            continue
        if c == SECURED:
            p = 1.0 if f == responder else 0.0
        elif c == OPEN:
            p = 1 - phi if f == responder else 0.0
        else:  # weak favorite loses to the strong challenger
            p = 0.0 if f == responder else 1 - phi
        g += (hi - lo) * p
    return g


def exante_payoff_many(const double[::1] own, double opponent, int responder,
                       double a1, double a2, double al1, double al2, double phi,
                       double[::1] out):
    """Responder's ex-ante payoff for each of its platforms in ``own``."""
    cdef Py_ssize_t i, n = own.shape[0]
    with nogil:
        for i in range(n):
            if responder == 1:
                out[i] = exante_one(own[i], opponent, a1, a2, al1, al2, phi, 1)
            else:
                out[i] = exante_one(opponent, own[i], a1, a2, al1, al2, phi, 2)
