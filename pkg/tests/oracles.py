"""Independent reference computations used by the tests.

Nothing here imports the package; each helper solves its problem from the
raw parameter numbers with textbook methods.
"""

import numpy as np


def gauss_solve(A, b):
    """Gaussian elimination with partial pivoting on plain Python floats."""
    n = len(b)
    M = [list(map(float, row)) + [float(rhs)] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[piv] = M[piv], M[col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            for c in range(col, n + 1):
                M[r][c] -= f * M[col][c]
    x = [0.0] * n
    for r in reversed(range(n)):
        x[r] = (M[r][n] - sum(M[r][c] * x[c] for c in range(r + 1, n))) / M[r][r]
    return x


def sne_linear_system(alpha, beta, delta, gamma, theta):
    """Interior equilibrium from the first-order and stability equations."""
    (a1, a2), (b1, b2), (d1, d2), (g1, g2), (t1, t2) = alpha, beta, delta, gamma, theta
    A = [[2 * b1, -d1, -g1],
         [-d2, 2 * b2, -g2],
         [-t1, -t2, 1.0]]
    return gauss_solve(A, [a1, a2, 0.0])


def interior_profile(alpha, beta, delta, gamma, r):
    """Both firms' unconstrained best responses holding ``r`` fixed (2x2 solve)."""
    (a1, a2), (b1, b2), (d1, d2), (g1, g2) = alpha, beta, delta, gamma
    return gauss_solve([[2 * b1, -d1], [-d2, 2 * b2]], [a1 + g1 * r, a2 + g2 * r])


def hand_stepped_omd(alpha, beta, delta, gamma, theta, a, lo, hi, sig, eps1, eps2, init, T):
    """Two-firm quadratic mirror descent written out longhand."""
    y = [init[0], init[1]]
    r = init[2]
    rows = []
    for t in range(T):
        p = [min(max(v, lo), hi) for v in y]
        rows.append((p[0], p[1], r))
        g = [2 * beta[0] * p[0] - (alpha[0] + delta[0] * p[1] + gamma[0] * r),
             2 * beta[1] * p[1] - (alpha[1] + delta[1] * p[0] + gamma[1] * r)]
        y = [p[0] - eps1[t] * g[0] / sig, p[1] - eps2[t] * g[1] / sig]
        r = a * r + (1 - a) * (theta[0] * p[0] + theta[1] * p[1])
    return np.array(rows)


def quadratic_roots(c2, c1, c0):
    d = np.sqrt(c1 * c1 - 4 * c2 * c0)
    return sorted(((-c1 - d) / (2 * c2), (-c1 + d) / (2 * c2)))


def random_market(rng, min_margin=2.0):
    """Random valid market whose closed-form equilibrium is interior, or None."""
    alpha = rng.uniform(1, 10, 2)
    delta = rng.uniform(0.05, 1.0, 2)
    gamma = rng.uniform(0.05, 1.0, 2)
    beta = rng.uniform(min_margin, 3 * min_margin, 2) * (delta + gamma)
    t1 = rng.uniform(0.05, 0.95)
    a = rng.uniform(0.05, 0.95)
    p, q, r = sne_linear_system(alpha, beta, delta, gamma, (t1, 1 - t1))
    lo = 0.6 * min(p, q, r)
    hi = 1.4 * max(p, q, r)
    for k in range(2):
        if alpha[k] - beta[k] * hi + (delta[k] + gamma[k]) * lo < 0:
            return None
    return dict(alpha=tuple(alpha), beta=tuple(beta), delta=tuple(delta), gamma=tuple(gamma),
                theta=(t1, 1 - t1), a=a, p_lo=lo, p_hi=hi)
