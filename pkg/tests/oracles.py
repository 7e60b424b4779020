"""Reference computations that share no code path with skinlab."""
import itertools

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment

# sublattice -> (offset in lattice units, on-site detuning sign, lossy?)
CELL = {
    "A": ((0.0, 0.0), -1, False),
    "B": ((0.5, 0.0), +1, False),
    "D": ((0.0, 0.5), -1, True),
    "C": ((0.5, 0.5), +1, True),
}
ORDER = ("A", "B", "D", "C")


def bloch_by_fourier(t, m, gamma, kx, ky):
    """H(k) = sum_R H(0, R) exp(i k.R), with bonds found by distance 1/2."""
    H = np.zeros((4, 4), dtype=complex)
    for a, sa in enumerate(ORDER):
        (xa, ya), sign, lossy = CELL[sa]
        H[a, a] = sign * m - (1j * gamma if lossy else 0)
        for b, sb in enumerate(ORDER):
            (xb, yb), _, _ = CELL[sb]
            for Rx, Ry in itertools.product((-1, 0, 1), repeat=2):
                d = np.hypot(xb + Rx - xa, yb + Ry - ya)
                if abs(d - 0.5) < 1e-12:
                    H[a, b] += t * np.exp(1j * (kx * Rx + ky * Ry))
    return H


def chain_matrix(n, onsite, t):
    rows = []
    for i in range(n):
        row = [0] * n
        row[i] = onsite[i % 2]
        if i > 0:
            row[i - 1] = t
        if i < n - 1:
            row[i + 1] = t
        rows.append(row)
    return rows


def chain_eigenvalues_mp(n, onsite, t, dps=40):
    """Eigenvalues of an open 1D chain in extended precision."""
    with mpmath.workdps(dps):
        A = mpmath.matrix([[mpmath.mpc(x) for x in row] for row in chain_matrix(n, onsite, t)])
        w = mpmath.eig(A, left=False, right=False)
        return np.array([complex(x) for x in w])


def minkowski(a, b):
    return (np.asarray(a)[:, None] + np.asarray(b)[None, :]).ravel()


def multiset_distance(a, b):
    """Max deviation under the optimal one-to-one matching."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    assert a.shape == b.shape
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def pole_sum(t, m, gamma, eta, E, kx, ky):
    """A(E,k) from hand-written bands: x roots ±sqrt(m^2 + 2t^2(1+cos kx)),
    y roots -i gamma/2 ± sqrt(2t^2(1+cos ky) - gamma^2/4)."""
    ex = np.sqrt(m**2 + 2 * t**2 * (1 + np.cos(kx)))
    ey = np.sqrt(complex(2 * t**2 * (1 + np.cos(ky)) - gamma**2 / 4))
    total = 0.0
    for sx in (1, -1):
        for sy in (1, -1):
            e = sx * ex - 0.5j * gamma + sy * ey
            w = eta - e.imag
            total += w / ((E - e.real) ** 2 + w**2)
    return total
