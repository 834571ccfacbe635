"""Independent reference constructions used as test oracles.

Everything here deliberately avoids the package's own assembly routines:
oscillator functions come from scipy's raw Hermite polynomials, the kinetic
action uses the differential identity psi_k'' = (x**2 - 2k - 1) psi_k on a
2D tensor quadrature grid, and the contact term is integrated with
Gauss-Legendre on a finite box.  Agreement with the package is then a real
cross-check, not a tautology.
"""

import math

import numpy as np

from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_hermite, factorial


def oscillator_table(n, x):
    """psi_0..psi_{n-1} at x via scipy Hermite polynomials (small n only)."""
    k = np.arange(n)
    norm = np.pi ** -0.25 / np.sqrt(2.0 ** k * factorial(k))
    return norm[:, None] * eval_hermite(k[:, None], x[None, :]) * \
        np.exp(-0.5 * x * x)[None, :]


def pair_list(n):
    return [(i, j) for i in range(n) for j in range(i + 1)]


def tensor_grid_two_particle(n, theta, g, potential, m_nodes=80):
    """Two-boson matrix over symmetrized products from first principles.

    The one-body part is integrated on an (m_nodes x m_nodes) Gauss-Hermite
    tensor grid with the second derivative taken analytically; the contact
    part is a 1D Gauss-Legendre integral of phi_q(x,x) phi_p(x,x) on
    [-12, 12].  Only practical for small n.
    """
    x, w = hermgauss(m_nodes)
    sw = w * np.exp(x * x)
    psi = oscillator_table(n, x)
    pairs = pair_list(n)
    s = np.array([0.5 if i == j else 2 ** -0.5 for i, j in pairs])

    phi = np.array([sij * (np.outer(psi[i], psi[j]) + np.outer(psi[j], psi[i]))
                    for (i, j), sij in zip(pairs, s)])

    vfun = {"open": lambda z2: 0.5 * z2 * np.exp(-z2 / 5.0),
            "harmonic": lambda z2: 0.5 * z2}[potential]
    z2 = (x * np.exp(1j * theta)) ** 2
    v1 = vfun(z2)

    x2 = x * x
    hphi = np.empty(phi.shape, dtype=complex)
    for p, ((i, j), sij) in enumerate(zip(pairs, s)):
        lap = ((x2 - 2 * i - 1)[:, None] + (x2 - 2 * j - 1)[None, :]) * \
            np.outer(psi[i], psi[j])
        lap += ((x2 - 2 * j - 1)[:, None] + (x2 - 2 * i - 1)[None, :]) * \
            np.outer(psi[j], psi[i])
        hphi[p] = -0.5 * np.exp(-2j * theta) * sij * lap
        hphi[p] += (v1[:, None] + v1[None, :]) * phi[p]

    dim = len(pairs)
    wphi = phi * sw[None, :, None] * sw[None, None, :]
    h2 = np.tensordot(wphi, hphi, axes=([1, 2], [1, 2]))

    u, wu = leggauss(200)
    xs, ws = 12.0 * u, 12.0 * wu
    psid = oscillator_table(n, xs)
    diag = np.array([2.0 * sij * psid[i] * psid[j]
                     for (i, j), sij in zip(pairs, s)])
    d = (diag * ws) @ diag.T
    return h2 + g * np.exp(-1j * theta) * d


def overlap_tensor_grid(n, m_nodes=80):
    """Gram matrix of the symmetrized products on the same tensor grid."""
    x, w = hermgauss(m_nodes)
    sw = w * np.exp(x * x)
    psi = oscillator_table(n, x)
    pairs = pair_list(n)
    s = np.array([0.5 if i == j else 2 ** -0.5 for i, j in pairs])
    phi = np.array([sij * (np.outer(psi[i], psi[j]) + np.outer(psi[j], psi[i]))
                    for (i, j), sij in zip(pairs, s)])
    wphi = phi * sw[None, :, None] * sw[None, None, :]
    return np.tensordot(wphi, phi, axes=([1, 2], [1, 2]))


def nearest_multiset_distance(a, b):
    """Greedy max distance matching two complex multisets of equal size."""
    a = list(np.asarray(a, dtype=complex))
    b = list(np.asarray(b, dtype=complex))
    assert len(a) == len(b)
    worst = 0.0
    for z in a:
        k = int(np.argmin([abs(z - y) for y in b]))
        worst = max(worst, abs(z - b.pop(k)))
    return worst
