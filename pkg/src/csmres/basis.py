"""Harmonic-oscillator basis functions and Gauss-Hermite quadrature.

Every matrix element in the package is an integral over products of the
orthonormal oscillator eigenfunctions

    psi_i(x) = 2**(-i/2) * exp(-x**2/2) * H_i(x) / (pi**(1/4) * sqrt(i!)),

evaluated here through the normalized three-term recurrence, which stays
bounded for arbitrarily high index where the raw Hermite polynomial H_i
would overflow.
"""

import math

from dataclasses import dataclass
from functools   import lru_cache

import numpy as np

__all__ = [
    "BasisSpec",
    "QuadratureRule",
    "evaluate_ho",
    "hermite_table",
    "gauss_hermite",
    "overlap_check",
]

_PI4 = math.pi ** -0.25
_GAUSS_CHUNK = math.ldexp(math.exp(-300.0), 500)


@dataclass(frozen=True)
class BasisSpec:
    """Size of the truncated one-particle basis and its quadrature resources.

    Parameters
    ----------
    n_orbitals : int
        Number of oscillator functions psi_0 ... psi_{n_orbitals-1}.
    quad_nodes : int
        Gauss-Hermite node count used for every numerical integral.  A rule
        with ``n`` nodes integrates polynomial-times-``exp(-x**2)`` integrands
        exactly up to degree ``2n - 1``; callers that need exactness for a
        degree-``d`` integrand must have ``quad_nodes >= d // 2 + 1``.
    """

    n_orbitals: int
    quad_nodes: int = 400

    def __post_init__(self):
        if self.n_orbitals < 2:
            raise ValueError("n_orbitals must be >= 2")
        if self.quad_nodes < 2:
            raise ValueError("quad_nodes must be >= 2")

    @property
    def rule(self) -> "QuadratureRule":
        return gauss_hermite(self.quad_nodes)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for the weight exp(-x**2) on the real line.

    Attributes
    ----------
    nodes : ndarray
        Roots of H_n, ascending.
    weights : ndarray
        Plain weights w_k.  For large n the extreme-node weights underflow
        (below 1e-200 already at n = 256, exactly 0.0 by n = 800); use
        ``scaled_weights`` whenever the integrand carries its own
        exp(-x**2) decay.
    scaled_weights : ndarray
        w_k * exp(x_k**2), the numerically safe form: integrate a function
        f that already decays like exp(-x**2) as sum(scaled_weights * f).
    """

    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size


def evaluate_ho(i, x):
    """Evaluate the normalized oscillator eigenfunction psi_i at x.

    Uses the recurrence on the normalized functions,

        psi_{k+1} = x*sqrt(2/(k+1))*psi_k - sqrt(k/(k+1))*psi_{k-1},

    so no intermediate exceeds the function scale; finite for i up to a
    few hundred and any representable x (far tails underflow to 0.0).

    Parameters
    ----------
    i : int
        Orbital index, >= 0.
    x : float or ndarray
        Evaluation point(s).

    Returns
    -------
    float or ndarray
    """
    if i < 0:
        raise ValueError("orbital index must be >= 0")
    x = np.asarray(x, dtype=float)
    p0 = _PI4 * np.exp(-0.5 * x * x)
    if i == 0:
        return p0 if p0.ndim else float(p0)
    p1 = math.sqrt(2.0) * x * p0
    for k in range(1, i):
        p0, p1 = p1, x * math.sqrt(2.0 / (k + 1)) * p1 - math.sqrt(k / (k + 1)) * p0
    return p1 if p1.ndim else float(p1)


def hermite_table(n_max, x):
    """Table psi_i(x_j) for all i <= n_max on a grid, shape (n_max+1, len(x)).

    Same recurrence as `evaluate_ho`, filled row by row; the workhorse for
    vectorized matrix-element assembly.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((n_max + 1, x.size), dtype=float)
    out[0] = _PI4 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, n_max):
        out[k + 1] = x * math.sqrt(2.0 / (k + 1)) * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _psi_pair(n, x):
    """Scalar (psi_n(x), psi_{n-1}(x), scale_pow): true values times 2**scale_pow.

    For large n the recurrence passes through a classically forbidden region
    where the true psi_k(x) fall below the double-precision range (the start
    value exp(-x**2/2) alone underflows once |x| > 38), so the pair is
    dynamically rescaled by powers of two and the exponent carried aside.
    At any root of psi_n the neighboring psi_{n-1} is of Airy magnitude and
    ldexp brings it back exactly.
    """
    p0 = _PI4
    scale = 0
    ax = 0.5 * x * x
    while ax > 300.0:
        # exp(-300) * 2**500 is O(1e20): the Gaussian tail is moved into the
        # binary exponent chunk by chunk without ever leaving double range
        p0 *= _GAUSS_CHUNK
        scale -= 500
        ax -= 300.0
        if p0 > 1e100:
            p0 = math.ldexp(p0, -400)
            scale += 400
    p0 *= math.exp(-ax)
    if n == 0:
        return p0, 0.0, scale
    p1 = math.sqrt(2.0) * x * p0
    for k in range(1, n):
        p0, p1 = p1, x * math.sqrt(2.0 / (k + 1)) * p1 - math.sqrt(k / (k + 1)) * p0
        m = max(abs(p0), abs(p1))
        if 0.0 < m < 1e-140:
            p0 = math.ldexp(p0, 466)
            p1 = math.ldexp(p1, 466)
            scale -= 466
    return p1, p0, scale


@lru_cache(maxsize=32)
def gauss_hermite(n):
    """Gauss-Hermite rule with n nodes.

    Roots of H_n found by Newton iteration started from the classical
    asymptotic guesses, largest root first, each subsequent guess
    extrapolated from the previously converged roots; this sequential
    refinement is what keeps the guesses inside their basins.  Weights come
    from the derivative identity in scaled form,

        w_k * exp(x_k**2) = 1 / (n * psi_{n-1}(x_k)**2),

    which never underflows; the plain weights are recovered afterwards.

    Parameters
    ----------
    n : int
        Node count, >= 1.

    Returns
    -------
    QuadratureRule
    """
    if n < 1:
        raise ValueError("node count must be >= 1")
    m = (n + 1) // 2
    roots = []
    boundary = []
    z = 0.0
    for k in range(m):
        if k == 0:
            z = math.sqrt(2.0 * n + 1.0) - 1.85575 * (2.0 * n + 1.0) ** (-1.0 / 6.0)
        elif k == 1:
            z = z - 1.14 * n ** 0.426 / z
        elif k == 2:
            z = 1.86 * z - 0.86 * roots[0]
        elif k == 3:
            z = 1.91 * z - 0.91 * roots[1]
        else:
            z = 2.0 * z - roots[k - 2]
        for _ in range(100):
            p, pm1, _ = _psi_pair(n, z)
            dp = math.sqrt(2.0 * n) * pm1 - z * p
            dz = p / dp
            z -= dz
            if abs(dz) < 1e-15 * max(1.0, abs(z)):
                break
        else:
            raise RuntimeError(f"Gauss-Hermite root {k} failed to converge for n={n}")
        roots.append(z)
        _, pm1, sc = _psi_pair(n, z)
        boundary.append(math.ldexp(pm1, sc))
    x = np.array(roots)
    b = np.array(boundary)
    half = 1.0 / (n * b ** 2)
    if 2 * m == n:
        nodes = np.concatenate((-x, x[::-1]))
        scaled = np.concatenate((half, half[::-1]))
    else:
        nodes = np.concatenate((-x, x[-2::-1]))
        scaled = np.concatenate((half, half[-2::-1]))
    nodes = 0.5 * (nodes - nodes[::-1])  # enforce exact +/- pairing (parity selection rules)
    weights = scaled * np.exp(-nodes ** 2)
    for a in (nodes, weights, scaled):
        a.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, scaled_weights=scaled)


def overlap_check(spec):
    """Max deviation of the quadrature overlap matrix from the identity.

    Returns max_ij |integral(psi_i psi_j) - delta_ij| over the spec's basis,
    a cheap integrity diagnostic for a basis/quadrature combination.
    """
    rule = gauss_hermite(spec.quad_nodes)
    psi = hermite_table(spec.n_orbitals - 1, rule.nodes)
    g = (psi * rule.scaled_weights) @ psi.T
    return float(np.abs(g - np.eye(spec.n_orbitals)).max())
