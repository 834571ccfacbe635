"""Infinite-repulsion (Tonks-Girardeau) reference state and its entanglement.

In the g -> infinity limit the two-boson resonance maps onto free fermions:
the wavefunction is the sgn-symmetrized determinant of the two lowest
one-particle resonance orbitals,

    chi_TG(x1, x2) = sgn(x2 - x1) * 2**(-1/2)
                     * [phi0(x1) phi1(x2) - phi1(x1) phi0(x2)],

whose complex energy is exactly W0 + W1.  Projecting chi_TG onto the
oscillator product basis gives the coefficient matrix E_ij used by the
Schmidt pipeline; the sgn factor makes the integrand only piecewise smooth,
handled here with cumulative inner integrals on a panelized outer grid.
"""

import math

import numpy as np

from dataclasses import dataclass

from .basis     import hermite_table
from .operators import DiagnosticError, ModelParams, build_one_particle
from .schmidt   import CoefficientMatrix, complex_entropies, takagi_symmetric
from .spectral  import NoResonanceError, eigendecompose, theta_scan

__all__ = [
    "ResonanceOrbital",
    "TGReference",
    "tg_position",
    "tg_coefficient_matrix",
    "tg_reference",
    "default_box",
]


@dataclass(frozen=True)
class ResonanceOrbital:
    """One-particle resonance orbital: HO-basis coefficients plus its W."""

    coeffs: np.ndarray
    W: complex


@dataclass(frozen=True)
class TGReference:
    """Bundled TG-limit results at a common stabilized angle."""

    W: complex
    energy: float
    width: float
    theta: float
    orbitals: tuple
    matrix: CoefficientMatrix
    spectrum: object
    entropy: object
    flags: tuple = ()


def tg_position(W0, W1):
    """Complex TG resonance position W0 + W1 (exact additivity)."""
    return complex(W0) + complex(W1)


def default_box(n_orbitals):
    """Half-width of the projection box.

    Must cover the classical turning point sqrt(2n+1) of the highest
    oscillator function plus Gaussian tail room, otherwise the projection
    silently loses weight at large basis sizes.
    """
    return max(12.0, math.sqrt(2.0 * n_orbitals + 1.0) + 4.0)


def _cumulative_grid(box, n_outer, n_inner):
    """Outer Gauss-Legendre rule on [-box, box] plus per-panel inner rules.

    Returns (x_out, w_out, pts, w_pts) where pts/w_pts (n_outer, n_inner)
    integrate each panel between consecutive outer nodes (the first panel
    starts at -box), so cumulative integrals up to every outer node are
    partial sums of panel integrals.
    """
    xu, wu = np.polynomial.legendre.leggauss(n_outer)
    x_out, w_out = xu * box, wu * box
    xi, wi = np.polynomial.legendre.leggauss(n_inner)
    edges = np.concatenate(([-box], x_out))
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * xi[None, :]
    w_pts = half[:, None] * wi[None, :]
    return x_out, w_out, pts, w_pts


def tg_coefficient_matrix(phi0, phi1, spec, n_outer=600, n_inner=16,
                          box=None, sgn=True):
    """Project the TG state onto the oscillator product basis.

    E_ij = integral psi_i(x1) psi_j(x2) chi_TG(x1, x2) dx1 dx2 (bilinear).
    Writing G[a,b]_ij for the same integral with the orbital pair (a, b) in
    place of chi, the sgn factor reduces the inner integral to

        integral sgn(x2 - x1) f(x2) dx2 = T - 2 * Phi(x1),

    with Phi the cumulative integral of f and T its total (taken from the
    orbital coefficients, exact by orthonormality).  The two orderings
    A = G[0,1] and B = G[1,0] are computed independently even though
    B = -A^T analytically; their disagreement is reported as dual_defect.
    E = (A - B)/sqrt(2) is renormalized to bilinear trace 1 and the defect
    recorded (a defect beyond 1e-3 means the grid or box cannot represent
    the state and raises DiagnosticError).

    Parameters
    ----------
    phi0, phi1 : ResonanceOrbital
        c-orthonormal pair (checked to 1e-8).
    spec : BasisSpec
    n_outer, n_inner : int
        Outer Gauss-Legendre node count and per-panel inner node count.
    box : float, optional
        Half-width of the integration box; default `default_box`.
    sgn : bool
        With False the sgn factor is replaced by 1, leaving the plain
        determinant state (validation path: E becomes antisymmetric and
        the spectrum degenerates to {1/2, 1/2}).

    Returns
    -------
    CoefficientMatrix
    """
    n = spec.n_orbitals
    c0 = np.asarray(phi0.coeffs, dtype=complex)
    c1 = np.asarray(phi1.coeffs, dtype=complex)
    gram = max(abs(c0 @ c0 - 1.0), abs(c1 @ c1 - 1.0), abs(c0 @ c1))
    if gram > 1e-8:
        raise ValueError(f"orbital pair is not c-orthonormal: defect {gram:.3e}")
    if box is None:
        box = default_box(n)
    x_out, w_out, pts, w_pts = _cumulative_grid(box, n_outer, n_inner)

    psi_pan = hermite_table(n - 1, pts.ravel()).reshape(n, n_outer, n_inner)
    f0_pan = np.tensordot(c0, psi_pan, axes=1)
    f1_pan = np.tensordot(c1, psi_pan, axes=1)
    # Phi[a][j, q] = integral_{-box}^{x_q} psi_j * phi_a
    phi_cum1 = np.cumsum(np.sum(psi_pan * (f1_pan * w_pts)[None], axis=2), axis=1)
    phi_cum0 = np.cumsum(np.sum(psi_pan * (f0_pan * w_pts)[None], axis=2), axis=1)

    psi = hermite_table(n - 1, x_out)
    f0 = c0 @ psi
    f1 = c1 @ psi
    inner1 = (c1[None, :] - 2.0 * phi_cum1.T) if sgn else np.broadcast_to(c1, (n_outer, n))
    inner0 = (c0[None, :] - 2.0 * phi_cum0.T) if sgn else np.broadcast_to(c0, (n_outer, n))
    A = (psi * (w_out * f0)[None, :]) @ inner1
    B = (psi * (w_out * f1)[None, :]) @ inner0
    dual = float(np.abs(A + B.T).max())
    E = (A - B) / math.sqrt(2.0)

    trace = np.sum(E * E)  # bilinear tr(E E^T) = sum E_ij^2
    defect = abs(complex(trace) - 1.0)
    if defect > 1e-3:
        raise DiagnosticError(
            f"TG projection lost too much weight: trace defect {defect:.3e} "
            f"(box {box:.1f}, {n_outer} outer nodes)")
    E = E / np.sqrt(trace)
    return CoefficientMatrix(entries=E, trace_defect=float(defect), dual_defect=dual)


def tg_reference(spec, thetas=None, threshold=0.02, n_outer=600, box=None,
                 potential="open"):
    """Full TG-limit reference: position, spectrum and entropies.

    Scans the one-particle operator over ``thetas`` (default 0.05 to 0.35,
    step 0.01), requires at least two stabilized trajectories, picks the
    common grid angle where their summed relative theta-derivative is
    smallest, and evaluates the TG pipeline with the two lowest-energy
    orbitals at that angle.

    Returns
    -------
    TGReference
    """
    if thetas is None:
        thetas = np.linspace(0.05, 0.35, 31)
    thetas = np.asarray(thetas, dtype=float)
    scan = theta_scan(spec, ModelParams(theta=float(thetas[0]), potential=potential),
                      thetas, builder=build_one_particle)

    interior = slice(1, thetas.size - 1)
    w_in = scan.values[:, interior]
    rel = np.where(w_in.imag < 0,
                   scan.stability[:, interior] / np.maximum(np.abs(w_in), 1e-300),
                   np.inf)
    best = rel.min(axis=1)
    cand = np.where(best < threshold)[0]
    if cand.size < 2:
        raise NoResonanceError(
            f"need two stabilized one-particle trajectories, found {cand.size}")
    re_at_opt = [scan.values[k, interior][int(np.argmin(rel[k]))].real for k in cand]
    k0, k1 = cand[np.argsort(re_at_opt)[:2]]

    combined = rel[k0] + rel[k1]
    t = int(np.argmin(combined)) + 1
    theta = float(scan.thetas[t])
    pairs = eigendecompose(build_one_particle(
        spec, ModelParams(theta=theta, potential=potential)))
    p0 = min(pairs, key=lambda p: abs(p.value - scan.values[k0, t]))
    p1 = min(pairs, key=lambda p: abs(p.value - scan.values[k1, t]))
    orb0 = ResonanceOrbital(coeffs=p0.right, W=p0.value)
    orb1 = ResonanceOrbital(coeffs=p1.right, W=p1.value)

    matrix = tg_coefficient_matrix(orb0, orb1, spec, n_outer=n_outer, box=box)
    spectrum = takagi_symmetric(matrix)
    entropy = complex_entropies(spectrum)
    w = tg_position(orb0.W, orb1.W)
    flags = p0.flags + p1.flags + spectrum.flags + entropy.flags
    if scan.ambiguous[k0] or scan.ambiguous[k1]:
        flags = flags + ("ambiguous-matching",)
    return TGReference(W=w, energy=w.real, width=-2.0 * w.imag, theta=theta,
                       orbitals=(orb0, orb1), matrix=matrix,
                       spectrum=spectrum, entropy=entropy, flags=flags)
