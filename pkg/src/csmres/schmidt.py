"""Schmidt analysis of two-boson resonance states and complex entropies.

A two-boson state expanded over permanents, chi = sum_{i>=j} r_ij phi_ij,
is equivalently described by the symmetric coefficient matrix

    e_ii = r_ii,    e_ij = e_ji = 2**(-1/2) * r_ij  (i > j),

so that chi(x1,x2) = sum_ij e_ij psi_i(x1) psi_j(x2).  The complex-orthogonal
eigendecomposition e = V diag(d) V^T is the Schmidt form of the complex-scaled
state; the occupancies lambda_n = d_n**2 are the (generally complex)
eigenvalues of the reduced density matrix rho = e e^T, and the correlation
entropies are

    S     = -sum_n lambda_n ln(lambda_n),
    S_lin = 1 - sum_n lambda_n**2.
"""

import math

import numpy as np

from dataclasses import dataclass

from .spectral import c_normalized_eigensystem

__all__ = [
    "CoefficientMatrix",
    "EntanglementSpectrum",
    "ComplexEntropy",
    "coefficient_matrix",
    "takagi_symmetric",
    "rho_eigenvalues",
    "rdm_eigenvalues_direct",
    "complex_entropies",
    "mean_value",
]


@dataclass(frozen=True)
class CoefficientMatrix:
    """Symmetric one-particle coefficient matrix of a two-boson state.

    ``trace_defect`` records |tr(e e) - 1| before any renormalization that
    produced this matrix (0 for matrices built directly from a normalized
    pair vector); ``dual_defect`` is filled by constructions that compute
    the matrix along two independent routes (see the TG builder).
    """

    entries: np.ndarray
    trace_defect: float = 0.0
    dual_defect: float = 0.0
    flags: tuple = ()

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EntanglementSpectrum:
    """Schmidt data of a coefficient matrix, ordered by descending |lambda|."""

    d: np.ndarray
    lam: np.ndarray
    orbitals: np.ndarray
    recon_defect: float
    flags: tuple = ()


@dataclass(frozen=True)
class ComplexEntropy:
    vn: complex
    lin: complex
    flags: tuple = ()


def coefficient_matrix(eigvec, index_map=None):
    """Fold a c-normalized permanent-basis eigenvector into its matrix e.

    Parameters
    ----------
    eigvec : array_like
        Pair-basis coefficients r_ij, bilinearly normalized:
        sum_{i>=j} r_ij**2 = 1 (within 1e-6, else the input is rejected).
    index_map : ndarray, optional
        (dim, 2) array of pairs (i, j) per entry; defaults to the canonical
        row order p = i*(i+1)/2 + j.

    Returns
    -------
    CoefficientMatrix
    """
    r = np.asarray(eigvec, dtype=complex)
    defect = abs(r @ r - 1.0)
    if defect > 1e-6:
        raise ValueError(f"pair vector not c-normalized: |sum r^2 - 1| = {defect:.3e}")
    if index_map is None:
        n = (math.isqrt(8 * r.size + 1) - 1) // 2
        if n * (n + 1) // 2 != r.size:
            raise ValueError(f"vector length {r.size} is not a pair-basis dimension")
        I, J = np.tril_indices(n)
    else:
        I, J = np.asarray(index_map)[:, 0], np.asarray(index_map)[:, 1]
        n = int(I.max()) + 1
    e = np.zeros((n, n), dtype=complex)
    e[I, J] = np.where(I == J, r, r * 2 ** -0.5)
    e[J, I] = e[I, J]
    return CoefficientMatrix(entries=e, trace_defect=float(defect))


def takagi_symmetric(e):
    """Complex-orthogonal eigendecomposition of a symmetric matrix.

    For complex symmetric e the eigenvectors can be chosen c-orthonormal,
    V^T V = I, giving e = V diag(d) V^T; this is the complex-scaled analogue
    of the Takagi/Schmidt form and lambda = d**2 is the entanglement
    spectrum.  Self-orthogonal eigenvectors (defective e) are flagged and
    the reconstruction defect reports how badly the form closes.

    Parameters
    ----------
    e : CoefficientMatrix or array_like

    Returns
    -------
    EntanglementSpectrum
    """
    m = np.asarray(getattr(e, "entries", e))
    sym = float(np.abs(m - m.T).max())
    if sym > 1e-10:
        raise ValueError(f"matrix is not symmetric: max |e - e^T| = {sym:.3e}")
    d, v, _, flags = c_normalized_eigensystem(m)
    order = np.argsort(-np.abs(d) ** 2, kind="stable")
    d = d[order]
    v = v[:, order]
    merged = tuple(f for k in order for f in flags[k])
    recon = float(np.abs(m - (v * d) @ v.T).max())
    return EntanglementSpectrum(d=d, lam=d ** 2, orbitals=v,
                                recon_defect=recon, flags=merged)


def rho_eigenvalues(e):
    """Eigenvalues of rho = e e^T by general (non-symmetric) diagonalization."""
    m = np.asarray(getattr(e, "entries", e))
    lam = np.linalg.eigvals(m @ m.T)
    return lam[np.argsort(-np.abs(lam), kind="stable")]


def rdm_eigenvalues_direct(eigvec, index_map=None):
    """Entanglement spectrum straight from the reduced density matrix.

    Independent cross-check of `takagi_symmetric`: builds e, forms
    rho = e e^T and diagonalizes it as a general matrix, never using the
    complex-orthogonal route.  Returns lambda sorted by descending modulus.
    """
    e = coefficient_matrix(eigvec, index_map=index_map)
    return rho_eigenvalues(e)


def complex_entropies(spectrum, cutoff=1e-12):
    """Complex von Neumann and linear entropies of a spectrum.

    Parameters
    ----------
    spectrum : EntanglementSpectrum or array_like
        Schmidt occupancies lambda_n (must sum to 1 within 1e-6).
    cutoff : float
        Terms with |lambda| <= cutoff are dropped from S (lambda*ln(lambda)
        vanishes in the limit but the principal-branch log does not exist
        at 0); S_lin keeps every term.

    Returns
    -------
    ComplexEntropy
        With a "branch-ambiguous" flag when a retained lambda lies within
        1e-12 of the negative real axis, where the principal branch of the
        logarithm jumps.
    """
    lam = np.asarray(getattr(spectrum, "lam", spectrum), dtype=complex)
    total = lam.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"spectrum does not sum to 1: {total}")
    keep = lam[np.abs(lam) > cutoff]
    flags = ()
    if np.any((keep.real < 0) & (np.abs(keep.imag) <= 1e-12)):
        flags = ("branch-ambiguous",)
    vn = complex(-np.sum(keep * np.log(keep)))
    lin = complex(1.0 - np.sum(lam ** 2))
    return ComplexEntropy(vn=vn, lin=lin, flags=flags)


def mean_value(rho_entries, observable_matrix):
    """Bilinear expectation tr(rho Q) of an observable in a resonance state.

    The real part plays the role of the average and the imaginary part that
    of its uncertainty; both are generally nonzero for complex-scaled states.
    """
    rho = np.asarray(rho_entries)
    q = np.asarray(observable_matrix)
    if rho.shape != q.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {q.shape}")
    return complex(np.trace(rho @ q))
