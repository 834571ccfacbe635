"""Eigensolver layer for complex-symmetric operators and resonance location.

A complex-scaled Hamiltonian matrix M is complex symmetric, so its left and
right eigenvectors coincide and the natural normalization is bilinear,
v^T v = 1 (the c-product; no conjugation).  Resonances are the eigenvalues
that stay put as the scaling angle theta varies, while rotated-continuum
eigenvalues follow dW/dtheta ~ -2iW; we therefore classify a trajectory as
a resonance when its finite-difference theta-derivative is small relative
to |W|.
"""

import math

from dataclasses import dataclass

import numpy as np

from dataclasses    import replace
from scipy.optimize import linear_sum_assignment

from .operators import build_one_particle

__all__ = [
    "EigenPair",
    "ResonanceState",
    "ThetaScan",
    "NoResonanceError",
    "eigendecompose",
    "c_normalized_eigensystem",
    "theta_scan",
    "find_resonance",
    "stabilized_resonances",
]

SELF_ORTH_TOL = 1e-6      # bilinear norm below this flags exceptional-point proximity
DEGENERACY_TOL = 1e-10    # eigenvalue clustering tolerance (relative to spectral scale)


class NoResonanceError(RuntimeError):
    """No trajectory satisfied the resonance criteria."""


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with its c-normalized right (= left) eigenvector."""

    value: complex
    right: np.ndarray
    left: np.ndarray
    c_norm_defect: float
    flags: tuple = ()


@dataclass(frozen=True)
class ResonanceState:
    """A stabilized eigenvalue W = E - i*Gamma/2 with its diagnostics.

    ``stability`` is the central-difference |dW/dtheta| at the selected
    angle; ``theta`` is that angle.
    """

    eigenpair: EigenPair
    theta: float
    energy: float
    width: float
    stability: float
    flags: tuple = ()

    @property
    def value(self) -> complex:
        return self.eigenpair.value


def c_normalized_eigensystem(m):
    """Eigendecomposition of a complex-symmetric matrix, c-normalized.

    Returns (values, vectors, defects, flag_list) with vectors as columns
    satisfying v^T v = 1 where possible.  Within numerically degenerate
    eigenvalue clusters the vectors are re-orthogonalized under the
    bilinear form (Gram-Schmidt); a vector whose bilinear norm collapses
    below SELF_ORTH_TOL cannot be c-normalized (self-orthogonality near an
    exceptional point) and is flagged instead.

    The residual sign freedom of v^T v = 1 is fixed by rotating the
    largest-modulus component to positive real part (ties broken toward
    positive imaginary part).
    """
    m = np.asarray(m)
    values, vec = np.linalg.eig(m)
    n = values.size
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vec = vec[:, order]
    flags = [() for _ in range(n)]
    scale = max(np.abs(values).max(), 1.0)

    # bilinear Gram-Schmidt inside degenerate clusters only
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(values[stop] - values[stop - 1]) < DEGENERACY_TOL * scale:
            stop += 1
        if stop - start > 1:
            for a in range(start + 1, stop):
                for b in range(start, a):
                    nb = vec[:, b] @ vec[:, b]
                    if abs(nb) > SELF_ORTH_TOL:
                        vec[:, a] = vec[:, a] - (vec[:, b] @ vec[:, a]) / nb * vec[:, b]
        start = stop

    cn = np.einsum("ij,ij->j", vec, vec)
    for k in range(n):
        if abs(cn[k]) < SELF_ORTH_TOL:
            flags[k] = ("self-orthogonal",)
            continue
        vec[:, k] = vec[:, k] / np.sqrt(cn[k])
        p = int(np.argmax(np.abs(vec[:, k])))
        c = vec[:, k][p]
        if c.real < 0 or (c.real == 0 and c.imag < 0):
            vec[:, k] = -vec[:, k]
    cn = np.einsum("ij,ij->j", vec, vec)
    defects = np.abs(cn - 1.0)
    return values, vec, defects, flags


def eigendecompose(op):
    """All eigenpairs of an operator, c-normalized, by ascending Re(W).

    Parameters
    ----------
    op : ScaledOperator or array_like
        Complex-symmetric matrix (entries attribute or the array itself).

    Returns
    -------
    list of EigenPair
    """
    m = getattr(op, "entries", op)
    values, vec, defects, flags = c_normalized_eigensystem(m)
    return [
        EigenPair(value=complex(values[k]), right=vec[:, k], left=vec[:, k],
                  c_norm_defect=float(defects[k]), flags=flags[k])
        for k in range(values.size)
    ]


@dataclass(frozen=True)
class ThetaScan:
    """Eigenvalue trajectories W_k(theta) on a scan grid.

    ``values[k, t]`` is trajectory k at ``thetas[t]`` after nearest-neighbor
    matching; ``stability[k, t]`` is the central-difference |dW/dtheta|
    (NaN at the two endpoint columns where no central difference exists);
    ``ambiguous[k]`` marks trajectories where some matching step had a
    second candidate closer than three times the accepted one.
    """

    thetas: np.ndarray
    values: np.ndarray
    stability: np.ndarray
    ambiguous: np.ndarray
    spec: object
    params: object
    builder: object


def theta_scan(spec, params, thetas, builder=build_one_particle):
    """Diagonalize H_theta on a grid of angles and match trajectories.

    Parameters
    ----------
    spec : BasisSpec
    params : ModelParams
        Its theta field is ignored; the grid supplies the angles.
    thetas : array_like
        Strictly increasing angles inside [0, pi/4).
    builder : callable
        (spec, params) -> ScaledOperator; defaults to the one-particle
        builder, pass `build_two_particle` to scan the pair operator.

    Returns
    -------
    ThetaScan
    """
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size < 2 or np.any(np.diff(thetas) <= 0):
        raise ValueError("thetas must be strictly increasing with >= 2 points")
    cols = []
    for th in thetas:
        op = builder(spec, replace(params, theta=float(th)))
        cols.append(np.linalg.eigvals(op.entries))
    n = cols[0].size
    values = np.empty((n, thetas.size), dtype=complex)
    order = np.lexsort((cols[0].imag, cols[0].real))
    values[:, 0] = cols[0][order]
    ambiguous = np.zeros(n, dtype=bool)
    for t in range(1, thetas.size):
        cost = np.abs(values[:, t - 1][:, None] - cols[t][None, :])
        row, col = linear_sum_assignment(cost)
        values[:, t] = cols[t][col]
        matched = cost[row, col]
        if n > 1:
            second = np.partition(cost, 1, axis=1)[:, 1]
            ambiguous |= second < 3.0 * matched
    stability = np.full((n, thetas.size), np.nan)
    dth = thetas[2:] - thetas[:-2]
    stability[:, 1:-1] = np.abs(values[:, 2:] - values[:, :-2]) / dth
    return ThetaScan(thetas=thetas, values=values, stability=stability,
                     ambiguous=ambiguous, spec=spec, params=params, builder=builder)


def _candidates(scan, threshold):
    """Stabilized-trajectory candidates: (traj index, theta index, W, stab)."""
    out = []
    interior = slice(1, scan.thetas.size - 1)
    for k in range(scan.values.shape[0]):
        w = scan.values[k, interior]
        st = scan.stability[k, interior]
        ok = w.imag < 0
        if not ok.any():
            continue
        rel = np.where(ok, st / np.maximum(np.abs(w), 1e-300), np.inf)
        t = int(np.argmin(rel))
        if rel[t] >= threshold:
            continue
        out.append((k, t + 1, complex(scan.values[k, t + 1]), float(st[t])))
    return out


def stabilized_resonances(scan, threshold=0.02):
    """All resonance candidates of a scan, sorted by ascending Re(W).

    A trajectory qualifies when at some interior grid angle its eigenvalue
    has Im(W) < 0 and |dW/dtheta| / |W| falls below ``threshold``; rotated
    continuum trajectories fail this because they move at |dW/dtheta| ~ 2|W|.
    Each entry is realized as a ResonanceState by re-diagonalizing (with
    eigenvectors) at the selected angle.
    """
    found = sorted(_candidates(scan, threshold), key=lambda c: c[2].real)
    out = []
    for k, t, w, stab in found:
        th = float(scan.thetas[t])
        pairs = eigendecompose(scan.builder(scan.spec, replace(scan.params, theta=th)))
        best = min(pairs, key=lambda p: abs(p.value - w))
        flags = best.flags
        if scan.ambiguous[k]:
            flags = flags + ("ambiguous-matching",)
        out.append(ResonanceState(eigenpair=best, theta=th,
                                  energy=float(best.value.real),
                                  width=float(-2.0 * best.value.imag),
                                  stability=stab, flags=flags))
    return out


def find_resonance(scan, selection="lowest-energy", threshold=0.02):
    """Select one stabilized resonance from a scan.

    Parameters
    ----------
    scan : ThetaScan
    selection : "lowest-energy" or complex
        Either the lowest-Re(W) stabilized trajectory or the one whose
        stabilized eigenvalue lies nearest a given complex target.
    threshold : float
        Relative stationarity threshold |dW/dtheta| / |W|.

    Returns
    -------
    ResonanceState

    Raises
    ------
    NoResonanceError
        If no trajectory has Im(W) < 0 below the threshold.
    """
    states = stabilized_resonances(scan, threshold=threshold)
    if not states:
        raise NoResonanceError("no resonance found in the scan window")
    if selection == "lowest-energy":
        return states[0]
    target = complex(selection)
    return min(states, key=lambda s: abs(s.value - target))
