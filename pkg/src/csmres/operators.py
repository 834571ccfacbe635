"""Complex-scaled Hamiltonian matrices in the oscillator / permanent bases.

Under the coordinate rotation x -> x*exp(i*theta) the one-particle
Hamiltonian becomes

    H_theta = exp(-2i*theta) * T + V(x * exp(i*theta)),

a complex symmetric (not Hermitian) matrix in the real oscillator basis.
The two-boson operator adds a contact interaction g*exp(-i*theta)*delta(x2-x1)
and is represented in the basis of symmetrized products (permanents)

    phi_ij = s_ij * (psi_i(x1) psi_j(x2) + psi_j(x1) psi_i(x2)),  i >= j,

with s_ii = 1/2 and s_ij = 2**(-1/2) otherwise.  All integrals are bilinear
(c-product): no complex conjugation anywhere.
"""

import math
import os
import struct

from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec, gauss_hermite, hermite_table

__all__ = [
    "ModelParams",
    "ScaledOperator",
    "POTENTIALS",
    "kinetic_element",
    "potential_element",
    "delta_element",
    "build_one_particle",
    "build_two_particle",
    "two_particle_parts",
    "pair_indices",
    "dump_operator",
    "load_operator",
    "cache_key",
    "cached_two_particle",
    "cached_two_particle_parts",
    "DiagnosticError",
]

THETA_MAX = math.pi / 4  # Re exp(2i*theta) > 0 keeps every Gaussian integral convergent

# v evaluated at the rotated coordinate z = x*exp(i*theta); "open" is a well
# that flattens to zero at large |x| and therefore supports resonances.
POTENTIALS = {
    "open":     lambda z2: 0.5 * z2 * np.exp(-z2 / 5.0),
    "harmonic": lambda z2: 0.5 * z2,
}


class DiagnosticError(RuntimeError):
    """A built-in numerical cross-check failed beyond its tolerance."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of a complex-scaled run.

    Parameters
    ----------
    theta : float
        Scaling angle in radians, 0 <= theta < pi/4.
    g : float
        Contact-interaction strength.  The repulsive regime g >= 0 is the
        supported one; negative values are accepted but flagged.
    potential : str
        Key into ``POTENTIALS``; default is the open well
        v(x) = 0.5*x**2*exp(-x**2/5).
    """

    theta: float
    g: float = 0.0
    potential: str = "open"
    flags: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if not 0.0 <= self.theta < THETA_MAX:
            raise ValueError(f"theta must lie in [0, pi/4), got {self.theta}")
        if self.potential not in POTENTIALS:
            raise ValueError(f"unknown potential {self.potential!r}")
        if self.g < 0:
            object.__setattr__(self, "flags", self.flags + ("attractive-g",))


@dataclass(frozen=True)
class ScaledOperator:
    """Dense complex-symmetric matrix of H_theta with its metadata.

    ``index_map`` is None for the one-particle kind; for the two-particle
    kind it is an integer array of shape (dim, 2) listing the orbital pair
    (i, j), i >= j, represented by each row, in row order p = i*(i+1)/2 + j.
    """

    dim: int
    entries: np.ndarray
    params: ModelParams
    kind: str                      # "one-particle" | "two-particle-symmetric"
    index_map: np.ndarray | None = None

    def __post_init__(self):
        self.entries.setflags(write=False)


def kinetic_element(i, j, theta):
    """exp(-2i*theta) <psi_i| -0.5 d^2/dx^2 |psi_j>, closed form.

    In ladder operators p^2/2 couples only |i-j| in {0, 2}:
    diagonal (2j+1)/4, off-diagonal -sqrt(j*(j-1))/4 two steps apart.
    """
    if i < 0 or j < 0:
        raise ValueError("orbital indices must be >= 0")
    if i == j:
        t = (2 * j + 1) / 4.0
    elif abs(i - j) == 2:
        k = max(i, j)
        t = -math.sqrt(k * (k - 1)) / 4.0
    else:
        return 0.0j
    return np.exp(-2j * theta) * t


def potential_element(i, j, theta, rule=None, potential="open"):
    """c-product matrix element of the rotated potential v(x*exp(i*theta)).

    Evaluated by Gauss-Hermite quadrature with the weights in scaled form:
    the integrand psi_i*psi_j*v already decays at least like exp(-x**2), so
    sum(scaled_weights * psi_i * psi_j * v) converges rapidly; exactness in
    the polynomial sense does not apply because v is not polynomial (see
    the n-versus-2n agreement check inside `build_one_particle`).
    """
    if not 0.0 <= theta < THETA_MAX:
        raise ValueError(f"theta must lie in [0, pi/4), got {theta}")
    if rule is None:
        rule = gauss_hermite(400)
    psi = hermite_table(max(i, j), rule.nodes)
    z2 = (rule.nodes * np.exp(1j * theta)) ** 2
    return complex(np.sum(rule.scaled_weights * psi[i] * psi[j] * POTENTIALS[potential](z2)))


def delta_element(i, j, k, l, rule=None):
    """integral of psi_i*psi_j*psi_k*psi_l over the line (real, exact).

    The integrand is a polynomial times exp(-2x**2); substituting x = u/sqrt(2)
    turns the weight into exp(-u**2), so Gauss-Hermite is exact once the node
    count covers the polynomial degree 2*(i+j+k+l) after substitution, i.e.
    quad_nodes >= i+j+k+l+1.
    """
    if rule is None:
        rule = gauss_hermite(400)
    u = rule.nodes / math.sqrt(2.0)
    psi = hermite_table(max(i, j, k, l), u)
    return float(np.sum(rule.scaled_weights * psi[i] * psi[j] * psi[k] * psi[l]) / math.sqrt(2.0))


def _one_particle_matrix(spec, theta, potential, rule=None):
    """Dense one-particle H_theta (kinetic band plus quadrature potential)."""
    n = spec.n_orbitals
    if rule is None:
        rule = gauss_hermite(spec.quad_nodes)
    k = np.arange(n)
    h = np.zeros((n, n), dtype=complex)
    h[k, k] = (2 * k + 1) / 4.0
    off = -np.sqrt(k[2:] * (k[2:] - 1)) / 4.0
    h[k[2:], k[2:] - 2] = off
    h[k[2:] - 2, k[2:]] = off
    h *= np.exp(-2j * theta)
    psi = hermite_table(n - 1, rule.nodes)
    z2 = (rule.nodes * np.exp(1j * theta)) ** 2
    h += (psi * (rule.scaled_weights * POTENTIALS[potential](z2))) @ psi.T
    return h


def build_one_particle(spec, params):
    """Assemble the one-particle complex-scaled Hamiltonian.

    Runs the built-in quadrature self-check: the potential block recomputed
    with twice the node count must agree to 1e-11, otherwise the quadrature
    does not resolve the rotated potential and a DiagnosticError is raised.

    Parameters
    ----------
    spec : BasisSpec
    params : ModelParams

    Returns
    -------
    ScaledOperator
    """
    h = _one_particle_matrix(spec, params.theta, params.potential)
    h2 = _one_particle_matrix(spec, params.theta, params.potential,
                              rule=gauss_hermite(2 * spec.quad_nodes))
    dev = float(np.abs(h - h2).max())
    if dev > 1e-11:
        raise DiagnosticError(
            f"potential quadrature not converged: n vs 2n deviation {dev:.3e}")
    return ScaledOperator(dim=spec.n_orbitals, entries=h, params=params,
                          kind="one-particle")


def pair_indices(n_orbitals):
    """Orbital pairs (i, j) with i >= j in row order p = i*(i+1)/2 + j."""
    return np.tril_indices(n_orbitals)


def two_particle_parts(spec, params):
    """One-body and interaction blocks of the two-boson matrix, separately.

    Returns (one_body, interaction) with

        H(g) = one_body + g * exp(-i*theta) * interaction,

    so parameter sweeps over g reuse both blocks.  ``one_body`` carries the
    theta dependence; ``interaction`` is the real, theta- and g-independent
    contraction of the contact term over the permanent basis.

    The one-body element between permanents (n,m) and (i,j) expands to

        2 * s_nm * s_ij * (h_ni d_mj + h_nj d_mi + h_mi d_nj + h_mj d_ni)

    with h the one-particle matrix and d the Kronecker delta; the interaction
    element is 4 * s_nm * s_ij * delta(n,m,i,j), computed for all pairs at
    once as an outer product over quadrature nodes.
    """
    n = spec.n_orbitals
    I, J = pair_indices(n)
    dim = I.size
    h = _one_particle_matrix(spec, params.theta, params.potential)
    s = np.where(I == J, 0.5, 2 ** -0.5)

    one_body = np.empty((dim, dim), dtype=complex)
    blk = 512  # bounds the broadcast temporaries to ~blk*dim complexes
    iq, jq = I[None, :], J[None, :]
    for a in range(0, dim, blk):
        sl = slice(a, min(a + blk, dim))
        np_, mp_ = I[sl][:, None], J[sl][:, None]
        t = h[np_, iq] * (mp_ == jq)
        t += h[np_, jq] * (mp_ == iq)
        t += h[mp_, iq] * (np_ == jq)
        t += h[mp_, jq] * (np_ == iq)
        one_body[sl] = (2.0 * s[sl][:, None] * s[None, :]) * t

    rule = gauss_hermite(spec.quad_nodes)
    u = rule.nodes / math.sqrt(2.0)
    w = rule.scaled_weights / math.sqrt(2.0)
    psi = hermite_table(n - 1, u)
    q = (2.0 * s)[:, None] * psi[I] * psi[J] * np.sqrt(w)[None, :]
    interaction = q @ q.T
    return one_body, interaction


def build_two_particle(spec, params, max_dim=8192):
    """Assemble the two-boson complex-scaled Hamiltonian over permanents.

    Parameters
    ----------
    spec : BasisSpec
    params : ModelParams
    max_dim : int
        Guard against accidental huge allocations; the pair-basis dimension
        n*(n+1)/2 must not exceed it.

    Returns
    -------
    ScaledOperator
        kind "two-particle-symmetric", with ``index_map`` listing (i, j) per row.
    """
    n = spec.n_orbitals
    dim = n * (n + 1) // 2
    if dim > max_dim:
        raise ValueError(f"pair-basis dimension {dim} exceeds max_dim={max_dim}")
    one_body, interaction = two_particle_parts(spec, params)
    m = one_body
    if params.g != 0.0:
        m = m + params.g * np.exp(-1j * params.theta) * interaction
    I, J = pair_indices(n)
    return ScaledOperator(dim=dim, entries=m, params=params,
                          kind="two-particle-symmetric",
                          index_map=np.column_stack((I, J)))


_MAGIC = b"CSMO"
_VERSION = 1


def dump_operator(op, path):
    """Write entries to a binary cache file.

    Layout: 16-byte header (magic "CSMO", u32 version, u64 dim, little
    endian) followed by the row-major entries as little-endian (re, im)
    float64 pairs.
    """
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<IQ", _VERSION, op.dim))
        f.write(np.ascontiguousarray(op.entries, dtype="<c16").tobytes())


def load_operator(path, params, kind, index_map=None):
    """Read a matrix dumped by `dump_operator`; metadata is caller-supplied."""
    with open(path, "rb") as f:
        head = f.read(16)
        if len(head) != 16 or head[:4] != _MAGIC:
            raise ValueError(f"{path}: not an operator cache file")
        version, dim = struct.unpack("<IQ", head[4:])
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported cache version {version}")
        data = np.frombuffer(f.read(), dtype="<c16")
    if data.size != dim * dim:
        raise ValueError(f"{path}: truncated cache file")
    entries = data.reshape(dim, dim).astype(np.complex128)
    return ScaledOperator(dim=int(dim), entries=entries, params=params,
                          kind=kind, index_map=index_map)


def cache_key(spec, params, kind):
    """Stable filename for CSM_CACHE_DIR entries."""
    return (f"{kind}_n{spec.n_orbitals}_q{spec.quad_nodes}"
            f"_th{params.theta:.10g}_g{params.g:.10g}_{params.potential}.csmo")


def cached_two_particle(spec, params, max_dim=8192):
    """build_two_particle with optional binary caching via CSM_CACHE_DIR."""
    cache_dir = os.environ.get("CSM_CACHE_DIR")
    if not cache_dir:
        return build_two_particle(spec, params, max_dim=max_dim)
    n = spec.n_orbitals
    I, J = pair_indices(n)
    path = os.path.join(cache_dir, cache_key(spec, params, "two"))
    if os.path.exists(path):
        return load_operator(path, params, "two-particle-symmetric",
                             index_map=np.column_stack((I, J)))
    op = build_two_particle(spec, params, max_dim=max_dim)
    os.makedirs(cache_dir, exist_ok=True)
    tmp = path + ".tmp"
    dump_operator(op, tmp)
    os.replace(tmp, path)
    return op


def _dump_matrix(m, path):
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<IQ", _VERSION, m.shape[0]))
        f.write(np.ascontiguousarray(m, dtype="<c16").tobytes())
    os.replace(tmp, path)


def cached_two_particle_parts(spec, params, max_dim=8192):
    """two_particle_parts with optional binary caching via CSM_CACHE_DIR.

    The one-body block is keyed by theta; the interaction block is theta-
    and g-independent and shared across a whole sweep.
    """
    n = spec.n_orbitals
    dim = n * (n + 1) // 2
    if dim > max_dim:
        raise ValueError(f"pair-basis dimension {dim} exceeds max_dim={max_dim}")
    cache_dir = os.environ.get("CSM_CACHE_DIR")
    if not cache_dir:
        return two_particle_parts(spec, params)
    key_ob = cache_key(spec, ModelParams(theta=params.theta, g=0.0,
                                         potential=params.potential), "onebody2")
    key_in = (f"delta2_n{spec.n_orbitals}_q{spec.quad_nodes}.csmo")
    path_ob = os.path.join(cache_dir, key_ob)
    path_in = os.path.join(cache_dir, key_in)
    if os.path.exists(path_ob) and os.path.exists(path_in):
        ob = load_operator(path_ob, params, "two-particle-symmetric").entries
        it = load_operator(path_in, params, "two-particle-symmetric").entries
        return ob, it.real
    ob, it = two_particle_parts(spec, params)
    os.makedirs(cache_dir, exist_ok=True)
    _dump_matrix(ob, path_ob)
    _dump_matrix(it.astype(complex), path_in)
    return ob, it
