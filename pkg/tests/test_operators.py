"""Matrix elements and operator assembly against closed forms and a 2D oracle."""

import math

import numpy as np
import pytest

from csmres.basis import BasisSpec, gauss_hermite
from csmres.operators import (DiagnosticError, ModelParams, build_one_particle,
                              build_two_particle, delta_element, dump_operator,
                              kinetic_element, load_operator, pair_indices,
                              potential_element, two_particle_parts)
from csmres.spectral import eigendecompose

from oracle import (nearest_multiset_distance, overlap_tensor_grid,
                    tensor_grid_two_particle)


# ------------------------------------------------------------ single elements

def test_kinetic_closed_form():
    assert kinetic_element(0, 0, 0.0) == pytest.approx(0.25)
    assert kinetic_element(3, 3, 0.0) == pytest.approx(7 / 4)
    assert kinetic_element(0, 2, 0.0) == pytest.approx(-math.sqrt(2) / 4)
    assert kinetic_element(2, 0, 0.0) == kinetic_element(0, 2, 0.0)
    assert kinetic_element(0, 1, 0.3) == 0.0
    assert kinetic_element(2, 7, 0.3) == 0.0
    th = 0.25
    assert kinetic_element(1, 1, th) == pytest.approx(np.exp(-2j * th) * 0.75)
    with pytest.raises(ValueError):
        kinetic_element(-1, 0, 0.0)


def test_potential_closed_form_and_symmetries():
    # <psi_0| x^2/2 exp(-x^2/5) |psi_0> = 1/4 * (6/5)^(-3/2)
    ref = 0.25 / 1.2 ** 1.5
    assert potential_element(0, 0, 0.0) == pytest.approx(ref, abs=1e-12)
    # parity selection: odd i+j vanishes
    assert abs(potential_element(0, 3, 0.2)) < 1e-13
    assert abs(potential_element(2, 5, 0.0)) < 1e-13
    # bilinear symmetry in the indices
    a = potential_element(3, 5, 0.2)
    assert potential_element(5, 3, 0.2) == pytest.approx(a, rel=1e-14)
    with pytest.raises(ValueError):
        potential_element(0, 0, 1.0)  # theta >= pi/4


def test_potential_quadrature_node_doubling():
    r200, r400 = gauss_hermite(200), gauss_hermite(400)
    for (i, j) in [(0, 0), (3, 5), (20, 22)]:
        a = potential_element(i, j, 0.2, rule=r200)
        b = potential_element(i, j, 0.2, rule=r400)
        assert abs(a - b) < 1e-11


def test_delta_element_values():
    assert delta_element(0, 0, 0, 0) == pytest.approx(1 / math.sqrt(2 * math.pi),
                                                      abs=1e-14)
    # odd total parity vanishes
    assert abs(delta_element(0, 0, 0, 1)) < 1e-14
    # fully symmetric under index permutations
    a = delta_element(2, 1, 3, 0)
    for perm in [(1, 2, 0, 3), (3, 0, 2, 1), (0, 3, 1, 2)]:
        idx = [(2, 1, 3, 0)[p] for p in perm]
        assert delta_element(*idx) == pytest.approx(a, rel=1e-13)
    # polynomial exactness: a tiny rule already suffices for small indices
    small = delta_element(2, 1, 3, 0, rule=gauss_hermite(8))
    assert small == pytest.approx(a, rel=1e-14)


# ------------------------------------------------------------- configuration

def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(theta=-0.1)
    with pytest.raises(ValueError):
        ModelParams(theta=math.pi / 4)
    with pytest.raises(ValueError):
        ModelParams(theta=0.1, potential="nope")
    assert ModelParams(theta=0.1, g=-2.0).flags == ("attractive-g",)
    assert ModelParams(theta=0.1, g=2.0).flags == ()


# ----------------------------------------------------------- one-particle op

def test_one_particle_complex_symmetric_and_immutable():
    op = build_one_particle(BasisSpec(20, 128), ModelParams(theta=0.2))
    m = op.entries
    assert op.kind == "one-particle"
    assert np.abs(m - m.T).max() < 1e-12
    with pytest.raises(ValueError):
        m[0, 0] = 0.0


def test_one_particle_harmonic_unrotated_is_exact_ladder():
    op = build_one_particle(BasisSpec(40, 128),
                            ModelParams(theta=0.0, potential="harmonic"))
    vals = np.sort_complex(np.linalg.eigvals(op.entries))
    ref = np.arange(40) + 0.5
    assert np.abs(vals.real - ref).max() < 1e-10
    assert np.abs(vals.imag).max() < 1e-10


def test_one_particle_smooth_in_theta():
    spec = BasisSpec(20, 128)
    a = build_one_particle(spec, ModelParams(theta=0.2)).entries
    b = build_one_particle(spec, ModelParams(theta=0.2 + 1e-6)).entries
    assert np.abs(b - a).max() < 1e-4


# ------------------------------------------------------------ two-particle op

def test_pair_index_order():
    I, J = pair_indices(4)
    pairs = list(zip(I.tolist(), J.tolist()))
    assert pairs[0] == (0, 0)
    assert pairs[1] == (1, 0)
    assert pairs[2] == (1, 1)
    assert all(i >= j for i, j in pairs)
    assert all(i * (i + 1) // 2 + j == p for p, (i, j) in enumerate(pairs))


def test_two_particle_parts_structure():
    spec = BasisSpec(10, 64)
    params = ModelParams(theta=0.2, g=3.0)
    one, inter = two_particle_parts(spec, params)
    dim = 10 * 11 // 2
    assert one.shape == (dim, dim) and inter.shape == (dim, dim)
    assert np.abs(one - one.T).max() < 1e-12
    assert np.abs(inter - inter.T).max() < 1e-12
    assert np.abs(np.asarray(inter).imag).max() == 0.0
    op = build_two_particle(spec, params)
    recombined = one + params.g * np.exp(-1j * params.theta) * inter
    assert np.abs(op.entries - recombined).max() < 1e-14
    assert np.abs(op.entries - op.entries.T).max() < 1e-12


def test_two_particle_max_dim_guard():
    with pytest.raises(ValueError):
        build_two_particle(BasisSpec(90, 64), ModelParams(theta=0.2), max_dim=100)


def test_oracle_grid_is_itself_sound():
    g = overlap_tensor_grid(6)
    assert np.abs(g - np.eye(g.shape[0])).max() < 1e-10


@pytest.mark.parametrize("theta,g,potential", [
    (0.17, 7.3, "open"),
    (0.0, 0.0, "open"),
    (0.1, 2.0, "harmonic"),
])
def test_two_particle_matches_tensor_grid_oracle(theta, g, potential):
    spec = BasisSpec(6, 64)
    op = build_two_particle(spec, ModelParams(theta=theta, g=g,
                                              potential=potential))
    ref = tensor_grid_two_particle(6, theta, g, potential)
    assert np.abs(op.entries - ref).max() < 1e-8


def test_noninteracting_spectrum_is_pairwise_sums():
    spec = BasisSpec(10, 64)
    params = ModelParams(theta=0.2, g=0.0)
    one = np.array([p.value for p in
                    eigendecompose(build_one_particle(spec, params))])
    two = np.linalg.eigvals(build_two_particle(spec, params).entries)
    sums = [one[a] + one[b] for a in range(10) for b in range(a + 1)]
    assert nearest_multiset_distance(two, sums) < 1e-8


# ---------------------------------------------------------------- binary IO

def test_dump_load_roundtrip(tmp_path):
    spec = BasisSpec(8, 64)
    params = ModelParams(theta=0.15, g=1.0)
    op = build_two_particle(spec, params)
    path = tmp_path / "op.csmo"
    dump_operator(op, path)
    back = load_operator(path, params, op.kind, index_map=op.index_map)
    assert back.dim == op.dim
    assert np.array_equal(back.entries, op.entries)

    bad = tmp_path / "bad.csmo"
    bad.write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(ValueError):
        load_operator(bad, params, "two-particle-symmetric")
    trunc = tmp_path / "trunc.csmo"
    trunc.write_bytes(path.read_bytes()[:40])
    with pytest.raises(ValueError):
        load_operator(trunc, params, "two-particle-symmetric")
