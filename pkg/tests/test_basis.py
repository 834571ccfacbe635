"""Oscillator functions and Gauss-Hermite rules against external references."""

import math

import mpmath
import numpy as np
import pytest

from csmres.basis import (BasisSpec, evaluate_ho, gauss_hermite, hermite_table,
                          overlap_check)

SQRT_PI = math.sqrt(math.pi)


def mp_psi(i, x):
    """Reference oscillator function via mpmath's Hermite polynomial."""
    with mpmath.workdps(50):
        v = (mpmath.mpf(2) ** (-i * mpmath.mpf(1) / 2)
             * mpmath.pi ** mpmath.mpf("-0.25")
             / mpmath.sqrt(mpmath.factorial(i))
             * mpmath.exp(-mpmath.mpf(x) ** 2 / 2)
             * mpmath.hermite(i, mpmath.mpf(x)))
        return float(v)


@pytest.mark.parametrize("i", [0, 1, 5, 10, 50, 89])
def test_oscillator_function_matches_mpmath(i):
    xs = np.linspace(-10.0, 10.0, 41)
    ours = evaluate_ho(i, xs)
    for x, v in zip(xs, ours):
        ref = mp_psi(i, float(x))
        if abs(ref) > 1e-300:
            assert abs(v - ref) <= 1e-9 * abs(ref), (i, x, v, ref)
        else:
            assert abs(v) < 1e-280


def test_single_point_value():
    assert abs(evaluate_ho(5, 1.3) - mp_psi(5, 1.3)) < 1e-10
    assert abs(evaluate_ho(0, 0.0) - math.pi ** -0.25) < 1e-15


def test_parity_and_scalar_vs_table():
    xs = np.linspace(-6.0, 6.0, 13)
    tab = hermite_table(9, xs)
    for i in (3, 7, 8):
        vals = evaluate_ho(i, xs)
        assert np.allclose(vals, tab[i], rtol=0, atol=1e-14)
        flip = evaluate_ho(i, -xs)
        assert np.allclose(flip, (-1.0) ** i * vals, rtol=0, atol=1e-14)
    assert isinstance(evaluate_ho(4, 0.5), float)


def test_invalid_inputs_rejected():
    with pytest.raises(ValueError):
        evaluate_ho(-1, 0.0)
    with pytest.raises(ValueError):
        BasisSpec(1, 64)
    with pytest.raises(ValueError):
        BasisSpec(10, 1)
    with pytest.raises(ValueError):
        gauss_hermite(0)


def test_tiny_rules_analytic():
    r1 = gauss_hermite(1)
    assert np.allclose(r1.nodes, [0.0])
    assert np.allclose(r1.weights, [SQRT_PI], rtol=1e-14)
    r2 = gauss_hermite(2)
    assert np.allclose(r2.nodes, [-1 / math.sqrt(2), 1 / math.sqrt(2)],
                       rtol=0, atol=1e-15)
    assert np.allclose(r2.weights, [SQRT_PI / 2, SQRT_PI / 2], rtol=1e-14)


@pytest.mark.parametrize("n", [7, 64, 400])
def test_rule_moments(n):
    r = gauss_hermite(n)
    assert abs(r.weights.sum() - SQRT_PI) < 1e-13
    assert abs((r.weights * r.nodes ** 2).sum() - SQRT_PI / 2) < 1e-13
    if n >= 3:
        assert abs((r.weights * r.nodes ** 4).sum() - 0.75 * SQRT_PI) < 1e-12
    # scaled weights are the plain weights with the Gaussian divided out
    mask = r.weights > 0
    assert np.allclose(r.scaled_weights[mask] * np.exp(-r.nodes[mask] ** 2),
                       r.weights[mask], rtol=1e-12)


def test_large_rule_survives_forbidden_region_underflow():
    # the recurrence start exp(-x**2/2) underflows beyond |x| ~ 38; the
    # 800-node rule reaches |x| ~ 39.5 and must still come out finite
    r = gauss_hermite(800)
    assert r.nodes.size == 800
    assert np.isfinite(r.scaled_weights).all()
    assert np.isfinite(r.nodes).all()
    assert r.nodes[-1] > 39.0
    assert np.array_equal(r.nodes, -r.nodes[::-1])
    assert (r.scaled_weights > 0).all()
    assert abs(r.weights.sum() - SQRT_PI) < 1e-12
    assert abs((r.weights * r.nodes ** 2).sum() - SQRT_PI / 2) < 1e-12
    f = np.exp(-2.0 * r.nodes ** 2)
    assert abs((r.scaled_weights * f).sum() - math.sqrt(math.pi / 2)) < 1e-12


def test_plain_weights_underflow_documented_regime():
    # extreme plain weights eventually fall below the smallest subnormal
    # while the scaled form stays O(1)
    r = gauss_hermite(800)
    assert r.weights[0] == 0.0
    assert r.scaled_weights[0] > 1e-3
    r = gauss_hermite(256)
    assert r.weights[0] < 1e-200
    assert r.scaled_weights[0] > 1e-3


def test_nonpolynomial_integral_node_count_stable():
    ref = SQRT_PI * math.exp(-0.25)  # integral exp(-x**2) cos x
    for n in (64, 128):
        r = gauss_hermite(n)
        val = (r.scaled_weights * np.exp(-r.nodes ** 2) * np.cos(r.nodes)).sum()
        assert abs(val - ref) < 1e-13


def test_overlap_check_levels():
    assert overlap_check(BasisSpec(10, 64)) < 1e-12
    assert overlap_check(BasisSpec(90, 256)) < 1e-10
    assert overlap_check(BasisSpec(2, 2)) < 1e-14


def test_rule_arrays_read_only():
    r = gauss_hermite(16)
    with pytest.raises(ValueError):
        r.nodes[0] = 0.0
