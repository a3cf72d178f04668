"""Coefficient fields, convex integrands, and the position transforms."""

import numpy as np
import pytest

from heishom import (
    CellTableCoefficient,
    ConstantCoefficient,
    ConstantMatrixField,
    SmoothCoefficient,
    checkerboard_coefficient,
    matrix_p_integrand,
    power_integrand,
    rescale_integrand,
    translate_integrand,
    verify_assumptions,
)
from heishom.heisenberg import dilate, group_mul, pullback_to_cell, translate_tau


def rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def test_checkerboard_frozen_values():
    """Parity of the sub-cell index inside the base cell picks lo or hi."""
    a = checkerboard_coefficient(1.0, 4.0)
    # sub-cell centers of the base cell: parity of floor(y+1) summed
    assert a.values_at(np.array([-0.5, -0.5, -0.5])) == 1.0   # (0,0,0) even
    assert a.values_at(np.array([0.5, -0.5, -0.5])) == 4.0    # (1,0,0) odd
    assert a.values_at(np.array([0.5, 0.5, -0.5])) == 1.0     # (1,1,0) even
    assert a.values_at(np.array([0.5, 0.5, 0.5])) == 4.0      # (1,1,1) odd
    assert a.a_min == 1.0 and a.a_max == 4.0
    assert a.h_periodic


def test_cell_table_lookup_is_lattice_periodic():
    """Value at x equals the value at the cell representative of x."""
    gen = rng(40)
    table = gen.uniform(1.0, 3.0, size=(4, 4, 4))
    a = CellTableCoefficient(table)
    x = gen.uniform(-9, 9, size=(800, 3))
    _, y = pullback_to_cell(x)
    np.testing.assert_array_equal(a.values_at(x), a.values_at(y))
    # explicitly: shifting by any lattice translation never changes the value
    for k in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (-2, 3, 1)):
        xs = translate_tau(np.asarray(k, dtype=float), x)
        np.testing.assert_array_equal(a.values_at(xs), a.values_at(x))


def test_cell_table_bins():
    table = np.arange(8.0).reshape(2, 2, 2) + 1.0
    a = CellTableCoefficient(table)
    # center of sub-cell (i, j, k) maps to table[i, j, k]
    for i in range(2):
        for j in range(2):
            for k in range(2):
                x = np.array([-0.5 + i, -0.5 + j, -0.5 + k])
                assert a.values_at(x) == table[i, j, k]


def test_constant_and_smooth_coefficients():
    c = ConstantCoefficient(2.5)
    assert c.values_at(np.zeros(3)) == 2.5
    assert c.x_independent and c.h_periodic
    s = SmoothCoefficient(lambda X: 2.0 + np.sin(X[..., 0]), 1.0, 3.0)
    x = rng(41).uniform(-2, 2, size=(100, 3))
    np.testing.assert_allclose(s.values_at(x), 2.0 + np.sin(x[:, 0]), rtol=1e-15)
    assert not s.h_periodic


def test_matrix_field_validation():
    with pytest.raises(ValueError):
        ConstantMatrixField(np.array([[1.0, 2.0], [0.0, 1.0]]))  # not symmetric
    with pytest.raises(ValueError):
        ConstantMatrixField(np.array([[1.0, 2.0], [2.0, 1.0]]))  # indefinite
    F = ConstantMatrixField(np.array([[2.0, 0.5], [0.5, 1.0]]))
    assert F.eig_min > 0 and F.eig_max < 3.0


# ---------------------------------------------------------------------------
# integrands: values, gradients, growth
# ---------------------------------------------------------------------------

def test_power_integrand_values_and_growth():
    f = power_integrand(checkerboard_coefficient(1.0, 4.0), 2.0)
    gen = rng(42)
    X = gen.uniform(-3, 3, size=(200, 3))
    Q = gen.uniform(-2, 2, size=(200, 2))
    vals = f.eval_cells(X, Q)
    nq = np.sum(Q * Q, axis=-1)
    assert np.all(vals >= f.c1 * nq - 1e-12)
    assert np.all(vals <= f.c2 * (nq + 1.0) + 1e-12)
    assert f.alpha == 2.0 and f.c1 == 1.0 and f.c2 == 4.0


def test_power_integrand_gradient_matches_fd():
    for alpha in (2.0, 3.0, 1.5):
        f = power_integrand(ConstantCoefficient(2.0), alpha)
        gen = rng(43)
        X = gen.uniform(-2, 2, size=(50, 3))
        Q = gen.uniform(0.2, 2, size=(50, 2)) * gen.choice([-1.0, 1.0], size=(50, 2))
        g = f.grad_q_cells(X, Q)
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (f.eval_cells(X, Q + e) - f.eval_cells(X, Q - e)) / (2 * h)
            np.testing.assert_allclose(g[:, i], fd, rtol=1e-5, atol=1e-5)


def test_power_gradient_zero_safe():
    f = power_integrand(ConstantCoefficient(1.0), 1.5)
    g = f.grad_q_cells(np.zeros((1, 3)), np.zeros((1, 2)))
    assert np.all(np.isfinite(g)) and np.all(g == 0.0)


def test_matrix_integrand_quadratic_case():
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    f = matrix_p_integrand(ConstantMatrixField(A), 2.0)
    gen = rng(44)
    X = gen.uniform(-2, 2, size=(80, 3))
    Q = gen.uniform(-2, 2, size=(80, 2))
    expect = np.sum((Q @ A.T) ** 2, axis=-1)
    np.testing.assert_allclose(f.eval_cells(X, Q), expect, rtol=1e-14)
    kind, payload = f.quad_cells(X)
    assert kind == "matrix" and payload.shape == (80, 2, 2)
    assert f.quad_cells(X) is not None
    f3 = matrix_p_integrand(ConstantMatrixField(A), 3.0)
    assert f3.quad_cells(X) is None


def test_quad_cells_only_for_quadratic_power():
    a = checkerboard_coefficient(1.0, 4.0)
    X = rng(45).uniform(-2, 2, size=(30, 3))
    kind, payload = power_integrand(a, 2.0).quad_cells(X)
    assert kind == "scalar"
    np.testing.assert_array_equal(payload, a.values_at(X))
    assert power_integrand(a, 2.5).quad_cells(X) is None


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def test_rescale_evaluates_at_dilated_points():
    f = power_integrand(checkerboard_coefficient(1.0, 4.0), 2.0)
    gen = rng(46)
    X = gen.uniform(-3, 3, size=(300, 3))
    Q = gen.uniform(-2, 2, size=(300, 2))
    for eps in (0.5, 2.0):
        g = rescale_integrand(f, eps)
        np.testing.assert_array_equal(g.eval_cells(X, Q), f.eval_cells(dilate(1.0 / eps, X), Q))
        assert not g.h_periodic
    assert rescale_integrand(f, 1.0).h_periodic


def test_translate_evaluates_at_shifted_points():
    f = power_integrand(checkerboard_coefficient(1.0, 4.0), 2.0)
    gen = rng(47)
    X = gen.uniform(-3, 3, size=(300, 3))
    Q = gen.uniform(-2, 2, size=(300, 2))
    z = np.array([0.3, -0.7, 0.2])
    g = translate_integrand(f, z)
    np.testing.assert_array_equal(g.eval_cells(X, Q), f.eval_cells(group_mul(z, X), Q))
    # fractional horizontal shift breaks lattice periodicity;
    # integral horizontal shift (any vertical) keeps it
    assert not g.h_periodic
    assert translate_integrand(f, np.array([1.0, 2.0, 0.37])).h_periodic


def test_translate_composition_law():
    """Nested shifts combine through the group product on the inside."""
    f = power_integrand(checkerboard_coefficient(1.0, 4.0), 2.0)
    gen = rng(48)
    X = gen.uniform(-3, 3, size=(200, 3))
    Q = gen.uniform(-2, 2, size=(200, 2))
    z1 = np.array([0.4, -0.2, 0.9])
    z2 = np.array([-1.1, 0.6, -0.3])
    lhs = translate_integrand(translate_integrand(f, z1), z2)
    rhs = translate_integrand(f, group_mul(z1, z2))
    np.testing.assert_array_equal(lhs.eval_cells(X, Q), rhs.eval_cells(X, Q))
    # and both concretely evaluate f at z1 * z2 * x
    np.testing.assert_array_equal(
        lhs.eval_cells(X, Q), f.eval_cells(group_mul(z1, group_mul(z2, X)), Q))


def test_rescale_translate_interchange():
    f = power_integrand(checkerboard_coefficient(1.0, 4.0), 2.0)
    gen = rng(49)
    X = gen.uniform(-2, 2, size=(150, 3))
    Q = gen.uniform(-2, 2, size=(150, 2))
    z = np.array([0.5, 0.25, -0.4])
    eps = 2.0
    a = rescale_integrand(translate_integrand(f, z), eps)
    b = translate_integrand(rescale_integrand(f, eps), dilate(eps, z))
    np.testing.assert_array_equal(a.eval_cells(X, Q), b.eval_cells(X, Q))


def test_transforms_do_not_mutate_original():
    f = power_integrand(checkerboard_coefficient(1.0, 4.0), 2.0)
    X = rng(50).uniform(-3, 3, size=(100, 3))
    Q = np.ones((100, 2))
    before = f.eval_cells(X, Q).copy()
    _ = translate_integrand(f, np.array([0.3, 0.1, 0.0]))
    _ = rescale_integrand(f, 3.0)
    np.testing.assert_array_equal(f.eval_cells(X, Q), before)
    assert f.h_periodic


# ---------------------------------------------------------------------------
# assumption audit
# ---------------------------------------------------------------------------

def test_assumption_audit_accepts_valid_integrands():
    rep = verify_assumptions(power_integrand(checkerboard_coefficient(1.0, 4.0), 2.0))
    assert rep.ok, rep
    rep2 = verify_assumptions(power_integrand(ConstantCoefficient(1.0), 3.0))
    assert rep2.ok


def test_assumption_audit_catches_false_periodicity():
    lying = SmoothCoefficient(lambda X: 2.0 + np.sin(X[..., 0]), 1.0, 3.0, h_periodic=True)
    rep = verify_assumptions(power_integrand(lying, 2.0))
    assert not rep.ok


def test_assumption_audit_catches_wrong_growth():
    f = power_integrand(ConstantCoefficient(2.0), 2.0)
    f.c2 = 0.5  # claim an upper bound that the values exceed
    rep = verify_assumptions(f)
    assert not rep.ok
