import numpy as np
import pytest

from dpgfiber import basis1d, quad


@pytest.mark.parametrize("p", range(1, 7))
def test_h1_vertex_values(p):
    vals, _ = basis1d.h1_tab(p, np.array([0.0, 1.0]))
    assert np.allclose(vals[0], [1.0, 0.0])
    assert np.allclose(vals[1], [0.0, 1.0])
    # bubbles vanish at both endpoints
    if p >= 2:
        assert np.max(np.abs(vals[2:])) < 1e-14


@pytest.mark.parametrize("p", range(1, 7))
def test_h1_partition_of_unity(p):
    x = np.linspace(0.0, 1.0, 17)
    vals, ders = basis1d.h1_tab(p, x)
    assert np.allclose(vals[0] + vals[1], 1.0)
    assert np.allclose(ders[0] + ders[1], 0.0)


@pytest.mark.parametrize("p", range(1, 7))
def test_h1_derivatives_match_fd(p):
    rng = np.random.default_rng(0)
    x = rng.uniform(0.05, 0.95, 20)
    h = 1e-6
    vp, _ = basis1d.h1_tab(p, x + h)
    vm, _ = basis1d.h1_tab(p, x - h)
    _, ders = basis1d.h1_tab(p, x)
    assert np.max(np.abs((vp - vm) / (2 * h) - ders)) < 1e-6


@pytest.mark.parametrize("p", range(1, 7))
def test_h1_deriv_matrix(p):
    x, _ = quad.gauss_1d(p + 2)
    _, ders = basis1d.h1_tab(p, x)
    l2 = basis1d.l2_tab(p, x)
    D = basis1d.h1_deriv_matrix(p)
    assert np.max(np.abs(ders - D @ l2)) < 1e-12


@pytest.mark.parametrize("dim", range(1, 7))
def test_l2_orthogonality(dim):
    x, w = quad.gauss_1d(dim + 1)
    P = basis1d.l2_tab(dim, x)
    M = (P * w) @ P.T
    # Legendre on [0,1]: ||P_m||^2 = 1/(2m+1)
    expect = np.diag(1.0 / (2.0 * np.arange(dim) + 1.0))
    assert np.max(np.abs(M - expect)) < 1e-13


@pytest.mark.parametrize("p", range(1, 7))
def test_h1_reversal_is_signed_permutation(p):
    x = np.linspace(0.0, 1.0, 13)
    vals, _ = basis1d.h1_tab(p, x)
    rvals, _ = basis1d.h1_tab(p, 1.0 - x)
    perm, sign = basis1d.h1_reversal_signs(p)
    assert np.max(np.abs(rvals - sign[:, None] * vals[perm])) < 1e-13


@pytest.mark.parametrize("dim", range(1, 7))
def test_l2_reversal_signs(dim):
    x = np.linspace(0.0, 1.0, 13)
    vals = basis1d.l2_tab(dim, x)
    rvals = basis1d.l2_tab(dim, 1.0 - x)
    s = basis1d.l2_reversal_signs(dim)
    assert np.max(np.abs(rvals - s[:, None] * vals)) < 1e-13


def test_gauss_rule_exactness():
    # n points integrate x^(2n-1) exactly on [0,1]
    for n in range(1, 8):
        x, w = quad.gauss_1d(n)
        k = 2 * n - 1
        assert abs(np.sum(w * x**k) - 1.0 / (k + 1)) < 1e-14


def test_gauss_rule_3d_volume():
    rule = quad.gauss_rule(3, 4, 5)
    assert rule.n_points == 60
    assert abs(np.sum(rule.weights) - 1.0) < 1e-14
    pts = rule.points
    # z fastest in the flattened ordering
    assert np.allclose(pts[: rule.shape[2], 0], pts[0, 0])
    f = pts[:, 0] ** 2 * pts[:, 1] * pts[:, 2] ** 3
    assert abs(np.sum(rule.weights * f) - (1 / 3) * (1 / 2) * (1 / 4)) < 1e-14
