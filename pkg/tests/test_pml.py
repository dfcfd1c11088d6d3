import numpy as np
import pytest

from dpgfiber.pml import PmlStretch


def test_stretch_inactive_before_layer():
    p = PmlStretch(omega=10.0, z_start=2.0, z_end=3.0, C=5.0)
    z = np.linspace(0.0, 2.0, 7)
    assert np.allclose(p.S(z), 0.0)
    assert np.allclose(p.phi_prime(z), 1.0)
    T = p.tensor(z)
    assert np.allclose(T, np.broadcast_to(np.eye(3), T.shape))


@pytest.mark.parametrize("kind", ["cubic", "expgrowth"])
def test_s_prime_matches_fd(kind):
    p = PmlStretch(omega=10.0, z_start=1.0, z_end=2.0, C=3.0, kind=kind)
    z = np.linspace(1.05, 1.95, 11)
    h = 1e-6
    fd = (p.S(z + h) - p.S(z - h)) / (2 * h)
    assert np.max(np.abs(fd - p.S_prime(z))) / np.max(np.abs(fd)) < 1e-8


def test_tensor_structure():
    p = PmlStretch(omega=2.0, z_start=0.0, z_end=1.0, C=1.0)
    T = p.tensor(np.array([0.5]))
    pp = p.phi_prime(0.5)
    assert np.isclose(T[0, 0, 0], pp)
    assert np.isclose(T[0, 1, 1], pp)
    assert np.isclose(T[0, 2, 2], 1.0 / pp)
    off = T[0] - np.diag(np.diag(T[0]))
    assert np.max(np.abs(off)) == 0.0


@pytest.mark.parametrize("kind", ["cubic", "expgrowth"])
def test_calibrated_attenuation(kind):
    omega, beta = 30 * np.pi, 0.97 * 30 * np.pi
    p = PmlStretch.calibrated(omega, beta, 8.0, 10.0, 1e-4, kind=kind)
    assert np.isclose(p.attenuation(beta), 1e-4, rtol=1e-10)
    # stronger beta attenuates more
    assert p.attenuation(1.1 * beta) < p.attenuation(beta)
