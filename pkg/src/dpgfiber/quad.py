"""Gauss-Legendre quadrature on the reference interval [0, 1] and its
tensorization to the reference hexahedron [0, 1]^3."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss rule: 1D points/weights per direction plus the flattened
    3D point and weight sequences (ordering: x slowest, z fastest)."""

    points_1d: tuple[np.ndarray, np.ndarray, np.ndarray]
    weights_1d: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(len(p) for p in self.points_1d)

    @property
    def n_points(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    @property
    def points(self) -> np.ndarray:
        """(n_points, 3) flattened tensor points."""
        px, py, pz = self.points_1d
        X, Y, Z = np.meshgrid(px, py, pz, indexing="ij")
        return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    @property
    def weights(self) -> np.ndarray:
        wx, wy, wz = self.weights_1d
        return np.einsum("i,j,k->ijk", wx, wy, wz).ravel()

    @property
    def weights_grid(self) -> np.ndarray:
        wx, wy, wz = self.weights_1d
        return np.einsum("i,j,k->ijk", wx, wy, wz)


def gauss_1d(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [0, 1]; exact for degree 2n-1."""
    if n < 1:
        raise ValueError("need at least one quadrature point")
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def gauss_rule(n, ny=None, nz=None) -> QuadratureRule:
    """Tensor Gauss rule with n (or n, ny, nz) points per direction."""
    ny = n if ny is None else ny
    nz = n if nz is None else nz
    pts, wts = [], []
    for m in (n, ny, nz):
        p, w = gauss_1d(m)
        pts.append(p)
        wts.append(w)
    return QuadratureRule(tuple(pts), tuple(wts))


def gauss_rule_2d(na: int, nb: int):
    """2D tensor rule on [0,1]^2: returns (a, b, w) flattened, a slowest."""
    pa, wa = gauss_1d(na)
    pb, wb = gauss_1d(nb)
    A, B = np.meshgrid(pa, pb, indexing="ij")
    W = np.outer(wa, wb)
    return A.ravel(), B.ravel(), W.ravel()
