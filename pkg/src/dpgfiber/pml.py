"""Perfectly matched layer via complex coordinate stretching along z.

The stretched coordinate is  phi(z) = z - (i/omega) S(z)  with S = 0 ahead of
the layer, so phi'(z) = 1 - (i/omega) S'(z).  A wave e^{-i beta z} entering
the layer decays like exp(-(beta/omega) S(z)).  Under the stretch the
material tensors pick up the diagonal factor

    A = diag(phi', phi', 1/phi'),

which multiplies both the electric and magnetic zeroth-order coefficients.

Two stretch profiles are provided: a C^2 cubic ramp and a cubic ramp with
exponential growth across the layer.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class PmlStretch:
    """Stretch S(t) supported on the layer between z_start and z_end, with
    t the distance traveled into the layer from the interior interface
    z_start.  z_end < z_start describes a layer absorbing a wave that
    travels toward -z (counter-propagating field).

    kind "cubic":      S = C t^3
    kind "expgrowth":  S = C t^n exp(t / width)
    """

    omega: float
    z_start: float
    z_end: float
    C: float
    kind: str = "cubic"
    n: int = 3

    def __post_init__(self):
        if self.kind not in ("cubic", "expgrowth"):
            raise ValueError("kind must be 'cubic' or 'expgrowth'")
        if self.z_end == self.z_start:
            raise ValueError("empty PML interval")

    @property
    def width(self) -> float:
        return abs(self.z_end - self.z_start)

    def _depth(self, z):
        sgn = 1.0 if self.z_end > self.z_start else -1.0
        return np.clip(sgn * (np.asarray(z, dtype=float) - self.z_start),
                       0.0, None)

    def S(self, z):
        t = self._depth(z)
        if self.kind == "cubic":
            return self.C * t**3
        return self.C * t**self.n * np.exp(t / self.width)

    def S_prime(self, z):
        """dS/dt at depth t(z) into the layer (nonnegative)."""
        t = self._depth(z)
        if self.kind == "cubic":
            return 3.0 * self.C * t**2
        g = np.exp(t / self.width)
        return self.C * g * (self.n * t ** (self.n - 1) + t**self.n / self.width)

    def phi_prime(self, z):
        return 1.0 - 1j / self.omega * self.S_prime(z)

    def tensor(self, z):
        """diag(phi', phi', 1/phi') at the given z values, shape z + (3, 3)."""
        pp = self.phi_prime(z)
        out = np.zeros(np.shape(z) + (3, 3), dtype=np.complex128)
        out[..., 0, 0] = pp
        out[..., 1, 1] = pp
        out[..., 2, 2] = 1.0 / pp
        return out

    def attenuation(self, beta: float) -> float:
        """Amplitude factor exp(-(beta/omega) S(z_end)) of a one-way pass."""
        return float(np.exp(-beta / self.omega * self.S(self.z_end)))

    @classmethod
    def calibrated(cls, omega: float, beta: float, z_start: float,
                   z_end: float, target: float, kind: str = "cubic",
                   n: int = 3) -> "PmlStretch":
        """Choose C so one pass attenuates amplitude by ``target``."""
        if not 0.0 < target < 1.0:
            raise ValueError("target attenuation must be in (0, 1)")
        width = abs(z_end - z_start)
        goal = omega / beta * np.log(1.0 / target)
        if kind == "cubic":
            C = goal / width**3
        else:
            C = goal / (width**n * np.e)
        return cls(omega, z_start, z_end, C, kind, n)
