"""Closed-form and quadrature ground truth for geodesic spheres.

Everything here is independent of the grid engine: centred spheres come
from closed forms valid in any ambient dimension n >= 3, off-centre
spheres from a 2-dimensional Gauss--Legendre quadrature in geodesic
polar coordinates about the sphere's own centre.  The two routes let the
tests cross-validate the surface/functional pipeline end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .ambient import unit_sphere_area
from .errors import DomainError
from .functionals import FunctionalRecord

__all__ = [
    "SphereSpec",
    "OffcenterOracle",
    "sphere_closed_forms",
    "offcenter_oracle",
    "direction_sample_26",
]


@dataclass(frozen=True)
class SphereSpec:
    """A geodesic sphere: ambient dimension, radius, centre offset."""

    n: int
    r0: float
    d: float = 0.0

    def __post_init__(self):
        if self.n < 3:
            raise DomainError("need n >= 3")
        if not (0.0 < self.r0 < math.pi / 2.0):
            raise DomainError("need 0 < r0 < pi/2")
        if self.d < 0.0 or self.r0 + self.d >= math.pi / 2.0:
            raise DomainError("need d >= 0 and r0 + d < pi/2 (open hemisphere)")


def sphere_closed_forms(n: int, r0: float) -> FunctionalRecord:
    """All functionals of the centred geodesic sphere of radius r0."""
    if not (0.0 < r0 < math.pi / 2.0):
        raise DomainError("need 0 < r0 < pi/2")
    if n < 3:
        raise DomainError("need n >= 3")
    omega = unit_sphere_area(n - 1)
    s, c = math.sin(r0), math.cos(r0)
    cot = c / s
    mean_curv = (n - 1) * cot
    big_a = s ** (n - 1)
    j_val = omega * s ** n
    return FunctionalRecord(
        t=0.0,
        area=omega * s ** (n - 1),
        A=big_a,
        I=(n - 1) * omega * c ** 2 * s ** (n - 2),
        J=j_val,
        L=j_val,
        calK=omega * big_a ** (n / (n - 1.0)),
        Q=0.0,
        j_minus_l=0.0,
        min_H=mean_curv,
        lambda_min=cot,
        umbilicity=0.0,
        rho_over_h=j_val / (n - 1.0),
        n=n,
    )


def sphere_sigma2(n: int, r0: float) -> float:
    """Extrinsic scalar curvature of a geodesic sphere of radius r0."""
    return math.comb(n - 1, 2) * (math.cos(r0) / math.sin(r0)) ** 2


@dataclass(frozen=True)
class OffcenterOracle:
    L: float
    L_center: float
    I: float
    naive_gap: float
    theorem_gap: float


def offcenter_oracle(n: int, r0: float, d: float, n_quad: int = 256) -> OffcenterOracle:
    """Ground truth for the off-centre geodesic sphere.

    ``L`` integrates the origin-based potential over the geodesic ball in
    polar coordinates about the ball's own centre (iterated Gauss--
    Legendre); ``I`` then comes from the integrated divergence identity
    ``(n-2) I = 2 K L`` with the constant scalar curvature K, an
    independent route from any surface quadrature.
    """
    spec = SphereSpec(n=n, r0=r0, d=d)
    if d <= 0.0:
        raise DomainError("off-centre oracle needs d > 0; use sphere_closed_forms")
    xs, ws = roots_legendre(n_quad)
    # s in (0, r0): geodesic distance to the centre; alpha in (0, pi):
    # polar angle from the axis pointing back to the origin.
    s_nodes = 0.5 * r0 * (xs + 1.0)
    s_w = 0.5 * r0 * ws
    a_nodes = 0.5 * math.pi * (xs + 1.0)
    a_w = 0.5 * math.pi * ws
    sin_s = np.sin(s_nodes)[:, None]
    cos_s = np.cos(s_nodes)[:, None]
    sin_a = np.sin(a_nodes)[None, :]
    cos_a = np.cos(a_nodes)[None, :]
    # potential at distance s from the centre, angle alpha from the axis
    rho = cos_s * math.cos(d) + sin_s * math.sin(d) * cos_a
    kern = rho * sin_s ** (n - 1) * sin_a ** (n - 2)
    omega_fiber = unit_sphere_area(n - 2)
    big_l = n * omega_fiber * float(s_w @ kern @ a_w)

    centred = sphere_closed_forms(n, r0)
    l_center = centred.L
    big_i = 2.0 * sphere_sigma2(n, r0) * big_l / (n - 2.0)
    omega = unit_sphere_area(n - 1)
    big_a = centred.A
    rhs_naive = (n - 1) * omega * (big_a ** ((n - 2.0) / (n - 1)) - big_a ** (n / (n - 1.0)))
    naive_gap = big_i - rhs_naive
    # with x at the centre everything is rotation invariant: the tilted
    # integrals coincide with the centred closed forms
    theorem_gap = centred.I - rhs_naive * (l_center / centred.calK)
    return OffcenterOracle(
        L=big_l,
        L_center=l_center,
        I=big_i,
        naive_gap=naive_gap,
        theorem_gap=theorem_gap,
    )


def direction_sample_26() -> np.ndarray:
    """A fixed 26-direction sample of the embedding sphere S^3 in R^4.

    The 8 signed axes, the 12 distinct two-coordinate diagonals
    (i < j with sign patterns ++ and +-), and 6 heavier diagonals.
    Includes both poles +-e0.
    """
    dirs = []
    eye = np.eye(4)
    for i in range(4):
        dirs.append(eye[i])
        dirs.append(-eye[i])
    for i in range(4):
        for j in range(i + 1, 4):
            dirs.append((eye[i] + eye[j]) / math.sqrt(2.0))
            dirs.append((eye[i] - eye[j]) / math.sqrt(2.0))
    for i in range(4):
        v = np.ones(4)
        v[i] = -1.0
        dirs.append(v / 2.0)
    dirs.append(np.ones(4) / 2.0)
    dirs.append(-np.ones(4) / 2.0)
    out = np.array(dirs)
    assert out.shape == (26, 4)
    return out
