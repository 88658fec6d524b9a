"""Warped-product model spaces and the radial potential.

A model space is ``N x [0, r_max)`` carrying the metric
``dr^2 + eta(r)^2 h`` with ``h`` the round metric on the unit
(n-1)-sphere.  The potential driving all support-function and volume
functionals is ``rho = eta'``.  Three space forms are shipped as
factories; a caller may supply a custom warping function, but only the
space forms are exercised by the test suite.  Instances are frozen and
safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

ScalarFn = Callable[[np.ndarray], np.ndarray]


def unit_sphere_area(k: int) -> float:
    """Area of the unit k-sphere in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2)."""
    if k < 1:
        raise DomainError("need k >= 1")
    half = (k + 1) / 2.0
    return 2.0 * math.pi ** half / math.gamma(half)


class Kind(Enum):
    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ModelSpace:
    """Ambient warped product with its curvature constants.

    ``ricci_normal`` is the constant value of Ric(radial, radial) in a
    space form, ``(n-1)*kappa``; ``scalar_curvature`` is ``n*(n-1)*kappa``.
    ``eta_triple_prime`` is only needed by :func:`static_residual` and may
    be omitted for custom warpings.
    """

    kind: Kind
    n: int
    r_max: float
    eta: ScalarFn
    eta_prime: ScalarFn
    eta_double_prime: ScalarFn
    ricci_normal: float
    scalar_curvature: float
    eta_triple_prime: Optional[ScalarFn] = None

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"ambient dimension must be >= 3, got {self.n}")

    def rho(self, r):
        """The potential rho(r) = eta'(r)."""
        return self.eta_prime(r)

    @staticmethod
    def spherical(n: int = 3) -> "ModelSpace":
        return ModelSpace(
            kind=Kind.SPHERICAL,
            n=n,
            r_max=math.pi,
            eta=np.sin,
            eta_prime=np.cos,
            eta_double_prime=lambda r: -np.sin(r),
            ricci_normal=float(n - 1),
            scalar_curvature=float(n * (n - 1)),
            eta_triple_prime=lambda r: -np.cos(r),
        )

    @staticmethod
    def hyperbolic(n: int = 3) -> "ModelSpace":
        return ModelSpace(
            kind=Kind.HYPERBOLIC,
            n=n,
            r_max=math.inf,
            eta=np.sinh,
            eta_prime=np.cosh,
            eta_double_prime=np.sinh,
            ricci_normal=float(-(n - 1)),
            scalar_curvature=float(-n * (n - 1)),
            eta_triple_prime=np.cosh,
        )

    @staticmethod
    def euclidean(n: int = 3) -> "ModelSpace":
        return ModelSpace(
            kind=Kind.EUCLIDEAN,
            n=n,
            r_max=math.inf,
            eta=lambda r: np.asarray(r, dtype=float),
            eta_prime=lambda r: np.ones_like(np.asarray(r, dtype=float)),
            eta_double_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            ricci_normal=0.0,
            scalar_curvature=0.0,
            eta_triple_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        )


def warp_eval(space: ModelSpace, r):
    """Evaluate (eta, eta', eta'') at radius ``r``.

    ``r`` may be a scalar or an array; every entry must satisfy
    ``0 <= r < r_max``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0) or np.any(r >= space.r_max):
        raise DomainError(
            f"radius out of range [0, {space.r_max}) for kind={space.kind.value}"
        )
    return space.eta(r), space.eta_prime(r), space.eta_double_prime(r)


def static_residual(space: ModelSpace, r):
    """Radial residual of the traced static identity.

    Returns ``rho'' + (n-1)(eta'/eta) rho' + n rho`` evaluated at ``r``,
    with ``rho = eta'``.  This vanishes identically exactly when the
    ambient satisfies the static equation that the monotonicity argument
    requires; among the shipped space forms that is the sphere only.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0) or np.any(r >= space.r_max):
        raise DomainError("static_residual needs 0 < r < r_max (eta vanishes at 0)")
    if space.eta_triple_prime is None:
        raise DomainError("space does not carry eta''' ; supply eta_triple_prime")
    n = space.n
    eta = space.eta(r)
    eta_p = space.eta_prime(r)
    rho = eta_p
    rho_p = space.eta_double_prime(r)
    rho_pp = space.eta_triple_prime(r)
    return rho_pp + (n - 1) * (eta_p / eta) * rho_p + n * rho
