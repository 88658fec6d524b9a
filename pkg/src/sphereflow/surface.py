"""Radial graphs over the unit 2-sphere and their extrinsic geometry.

Discretization (surfaces in a 3-dimensional ambient):

* colatitude: equiangular midpoint nodes ``theta_j = (j + 1/2) pi/n_theta``
  (no pole nodes); derivatives by 4th-order centred differences with the
  across-pole continuation ``u(-theta, phi) = u(theta, phi + pi)``;
* longitude: uniform nodes, derivatives by Fourier differentiation;
* quadrature: trapezoid in longitude; in colatitude, interpolatory
  weights with the exact moments of ``sin(theta) d(theta)`` at the
  midpoint nodes (Fejer's first rule in ``cos(theta)``).  The weights
  are positive and the rule is exact for polynomials in ``cos(theta)``
  of degree < n_theta, which the pole-exactness checks below require.

Sign conventions: the unit normal ``xi`` points to the inner region
(radial component ``-1/v``), so geodesic spheres have positive principal
curvatures and the support function ``p = -eta''(u)/v`` is positive on
convex graphs in the spherical ambient.

All reductions go through :func:`integrate_nodal`, which uses numpy's
pairwise summation in a fixed order, so equal inputs reproduce bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft as _fft

from .ambient import Kind, ModelSpace
from .errors import (
    ConfigurationError,
    DomainError,
    NotARadialGraphError,
    NumericalError,
)

__all__ = [
    "SphericalGrid",
    "RadialGraph",
    "GeometryFields",
    "build_grid",
    "constant_graph",
    "offcenter_sphere_graph",
    "offcenter_radial_profile",
    "perturbed_graph",
    "random_convex_graph",
    "compute_geometry",
    "sigma_k",
    "identity_residuals",
    "integrate_nodal",
]


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphericalGrid:
    """Structured node set on the unit 2-sphere with quadrature weights."""

    n_theta: int
    n_phi: int
    theta: np.ndarray          # (n_theta,)
    phi: np.ndarray            # (n_phi,)
    quad_weights: np.ndarray   # (n_theta, n_phi), sums to 4*pi
    sin_theta: np.ndarray = field(repr=False, default=None)
    cos_theta: np.ndarray = field(repr=False, default=None)
    directions: np.ndarray = field(repr=False, default=None)  # (nt, np, 3)
    wave_m: np.ndarray = field(repr=False, default=None)      # (n_phi//2 + 1,)

    @property
    def dtheta(self) -> float:
        return math.pi / self.n_theta

    @property
    def dphi(self) -> float:
        return 2.0 * math.pi / self.n_phi


def _fejer_sin_weights(n_theta: int) -> np.ndarray:
    # Fejer-1 weights for int_0^pi f(theta) sin(theta) dtheta at midpoints,
    # i.e. for int_{-1}^{1} f(arccos x) dx at Chebyshev nodes x = cos(theta).
    j = np.arange(n_theta)
    theta = (j + 0.5) * math.pi / n_theta
    m = np.arange(1, n_theta // 2 + 1)
    # w_j = (2/N) * (1 - 2 * sum_m cos(2 m theta_j)/(4 m^2 - 1))
    terms = np.cos(2.0 * np.outer(theta, m)) / (4.0 * m ** 2 - 1.0)
    return (2.0 / n_theta) * (1.0 - 2.0 * terms.sum(axis=1))


def build_grid(n_theta: int, n_phi: int) -> SphericalGrid:
    """Build the quadrature/differentiation grid.

    Parameters
    ----------
    n_theta : int
        Number of colatitude rings, at least 16.
    n_phi : int
        Number of longitude nodes, at least 32 and even (the across-pole
        continuation shifts rows by half a period).
    """
    if n_theta < 16 or n_phi < 32:
        raise ConfigurationError(
            f"grid too coarse: need n_theta >= 16 and n_phi >= 32, "
            f"got ({n_theta}, {n_phi})"
        )
    if n_phi % 2 != 0:
        raise ConfigurationError("n_phi must be even")
    theta = (np.arange(n_theta) + 0.5) * (math.pi / n_theta)
    phi = np.arange(n_phi) * (2.0 * math.pi / n_phi)
    w_theta = _fejer_sin_weights(n_theta)
    if np.any(w_theta <= 0.0):
        raise ConfigurationError("colatitude weights are not positive")
    weights = np.outer(w_theta, np.full(n_phi, 2.0 * math.pi / n_phi))
    st, ct = np.sin(theta), np.cos(theta)
    directions = np.empty((n_theta, n_phi, 3))
    directions[:, :, 0] = st[:, None] * np.cos(phi)[None, :]
    directions[:, :, 1] = st[:, None] * np.sin(phi)[None, :]
    directions[:, :, 2] = ct[:, None]
    wave_m = np.arange(n_phi // 2 + 1, dtype=float)
    return SphericalGrid(
        n_theta=n_theta,
        n_phi=n_phi,
        theta=theta,
        phi=phi,
        quad_weights=weights,
        sin_theta=st,
        cos_theta=ct,
        directions=directions,
        wave_m=wave_m,
    )


def integrate_nodal(grid_or_weights, values: np.ndarray) -> float:
    """Quadrature sum with a fixed (pairwise) reduction order."""
    w = (
        grid_or_weights.quad_weights
        if isinstance(grid_or_weights, SphericalGrid)
        else grid_or_weights
    )
    return float(np.sum(w * values))


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def _pad_pole(f: np.ndarray, n_phi: int) -> np.ndarray:
    """Two ghost rows on each side via u(-theta, phi) = u(theta, phi + pi)."""
    half = n_phi // 2
    out = np.empty((f.shape[0] + 4, n_phi))
    out[2:-2] = f
    out[1] = np.roll(f[0], half)
    out[0] = np.roll(f[1], half)
    out[-2] = np.roll(f[-1], half)
    out[-1] = np.roll(f[-2], half)
    return out


def theta_derivatives(f: np.ndarray, grid: SphericalGrid):
    """(df/dtheta, d2f/dtheta2) by 4th-order centred stencils."""
    h = grid.dtheta
    p = _pad_pole(f, grid.n_phi)
    d1 = (p[0:-4] - 8.0 * p[1:-3] + 8.0 * p[3:-1] - p[4:]) / (12.0 * h)
    d2 = (-p[0:-4] + 16.0 * p[1:-3] - 30.0 * p[2:-2] + 16.0 * p[3:-1] - p[4:]) / (
        12.0 * h * h
    )
    return d1, d2


def phi_derivatives(f: np.ndarray, grid: SphericalGrid, mask: Optional[np.ndarray] = None):
    """(f, df/dphi, d2f/dphi2) by Fourier differentiation along rows.

    When ``mask`` is given it multiplies the spectrum before synthesis,
    and the returned field itself is the masked synthesis; the flow
    stepper uses that to confine its dynamics to a per-ring resolvable
    band.
    """
    spec = _fft.rfft(f, axis=1)
    if mask is not None:
        spec = spec * mask
        f_used = _fft.irfft(spec, n=grid.n_phi, axis=1)
    else:
        f_used = f
    d1 = _fft.irfft(spec * (1j * grid.wave_m), n=grid.n_phi, axis=1)
    d2 = _fft.irfft(spec * -(grid.wave_m ** 2), n=grid.n_phi, axis=1)
    return f_used, d1, d2


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

@dataclass
class RadialGraph:
    """Star-shaped hypersurface ``r = u(theta, phi)`` over the origin pole."""

    grid: SphericalGrid
    u: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != (self.grid.n_theta, self.grid.n_phi):
            raise ConfigurationError("u has the wrong shape for its grid")
        if not np.all(np.isfinite(self.u)):
            raise NumericalError("non-finite radial values")
        if np.any(self.u <= 0.0):
            raise NotARadialGraphError("radial values must be strictly positive")

    def copy(self) -> "RadialGraph":
        return RadialGraph(self.grid, self.u.copy())


def constant_graph(grid: SphericalGrid, r0: float) -> RadialGraph:
    """The geodesic sphere of radius r0 centred at the origin."""
    if r0 <= 0.0:
        raise DomainError("r0 must be positive")
    return RadialGraph(grid, np.full((grid.n_theta, grid.n_phi), float(r0)))


def offcenter_radial_profile(r0: float, d: float, cos_psi) -> np.ndarray:
    """Radial profile of an off-centre geodesic sphere in the round sphere.

    Solves ``cos r0 = cos d cos u + sin d cos(psi) sin u`` for ``u``, where
    ``psi`` is the angle between the viewing direction and the centre axis:
    ``u = delta + arccos(cos r0 / R)`` with ``R = sqrt(cos^2 d +
    sin^2 d cos^2 psi)`` and ``tan delta = tan d cos psi``.
    """
    cos_psi = np.asarray(cos_psi, dtype=float)
    big_r = np.sqrt(np.cos(d) ** 2 + (np.sin(d) * cos_psi) ** 2)
    delta = np.arctan2(np.sin(d) * cos_psi, np.cos(d))
    arg = np.clip(np.cos(r0) / big_r, -1.0, 1.0)
    return delta + np.arccos(arg)


def offcenter_sphere_graph(grid: SphericalGrid, r0: float, d: float, axis) -> RadialGraph:
    """Geodesic sphere of radius ``r0`` whose centre sits at distance ``d``
    from the origin along ``axis`` (a unit direction on the parameter sphere).
    """
    if not (0.0 < r0 < math.pi / 2.0):
        raise DomainError("need 0 < r0 < pi/2")
    if d < 0.0:
        raise DomainError("need d >= 0")
    if d >= r0:
        raise NotARadialGraphError(
            "origin lies outside the sphere (d >= r0); not a radial graph"
        )
    axis = np.asarray(axis, dtype=float)
    norm = float(np.linalg.norm(axis))
    if abs(norm - 1.0) > 1e-8:
        raise DomainError("axis must be a unit direction")
    axis = axis / norm
    cos_psi = grid.directions @ axis
    return RadialGraph(grid, offcenter_radial_profile(r0, d, cos_psi))


def perturbed_graph(
    grid: SphericalGrid, r0: float, amplitude: float, pattern: str = "cos_theta"
) -> RadialGraph:
    """Deterministic smooth perturbations of a centred sphere.

    Patterns: ``cos_theta`` (axisymmetric, u = r0 + a cos(theta)) and
    ``y22`` (a real degree-2 sectoral harmonic, exercising longitude).
    """
    th = grid.theta[:, None]
    ph = grid.phi[None, :]
    if pattern == "cos_theta":
        bump = np.cos(th) * np.ones_like(ph)
    elif pattern == "y22":
        bump = np.sin(th) ** 2 * np.cos(2.0 * ph)
    else:
        raise ConfigurationError(f"unknown perturbation pattern {pattern!r}")
    return RadialGraph(grid, r0 + amplitude * bump)


def _real_harmonic(l: int, m: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # Orthonormal real spherical harmonic; built from lpmv so smoothness on
    # the sphere (hence across-pole compatibility) is guaranteed.
    from scipy.special import lpmv

    am = abs(m)
    norm = math.sqrt(
        (2 * l + 1) / (4.0 * math.pi) * math.factorial(l - am) / math.factorial(l + am)
    )
    leg = lpmv(am, l, np.cos(theta))[:, None]
    if m > 0:
        return math.sqrt(2.0) * norm * leg * np.cos(am * phi)[None, :]
    if m < 0:
        return math.sqrt(2.0) * norm * leg * np.sin(am * phi)[None, :]
    return norm * leg * np.ones_like(phi)[None, :]


def random_convex_graph(
    grid: SphericalGrid,
    r0: float = math.pi / 4,
    amplitude: float = 0.03,
    seed: int = 0,
    max_degree: int = 4,
    space: Optional[ModelSpace] = None,
) -> RadialGraph:
    """Seeded random smooth graph, re-drawn at shrinking amplitude until
    strictly convex (lambda_min > 0)."""
    space = space or ModelSpace.spherical(3)
    rng = np.random.default_rng(seed)
    coeffs = {
        (l, m): rng.normal()
        for l in range(1, max_degree + 1)
        for m in range(-l, l + 1)
    }
    bump = np.zeros((grid.n_theta, grid.n_phi))
    for (l, m), c in coeffs.items():
        bump += c * _real_harmonic(l, m, grid.theta, grid.phi)
    bump /= max(1e-30, float(np.max(np.abs(bump))))
    amp = amplitude
    for _ in range(8):
        graph = RadialGraph(grid, r0 + amp * bump)
        fields = compute_geometry(space, graph)
        if float(fields.lambda_min.min()) > 0.0:
            return graph
        amp *= 0.5
    raise NumericalError("failed to draw a strictly convex random graph")


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass
class GeometryFields:
    """Pointwise first/second fundamental data of a radial graph.

    ``area_element`` already contains the quadrature weight, so the
    integral of a nodal field f over the surface is
    ``np.sum(f * area_element)``.
    """

    g_tt: np.ndarray
    g_tp: np.ndarray
    g_pp: np.ndarray
    b_tt: np.ndarray
    b_tp: np.ndarray
    b_pp: np.ndarray
    v: np.ndarray
    H: np.ndarray
    sigma2: np.ndarray
    lambda_min: np.ndarray
    lambda_max: np.ndarray
    a_norm_sq: np.ndarray
    p: np.ndarray
    rho: np.ndarray
    area_element: np.ndarray
    xi_radial: np.ndarray


def compute_geometry(space: ModelSpace, graph: RadialGraph) -> GeometryFields:
    """All pointwise extrinsic geometry of a radial graph.

    Graph formulas with respect to the inner-pointing unit normal
    ``xi = -(d_r - eta^{-2} grad_h u)/v``:

    * induced metric  ``g_ij = u_i u_j + eta(u)^2 h_ij``;
    * second fundamental form
      ``b_ij = (-u_{;ij} + (2 eta'/eta) u_i u_j + eta eta' h_ij)/v``,
      where ``u_{;ij}`` is the Hessian on the parameter sphere;
    * support function ``p = -eta''(u)/v``.

    On a constant graph these reduce to ``b = (eta'/eta) g`` and
    ``H = (n-1) eta'/eta``, which the tests pin down.
    """
    grid = graph.grid
    u = graph.u
    if not np.all(np.isfinite(u)):
        raise NumericalError("non-finite radial values")
    if np.any(u <= 0.0) or np.any(u >= space.r_max):
        raise NotARadialGraphError("graph leaves the radial chart (0, r_max)")

    _, u_p, u_pp = phi_derivatives(u, grid)
    u_t, u_tt = theta_derivatives(u, grid)
    u_tp, _ = theta_derivatives(u_p, grid)

    st = grid.sin_theta[:, None]
    ct = grid.cos_theta[:, None]
    cot = ct / st

    eta = space.eta(u)
    eta_p = space.eta_prime(u)
    eta_pp = space.eta_double_prime(u)

    # Hessian on the round parameter sphere.
    hess_tt = u_tt
    hess_tp = u_tp - cot * u_p
    hess_pp = u_pp + st * ct * u_t

    grad_sq = u_t ** 2 + (u_p / st) ** 2
    v = np.sqrt(1.0 + grad_sq / eta ** 2)

    g_tt = u_t ** 2 + eta ** 2
    g_tp = u_t * u_p
    g_pp = u_p ** 2 + (eta * st) ** 2

    two_lam = 2.0 * eta_p / eta
    b_tt = (-hess_tt + two_lam * u_t ** 2 + eta * eta_p) / v
    b_tp = (-hess_tp + two_lam * u_t * u_p) / v
    b_pp = (-hess_pp + two_lam * u_p ** 2 + eta * eta_p * st ** 2) / v

    det_g = g_tt * g_pp - g_tp ** 2
    if np.any(det_g <= 0.0):
        raise NumericalError("degenerate induced metric")

    s11 = (g_pp * b_tt - g_tp * b_tp) / det_g
    s12 = (g_pp * b_tp - g_tp * b_pp) / det_g
    s21 = (g_tt * b_tp - g_tp * b_tt) / det_g
    s22 = (g_tt * b_pp - g_tp * b_tp) / det_g

    mean_curv = s11 + s22
    sigma2 = s11 * s22 - s12 * s21
    disc = np.sqrt(np.maximum(mean_curv ** 2 - 4.0 * sigma2, 0.0))
    lam_min = 0.5 * (mean_curv - disc)
    lam_max = 0.5 * (mean_curv + disc)
    a_norm_sq = s11 ** 2 + 2.0 * s12 * s21 + s22 ** 2

    fields = GeometryFields(
        g_tt=g_tt,
        g_tp=g_tp,
        g_pp=g_pp,
        b_tt=b_tt,
        b_tp=b_tp,
        b_pp=b_pp,
        v=v,
        H=mean_curv,
        sigma2=sigma2,
        lambda_min=lam_min,
        lambda_max=lam_max,
        a_norm_sq=a_norm_sq,
        p=-eta_pp / v,
        rho=eta_p,
        area_element=v * eta ** 2 * grid.quad_weights,
        xi_radial=-1.0 / v,
    )
    if not np.all(np.isfinite(mean_curv)):
        raise NumericalError("non-finite curvature")
    return fields


def sigma_k(lam, k: int) -> float:
    """k-th elementary symmetric polynomial of a principal-curvature vector."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if k < 0 or k > lam.size:
        raise DomainError(f"k={k} out of range for {lam.size} curvatures")
    if k == 0:
        return 1.0
    # coefficients of prod (x + lam_i); index k picks sigma_k
    return float(np.poly(-lam)[k])


def identity_residuals(space: ModelSpace, fields: GeometryFields):
    """Integrated structural identities on a closed graph (sphere ambient).

    Returns ``(minkowski_residual, laplace_rho_residual)`` where

    * ``minkowski_residual = (n-2) int rho H - 2 int p K``,
    * ``laplace_rho_residual = int (H p - (n-1) rho)``,

    both of which vanish for every closed hypersurface of the round
    sphere, up to quadrature error.
    """
    if space.kind is not Kind.SPHERICAL:
        raise DomainError("identity residuals are defined in the spherical ambient")
    n = space.n
    w = fields.area_element
    mink = (n - 2) * float(np.sum(w * fields.rho * fields.H)) - 2.0 * float(
        np.sum(w * fields.p * fields.sigma2)
    )
    lap = float(np.sum(w * (fields.H * fields.p - (n - 1) * fields.rho)))
    return mink, lap
