"""Sine eigenbasis of the hinged beam and spectral transforms.

On the interval (0, L) with hinged ends, the second-order operator and the
fourth-order operator share the eigenfunctions

    w_j(x) = sqrt(2/L) * sin(j*pi*x/L),   j = 1..N,

with eigenvalues mu_j = (j*pi/L)**2 and sigma_j = mu_j**2.  Every fractional
power therefore acts diagonally on coefficients, and the fourth-order
operator is exactly the square of the second-order one (the commutative
case).  Quadrature uses M uniform interior nodes x_m = m*L/(M+1) with weight
L/(M+1); on that grid the basis is discretely orthonormal for all modes up
to M, and products of up to about M/N basis modes are integrated without
aliasing (the default M = 8N covers the polynomial sources used here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError

__all__ = [
    "SpectralModel",
    "ModalState",
    "build_model",
    "synthesize",
    "analyze",
    "frac_norm",
    "phase_norm",
]


@dataclass(frozen=True)
class SpectralModel:
    """Truncated hinged-beam eigenbasis with quadrature tables.

    Immutable after construction and safe to share across workers.
    ``basis_table[j, m]`` holds w_{j+1}(x_m).
    """

    n_modes: int
    length: float
    kappa: float
    quad_points: int
    mu: np.ndarray
    sigma: np.ndarray
    quad_nodes: np.ndarray
    quad_weight: float
    basis_table: np.ndarray

    @property
    def domain_measure(self) -> float:
        """|Omega| = L for the interval (0, L)."""
        return self.length


@dataclass(frozen=True)
class ModalState:
    """Displacement/velocity coefficient pair (a, b) at time t."""

    a: np.ndarray
    b: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
            raise ValueError("a and b must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("state coefficients must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n_modes(self) -> int:
        return self.a.shape[0]


def build_model(n_modes, length, kappa=0.0, quad_points=None):
    """Build the truncated spectral model.

    ``quad_points`` defaults to 8*n_modes, enough to integrate the cubic and
    quartic products appearing in the polynomial sources exactly on the
    truncated space.  Requires quad_points >= 2*n_modes.
    """
    n_modes = int(n_modes)
    if n_modes < 1:
        raise InvalidConfigurationError(f"n_modes must be >= 1, got {n_modes}")
    length = float(length)
    if not (length > 0.0 and math.isfinite(length)):
        raise InvalidConfigurationError(f"length must be positive, got {length}")
    kappa = float(kappa)
    if kappa < 0.0:
        raise InvalidConfigurationError(f"kappa must be >= 0, got {kappa}")
    if quad_points is None:
        quad_points = 8 * n_modes
    quad_points = int(quad_points)
    if quad_points < 2 * n_modes:
        raise InvalidConfigurationError(
            f"quad_points = {quad_points} too small, need >= 2*n_modes = {2 * n_modes}"
        )

    j = np.arange(1, n_modes + 1, dtype=float)
    mu = (j * math.pi / length) ** 2
    sigma = mu**2
    m = np.arange(1, quad_points + 1, dtype=float)
    nodes = m * length / (quad_points + 1)
    weight = length / (quad_points + 1)
    # basis_table[j, m] = sqrt(2/L) sin((j+1) pi x_m / L)
    table = math.sqrt(2.0 / length) * np.sin(np.outer(j, nodes) * math.pi / length)
    mu.setflags(write=False)
    sigma.setflags(write=False)
    nodes.setflags(write=False)
    table.setflags(write=False)
    return SpectralModel(
        n_modes=n_modes,
        length=length,
        kappa=kappa,
        quad_points=quad_points,
        mu=mu,
        sigma=sigma,
        quad_nodes=nodes,
        quad_weight=weight,
        basis_table=table,
    )


def _check_coeffs(model, coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (model.n_modes,):
        raise ValueError(
            f"expected {model.n_modes} coefficients, got shape {c.shape}"
        )
    return c


def synthesize(model, coeffs):
    """Evaluate the modal expansion on the quadrature grid."""
    c = _check_coeffs(model, coeffs)
    return c @ model.basis_table


def analyze(model, field):
    """Project a grid field back onto modal coefficients.

    Inverse of :func:`synthesize` to rounding for fields that live on the
    first ``n_modes`` modes.
    """
    f = np.asarray(field, dtype=float)
    if f.shape != (model.quad_points,):
        raise ValueError(
            f"expected field of length {model.quad_points}, got shape {f.shape}"
        )
    return model.quad_weight * (model.basis_table @ f)


def frac_norm(model, coeffs, operator="A1", power=0.5):
    """Norm of a fractional operator power applied to the expansion.

    Returns (sum_j lam_j**(2*power) * c_j**2)**0.5 with lam_j the eigenvalues
    of the chosen operator: "A" (second order, mu) or "A1" (fourth order,
    sigma).  Powers act diagonally; power 0 gives the plain Euclidean norm.
    """
    c = _check_coeffs(model, coeffs)
    if operator == "A":
        lam = model.mu
    elif operator == "A1":
        lam = model.sigma
    else:
        raise ValueError(f"operator must be 'A' or 'A1', got {operator!r}")
    s = float(power)
    if s == 0.0:
        return float(np.linalg.norm(c))
    return float(math.sqrt(np.sum(lam ** (2.0 * s) * c**2)))


def phase_norm(model, state):
    """Finite-energy phase-space norm (sum sigma_j a_j^2 + sum b_j^2)**0.5."""
    a = _check_coeffs(model, state.a)
    b = _check_coeffs(model, state.b)
    return float(math.sqrt(np.sum(model.sigma * a**2) + np.sum(b**2)))
