"""Energy functionals, closed-form decay envelope constants, rate fitting.

For a valid source (structural constant c_f below the first eigenvalue) the
modified energy Etilde = E + K_lambda is non-negative, non-increasing, and
squeezed between two explicit polynomial envelopes.  Every constant of those
envelopes is evaluated in closed form on the truncated spectral space, where
the embedding constant C_alpha is a finite maximum over modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError
from .integrate import _mu2alpha, _source_integral
from .laws import assumption_constants

__all__ = [
    "EnergyBreakdown",
    "EnvelopeParams",
    "energy",
    "envelope_constants",
    "decay_envelopes",
    "fit_power_rate",
    "fit_exp_rate",
    "FitResult",
]


@dataclass(frozen=True)
class EnergyBreakdown:
    """Itemized energy of one state.

    ``total`` is the sum of the five parts; ``total_mod`` adds the offset
    K_lambda; ``e_alpha`` is the damping argument ||A^alpha u||^2 + ||u_t||^2.
    """

    kinetic: float
    bending: float
    membrane: float
    source: float
    work: float
    total: float
    K_lambda: float
    total_mod: float
    e_alpha: float


def energy(model, source, forcing, state, alpha=1.0, constants=None):
    """Itemized energy breakdown of a modal state."""
    a, b = state.a, state.b
    kinetic = 0.5 * float(b @ b)
    bending = 0.5 * float(np.sum(model.sigma * a**2))
    membrane = 0.5 * model.kappa * float(np.sum(model.mu * a**2))
    src = _source_integral(model, source, a)
    work = -float(forcing.effective @ a)
    total = kinetic + bending + membrane + src + work

    if constants is None:
        constants = assumption_constants(source, model=model)
    sigma1 = float(model.sigma[0])
    omega = 1.0 - constants.c_f / sigma1
    if not omega > 0.0:
        raise InvalidConfigurationError(
            f"c_f = {constants.c_f} >= sigma_1 = {sigma1}: omega <= 0"
        )
    k_lam = constants.C_f * model.domain_measure + forcing.effective_norm**2 / (
        sigma1 * omega
    )
    e_alpha = float(_mu2alpha(model, alpha) @ (a * a)) + float(b @ b)
    return EnergyBreakdown(
        kinetic=kinetic,
        bending=bending,
        membrane=membrane,
        source=src,
        work=work,
        total=total,
        K_lambda=k_lam,
        total_mod=total + k_lam,
        e_alpha=e_alpha,
    )


@dataclass(frozen=True)
class EnvelopeParams:
    """Closed-form constants of the two-sided polynomial decay envelope."""

    omega: float
    K_lambda: float
    C_alpha: float
    C_lower: float
    C_bar: float
    C_upper: float
    E0: float
    q: float
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.omega <= 1.0:
            raise InvalidConfigurationError(f"omega must be in (0, 1], got {self.omega}")
        if not self.C_lower <= self.C_upper:
            raise InvalidConfigurationError(
                f"envelope constants out of order: {self.C_lower} > {self.C_upper}"
            )
        for name in ("C_alpha", "C_lower", "C_bar", "C_upper"):
            if not getattr(self, name) > 0.0:
                raise InvalidConfigurationError(f"{name} must be positive")


def embedding_constant(model, alpha):
    """Smallest C with ||(u, v)||_{H_alpha}^2 <= C ||(u, v)||_H^2 on the truncation.

    Equals max(1, max_j mu_j**(2*alpha)/sigma_j); it is 1 whenever mu_1 >= 1,
    in particular for the default domain length pi.
    """
    return float(max(1.0, np.max(_mu2alpha(model, alpha) / model.sigma)))


def envelope_constants(q, gamma, alpha, model, source_constants, forcing, E0):
    """Evaluate every envelope constant in closed form.

    ``E0`` is the initial modified energy.  Raises when the source constant
    c_f reaches sigma_1 (the coercivity factor omega would vanish).
    """
    q = float(q)
    gamma = float(gamma)
    if q < 0.5:
        raise InvalidConfigurationError(f"q >= 1/2 required, got {q}")
    if not gamma > 0.0:
        raise InvalidConfigurationError(f"gamma must be > 0, got {gamma}")
    sigma1 = float(model.sigma[0])
    omega = 1.0 - source_constants.c_f / sigma1
    if not omega > 0.0:
        raise InvalidConfigurationError(
            f"c_f = {source_constants.c_f} >= sigma_1 = {sigma1}: omega <= 0"
        )
    k_lam = source_constants.C_f * model.domain_measure + (
        forcing.effective_norm**2 / (sigma1 * omega)
    )
    c_alpha = embedding_constant(model, alpha)
    c_lower = omega**q / (2.0 ** (2.0 * q + 1.0) * c_alpha**q * gamma)
    c_bar = (
        3.0 / (2.0 * gamma ** (1.0 / (q + 1.0)))
        + 128.0 / (omega * sigma1 * gamma ** (1.0 / (q + 1.0)))
        + 2.0 ** (2.0 * q + 3.0)
        * gamma ** ((2.0 * q + 1.0) / (q + 1.0))
        * c_alpha ** (2.0 * q)
        / (omega ** (2.0 * q + 1.0) * sigma1)
        * E0 ** (2.0 * q)
    )
    c_upper = 2.0 ** (q + 1.0) * (
        2.0 ** ((2.0 * q + 1.0) / (q + 1.0)) * E0 ** (q / (q + 1.0)) + 4.0 * c_bar
    ) ** (q + 1.0)
    return EnvelopeParams(
        omega=omega,
        K_lambda=k_lam,
        C_alpha=c_alpha,
        C_lower=c_lower,
        C_bar=c_bar,
        C_upper=c_upper,
        E0=float(E0),
        q=q,
        gamma=gamma,
    )


def decay_envelopes(params, t):
    """Two-sided envelope at time t >= 0 (scalar or array).

    lower(t) = [q t / C_lower + E0^-q]^(-1/q)
    upper(t) = [q (t-1)^+ / C_upper + E0^-q]^(-1/q) + 8 K_lambda
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be >= 0")
    q = params.q
    e0q = params.E0 ** (-q)
    lower = (q * t / params.C_lower + e0q) ** (-1.0 / q)
    tplus = np.maximum(t - 1.0, 0.0)
    upper = (q * tplus / params.C_upper + e0q) ** (-1.0 / q) + 8.0 * params.K_lambda
    if lower.ndim == 0:
        return float(lower), float(upper)
    return lower, upper


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float

    @property
    def rate(self) -> float:
        """Decay rate of an exponential fit y = amplitude * exp(-rate t)."""
        return -self.slope

    @property
    def amplitude(self) -> float:
        return math.exp(self.intercept)


def _linear_fit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    yhat = A @ coef
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(coef[0]), float(coef[1]), r2


def _fit_window(series, window):
    sub = series.window(window[0], window[1])
    if len(sub) < 10:
        raise ValueError(f"need >= 10 points in window, got {len(sub)}")
    if np.any(sub.y <= 0.0):
        raise ValueError("fit requires positive values in the window")
    return sub


def fit_power_rate(series, window):
    """Least-squares line on (ln t, ln y); slope is the power-law exponent."""
    sub = _fit_window(series, window)
    if np.any(sub.t <= 0.0):
        raise ValueError("power fit requires positive times")
    slope, intercept, r2 = _linear_fit(np.log(sub.t), np.log(sub.y))
    return FitResult(slope, intercept, r2)


def fit_exp_rate(series, window):
    """Least-squares line on (t, ln y); ``rate`` is the positive decay rate."""
    sub = _fit_window(series, window)
    slope, intercept, r2 = _linear_fit(sub.t, np.log(sub.y))
    return FitResult(slope, intercept, r2)
