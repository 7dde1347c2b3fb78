"""Conformal profile F and fiber weight f.

F(t) is the unique solution of  c*exp(-F) - 2t*exp(-3F) + 1 = 0  with c < 0,
the conformal exponent relating the reference metric to the Blaschke metric.
f(t) = -t^(1/3) * integral_0^t F'(s) s^(-1/3) ds is the nonpositive weight
that controls the fiber directions of the pseudo-Kahler metric.

Everything here is a pure function of (profile, t); t may be a scalar or an
ndarray and the result matches the input shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "ConformalProfile",
    "DomainError",
    "ConvergenceError",
    "eval_F",
    "closed_form_F",
    "eval_F_prime",
    "eval_f",
    "eval_f_prime",
    "f_prime_at_zero",
    "functional_residual",
    "positivity_combination",
    "g_aux",
    "g_aux_prime",
]

_NEWTON_MAX_ITER = 80


class DomainError(ValueError):
    """Argument outside the domain of a profile function."""


class ConvergenceError(RuntimeError):
    """Root finder failed to reach the requested residual."""

    def __init__(self, msg, residual):
        super().__init__(f"{msg} (worst residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class ConformalProfile:
    """Topological constant c = 2*pi*chi / Vol plus solver knobs.

    c must be strictly negative (genus >= 2 normalization); root_tol bounds
    the residual of the implicit solve for F, quad_order is the number of
    Gauss-Legendre nodes used for f.
    """

    c: float
    root_tol: float = 1e-13
    quad_order: int = 64

    def __post_init__(self):
        if not self.c < 0:
            raise DomainError(f"c must be strictly negative, got {self.c}")
        if not self.root_tol > 0:
            raise DomainError("root_tol must be positive")
        if self.quad_order < 8:
            raise DomainError("quad_order must be >= 8")

    @property
    def zeta(self) -> float:
        # Cardano discriminant constant of 2t*y^3 - c*y - 1 = 0; the cube on
        # |c| matters for any c != -1 (checked against the root finder).
        return 2.0 * abs(self.c) ** 3 / 27.0


def _check_nonneg(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be nonnegative")
    return t


def functional_residual(profile: ConformalProfile, t, F):
    """Residual of c*exp(-F) - 2t*exp(-3F) + 1 at the given (t, F)."""
    t = np.asarray(t, dtype=float)
    F = np.asarray(F, dtype=float)
    y = np.exp(-F)
    return profile.c * y - 2.0 * t * y**3 + 1.0


def eval_F(profile: ConformalProfile, t):
    """Solve the defining cubic for F(t).

    Works on y = exp(-F): phi(y) = 2t*y^3 - c*y - 1 is strictly increasing
    and convex on y > 0 with phi(0) = -1 < 0 and phi(1/|c|) >= 0, so Newton
    started at y = 1/|c| descends monotonically onto the root; iterates are
    clipped into (0, 1/|c|] as a safeguard.
    """
    t = _check_nonneg(t)
    c = profile.c
    y_hi = 1.0 / abs(c)
    y = np.full_like(t, y_hi)
    for _ in range(_NEWTON_MAX_ITER):
        phi = 2.0 * t * y**3 - c * y - 1.0
        if np.all(np.abs(phi) <= profile.root_tol):
            break
        dphi = 6.0 * t * y**2 - c
        y = np.clip(y - phi / dphi, np.finfo(float).tiny, y_hi)
    else:
        worst = float(np.max(np.abs(2.0 * t * y**3 - c * y - 1.0)))
        if worst > profile.root_tol:
            raise ConvergenceError("Newton solve for F did not converge", worst)
    out = -np.log(y)
    return out if out.ndim else float(out)


def closed_form_F(profile: ConformalProfile, t):
    """Cardano form of F for t > 0, with real cube roots of either sign.

    F(t) = log( (4t)^(1/3) / (cbrt(1 + R) + cbrt(1 - R)) ), R = sqrt(1 + zeta/t).
    """
    t = _check_nonneg(t)
    if np.any(t == 0):
        raise DomainError("closed form requires t > 0; use eval_F at t = 0")
    R = np.sqrt(1.0 + profile.zeta / t)
    denom = np.cbrt(1.0 + R) + np.cbrt(1.0 - R)
    out = np.log(np.cbrt(4.0 * t) / denom)
    return out if out.ndim else float(out)


def eval_F_prime(profile: ConformalProfile, t):
    """F'(t) = 2 / (6t - c*exp(2F(t))), by implicit differentiation; > 0."""
    t = _check_nonneg(t)
    F = np.asarray(eval_F(profile, t))
    out = 2.0 / (6.0 * t - profile.c * np.exp(2.0 * F))
    return out if out.ndim else float(out)


@lru_cache(maxsize=8)
def _gl_nodes(order: int):
    return np.polynomial.legendre.leggauss(order)


def eval_f(profile: ConformalProfile, t):
    """f(t) = -t^(1/3) * integral_0^t F'(s) s^(-1/3) ds, f <= 0, f(0) = 0.

    The substitution s = sigma^3 turns the integrand into 3 F'(sigma^3) sigma,
    smooth on [0, t^(1/3)], so fixed-order Gauss-Legendre converges spectrally.
    """
    t = _check_nonneg(t)
    scalar = t.ndim == 0
    tt = np.atleast_1d(t)
    nodes, weights = _gl_nodes(profile.quad_order)
    cbrt_t = np.cbrt(tt)
    # map [-1, 1] -> [0, t^(1/3)]
    sigma = 0.5 * cbrt_t[..., None] * (nodes + 1.0)
    Fp = eval_F_prime(profile, sigma**3)
    integral = 0.5 * cbrt_t * np.sum(weights * 3.0 * Fp * sigma, axis=-1)
    out = -cbrt_t * integral
    out = out.reshape(tt.shape)
    return float(out[0]) if scalar else out.reshape(t.shape)


def f_prime_at_zero(profile: ConformalProfile) -> float:
    """Limit of f'(t) as t -> 0+, equal to -(3/2) F'(0) = -3/|c|^3."""
    return -1.5 * eval_F_prime(profile, 0.0)


def eval_f_prime(profile: ConformalProfile, t):
    """f'(t) = -F'(t) + f(t)/(3t) for t > 0; the t = 0 limit -(3/2)F'(0)."""
    t = _check_nonneg(t)
    scalar = t.ndim == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    out = np.empty_like(tt)
    zero = tt == 0
    if np.any(zero):
        out[zero] = f_prime_at_zero(profile)
    pos = ~zero
    if np.any(pos):
        tp = tt[pos]
        out[pos] = -eval_F_prime(profile, tp) + eval_f(profile, tp) / (3.0 * tp)
    out = out.reshape(np.atleast_1d(t).shape)
    return float(out.ravel()[0]) if scalar else out


def g_aux(profile: ConformalProfile, t):
    """Cube-root auxiliary g(t) = cbrt(1 + R) + cbrt(1 - R), R = sqrt(1 + zeta/t)."""
    t = _check_nonneg(t)
    R = np.sqrt(1.0 + profile.zeta / t)
    return np.cbrt(1.0 + R) + np.cbrt(1.0 - R)


def g_aux_prime(profile: ConformalProfile, t):
    """Derivative of g_aux; real cube roots handled through h'/(3 cbrt(h)^2)."""
    t = _check_nonneg(t)
    R = np.sqrt(1.0 + profile.zeta / t)
    dR = -profile.zeta / (2.0 * R * t**2)
    return dR / (3.0 * np.cbrt(1.0 + R) ** 2) - dR / (3.0 * np.cbrt(1.0 - R) ** 2)


def positivity_combination(profile: ConformalProfile, t):
    """1 - f(t) + 3t f'(t); strictly positive, equals 3t g'(t)/g(t) for t > 0."""
    t = _check_nonneg(t)
    return 1.0 - eval_f(profile, t) + 3.0 * t * eval_f_prime(profile, t)
