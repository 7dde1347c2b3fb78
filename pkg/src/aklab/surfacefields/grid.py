"""Periodic grid on the unit-area flat torus with spectral calculus.

Fields live on an n x n grid over [0,1)^2 with axis 0 = x, axis 1 = y and
the constant area form rho = dx ^ dy (total area 1, so grid quadrature is the
plain mean).  Derivatives are spectral by default; a 4th-order centered
stencil backend exists as an independent route for oracle comparisons.
"""

from __future__ import annotations

import numpy as np

__all__ = ["GridError", "TorusGrid"]


class GridError(ValueError):
    """Invalid grid construction or non-grid-shaped field."""


class TorusGrid:
    """n x n periodic grid, period 1 per axis, area form dx ^ dy."""

    def __init__(self, n: int, backend: str = "spectral"):
        if n < 16 or n % 2:
            raise GridError(f"grid resolution must be even and >= 16, got {n}")
        if backend not in ("spectral", "fd4", "fd6"):
            raise GridError(f"unknown derivative backend {backend!r}")
        self.n = n
        self.backend = backend
        coords = np.arange(n) / n
        self.x, self.y = np.meshgrid(coords, coords, indexing="ij")
        k = np.fft.fftfreq(n, d=1.0 / n)
        k[n // 2] = 0.0  # drop the Nyquist mode in first derivatives
        self._ik = 2j * np.pi * k
        kfull = np.fft.fftfreq(n, d=1.0 / n)
        self._k2 = (2 * np.pi) ** 2 * (
            kfull[:, None] ** 2 + kfull[None, :] ** 2
        )

    # -- derivatives --------------------------------------------------------

    def deriv(self, field, axis: int):
        """d(field)/dx_axis, acting on the leading two (grid) axes."""
        field = np.asarray(field, dtype=float)
        if field.shape[:2] != (self.n, self.n):
            raise GridError("field is not grid-shaped")
        if self.backend == "spectral":
            shape = [1, 1] + [1] * (field.ndim - 2)
            shape[axis] = self.n
            fhat = np.fft.fft(field, axis=axis)
            return np.real(np.fft.ifft(self._ik.reshape(shape) * fhat, axis=axis))
        h = 1.0 / self.n
        r = lambda s: np.roll(field, -s, axis=axis)
        return (-r(2) + 8 * r(1) - 8 * r(-1) + r(-2)) / (12 * h)

    def dx(self, field):
        return self.deriv(field, 0)

    def dy(self, field):
        return self.deriv(field, 1)

    def laplacian_flat(self, f):
        if self.backend == "spectral":
            return np.real(np.fft.ifft2(-self._k2 * np.fft.fft2(f)))
        return self.dx(self.dx(f)) + self.dy(self.dy(f))

    def solve_poisson_flat(self, rhs):
        """Zero-mean u with flat Laplacian(u) = rhs (rhs mean removed)."""
        rhat = np.fft.fft2(rhs)
        with np.errstate(divide="ignore", invalid="ignore"):
            uhat = np.where(self._k2 > 0, -rhat / self._k2, 0.0)
        return np.real(np.fft.ifft2(uhat))

    # -- integration and forms ----------------------------------------------

    def integrate(self, field):
        """Quadrature against rho: the uniform Riemann sum on unit area."""
        return float(np.mean(field))

    def d_oneform(self, alpha):
        """Scalar density of d(alpha) w.r.t. rho for a 1-form field (n,n,2)."""
        return self.dx(alpha[..., 1]) - self.dy(alpha[..., 0])

    def wedge_integral(self, alpha, beta):
        """Integral of alpha ^ beta over the torus for two 1-form fields."""
        return self.integrate(
            alpha[..., 0] * beta[..., 1] - alpha[..., 1] * beta[..., 0]
        )

    def hodge_decompose(self, alpha):
        """Split a 1-form into (exact, coexact, harmonic) parts spectrally.

        Uses the flat metric: exact = d phi, coexact = flat d* of a 2-form,
        harmonic = the constant coefficient.  Exactness of a closed form is
        metric independent, which is all the membership tests rely on.
        """
        a0 = np.fft.fft2(alpha[..., 0])
        a1 = np.fft.fft2(alpha[..., 1])
        n = self.n
        k = np.fft.fftfreq(n, d=1.0 / n)
        kx, ky = k[:, None] * np.ones((1, n)), np.ones((n, 1)) * k[None, :]
        k2 = kx**2 + ky**2
        with np.errstate(divide="ignore", invalid="ignore"):
            dot = np.where(k2 > 0, (kx * a0 + ky * a1) / k2, 0.0)
            cross = np.where(k2 > 0, (-ky * a0 + kx * a1) / k2, 0.0)
        exact = np.stack(
            [np.real(np.fft.ifft2(dot * kx)), np.real(np.fft.ifft2(dot * ky))],
            axis=-1,
        )
        coexact = np.stack(
            [
                np.real(np.fft.ifft2(-cross * ky)),
                np.real(np.fft.ifft2(cross * kx)),
            ],
            axis=-1,
        )
        harmonic = np.zeros_like(alpha)
        harmonic[..., 0] = np.real(a0[0, 0]) / n**2
        harmonic[..., 1] = np.real(a1[0, 0]) / n**2
        return exact, coexact, harmonic

    def spectral_tail(self, field):
        """Largest normalized Fourier amplitude in the top-third band."""
        fhat = np.fft.fft2(np.asarray(field, dtype=float), axes=(0, 1))
        scale = max(np.max(np.abs(fhat)) / self.n**2, 1e-300)
        k = np.abs(np.fft.fftfreq(self.n, d=1.0 / self.n))
        band = (k[:, None] > self.n / 3) | (k[None, :] > self.n / 3)
        return float(np.max(np.abs(fhat[band])) / self.n**2 / scale)

    def interior_mask(self, margin: int = 4, axis: int = 1):
        """Boolean mask dropping `margin` cells at the patch seam on `axis`.

        Patch scenarios glue a holomorphic window along one axis; identities
        are asserted away from the smoothing collar.
        """
        idx = np.arange(self.n)
        keep = (idx >= margin) & (idx < self.n - margin)
        mask = np.zeros((self.n, self.n), dtype=bool)
        if axis == 1:
            mask[:, keep] = True
        else:
            mask[keep, :] = True
        return mask
