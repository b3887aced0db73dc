"""Uniform periodic grid on the unit torus.

Grid functions are plain ``numpy`` arrays of length ``N``.  Nodal arrays hold
samples at ``x_i = i*h``; face arrays hold values at ``x_{i+1/2} = (i+1/2)*h``,
so index ``i`` of a face array lives between nodes ``i`` and ``i+1``.

All difference operators are periodic (index arithmetic modulo ``N``) and
written in divergence form, so ``integrate(div_face(g))`` telescopes to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NonFiniteError(ValueError):
    """A grid function contains NaN or Inf."""


def shift_next(f: np.ndarray) -> np.ndarray:
    """``f_{i+1}`` with periodic wrap (faster than ``np.roll`` for 1-D arrays)."""
    out = np.empty_like(f)
    out[:-1] = f[1:]
    out[-1] = f[0]
    return out


def shift_prev(f: np.ndarray) -> np.ndarray:
    """``f_{i-1}`` with periodic wrap."""
    out = np.empty_like(f)
    out[1:] = f[:-1]
    out[0] = f[-1]
    return out


def check_finite(values: np.ndarray, what: str = "field") -> np.ndarray:
    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        raise NonFiniteError(f"{what} has {bad} non-finite entries")
    return values


@dataclass(frozen=True)
class SpectralCoeffs:
    """Fourier coefficients ``c_k = h * sum_i f_i exp(-2 pi i k x_i)``.

    ``k`` runs over ``-(N//2) .. ceil(N/2)-1`` in increasing order.
    """

    k: np.ndarray
    c: np.ndarray

    def coeff(self, k: int) -> complex:
        idx = int(k - self.k[0])
        if not 0 <= idx < self.k.size:
            raise IndexError(f"mode {k} not resolved on this grid")
        return complex(self.c[idx])


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid with ``N`` nodes on [0, 1) with periodic wrap."""

    N: int
    h: float = field(init=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 8:
            raise ValueError(f"grid needs an integer N >= 8, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "h", 1.0 / self.N)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N) * self.h

    @property
    def faces(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.h

    def sample(self, func, *, on_faces: bool = False) -> np.ndarray:
        x = self.faces if on_faces else self.nodes
        return check_finite(np.asarray(func(x), dtype=float) * np.ones(self.N))

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.N,):
            raise ValueError(f"expected a grid function of length {self.N}, got shape {f.shape}")
        return check_finite(f)

    # -- quadrature and differences ---------------------------------------

    def integrate(self, f) -> float:
        """Rectangle rule ``h * sum f_i``; exact for trig polynomials of degree < N."""
        return float(self.h * np.sum(self._check(f)))

    def diff_face(self, f) -> np.ndarray:
        """Forward difference ``(f_{i+1} - f_i)/h`` at face ``i+1/2``."""
        return self.dplus(self._check(f))

    def div_face(self, g) -> np.ndarray:
        """Nodal divergence ``(g_{i+1/2} - g_{i-1/2})/h`` of a face field."""
        return self.dminus(self._check(g))

    def to_faces(self, f) -> np.ndarray:
        """Arithmetic mean of the two nodes adjacent to each face."""
        return self.avg(self._check(f))

    def deriv1(self, f) -> np.ndarray:
        f = self._check(f)
        return (shift_next(f) - shift_prev(f)) / (2.0 * self.h)

    def deriv2(self, f) -> np.ndarray:
        return self.dminus(self.dplus(self._check(f)))

    def deriv3(self, f) -> np.ndarray:
        """Centered nodal third derivative, ``deriv1(deriv2(f))`` (5-point stencil)."""
        return self.deriv1(self.deriv2(f))

    def third_face(self, f) -> np.ndarray:
        """Face third difference ``diff_face(div_face(diff_face(f)))``."""
        return self.dplus(self.dminus(self.dplus(self._check(f))))

    # unchecked kernels for inner loops; callers validate once per step
    def dplus(self, f: np.ndarray) -> np.ndarray:
        return (shift_next(f) - f) * self.N

    def dminus(self, g: np.ndarray) -> np.ndarray:
        return (g - shift_prev(g)) * self.N

    def avg(self, f: np.ndarray) -> np.ndarray:
        return 0.5 * (f + shift_next(f))

    # -- discrete symbols of the stencils, for wavenumber k -------------------

    def symbol_deriv1(self, k) -> np.ndarray:
        return 1j * np.sin(2 * np.pi * np.asarray(k) * self.h) / self.h

    def symbol_deriv2(self, k) -> np.ndarray:
        return -((2.0 / self.h) * np.sin(np.pi * np.asarray(k) * self.h)) ** 2

    def symbol_deriv3(self, k) -> np.ndarray:
        return self.symbol_deriv1(k) * self.symbol_deriv2(k)

    def symbol_biharmonic(self, k) -> np.ndarray:
        """Eigenvalue of ``div_face(third_face(.))`` on mode k (non-negative)."""
        return self.symbol_deriv2(k) ** 2

    # -- Fourier analysis -------------------------------------------------

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-(self.N // 2), -(self.N // 2) + self.N)

    def dft(self, f) -> SpectralCoeffs:
        f = self._check(f)
        c = np.fft.fftshift(np.fft.fft(f)) * self.h
        return SpectralCoeffs(self.wavenumbers, c)

    def idft(self, coeffs: SpectralCoeffs, *, rtol: float = 1e-12) -> np.ndarray:
        """Inverse transform to a real field; rejects non-Hermitian input."""
        c = np.asarray(coeffs.c, dtype=complex)
        if c.shape != (self.N,):
            raise ValueError("coefficient vector does not match the grid")
        k = self.wavenumbers
        scale = max(float(np.max(np.abs(c))), 1e-300)
        paired = np.abs(k) < self.N / 2  # the even-N Nyquist mode has no partner
        mirror = c[::-1] if self.N % 2 else np.concatenate(([c[0]], c[:0:-1]))
        defect = np.abs(c - np.conj(mirror))[paired]
        if self.N % 2 == 0:
            defect = np.append(defect, abs(c[0].imag))
        if defect.size and np.max(defect) > rtol * scale:
            raise ValueError("coefficients are not Hermitian; no real field corresponds")
        values = np.fft.ifft(np.fft.ifftshift(c)) / self.h
        return check_finite(values.real.copy())

    def hk_norm(self, f, kappa: float) -> float:
        """Truncated Bessel-potential norm ``sqrt(sum |c_k|^2 (1+(2 pi k)^2)^kappa)``.

        Only the N modes resolved by the grid enter the sum.
        """
        spec = self.dft(f)
        weights = (1.0 + (2 * np.pi * spec.k) ** 2) ** kappa
        return float(np.sqrt(np.sum(np.abs(spec.c) ** 2 * weights)))

    def hk_embedding(self, fields, kappa: float) -> np.ndarray:
        """Real vectors whose Euclidean distances equal ``hk_norm`` distances.

        ``fields`` has shape (M, N); the result has shape (M, 2N).
        """
        fields = np.atleast_2d(np.asarray(fields, dtype=float))
        c = np.fft.fftshift(np.fft.fft(fields, axis=-1), axes=-1) * self.h
        w = np.sqrt((1.0 + (2 * np.pi * self.wavenumbers) ** 2) ** kappa)
        c = c * w
        return np.concatenate([c.real, c.imag], axis=-1)
