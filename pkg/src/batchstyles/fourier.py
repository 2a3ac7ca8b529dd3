"""2-D discrete Fourier analysis over the last two axes of a batch.

Transforms are unnormalized forward / ``1/(H*W)`` inverse, matching numpy and
torch defaults. Every spectrum carries a ``shifted`` flag recording whether
the zero-frequency bin sits at ``(H//2, W//2)``.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Spectrum:
    """Complex spectrum of shape ``(..., H, W)`` plus its layout flag."""

    values: np.ndarray
    shifted: bool = False

    @property
    def re(self):
        return self.values.real

    @property
    def im(self):
        return self.values.imag

    @property
    def shape(self):
        return self.values.shape


def dft2(X):
    """Unshifted 2-D DFT of every ``(H, W)`` plane in ``X``."""
    X = np.asarray(X, dtype=np.float64)
    return Spectrum(np.fft.fft2(X, axes=(-2, -1)), shifted=False)


def idft2(spec, clamp=True):
    """Real part of the inverse DFT, clamped to [0, 1] unless ``clamp=False``."""
    if spec.shifted:
        raise ValueError("idft2 requires an unshifted spectrum; call ifftshift first")
    X = np.fft.ifft2(spec.values, axes=(-2, -1)).real
    if clamp:
        X = np.clip(X, 0.0, 1.0)
    return X


def fftshift(spec):
    if spec.shifted:
        raise ValueError("spectrum is already shifted")
    return Spectrum(np.fft.fftshift(spec.values, axes=(-2, -1)), shifted=True)


def ifftshift(spec):
    if not spec.shifted:
        raise ValueError("spectrum is not shifted")
    return Spectrum(np.fft.ifftshift(spec.values, axes=(-2, -1)), shifted=False)


def amp_phase(spec):
    """Return ``(amplitude, phase)`` with phase in (-pi, pi]."""
    values = spec.values if isinstance(spec, Spectrum) else np.asarray(spec)
    amplitude = np.abs(values)
    phase = np.arctan2(values.imag, values.real)
    # atan2 yields -pi for (-0.0, negative); fold onto the half-open range
    phase[phase == -np.pi] = np.pi
    return amplitude, phase


def reconstruct(amplitude, phase, shifted=False):
    """Polar -> rectangular: ``amplitude * exp(i * phase)``."""
    amplitude = np.asarray(amplitude, dtype=np.float64)
    phase = np.asarray(phase, dtype=np.float64)
    if amplitude.shape != phase.shape:
        raise ValueError(f"shape mismatch: {amplitude.shape} vs {phase.shape}")
    if np.any(amplitude < 0):
        raise ValueError("amplitude must be nonnegative")
    values = amplitude * np.cos(phase) + 1j * (amplitude * np.sin(phase))
    return Spectrum(values, shifted=shifted)


def centered_amplitude_phase(X):
    """Amplitude and phase of ``X`` with low frequencies moved to the center."""
    return amp_phase(fftshift(dft2(X)))


def from_centered(amplitude, phase, clamp=True):
    """Inverse of :func:`centered_amplitude_phase` (up to clamping)."""
    return idft2(ifftshift(reconstruct(amplitude, phase, shifted=True)), clamp=clamp)
