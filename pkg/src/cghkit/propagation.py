"""Unitary propagation, normalization, randomization and error metrics.

Conventions, fixed package-wide:

* Transforms are unitary. The forward transform of an ``H x W`` field is
  ``R(u, v) = (H W)^(-1/2) sum_{m,n} h(m, n) exp(-2 pi i (u m / H + v n / W))``
  and the inverse is its conjugate with the same scale, so Parseval holds
  literally and ``inverse(forward(h)) == h`` to rounding.
* Externally visible spectra are centered: ``fft2`` shifts DC to
  ``(floor(H/2), floor(W/2))`` and the inverse undoes the shift first.
  Algorithm inner loops keep uncentered spectra and shift only at the
  boundaries; sums over a mask are unaffected by the permutation.
* Fresnel propagation is the single-transform near-field form: the field
  is premultiplied by a unit-modulus quadratic phase and then transformed.
  The constant external quadratic factor is dropped; every consumer of the
  replay is intensity-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyMaskError,
    InvalidSpecError,
    NonFiniteError,
    ZeroFieldError,
    ZeroTargetError,
)

FOURIER = "fourier"
FRESNEL = "fresnel"


@dataclass(frozen=True)
class PropagationSpec:
    """Propagation model; physical fields are ignored for ``fourier``."""

    kind: str = FOURIER
    wavelength: float = 5.32e-7
    distance: float = 0.1
    pitch_x: float = 8e-6
    pitch_y: float = 8e-6

    def validate(self):
        if self.kind not in (FOURIER, FRESNEL):
            raise InvalidSpecError(f"unknown propagation kind {self.kind!r}")
        if self.kind == FRESNEL:
            if self.wavelength <= 0 or self.pitch_x <= 0 or self.pitch_y <= 0:
                raise InvalidSpecError("fresnel needs positive wavelength and pitches")
            if self.distance == 0:
                raise InvalidSpecError("fresnel distance must be nonzero")


@dataclass
class MetricSpec:
    """Mask and rescale flag consumed by the error metric."""

    mask: np.ndarray
    rescale: bool = False


def _require_finite(field):
    if not np.all(np.isfinite(field)):
        raise NonFiniteError("field contains NaN or Inf")


def fftshift(field):
    """Quadrant swap moving index 0 to the center; self-inverse on even dims."""
    return np.fft.fftshift(field)


def ifftshift(field):
    """Inverse of :func:`fftshift`, also for odd dimensions."""
    return np.fft.ifftshift(field)


def fft2(field, direction="forward"):
    """Centered unitary 2D transform of a complex field.

    ``forward`` returns the centered spectrum; ``inverse`` expects a
    centered spectrum and returns the uncentered field, undoing both the
    scaling and the shift so the pair composes to the identity.
    """
    field = np.asarray(field, dtype=np.complex128)
    _require_finite(field)
    if direction == "forward":
        return np.fft.fftshift(np.fft.fft2(field, norm="ortho"))
    if direction == "inverse":
        return np.fft.ifft2(np.fft.ifftshift(field), norm="ortho")
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def fresnel_prefactor(shape, spec: PropagationSpec):
    """Unit-modulus quadratic phase multiplied in before the transform."""
    height, width = shape
    m = np.arange(height) - height / 2.0
    n = np.arange(width) - width / 2.0
    quad = (
        np.pi
        * ((m * m * spec.pitch_y**2)[:, None] + (n * n * spec.pitch_x**2)[None, :])
        / (spec.wavelength * spec.distance)
    )
    return np.exp(1j * quad)


def propagate(field, spec: PropagationSpec):
    """Hologram plane -> replay plane (centered spectrum)."""
    spec.validate()
    if spec.kind == FOURIER:
        return fft2(field, "forward")
    return fft2(np.asarray(field, dtype=np.complex128) * fresnel_prefactor(field.shape, spec), "forward")


def propagate_inverse(replay, spec: PropagationSpec):
    """Replay plane (centered) -> hologram plane; exact inverse of :func:`propagate`."""
    spec.validate()
    if spec.kind == FOURIER:
        return fft2(replay, "inverse")
    return np.conj(fresnel_prefactor(replay.shape, spec)) * fft2(replay, "inverse")


def normalize_energy(field, target_energy: float) -> None:
    """Scale ``field`` in place so that ``sum(|z|^2) == target_energy``."""
    if target_energy < 0:
        raise ValueError("target energy must be >= 0")
    energy = float(np.sum(field.real**2 + field.imag**2))
    if energy == 0.0:
        raise ZeroFieldError("cannot normalize a zero field")
    field *= np.sqrt(target_energy / energy)


PHASE = "phase"
AMPLITUDE = "amplitude"
BOTH = "both"


def randomize(field, mode: str, rng: np.random.Generator) -> None:
    """Randomize phase, amplitude or both, in place.

    Phase draws are uniform on [0, 2 pi), amplitude draws uniform on
    [0, 1]. Draws fill the grid row-major; ``both`` draws the amplitude
    block first, then the phase block. Results are a pure function of the
    generator state.
    """
    shape = field.shape
    if mode == PHASE:
        theta = 2.0 * np.pi * rng.random(shape)
        field[:] = np.abs(field) * np.exp(1j * theta)
    elif mode == AMPLITUDE:
        amp = rng.random(shape)
        field[:] = amp * np.exp(1j * np.angle(field))
    elif mode == BOTH:
        amp = rng.random(shape)
        theta = 2.0 * np.pi * rng.random(shape)
        field[:] = amp * np.exp(1j * theta)
    else:
        raise ValueError(f"unknown randomize mode {mode!r}")


def mse_error(replay, target, spec: MetricSpec) -> float:
    """Masked amplitude mean-square error, optionally scale-invariant.

    With ``s = sum(|R||T|) / sum(|R|^2)`` over the mask when rescaling
    (else ``s = 1``), returns ``sum((s |R| - |T|)^2) / sum(|T|^2)``, both
    sums over the mask. When the masked replay has zero energy the scale
    is left at 1.
    """
    replay = np.asarray(replay)
    target = np.asarray(target)
    mask = spec.mask
    if replay.shape != target.shape or mask.shape != target.shape:
        raise DimensionMismatchError(
            f"replay {replay.shape}, target {target.shape}, mask {mask.shape}"
        )
    if not mask.any():
        raise EmptyMaskError("metric mask has no true pixels")
    r = np.abs(replay[mask])
    t = np.abs(target[mask])
    denom = float(np.sum(t * t))
    if denom == 0.0:
        raise ZeroTargetError("target is zero inside the mask")
    if spec.rescale:
        rr = float(np.sum(r * r))
        s = float(np.sum(r * t)) / rr if rr > 0.0 else 1.0
    else:
        s = 1.0
    diff = s * r - t
    return float(np.sum(diff * diff) / denom)


def efficiency(replay, mask) -> float:
    """Fraction of replay energy inside the mask, in [0, 1]."""
    replay = np.asarray(replay)
    intensity = replay.real**2 + replay.imag**2
    total = float(np.sum(intensity))
    if total == 0.0:
        raise ZeroFieldError("replay field is zero")
    return float(np.sum(intensity[mask]) / total)


def delta_replay_update(replay, m: int, n: int, delta: complex) -> None:
    """Apply a single hologram-pixel change to an uncentered replay, in place.

    ``replay`` must be the unshifted unitary forward transform of the
    hologram; after the call it equals the transform of the hologram with
    pixel ``(m, n)`` changed by ``delta``, up to rounding. Rank-1 update:
    one column of the DFT matrix scaled by ``delta``.
    """
    height, width = replay.shape
    if not (0 <= m < height and 0 <= n < width):
        raise IndexError(f"pixel ({m}, {n}) outside {height}x{width}")
    row = np.exp(-2j * np.pi * m / height * np.arange(height))
    col = np.exp(-2j * np.pi * n / width * np.arange(width))
    replay += (delta / np.sqrt(height * width)) * np.outer(row, col)
