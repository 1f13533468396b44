"""Spatial light modulator models and state quantization.

Every scheme exposes a finite complex state set through :func:`states`.
Quantization snaps each value to the nearest allowed state in Euclidean
distance on the complex plane, breaking exact ties toward the lowest
state index; phase-only devices project the modulus to 1 first, which for
nonzero values coincides with the nearest-state rule. Outputs are drawn
from the constructed state array, so membership is bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhaseOnly:
    """Unit-modulus states exp(i (offset + 2 pi k / levels)), k in [0, levels)."""

    levels: int
    phase_offset: float = 0.0

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("phase-only scheme needs at least 2 levels")


def binary_phase() -> PhaseOnly:
    """Two states at phases 0 and pi."""
    return PhaseOnly(2, 0.0)


@dataclass(frozen=True)
class AmplitudeOnly:
    """Real states k / (levels - 1), k in [0, levels)."""

    levels: int

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("amplitude-only scheme needs at least 2 levels")


@dataclass(frozen=True)
class MultiAmp:
    """Arbitrary finite complex state set; order fixes tie-breaking."""

    state_values: tuple

    def __post_init__(self):
        if len(self.state_values) < 2:
            raise ValueError("multi-amp scheme needs at least 2 states")
        if not np.all(np.isfinite(np.asarray(self.state_values, dtype=np.complex128))):
            raise ValueError("multi-amp states must be finite")


Scheme = PhaseOnly | AmplitudeOnly | MultiAmp


@dataclass(frozen=True)
class SlmSpec:
    """Device resolution plus modulation scheme."""

    width: int
    height: int
    scheme: Scheme


def states(scheme) -> np.ndarray:
    """The scheme's allowed states as a complex128 vector, index order fixed."""
    scheme = _scheme_of(scheme)
    if isinstance(scheme, PhaseOnly):
        k = np.arange(scheme.levels)
        return np.exp(1j * (scheme.phase_offset + 2.0 * np.pi * k / scheme.levels))
    if isinstance(scheme, AmplitudeOnly):
        return (np.arange(scheme.levels) / (scheme.levels - 1)).astype(np.complex128)
    return np.asarray(scheme.state_values, dtype=np.complex128)


def _scheme_of(slm):
    return slm.scheme if isinstance(slm, SlmSpec) else slm


def quantize_indices(values, scheme) -> np.ndarray:
    """Index of the nearest allowed state for every value."""
    scheme = _scheme_of(scheme)
    values = np.asarray(values, dtype=np.complex128)
    if isinstance(scheme, PhaseOnly):
        levels = scheme.levels
        step = 2.0 * np.pi / levels
        # Fractional level index in [0, levels); arg 0 := 0 for zero pixels.
        frac_index = np.mod((np.angle(values) - scheme.phase_offset) / step, levels)
        lower = np.floor(frac_index)
        remainder = frac_index - lower
        lower = lower.astype(np.int64)
        upper = (lower + 1) % levels
        nearest = np.where(remainder < 0.5, lower, upper)
        # Exact half-way: equidistant neighbours, keep the lower index
        # (wraps to state 0 at the top of the circle).
        nearest = np.where(remainder == 0.5, np.minimum(lower, upper), nearest)
        return np.mod(nearest, levels).astype(np.int32)
    allowed = states(scheme)
    flat = values.reshape(-1, 1)
    distance = np.abs(flat - allowed[None, :])
    # argmin returns the first minimum: exact ties go to the lowest index.
    return np.argmin(distance, axis=1).astype(np.int32).reshape(values.shape)


def quantize(values, scheme):
    """Snap a field (or a single value) to the scheme's allowed states."""
    scalar = np.isscalar(values) or np.asarray(values).ndim == 0
    indices = quantize_indices(values, scheme)
    snapped = states(scheme)[indices]
    return complex(snapped) if scalar else snapped
