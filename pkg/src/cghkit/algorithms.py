"""The four hologram generators plus initialization.

All runners are deterministic functions of (config including seed,
target, illumination). Randomness comes from PCG64 generators seeded
from the run seed; the subframe/pass runners split independent child
streams off the root ``SeedSequence`` so frame and pass draws cannot
alias. Reported errors honor the configured metric; the annealing and
binary-search inner loops optimize the unscaled masked error so that a
proposal costs one O(|mask|) incremental update.

The returned hologram always satisfies the device constraint: every
pixel is bitwise a member of the scheme's state set.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, ZeroTargetError
from .propagation import (
    FRESNEL,
    MetricSpec,
    PropagationSpec,
    efficiency,
    fresnel_prefactor,
    mse_error,
    propagate,
    propagate_inverse,
)
from .slm import SlmSpec, quantize, quantize_indices, states

GS = "gs"
SA = "sa"
DBS = "dbs"
OSPR = "ospr"

RANDOM_PHASE = "random-phase"
BACKPROPAGATE = "backpropagate"

RASTER = "raster"
RANDOM = "random"

COMPLETED = "completed"
CONVERGED = "converged"
CANCELLED = "cancelled"

# Number of discarded proposals used to calibrate the start temperature
# when it is left on auto.
_WARMUP_PROPOSALS = 100


@dataclass
class AlgorithmConfig:
    """Everything a runner needs; only the selected algorithm's fields are read."""

    algorithm: str
    slm: SlmSpec
    propagation: PropagationSpec
    metric: MetricSpec
    seed: int = 1
    init_mode: str = RANDOM_PHASE
    # gs
    iterations: int = 100
    feedback_gain: float = 0.0
    quantize_each_iteration: bool = False
    # sa
    proposals: int = 20000
    initial_temperature: float | None = None  # None calibrates from warm-up
    cooling_factor: float = 0.99995
    # dbs
    max_passes: int = 10
    scan_order: str = RASTER
    # ospr
    subframes: int = 8
    # flattened parameter snapshot carried into output metadata
    params: list = field(default_factory=list)


@dataclass
class RunReport:
    """Per-run trace and final metrics; final_error equals the last trace value."""

    error_trace: list
    final_error: float
    efficiency: float
    iterations_executed: int
    runtime_ms: float
    seed_used: int
    termination: str


def _expected_shape(cfg):
    return (cfg.slm.height, cfg.slm.width)


def _check_inputs(cfg, target, illumination):
    shape = _expected_shape(cfg)
    if target.shape != shape:
        raise DimensionMismatchError(f"target {target.shape} does not match SLM {shape}")
    if illumination is not None and illumination.shape != shape:
        raise DimensionMismatchError(
            f"illumination {illumination.shape} does not match SLM {shape}"
        )


def _illumination_amplitude(target, illumination):
    if illumination is None:
        return np.ones(target.shape, dtype=np.float64)
    return np.abs(illumination)


def initial_hologram(target, illumination, mode, rng, propagation=PropagationSpec()):
    """Starting hologram on the modulator plane.

    ``random-phase`` pairs the illumination amplitude with uniform random
    phase; ``backpropagate`` inverse-propagates the target and keeps its
    phase under the illumination amplitude. Illumination defaults to
    all-ones.
    """
    target = np.asarray(target, dtype=np.complex128)
    if illumination is not None and illumination.shape != target.shape:
        raise DimensionMismatchError(
            f"illumination {illumination.shape} does not match target {target.shape}"
        )
    amp = _illumination_amplitude(target, illumination)
    if mode == RANDOM_PHASE:
        theta = 2.0 * np.pi * rng.random(target.shape)
        return amp * np.exp(1j * theta)
    if mode == BACKPROPAGATE:
        back = propagate_inverse(target, propagation)
        return amp * np.exp(1j * np.angle(back))
    raise ValueError(f"unknown init mode {mode!r}")


def _elapsed_ms(start):
    return (time.perf_counter() - start) * 1000.0


# --- Gerchberg-Saxton / iterative transform ---------------------------------


def run_gs(cfg, target, illumination=None, progress=None, cancel=None):
    """Alternating-projection phase retrieval with optional replay feedback.

    Per iteration: propagate, record the masked error, replace the masked
    replay amplitude by ``|T| + gain (|T| - |R|)`` clamped at zero while
    keeping the phase (outside the mask the replay is free), propagate
    back and reimpose the illumination amplitude, optionally quantizing.
    Gain 0 is classic error reduction. The hologram is always quantized
    after the loop and the trace ends with the quantized-state error.
    """
    start = time.perf_counter()
    target = np.asarray(target, dtype=np.complex128)
    _check_inputs(cfg, target, illumination)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    holo = initial_hologram(target, illumination, cfg.init_mode, rng, cfg.propagation)
    illum_amp = _illumination_amplitude(target, illumination)
    target_amp = np.abs(target)
    mask = cfg.metric.mask

    trace = []
    executed = 0
    cancelled = False
    for k in range(cfg.iterations):
        if cancel is not None and cancel.is_set():
            cancelled = True
            break
        replay = propagate(holo, cfg.propagation)
        err = mse_error(replay, target, cfg.metric)
        trace.append((k, err))
        if progress is not None:
            progress(k, err)
        desired = target_amp + cfg.feedback_gain * (target_amp - np.abs(replay))
        np.clip(desired, 0.0, None, out=desired)
        constrained = np.where(mask, desired * np.exp(1j * np.angle(replay)), replay)
        holo = propagate_inverse(constrained, cfg.propagation)
        holo = illum_amp * np.exp(1j * np.angle(holo))
        if cfg.quantize_each_iteration:
            holo = quantize(holo, cfg.slm)
        executed = k + 1

    holo = quantize(holo, cfg.slm)
    replay = propagate(holo, cfg.propagation)
    final_err = mse_error(replay, target, cfg.metric)
    trace.append((executed, final_err))
    if progress is not None:
        progress(executed, final_err)
    report = RunReport(
        error_trace=trace,
        final_error=final_err,
        efficiency=efficiency(replay, mask),
        iterations_executed=executed,
        runtime_ms=_elapsed_ms(start),
        seed_used=cfg.seed,
        termination=CANCELLED if cancelled else COMPLETED,
    )
    return holo, report


# --- incremental search state (SA and DBS) ----------------------------------


class _IncrementalState:
    """Quantized pixel grid plus a masked, uncentered replay kept in sync.

    The replay samples live only at mask positions; a pixel change costs
    one O(|mask|) kernel call. The running error numerator accumulates the
    exact kernel deltas, so the trace it produces is monotone whenever
    only improving changes are committed.
    """

    def __init__(self, cfg, target, hologram0):
        self.height, self.width = target.shape
        self.size = self.height * self.width
        self.state_values = states(cfg.slm.scheme)
        self.n_states = len(self.state_values)
        self.indices = quantize_indices(hologram0, cfg.slm.scheme)

        if cfg.propagation.kind == FRESNEL:
            self.prefactor = fresnel_prefactor(target.shape, cfg.propagation)
        else:
            self.prefactor = None
        pixel_field = self.state_values[self.indices]
        if self.prefactor is not None:
            pixel_field = pixel_field * self.prefactor
        replay = np.fft.fft2(pixel_field, norm="ortho")  # uncentered inner convention

        mask_u = np.fft.ifftshift(cfg.metric.mask)
        mu, mv = np.nonzero(mask_u)
        self.mu = np.ascontiguousarray(mu, dtype=np.int32)
        self.mv = np.ascontiguousarray(mv, dtype=np.int32)
        target_u = np.fft.ifftshift(np.abs(target))
        self.target_m = np.ascontiguousarray(target_u[mu, mv], dtype=np.float64)
        self.replay_m = np.ascontiguousarray(replay[mu, mv], dtype=np.complex128)

        self.denom = float(np.sum(self.target_m * self.target_m))
        if self.denom == 0.0:
            raise ZeroTargetError("target is zero inside the mask")
        d = np.abs(self.replay_m) - self.target_m
        self.error_num = float(np.sum(d * d))

        h_idx = np.arange(self.height)
        w_idx = np.arange(self.width)
        self.row_table = np.exp(-2j * np.pi * np.outer(h_idx, h_idx) / self.height)
        self.col_table = np.exp(-2j * np.pi * np.outer(w_idx, w_idx) / self.width)
        self.col_table /= math.sqrt(self.size)  # fold in the unitary scale

    def _delta_value(self, m, n, j):
        delta = self.state_values[j] - self.state_values[self.indices[m, n]]
        if self.prefactor is not None:
            delta = delta * self.prefactor[m, n]
        return delta

    def delta_error(self, m, n, j):
        return kernels.delta_error(
            self.replay_m,
            self.target_m,
            self.row_table[m],
            self.col_table[n],
            self.mu,
            self.mv,
            self._delta_value(m, n, j),
        )

    def best_delta(self, m, n):
        deltas = self.state_values - self.state_values[self.indices[m, n]]
        if self.prefactor is not None:
            deltas = deltas * self.prefactor[m, n]
        return kernels.best_delta(
            self.replay_m,
            self.target_m,
            self.row_table[m],
            self.col_table[n],
            self.mu,
            self.mv,
            np.ascontiguousarray(deltas),
        )

    def commit(self, m, n, j, error_change):
        kernels.commit_update(
            self.replay_m,
            self.row_table[m],
            self.col_table[n],
            self.mu,
            self.mv,
            self._delta_value(m, n, j),
        )
        self.indices[m, n] = j
        self.error_num += error_change

    def reported_error(self, rescale):
        if not rescale:
            return self.error_num / self.denom
        r = np.abs(self.replay_m)
        rr = float(np.sum(r * r))
        s = float(np.sum(r * self.target_m)) / rr if rr > 0.0 else 1.0
        d = s * r - self.target_m
        return float(np.sum(d * d) / self.denom)

    def hologram(self):
        return self.state_values[self.indices]


def _final_report(cfg, state, trace, executed, start, termination, progress):
    final_err = state.reported_error(cfg.metric.rescale)
    # Append only when the value moved since the last checkpoint, so traces
    # of accept-only-improving runs stay strictly decreasing.
    if not trace or trace[-1][1] != final_err:
        trace.append((executed, final_err))
        if progress is not None:
            progress(executed, final_err)
    holo = state.hologram()
    replay = propagate(holo, cfg.propagation)
    report = RunReport(
        error_trace=trace,
        final_error=final_err,
        efficiency=efficiency(replay, cfg.metric.mask),
        iterations_executed=executed,
        runtime_ms=_elapsed_ms(start),
        seed_used=cfg.seed,
        termination=termination,
    )
    return holo, report


# --- simulated annealing ------------------------------------------------------


def _draw_proposal(rng, state):
    p = int(rng.integers(state.size))
    m, n = divmod(p, state.width)
    j = int(rng.integers(state.n_states - 1))
    if j >= state.indices[m, n]:
        j += 1
    return m, n, j


def run_sa(cfg, target, illumination=None, progress=None, cancel=None, audit=None):
    """Simulated annealing over quantized pixel states.

    Proposals pick a uniform pixel and a uniform different level; the
    masked error change is evaluated incrementally and accepted when it
    improves or with probability ``exp(-dE / T_k)`` under the geometric
    schedule ``T_k = T0 * alpha^k``. ``T0 = 0`` degrades to pure descent;
    on auto, ``T0`` is the mean |dE| of 100 discarded warm-up proposals.
    Errors are recorded every ``max(1, proposals // 1000)`` proposals.

    ``audit``, when given, is called at every checkpoint with
    ``(proposal, incremental_unscaled_error, hologram_copy)`` so the
    incremental arithmetic can be checked against a full re-propagation.
    """
    start = time.perf_counter()
    target = np.asarray(target, dtype=np.complex128)
    _check_inputs(cfg, target, illumination)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    holo0 = initial_hologram(target, illumination, cfg.init_mode, rng, cfg.propagation)
    state = _IncrementalState(cfg, target, holo0)

    first = state.reported_error(cfg.metric.rescale)
    trace = [(0, first)]
    if progress is not None:
        progress(0, first)

    temperature = cfg.initial_temperature
    if temperature is None or temperature < 0:
        total = 0.0
        for _ in range(_WARMUP_PROPOSALS):
            m, n, j = _draw_proposal(rng, state)
            total += abs(state.delta_error(m, n, j)) / state.denom
        temperature = total / _WARMUP_PROPOSALS

    interval = max(1, cfg.proposals // 1000)
    executed = 0
    cancelled = False
    for k in range(cfg.proposals):
        if cancel is not None and cancel.is_set():
            cancelled = True
            break
        m, n, j = _draw_proposal(rng, state)
        change = state.delta_error(m, n, j)
        normalized = change / state.denom
        accept = normalized < 0.0
        if not accept and temperature > 0.0:
            accept = rng.random() < math.exp(-normalized / temperature)
        if accept:
            state.commit(m, n, j, change)
        temperature *= cfg.cooling_factor
        executed = k + 1
        if executed % interval == 0:
            err = state.reported_error(cfg.metric.rescale)
            trace.append((executed, err))
            if progress is not None:
                progress(executed, err)
            if audit is not None:
                audit(executed, state.error_num / state.denom, state.hologram())

    return _final_report(
        cfg, state, trace, executed, start, CANCELLED if cancelled else COMPLETED, progress
    )


# --- direct binary search -----------------------------------------------------


def run_dbs(cfg, target, illumination=None, progress=None, cancel=None, audit=None):
    """Greedy per-pixel exhaustive level search accepting only improvements.

    Each pass visits every pixel (raster order or a fresh seeded
    permutation per pass), evaluates every allowed level incrementally and
    commits the best level only when it strictly improves the masked
    error. Terminates after a pass with zero commits or after the pass
    budget. The error is recorded once per committing pass, so the trace
    is strictly decreasing.
    """
    start = time.perf_counter()
    target = np.asarray(target, dtype=np.complex128)
    _check_inputs(cfg, target, illumination)
    root = np.random.SeedSequence(cfg.seed)
    rng = np.random.Generator(np.random.PCG64(root))
    holo0 = initial_hologram(target, illumination, cfg.init_mode, rng, cfg.propagation)
    state = _IncrementalState(cfg, target, holo0)

    first = state.reported_error(cfg.metric.rescale)
    trace = [(0, first)]
    if progress is not None:
        progress(0, first)

    passes = 0
    cancelled = False
    converged = False
    for _ in range(cfg.max_passes):
        if cfg.scan_order == RANDOM:
            pass_rng = np.random.Generator(np.random.PCG64(root.spawn(1)[0]))
            order = pass_rng.permutation(state.size)
        else:
            order = range(state.size)
        commits = 0
        for p in order:
            if cancel is not None and cancel.is_set():
                cancelled = True
                break
            m, n = divmod(int(p), state.width)
            j, change = state.best_delta(m, n)
            if j >= 0 and change < 0.0:
                state.commit(m, n, j, change)
                commits += 1
        if cancelled:
            break
        passes += 1
        if commits > 0:
            err = state.reported_error(cfg.metric.rescale)
            trace.append((passes, err))
            if progress is not None:
                progress(passes, err)
            if audit is not None:
                audit(passes, state.error_num / state.denom, state.hologram())
        else:
            converged = True
            break

    termination = CANCELLED if cancelled else (CONVERGED if converged else COMPLETED)
    return _final_report(cfg, state, trace, passes, start, termination, progress)


# --- one-step phase retrieval ---------------------------------------------------


def run_ospr(cfg, target, illumination=None, progress=None, cancel=None):
    """Independently randomized, quantized backpropagations, averaged in intensity.

    Subframe i pairs the target amplitude with a fresh uniform random
    phase from its own child stream, inverse-propagates, imposes the
    illumination amplitude and quantizes. The perceived replay intensity
    is the running mean of the subframe intensities; the trace holds the
    cumulative-average error after each frame.
    """
    start = time.perf_counter()
    target = np.asarray(target, dtype=np.complex128)
    _check_inputs(cfg, target, illumination)
    illum_amp = _illumination_amplitude(target, illumination)
    target_amp = np.abs(target)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.subframes)

    frames = []
    intensity_sum = np.zeros(target.shape, dtype=np.float64)
    trace = []
    cancelled = False
    for i, stream in enumerate(streams):
        if cancel is not None and cancel.is_set():
            cancelled = True
            break
        rng = np.random.Generator(np.random.PCG64(stream))
        theta = 2.0 * np.pi * rng.random(target.shape)
        sub_target = target_amp * np.exp(1j * theta)
        holo = propagate_inverse(sub_target, cfg.propagation)
        holo = quantize(illum_amp * np.exp(1j * np.angle(holo)), cfg.slm)
        frames.append(holo)
        replay = propagate(holo, cfg.propagation)
        intensity_sum += replay.real**2 + replay.imag**2
        perceived = np.sqrt(intensity_sum / len(frames))
        err = mse_error(perceived, target, cfg.metric)
        trace.append((len(frames), err))
        if progress is not None:
            progress(len(frames), err)

    if frames:
        perceived = np.sqrt(intensity_sum / len(frames))
        eta = efficiency(perceived, cfg.metric.mask)
        final_err = trace[-1][1]
    else:
        # Cancelled before the first frame: a zero replay scores error 1.
        perceived = np.zeros(target.shape)
        eta = 0.0
        final_err = mse_error(perceived, target, cfg.metric)
        trace.append((0, final_err))
    report = RunReport(
        error_trace=trace,
        final_error=final_err,
        efficiency=eta,
        iterations_executed=len(frames),
        runtime_ms=_elapsed_ms(start),
        seed_used=cfg.seed,
        termination=CANCELLED if cancelled else COMPLETED,
    )
    return frames, report


RUNNERS = {GS: run_gs, SA: run_sa, DBS: run_dbs, OSPR: run_ospr}
