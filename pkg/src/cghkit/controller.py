"""Run orchestration: tree -> config translation, execution, batch scheduling.

``configure_run`` is a pure translation from option paths to an
:class:`~cghkit.algorithms.AlgorithmConfig`; the only mutation is writing
a freshly drawn seed back into the tree when the seed option is on auto,
so the flattened snapshot carried into metadata always pins the run.
Replaying that snapshot through ``deserialize_params`` and ``execute``
regenerates the identical hologram.

Batches run on a bounded thread pool; jobs share nothing but the results
sink, which is written once, in manifest order, after all jobs finish.
Jobs without an explicit seed get one derived from (batch base seed, job
id), so outputs are reproducible for any worker count and distinct across
jobs.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from PIL import Image

from . import __version__
from .algorithms import DBS, GS, OSPR, RUNNERS, SA, AlgorithmConfig
from .errors import (
    CghError,
    DuplicateIdError,
    MalformedManifestError,
    UnknownKeyError,
    UnknownPathError,
    ValidationFailedError,
)
from .image import from_grayscale, rect_mask
from .propagation import FRESNEL, MetricSpec, PropagationSpec
from .schema import (
    AUTO_SEED,
    PATH_ALGORITHM,
    PATH_FRESNEL_DISTANCE,
    PATH_INIT_MODE,
    PATH_PITCH_X,
    PATH_PITCH_Y,
    PATH_PROPAGATION,
    PATH_RESCALE_ERROR,
    PATH_RESOLUTION_X,
    PATH_RESOLUTION_Y,
    PATH_SEED,
    PATH_SLM_TYPE,
    PATH_TARGET_REGION,
    PATH_WAVELENGTH,
    build_schema,
)
from .serialio import BatchRecord, Metadata, apply_values, save_field, write_results_row
from .slm import AmplitudeOnly, MultiAmp, PhaseOnly, SlmSpec, binary_phase

RESULTS_FILENAME = "results.csv"


@dataclass
class Job:
    """One batch manifest entry."""

    id: str
    target_path: str
    overrides: list  # (path, value) pairs in manifest order
    output_name: str


@dataclass
class BatchSummary:
    total: int
    succeeded: int
    failed: int
    rows: list


@dataclass
class RunOutputs:
    """Generated field(s) plus the traceability metadata attached to them."""

    fields: list
    metadata: Metadata


def _fresh_seed() -> int:
    seed = int.from_bytes(os.urandom(8), "little")
    return seed or 1


def _derived_seed(base_seed: int, job_id: str) -> int:
    digest = hashlib.sha256(f"{base_seed}:{job_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") or 1


def _slm_scheme(tree):
    kind = tree.get(PATH_SLM_TYPE)
    if kind == "phase-only":
        return PhaseOnly(
            tree.get(f"{PATH_SLM_TYPE}/phase-only/phase-levels"),
            tree.get(f"{PATH_SLM_TYPE}/phase-only/phase-offset"),
        )
    if kind == "binary-phase":
        return binary_phase()
    if kind == "amplitude":
        return AmplitudeOnly(tree.get(f"{PATH_SLM_TYPE}/amplitude/amplitude-levels"))
    # multi-amp: amplitude rings (including zero) crossed with phase spokes
    ring_count = tree.get(f"{PATH_SLM_TYPE}/multi-amp/amplitude-levels")
    spoke_count = tree.get(f"{PATH_SLM_TYPE}/multi-amp/phase-levels")
    amplitudes = np.arange(ring_count) / (ring_count - 1)
    spokes = np.exp(2j * np.pi * np.arange(spoke_count) / spoke_count)
    return MultiAmp(tuple(complex(a * s) for a in amplitudes for s in spokes))


def configure_run(tree) -> AlgorithmConfig:
    """Translate an option tree into a runner configuration.

    A seed of 0 is resolved from entropy and written back into the tree
    before the parameter snapshot is taken.
    """
    invalid = []

    width = tree.get(PATH_RESOLUTION_X)
    height = tree.get(PATH_RESOLUTION_Y)
    slm = SlmSpec(width, height, _slm_scheme(tree))

    prop_kind = tree.get(PATH_PROPAGATION)
    distance = 0.1  # unused by fourier
    if prop_kind == FRESNEL:
        distance = tree.get(PATH_FRESNEL_DISTANCE)
        if distance == 0.0:
            invalid.append(PATH_FRESNEL_DISTANCE)
    propagation = PropagationSpec(
        kind=prop_kind,
        wavelength=tree.get(PATH_WAVELENGTH),
        distance=distance,
        pitch_x=tree.get(PATH_PITCH_X),
        pitch_y=tree.get(PATH_PITCH_Y),
    )

    if tree.get(PATH_TARGET_REGION):
        x = tree.get(f"{PATH_TARGET_REGION}/region-x")
        y = tree.get(f"{PATH_TARGET_REGION}/region-y")
        w = tree.get(f"{PATH_TARGET_REGION}/region-width")
        h = tree.get(f"{PATH_TARGET_REGION}/region-height")
        if x + w > width or y + h > height:
            invalid.extend(
                [f"{PATH_TARGET_REGION}/region-width", f"{PATH_TARGET_REGION}/region-height"]
            )
            mask = rect_mask(width, height)
        else:
            mask = rect_mask(width, height, [(x, y, w, h)])
    else:
        mask = rect_mask(width, height)
    metric = MetricSpec(mask=mask, rescale=tree.get(PATH_RESCALE_ERROR))

    if invalid:
        raise ValidationFailedError(invalid)

    seed = tree.get(PATH_SEED)
    if seed == AUTO_SEED:
        seed = _fresh_seed()
        tree.set(PATH_SEED, seed)

    algorithm = tree.get(PATH_ALGORITHM)
    cfg = AlgorithmConfig(
        algorithm=algorithm,
        slm=slm,
        propagation=propagation,
        metric=metric,
        seed=seed,
        init_mode=tree.get(PATH_INIT_MODE),
    )
    if algorithm == GS:
        cfg.iterations = tree.get(f"{PATH_ALGORITHM}/gs/iterations")
        cfg.feedback_gain = tree.get(f"{PATH_ALGORITHM}/gs/feedback-gain")
        cfg.quantize_each_iteration = tree.get(f"{PATH_ALGORITHM}/gs/quantize-each-iteration")
    elif algorithm == SA:
        cfg.proposals = tree.get(f"{PATH_ALGORITHM}/sa/proposals")
        temperature = tree.get(f"{PATH_ALGORITHM}/sa/initial-temperature")
        cfg.initial_temperature = None if temperature < 0 else temperature
        cfg.cooling_factor = tree.get(f"{PATH_ALGORITHM}/sa/cooling-factor")
    elif algorithm == DBS:
        cfg.max_passes = tree.get(f"{PATH_ALGORITHM}/dbs/max-passes")
        cfg.scan_order = tree.get(f"{PATH_ALGORITHM}/dbs/scan-order")
    elif algorithm == OSPR:
        cfg.subframes = tree.get(f"{PATH_ALGORITHM}/ospr/subframes")

    cfg.params = tree.flatten()
    return cfg


def _utc_timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def execute(cfg: AlgorithmConfig, target, illumination=None, progress=None, cancel=None):
    """Dispatch to the configured runner and attach traceability metadata.

    Runner errors propagate unchanged; the hologram bytes equal a direct
    runner call with the same configuration.
    """
    runner = RUNNERS.get(cfg.algorithm)
    if runner is None:
        raise ValidationFailedError([PATH_ALGORITHM], f"unknown algorithm {cfg.algorithm!r}")
    result, report = runner(cfg, target, illumination, progress=progress, cancel=cancel)
    fields = result if isinstance(result, list) else [result]
    metadata = Metadata(
        parameters=list(cfg.params),
        seed=report.seed_used,
        app_version=__version__,
        timestamp=_utc_timestamp(),
        algorithm=cfg.algorithm,
        error_final=report.final_error,
        iterations=report.iterations_executed,
    )
    return RunOutputs(fields, metadata), report


def load_target(path, resolution):
    """Decode a PNG to a complex target field at the given (width, height).

    RGB inputs are reduced with ITU-R 601-2 luminance weights; size
    mismatches are resampled by nearest neighbour.
    """
    with Image.open(path) as img:
        gray = img.convert("L")
        if gray.size != tuple(resolution):
            gray = gray.resize(tuple(resolution), Image.NEAREST)
        return from_grayscale(np.asarray(gray))


def save_outputs(outputs: RunOutputs, out_dir, name) -> list:
    """Write the run's field(s) under ``out_dir``; returns the file names.

    Single-field algorithms write ``<name>.hgi``; subframe sets write one
    ``<name>.frame<i>.hgi`` per frame.
    """
    stem = name[: -len(".hgi")] if name.endswith(".hgi") else name
    if outputs.metadata.algorithm == OSPR:
        names = [f"{stem}.frame{i}.hgi" for i in range(len(outputs.fields))]
    else:
        names = [f"{stem}.hgi"]
    for fname, field in zip(names, outputs.fields):
        save_field(field, outputs.metadata, os.path.join(out_dir, fname))
    return names


def load_manifest(path) -> list:
    """Parse and validate a batch manifest.

    The manifest is a JSON array of ``{"id", "target", "output"?,
    "overrides"?}`` objects; ids must be unique and override paths must
    exist in the schema (selected or not).
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise MalformedManifestError(err.msg, line=err.lineno) from None
    if not isinstance(doc, list):
        raise MalformedManifestError("manifest must be a JSON array of jobs")

    tree = build_schema()
    jobs = []
    seen = set()
    for index, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise MalformedManifestError(f"job {index} is not an object")
        job_id = entry.get("id")
        target = entry.get("target")
        if not isinstance(job_id, str) or not job_id:
            raise MalformedManifestError(f"job {index} needs a string 'id'")
        if not isinstance(target, str) or not target:
            raise MalformedManifestError(f"job {job_id!r} needs a string 'target'")
        if job_id in seen:
            raise DuplicateIdError(job_id)
        seen.add(job_id)
        overrides = entry.get("overrides", {})
        if not isinstance(overrides, dict):
            raise MalformedManifestError(f"job {job_id!r}: 'overrides' must be an object")
        for override_path in overrides:
            try:
                tree.resolve_option(override_path, visible_only=False)
            except UnknownPathError:
                raise UnknownKeyError(override_path) from None
        jobs.append(
            Job(
                id=job_id,
                target_path=target,
                overrides=list(overrides.items()),
                output_name=entry.get("output", job_id),
            )
        )
    return jobs


def _run_job(job: Job, out_dir, base_seed, cancel):
    started = time.perf_counter()
    try:
        tree = build_schema()
        apply_values(tree, job.overrides)
        if tree.get(PATH_SEED) == AUTO_SEED:
            tree.set(PATH_SEED, _derived_seed(base_seed, job.id))
        resolution = (tree.get(PATH_RESOLUTION_X), tree.get(PATH_RESOLUTION_Y))
        target = load_target(job.target_path, resolution)
        cfg = configure_run(tree)
        outputs, report = execute(cfg, target, cancel=cancel)
        names = save_outputs(outputs, out_dir, job.output_name)
        record = BatchRecord(
            job_id=job.id,
            algorithm=cfg.algorithm,
            width=resolution[0],
            height=resolution[1],
            iterations=report.iterations_executed,
            final_error=report.final_error,
            efficiency=report.efficiency,
            seed=report.seed_used,
            runtime_ms=report.runtime_ms,
            output_file=names[0],
        )
        return record, None
    except (CghError, OSError, ValueError) as err:
        elapsed = (time.perf_counter() - started) * 1000.0
        record = BatchRecord(
            job_id=job.id, runtime_ms=elapsed, output_file=f"ERROR: {err}"
        )
        return record, err


def run_batch(jobs, workers: int = 1, out_dir: str = ".", base_seed: int = 0, cancel=None):
    """Execute jobs on at most ``workers`` threads; one CSV row per job.

    A failing job is recorded and does not abort the batch. Rows are
    buffered and written in manifest order once all jobs have finished.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda job: _run_job(job, out_dir, base_seed, cancel), jobs))

    csv_path = os.path.join(out_dir, RESULTS_FILENAME)
    rows = []
    failed = 0
    for record, err in results:
        write_results_row(csv_path, record)
        rows.append(record)
        if err is not None:
            failed += 1
    return BatchSummary(total=len(jobs), succeeded=len(jobs) - failed, failed=failed, rows=rows)
