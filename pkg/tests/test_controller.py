import json
import os

import numpy as np
import pytest
from PIL import Image

from cghkit.algorithms import CANCELLED, GS, RUNNERS
from cghkit.controller import (
    configure_run,
    execute,
    load_manifest,
    load_target,
    run_batch,
    save_outputs,
)
from cghkit.errors import (
    DimensionMismatchError,
    DuplicateIdError,
    MalformedManifestError,
    UnknownKeyError,
    ValidationFailedError,
)
from cghkit.schema import PATH_SEED, build_schema
from cghkit.serialio import deserialize_params, load_field
from cghkit.slm import AmplitudeOnly, MultiAmp, PhaseOnly


def small_tree(algorithm="gs", size=16, seed=9, **extra):
    tree = build_schema()
    tree.set("projector/slm/slm-resolution-x", size)
    tree.set("projector/slm/slm-resolution-y", size)
    tree.set("algorithm/run/algorithm", algorithm)
    tree.set("algorithm/run/seed", seed)
    if algorithm == "gs":
        tree.set("algorithm/run/algorithm/gs/iterations", 5)
    elif algorithm == "sa":
        tree.set("algorithm/run/algorithm/sa/proposals", 200)
    elif algorithm == "dbs":
        tree.set("algorithm/run/algorithm/dbs/max-passes", 3)
    elif algorithm == "ospr":
        tree.set("algorithm/run/algorithm/ospr/subframes", 2)
    tree.set("projector/slm/slm-type", "binary-phase")
    for path, value in extra.items():
        tree.set(path, value)
    return tree


class TestConfigureRun:
    def test_default_tree_maps_to_gs(self):
        cfg = configure_run(build_schema())
        assert cfg.algorithm == GS
        assert cfg.iterations == 100
        assert cfg.slm.width == 512 and cfg.slm.height == 512
        assert cfg.slm.scheme == PhaseOnly(256, 0.0)
        assert cfg.metric.mask.all()
        assert cfg.metric.rescale is False

    def test_binary_phase_maps_to_two_levels(self):
        tree = build_schema()
        tree.set("projector/slm/slm-type", "binary-phase")
        cfg = configure_run(tree)
        assert cfg.slm.scheme == PhaseOnly(2, 0.0)

    def test_amplitude_and_multiamp_mapping(self):
        tree = build_schema()
        tree.set("projector/slm/slm-type", "amplitude")
        tree.set("projector/slm/slm-type/amplitude/amplitude-levels", 4)
        assert configure_run(tree).slm.scheme == AmplitudeOnly(4)

        tree.set("projector/slm/slm-type", "multi-amp")
        tree.set("projector/slm/slm-type/multi-amp/amplitude-levels", 3)
        tree.set("projector/slm/slm-type/multi-amp/phase-levels", 2)
        scheme = configure_run(tree).slm.scheme
        assert isinstance(scheme, MultiAmp)
        assert len(scheme.state_values) == 6
        assert scheme.state_values[0] == 0.0
        assert scheme.state_values[-1] == complex(1.0 * np.exp(1j * np.pi))

    def test_sa_children_consumed(self):
        tree = small_tree("sa")
        tree.set("algorithm/run/algorithm/sa/initial-temperature", 2.5)
        cfg = configure_run(tree)
        assert cfg.proposals == 200
        assert cfg.initial_temperature == 2.5
        tree.set("algorithm/run/algorithm/sa/initial-temperature", -1.0)
        assert configure_run(tree).initial_temperature is None

    def test_auto_seed_resolved_and_recorded(self):
        tree = build_schema()
        assert tree.get(PATH_SEED) == 0
        cfg = configure_run(tree)
        assert cfg.seed != 0
        assert tree.get(PATH_SEED) == cfg.seed
        assert (PATH_SEED, cfg.seed) in cfg.params

    def test_explicit_seed_untouched(self):
        tree = small_tree(seed=1234)
        cfg = configure_run(tree)
        assert cfg.seed == 1234

    def test_region_mapped_to_mask(self):
        tree = small_tree(size=32)
        tree.set("algorithm/run/target-region", True)
        tree.set("algorithm/run/target-region/region-x", 4)
        tree.set("algorithm/run/target-region/region-y", 6)
        tree.set("algorithm/run/target-region/region-width", 10)
        tree.set("algorithm/run/target-region/region-height", 8)
        cfg = configure_run(tree)
        assert cfg.metric.mask.sum() == 80
        assert cfg.metric.mask[6, 4] and not cfg.metric.mask[5, 4]

    def test_region_outside_resolution_fails_validation(self):
        tree = small_tree(size=32)
        tree.set("algorithm/run/target-region", True)
        tree.set("algorithm/run/target-region/region-width", 40)
        with pytest.raises(ValidationFailedError) as info:
            configure_run(tree)
        assert any("region-width" in p for p in info.value.paths)

    def test_zero_fresnel_distance_fails_validation(self):
        tree = small_tree()
        tree.set("projector/slm/propagation", "fresnel")
        tree.set("projector/slm/propagation/fresnel/distance", 0.0)
        with pytest.raises(ValidationFailedError):
            configure_run(tree)

    def test_params_snapshot_is_full_flatten(self):
        tree = small_tree("dbs")
        cfg = configure_run(tree)
        assert cfg.params == tree.flatten()


class TestExecute:
    def target(self, size=16):
        t = np.zeros((size, size))
        t[4:12, 4:12] = 0.8
        return t.astype(complex)

    def test_ospr_outputs_subframes(self):
        cfg = configure_run(small_tree("ospr"))
        outputs, report = execute(cfg, self.target())
        assert len(outputs.fields) == 2
        assert outputs.metadata.algorithm == "ospr"
        assert outputs.metadata.iterations == 2

    def test_cancel_before_start(self):
        import threading

        cancel = threading.Event()
        cancel.set()
        cfg = configure_run(small_tree("gs"))
        outputs, report = execute(cfg, self.target(), cancel=cancel)
        assert report.termination == CANCELLED
        assert len(report.error_trace) >= 1

    def test_deterministic(self):
        cfg = configure_run(small_tree("sa"))
        a, _ = execute(cfg, self.target())
        b, _ = execute(cfg, self.target())
        assert np.array_equal(a.fields[0], b.fields[0])

    def test_no_numeric_transformation_vs_direct_runner(self):
        tree = small_tree("dbs")
        cfg = configure_run(tree)
        outputs, _ = execute(cfg, self.target())
        direct, _ = RUNNERS["dbs"](cfg, self.target())
        assert outputs.fields[0].tobytes() == direct.tobytes()

    def test_metadata_replay_reproduces_payload(self, tmp_path):
        # metadata -> params json -> tree -> configure -> execute closure
        tree = small_tree("gs")
        cfg = configure_run(tree)
        outputs, _ = execute(cfg, self.target())
        names = save_outputs(outputs, tmp_path, "first")
        field, meta = load_field(tmp_path / names[0])

        replay_doc = {
            "version": {"major": 1, "minor": 0, "patch": 0},
            "values": dict(meta.parameters),
        }
        tree2 = deserialize_params(json.dumps(replay_doc), build_schema())
        cfg2 = configure_run(tree2)
        outputs2, _ = execute(cfg2, self.target())
        assert outputs2.fields[0].tobytes() == field.tobytes()

    def test_dimension_mismatch_propagates(self):
        cfg = configure_run(small_tree("gs", size=32))
        with pytest.raises(DimensionMismatchError):
            execute(cfg, self.target(16))


class TestLoadTarget:
    def test_grayscale_and_resample(self, tmp_path):
        arr = np.zeros((8, 6), np.uint8)
        arr[0, :] = 255
        path = tmp_path / "t.png"
        Image.fromarray(arr, "L").save(path)
        field = load_target(path, (12, 16))
        assert field.shape == (16, 12)
        assert field[0, 0] == 1.0

    def test_rgb_uses_rec601_luminance(self, tmp_path):
        rgb = np.zeros((4, 4, 3), np.uint8)
        rgb[..., 0] = 255  # pure red
        path = tmp_path / "c.png"
        Image.fromarray(rgb, "RGB").save(path)
        field = load_target(path, (4, 4))
        # PIL "L" = R*299/1000 + G*587/1000 + B*114/1000
        assert np.allclose(np.abs(field), round(255 * 0.299) / 255.0, atol=1 / 255)


class TestManifest:
    def write(self, tmp_path, payload):
        path = tmp_path / "jobs.json"
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return path

    def test_empty_array(self, tmp_path):
        assert load_manifest(self.write(tmp_path, [])) == []

    def test_duplicate_id(self, tmp_path):
        doc = [
            {"id": "a", "target": "t.png"},
            {"id": "a", "target": "t.png"},
        ]
        with pytest.raises(DuplicateIdError):
            load_manifest(self.write(tmp_path, doc))

    def test_unknown_override_key(self, tmp_path):
        doc = [{"id": "a", "target": "t.png", "overrides": {"nope/nope/nope": 1}}]
        with pytest.raises(UnknownKeyError):
            load_manifest(self.write(tmp_path, doc))

    def test_override_parses_to_dbs_job(self, tmp_path):
        doc = [
            {
                "id": "a",
                "target": "t.png",
                "overrides": {"algorithm/run/algorithm": "dbs"},
            }
        ]
        jobs = load_manifest(self.write(tmp_path, doc))
        assert jobs[0].overrides == [("algorithm/run/algorithm", "dbs")]
        assert jobs[0].output_name == "a"

    def test_malformed_json_reports_line(self, tmp_path):
        with pytest.raises(MalformedManifestError) as info:
            load_manifest(self.write(tmp_path, '[\n{"id": }\n]'))
        assert info.value.line == 2

    def test_not_an_array(self, tmp_path):
        with pytest.raises(MalformedManifestError):
            load_manifest(self.write(tmp_path, {"id": "a"}))


def batch_manifest(tmp_path, target, jobs=3, bad_index=None):
    entries = []
    for i in range(jobs):
        entry = {
            "id": f"job{i}",
            "target": target if i != bad_index else str(tmp_path / "missing.png"),
            "output": f"out{i}",
            "overrides": {
                "projector/slm/slm-resolution-x": 16,
                "projector/slm/slm-resolution-y": 16,
                "projector/slm/slm-type": "binary-phase",
                "algorithm/run/algorithm": ["gs", "sa", "dbs"][i % 3],
                "algorithm/run/algorithm/gs/iterations" if i % 3 == 0 else
                "algorithm/run/algorithm/sa/proposals" if i % 3 == 1 else
                "algorithm/run/algorithm/dbs/max-passes": {0: 4, 1: 150, 2: 2}[i % 3],
            },
        }
        entries.append(entry)
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(entries))
    return path


class TestBatch:
    def test_worker_count_invariance(self, tmp_path, target_png):
        target = target_png(16)
        manifest = batch_manifest(tmp_path, target)
        jobs = load_manifest(manifest)
        out1 = tmp_path / "w1"
        out3 = tmp_path / "w3"
        s1 = run_batch(jobs, workers=1, out_dir=str(out1))
        s3 = run_batch(jobs, workers=3, out_dir=str(out3))
        assert s1.failed == s3.failed == 0
        for i in range(3):
            a = (out1 / f"out{i}.hgi").read_bytes()
            b = (out3 / f"out{i}.hgi").read_bytes()
            # same payload; headers differ only by timestamp
            assert a[-16 * 16 * 16 :] == b[-16 * 16 * 16 :]

    def test_failing_job_is_isolated(self, tmp_path, target_png):
        target = target_png(16)
        manifest = batch_manifest(tmp_path, target, jobs=3, bad_index=1)
        jobs = load_manifest(manifest)
        summary = run_batch(jobs, workers=2, out_dir=str(tmp_path / "out"))
        assert summary.total == 3
        assert summary.succeeded == 2
        assert summary.failed == 1
        assert summary.rows[1].output_file.startswith("ERROR:")

    def test_rows_in_manifest_order(self, tmp_path, target_png):
        target = target_png(16)
        jobs = load_manifest(batch_manifest(tmp_path, target))
        out = tmp_path / "ordered"
        run_batch(jobs, workers=3, out_dir=str(out))
        import csv

        with open(out / "results.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["job_id"] for r in rows] == ["job0", "job1", "job2"]

    def test_unseeded_jobs_get_distinct_reproducible_seeds(self, tmp_path, target_png):
        target = target_png(16)
        jobs = load_manifest(batch_manifest(tmp_path, target))
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        sa = run_batch(jobs, workers=1, out_dir=str(out_a))
        sb = run_batch(jobs, workers=2, out_dir=str(out_b))
        seeds_a = [r.seed for r in sa.rows]
        seeds_b = [r.seed for r in sb.rows]
        assert seeds_a == seeds_b
        assert len(set(seeds_a)) == len(seeds_a)
