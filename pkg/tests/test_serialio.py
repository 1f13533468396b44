import csv
import json
import os

import numpy as np
import pytest
from PIL import Image

from cghkit.errors import (
    ChecksumMismatchError,
    EmptyImageError,
    HiddenPathError,
    MalformedJsonError,
    OutOfRangeError,
    TruncatedPayloadError,
    UnknownKeyError,
    VersionMismatchError,
)
from cghkit.schema import build_schema
from cghkit.serialio import (
    BatchRecord,
    Metadata,
    RESULTS_HEADER,
    deserialize_params,
    export_png,
    inspect_field,
    load_field,
    save_field,
    serialize_params,
    write_results_row,
)

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "default_params.json")


def sample_metadata(**overrides):
    base = dict(
        parameters=[("algorithm/run/seed", 7), ("algorithm/run/algorithm", "gs")],
        seed=7,
        app_version="0.1.0",
        timestamp="2026-01-01T00:00:00Z",
        algorithm="gs",
        error_final=0.25,
        iterations=10,
    )
    base.update(overrides)
    return Metadata(**base)


class TestParamsJson:
    def test_default_dump_matches_frozen_fixture(self):
        with open(FIXTURE, "r", encoding="utf-8") as fh:
            frozen = fh.read()
        assert serialize_params(build_schema()) == frozen

    def test_contains_resolution_key(self):
        assert "slm-resolution-x" in serialize_params(build_schema())

    def test_equal_trees_serialize_identically(self):
        a = build_schema()
        b = build_schema()
        a.set("algorithm/run/seed", 9)
        b.set("algorithm/run/seed", 9)
        assert serialize_params(a) == serialize_params(b)
        b.set("algorithm/run/seed", 10)
        assert serialize_params(a) != serialize_params(b)

    def test_roundtrip_preserves_values(self):
        tree = build_schema()
        tree.set("projector/slm/slm-type", "multi-amp")
        tree.set("projector/slm/slm-type/multi-amp/amplitude-levels", 6)
        tree.set("algorithm/run/algorithm", "sa")
        tree.set("algorithm/run/algorithm/sa/proposals", 123)
        tree.set("algorithm/run/target-region", True)
        rebuilt = deserialize_params(serialize_params(tree), build_schema())
        assert rebuilt.flatten() == tree.flatten()

    def test_roundtrip_randomized_trees(self):
        gen = np.random.default_rng(42)
        for _ in range(20):
            tree = build_schema()
            algo = ["gs", "sa", "dbs", "ospr"][gen.integers(4)]
            tree.set("algorithm/run/algorithm", algo)
            tree.set("algorithm/run/seed", int(gen.integers(1, 1 << 32)))
            slm = ["phase-only", "binary-phase", "amplitude", "multi-amp"][gen.integers(4)]
            tree.set("projector/slm/slm-type", slm)
            rebuilt = deserialize_params(serialize_params(tree), build_schema())
            assert rebuilt.flatten() == tree.flatten()

    def test_text_and_path_variants_roundtrip(self):
        from test_hierarchy import small_tree

        tree = small_tree()
        tree.set("main/general/label", "hello world")
        tree.set("main/general/input", "/data/in.png")
        tree.set("main/general/extras", ["a.png", "b.png"])
        tree.set("main/general/advanced", True)
        rebuilt = deserialize_params(serialize_params(tree), small_tree())
        assert rebuilt.flatten() == tree.flatten()

    def test_select_applied_before_children(self):
        # File order puts the child key before its select: must still apply.
        doc = {
            "version": {"major": 1, "minor": 0, "patch": 0},
            "values": {
                "projector/slm/slm-type/multi-amp/amplitude-levels": 9,
                "projector/slm/slm-type": "multi-amp",
            },
        }
        tree = deserialize_params(json.dumps(doc), build_schema())
        assert tree.get("projector/slm/slm-type/multi-amp/amplitude-levels") == 9

    def test_unknown_key(self):
        doc = {"version": {"major": 1, "minor": 0, "patch": 0}, "values": {"foo/bar": 1}}
        with pytest.raises(UnknownKeyError):
            deserialize_params(json.dumps(doc), build_schema())

    def test_hidden_contradiction(self):
        doc = {
            "version": {"major": 1, "minor": 0, "patch": 0},
            "values": {
                "projector/slm/slm-type": "binary-phase",
                "projector/slm/slm-type/multi-amp/amplitude-levels": 9,
            },
        }
        with pytest.raises(HiddenPathError):
            deserialize_params(json.dumps(doc), build_schema())

    def test_major_version_mismatch(self):
        doc = {"version": {"major": 2, "minor": 0, "patch": 0}, "values": {}}
        with pytest.raises(VersionMismatchError):
            deserialize_params(json.dumps(doc), build_schema())

    def test_minor_version_warns_and_proceeds(self, caplog):
        doc = {"version": {"major": 1, "minor": 5, "patch": 0}, "values": {}}
        with caplog.at_level("WARNING"):
            tree = deserialize_params(json.dumps(doc), build_schema())
        assert tree.flatten() == build_schema().flatten()
        assert any("differs" in message for message in caplog.messages)

    def test_malformed_json(self):
        with pytest.raises(MalformedJsonError):
            deserialize_params("{not json", build_schema())
        with pytest.raises(MalformedJsonError):
            deserialize_params(json.dumps({"values": {}}), build_schema())
        with pytest.raises(MalformedJsonError):
            deserialize_params(
                json.dumps({"version": {"major": 1}, "values": {}}), build_schema()
            )
        with pytest.raises(MalformedJsonError):
            deserialize_params(json.dumps([1, 2, 3]), build_schema())

    def test_out_of_range_propagates_path(self):
        doc = {
            "version": {"major": 1, "minor": 0, "patch": 0},
            "values": {"projector/slm/slm-resolution-x": 1},
        }
        with pytest.raises(OutOfRangeError) as info:
            deserialize_params(json.dumps(doc), build_schema())
        assert info.value.path == "projector/slm/slm-resolution-x"


class TestFieldFiles:
    def test_roundtrip_bit_exact(self, tmp_path, random_field):
        field = random_field(64, 64)
        path = tmp_path / "f.hgi"
        save_field(field, sample_metadata(), path)
        loaded, meta = load_field(path)
        assert np.array_equal(loaded, field)
        assert loaded.tobytes() == field.tobytes()
        assert meta == sample_metadata()

    def test_nonsquare_roundtrip(self, tmp_path, random_field):
        field = random_field(5, 9)
        path = tmp_path / "f.hgi"
        save_field(field, sample_metadata(), path)
        loaded, _ = load_field(path)
        assert np.array_equal(loaded, field)

    def test_flipped_payload_byte_detected(self, tmp_path, random_field):
        path = tmp_path / "f.hgi"
        save_field(random_field(8, 8), sample_metadata(), path)
        blob = bytearray(path.read_bytes())
        blob[-5] ^= 0x40
        path.write_bytes(bytes(blob))
        with pytest.raises(ChecksumMismatchError):
            load_field(path)
        _, _, ok = inspect_field(path)
        assert not ok

    def test_truncated_payload_detected(self, tmp_path, random_field):
        path = tmp_path / "f.hgi"
        save_field(random_field(8, 8), sample_metadata(), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-16])
        with pytest.raises(TruncatedPayloadError):
            load_field(path)

    def test_not_a_container(self, tmp_path):
        path = tmp_path / "f.hgi"
        path.write_bytes(b"PNG...nope")
        with pytest.raises(MalformedJsonError):
            load_field(path)

    def test_empty_field_rejected(self, tmp_path):
        with pytest.raises(EmptyImageError):
            save_field(np.zeros((0, 4), complex), sample_metadata(), tmp_path / "f.hgi")

    def test_header_layout(self, tmp_path, random_field):
        path = tmp_path / "f.hgi"
        save_field(random_field(4, 6), sample_metadata(), path)
        blob = path.read_bytes()
        assert blob[:4] == b"HGI1"
        header_len = int.from_bytes(blob[4:8], "little")
        header = json.loads(blob[8 : 8 + header_len])
        assert header["width"] == 6 and header["height"] == 4
        assert len(blob) - 8 - header_len == 6 * 4 * 16
        assert header["metadata"]["appVersion"] == "0.1.0"


class TestPng:
    def test_roundtrip_pixels(self, tmp_path):
        rgb = np.arange(2 * 2 * 3, dtype=np.uint8).reshape(2, 2, 3) * 20
        path = tmp_path / "x.png"
        export_png(rgb, path)
        back = np.asarray(Image.open(path).convert("RGB"))
        assert np.array_equal(back, rgb)

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(EmptyImageError):
            export_png(np.zeros((0, 0, 3), np.uint8), tmp_path / "x.png")

    def test_gray_field_has_equal_channels(self, tmp_path, random_field):
        from cghkit.image import ViewKey, render

        rgb = render(random_field(8, 8), ViewKey())
        path = tmp_path / "g.png"
        export_png(rgb, path)
        back = np.asarray(Image.open(path).convert("RGB"))
        assert np.array_equal(back[..., 0], back[..., 1])
        assert np.array_equal(back[..., 1], back[..., 2])


class TestResultsCsv:
    def record(self, job="a", err=0.123456789123):
        return BatchRecord(
            job_id=job,
            algorithm="gs",
            width=32,
            height=32,
            iterations=5,
            final_error=err,
            efficiency=0.5,
            seed=7,
            runtime_ms=12.5,
            output_file=f"{job}.hgi",
        )

    def test_two_appends_three_lines(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results_row(path, self.record("a"))
        write_results_row(path, self.record("b"))
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 3
        assert lines[0] == ",".join(RESULTS_HEADER)

    def test_reopened_file_keeps_single_header(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results_row(path, self.record("a"))
        write_results_row(path, self.record("b"))
        text = path.read_text()
        assert text.count("job_id") == 1

    def test_error_parses_back_within_tolerance(self, tmp_path):
        path = tmp_path / "results.csv"
        value = 0.12345678912345
        write_results_row(path, self.record("a", err=value))
        with open(path, newline="") as fh:
            row = list(csv.DictReader(fh))[0]
        assert abs(float(row["final_error"]) - value) < 1e-9 * value

    def test_failed_row_has_error_text(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results_row(
            path, BatchRecord(job_id="bad", runtime_ms=1.0, output_file="ERROR: boom, really")
        )
        with open(path, newline="") as fh:
            row = list(csv.DictReader(fh))[0]
        assert row["final_error"] == ""
        assert row["output_file"] == "ERROR: boom, really"
