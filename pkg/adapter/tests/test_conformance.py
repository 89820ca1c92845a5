"""Dry-run conformance against the installed composition toolkit.

The adapter's only contract is files: everything it emits must pass
`teaserkit validate` with zero diagnostics and drive both composer pipelines
end to end. The toolkit is exercised through its CLI in a subprocess; nothing
here imports it.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from teaserprep.cli import main

TEASERKIT = [sys.executable, "-m", "teaserkit.cli"]


def teaserkit_cli(*args):
    return subprocess.run(
        [*TEASERKIT, *map(str, args)], capture_output=True, text=True
    )


@pytest.fixture(scope="module")
def emitted(tmp_path_factory):
    out = tmp_path_factory.mktemp("dry-run")
    rc = main(["all", "--out-dir", str(out), "--dry-run", "--duration-s", "120"])
    assert rc == 0
    return out


class TestValidateConformance:
    def test_all_inputs_pass_with_zero_diagnostics(self, emitted):
        proc = teaserkit_cli(
            "validate",
            "--bank", emitted / "bank.tgfb",
            "--narration", emitted / "narration.json",
            "--curves", emitted / "curves.json",
            "--generated", emitted / "generated.json",
        )
        assert proc.returncode == 0, proc.stderr
        assert proc.stderr == ""
        assert "ok: inputs are consistent" in proc.stdout

    def test_each_single_op_output_validates(self, tmp_path):
        bank = tmp_path / "bank.tgfb"
        narr = tmp_path / "narration.json"
        curves = tmp_path / "curves.json"
        gen = tmp_path / "generated.json"
        transcript = tmp_path / "transcript.txt"
        transcript.write_text("scene " * 120, encoding="utf-8")
        assert main(["extract-frames", "--video", "clip", "--duration-s", "90",
                     "--out", str(bank), "--dry-run"]) == 0
        assert main(["narration", "--transcript", str(transcript), "--title",
                     "A Film", "--out", str(narr), "--dry-run"]) == 0
        assert main(["curves", "--video", "clip", "--narration", str(narr),
                     "--bank", str(bank), "--out", str(curves), "--dry-run"]) == 0
        assert main(["generated", "--narration", str(narr), "--out", str(gen),
                     "--dry-run"]) == 0
        proc = teaserkit_cli(
            "validate", "--bank", bank, "--narration", narr,
            "--curves", curves, "--generated", gen,
        )
        assert proc.returncode == 0, proc.stderr
        assert proc.stderr == ""


class TestPipelineEndToEnd:
    @pytest.mark.parametrize("config", ["pipeline-pt.json", "pipeline-lr.json"])
    def test_dry_run_files_drive_pipeline(self, emitted, config):
        proc = teaserkit_cli("run", "--config", emitted / config)
        assert proc.returncode == 0, proc.stderr
        out_dir = emitted / json.loads((emitted / config).read_text())["out_dir"]
        for name in ("selection.json", "timeline.json", "cutlist.ffconcat",
                     "report.json"):
            assert (out_dir / name).exists()
        report = json.loads((out_dir / "report.json").read_text())
        assert report["selection"]["total_frames"] > 0
        assert report["selection"]["shortfalls"] == []

    def test_pipeline_outputs_deterministic(self, emitted, tmp_path):
        results = []
        for run in ("r1", "r2"):
            out_dir = tmp_path / run
            proc = teaserkit_cli(
                "run", "--config", emitted / "pipeline-pt.json",
                "--out-dir", out_dir,
            )
            assert proc.returncode == 0, proc.stderr
            results.append(
                {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}
            )
        assert results[0] == results[1]


class TestCliErrors:
    def test_live_mode_without_credentials(self, tmp_path, monkeypatch):
        monkeypatch.delenv("TEASERPREP_SERVICE_URL", raising=False)
        rc = main(["extract-frames", "--video", "clip",
                   "--out", str(tmp_path / "b.tgfb")])
        assert rc == 2

    def test_missing_transcript(self, tmp_path):
        rc = main(["narration", "--transcript", str(tmp_path / "nope.txt"),
                   "--title", "T", "--out", str(tmp_path / "n.json"),
                   "--dry-run"])
        assert rc == 2

    def test_empty_transcript(self, tmp_path):
        empty = tmp_path / "empty.txt"
        empty.write_text(" \n", encoding="utf-8")
        rc = main(["narration", "--transcript", str(empty), "--title", "T",
                   "--out", str(tmp_path / "n.json"), "--dry-run"])
        assert rc == 2

    def test_entry_point_runs(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "teaserprep.cli", "all",
             "--out-dir", str(tmp_path / "d"), "--dry-run"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "d" / "bank.tgfb").exists()
