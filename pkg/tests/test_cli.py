"""CLI contract: subcommands, exit codes, JSON mode, end-to-end pipeline."""

import json
import subprocess
import sys

import pytest

from perspecml.cli import main

GOOD = 'perspecml 1\nproject "p"\n\n[model]\n  M5 essential { spec: "F1 at 0.8" }\n'
BROKEN = 'perspecml 1\nproject "p"\n\n[model]\n  U3 important { spec: "x" }\n'


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestInit:
    def test_writes_skeleton(self, tmp_path, capsys):
        target = tmp_path / "proj.psml"
        code, out, _ = run_cli(capsys, "init", "proj", "-o", str(target))
        assert code == 0
        text = target.read_text("utf-8")
        assert text.startswith("perspecml 1\n")
        for pid in ("objectives", "ux", "infrastructure", "model", "data"):
            assert f"[{pid}]" in text
        assert text.count("# ") >= 59

    def test_skeleton_parses_with_zero_coverage(self, tmp_path, capsys):
        target = tmp_path / "proj.psml"
        run_cli(capsys, "init", "proj", "-o", str(target))
        code, out, _ = run_cli(capsys, "check", str(target))
        assert code == 0
        assert "addressed 0/59" in out


class TestCheck:
    def test_clean_file_exit_zero(self, tmp_path, capsys):
        path = tmp_path / "ok.psml"
        path.write_text(GOOD, "utf-8")
        code, out, _ = run_cli(capsys, "check", str(path))
        assert code == 0
        assert "addressed 1/59" in out

    def test_parse_error_exit_one(self, tmp_path, capsys):
        path = tmp_path / "broken.psml"
        path.write_text(BROKEN, "utf-8")
        code, out, _ = run_cli(capsys, "check", str(path))
        assert code == 1
        assert "E002" in out

    def test_warnings_do_not_fail(self, tmp_path, capsys):
        path = tmp_path / "warn.psml"
        path.write_text('perspecml 1\nproject "p"\n\n[model]\n  M11 essential { spec: "x" }\n', "utf-8")
        code, out, _ = run_cli(capsys, "check", str(path))
        assert code == 0
        assert "W102" in out

    def test_strict_fails_on_warnings(self, tmp_path, capsys):
        path = tmp_path / "warn.psml"
        path.write_text('perspecml 1\nproject "p"\n\n[model]\n  M11 essential { spec: "x" }\n', "utf-8")
        code, _, _ = run_cli(capsys, "--strict", "check", str(path))
        assert code == 1

    def test_unreadable_file_exit_two(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "check", str(tmp_path / "missing.psml"))
        assert code == 2

    def test_json_output_valid(self, tmp_path, capsys):
        path = tmp_path / "ok.psml"
        path.write_text(GOOD, "utf-8")
        code, out, _ = run_cli(capsys, "--format", "json", "check", str(path))
        body = json.loads(out)
        assert body["coverage"]["addressed"] == 1

    def test_json_output_valid_on_error_paths(self, tmp_path, capsys):
        path = tmp_path / "broken.psml"
        path.write_text(BROKEN, "utf-8")
        code, out, _ = run_cli(capsys, "--format", "json", "check", str(path))
        assert code == 1
        assert json.loads(out)["findings"]

        code, out, _ = run_cli(capsys, "--format", "json", "check", str(tmp_path / "nope.psml"))
        assert code == 2
        assert "error" in json.loads(out)


class TestReport:
    def test_prioritized_order(self, tmp_path, capsys):
        path = tmp_path / "r.psml"
        path.write_text(
            'perspecml 1\nproject "p"\n\n[objectives]\n  O1 desirable { spec: "a" }\n'
            '\n[model]\n  M5 essential { spec: "b" }\n\n[data]\n  D1 important { spec: "c" }\n',
            "utf-8",
        )
        code, out, _ = run_cli(capsys, "report", str(path))
        assert code == 0
        lines = [l for l in out.splitlines() if ". [" in l]
        assert "M5" in lines[0] and "D1" in lines[1] and "O1" in lines[2]

    def test_report_json(self, tmp_path, capsys):
        path = tmp_path / "r.psml"
        path.write_text(GOOD, "utf-8")
        _, out, _ = run_cli(capsys, "--format", "json", "report", str(path))
        assert json.loads(out)["prioritized"][0]["concern"] == "M5"


class TestGenerators:
    def test_diagram_to_file(self, tmp_path, capsys):
        target = tmp_path / "d.dot"
        code, _, _ = run_cli(capsys, "diagram", "-o", str(target))
        assert code == 0
        text = target.read_text("utf-8")
        assert text.count("subgraph cluster_") == 5

    def test_diagram_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "diagram")
        assert code == 0
        assert out.startswith("digraph perspecml {")

    def test_template_with_spec_overlay(self, tmp_path, capsys):
        spec = tmp_path / "s.psml"
        spec.write_text(GOOD, "utf-8")
        target = tmp_path / "t.md"
        code, _, _ = run_cli(capsys, "template", "--spec", str(spec), "-o", str(target))
        assert code == 0
        assert "F1 at 0.8" in target.read_text("utf-8")

    def test_overlay_flag(self, tmp_path, capsys):
        overlay = tmp_path / "o.json"
        overlay.write_text(
            json.dumps({"relationships": [{"from": "D5", "to": "M12", "kind": "influences"}]}),
            "utf-8",
        )
        code, out, _ = run_cli(capsys, "--catalog-overlay", str(overlay), "diagram")
        assert code == 0
        assert '"T-DAT-2":D5 -> "T-MOD-5":M12' in out


class TestUsage:
    def test_unknown_subcommand_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_flag_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["check", "--wat", "x"])
        assert exc.value.code == 2


class TestServe:
    def test_data_path_not_a_directory(self, tmp_path, capsys):
        bogus = tmp_path / "file"
        bogus.write_text("x", "utf-8")
        code, _, err = run_cli(capsys, "serve", "--data", str(bogus))
        assert code == 2

    def test_bad_bind_address(self, tmp_path, capsys):
        code, _, _ = run_cli(capsys, "serve", "--bind", "nonsense", "--data", str(tmp_path / "d"))
        assert code == 2

    def test_bind_failure_nonzero_exit(self, tmp_path):
        import socket

        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        sock.listen(1)
        try:
            proc = subprocess.run(
                [sys.executable, "-m", "perspecml.cli", "serve",
                 "--bind", f"127.0.0.1:{port}", "--data", str(tmp_path / "d")],
                capture_output=True,
                timeout=30,
                text=True,
            )
            assert proc.returncode != 0
        finally:
            sock.close()


class TestSessionCommand:
    def test_scripted_session_and_export(self, tmp_path):
        log = tmp_path / "ws.psml-log"
        script = "".join(
            [
                "a essential context text\n",
                "a important need text\n",
                "n no ml functionality\n",
                "s\n",
                "q\n",
            ]
        )
        proc = subprocess.run(
            [sys.executable, "-m", "perspecml.cli", "session", str(log)],
            input=script,
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        assert "O1 Context" in proc.stdout

        out = tmp_path / "out.psml"
        proc = subprocess.run(
            [sys.executable, "-m", "perspecml.cli", "session", str(log), "--export", str(out)],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        text = out.read_text("utf-8")
        assert "O1 essential" in text
        assert 'O3 n/a because "no ml functionality"' in text
        assert "O4" not in text  # skipped

    def test_resume_continues_from_cursor(self, tmp_path):
        log = tmp_path / "ws.psml-log"
        subprocess.run(
            [sys.executable, "-m", "perspecml.cli", "session", str(log)],
            input="a essential one\nq\n",
            capture_output=True,
            text=True,
            timeout=60,
        )
        proc = subprocess.run(
            [sys.executable, "-m", "perspecml.cli", "session", str(log)],
            input="q\n",
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert "O2 Need" in proc.stdout
