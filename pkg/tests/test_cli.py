"""Command-line surfaces: index, jml lint, verify-store, run, report, validate."""

import json

import pytest
from click.testing import CliRunner

import corpusgen
from helpers import FIXTURES
from respec.cli import main

CORPUS = FIXTURES / "minicorpus"


@pytest.fixture()
def runner():
    return CliRunner()


class TestIndexCommand:
    def test_build_emits_timing_csv_row(self, runner, tmp_path):
        corpusgen.generate_corpus(tmp_path / "proj", files=6, seed=4)
        result = runner.invoke(main, ["index", str(tmp_path / "proj")])
        assert result.exit_code == 0, result.output
        project, methods, seconds = result.output.strip().split(",")
        assert project == "proj"
        assert int(methods) > 0
        float(seconds)
        assert (tmp_path / "proj" / ".respec" / "index" / "index.json").is_file()

    def test_update_flow(self, runner, tmp_path):
        import random

        corpusgen.generate_corpus(tmp_path / "proj", files=6, seed=4)
        assert runner.invoke(main, ["index", str(tmp_path / "proj")]).exit_code == 0
        rel = corpusgen.random_edit(tmp_path / "proj", random.Random(1))
        result = runner.invoke(
            main, ["index", str(tmp_path / "proj"), "--update", "--changed", rel]
        )
        assert result.exit_code == 0, result.output


class TestJmlLint:
    def test_clean_listing(self, runner):
        result = runner.invoke(
            main, ["jml", "lint", str(FIXTURES / "listings" / "cli5_spec.jml")]
        )
        assert result.exit_code == 0
        assert "ok: 5 clauses" in result.output

    def test_syntax_error_listing_nonzero_exit(self, runner):
        result = runner.invoke(
            main, ["jml", "lint", str(FIXTURES / "listings" / "jacksondatabind99_spec.jml")]
        )
        assert result.exit_code == 1
        assert result.output.startswith("Syntax:")
        # severity:line:col:message shape
        severity, line, col, message = result.output.strip().split(":", 3)
        assert severity == "Syntax"
        assert line.isdigit() and col.isdigit()
        assert "required" in message


def test_llm_verify_store(runner):
    result = runner.invoke(
        main, ["llm", "verify-store", "--store", str(CORPUS / "transcripts")]
    )
    assert result.exit_code == 0, result.output
    assert "17 transcripts verified" in result.output


class TestRunAndReport:
    def test_replay_run_and_report(self, runner, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(
            main,
            [
                "run", str(CORPUS / "cases.json"),
                "--replay-dir", str(CORPUS / "transcripts"),
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        lines = result.output.strip().splitlines()
        assert len(lines) == 5
        assert any("via Plain" in line for line in lines)
        assert any("via Mixed" in line for line in lines)
        assert any("overfit suspected" in line for line in lines)

        report = runner.invoke(main, ["report", str(out)])
        assert report.exit_code == 0, report.output
        assert "Null pointer" in report.output
        assert "plausible: plain" in report.output

        csv_report = runner.invoke(main, ["report", str(out), "--format", "csv"])
        assert csv_report.output.splitlines()[0] == "bug_type,total,fixed_plain,fixed_ours"
        assert "Total,5,3,5" in csv_report.output

    def test_parallel_run_matches_sequential_artifacts(self, runner, tmp_path):
        outputs = {}
        for name, extra in (("seq", []), ("par", ["--parallel", "3"])):
            out = tmp_path / name
            result = runner.invoke(
                main,
                [
                    "run", str(CORPUS / "cases.json"),
                    "--replay-dir", str(CORPUS / "transcripts"),
                    "--out", str(out),
                    *extra,
                ],
            )
            assert result.exit_code == 0, result.output
            outputs[name] = {
                str(p.relative_to(out)): p.read_bytes()
                for p in sorted(out.rglob("*")) if p.is_file()
            }
        assert outputs["seq"] == outputs["par"]

    def test_validate_patch_file(self, runner, tmp_path):
        from respec.index import build_index
        from respec.patching import method_replacement_diff
        from respec.validation import read_snapshot

        index = build_index(CORPUS / "project")
        record = index.find_method("com.mini.text.LineJoiner", "join")
        diff = method_replacement_diff(
            read_snapshot(CORPUS / "project"),
            record,
            'public static String join(String[] parts) {\n'
            '    return String.join("\\n", parts);\n'
            '}\n',
        )
        patch_file = tmp_path / "fix.diff"
        patch_file.write_text(diff)
        result = runner.invoke(
            main,
            [
                "validate", "mini-nl-1", str(patch_file),
                "--cases", str(CORPUS / "cases.json"),
                "--out", str(tmp_path / "out"),
            ],
        )
        assert result.exit_code == 0, result.output
        verdict = json.loads(result.output)
        assert verdict["plausible"] is True
        assert verdict["provided"] == "AllPass"
