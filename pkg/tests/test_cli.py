from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from slego.cli import main
from slego.model import serialize_pipeline_config

from conftest import FIG_CONFIG_DOC, VALID_MANIFEST

QUERY = "Create a pipeline to visualize AAPL's stock returns for the last 5 years."


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def ws_args(tmp_path, runner):
    """Initialized workspace plus the common CLI prefix pointing at it."""
    args = ["--workspace", str(tmp_path / "ws")]
    result = runner.invoke(main, args + ["init"])
    assert result.exit_code == 0, result.output
    return args


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestInitAndFiles:
    def test_init_seeds(self, runner, tmp_path):
        args = ["--workspace", str(tmp_path / "ws"), "--json"]
        result = runner.invoke(main, args + ["init"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert "fixtures/marketdata/msft.csv" in doc["fixtures"]
        assert "stock-return-visualisation" in doc["pipelines"]

    def test_files_round_trip(self, runner, ws_args, tmp_path):
        src = write(tmp_path, "local.txt", "hello\n")
        assert runner.invoke(main, ws_args + ["files", "put", src, "dataspace/a.txt"]).exit_code == 0
        result = runner.invoke(main, ws_args + ["files", "ls", "dataspace"])
        assert result.exit_code == 0 and "dataspace/a.txt" in result.output
        result = runner.invoke(main, ws_args + ["files", "get", "dataspace/a.txt"])
        assert result.exit_code == 0 and result.output == "hello\n"
        assert runner.invoke(main, ws_args + ["files", "rm", "dataspace/a.txt"]).exit_code == 0
        result = runner.invoke(main, ws_args + ["files", "get", "dataspace/a.txt"])
        assert result.exit_code == 1
        assert json.loads(result.stderr)["code"] == "E_NOT_FOUND"

    def test_usage_error_exit_2(self, runner, ws_args):
        assert runner.invoke(main, ws_args + ["files", "frobnicate"]).exit_code == 2
        assert runner.invoke(main, ws_args + ["no-such-command"]).exit_code == 2


class TestRegister:
    def test_register_ok(self, runner, ws_args, tmp_path):
        manifest = write(tmp_path, "manifest.json", json.dumps(VALID_MANIFEST))
        result = runner.invoke(main, ws_args + ["register", manifest])
        assert result.exit_code == 0 and "m-test.compute_return" in result.output

    def test_register_invalid_exit_1(self, runner, ws_args, tmp_path):
        manifest = write(tmp_path, "bad.json", json.dumps(dict(VALID_MANIFEST, docstring="")))
        result = runner.invoke(main, ws_args + ["register", manifest])
        assert result.exit_code == 1
        body = json.loads(result.stderr)
        assert body["code"] == "E_VALIDATION"
        assert "E_DOCSTRING" in [f["code"] for f in body["findings"]]


class TestValidateAndRun:
    def test_validate_ok(self, runner, ws_args, tmp_path):
        cfg = write(tmp_path, "pipeline.json", FIG_CONFIG_DOC)
        result = runner.invoke(main, ws_args + ["validate", cfg])
        assert result.exit_code == 0
        assert "error" not in result.output

    def test_validate_errors_exit_1(self, runner, ws_args, tmp_path):
        cfg = write(tmp_path, "pipeline.json", '{"m-x.y": {}}')
        result = runner.invoke(main, ws_args + ["--json", "validate", cfg])
        assert result.exit_code == 1
        doc = json.loads(result.output)
        assert "E_UNKNOWN_SERVICE" in [f["code"] for f in doc["findings"]]

    def test_run_success(self, runner, ws_args, tmp_path):
        cfg = write(tmp_path, "pipeline.json", FIG_CONFIG_DOC)
        result = runner.invoke(main, ws_args + ["--json", "run", cfg])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["status"] == "success" and len(report["steps"]) == 4

    def test_run_failure_exit_1_with_report_path(self, runner, ws_args, tmp_path):
        doc = {
            "m-yfinance.compute_return": {
                "input_file_path": "dataspace/missing.csv",
                "output_file_path": "dataspace/out.csv",
            }
        }
        cfg = write(tmp_path, "pipeline.json", json.dumps(doc))
        result = runner.invoke(main, ws_args + ["run", cfg])
        assert result.exit_code == 1
        assert "report: runs/" in result.output
        assert "failed" in result.output


class TestKb:
    def test_kb_commands(self, runner, ws_args, tmp_path):
        result = runner.invoke(main, ws_args + ["kb", "list"])
        assert result.exit_code == 0 and "stock-return-visualisation" in result.output

        cfg = write(tmp_path, "pipeline.json", FIG_CONFIG_DOC)
        result = runner.invoke(main, ws_args + ["kb", "add", cfg, "--name", "My Viz"])
        assert result.exit_code == 0 and "my-viz" in result.output

        result = runner.invoke(main, ws_args + ["--json", "kb", "get", "my-viz"])
        assert result.exit_code == 0
        assert json.loads(result.output)["name"] == "My Viz"

        assert runner.invoke(main, ws_args + ["kb", "rm", "my-viz"]).exit_code == 0
        result = runner.invoke(main, ws_args + ["kb", "get", "my-viz"])
        assert result.exit_code == 1
        assert json.loads(result.stderr)["code"] == "E_NOT_FOUND"


class TestRecommend:
    def test_recommend_pipes_into_validate_and_run(self, runner, ws_args, tmp_path):
        result = runner.invoke(main, ws_args + ["recommend", QUERY, "--stub"])
        assert result.exit_code == 0
        # human output leads with the serialized config, then the explanation
        config_text = result.output.split("\n\n")[0]
        cfg = write(tmp_path, "recommended.json", config_text)
        assert runner.invoke(main, ws_args + ["validate", cfg]).exit_code == 0
        run = runner.invoke(main, ws_args + ["--json", "run", cfg])
        assert run.exit_code == 0
        assert json.loads(run.output)["status"] == "success"

    def test_recommend_json_payload(self, runner, ws_args):
        result = runner.invoke(main, ws_args + ["--json", "recommend", QUERY, "--stub"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["valid"] is True
        assert doc["retrieved"][0]["pipeline_id"] == "stock-return-visualisation"

    def test_recommend_empty_kb_exit_1(self, runner, tmp_path):
        args = ["--workspace", str(tmp_path / "empty-ws")]
        result = runner.invoke(main, args + ["recommend", "anything", "--stub"])
        assert result.exit_code == 1
        assert json.loads(result.stderr)["code"] == "E_EMPTY_KB"
