from __future__ import annotations

import pytest

from slego.fixtures import seed_fixtures, seed_knowledge_base
from slego.platform import Platform


@pytest.fixture
def platform(tmp_path) -> Platform:
    return Platform(tmp_path / "ws")


@pytest.fixture
def seeded(platform) -> Platform:
    seed_fixtures(platform.ws)
    seed_knowledge_base(platform.kb)
    return platform


VALID_MANIFEST = {
    "id": "m-test.compute_return",
    "description": "Compute windowed returns of a price column.",
    "docstring": "Compute the daily returns of a stock based on the closing price over a given window size.",
    "kind": "builtin",
    "params": [
        {"name": "input_file_path", "ptype": "string", "default": "dataspace/dataset.csv", "role": "input_path", "description": "Input CSV"},
        {"name": "output_file_path", "ptype": "string", "default": "dataspace/out.csv", "role": "output_path", "description": "Output CSV"},
        {"name": "window_size", "ptype": "integer", "default": 20, "role": "plain", "description": "Window"},
        {"name": "target_column_name", "ptype": "string", "default": "Close", "role": "plain", "description": "Price column"},
        {"name": "return_column_name", "ptype": "string", "default": "Return", "role": "plain", "description": "Return column"},
        {"name": "keep_rows", "ptype": "boolean", "default": False, "role": "plain", "description": "Keep NaN rows"},
    ],
}

FIG_CONFIG_DOC = """{
  "m-yfinance.import_marketdata_yahoo_csv": {
    "ticker": "msft",
    "start_date": "2023-11-12",
    "end_date": "2024-11-11",
    "output_file_path": "dataspace/dataset.csv"
  },
  "m-yfinance.preprocess_filling_missing_values": {
    "input_file_path": "dataspace/dataset.csv",
    "output_file_path": "dataspace/dataset.csv",
    "fill_strategy": "ffill"
  },
  "m-yfinance.compute_return": {
    "input_file_path": "dataspace/dataset.csv",
    "output_file_path": "dataspace/dataset_return.csv",
    "window_size": 20,
    "target_column_name": "Close",
    "return_column_name": "Return",
    "keep_rows": false
  },
  "m-yfinance.plotly_chart": {
    "input_file_path": "dataspace/dataset_return.csv",
    "index_col": 0,
    "x_column": "Date",
    "y_column": "Return",
    "title": "Data Plot",
    "legend_title": "Legend",
    "mode": "lines",
    "output_html_file_path": "dataspace/dataset_plot.html"
  }
}"""


# -- acceptance reporting ----------------------------------------------------
# Acceptance tests append one "PASS/FAIL criterion N" line here; the hook
# echoes them in the terminal summary so they survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
