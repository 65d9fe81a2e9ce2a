"""Deterministic fixture data and seed pipeline records.

Fixtures replace live market-data / open-dataset connectivity at desk scale:
same seed, same bytes, which the reproducibility guarantees depend on.
"""

from __future__ import annotations

import json
from datetime import date, timedelta

import numpy as np

from .model import PipelineConfig, parse_pipeline_config
from .workspace import Workspace

MARKET_ROWS = 300
MARKET_START = date(2023, 11, 12)
AIR_ROWS = 200
NOISE_SIGMA = 0.1

# true coefficients of the synthetic air-quality target
AIR_MODEL = {"intercept": 4.0, "CO": 3.0, "NO2": -0.5, "O3": 1.2}


def _market_csv(ticker_seed: int) -> bytes:
    rng = np.random.default_rng(ticker_seed)
    lines = ["Date,Open,High,Low,Close,Volume"]
    close = 100.0
    for i in range(MARKET_ROWS):
        d = MARKET_START + timedelta(days=i)
        drift = rng.normal(0.0005, 0.02)
        open_ = close
        close = round(close * (1 + drift), 2)
        hi = round(max(open_, close) * (1 + abs(rng.normal(0, 0.005))), 2)
        lo = round(min(open_, close) * (1 - abs(rng.normal(0, 0.005))), 2)
        vol = int(rng.integers(1_000_000, 5_000_000))
        lines.append(f"{d.isoformat()},{open_},{hi},{lo},{close},{vol}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _airquality_csv(noise_sigma: float, seed: int = 11) -> bytes:
    rng = np.random.default_rng(seed)
    lines = ["Date,CO,NO2,O3,Target"]
    noise = rng.normal(0, noise_sigma, AIR_ROWS) if noise_sigma > 0 else np.zeros(AIR_ROWS)
    for i in range(AIR_ROWS):
        d = date(2024, 1, 1) + timedelta(days=i)
        co = round(float(rng.uniform(0.2, 4.0)), 3)
        no2 = round(float(rng.uniform(5.0, 60.0)), 3)
        o3 = round(float(rng.uniform(10.0, 120.0)), 3)
        target = AIR_MODEL["intercept"] + AIR_MODEL["CO"] * co + AIR_MODEL["NO2"] * no2 + AIR_MODEL["O3"] * o3
        target += float(noise[i])
        lines.append(f"{d.isoformat()},{co},{no2},{o3},{target!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def seed_fixtures(ws: Workspace) -> list[str]:
    """Write all fixture files; returns the paths written."""
    written = {
        "fixtures/marketdata/msft.csv": _market_csv(7),
        "fixtures/marketdata/aapl.csv": _market_csv(13),
        "fixtures/airquality.csv": _airquality_csv(0.0),
        "fixtures/airquality_noisy.csv": _airquality_csv(NOISE_SIGMA),
    }
    for rel, data in written.items():
        ws.put_file(rel, data)
    return sorted(written)


# ---------------------------------------------------------------------------
# Case-study pipeline configurations
# ---------------------------------------------------------------------------


def visualisation_pipeline(ticker: str = "aapl", start_date: str = "", end_date: str = "") -> PipelineConfig:
    """Four-step stock-return visualisation pipeline (import, fill, return, plot)."""
    doc = {
        "m-yfinance.import_marketdata_yahoo_csv": {
            "ticker": ticker,
            "start_date": start_date,
            "end_date": end_date,
            "output_file_path": "dataspace/dataset.csv",
        },
        "m-yfinance.preprocess_filling_missing_values": {
            "input_file_path": "dataspace/dataset.csv",
            "output_file_path": "dataspace/dataset.csv",
            "fill_strategy": "ffill",
        },
        "m-yfinance.compute_return": {
            "input_file_path": "dataspace/dataset.csv",
            "output_file_path": "dataspace/dataset_return.csv",
            "window_size": 20,
            "target_column_name": "Close",
            "return_column_name": "Return",
            "keep_rows": False,
        },
        "m-yfinance.plotly_chart": {
            "input_file_path": "dataspace/dataset_return.csv",
            "index_col": 0,
            "x_column": "Date",
            "y_column": "Return",
            "title": "Data Plot",
            "legend_title": "Legend",
            "mode": "lines",
            "output_html_file_path": "dataspace/dataset_plot.html",
        },
    }
    return parse_pipeline_config(json.dumps(doc))


def forecasting_pipeline(source: str = "fixtures/airquality.csv") -> PipelineConfig:
    """Five-step forecasting pipeline (import, fill, split, train, score)."""
    doc = {
        "m-uci.import_airquality_uci_csv": {
            "source": source,
            "output_file_path": "dataspace/airquality.csv",
        },
        "m-yfinance.preprocess_filling_missing_values": {
            "input_file_path": "dataspace/airquality.csv",
            "output_file_path": "dataspace/airquality.csv",
            "fill_strategy": "ffill",
        },
        "m-automl.split_dataset": {
            "input_file_path": "dataspace/airquality.csv",
            "train_output_file_path": "dataspace/train.csv",
            "test_output_file_path": "dataspace/test.csv",
            "train_fraction": 0.8,
        },
        "m-automl.train_model": {
            "input_file_path": "dataspace/train.csv",
            "target_column": "Target",
            "feature_columns": "CO,NO2,O3",
            "model_output_file_path": "dataspace/model.json",
        },
        "m-automl.predict_and_score": {
            "model_input_file_path": "dataspace/model.json",
            "input_file_path": "dataspace/test.csv",
            "predictions_output_file_path": "dataspace/predictions.csv",
            "metrics_output_file_path": "dataspace/metrics.txt",
            "prediction_column": "Predicted",
        },
    }
    return parse_pipeline_config(json.dumps(doc))


VISUALISATION_NAME = "Stock Return Visualisation"
VISUALISATION_DESCRIPTION = (
    "Create a pipeline to visualize a stock's returns: import market data for a "
    "ticker over a date range, fill missing values, compute returns over a "
    "rolling window, and plot the return series as an interactive HTML chart."
)
FORECAST_NAME = "AutoML Air Quality Forecast"
FORECAST_DESCRIPTION = (
    "AutoML prediction pipeline for tabular market or sensor data: import a "
    "dataset, fill missing values, split into train and test sets, train a "
    "regression model, and generate predictions with performance metrics."
)


def seed_knowledge_base(kb) -> list[str]:
    """Store both case-study pipeline records; returns their ids."""
    vis = kb.upsert_pipeline_record(VISUALISATION_NAME, VISUALISATION_DESCRIPTION, visualisation_pipeline())
    fc = kb.upsert_pipeline_record(FORECAST_NAME, FORECAST_DESCRIPTION, forecasting_pipeline())
    return [vis.id, fc.id]
