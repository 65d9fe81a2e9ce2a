"""Built-in analytics microservices.

Each service is a pure function of its input files and arguments: same inputs,
byte-identical outputs.  All file arguments are workspace-relative paths; the
engine hands us the workspace and already-resolved argument values.

The model trainer is a deterministic ordinary-least-squares regressor (normal
equations with a tiny ridge fallback) so pipeline results are reproducible;
its manifest keeps the generic ``train_model`` role so a heavier trainer can
be swapped in as an exec service later.
"""

from __future__ import annotations

import html
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import SlegoError
from ..model import MicroserviceManifest, ParameterSpec
from ..workspace import Workspace


def _require_input(ws: Workspace, rel: str, code: str = "E_INPUT_MISSING") -> Path:
    p = ws.resolve(rel)
    if not p.is_file():
        raise SlegoError(code, f"input file not found: {rel!r}")
    return p


def _read_csv_text(path: Path) -> pd.DataFrame:
    # dtype=str keeps cell text verbatim; empty field == missing.
    # skip_blank_lines=False so a single-column missing row is not dropped.
    df = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    return df.fillna("")


def _write_csv(ws: Workspace, rel: str, df: pd.DataFrame) -> None:
    ws.put_file(rel, df.to_csv(index=False).encode("utf-8"))


def _require_column(df: pd.DataFrame, name: str) -> None:
    if name not in df.columns:
        raise SlegoError("E_NO_COLUMN", f"column {name!r} not found (have {list(df.columns)})")


# ---------------------------------------------------------------------------
# Importers
# ---------------------------------------------------------------------------


def import_csv_fixture(
    ws: Workspace,
    source: str,
    output_file_path: str,
    ticker: str = "",
    start_date: str = "",
    end_date: str = "",
    date_column: str = "Date",
) -> int:
    """Copy a fixture CSV into the dataspace, optionally filtered to a date range.

    When ``source`` is a directory and ``ticker`` is non-empty, the file
    ``<ticker>.csv`` (case-insensitive) inside it is selected.
    """
    if source.startswith("file://"):
        source = source[len("file://"):]
    src = ws.resolve(source)
    if src.is_dir() and ticker:
        matches = [p for p in sorted(src.iterdir()) if p.name.lower() == f"{ticker.lower()}.csv"]
        if not matches:
            raise SlegoError("E_SOURCE_MISSING", f"no fixture {ticker!r}.csv under {source!r}")
        src = matches[0]
    if not src.is_file():
        raise SlegoError("E_SOURCE_MISSING", f"source CSV not found: {source!r}")

    df = _read_csv_text(src)
    if start_date or end_date:
        if date_column not in df.columns:
            raise SlegoError("E_NO_DATE_COLUMN", f"date column {date_column!r} not in {src.name}")
        mask = pd.Series(True, index=df.index)
        if start_date:
            mask &= df[date_column] >= start_date
        if end_date:
            mask &= df[date_column] <= end_date
        df = df[mask]
    if len(df) == 0:
        raise SlegoError("E_EMPTY_RESULT", "no rows left after date filtering")
    _write_csv(ws, output_file_path, df)
    return len(df)


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------

FILL_STRATEGIES = ("ffill", "bfill", "zero", "drop")


def fill_missing_values(
    ws: Workspace,
    input_file_path: str,
    output_file_path: str,
    fill_strategy: str = "ffill",
) -> int:
    """Fill or drop missing cells (empty CSV fields)."""
    if fill_strategy not in FILL_STRATEGIES:
        raise SlegoError("E_BAD_STRATEGY", f"unknown fill_strategy {fill_strategy!r}")
    src = _require_input(ws, input_file_path)
    df = _read_csv_text(src).replace("", pd.NA)
    if fill_strategy == "ffill":
        df = df.ffill()
    elif fill_strategy == "bfill":
        df = df.bfill()
    elif fill_strategy == "zero":
        df = df.fillna("0")
    else:
        df = df.dropna()
    df = df.fillna("")
    _write_csv(ws, output_file_path, df)
    return len(df)


def compute_return(
    ws: Workspace,
    input_file_path: str = "dataspace/dataset.csv",
    output_file_path: str = "dataspace/dataset_return.csv",
    window_size: int = 20,
    target_column_name: str = "Close",
    return_column_name: str = "Return",
    keep_rows: bool = False,
) -> int:
    """Compute windowed percentage returns of a price column.

    For 0-based row t with window w: ``value_t / value_{t-w} - 1`` when t >= w,
    missing otherwise. With ``keep_rows`` false, rows whose return is missing
    are dropped.
    """
    if window_size < 1:
        raise SlegoError("E_BAD_WINDOW", f"window_size must be >= 1, got {window_size}")
    src = _require_input(ws, input_file_path)
    df = pd.read_csv(src)
    _require_column(df, target_column_name)

    values = pd.to_numeric(df[target_column_name], errors="coerce").to_numpy(dtype=float)
    n = len(values)
    ret = np.full(n, np.nan)
    if n > window_size:
        ret[window_size:] = values[window_size:] / values[:-window_size] - 1.0
    df[return_column_name] = ret
    if not keep_rows:
        df = df[~np.isnan(ret)]
    if len(df) == 0:
        raise SlegoError("E_EMPTY_RESULT", "no rows left after dropping missing returns")
    _write_csv(ws, output_file_path, df)
    return len(df)


# ---------------------------------------------------------------------------
# Visualisation
# ---------------------------------------------------------------------------

_PLOT_W, _PLOT_H, _PLOT_PAD = 800, 400, 40


def plot_series(
    ws: Workspace,
    input_file_path: str,
    x_column: str,
    y_column: str,
    output_html_file_path: str,
    title: str = "Data Plot",
    legend_title: str = "Legend",
    mode: str = "lines",
    index_col: int = 0,
) -> str:
    """Render a series as a self-contained HTML page.

    The page embeds a machine-readable plot spec (JSON in a
    ``<script type="application/json" id="plot-spec">`` block) plus an inline
    SVG polyline, so outputs are deterministic and inspectable without a
    charting runtime.
    """
    src = _require_input(ws, input_file_path)
    df = pd.read_csv(src)
    _require_column(df, x_column)
    _require_column(df, y_column)

    x = df[x_column].tolist()
    y = [float(v) for v in pd.to_numeric(df[y_column], errors="coerce").tolist()]
    spec = {"title": title, "legend_title": legend_title, "mode": mode, "x": x, "y": y}

    points = []
    n = len(y)
    finite = [v for v in y if not math.isnan(v)]
    lo, hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    span = hi - lo
    for i, v in enumerate(y):
        px = _PLOT_PAD + (0 if n <= 1 else i * (_PLOT_W - 2 * _PLOT_PAD) / (n - 1))
        if math.isnan(v):
            continue
        frac = 0.5 if span == 0 else (v - lo) / span
        py = _PLOT_H - _PLOT_PAD - frac * (_PLOT_H - 2 * _PLOT_PAD)
        points.append(f"{px:.2f},{py:.2f}")

    doc = f"""<!DOCTYPE html>
<html>
<head><meta charset="utf-8"><title>{html.escape(title)}</title></head>
<body>
<h1>{html.escape(title)}</h1>
<p>{html.escape(legend_title)}: {html.escape(y_column)} vs {html.escape(x_column)}</p>
<script type="application/json" id="plot-spec">{json.dumps(spec)}</script>
<svg width="{_PLOT_W}" height="{_PLOT_H}" viewBox="0 0 {_PLOT_W} {_PLOT_H}" xmlns="http://www.w3.org/2000/svg">
  <rect width="{_PLOT_W}" height="{_PLOT_H}" fill="white" stroke="black"/>
  <polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{' '.join(points)}"/>
</svg>
</body>
</html>
"""
    ws.put_file(output_html_file_path, doc.encode("utf-8"))
    return output_html_file_path


# ---------------------------------------------------------------------------
# Modelling
# ---------------------------------------------------------------------------


def split_dataset(
    ws: Workspace,
    input_file_path: str,
    train_output_file_path: str,
    test_output_file_path: str,
    train_fraction: float = 0.8,
) -> dict[str, int]:
    """Sequential train/test split preserving row (time) order; no shuffling."""
    if not (0 < train_fraction < 1):
        raise SlegoError("E_BAD_FRACTION", f"train_fraction must be in (0, 1), got {train_fraction}")
    src = _require_input(ws, input_file_path)
    df = _read_csv_text(src)
    n = len(df)
    if n < 2:
        raise SlegoError("E_TOO_FEW_ROWS", f"need at least 2 rows, got {n}")
    k = math.floor(n * train_fraction)
    _write_csv(ws, train_output_file_path, df.iloc[:k])
    _write_csv(ws, test_output_file_path, df.iloc[k:])
    return {"train_rows": k, "test_rows": n - k}


def _numeric_matrix(df: pd.DataFrame, columns: list[str]) -> np.ndarray:
    for c in columns:
        _require_column(df, c)
    mat = df[columns].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    if np.isnan(mat).any():
        raise SlegoError("E_NON_NUMERIC", f"non-numeric or missing values in columns {columns}")
    return mat


def fit_linear_model(
    ws: Workspace,
    input_file_path: str,
    target_column: str,
    feature_columns: str,
    model_output_file_path: str,
) -> dict:
    """Least-squares fit of target on features + intercept via normal equations.

    A ridge of 1e-9 on the Gram diagonal is applied if the system is singular.
    """
    src = _require_input(ws, input_file_path)
    df = pd.read_csv(src)
    features = [c.strip() for c in feature_columns.split(",") if c.strip()]
    X = _numeric_matrix(df, features)
    y = _numeric_matrix(df, [target_column])[:, 0]
    n, p = X.shape
    if n <= p:
        raise SlegoError("E_UNDERDETERMINED", f"{n} rows for {p} features")

    A = np.column_stack([np.ones(n), X])
    gram = A.T @ A
    rhs = A.T @ y
    try:
        beta = np.linalg.solve(gram, rhs)
        if not np.all(np.isfinite(beta)):
            raise np.linalg.LinAlgError("non-finite solution")
    except np.linalg.LinAlgError:
        beta = np.linalg.solve(gram + 1e-9 * np.eye(p + 1), rhs)

    model = {
        "intercept": float(beta[0]),
        "coefficients": {c: float(b) for c, b in zip(features, beta[1:])},
        "feature_columns": features,
        "target_column": target_column,
    }
    ws.put_file(model_output_file_path, json.dumps(model, indent=2).encode("utf-8"))
    return model


def predict_and_score(
    ws: Workspace,
    model_input_file_path: str,
    input_file_path: str,
    predictions_output_file_path: str,
    metrics_output_file_path: str,
    prediction_column: str = "Predicted",
) -> dict[str, float]:
    """Apply a stored linear model; write predictions CSV and a metrics text file.

    Metrics file holds exactly three ``key=value`` lines: mae, rmse, r2.
    r2 with a zero-variance target is 1 if all residuals are zero, else 0.
    """
    model_path = ws.resolve(model_input_file_path)
    if not model_path.is_file():
        raise SlegoError("E_MODEL_MISSING", f"model file not found: {model_input_file_path!r}")
    model = json.loads(model_path.read_text("utf-8"))
    features = model["feature_columns"]

    src = _require_input(ws, input_file_path)
    df = pd.read_csv(src)
    X = _numeric_matrix(df, features)
    y = _numeric_matrix(df, [model["target_column"]])[:, 0]
    coef = np.array([model["coefficients"][c] for c in features])
    pred = model["intercept"] + X @ coef

    resid = y - pred
    mae = float(np.mean(np.abs(resid)))
    rmse = float(math.sqrt(np.mean(resid**2)))
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    metrics = {"mae": mae, "rmse": rmse, "r2": r2}

    out = df.copy()
    out[prediction_column] = pred
    _write_csv(ws, predictions_output_file_path, out)
    ws.put_file(
        metrics_output_file_path,
        "".join(f"{k}={v!r}\n" for k, v in metrics.items()).encode("utf-8"),
    )
    return metrics


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


def _p(name, ptype, default, role="plain", description=""):
    return ParameterSpec(name=name, ptype=ptype, default=default, role=role, description=description)


def builtin_manifests() -> list[tuple[MicroserviceManifest, object]]:
    """All built-in (manifest, implementation) pairs, in catalog order."""
    return [
        (
            MicroserviceManifest(
                id="m-yfinance.import_marketdata_yahoo_csv",
                description="Import daily market data for a ticker into the shared dataspace.",
                docstring=(
                    "Import market data for a ticker from the fixture store as a CSV file.\n"
                    "Args:\n"
                    "    ticker (str): Ticker symbol selecting <ticker>.csv inside the source directory.\n"
                    "    start_date (str): Inclusive ISO start date; empty means unbounded.\n"
                    "    end_date (str): Inclusive ISO end date; empty means unbounded.\n"
                    "    source (str): Fixture file or directory to read from.\n"
                    "    date_column (str): Name of the date column used for range filtering.\n"
                    "    output_file_path (str): Path to save the imported CSV file.\n"
                    "Returns:\n"
                    "    int: Number of rows written."
                ),
                params=(
                    _p("ticker", "string", "", description="Ticker symbol, e.g. msft"),
                    _p("start_date", "string", "", description="Inclusive start date (YYYY-MM-DD)"),
                    _p("end_date", "string", "", description="Inclusive end date (YYYY-MM-DD)"),
                    _p("source", "string", "fixtures/marketdata", "input_path", "Fixture file or directory"),
                    _p("date_column", "string", "Date", description="Date column name"),
                    _p("output_file_path", "string", "dataspace/dataset.csv", "output_path", "Output CSV path"),
                ),
            ),
            import_csv_fixture,
        ),
        (
            MicroserviceManifest(
                id="m-yfinance.preprocess_filling_missing_values",
                description="Fill or drop missing values in a CSV dataset.",
                docstring=(
                    "Handle missing cells in a CSV file.\n"
                    "Args:\n"
                    "    input_file_path (str): Path to the input CSV file.\n"
                    "    output_file_path (str): Path to save the output CSV file.\n"
                    "    fill_strategy (str): One of ffill, bfill, zero, drop.\n"
                    "Returns:\n"
                    "    int: Number of rows written."
                ),
                params=(
                    _p("input_file_path", "string", "dataspace/dataset.csv", "input_path", "Input CSV path"),
                    _p("output_file_path", "string", "dataspace/dataset.csv", "output_path", "Output CSV path"),
                    _p("fill_strategy", "string", "ffill", description="ffill | bfill | zero | drop"),
                ),
            ),
            fill_missing_values,
        ),
        (
            MicroserviceManifest(
                id="m-yfinance.compute_return",
                description="Compute windowed percentage returns from a price column.",
                docstring=(
                    "Compute the daily returns of a stock based on the closing price over a "
                    "given window size.\n"
                    "Args:\n"
                    "    input_file_path (str): Path to the input CSV file.\n"
                    "    output_file_path (str): Path to save the output CSV file.\n"
                    "    window_size (int): The number of days over which to calculate the percentage change.\n"
                    "    target_column_name (str): The name of the column from which to calculate returns.\n"
                    "    return_column_name (str): The name of the new column for the calculated returns.\n"
                    "    keep_rows (bool): If False, rows containing NaN values as a result of the "
                    "calculation will be dropped.\n"
                    "Returns:\n"
                    "    int: Number of rows written."
                ),
                params=(
                    _p("input_file_path", "string", "dataspace/dataset.csv", "input_path", "Input CSV path"),
                    _p("output_file_path", "string", "dataspace/dataset_return.csv", "output_path", "Output CSV path"),
                    _p("window_size", "integer", 20, description="Return window in rows"),
                    _p("target_column_name", "string", "Close", description="Price column"),
                    _p("return_column_name", "string", "Return", description="New return column name"),
                    _p("keep_rows", "boolean", False, description="Keep rows with missing returns"),
                ),
            ),
            compute_return,
        ),
        (
            MicroserviceManifest(
                id="m-yfinance.plotly_chart",
                description="Render a column of a CSV file as an interactive HTML chart.",
                docstring=(
                    "Plot one series of a CSV file into a self-contained HTML page with an "
                    "embedded machine-readable plot spec.\n"
                    "Args:\n"
                    "    input_file_path (str): Path to the input CSV file.\n"
                    "    index_col (int): Index column position (kept for interface parity).\n"
                    "    x_column (str): Column plotted on the x axis.\n"
                    "    y_column (str): Column plotted on the y axis.\n"
                    "    title (str): Chart title.\n"
                    "    legend_title (str): Legend label.\n"
                    "    mode (str): Trace mode, e.g. lines.\n"
                    "    output_html_file_path (str): Path to save the HTML file.\n"
                    "Returns:\n"
                    "    str: The output path."
                ),
                params=(
                    _p("input_file_path", "string", "dataspace/dataset_return.csv", "input_path", "Input CSV path"),
                    _p("index_col", "integer", 0, description="Index column position"),
                    _p("x_column", "string", "Date", description="X-axis column"),
                    _p("y_column", "string", "Return", description="Y-axis column"),
                    _p("title", "string", "Data Plot", description="Chart title"),
                    _p("legend_title", "string", "Legend", description="Legend label"),
                    _p("mode", "string", "lines", description="Trace mode"),
                    _p("output_html_file_path", "string", "dataspace/dataset_plot.html", "output_path", "Output HTML path"),
                ),
            ),
            plot_series,
        ),
        (
            MicroserviceManifest(
                id="m-uci.import_airquality_uci_csv",
                description="Import the air-quality fixture dataset into the shared dataspace.",
                docstring=(
                    "Import the air-quality dataset from the fixture store as a CSV file.\n"
                    "Args:\n"
                    "    source (str): Fixture CSV to read from.\n"
                    "    start_date (str): Inclusive ISO start date; empty means unbounded.\n"
                    "    end_date (str): Inclusive ISO end date; empty means unbounded.\n"
                    "    date_column (str): Name of the date column used for range filtering.\n"
                    "    output_file_path (str): Path to save the imported CSV file.\n"
                    "Returns:\n"
                    "    int: Number of rows written."
                ),
                params=(
                    _p("source", "string", "fixtures/airquality.csv", "input_path", "Fixture CSV"),
                    _p("start_date", "string", "", description="Inclusive start date (YYYY-MM-DD)"),
                    _p("end_date", "string", "", description="Inclusive end date (YYYY-MM-DD)"),
                    _p("date_column", "string", "Date", description="Date column name"),
                    _p("output_file_path", "string", "dataspace/airquality.csv", "output_path", "Output CSV path"),
                ),
            ),
            lambda ws, **kw: import_csv_fixture(ws, **kw),
        ),
        (
            MicroserviceManifest(
                id="m-automl.split_dataset",
                description="Split a dataset sequentially into train and test CSV files.",
                docstring=(
                    "Split a CSV dataset into train and test portions preserving row order.\n"
                    "Args:\n"
                    "    input_file_path (str): Path to the input CSV file.\n"
                    "    train_output_file_path (str): Path to save the training rows.\n"
                    "    test_output_file_path (str): Path to save the test rows.\n"
                    "    train_fraction (float): Fraction of rows (floored) placed in the training file.\n"
                    "Returns:\n"
                    "    dict: train_rows and test_rows counts."
                ),
                params=(
                    _p("input_file_path", "string", "dataspace/airquality.csv", "input_path", "Input CSV path"),
                    _p("train_output_file_path", "string", "dataspace/train.csv", "output_path", "Train CSV path"),
                    _p("test_output_file_path", "string", "dataspace/test.csv", "output_path", "Test CSV path"),
                    _p("train_fraction", "number", 0.8, description="Training fraction in (0, 1)"),
                ),
            ),
            split_dataset,
        ),
        (
            MicroserviceManifest(
                id="m-automl.train_model",
                description="Train a regression model on numeric features and persist it as JSON.",
                docstring=(
                    "Train a deterministic least-squares regression model.\n"
                    "Args:\n"
                    "    input_file_path (str): Path to the training CSV file.\n"
                    "    target_column (str): Column to predict.\n"
                    "    feature_columns (str): Comma-separated numeric feature column names.\n"
                    "    model_output_file_path (str): Path to save the model JSON file.\n"
                    "Returns:\n"
                    "    dict: The fitted model (intercept and coefficients)."
                ),
                params=(
                    _p("input_file_path", "string", "dataspace/train.csv", "input_path", "Training CSV path"),
                    _p("target_column", "string", "Target", description="Target column name"),
                    _p("feature_columns", "string", "", description="Comma-separated feature columns"),
                    _p("model_output_file_path", "string", "dataspace/model.json", "output_path", "Model JSON path"),
                ),
            ),
            fit_linear_model,
        ),
        (
            MicroserviceManifest(
                id="m-automl.predict_and_score",
                description="Generate predictions from a stored model and write performance metrics.",
                docstring=(
                    "Apply a stored regression model to a dataset.\n"
                    "Args:\n"
                    "    model_input_file_path (str): Path to the model JSON file.\n"
                    "    input_file_path (str): Path to the CSV file to score.\n"
                    "    predictions_output_file_path (str): Path to save input rows plus predictions.\n"
                    "    metrics_output_file_path (str): Path to save mae/rmse/r2 metrics as key=value lines.\n"
                    "    prediction_column (str): Name of the added prediction column.\n"
                    "Returns:\n"
                    "    dict: mae, rmse and r2."
                ),
                params=(
                    _p("model_input_file_path", "string", "dataspace/model.json", "input_path", "Model JSON path"),
                    _p("input_file_path", "string", "dataspace/test.csv", "input_path", "CSV to score"),
                    _p("predictions_output_file_path", "string", "dataspace/predictions.csv", "output_path", "Predictions CSV path"),
                    _p("metrics_output_file_path", "string", "dataspace/metrics.txt", "output_path", "Metrics text path"),
                    _p("prediction_column", "string", "Predicted", description="Prediction column name"),
                ),
            ),
            predict_and_score,
        ),
    ]


BUILTINS = {m.id: (m, impl) for m, impl in builtin_manifests()}
