// @vitest-environment jsdom
//
// Integration tests against a live platform server running in stub mode.
// Covers the end-to-end UI flow: composing the case-study pipeline from
// dropdown selections, running it to a 4-step success report, and loading a
// recommendation into the builder with exact parameter fidelity.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, SlegoClient } from "../src/api.js";
import { toConfig } from "../src/state.js";
import { BuilderView } from "../src/views/builder.js";
import { FileManagerView } from "../src/views/files.js";
import { KbEditorView } from "../src/views/kb.js";
import { RecommenderView } from "../src/views/recommender.js";

const PORT = 8900 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
const QUERY = "Create a pipeline to visualize AAPL's stock returns for the last 5 years.";

const FIG7_SERVICES = [
  "m-yfinance.import_marketdata_yahoo_csv",
  "m-yfinance.preprocess_filling_missing_values",
  "m-yfinance.compute_return",
  "m-yfinance.plotly_chart",
];

let server: ChildProcess;
const client = new SlegoClient(BASE);

async function waitFor<T>(probe: () => T | null | undefined, timeoutMs = 30000, what = "condition"): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const value = probe();
    if (value) return value;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 100));
  }
}

beforeAll(async () => {
  const workspace = mkdtempSync(join(tmpdir(), "slego-ui-"));
  server = spawn(
    "python3",
    ["-m", "slego.cli", "--workspace", workspace, "serve", "--seed", "--port", String(PORT)],
    { stdio: "ignore" },
  );
  const deadline = Date.now() + 30000;
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/health`);
      if (resp.ok) break;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("server did not come up");
    await new Promise((r) => setTimeout(r, 200));
  }
});

afterAll(() => {
  server?.kill();
});

function clickButton(root: HTMLElement, label: string): void {
  const button = [...root.querySelectorAll("button")].find((b) => b.textContent === label);
  if (!button) throw new Error(`no button labelled ${label}`);
  button.click();
}

function setField(card: Element, paramName: string, value: string): void {
  const field = [...card.querySelectorAll("label.field")].find((l) =>
    l.querySelector("span")?.textContent?.startsWith(`${paramName} `),
  );
  if (!field) throw new Error(`no field for ${paramName}`);
  const input = field.querySelector("input")!;
  input.value = value;
  input.dispatchEvent(new Event("change"));
}

describe("file manager", () => {
  it("lists, uploads and deletes workspace files", async () => {
    await client.putFile("dataspace/hello.txt", "hello\n");
    const view = new FileManagerView(client);
    await view.refresh();
    expect(view.root.textContent).toContain("dataspace/hello.txt");

    expect((await client.deleteFile("dataspace/hello.txt")).removed).toBe(1);
    await view.refresh();
    expect(view.root.textContent).not.toContain("dataspace/hello.txt");
  });

  it("surfaces API errors with their codes", async () => {
    await expect(client.readFile("dataspace/missing.bin")).rejects.toMatchObject({
      code: "E_NOT_FOUND",
    });
    const err = await client.validatePipeline("{oops").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("E_SYNTAX");
  });
});

describe("builder flow (case study)", () => {
  it("composes the visualisation pipeline from dropdowns and runs it", async () => {
    const builder = new BuilderView(client);
    await builder.init();

    const picker = builder.root.querySelector("select")!;
    for (const serviceId of FIG7_SERVICES) {
      picker.value = serviceId;
      clickButton(builder.root, "add step");
    }

    // defaults are pre-filled from the manifests; only the ticker is typed in
    const cards = builder.root.querySelectorAll(".step-card");
    expect(cards).toHaveLength(4);
    expect(builder.state.steps[2].args.window_size).toBe(20);
    expect(builder.state.steps[1].args.fill_strategy).toBe("ffill");
    setField(cards[0], "ticker", "msft");

    // the JSON editor mirrors the form state
    const mirrored = JSON.parse(
      (builder.root.querySelector(".json-editor") as HTMLTextAreaElement).value,
    );
    expect(Object.keys(mirrored)).toEqual(FIG7_SERVICES);
    expect(mirrored[FIG7_SERVICES[0]].ticker).toBe("msft");

    clickButton(builder.root, "run pipeline");
    const table = await waitFor(
      () => builder.root.querySelector('[data-role="run-report"]'),
      45000,
      "run report",
    );
    expect(builder.root.textContent).toContain("success");
    const rows = [...table.querySelectorAll("tr")].slice(1);
    expect(rows).toHaveLength(4);
    for (const row of rows) {
      expect(row.children[1].textContent).toBe("success");
    }
    expect(rows.map((r) => r.children[0].textContent)).toEqual(FIG7_SERVICES);
  });

  it("keeps the JSON editor authoritative on apply", async () => {
    const builder = new BuilderView(client);
    await builder.init();
    const editor = builder.root.querySelector(".json-editor") as HTMLTextAreaElement;
    editor.value = JSON.stringify({ "m-yfinance.compute_return": { window_size: 7 } });
    clickButton(builder.root, "apply JSON");
    expect(builder.state.steps).toHaveLength(1);
    expect(builder.state.steps[0].args.window_size).toBe(7);
    // bad JSON is rejected with a visible error and no state change
    editor.value = "{broken";
    clickButton(builder.root, "apply JSON");
    expect(builder.state.steps).toHaveLength(1);
    expect(builder.root.querySelector(".error-box")?.textContent).toContain("invalid JSON");
  });
});

describe("recommender flow", () => {
  it("renders a recommendation and loads it into the builder exactly", async () => {
    const builder = new BuilderView(client);
    await builder.init();
    const view = new RecommenderView(client, builder);

    (view.root.querySelector("input.query") as HTMLInputElement).value = QUERY;
    clickButton(view.root, "recommend");
    await waitFor(() => view.root.querySelector('[data-role="config"]'), 30000, "recommendation");

    // deterministic stub: the view's result equals a direct API call
    const direct = await client.recommend(QUERY);
    expect(view.lastRecommendation?.valid).toBe(true);
    expect(view.lastRecommendation?.config).toEqual(direct.config);
    expect(view.root.textContent).toContain("stock-return-visualisation");

    clickButton(view.root, "load into builder");
    expect(toConfig(builder.state)).toEqual(direct.config);
  });
});

describe("knowledge-base editor", () => {
  it("persists description edits and feeds later retrieval", async () => {
    const view = new KbEditorView(client);
    await view.refresh();
    expect(view.root.textContent).toContain("stock-return-visualisation");

    const updated = await client.updateKbPipeline("automl-air-quality-forecast", {
      description: "Forecast air quality with a trained regression model.",
    });
    expect(updated.description).toContain("Forecast air quality");
    const reread = await client.getKbPipeline("automl-air-quality-forecast");
    expect(reread.description).toBe(updated.description);

    // a stored pipeline matching the query verbatim is retrieved first
    const added = await client.addKbPipeline({
      name: "Bespoke Widget Frobnication",
      description: "frobnicate the widgets thoroughly",
      config: { "m-yfinance.compute_return": {} },
    });
    const rec = await client.recommend("Bespoke Widget Frobnication frobnicate the widgets thoroughly");
    expect(rec.retrieved[0].pipeline_id).toBe(added.id);
    await client.deleteKbPipeline(added.id);
  });
});
