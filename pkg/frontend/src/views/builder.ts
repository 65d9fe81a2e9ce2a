/** Pipeline builder: microservice selection panel, per-step parameter forms
 * generated from manifests, a two-way raw-JSON editor (authoritative on
 * "apply"), and run controls with a per-step report. */

import { ApiError, Manifest, RunReport, SlegoClient } from "../api.js";
import { clear, el, errorBox } from "../dom.js";
import {
  addStep,
  applyJsonText,
  BuilderState,
  moveStep,
  removeStep,
  setArg,
  toConfigText,
  widgetFor,
} from "../state.js";

export class BuilderView {
  readonly root = el("section", { class: "view" });
  state: BuilderState = { steps: [] };

  private manifests = new Map<string, Manifest>();
  private stepsBox = el("div", { class: "steps" });
  private jsonBox = el("textarea", { class: "json-editor", rows: "14" });
  private reportBox = el("div", { class: "report" });
  private status = el("div", { class: "status" });
  private picker = el("select", {});

  constructor(private client: SlegoClient) {}

  async init(): Promise<void> {
    clear(this.root);
    const records = await this.client.listMicroservices();
    this.manifests = new Map(records.map((r) => [r.manifest.id, r.manifest]));

    clear(this.picker);
    for (const id of this.manifests.keys()) {
      this.picker.append(el("option", { value: id }, id));
    }
    const add = el("button", {}, "add step");
    add.addEventListener("click", () => {
      const manifest = this.manifests.get(this.picker.value);
      if (manifest) this.setState(addStep(this.state, manifest));
    });

    const apply = el("button", {}, "apply JSON");
    apply.addEventListener("click", () => {
      try {
        this.setState(applyJsonText(this.jsonBox.value));
        clear(this.status);
      } catch (err) {
        this.showError(err);
      }
    });

    const sandbox = el("input", { type: "checkbox", id: "sandbox-toggle" });
    const run = el("button", { class: "primary" }, "run pipeline");
    run.addEventListener("click", () => void this.run(sandbox.checked));

    this.root.append(
      el("h2", {}, "Pipeline builder"),
      el("div", { class: "toolbar" }, this.picker, add),
      this.stepsBox,
      el("h3", {}, "Configuration JSON"),
      this.jsonBox,
      el(
        "div",
        { class: "toolbar" },
        apply,
        run,
        el("label", { for: "sandbox-toggle" }, sandbox, " sandbox"),
      ),
      this.status,
      this.reportBox,
    );
    this.renderSteps();
  }

  /** Inject a config (e.g. from the recommender) and re-render the forms. */
  loadState(state: BuilderState): void {
    this.setState(state);
  }

  private setState(state: BuilderState): void {
    this.state = state;
    this.renderSteps();
  }

  private renderSteps(): void {
    clear(this.stepsBox);
    this.jsonBox.value = toConfigText(this.state);
    this.state.steps.forEach((step, index) => {
      const head = el("div", { class: "step-head" }, el("strong", {}, step.stepKey));
      for (const [label, delta] of [["up", -1], ["down", 1]] as const) {
        const btn = el("button", {}, label);
        btn.addEventListener("click", () => this.setState(moveStep(this.state, index, delta)));
        head.append(btn);
      }
      const drop = el("button", { class: "danger" }, "remove");
      drop.addEventListener("click", () => this.setState(removeStep(this.state, index)));
      head.append(drop);

      const form = el("div", { class: "step-form" });
      const manifest = this.manifests.get(step.serviceId);
      if (!manifest) {
        form.append(errorBox(`unknown service: ${step.serviceId}`));
      } else {
        for (const spec of manifest.params) {
          form.append(this.buildField(index, spec.name, step.args[spec.name]));
        }
      }
      this.stepsBox.append(el("div", { class: "step-card" }, head, form));
    });
  }

  private buildField(index: number, name: string, value: unknown): HTMLElement {
    const step = this.state.steps[index];
    const manifest = this.manifests.get(step.serviceId)!;
    const spec = manifest.params.find((p) => p.name === name)!;
    const widget = widgetFor(spec.ptype);

    let input: HTMLInputElement;
    if (widget === "checkbox") {
      input = el("input", { type: "checkbox" });
      input.checked = value === true;
    } else {
      input = el("input", { type: widget === "number" ? "number" : "text" });
      input.value = String(value ?? "");
      if (spec.ptype === "number") input.step = "any";
    }
    input.addEventListener("change", () => {
      try {
        const raw = widget === "checkbox" ? input.checked : input.value;
        this.state = setArg(this.state, index, spec, raw);
        this.jsonBox.value = toConfigText(this.state);
        clear(this.status);
      } catch (err) {
        this.showError(err);
      }
    });
    return el(
      "label",
      { class: "field", title: spec.description },
      el("span", {}, `${spec.name} (${spec.ptype})`),
      input,
    );
  }

  private async run(sandbox: boolean): Promise<void> {
    clear(this.reportBox);
    clear(this.status).append(el("div", { class: "info" }, "running…"));
    try {
      const started = await this.client.runPipeline(this.jsonBox.value, {
        sandbox,
        background: true,
      });
      const report = await this.client.waitForRun(started.run_id);
      clear(this.status);
      this.renderReport(report);
    } catch (err) {
      clear(this.status);
      this.showError(err);
    }
  }

  renderReport(report: RunReport): void {
    clear(this.reportBox);
    this.reportBox.append(
      el("h3", {}, `Run ${report.run_id}: ${report.status}`),
    );
    const table = el("table", { class: "data-table", "data-role": "run-report" });
    table.append(
      el("tr", {}, el("th", {}, "Step"), el("th", {}, "Status"), el("th", {}, "Duration"), el("th", {}, "Produced")),
    );
    for (const step of report.steps) {
      table.append(
        el(
          "tr",
          { class: `step-${step.status}` },
          el("td", {}, step.step_key),
          el("td", {}, step.status),
          el("td", {}, `${step.duration_ms} ms`),
          el("td", {}, step.produced_files.join(", ")),
        ),
      );
    }
    this.reportBox.append(table);
    if (report.error) {
      this.reportBox.append(errorBox(`${report.error.code} in ${report.error.step_key}: ${report.error.message}`));
    }
  }

  private showError(err: unknown): void {
    const rendered =
      err instanceof ApiError
        ? `${err.code}: ${err.message}` +
          (err.findings.length ? "\n" + err.findings.map((f) => `[${f.code}] ${f.message}`).join("\n") : "")
        : String(err);
    clear(this.status).append(errorBox(rendered));
  }
}
