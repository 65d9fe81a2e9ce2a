/** Knowledge-base editor: table of pipeline records with editable
 * descriptions (server recomputes embeddings on save) and a text editor for
 * microservice descriptions/docstrings. */

import { ApiError, SlegoClient } from "../api.js";
import { clear, el, errorBox } from "../dom.js";

export class KbEditorView {
  readonly root = el("section", { class: "view" });
  private status = el("div", { class: "status" });

  constructor(private client: SlegoClient) {}

  async refresh(): Promise<void> {
    clear(this.root);
    this.root.append(el("h2", {}, "Knowledge base"), this.status);
    try {
      this.root.append(
        el("h3", {}, "Pipelines"),
        await this.buildPipelineTable(),
        el("h3", {}, "Microservices"),
        await this.buildMicroserviceEditor(),
      );
    } catch (err) {
      this.showError(err);
    }
  }

  private async buildPipelineTable(): Promise<HTMLElement> {
    const records = await this.client.listKbPipelines();
    const table = el("table", { class: "data-table" });
    table.append(
      el("tr", {}, el("th", {}, "Id"), el("th", {}, "Name"), el("th", {}, "Description"), el("th", {}, "")),
    );
    for (const rec of records) {
      const description = el("input", { type: "text", class: "wide" });
      description.value = rec.description;
      const save = el("button", {}, "save");
      save.addEventListener("click", async () => {
        try {
          await this.client.updateKbPipeline(rec.id, { description: description.value });
          clear(this.status).append(el("div", { class: "info" }, `saved ${rec.id}`));
        } catch (err) {
          this.showError(err);
        }
      });
      const drop = el("button", { class: "danger" }, "delete");
      drop.addEventListener("click", async () => {
        try {
          await this.client.deleteKbPipeline(rec.id);
          await this.refresh();
        } catch (err) {
          this.showError(err);
        }
      });
      table.append(
        el("tr", {}, el("td", {}, rec.id), el("td", {}, rec.name), el("td", {}, description), el("td", {}, save, " ", drop)),
      );
    }
    return table;
  }

  private async buildMicroserviceEditor(): Promise<HTMLElement> {
    const records = await this.client.listMicroservices();
    const picker = el("select", {});
    for (const rec of records) picker.append(el("option", { value: rec.manifest.id }, rec.manifest.id));
    const description = el("input", { type: "text", class: "wide" });
    const docstring = el("textarea", { rows: "5", class: "wide" });

    const fill = () => {
      const rec = records.find((r) => r.manifest.id === picker.value);
      description.value = rec?.manifest.description ?? "";
      docstring.value = rec?.manifest.docstring ?? "";
    };
    picker.addEventListener("change", fill);
    fill();

    const save = el("button", {}, "save");
    save.addEventListener("click", async () => {
      try {
        await this.client.updateKbMicroservice(picker.value, {
          description: description.value,
          docstring: docstring.value,
        });
        clear(this.status).append(el("div", { class: "info" }, `saved ${picker.value}`));
      } catch (err) {
        this.showError(err);
      }
    });
    return el(
      "div",
      { class: "kb-service-editor" },
      el("label", { class: "field" }, el("span", {}, "service"), picker),
      el("label", { class: "field" }, el("span", {}, "description"), description),
      el("label", { class: "field" }, el("span", {}, "docstring"), docstring),
      save,
    );
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
