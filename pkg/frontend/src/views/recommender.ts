/** Recommender view: query box, optional partial pipeline, recommendation
 * details (explanation, retrieval scores, config table), and a one-click
 * "load into builder" hand-off. */

import { ApiError, Recommendation, SlegoClient } from "../api.js";
import { clear, el, errorBox } from "../dom.js";
import { fromConfig } from "../state.js";
import { BuilderView } from "./builder.js";

export class RecommenderView {
  readonly root = el("section", { class: "view" });
  lastRecommendation: Recommendation | null = null;

  private query = el("input", { type: "text", class: "query", placeholder: "describe the analysis you need" });
  private partial = el("textarea", { rows: "6", placeholder: "optional partial pipeline JSON" });
  private output = el("div", { class: "recommendation" });
  private status = el("div", { class: "status" });

  constructor(
    private client: SlegoClient,
    private builder: BuilderView,
    private onLoadIntoBuilder: () => void = () => {},
  ) {
    const ask = el("button", { class: "primary" }, "recommend");
    ask.addEventListener("click", () => void this.ask());
    this.root.append(
      el("h2", {}, "Recommender"),
      el("div", { class: "toolbar" }, this.query, ask),
      el("details", {}, el("summary", {}, "attach a partial pipeline"), this.partial),
      this.status,
      this.output,
    );
  }

  private async ask(): Promise<void> {
    clear(this.output);
    clear(this.status).append(el("div", { class: "info" }, "thinking…"));
    let partial: unknown;
    try {
      partial = this.partial.value.trim() ? JSON.parse(this.partial.value) : undefined;
    } catch (err) {
      clear(this.status).append(errorBox(`partial pipeline: ${(err as Error).message}`));
      return;
    }
    try {
      const rec = await this.client.recommend(this.query.value, partial);
      this.lastRecommendation = rec;
      clear(this.status);
      this.render(rec);
    } catch (err) {
      clear(this.status).append(
        errorBox(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err)),
      );
    }
  }

  render(rec: Recommendation): void {
    clear(this.output);
    const load = el("button", { class: "primary" }, "load into builder");
    load.addEventListener("click", () => {
      this.builder.loadState(fromConfig(rec.config));
      this.onLoadIntoBuilder();
    });

    const scores = el("table", { class: "data-table" });
    scores.append(el("tr", {}, el("th", {}, "Pipeline"), el("th", {}, "Similarity")));
    for (const hit of rec.retrieved) {
      scores.append(
        el("tr", {}, el("td", {}, hit.pipeline_id), el("td", {}, hit.similarity.toFixed(4))),
      );
    }

    const config = el("table", { class: "data-table", "data-role": "config" });
    config.append(el("tr", {}, el("th", {}, "Step"), el("th", {}, "Parameter"), el("th", {}, "Value")));
    for (const [stepKey, args] of Object.entries(rec.config)) {
      for (const [name, value] of Object.entries(args)) {
        config.append(
          el("tr", {}, el("td", {}, stepKey), el("td", {}, name), el("td", {}, JSON.stringify(value))),
        );
      }
    }

    this.output.append(
      el("p", { class: rec.valid ? "info" : "warn" }, rec.valid ? "validated" : "has validation findings"),
      el("p", { class: "explanation" }, rec.explanation),
      el("h3", {}, "Retrieval"),
      scores,
      el("h3", {}, "Recommended configuration"),
      config,
      load,
    );
  }
}
