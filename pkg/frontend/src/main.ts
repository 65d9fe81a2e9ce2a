/** Application shell: one tab per area, all talking to the same API client. */

import { SlegoClient } from "./api.js";
import { clear, el } from "./dom.js";
import { BuilderView } from "./views/builder.js";
import { FileManagerView } from "./views/files.js";
import { KbEditorView } from "./views/kb.js";
import { RecommenderView } from "./views/recommender.js";

export function mountApp(root: HTMLElement, client = new SlegoClient()): void {
  const files = new FileManagerView(client);
  const builder = new BuilderView(client);
  const kb = new KbEditorView(client);

  const tabs: { label: string; view: { root: HTMLElement }; activate: () => void }[] = [];
  const show = (index: number) => {
    clear(content).append(tabs[index].view.root);
    nav.querySelectorAll("button").forEach((b, i) => b.classList.toggle("active", i === index));
    tabs[index].activate();
  };

  const recommender = new RecommenderView(client, builder, () => show(1));
  tabs.push(
    { label: "Files", view: files, activate: () => void files.refresh() },
    { label: "Builder", view: builder, activate: () => void builder.init() },
    { label: "Recommender", view: recommender, activate: () => {} },
    { label: "Knowledge base", view: kb, activate: () => void kb.refresh() },
  );

  const nav = el("nav", { class: "tabs" });
  tabs.forEach((tab, index) => {
    const button = el("button", {}, tab.label);
    button.addEventListener("click", () => show(index));
    nav.append(button);
  });
  const content = el("main", { class: "content" });
  clear(root).append(el("header", {}, el("h1", {}, "slego")), nav, content);
  show(0);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mountApp(document.getElementById("app")!);
}
