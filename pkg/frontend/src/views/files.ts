/** Data management area: list, upload, download, delete workspace files. */

import { ApiError, SlegoClient } from "../api.js";
import { clear, el, errorBox } from "../dom.js";

export class FileManagerView {
  readonly root = el("section", { class: "view" });
  private status = el("div", { class: "status" });

  constructor(private client: SlegoClient) {}

  async refresh(): Promise<void> {
    clear(this.root);
    this.root.append(el("h2", {}, "Files"), this.buildUploadRow(), this.status);
    try {
      const entries = await this.client.listFiles();
      const table = el("table", { class: "data-table" });
      table.append(
        el("tr", {}, el("th", {}, "Path"), el("th", {}, "Size"), el("th", {}, "Modified"), el("th", {}, "")),
      );
      for (const entry of entries) {
        const download = el("a", { href: `/files/${entry.path}`, download: entry.path }, "download");
        const remove = el("button", { class: "danger" }, "delete");
        remove.addEventListener("click", async () => {
          try {
            await this.client.deleteFile(entry.path);
            await this.refresh();
          } catch (err) {
            this.showError(err);
          }
        });
        table.append(
          el(
            "tr",
            {},
            el("td", {}, entry.path),
            el("td", {}, String(entry.size)),
            el("td", {}, entry.modified),
            el("td", {}, download, " ", remove),
          ),
        );
      }
      this.root.append(entries.length ? table : el("p", { class: "empty" }, "workspace is empty"));
    } catch (err) {
      this.showError(err);
    }
  }

  private buildUploadRow(): HTMLElement {
    const picker = el("input", { type: "file" });
    const dest = el("input", { type: "text", placeholder: "dataspace/filename.csv" });
    const upload = el("button", {}, "upload");
    upload.addEventListener("click", async () => {
      const file = picker.files?.[0];
      if (!file) return this.showError(new Error("choose a file first"));
      const path = dest.value.trim() || `dataspace/${file.name}`;
      try {
        await this.client.putFile(path, file);
        await this.refresh();
      } catch (err) {
        this.showError(err);
      }
    });
    return el("div", { class: "toolbar" }, picker, dest, upload);
  }

  private showError(err: unknown): void {
    clear(this.status).append(
      errorBox(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err)),
    );
  }
}
