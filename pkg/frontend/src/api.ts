/** Typed client for the slego HTTP API. The UI talks to the platform only
 * through these endpoints. */

export type Scalar = string | number | boolean;

export interface ParameterSpec {
  name: string;
  ptype: string;
  default: Scalar;
  role: string;
  description: string;
}

export interface Manifest {
  id: string;
  description: string;
  docstring: string;
  kind: string;
  params: ParameterSpec[];
}

export interface MicroserviceRecord {
  manifest: Manifest;
  source_ref: string;
  linked_pipelines: string[];
}

export interface FileEntry {
  path: string;
  size: number;
  modified: string;
}

export interface StepResult {
  step_key: string;
  status: string;
  started: string;
  ended: string;
  duration_ms: number;
  log_excerpt: string;
  produced_files: string[];
}

export interface RunReport {
  run_id: string;
  status: string;
  steps: StepResult[];
  error?: { step_key: string; code: string; message: string };
}

export interface Finding {
  severity: string;
  code: string;
  message: string;
  param: string;
  step_index: number | null;
}

export interface PipelineRecord {
  id: string;
  name: string;
  description: string;
  config: Record<string, Record<string, Scalar>>;
  created_at: string;
}

export interface Recommendation {
  config: Record<string, Record<string, Scalar>>;
  explanation: string;
  retrieved: { pipeline_id: string; similarity: number }[];
  valid: boolean;
}

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public findings: Finding[] = [],
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<never> {
  let code = `HTTP_${resp.status}`;
  let message = resp.statusText;
  let findings: Finding[] = [];
  try {
    const body = await resp.json();
    code = body.code ?? code;
    message = body.message ?? message;
    findings = body.findings ?? [];
  } catch {
    /* non-JSON error body; keep the HTTP status */
  }
  throw new ApiError(code, message, findings);
}

export class SlegoClient {
  constructor(private base: string = "") {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) await parseError(resp);
    return resp.json() as Promise<T>;
  }

  // -- files ---------------------------------------------------------------

  listFiles(prefix = ""): Promise<FileEntry[]> {
    const q = prefix ? `?prefix=${encodeURIComponent(prefix)}` : "";
    return this.json(`/files${q}`);
  }

  async readFile(path: string): Promise<Blob> {
    const resp = await fetch(`${this.base}/files/${path}`);
    if (!resp.ok) await parseError(resp);
    return resp.blob();
  }

  putFile(path: string, data: Blob | string): Promise<{ path: string }> {
    return this.json(`/files/${path}`, { method: "PUT", body: data });
  }

  deleteFile(path: string): Promise<{ removed: number }> {
    return this.json(`/files/${path}`, { method: "DELETE" });
  }

  // -- microservices -------------------------------------------------------

  listMicroservices(): Promise<MicroserviceRecord[]> {
    return this.json("/microservices");
  }

  registerMicroservice(
    manifestText: string,
    codeText?: string,
    replace = false,
  ): Promise<MicroserviceRecord> {
    const form = new FormData();
    form.append("manifest", new Blob([manifestText]), "manifest.json");
    if (codeText !== undefined) {
      form.append("code", new Blob([codeText]), "service.py");
    }
    const q = replace ? "?replace=true" : "";
    return this.json(`/microservices${q}`, { method: "POST", body: form });
  }

  // -- pipelines -----------------------------------------------------------

  validatePipeline(configText: string): Promise<{ findings: Finding[] }> {
    return this.json("/pipelines/validate", { method: "POST", body: configText });
  }

  runPipeline(configText: string, opts: { sandbox?: boolean; background?: boolean } = {}) {
    const params = new URLSearchParams();
    if (opts.sandbox) params.set("sandbox", "1");
    if (opts.background) params.set("async", "1");
    const q = params.size ? `?${params}` : "";
    return this.json<RunReport | { run_id: string; status: string }>(
      `/pipelines/run${q}`,
      { method: "POST", body: configText },
    );
  }

  getRun(runId: string): Promise<RunReport | { run_id: string; status: string }> {
    return this.json(`/runs/${runId}`);
  }

  /** Poll a background run until its report lands. */
  async waitForRun(runId: string, intervalMs = 1000, timeoutMs = 120000): Promise<RunReport> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const doc = await this.getRun(runId);
      if (doc.status !== "running") return doc as RunReport;
      if (Date.now() > deadline) throw new ApiError("E_TIMEOUT", `run ${runId} still running`);
      await new Promise((r) => setTimeout(r, intervalMs));
    }
  }

  // -- knowledge base ------------------------------------------------------

  listKbPipelines(): Promise<PipelineRecord[]> {
    return this.json("/kb/pipelines");
  }

  getKbPipeline(id: string): Promise<PipelineRecord> {
    return this.json(`/kb/pipelines/${id}`);
  }

  addKbPipeline(doc: {
    name: string;
    description?: string;
    config: unknown;
    id?: string;
  }): Promise<PipelineRecord> {
    return this.json("/kb/pipelines", { method: "POST", body: JSON.stringify(doc) });
  }

  updateKbPipeline(id: string, patch: Record<string, unknown>): Promise<PipelineRecord> {
    return this.json(`/kb/pipelines/${id}`, { method: "PUT", body: JSON.stringify(patch) });
  }

  deleteKbPipeline(id: string): Promise<{ removed: boolean }> {
    return this.json(`/kb/pipelines/${id}`, { method: "DELETE" });
  }

  getKbMicroservice(id: string): Promise<MicroserviceRecord> {
    return this.json(`/kb/microservices/${id}`);
  }

  updateKbMicroservice(
    id: string,
    patch: { description?: string; docstring?: string },
  ): Promise<MicroserviceRecord> {
    return this.json(`/kb/microservices/${id}`, { method: "PUT", body: JSON.stringify(patch) });
  }

  // -- recommender ---------------------------------------------------------

  recommend(query: string, partial?: unknown, stub = true): Promise<Recommendation> {
    return this.json("/recommend", {
      method: "POST",
      body: JSON.stringify({ query, partial: partial ?? null, stub }),
    });
  }
}
