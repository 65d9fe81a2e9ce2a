/** Pure builder-state logic: everything the pipeline builder does to its data
 * model, kept free of DOM so it is directly testable.
 *
 * A builder holds an ordered list of steps; each step binds one microservice
 * and a full set of argument values (seeded from manifest defaults). The
 * serialized form is the platform's pipeline-config object, with `id#k` step
 * keys disambiguating repeated services.
 */

import type { Manifest, ParameterSpec, Scalar } from "./api.js";

export interface BuilderStep {
  stepKey: string;
  serviceId: string;
  args: Record<string, Scalar>;
}

export interface BuilderState {
  steps: BuilderStep[];
}

export type Widget = "text" | "number" | "checkbox";

/** Map a declared parameter type onto an input widget. Unknown types are an
 * error — never silently a free-text field. */
export function widgetFor(ptype: string): Widget {
  switch (ptype) {
    case "string":
      return "text";
    case "integer":
    case "number":
      return "number";
    case "boolean":
      return "checkbox";
    default:
      throw new Error(`unsupported parameter type: ${ptype}`);
  }
}

/** Coerce a raw widget value to the declared type; throws on mismatch. */
export function coerceValue(ptype: string, raw: string | boolean): Scalar {
  if (ptype === "boolean") {
    if (typeof raw === "boolean") return raw;
    if (raw === "true" || raw === "false") return raw === "true";
    throw new Error(`not a boolean: ${raw}`);
  }
  if (typeof raw === "boolean") throw new Error(`expected ${ptype}, got a boolean`);
  if (ptype === "string") return raw;
  if (ptype === "integer") {
    if (!/^-?\d+$/.test(raw.trim())) throw new Error(`not an integer: ${raw}`);
    return parseInt(raw, 10);
  }
  if (ptype === "number") {
    const v = Number(raw);
    if (raw.trim() === "" || Number.isNaN(v)) throw new Error(`not a number: ${raw}`);
    return v;
  }
  throw new Error(`unsupported parameter type: ${ptype}`);
}

/** Canonical step keys: first occurrence of a service is bare, the k-th
 * repeat is `id#k`. Recomputed after every structural change. */
export function withCanonicalKeys(steps: BuilderStep[]): BuilderStep[] {
  const seen = new Map<string, number>();
  return steps.map((step) => {
    const k = seen.get(step.serviceId) ?? 0;
    seen.set(step.serviceId, k + 1);
    return { ...step, stepKey: k === 0 ? step.serviceId : `${step.serviceId}#${k}` };
  });
}

export function defaultsOf(manifest: Manifest): Record<string, Scalar> {
  const args: Record<string, Scalar> = {};
  for (const p of manifest.params) args[p.name] = p.default;
  return args;
}

export function addStep(state: BuilderState, manifest: Manifest): BuilderState {
  const step: BuilderStep = {
    stepKey: manifest.id,
    serviceId: manifest.id,
    args: defaultsOf(manifest),
  };
  return { steps: withCanonicalKeys([...state.steps, step]) };
}

export function removeStep(state: BuilderState, index: number): BuilderState {
  const steps = state.steps.filter((_, i) => i !== index);
  return { steps: withCanonicalKeys(steps) };
}

export function moveStep(state: BuilderState, index: number, delta: number): BuilderState {
  const target = index + delta;
  if (target < 0 || target >= state.steps.length) return state;
  const steps = [...state.steps];
  [steps[index], steps[target]] = [steps[target], steps[index]];
  return { steps: withCanonicalKeys(steps) };
}

export function setArg(
  state: BuilderState,
  index: number,
  spec: ParameterSpec,
  raw: string | boolean,
): BuilderState {
  const value = coerceValue(spec.ptype, raw);
  const steps = state.steps.map((s, i) =>
    i === index ? { ...s, args: { ...s.args, [spec.name]: value } } : s,
  );
  return { steps };
}

/** Serialize to the pipeline-config object consumed by the API. */
export function toConfig(state: BuilderState): Record<string, Record<string, Scalar>> {
  const doc: Record<string, Record<string, Scalar>> = {};
  for (const step of withCanonicalKeys(state.steps)) {
    doc[step.stepKey] = { ...step.args };
  }
  return doc;
}

export function toConfigText(state: BuilderState): string {
  return JSON.stringify(toConfig(state), null, 2);
}

function serviceIdOf(stepKey: string): string {
  const hash = stepKey.lastIndexOf("#");
  return hash === -1 ? stepKey : stepKey.slice(0, hash);
}

/** Rebuild builder state from a config object (e.g. the raw-JSON editor or a
 * recommendation). Values are kept exactly; manifests only steer widget
 * rendering later. */
export function fromConfig(doc: Record<string, Record<string, Scalar>>): BuilderState {
  const steps: BuilderStep[] = Object.entries(doc).map(([stepKey, args]) => ({
    stepKey,
    serviceId: serviceIdOf(stepKey),
    args: { ...args },
  }));
  return { steps: withCanonicalKeys(steps) };
}

/** Parse raw-JSON editor text into builder state; the editor is authoritative
 * when applied. Throws with a readable message on bad input. */
export function applyJsonText(text: string): BuilderState {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new Error(`invalid JSON: ${(err as Error).message}`);
  }
  if (doc === null || typeof doc !== "object" || Array.isArray(doc)) {
    throw new Error("pipeline config must be a JSON object of steps");
  }
  for (const [key, args] of Object.entries(doc as Record<string, unknown>)) {
    if (args === null || typeof args !== "object" || Array.isArray(args)) {
      throw new Error(`step ${key}: arguments must be an object`);
    }
    for (const [name, value] of Object.entries(args as Record<string, unknown>)) {
      const t = typeof value;
      if (t !== "string" && t !== "number" && t !== "boolean") {
        throw new Error(`step ${key}: argument ${name} must be a scalar`);
      }
    }
  }
  return fromConfig(doc as Record<string, Record<string, Scalar>>);
}

export function statesEqual(a: BuilderState, b: BuilderState): boolean {
  return JSON.stringify(toConfig(a)) === JSON.stringify(toConfig(b));
}
