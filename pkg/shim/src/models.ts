/**
 * Built-in toy classifiers, so cross-ecosystem integration tests need no
 * trained model artifacts. A model spec is a single string:
 *
 *   edge-count-threshold:10
 *   contrast-linear:s1=0-3,s2=4-7,m=1,c=0,side=above
 *
 * Any callable mapping an edge list to 0|1 can be wrapped as a Classifier;
 * the toy models are pure functions, so determinism is structural.
 */

export type Edge = [number, number];

export interface Classifier {
  readonly name: string;
  classify(edges: Edge[]): 0 | 1;
}

export class ModelSpecError extends Error {}

/** Parse "0-3,7,9-11" style vertex-set specs into a sorted unique list. */
export function parseVertexSet(spec: string): number[] {
  const out = new Set<number>();
  for (const part of spec.split(/[,+]/)) {
    const trimmed = part.trim();
    if (!trimmed) continue;
    const range = trimmed.match(/^(\d+)-(\d+)$/);
    if (range) {
      const lo = Number(range[1]);
      const hi = Number(range[2]);
      if (hi < lo) throw new ModelSpecError(`empty vertex range: ${trimmed}`);
      for (let v = lo; v <= hi; v++) out.add(v);
    } else if (/^\d+$/.test(trimmed)) {
      out.add(Number(trimmed));
    } else {
      throw new ModelSpecError(`bad vertex set element: ${trimmed}`);
    }
  }
  if (out.size === 0) throw new ModelSpecError(`empty vertex set: ${spec}`);
  return [...out].sort((a, b) => a - b);
}

export function edgeCountThreshold(threshold: number): Classifier {
  if (!Number.isInteger(threshold) || threshold < 0) {
    throw new ModelSpecError(`threshold must be a non-negative integer, got ${threshold}`);
  }
  return {
    name: `edge-count-threshold:${threshold}`,
    classify: (edges) => (edges.length >= threshold ? 1 : 0),
  };
}

export interface ContrastLinearParams {
  s1: number[]; // induced edge count is the y coordinate
  s2: number[]; // induced edge count is the x coordinate
  m: number;
  c: number;
  side: "above" | "below";
}

/**
 * Induced-subgraph-density linear rule: embed a graph as
 * (x, y) = (edges within s2, edges within s1) and label 1 iff the point
 * lies strictly inside the positive open half-plane of y = m*x + c.
 * Points exactly on the line classify as 0.
 */
export function contrastLinear(params: ContrastLinearParams): Classifier {
  const inS1 = new Set(params.s1);
  const inS2 = new Set(params.s2);
  if (inS1.size === 0 || inS2.size === 0) {
    throw new ModelSpecError("both contrast vertex sets must be non-empty");
  }
  if (!Number.isFinite(params.m) || params.m === 0) {
    throw new ModelSpecError(`slope must be finite and non-zero, got ${params.m}`);
  }
  return {
    name:
      `contrast-linear:s1=${params.s1.join("+")},s2=${params.s2.join("+")},` +
      `m=${params.m},c=${params.c},side=${params.side}`,
    classify: (edges) => {
      let x = 0;
      let y = 0;
      for (const [u, v] of edges) {
        if (inS1.has(u) && inS1.has(v)) y += 1;
        if (inS2.has(u) && inS2.has(v)) x += 1;
      }
      const side = y - (params.m * x + params.c);
      const positive = params.side === "above" ? side > 0 : side < 0;
      return positive ? 1 : 0;
    },
  };
}

export function buildModel(spec: string): Classifier {
  const colon = spec.indexOf(":");
  const kind = colon < 0 ? spec : spec.slice(0, colon);
  const rest = colon < 0 ? "" : spec.slice(colon + 1);
  if (kind === "edge-count-threshold") {
    if (!/^\d+$/.test(rest)) {
      throw new ModelSpecError(`edge-count-threshold needs a count, got ${spec}`);
    }
    return edgeCountThreshold(Number(rest));
  }
  if (kind === "contrast-linear") {
    const fields = new Map<string, string>();
    for (const part of rest.split(",")) {
      const eq = part.indexOf("=");
      if (eq < 0) throw new ModelSpecError(`expected key=value, got ${part}`);
      fields.set(part.slice(0, eq).trim(), part.slice(eq + 1).trim());
    }
    for (const key of ["s1", "s2", "m", "c"]) {
      if (!fields.has(key)) throw new ModelSpecError(`contrast-linear needs ${key}=`);
    }
    const side = fields.get("side") ?? "above";
    if (side !== "above" && side !== "below") {
      throw new ModelSpecError(`side must be above or below, got ${side}`);
    }
    return contrastLinear({
      s1: parseVertexSet(fields.get("s1")!),
      s2: parseVertexSet(fields.get("s2")!),
      m: Number(fields.get("m")),
      c: Number(fields.get("c")),
      side,
    });
  }
  throw new ModelSpecError(
    `unknown model ${kind}; use edge-count-threshold:<n> or contrast-linear:...`,
  );
}
