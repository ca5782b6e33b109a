/**
 * The classify wire protocol, one JSON object per line:
 *
 *   -> {"type":"hello","schema_version":1,"n_vertices":N}
 *   <- {"type":"ready"}
 *   -> {"type":"classify","edges":[[0,1],[2,3]]}
 *   <- {"type":"label","label":0}
 *
 * Responses are emitted strictly in request order. A malformed request gets
 * a single {"type":"error","message":...} line and the session continues;
 * only transport EOF ends it.
 */

import type { Classifier, Edge } from "./models.js";

export const SCHEMA_VERSION = 1;

type Json = { [key: string]: unknown };

function errorLine(message: string): string {
  return JSON.stringify({ type: "error", message });
}

/** Validate a classify payload into canonical edges, or explain why not. */
export function validateEdges(raw: unknown, nVertices: number): Edge[] | string {
  if (!Array.isArray(raw)) return "edges must be an array of [u, v] pairs";
  const seen = new Set<number>();
  const edges: Edge[] = [];
  for (const entry of raw) {
    if (!Array.isArray(entry) || entry.length !== 2) {
      return `edge ${JSON.stringify(entry)} is not a 2-element array`;
    }
    const [u, v] = entry;
    if (!Number.isInteger(u) || !Number.isInteger(v)) {
      return `edge [${u}, ${v}] has non-integer endpoints`;
    }
    if (u === v) return `self-loop [${u}, ${v}] is not allowed`;
    if (u > v) return `edge [${u}, ${v}] violates canonical u < v order`;
    if (u < 0 || v >= nVertices) {
      return `edge [${u}, ${v}] out of range for n_vertices=${nVertices}`;
    }
    const slot = u * nVertices + v;
    if (seen.has(slot)) return `duplicate edge [${u}, ${v}]`;
    seen.add(slot);
    edges.push([u, v]);
  }
  return edges;
}

export class ShimSession {
  private ready = false;

  constructor(
    private readonly model: Classifier,
    private readonly nVertices: number,
  ) {}

  /** Map one request line to exactly one response line. */
  handleLine(line: string): string {
    let message: Json;
    try {
      const parsed: unknown = JSON.parse(line);
      if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
        return errorLine("request must be a JSON object");
      }
      message = parsed as Json;
    } catch {
      return errorLine("request is not valid JSON");
    }

    switch (message.type) {
      case "hello": {
        if (message.schema_version !== SCHEMA_VERSION) {
          return errorLine(
            `unsupported schema_version ${String(message.schema_version)}; ` +
              `this shim speaks ${SCHEMA_VERSION}`,
          );
        }
        if (message.n_vertices !== this.nVertices) {
          return errorLine(
            `n_vertices mismatch: engine says ${String(message.n_vertices)}, ` +
              `shim is configured for ${this.nVertices}`,
          );
        }
        this.ready = true;
        return JSON.stringify({ type: "ready" });
      }
      case "classify": {
        if (!this.ready) return errorLine("classify before hello/ready handshake");
        const edges = validateEdges(message.edges, this.nVertices);
        if (typeof edges === "string") return errorLine(edges);
        return JSON.stringify({ type: "label", label: this.model.classify(edges) });
      }
      default:
        return errorLine(`unknown message type ${String(message.type)}`);
    }
  }
}
