#!/usr/bin/env node
/**
 * Long-running oracle process: reads protocol lines from stdin, answers on
 * stdout, one response per request, flushed per line, until EOF.
 *
 * Usage: graph-oracle-shim --model <spec> --n-vertices <N> [--seed <S>]
 *
 * Configuration problems exit non-zero before any ready is sent. --seed is
 * accepted for interface parity with stochastic model adapters; the
 * built-in toy models are pure functions and ignore it.
 */

import { createInterface } from "node:readline";
import process from "node:process";
import { pathToFileURL } from "node:url";

import { buildModel, ModelSpecError } from "./models.js";
import { ShimSession } from "./protocol.js";

interface CliConfig {
  model: string;
  nVertices: number;
  seed: number;
}

export function parseArgs(argv: string[]): CliConfig {
  let model: string | undefined;
  let nVertices: number | undefined;
  let seed = 0;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      const value = argv[++i];
      if (value === undefined) throw new ModelSpecError(`${arg} needs a value`);
      return value;
    };
    switch (arg) {
      case "--model":
        model = next();
        break;
      case "--n-vertices":
        nVertices = Number(next());
        break;
      case "--seed":
        seed = Number(next());
        break;
      default:
        throw new ModelSpecError(`unknown argument ${arg}`);
    }
  }
  if (!model) throw new ModelSpecError("--model is required");
  if (!Number.isInteger(nVertices) || (nVertices as number) < 2) {
    throw new ModelSpecError("--n-vertices must be an integer >= 2");
  }
  return { model, nVertices: nVertices as number, seed };
}

export function main(argv: string[]): void {
  let config: CliConfig;
  try {
    config = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`graph-oracle-shim: ${(err as Error).message}\n`);
    process.exit(2);
  }

  let session: ShimSession;
  try {
    session = new ShimSession(buildModel(config.model), config.nVertices);
  } catch (err) {
    process.stderr.write(`graph-oracle-shim: ${(err as Error).message}\n`);
    process.exit(2);
  }

  const lines = createInterface({ input: process.stdin, terminal: false });
  lines.on("line", (line) => {
    if (line.trim() === "") return;
    process.stdout.write(session.handleLine(line) + "\n");
  });
  lines.on("close", () => process.exit(0));
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  main(process.argv.slice(2));
}
