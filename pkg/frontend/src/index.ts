/**
 * Client for the betti-match CLI: loss/gradient and metric queries on
 * in-memory arrays, for use as a loss term in training loops.
 *
 * Pure marshalling: arrays go to the CLI as .npy files, results come back
 * as the CLI's JSON reports and gradient .npy, so every value is exactly
 * what the CLI produces.  The executable is resolved from BETTI_MATCH_CLI
 * (split on spaces, e.g. "python3 -m bettimatch.cli") or found on PATH as
 * `betti-match`.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, mkdirSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { Matrix, readNpy, toMatrix, toNested, writeNpy } from "./npy.js";

export type Image = ReadonlyArray<ReadonlyArray<number>>;

export interface MatchingOptions {
  /** sweep direction; bothlevel sums both (loss only). default superlevel */
  filtration?: "sublevel" | "superlevel" | "bothlevel";
  /** pixels as vertices ("v", default) or as squares ("t") */
  construction?: "v" | "t";
  /** pad with a one-pixel frame that enters the filtration first */
  relative?: boolean;
}

export interface LossTerms {
  matched: number;
  unmatched_pred: number;
  unmatched_gt: number;
}

export interface LossLevel {
  filtration: string;
  total: number;
  dims: Record<"0" | "1", LossTerms>;
  essential: LossTerms;
}

export interface LossAndGrad {
  loss: number;
  /** d(loss)/d(pred) per pixel, shaped like the prediction */
  grad: number[][];
  /** per-direction, per-dimension breakdown of the loss terms */
  levels: LossLevel[];
}

export interface DimCounts {
  dim0: number;
  dim1: number;
  total: number;
}

export interface Metrics {
  tauErr: DimCounts;
  betaErr: DimCounts;
  wassersteinLoss: number;
  bettiMatchingLoss: number;
  dice: number;
  accuracy: number;
  matchingPrecision: number;
}

function cliCommand(): string[] {
  const env = process.env.BETTI_MATCH_CLI;
  return env && env.trim().length > 0 ? env.trim().split(/\s+/) : ["betti-match"];
}

function runCli(args: string[]): string {
  const [cmd, ...pre] = cliCommand();
  const res = spawnSync(cmd, [...pre, ...args], {
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (res.error) {
    throw new Error(`failed to run ${cmd}: ${res.error.message}`);
  }
  if (res.status !== 0) {
    const detail = (res.stderr ?? "").trim() || `exit code ${res.status}`;
    throw new Error(`betti-match failed: ${detail}`);
  }
  return res.stdout;
}

function checkPair(pred: Matrix, gt: Matrix): void {
  if (pred.rows !== gt.rows || pred.cols !== gt.cols) {
    throw new Error(
      `image shapes differ: (${pred.rows}, ${pred.cols}) vs (${gt.rows}, ${gt.cols})`,
    );
  }
}

function checkBinary(m: Matrix, name: string): void {
  for (const v of m.data) {
    if (v !== 0 && v !== 1) {
      throw new Error(`${name} must contain only 0 and 1`);
    }
  }
}

function optionFlags(opts: MatchingOptions): string[] {
  const flags = [
    "--filtration", opts.filtration ?? "superlevel",
    "--construction", opts.construction ?? "v",
  ];
  if (opts.relative) {
    flags.push("--relative");
  }
  return flags;
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "betti-match-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/**
 * Matching loss of a prediction against a ground truth, with its exact
 * per-pixel gradient.  Values are bit-identical to `betti-match loss --grad`.
 */
export function lossAndGrad(pred: Image, gt: Image, opts: MatchingOptions = {}): LossAndGrad {
  const p = toMatrix(pred);
  const g = toMatrix(gt);
  checkPair(p, g);
  return withTempDir((dir) => {
    const predPath = join(dir, "pred.npy");
    const gtPath = join(dir, "gt.npy");
    const gradPath = join(dir, "grad.npy");
    writeFileSync(predPath, writeNpy(p));
    writeFileSync(gtPath, writeNpy(g));
    const out = runCli([
      "loss", predPath, gtPath, "--grad", gradPath, ...optionFlags(opts),
    ]);
    const report = JSON.parse(out) as { loss: number; levels: LossLevel[] };
    return {
      loss: report.loss,
      grad: toNested(readNpy(readFileSync(gradPath))),
      levels: report.levels,
    };
  });
}

interface EvalPair {
  beta_err_0: number;
  beta_err_1: number;
  beta_err: number;
  tau_err_0: number;
  tau_err_1: number;
  tau_err: number;
  wasserstein_loss: number;
  betti_matching_loss: number;
  dice: number;
  accuracy: number;
  matching_precision: number;
}

/**
 * Full metric set for one binary pair, exactly as `betti-match eval`
 * reports it.  `filtration: "bothlevel"` is not a metric direction and is
 * rejected, matching the CLI.
 */
export function metrics(pred: Image, gt: Image, opts: MatchingOptions = {}): Metrics {
  if (opts.filtration === "bothlevel") {
    throw new Error("metrics are per-direction; use sublevel or superlevel");
  }
  const p = toMatrix(pred);
  const g = toMatrix(gt);
  checkPair(p, g);
  checkBinary(p, "pred");
  checkBinary(g, "gt");
  return withTempDir((dir) => {
    const predDir = join(dir, "pred");
    const gtDir = join(dir, "gt");
    mkdirSync(predDir);
    mkdirSync(gtDir);
    writeFileSync(join(predDir, "pair.npy"), writeNpy(p));
    writeFileSync(join(gtDir, "pair.npy"), writeNpy(g));
    const out = runCli([
      "eval", "--pred-dir", predDir, "--gt-dir", gtDir, ...optionFlags(opts),
    ]);
    const report = JSON.parse(out) as { pairs: EvalPair[] };
    const pair = report.pairs[0];
    return {
      tauErr: { dim0: pair.tau_err_0, dim1: pair.tau_err_1, total: pair.tau_err },
      betaErr: { dim0: pair.beta_err_0, dim1: pair.beta_err_1, total: pair.beta_err },
      wassersteinLoss: pair.wasserstein_loss,
      bettiMatchingLoss: pair.betti_matching_loss,
      dice: pair.dice,
      accuracy: pair.accuracy,
      matchingPrecision: pair.matching_precision,
    };
  });
}

export { readNpy, writeNpy, toMatrix, toNested } from "./npy.js";
export type { Matrix } from "./npy.js";
