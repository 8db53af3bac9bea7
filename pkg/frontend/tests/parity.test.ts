/**
 * Binding parity: every value returned by the client must equal what the
 * CLI itself reports on the same inputs, and the worked fixtures must
 * reproduce their known values.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, expect, test } from "vitest";

import { lossAndGrad, metrics } from "../src/index.js";
import { readNpy, toMatrix, toNested, writeNpy } from "../src/npy.js";

const CLI = process.env.BETTI_MATCH_CLI?.trim().split(/\s+/) ?? ["betti-match"];
const TMP: string[] = [];

afterAll(() => {
  for (const dir of TMP) {
    rmSync(dir, { recursive: true, force: true });
  }
});

function tempDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "betti-parity-"));
  TMP.push(dir);
  return dir;
}

function cli(args: string[]): string {
  const res = spawnSync(CLI[0], [...CLI.slice(1), ...args], { encoding: "utf8" });
  expect(res.status).toBe(0);
  return res.stdout;
}

/** deterministic 32-bit PRNG so fixtures are stable across runs */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomImage(rand: () => number, rows: number, cols: number): number[][] {
  return Array.from({ length: rows }, () =>
    Array.from({ length: cols }, () => rand()),
  );
}

function randomBinary(rand: () => number, rows: number, cols: number, p = 0.5): number[][] {
  return Array.from({ length: rows }, () =>
    Array.from({ length: cols }, () => (rand() < p ? 1 : 0)),
  );
}

function ringPair(): { pred: number[][]; gt: number[][] } {
  const blank = () => Array.from({ length: 11 }, () => new Array<number>(11).fill(0));
  const ring = (img: number[][], top: number, left: number) => {
    for (let r = top; r < top + 3; r++) {
      for (let c = left; c < left + 3; c++) {
        img[r][c] = 1;
      }
    }
    img[top + 1][left + 1] = 0;
  };
  const pred = blank();
  ring(pred, 1, 1);
  ring(pred, 1, 7);
  const gt = blank();
  ring(gt, 7, 1);
  ring(gt, 7, 7);
  return { pred, gt };
}

test("identity pair gives zero loss and zero gradient", () => {
  const rand = mulberry32(1);
  const img = randomImage(rand, 8, 8);
  const { loss, grad } = lossAndGrad(img, img);
  expect(loss).toBe(0);
  expect(grad.flat().every((v) => v === 0)).toBe(true);
});

test("disjoint rings: dim-1 loss contribution is 4, metrics match the figure", () => {
  const { pred, gt } = ringPair();
  const res = lossAndGrad(pred, gt);
  const dim1 = res.levels[0].dims["1"];
  expect(dim1.matched + dim1.unmatched_pred + dim1.unmatched_gt).toBe(4);

  const m = metrics(pred, gt);
  expect(m.tauErr.dim1).toBe(4);
  expect(m.betaErr.dim1).toBe(0);
  expect(m.bettiMatchingLoss).toBe(m.tauErr.total);
  expect(m.betaErr.total).toBe(2 * m.wassersteinLoss);
  expect(m.matchingPrecision).toBe(0);
}, 60_000);

test("loss/gradient parity with direct CLI invocations", () => {
  const rand = mulberry32(7);
  for (let k = 0; k < 20; k++) {
    const rows = 4 + Math.floor(rand() * 4);
    const cols = 4 + Math.floor(rand() * 4);
    const pred = randomImage(rand, rows, cols);
    const gt = k % 2 === 0 ? randomBinary(rand, rows, cols) : randomImage(rand, rows, cols);
    const filtration = k % 3 === 0 ? "sublevel" : "superlevel";

    const got = lossAndGrad(pred, gt, { filtration });

    const dir = tempDir();
    const predPath = join(dir, "p.npy");
    const gtPath = join(dir, "g.npy");
    const gradPath = join(dir, "grad.npy");
    writeFileSync(predPath, writeNpy(toMatrix(pred)));
    writeFileSync(gtPath, writeNpy(toMatrix(gt)));
    const report = JSON.parse(cli([
      "loss", predPath, gtPath, "--grad", gradPath, "--filtration", filtration,
    ])) as { loss: number; levels: unknown };
    const gradWant = toNested(readNpy(readFileSync(gradPath)));

    expect(got.loss).toBe(report.loss);
    expect(got.grad).toEqual(gradWant);
    expect(got.levels).toEqual(report.levels);
  }
}, 300_000);

test("metrics parity with direct CLI eval", () => {
  const rand = mulberry32(21);
  for (let k = 0; k < 5; k++) {
    const pred = randomBinary(rand, 9, 9, 0.45);
    const gt = randomBinary(rand, 9, 9, 0.45);
    const got = metrics(pred, gt);

    const dir = tempDir();
    const predDir = join(dir, "pred");
    const gtDir = join(dir, "gt");
    for (const [sub, img] of [[predDir, pred], [gtDir, gt]] as const) {
      spawnSync("mkdir", ["-p", sub]);
      writeFileSync(join(sub, "x.npy"), writeNpy(toMatrix(img)));
    }
    const report = JSON.parse(cli(["eval", "--pred-dir", predDir, "--gt-dir", gtDir]));
    const pair = report.pairs[0];
    expect(got.tauErr.total).toBe(pair.tau_err);
    expect(got.tauErr.dim0).toBe(pair.tau_err_0);
    expect(got.betaErr.total).toBe(pair.beta_err);
    expect(got.wassersteinLoss).toBe(pair.wasserstein_loss);
    expect(got.bettiMatchingLoss).toBe(pair.betti_matching_loss);
    expect(got.dice).toBe(pair.dice);
    expect(got.accuracy).toBe(pair.accuracy);
    expect(got.matchingPrecision).toBe(pair.matching_precision);
  }
}, 300_000);

test("contract errors surface as exceptions", () => {
  expect(() => lossAndGrad([[1, 2]], [[1], [2]])).toThrow(/shapes differ/);
  expect(() => metrics([[0.5]], [[1]])).toThrow(/only 0 and 1/);
  expect(() => metrics([[1]], [[1]], { filtration: "bothlevel" })).toThrow(/per-direction/);
  expect(() => lossAndGrad([[1, Number.NaN]], [[1, 0]])).toThrow(/NaN/);
});

test("identical binary images: all errors zero, dice one", () => {
  const rand = mulberry32(33);
  const img = randomBinary(rand, 8, 8);
  const m = metrics(img, img);
  expect(m.tauErr.total).toBe(0);
  expect(m.betaErr.total).toBe(0);
  expect(m.wassersteinLoss).toBe(0);
  expect(m.dice).toBe(1);
  expect(m.accuracy).toBe(1);
  expect(m.matchingPrecision).toBe(1);
}, 60_000);
