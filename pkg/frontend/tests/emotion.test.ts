import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import {
  finetuneEmotionEncoder,
  loadEmotionWeights,
  makeEmotionEncoder,
  saveEmotionWeights,
} from "../src/emotion";
import { RgbImage, encodePng, makeMemeImage } from "../src/image";
import { seededRng } from "../src/prng";
import { NUM_PATCHES } from "../src/vision";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "emotion-test-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

/** Toy expression classes: each class has a distinct dominant color. */
function classImage(label: number, index: number): RgbImage {
  const rng = seededRng(`cls:${label}:${index}`);
  const size = 96;
  const data = new Uint8Array(size * size * 3);
  const base = [
    [220, 40, 40],
    [40, 220, 40],
    [40, 40, 220],
    [220, 220, 40],
    [220, 40, 220],
    [40, 220, 220],
  ][label];
  for (let i = 0; i < size * size; i++) {
    data[3 * i] = Math.min(255, Math.max(0, base[0] + (rng() - 0.5) * 90));
    data[3 * i + 1] = Math.min(255, Math.max(0, base[1] + (rng() - 0.5) * 90));
    data[3 * i + 2] = Math.min(255, Math.max(0, base[2] + (rng() - 0.5) * 90));
  }
  return { width: size, height: size, data };
}

function writeToyDataset(root: string, classes: number, perClass: number): void {
  const names = ["fear", "anger", "joy", "sadness", "surprise", "disgust"];
  for (let label = 0; label < classes; label++) {
    const dir = path.join(root, names[label]);
    fs.mkdirSync(dir, { recursive: true });
    for (let index = 0; index < perClass; index++) {
      encodePng(classImage(label, index), path.join(dir, `img-${String(index).padStart(2, "0")}.png`));
    }
  }
}

describe("emotion encoder fine-tuning", () => {
  const dataDir = path.join(tmp, "toy");
  writeToyDataset(dataDir, 6, 8);

  it("beats chance held-out accuracy on the toy folder", () => {
    const result = finetuneEmotionEncoder(dataDir, { d: 24, encoderId: "emo-test", epochs: 8 });
    expect(result.classes).toHaveLength(6);
    expect(result.heldoutAccuracy).toBeGreaterThan(1 / 6);
    expect(result.trainAccuracy).toBeGreaterThan(0.5);
  }, 120_000);

  it("round-trips weights and encodes deterministically when frozen", () => {
    const result = finetuneEmotionEncoder(dataDir, { d: 16, encoderId: "emo-test", epochs: 3 });
    const file = path.join(tmp, "weights.json");
    saveEmotionWeights(result.weights, file);
    const encoder = makeEmotionEncoder("emo-test", 16, loadEmotionWeights(file));
    expect(encoder.fineTuned).toBe(true);
    const image = makeMemeImage("frozen");
    const a = encoder.encode(image);
    const b = encoder.encode(image);
    expect(Buffer.from(a.buffer).equals(Buffer.from(b.buffer))).toBe(true);
    expect(a.length).toBe(NUM_PATCHES * 16);
  }, 120_000);

  it("base encoder works without weights and matches patch shape", () => {
    const encoder = makeEmotionEncoder("emo-test", 8);
    expect(encoder.fineTuned).toBe(false);
    expect(encoder.encode(makeMemeImage("base")).length).toBe(NUM_PATCHES * 8);
  });

  it("rejects dimension mismatches", () => {
    const result = finetuneEmotionEncoder(dataDir, { d: 16, encoderId: "emo-test", epochs: 1 });
    expect(() => makeEmotionEncoder("emo-test", 8, result.weights)).toThrow(/d=16/);
  }, 120_000);

  it("rejects folders with fewer than two classes", () => {
    const single = path.join(tmp, "single");
    writeToyDataset(single, 1, 2);
    expect(() => finetuneEmotionEncoder(single, { d: 8, encoderId: "x", epochs: 1 })).toThrow(
      /two class folders/,
    );
  });
});
