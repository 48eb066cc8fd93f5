/**
 * Emotion feature encoder: frozen patch backbone plus a learnable
 * feature map fine-tuned for emotion classification.
 *
 * f_e[p] = tanh(base[p] @ W); training adds a mean-pool + softmax head
 * on top of exactly that per-patch map and fits (W, head) by SGD with
 * momentum on per-class image folders. After fine-tuning, W is frozen
 * and only the feature map is exported, mirroring a
 * classification-pretrained backbone used as a feature extractor.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { RgbImage, decodePng } from "./image";
import { gaussian, seededRng } from "./prng";
import { NUM_PATCHES, VisionEncoder, makeVisionEncoder } from "./vision";

export interface EmotionWeights {
  version: 1;
  baseId: string;
  d: number;
  classes: string[];
  featureMap: string; // base64 float32 d x d
}

export interface EmotionEncoder {
  id: string;
  d: number;
  fineTuned: boolean;
  encode(image: RgbImage): Float32Array; // NUM_PATCHES x d
}

function b64encode(values: Float32Array): string {
  return Buffer.from(values.buffer, values.byteOffset, values.byteLength).toString("base64");
}

function b64decode(text: string, length: number): Float32Array {
  const buf = Buffer.from(text, "base64");
  if (buf.length !== 4 * length) throw new Error(`weight blob holds ${buf.length} bytes, expected ${4 * length}`);
  return new Float32Array(buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength));
}

function applyFeatureMap(base: Float32Array, w: Float32Array, d: number): Float32Array {
  const out = new Float32Array(NUM_PATCHES * d);
  for (let p = 0; p < NUM_PATCHES; p++) {
    for (let j = 0; j < d; j++) {
      let acc = 0;
      for (let k = 0; k < d; k++) acc += base[p * d + k] * w[k * d + j];
      out[p * d + j] = Math.tanh(acc);
    }
  }
  return out;
}

export function makeEmotionEncoder(id: string, d: number, weights?: EmotionWeights): EmotionEncoder {
  const base: VisionEncoder = makeVisionEncoder(`${id}:base`, d);
  let featureMap: Float32Array | null = null;
  if (weights) {
    if (weights.d !== d) throw new Error(`weights are for d=${weights.d}, encoder wants d=${d}`);
    featureMap = b64decode(weights.featureMap, d * d);
  }
  return {
    id,
    d,
    fineTuned: featureMap !== null,
    encode(image: RgbImage): Float32Array {
      const features = base.encode(image);
      return featureMap ? applyFeatureMap(features, featureMap, d) : features;
    },
  };
}

export function saveEmotionWeights(weights: EmotionWeights, file: string): void {
  fs.writeFileSync(file, JSON.stringify(weights, null, 2) + "\n");
}

export function loadEmotionWeights(file: string): EmotionWeights {
  const doc = JSON.parse(fs.readFileSync(file, "utf-8")) as EmotionWeights;
  if (doc.version !== 1) throw new Error(`${file}: unsupported weights version ${doc.version}`);
  return doc;
}

export interface FineTuneOptions {
  d: number;
  encoderId: string;
  epochs: number;
  lr?: number;
  holdoutFraction?: number;
  seed?: string;
}

export interface FineTuneResult {
  weights: EmotionWeights;
  classes: string[];
  heldoutAccuracy: number;
  trainAccuracy: number;
}

interface Sample {
  base: Float32Array; // NUM_PATCHES x d frozen backbone features
  label: number;
}

function listClassFolders(root: string): { name: string; files: string[] }[] {
  const classes = fs
    .readdirSync(root, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();
  if (classes.length < 2) throw new Error(`${root}: need at least two class folders, found ${classes.length}`);
  return classes.map((name) => {
    const files = fs
      .readdirSync(path.join(root, name))
      .filter((f) => f.toLowerCase().endsWith(".png"))
      .sort()
      .map((f) => path.join(root, name, f));
    if (files.length === 0) throw new Error(`${root}/${name}: class folder holds no png images`);
    return { name, files };
  });
}

/** Fine-tune the per-patch emotion feature map on class image folders. */
export function finetuneEmotionEncoder(dataDir: string, options: FineTuneOptions): FineTuneResult {
  const { d, encoderId, epochs } = options;
  const lr = options.lr ?? 0.05;
  const holdout = options.holdoutFraction ?? 0.25;
  const base = makeVisionEncoder(`${encoderId}:base`, d);
  const folders = listClassFolders(dataDir);
  const classes = folders.map((f) => f.name);
  const C = classes.length;

  const train: Sample[] = [];
  const held: Sample[] = [];
  folders.forEach(({ files }, label) => {
    const holdCount = Math.max(1, Math.floor(files.length * holdout));
    files.forEach((file, index) => {
      const sample = { base: base.encode(decodePng(file)), label };
      (index >= files.length - holdCount ? held : train).push(sample);
    });
  });

  // near-identity init keeps the untuned features as the starting point
  const w = new Float32Array(d * d);
  const draw = gaussian(seededRng(options.seed ?? `finetune:${encoderId}`));
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) w[i * d + j] = (i === j ? 1 : 0) + 0.01 * draw();
  }
  const wc = new Float32Array(d * C);
  for (let i = 0; i < wc.length; i++) wc[i] = 0.1 * draw();
  const bc = new Float32Array(C);
  const mw = new Float32Array(w.length);
  const mwc = new Float32Array(wc.length);
  const mbc = new Float32Array(C);
  const momentum = 0.9;

  const forward = (sample: Sample) => {
    const hidden = applyFeatureMap(sample.base, w, d); // NUM_PATCHES x d
    const pooled = new Float32Array(d);
    for (let p = 0; p < NUM_PATCHES; p++) {
      for (let k = 0; k < d; k++) pooled[k] += hidden[p * d + k];
    }
    for (let k = 0; k < d; k++) pooled[k] /= NUM_PATCHES;
    const logits = new Float32Array(C);
    for (let c = 0; c < C; c++) {
      let acc = bc[c];
      for (let k = 0; k < d; k++) acc += pooled[k] * wc[k * C + c];
      logits[c] = acc;
    }
    let max = -Infinity;
    for (const v of logits) max = Math.max(max, v);
    let total = 0;
    const probs = new Float32Array(C);
    for (let c = 0; c < C; c++) {
      probs[c] = Math.exp(logits[c] - max);
      total += probs[c];
    }
    for (let c = 0; c < C; c++) probs[c] /= total;
    return { hidden, pooled, probs };
  };

  const accuracy = (samples: Sample[]) => {
    if (samples.length === 0) return 0;
    let hits = 0;
    for (const sample of samples) {
      const { probs } = forward(sample);
      let best = 0;
      for (let c = 1; c < C; c++) if (probs[c] > probs[best]) best = c;
      if (best === sample.label) hits++;
    }
    return hits / samples.length;
  };

  for (let epoch = 0; epoch < epochs; epoch++) {
    for (const sample of train) {
      const { hidden, pooled, probs } = forward(sample);
      const dlogits = Float32Array.from(probs);
      dlogits[sample.label] -= 1;
      const dpooled = new Float32Array(d);
      for (let k = 0; k < d; k++) {
        let acc = 0;
        for (let c = 0; c < C; c++) acc += wc[k * C + c] * dlogits[c];
        dpooled[k] = acc / NUM_PATCHES;
      }
      for (let k = 0; k < d; k++) {
        for (let c = 0; c < C; c++) {
          const g = pooled[k] * dlogits[c];
          mwc[k * C + c] = momentum * mwc[k * C + c] - lr * g;
          wc[k * C + c] += mwc[k * C + c];
        }
      }
      for (let c = 0; c < C; c++) {
        mbc[c] = momentum * mbc[c] - lr * dlogits[c];
        bc[c] += mbc[c];
      }
      const dw = new Float32Array(d * d);
      for (let p = 0; p < NUM_PATCHES; p++) {
        for (let j = 0; j < d; j++) {
          const h = hidden[p * d + j];
          const dz = dpooled[j] * (1 - h * h);
          if (dz === 0) continue;
          for (let k = 0; k < d; k++) {
            dw[k * d + j] += sample.base[p * d + k] * dz;
          }
        }
      }
      for (let i = 0; i < dw.length; i++) {
        mw[i] = momentum * mw[i] - lr * dw[i];
        w[i] += mw[i];
      }
    }
  }

  return {
    weights: {
      version: 1,
      baseId: `${encoderId}:base`,
      d,
      classes,
      featureMap: b64encode(w),
    },
    classes,
    heldoutAccuracy: accuracy(held),
    trainAccuracy: accuracy(train),
  };
}
