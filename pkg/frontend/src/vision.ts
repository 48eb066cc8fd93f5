/**
 * Patch-based vision encoder.
 *
 * A 224x224 RGB input is cut into 196 non-overlapping 16x16 patches
 * (no class token row). Each normalized patch (768 raw values) is
 * projected to d dimensions by a frozen random matrix derived from the
 * encoder id, then tanh-squashed. Same input, same id, same d => same
 * bytes, which is what makes exports idempotent.
 */

import { RgbImage, INPUT_SIZE, resize } from "./image";
import { gaussian, seededRng } from "./prng";

export const PATCH = 16;
export const PATCHES_PER_SIDE = INPUT_SIZE / PATCH; // 14
export const NUM_PATCHES = PATCHES_PER_SIDE * PATCHES_PER_SIDE; // 196
export const RAW_PATCH_DIM = PATCH * PATCH * 3; // 768

export interface VisionEncoder {
  id: string;
  d: number;
  encode(image: RgbImage): Float32Array; // NUM_PATCHES x d
}

/** Frozen projection RAW_PATCH_DIM -> d with Xavier-style scaling. */
export function projectionMatrix(id: string, rows: number, cols: number): Float32Array {
  const draw = gaussian(seededRng(`proj:${id}:${rows}x${cols}`));
  const scale = Math.sqrt(2.0 / (rows + cols));
  const weights = new Float32Array(rows * cols);
  for (let i = 0; i < weights.length; i++) weights[i] = draw() * scale;
  return weights;
}

export function extractPatches(image: RgbImage): Float32Array {
  const input = image.width === INPUT_SIZE && image.height === INPUT_SIZE ? image : resize(image);
  const patches = new Float32Array(NUM_PATCHES * RAW_PATCH_DIM);
  for (let py = 0; py < PATCHES_PER_SIDE; py++) {
    for (let px = 0; px < PATCHES_PER_SIDE; px++) {
      const patchIndex = py * PATCHES_PER_SIDE + px;
      let offset = patchIndex * RAW_PATCH_DIM;
      for (let y = 0; y < PATCH; y++) {
        for (let x = 0; x < PATCH; x++) {
          const sx = px * PATCH + x;
          const sy = py * PATCH + y;
          const i = 3 * (sy * INPUT_SIZE + sx);
          patches[offset++] = input.data[i] / 127.5 - 1.0;
          patches[offset++] = input.data[i + 1] / 127.5 - 1.0;
          patches[offset++] = input.data[i + 2] / 127.5 - 1.0;
        }
      }
    }
  }
  return patches;
}

function normalizeRows(rows: Float32Array, rowLength: number): void {
  const count = rows.length / rowLength;
  for (let r = 0; r < count; r++) {
    let mean = 0;
    for (let k = 0; k < rowLength; k++) mean += rows[r * rowLength + k];
    mean /= rowLength;
    let variance = 0;
    for (let k = 0; k < rowLength; k++) {
      const centered = rows[r * rowLength + k] - mean;
      variance += centered * centered;
    }
    const inv = 1.0 / Math.sqrt(variance / rowLength + 1e-6);
    for (let k = 0; k < rowLength; k++) rows[r * rowLength + k] = (rows[r * rowLength + k] - mean) * inv;
  }
}

export function projectPatches(patches: Float32Array, weights: Float32Array, d: number): Float32Array {
  const out = new Float32Array(NUM_PATCHES * d);
  for (let p = 0; p < NUM_PATCHES; p++) {
    for (let j = 0; j < d; j++) {
      let acc = 0;
      for (let k = 0; k < RAW_PATCH_DIM; k++) {
        acc += patches[p * RAW_PATCH_DIM + k] * weights[k * d + j];
      }
      out[p * d + j] = Math.tanh(acc);
    }
  }
  return out;
}

export function makeVisionEncoder(id: string, d: number): VisionEncoder {
  const weights = projectionMatrix(id, RAW_PATCH_DIM, d);
  return {
    id,
    d,
    encode(image: RgbImage): Float32Array {
      const patches = extractPatches(image);
      normalizeRows(patches, RAW_PATCH_DIM);
      return projectPatches(patches, weights, d);
    },
  };
}
