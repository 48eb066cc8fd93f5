/**
 * MOODEMB1 bundle files and dataset manifests.
 *
 * Binary layout (little-endian): magic "MOODEMB1", u32 version=1,
 * u32 d, u32 m, u32 n, u32 label (0xFFFFFFFF = unlabeled), then
 * f_i (m*d), f_t (n*d), f_e (m*d) as row-major float32. This must stay
 * bit-compatible with the Python core's reader.
 */

import * as fs from "node:fs";

export const MAGIC = "MOODEMB1";
export const VERSION = 1;
export const UNLABELED = 0xffffffff;

export interface Bundle {
  id: string;
  d: number;
  fI: Float32Array; // m x d image patch features
  fT: Float32Array; // n x d text token features
  fE: Float32Array; // m x d emotion patch features
  m: number;
  n: number;
  label: number | null;
}

export function encodeBundle(bundle: Bundle): Buffer {
  const { d, m, n } = bundle;
  if (bundle.fI.length !== m * d || bundle.fE.length !== m * d || bundle.fT.length !== n * d) {
    throw new Error(`bundle ${bundle.id}: payload sizes disagree with m=${m}, n=${n}, d=${d}`);
  }
  const header = Buffer.alloc(28);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt32LE(VERSION, 8);
  header.writeUInt32LE(d, 12);
  header.writeUInt32LE(m, 16);
  header.writeUInt32LE(n, 20);
  header.writeUInt32LE(bundle.label === null ? UNLABELED : bundle.label, 24);
  return Buffer.concat([
    header,
    Buffer.from(bundle.fI.buffer, bundle.fI.byteOffset, bundle.fI.byteLength),
    Buffer.from(bundle.fT.buffer, bundle.fT.byteOffset, bundle.fT.byteLength),
    Buffer.from(bundle.fE.buffer, bundle.fE.byteOffset, bundle.fE.byteLength),
  ]);
}

export function writeBundle(bundle: Bundle, path: string): void {
  fs.writeFileSync(path, encodeBundle(bundle));
}

export function readBundle(path: string, id?: string): Bundle {
  const raw = fs.readFileSync(path);
  if (raw.length < 28) throw new Error(`${path}: shorter than the fixed header`);
  if (raw.toString("ascii", 0, 8) !== MAGIC) throw new Error(`${path}: bad magic`);
  const version = raw.readUInt32LE(8);
  if (version !== VERSION) throw new Error(`${path}: unsupported version ${version}`);
  const d = raw.readUInt32LE(12);
  const m = raw.readUInt32LE(16);
  const n = raw.readUInt32LE(20);
  const label = raw.readUInt32LE(24);
  const expected = 28 + 4 * (2 * m * d + n * d);
  if (raw.length !== expected) {
    throw new Error(`${path}: have ${raw.length} bytes, expected ${expected}`);
  }
  const floats = (offset: number, count: number) => {
    const slice = raw.subarray(offset, offset + 4 * count);
    return new Float32Array(slice.buffer.slice(slice.byteOffset, slice.byteOffset + slice.byteLength));
  };
  return {
    id: id ?? path.split("/").pop()!.replace(/\.[^.]+$/, ""),
    d,
    m,
    n,
    fI: floats(28, m * d),
    fT: floats(28 + 4 * m * d, n * d),
    fE: floats(28 + 4 * (m * d + n * d), m * d),
    label: label === UNLABELED ? null : label,
  };
}

export interface ManifestEntry {
  id: string;
  path: string;
  split: "train" | "val" | "test";
}

export interface Manifest {
  version: number;
  d: number;
  num_classes: number;
  label_map: Record<string, number>;
  entries: ManifestEntry[];
  encoders?: Record<string, string>;
  padded_text_ids?: string[];
}

export const EKMAN_LABELS = ["fear", "anger", "joy", "sadness", "surprise", "disgust"] as const;

export function defaultLabelMap(numClasses = 6): Record<string, number> {
  const names =
    numClasses === 6
      ? [...EKMAN_LABELS]
      : numClasses === 7
        ? [...EKMAN_LABELS, "neutral"]
        : Array.from({ length: numClasses }, (_, i) => `class${i}`);
  return Object.fromEntries(names.map((name, i) => [name, i]));
}

export function writeManifest(manifest: Manifest, path: string): void {
  fs.writeFileSync(path, JSON.stringify(manifest, null, 2) + "\n");
}
