/**
 * Export jobs: raw meme listings -> MOODEMB1 bundles plus a manifest
 * the Python core loads directly.
 *
 * Input is JSON lines {image, text, label?}; image paths resolve
 * relative to the listing file. Samples whose image cannot be decoded
 * are skipped with a logged reason; a hidden-size mismatch between the
 * encoders aborts the job.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { Bundle, Manifest, defaultLabelMap, writeBundle, writeManifest } from "./bundle";
import { EmotionEncoder } from "./emotion";
import { decodePng } from "./image";
import { TextEncoder } from "./text";
import { NUM_PATCHES, VisionEncoder } from "./vision";

export interface ListingRow {
  image: string;
  text: string;
  label?: number;
  id?: string;
  split?: "train" | "val" | "test";
}

export interface ExportJob {
  listing: string;
  outDir: string;
  d: number;
  vision: VisionEncoder;
  text: TextEncoder;
  emotion: EmotionEncoder;
  numClasses?: number;
  defaultSplit?: "train" | "val" | "test";
  log?: (line: string) => void;
}

export interface ExportResult {
  manifestPath: string;
  written: number;
  skipped: { id: string; reason: string }[];
}

export function readListing(file: string): ListingRow[] {
  const rows: ListingRow[] = [];
  const lines = fs.readFileSync(file, "utf-8").split("\n");
  lines.forEach((line, index) => {
    const trimmed = line.trim();
    if (!trimmed) return;
    let doc: unknown;
    try {
      doc = JSON.parse(trimmed);
    } catch (error) {
      throw new Error(`${file}:${index + 1}: not valid JSON (${(error as Error).message})`);
    }
    const row = doc as ListingRow;
    if (typeof row.image !== "string" || typeof row.text !== "string") {
      throw new Error(`${file}:${index + 1}: rows need string "image" and "text" fields`);
    }
    rows.push(row);
  });
  return rows;
}

export function exportBundles(job: ExportJob): ExportResult {
  const { d } = job;
  if (job.vision.d !== d || job.text.d !== d || job.emotion.d !== d) {
    throw new Error(
      `encoder hidden sizes disagree: vision=${job.vision.d}, text=${job.text.d}, ` +
        `emotion=${job.emotion.d}, declared d=${d}`,
    );
  }
  const log = job.log ?? ((line: string) => console.error(line));
  const rows = readListing(job.listing);
  const listingDir = path.dirname(path.resolve(job.listing));
  fs.mkdirSync(path.join(job.outDir, "bundles"), { recursive: true });

  const entries: Manifest["entries"] = [];
  const paddedIds: string[] = [];
  const skipped: ExportResult["skipped"] = [];
  rows.forEach((row, index) => {
    const id = row.id ?? `sample-${String(index).padStart(4, "0")}`;
    const imagePath = path.isAbsolute(row.image) ? row.image : path.join(listingDir, row.image);
    let bundle: Bundle;
    try {
      const image = decodePng(imagePath);
      const fI = job.vision.encode(image);
      const fE = job.emotion.encode(image);
      const encoded = job.text.encode(row.text);
      if (encoded.padded) paddedIds.push(id);
      bundle = {
        id,
        d,
        m: NUM_PATCHES,
        n: encoded.tokens.length,
        fI,
        fT: encoded.features,
        fE,
        label: row.label ?? null,
      };
    } catch (error) {
      const reason = (error as Error).message;
      skipped.push({ id, reason });
      log(`skip ${id}: ${reason}`);
      return;
    }
    const rel = `bundles/${id}.emb`;
    writeBundle(bundle, path.join(job.outDir, rel));
    entries.push({ id, path: rel, split: row.split ?? job.defaultSplit ?? "test" });
  });

  const manifest: Manifest = {
    version: 1,
    d,
    num_classes: job.numClasses ?? 6,
    label_map: defaultLabelMap(job.numClasses ?? 6),
    entries,
    encoders: {
      vision: job.vision.id,
      text: job.text.id,
      emotion: job.emotion.id + (job.emotion.fineTuned ? " (fine-tuned)" : " (base)"),
      text_layer: "final hidden layer",
    },
    padded_text_ids: paddedIds,
  };
  const manifestPath = path.join(job.outDir, "manifest.json");
  writeManifest(manifest, manifestPath);
  return { manifestPath, written: entries.length, skipped };
}
