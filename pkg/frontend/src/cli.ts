/**
 * Command line: export meme listings to embedding bundles, fine-tune
 * the emotion encoder, or generate meme-style fixture images.
 *
 *   node dist/cli.js export --listing memes.jsonl --out data/ [--dim 768]
 *        [--emotion-weights weights.json] [--split test]
 *   node dist/cli.js finetune --data folder/ --out weights.json [--dim 64]
 *        [--epochs 10]
 *   node dist/cli.js fixtures --out dir/ --count 12
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { finetuneEmotionEncoder, loadEmotionWeights, makeEmotionEncoder, saveEmotionWeights } from "./emotion";
import { encodePng, makeMemeImage } from "./image";
import { exportBundles } from "./export";
import { makeTextEncoder } from "./text";
import { makeVisionEncoder } from "./vision";

function parseArgs(argv: string[]): { command: string; flags: Map<string, string> } {
  const [command, ...rest] = argv;
  const flags = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    if (!key.startsWith("--") || i + 1 >= rest.length) {
      throw new Error(`malformed flags near ${key}`);
    }
    flags.set(key.slice(2), rest[i + 1]);
  }
  return { command: command ?? "", flags };
}

function need(flags: Map<string, string>, key: string): string {
  const value = flags.get(key);
  if (value === undefined) throw new Error(`missing required flag --${key}`);
  return value;
}

export function main(argv: string[]): number {
  const { command, flags } = parseArgs(argv);
  if (command === "export") {
    const d = Number(flags.get("dim") ?? 768);
    const weightsFile = flags.get("emotion-weights");
    const emotion = makeEmotionEncoder(
      "emotion-vit16", d, weightsFile ? loadEmotionWeights(weightsFile) : undefined,
    );
    const result = exportBundles({
      listing: need(flags, "listing"),
      outDir: need(flags, "out"),
      d,
      vision: makeVisionEncoder("vision-vit16", d),
      text: makeTextEncoder("text-wordhash", d),
      emotion,
      defaultSplit: (flags.get("split") as "train" | "val" | "test") ?? "test",
    });
    console.log(`wrote ${result.written} bundles (${result.skipped.length} skipped) -> ${result.manifestPath}`);
    return result.written > 0 ? 0 : 1;
  }
  if (command === "finetune") {
    const result = finetuneEmotionEncoder(need(flags, "data"), {
      d: Number(flags.get("dim") ?? 64),
      encoderId: "emotion-vit16",
      epochs: Number(flags.get("epochs") ?? 10),
    });
    saveEmotionWeights(result.weights, need(flags, "out"));
    console.log(
      `fine-tuned on ${result.classes.length} classes; ` +
        `train acc ${result.trainAccuracy.toFixed(3)}, held-out acc ${result.heldoutAccuracy.toFixed(3)}`,
    );
    return 0;
  }
  if (command === "fixtures") {
    const out = need(flags, "out");
    const count = Number(flags.get("count") ?? 12);
    fs.mkdirSync(out, { recursive: true });
    const listing: string[] = [];
    for (let i = 0; i < count; i++) {
      const name = `meme-${String(i).padStart(3, "0")}.png`;
      encodePng(makeMemeImage(name), path.join(out, name));
      listing.push(
        JSON.stringify({ image: name, text: `when the build passes on try ${i + 1}`, label: i % 6 }),
      );
    }
    fs.writeFileSync(path.join(out, "listing.jsonl"), listing.join("\n") + "\n");
    console.log(`wrote ${count} fixture memes + listing.jsonl -> ${out}`);
    return 0;
  }
  console.error("usage: cli.js <export|finetune|fixtures> [--flag value ...]");
  return 2;
}

if (require.main === module) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (error) {
    console.error(`error: ${(error as Error).message}`);
    process.exit(1);
  }
}
