/**
 * PNG loading, resizing to the encoder input size, and a meme-style
 * fixture generator for tests and demos (background scene, a colored
 * subject, white caption bands with glyph-like text blocks).
 */

import * as fs from "node:fs";
import { PNG } from "pngjs";

import { Rng, seededRng } from "./prng";

export const INPUT_SIZE = 224;

export interface RgbImage {
  width: number;
  height: number;
  data: Uint8Array; // RGB, row-major, 3 bytes per pixel
}

export function decodePng(path: string): RgbImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const out = new Uint8Array(png.width * png.height * 3);
  for (let i = 0; i < png.width * png.height; i++) {
    out[3 * i] = png.data[4 * i];
    out[3 * i + 1] = png.data[4 * i + 1];
    out[3 * i + 2] = png.data[4 * i + 2];
  }
  return { width: png.width, height: png.height, data: out };
}

export function encodePng(image: RgbImage, path: string): void {
  const png = new PNG({ width: image.width, height: image.height });
  for (let i = 0; i < image.width * image.height; i++) {
    png.data[4 * i] = image.data[3 * i];
    png.data[4 * i + 1] = image.data[3 * i + 1];
    png.data[4 * i + 2] = image.data[3 * i + 2];
    png.data[4 * i + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png));
}

/** Bilinear resize to size x size RGB. */
export function resize(image: RgbImage, size = INPUT_SIZE): RgbImage {
  const out = new Uint8Array(size * size * 3);
  const scaleX = image.width / size;
  const scaleY = image.height / size;
  for (let y = 0; y < size; y++) {
    const sy = Math.min((y + 0.5) * scaleY - 0.5, image.height - 1);
    const y0 = Math.max(0, Math.floor(sy));
    const y1 = Math.min(image.height - 1, y0 + 1);
    const wy = sy - y0;
    for (let x = 0; x < size; x++) {
      const sx = Math.min((x + 0.5) * scaleX - 0.5, image.width - 1);
      const x0 = Math.max(0, Math.floor(sx));
      const x1 = Math.min(image.width - 1, x0 + 1);
      const wx = sx - x0;
      for (let c = 0; c < 3; c++) {
        const p00 = image.data[3 * (y0 * image.width + x0) + c];
        const p01 = image.data[3 * (y0 * image.width + x1) + c];
        const p10 = image.data[3 * (y1 * image.width + x0) + c];
        const p11 = image.data[3 * (y1 * image.width + x1) + c];
        const top = p00 * (1 - wx) + p01 * wx;
        const bottom = p10 * (1 - wx) + p11 * wx;
        out[3 * (y * size + x) + c] = Math.round(top * (1 - wy) + bottom * wy);
      }
    }
  }
  return { width: size, height: size, data: out };
}

function fillRect(img: RgbImage, x0: number, y0: number, w: number, h: number, rgb: [number, number, number]) {
  for (let y = Math.max(0, y0); y < Math.min(img.height, y0 + h); y++) {
    for (let x = Math.max(0, x0); x < Math.min(img.width, x0 + w); x++) {
      const i = 3 * (y * img.width + x);
      img.data[i] = rgb[0];
      img.data[i + 1] = rgb[1];
      img.data[i + 2] = rgb[2];
    }
  }
}

function fillEllipse(img: RgbImage, cx: number, cy: number, rx: number, ry: number, rgb: [number, number, number]) {
  for (let y = 0; y < img.height; y++) {
    for (let x = 0; x < img.width; x++) {
      const dx = (x - cx) / rx;
      const dy = (y - cy) / ry;
      if (dx * dx + dy * dy <= 1) {
        const i = 3 * (y * img.width + x);
        img.data[i] = rgb[0];
        img.data[i + 1] = rgb[1];
        img.data[i + 2] = rgb[2];
      }
    }
  }
}

/** Glyph-like black blocks inside a white caption band. */
function drawCaptionBand(img: RgbImage, rng: Rng, y0: number, height: number) {
  fillRect(img, 0, y0, img.width, height, [250, 250, 250]);
  let x = 8;
  while (x < img.width - 16) {
    const wordWidth = 8 + Math.floor(rng() * 26);
    fillRect(img, x, y0 + 4, Math.min(wordWidth, img.width - x - 8), height - 8, [20, 20, 20]);
    x += wordWidth + 6 + Math.floor(rng() * 8);
  }
}

const PALETTES: [number, number, number][][] = [
  [[200, 60, 40], [240, 180, 60]],
  [[40, 90, 180], [120, 200, 230]],
  [[60, 150, 70], [200, 230, 120]],
  [[150, 60, 160], [230, 160, 220]],
  [[220, 130, 30], [250, 210, 140]],
  [[90, 90, 100], [190, 190, 200]],
];

/**
 * Deterministic meme-style image: scene background, an elliptical
 * subject, top and bottom caption bands.
 */
export function makeMemeImage(id: string, width = 300, height = 260): RgbImage {
  const rng = seededRng(`meme:${id}`);
  const img: RgbImage = { width, height, data: new Uint8Array(width * height * 3) };
  const palette = PALETTES[Math.floor(rng() * PALETTES.length)];
  const [bg, fg] = palette;
  for (let y = 0; y < height; y++) {
    const blend = y / height;
    for (let x = 0; x < width; x++) {
      const i = 3 * (y * width + x);
      img.data[i] = Math.round(bg[0] * (1 - blend) + fg[0] * blend);
      img.data[i + 1] = Math.round(bg[1] * (1 - blend) + fg[1] * blend);
      img.data[i + 2] = Math.round(bg[2] * (1 - blend) + fg[2] * blend);
    }
  }
  const subject: [number, number, number] = [
    Math.floor(rng() * 255),
    Math.floor(rng() * 255),
    Math.floor(rng() * 255),
  ];
  fillEllipse(
    img,
    width / 2 + (rng() - 0.5) * 40,
    height / 2 + (rng() - 0.5) * 30,
    40 + rng() * 50,
    35 + rng() * 45,
    subject,
  );
  drawCaptionBand(img, rng, 0, 34);
  drawCaptionBand(img, rng, height - 34, 34);
  return img;
}
