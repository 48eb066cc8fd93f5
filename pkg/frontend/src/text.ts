/**
 * Token-level text encoder.
 *
 * Lowercased word-piece-free tokenization (letters/digits runs and
 * single punctuation marks), one deterministic unit embedding per
 * token type derived from the token string, so n = token count and
 * identical text always embeds identically. Empty text falls back to
 * a single [PAD] token; callers record those sample ids in the
 * manifest.
 */

import { gaussian, seededRng } from "./prng";

export const PAD_TOKEN = "[PAD]";

export function tokenize(text: string): string[] {
  const matches = text.toLowerCase().match(/[a-z0-9']+|[^\sa-z0-9']/g);
  return matches ?? [];
}

export interface TextEncoder {
  id: string;
  d: number;
  encode(text: string): { tokens: string[]; features: Float32Array; padded: boolean };
}

function tokenEmbedding(encoderId: string, token: string, d: number): Float32Array {
  const draw = gaussian(seededRng(`tok:${encoderId}:${token}`));
  const vec = new Float32Array(d);
  let norm = 0;
  for (let k = 0; k < d; k++) {
    vec[k] = draw();
    norm += vec[k] * vec[k];
  }
  norm = Math.sqrt(norm) || 1;
  for (let k = 0; k < d; k++) vec[k] /= norm;
  return vec;
}

export function makeTextEncoder(id: string, d: number): TextEncoder {
  const cache = new Map<string, Float32Array>();
  const embed = (token: string) => {
    let vec = cache.get(token);
    if (!vec) {
      vec = tokenEmbedding(id, token, d);
      cache.set(token, vec);
    }
    return vec;
  };
  return {
    id,
    d,
    encode(text: string) {
      let tokens = tokenize(text);
      const padded = tokens.length === 0;
      if (padded) tokens = [PAD_TOKEN];
      const features = new Float32Array(tokens.length * d);
      tokens.forEach((token, row) => {
        const vec = embed(token);
        // neighbor-position mixing so word order matters downstream
        const phase = Math.sin(0.5 * row);
        for (let k = 0; k < d; k++) {
          features[row * d + k] = vec[k] + 0.1 * phase * vec[(k + 1) % d];
        }
      });
      return { tokens, features, padded };
    },
  };
}
