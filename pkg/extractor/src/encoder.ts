/**
 * Embedding backends. `Encoder` is the seam between extraction logic and
 * the actual model: the CLIP backend loads transformers.js lazily (model
 * weights download on first use), while the hash backend derives
 * deterministic pseudo-embeddings from content bytes and exists for
 * interop tests and offline smoke runs. Hash embeddings carry no
 * semantics: same-class images do NOT cluster under it.
 */
import { createHash } from 'node:crypto';
import { readFileSync } from 'node:fs';

export interface Encoder {
  readonly dim: number;
  encodeText(texts: string[]): Promise<Float32Array[]>;
  encodeImage(paths: string[]): Promise<Float32Array[]>;
}

/** Unit-norm vector derived from SHA-256 of the input, expanded by counter. */
export function hashVector(payload: Buffer | string, dim: number): Float32Array {
  const base = createHash('sha256').update(payload).digest();
  const out = new Float32Array(dim);
  let block = Buffer.alloc(0);
  let counter = 0;
  let offset = 0;
  for (let i = 0; i < dim; i++) {
    if (offset + 4 > block.length) {
      const h = createHash('sha256');
      h.update(base);
      const c = Buffer.alloc(4);
      c.writeUInt32LE(counter++, 0);
      h.update(c);
      block = h.digest();
      offset = 0;
    }
    // uint32 -> (-1, 1), then normalized below
    out[i] = (block.readUInt32LE(offset) / 2147483648) - 1.0;
    offset += 4;
  }
  let acc = 0;
  for (const v of out) acc += v * v;
  const norm = Math.sqrt(acc) || 1;
  for (let i = 0; i < dim; i++) out[i] = Math.fround(out[i] / norm);
  return out;
}

export class HashEncoder implements Encoder {
  constructor(readonly dim: number = 64) {}

  async encodeText(texts: string[]): Promise<Float32Array[]> {
    return texts.map((t) => hashVector(`text:${t}`, this.dim));
  }

  async encodeImage(paths: string[]): Promise<Float32Array[]> {
    return paths.map((p) => hashVector(readFileSync(p), this.dim));
  }
}

/** CLIP via transformers.js; requires the optional @xenova/transformers. */
export class ClipEncoder implements Encoder {
  private textPipe: any = null;
  private imagePipe: any = null;
  dim: number;

  constructor(readonly modelId: string = 'Xenova/clip-vit-base-patch32', dim = 512) {
    this.dim = dim;
  }

  private async lib(): Promise<any> {
    // Computed specifier: the dependency is optional and resolved only
    // when the CLIP backend is actually used.
    const specifier = '@xenova/transformers';
    try {
      return await import(specifier);
    } catch {
      throw new Error(
        'CLIP backend needs the optional dependency @xenova/transformers; ' +
          'install it with `npm install @xenova/transformers` (model weights ' +
          'download from the Hugging Face hub on first use), or use --encoder hash.',
      );
    }
  }

  async encodeText(texts: string[]): Promise<Float32Array[]> {
    const { pipeline } = await this.lib();
    if (!this.textPipe) {
      this.textPipe = await pipeline('feature-extraction', this.modelId);
    }
    const out: Float32Array[] = [];
    for (const text of texts) {
      const res = await this.textPipe(text, { pooling: 'mean', normalize: true });
      out.push(Float32Array.from(res.data as Iterable<number>));
    }
    this.dim = out[0]?.length ?? this.dim;
    return out;
  }

  async encodeImage(paths: string[]): Promise<Float32Array[]> {
    const { pipeline } = await this.lib();
    if (!this.imagePipe) {
      this.imagePipe = await pipeline('image-feature-extraction', this.modelId);
    }
    const out: Float32Array[] = [];
    for (const path of paths) {
      const res = await this.imagePipe(path, { pooling: 'mean', normalize: true });
      out.push(Float32Array.from(res.data as Iterable<number>));
    }
    this.dim = out[0]?.length ?? this.dim;
    return out;
  }
}

export function makeEncoder(kind: string, modelId: string, dim: number): Encoder {
  switch (kind) {
    case 'hash':
      return new HashEncoder(dim);
    case 'clip':
      return new ClipEncoder(modelId, dim);
    default:
      throw new Error(`unknown encoder '${kind}' (expected 'clip' or 'hash')`);
  }
}
