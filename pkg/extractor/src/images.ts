/**
 * Image-side extraction from an imagefolder-layout dataset:
 * root/<class_name>/<file>. Record order is deterministic regardless of
 * batching: class directories and files sort lexicographically by
 * relative path, and that order is the stream order in the output.
 */
import { readdirSync, statSync } from 'node:fs';
import { join } from 'node:path';

import type { Encoder } from './encoder.js';
import { l2NormalizeRows } from './tdae.js';

export interface ImageEntry {
  path: string;
  label: number;
  className: string;
}

export function listImageFolder(root: string, classNames?: string[]): {
  classNames: string[];
  entries: ImageEntry[];
} {
  const dirs = readdirSync(root)
    .filter((d) => statSync(join(root, d)).isDirectory())
    .sort();
  if (dirs.length === 0) throw new Error(`${root} contains no class directories`);

  let names: string[];
  if (classNames) {
    names = classNames;
    for (const d of dirs) {
      if (!names.includes(d)) {
        throw new Error(`directory '${d}' is not in the provided class list`);
      }
    }
  } else {
    names = dirs;
  }
  const labelOf = new Map(names.map((n, i) => [n, i]));

  const entries: ImageEntry[] = [];
  for (const d of dirs) {
    const files = readdirSync(join(root, d))
      .filter((f) => statSync(join(root, d, f)).isFile())
      .sort();
    for (const f of files) {
      entries.push({ path: join(root, d, f), label: labelOf.get(d)!, className: d });
    }
  }
  if (entries.length === 0) throw new Error(`${root} contains no files`);
  return { classNames: names, entries };
}

export async function extractImageFeatures(
  encoder: Encoder,
  entries: ImageEntry[],
  batchSize = 32,
  onError: 'abort' | 'skip' = 'abort',
  log: (msg: string) => void = () => {},
): Promise<{ features: Float32Array; labels: Int32Array; dim: number }> {
  const embs: Float32Array[] = [];
  const labels: number[] = [];
  for (let start = 0; start < entries.length; start += batchSize) {
    const batch = entries.slice(start, start + batchSize);
    try {
      const vecs = await encoder.encodeImage(batch.map((e) => e.path));
      for (let i = 0; i < batch.length; i++) {
        embs.push(vecs[i]);
        labels.push(batch[i].label);
      }
    } catch (err) {
      if (onError === 'abort') throw err;
      // Per-file retry so one unreadable image only drops itself.
      for (const entry of batch) {
        try {
          const [vec] = await encoder.encodeImage([entry.path]);
          embs.push(vec);
          labels.push(entry.label);
        } catch (inner) {
          log(`skipping ${entry.path}: ${(inner as Error).message}`);
        }
      }
    }
  }
  if (embs.length === 0) throw new Error('no images could be embedded');
  const dim = embs[0].length;
  const features = new Float32Array(embs.length * dim);
  embs.forEach((e, i) => features.set(e, i * dim));
  return { features: l2NormalizeRows(features, dim), labels: Int32Array.from(labels), dim };
}
