/**
 * Extractor-side zero-shot reference: argmax of head-row dot products.
 * Exists so interop tests can check the engine computes the same
 * accuracy from the same file, two codebases apart.
 */
import type { TdaeDataset } from './tdae.js';

export function zeroShotAccuracy(ds: TdaeDataset): { accuracy: number; labeled: number } {
  const n = ds.classNames.length;
  const d = ds.dim;
  const s = ds.labels.length;
  let labeled = 0;
  let correct = 0;
  for (let i = 0; i < s; i++) {
    if (ds.labels[i] < 0) continue;
    labeled += 1;
    let best = -Infinity;
    let arg = 0;
    for (let c = 0; c < n; c++) {
      let acc = 0;
      for (let j = 0; j < d; j++) acc += ds.head[c * d + j] * ds.features[i * d + j];
      if (acc > best) {
        best = acc;
        arg = c;
      }
    }
    if (arg === ds.labels[i]) correct += 1;
  }
  return { accuracy: labeled ? (100 * correct) / labeled : 0, labeled };
}
