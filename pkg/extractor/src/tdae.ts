/**
 * TDAE binary dataset format: writer plus a validating reader.
 *
 * The byte layout is specified in ../docs/format.md and must stay
 * bit-compatible with the engine's reader: little-endian throughout,
 * float32 payloads, magic "TDAE", version 1.
 */
import { openSync, writeSync, closeSync, readFileSync } from 'node:fs';

export const MAGIC = Buffer.from('TDAE', 'ascii');
export const VERSION = 1;

export interface TdaeDataset {
  classNames: string[];
  /** row-major (N x D) unit-norm rows */
  head: Float32Array;
  dim: number;
  /** (S x D) unit-norm rows, stream order */
  features: Float32Array;
  /** length S; -1 for unlabeled */
  labels: Int32Array;
}

export function l2NormalizeRows(m: Float32Array, dim: number): Float32Array {
  const rows = m.length / dim;
  const out = new Float32Array(m);
  for (let r = 0; r < rows; r++) {
    let acc = 0;
    for (let j = 0; j < dim; j++) {
      const v = m[r * dim + j];
      acc += v * v;
    }
    const norm = Math.sqrt(acc);
    if (norm === 0) throw new Error(`row ${r} has zero norm`);
    // Keep rows that are already unit within float32 rounding untouched
    // so byte-for-byte round trips hold (mirrors the engine's reader).
    if (Math.abs(norm - 1) > 1e-6) {
      for (let j = 0; j < dim; j++) out[r * dim + j] = Math.fround(m[r * dim + j] / norm);
    }
  }
  return out;
}

export function writeTdae(path: string, ds: TdaeDataset): void {
  const n = ds.classNames.length;
  const d = ds.dim;
  if (ds.head.length !== n * d) throw new Error('head size disagrees with N*D');
  const s = ds.labels.length;
  if (ds.features.length !== s * d) throw new Error('features size disagrees with S*D');

  const fd = openSync(path, 'w');
  try {
    const header = Buffer.alloc(16);
    MAGIC.copy(header, 0);
    header.writeUInt32LE(VERSION, 4);
    header.writeUInt32LE(d, 8);
    header.writeUInt32LE(n, 12);
    writeSync(fd, header);

    for (const name of ds.classNames) {
      const raw = Buffer.from(name, 'utf-8');
      const len = Buffer.alloc(4);
      len.writeUInt32LE(raw.length, 0);
      writeSync(fd, len);
      writeSync(fd, raw);
    }

    writeSync(fd, toLeBytes(ds.head));

    const count = Buffer.alloc(8);
    count.writeBigUInt64LE(BigInt(s), 0);
    writeSync(fd, count);

    const record = Buffer.alloc(4 + 4 * d);
    for (let i = 0; i < s; i++) {
      record.writeInt32LE(ds.labels[i], 0);
      for (let j = 0; j < d; j++) {
        record.writeFloatLE(ds.features[i * d + j], 4 + 4 * j);
      }
      writeSync(fd, record);
    }
  } finally {
    closeSync(fd);
  }
}

/** Float32Array to explicit little-endian bytes (no-op copy on LE hosts). */
function toLeBytes(a: Float32Array): Buffer {
  const buf = Buffer.alloc(a.length * 4);
  for (let i = 0; i < a.length; i++) buf.writeFloatLE(a[i], i * 4);
  return buf;
}

export function readTdae(path: string): TdaeDataset {
  const data = readFileSync(path);
  let off = 0;
  const take = (nBytes: number, what: string): Buffer => {
    if (off + nBytes > data.length) throw new Error(`${path}: truncated while reading ${what}`);
    const chunk = data.subarray(off, off + nBytes);
    off += nBytes;
    return chunk;
  };

  if (!take(4, 'magic').equals(MAGIC)) throw new Error(`${path}: bad magic, not a TDAE file`);
  const version = take(4, 'version').readUInt32LE(0);
  if (version !== VERSION) throw new Error(`${path}: unsupported version ${version}`);
  const d = take(4, 'dimension').readUInt32LE(0);
  const n = take(4, 'class count').readUInt32LE(0);
  if (d === 0 || n < 2) throw new Error(`${path}: implausible header D=${d}, N=${n}`);

  const classNames: string[] = [];
  for (let i = 0; i < n; i++) {
    const len = take(4, `name ${i} length`).readUInt32LE(0);
    classNames.push(take(len, `name ${i}`).toString('utf-8'));
  }

  const head = fromLeBytes(take(4 * n * d, 'head matrix'));
  const s = Number(take(8, 'sample count').readBigUInt64LE(0));
  const labels = new Int32Array(s);
  const features = new Float32Array(s * d);
  for (let i = 0; i < s; i++) {
    labels[i] = take(4, `record ${i} label`).readInt32LE(0);
    if (labels[i] < -1 || labels[i] >= n) {
      throw new Error(`${path}: record ${i} label ${labels[i]} out of range`);
    }
    const vec = fromLeBytes(take(4 * d, `record ${i} feature`));
    for (const v of vec) {
      if (!Number.isFinite(v)) throw new Error(`${path}: record ${i} feature has non-finite entries`);
    }
    features.set(vec, i * d);
  }
  if (off !== data.length) throw new Error(`${path}: ${data.length - off} trailing bytes`);
  return { classNames, head, dim: d, features, labels };
}

function fromLeBytes(buf: Buffer): Float32Array {
  const out = new Float32Array(buf.length / 4);
  for (let i = 0; i < out.length; i++) out[i] = buf.readFloatLE(i * 4);
  return out;
}
