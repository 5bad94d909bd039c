/**
 * Cross-language interop: files written here must parse and score
 * identically in the Python engine, talking only through the TDAE file
 * and the engine's CLI.
 */
import assert from 'node:assert/strict';
import { spawnSync } from 'node:child_process';
import { mkdirSync, mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { test } from 'node:test';

import { runJob } from '../src/cli.js';
import { readTdae } from '../src/tdae.js';
import { zeroShotAccuracy } from '../src/zeroShot.js';

const NUM_CLASSES = 10;
const FILES_PER_CLASS = 100; // 1000 samples total

function enginePresent(): boolean {
  return spawnSync('python3', ['-c', 'import tda'], { encoding: 'utf-8' }).status === 0;
}

/** Deterministic pseudo-image corpus in imagefolder layout. */
function makeCorpus(root: string): void {
  for (let c = 0; c < NUM_CLASSES; c++) {
    const dir = join(root, `class_${String(c).padStart(2, '0')}`);
    mkdirSync(dir, { recursive: true });
    for (let i = 0; i < FILES_PER_CLASS; i++) {
      const name = `img_${String(i).padStart(3, '0')}.bin`;
      writeFileSync(join(dir, name), `class ${c} image ${i}`);
    }
  }
}

async function extract(outPath: string, corpus: string): Promise<void> {
  await runJob(
    {
      dataset: corpus,
      output: outPath,
      encoder: 'hash',
      model: 'unused',
      templates: 'single',
      batchSize: 64,
      dim: 64,
      onError: 'abort',
    },
    () => {},
  );
}

test('interop: emitted file passes engine validation and zero-shot parity holds', async (t) => {
  if (!enginePresent()) {
    t.skip('python engine not importable in this environment');
    return;
  }
  const dir = mkdtempSync(join(tmpdir(), 'tdae-interop-'));
  const corpus = join(dir, 'corpus');
  makeCorpus(corpus);
  const out = join(dir, 'extracted.tdae');
  await extract(out, corpus);

  const ds = readTdae(out);
  assert.equal(ds.labels.length, NUM_CLASSES * FILES_PER_CLASS);
  const ours = zeroShotAccuracy(ds);
  assert.equal(ours.labeled, 1000);

  const csv = join(dir, 'engine.csv');
  const run = spawnSync(
    'python3',
    ['-m', 'tda.cli', 'run', '--dataset', out, '--method', 'zero-shot', '--output', csv],
    { encoding: 'utf-8' },
  );
  assert.equal(run.status, 0, `engine rejected the file: ${run.stderr}`);

  const rows = readFileSync(csv, 'utf-8').trim().split('\n').map((l) => l.split(','));
  const header = rows[0];
  const accIdx = header.indexOf('top1_accuracy');
  const labeledIdx = header.indexOf('labeled_samples');
  const engineAcc = parseFloat(rows[1][accIdx]);
  assert.equal(parseInt(rows[1][labeledIdx], 10), 1000);
  assert.ok(
    Math.abs(engineAcc - ours.accuracy) <= 0.05,
    `parity broken: engine ${engineAcc} vs extractor ${ours.accuracy}`,
  );
});

test('interop: extraction is deterministic byte-for-byte', async () => {
  const dir = mkdtempSync(join(tmpdir(), 'tdae-det-'));
  const corpus = join(dir, 'corpus');
  makeCorpus(corpus);
  const a = join(dir, 'a.tdae');
  const b = join(dir, 'b.tdae');
  await extract(a, corpus);
  await extract(b, corpus);
  assert.ok(readFileSync(a).equals(readFileSync(b)));
});

test('interop: smoke corpus has expected shape', async () => {
  const dir = mkdtempSync(join(tmpdir(), 'tdae-smoke-'));
  const corpus = join(dir, 'corpus');
  for (let c = 0; c < 2; c++) {
    const sub = join(corpus, `k${c}`);
    mkdirSync(sub, { recursive: true });
    for (let i = 0; i < 5; i++) writeFileSync(join(sub, `f${i}`), `payload ${c}/${i}`);
  }
  const out = join(dir, 'smoke.tdae');
  await extract(out, corpus);
  const ds = readTdae(out);
  assert.equal(ds.labels.length, 10);
  assert.equal(ds.dim, 64);
  assert.deepEqual(ds.classNames, ['k0', 'k1']);
  // labels follow sorted directory order
  assert.deepEqual(Array.from(ds.labels.slice(0, 5)), [0, 0, 0, 0, 0]);
  assert.deepEqual(Array.from(ds.labels.slice(5)), [1, 1, 1, 1, 1]);
});
