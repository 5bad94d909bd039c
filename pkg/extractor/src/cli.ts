#!/usr/bin/env node
/**
 * tdae-extract: embed an imagefolder dataset plus its class names into a
 * TDAE file the engine can stream.
 *
 *   tdae-extract --dataset ./val --output val.tdae \
 *     --encoder clip --model Xenova/clip-vit-base-patch32 --templates ensemble
 *
 * `--encoder hash` substitutes deterministic content-hash embeddings:
 * useful for format/interop testing without model weights, semantically
 * meaningless otherwise.
 */
import { readFileSync } from 'node:fs';
import { parseArgs } from 'node:util';

import { makeEncoder } from './encoder.js';
import { extractImageFeatures, listImageFolder } from './images.js';
import { l2NormalizeRows, readTdae, writeTdae } from './tdae.js';
import { buildTextHead, loadTemplates } from './textHead.js';
import { zeroShotAccuracy } from './zeroShot.js';

export interface ExtractionJob {
  dataset: string;
  output: string;
  encoder: string;
  model: string;
  templates: string;
  classesFile?: string;
  batchSize: number;
  dim: number;
  onError: 'abort' | 'skip';
}

export async function runJob(job: ExtractionJob, log: (m: string) => void): Promise<void> {
  const classList = job.classesFile
    ? (JSON.parse(readFileSync(job.classesFile, 'utf-8')) as string[])
    : undefined;
  const { classNames, entries } = listImageFolder(job.dataset, classList);
  log(`${entries.length} files across ${classNames.length} classes`);

  const encoder = makeEncoder(job.encoder, job.model, job.dim);
  const templates = loadTemplates(job.templates);
  log(`embedding text head with ${templates.length} template(s)`);
  const { head, dim } = await buildTextHead(encoder, classNames, templates);

  log(`embedding ${entries.length} images`);
  const images = await extractImageFeatures(encoder, entries, job.batchSize, job.onError, log);
  if (images.dim !== dim) {
    throw new Error(`text dim ${dim} disagrees with image dim ${images.dim}`);
  }

  writeTdae(job.output, {
    classNames,
    head: l2NormalizeRows(head, dim),
    dim,
    features: images.features,
    labels: images.labels,
  });

  // Read the file back and validate: what lands on disk is what the
  // engine will parse, not what happened to be in memory.
  const back = readTdae(job.output);
  const { accuracy, labeled } = zeroShotAccuracy(back);
  log(
    `wrote ${back.labels.length} records (D=${back.dim}, N=${back.classNames.length}) to ${job.output}; ` +
      `zero-shot reference ${accuracy.toFixed(2)}% over ${labeled} labeled`,
  );
}

export async function main(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      dataset: { type: 'string' },
      output: { type: 'string' },
      encoder: { type: 'string', default: 'clip' },
      model: { type: 'string', default: 'Xenova/clip-vit-base-patch32' },
      templates: { type: 'string', default: 'single' },
      classes: { type: 'string' },
      'batch-size': { type: 'string', default: '32' },
      dim: { type: 'string', default: '512' },
      'skip-unreadable': { type: 'boolean', default: false },
      help: { type: 'boolean', default: false },
    },
  });

  if (values.help || !values.dataset || !values.output) {
    console.log(
      'usage: tdae-extract --dataset DIR --output FILE [--encoder clip|hash] ' +
        '[--model ID] [--templates single|ensemble|FILE.json] [--classes FILE.json] ' +
        '[--batch-size N] [--dim N] [--skip-unreadable]',
    );
    return values.help ? 0 : 2;
  }

  try {
    await runJob(
      {
        dataset: values.dataset,
        output: values.output,
        encoder: values.encoder!,
        model: values.model!,
        templates: values.templates!,
        classesFile: values.classes,
        batchSize: parseInt(values['batch-size']!, 10),
        dim: parseInt(values.dim!, 10),
        onError: values['skip-unreadable'] ? 'skip' : 'abort',
      },
      (m) => console.error(m),
    );
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
