/**
 * Text-head construction: fill every template with the class name, embed
 * each filled prompt, average per class, re-normalize. Prompt lists ship
 * as JSON data files so the exact text is pinned in the repo.
 */
import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { Encoder } from './encoder.js';

const PROMPT_DIR = join(dirname(fileURLToPath(import.meta.url)), '..', '..', 'prompts');

export function loadTemplates(nameOrPath: string): string[] {
  const path =
    nameOrPath === 'single' || nameOrPath === 'ensemble'
      ? join(PROMPT_DIR, `${nameOrPath}.json`)
      : nameOrPath;
  const templates = JSON.parse(readFileSync(path, 'utf-8'));
  if (!Array.isArray(templates) || templates.length === 0) {
    throw new Error(`template file ${path} must hold a non-empty JSON array`);
  }
  for (const t of templates) {
    if (typeof t !== 'string' || !t.includes('{}')) {
      throw new Error(`template ${JSON.stringify(t)} must be a string containing {}`);
    }
  }
  return templates;
}

export function fillTemplate(template: string, className: string): string {
  return template.replaceAll('{}', className);
}

/** Per class: embed each filled template, average, re-normalize. */
export async function buildTextHead(
  encoder: Encoder,
  classNames: string[],
  templates: string[],
): Promise<{ head: Float32Array; dim: number }> {
  if (classNames.length === 0) throw new Error('class-name list is empty');
  let head: Float32Array | null = null;
  let dim = 0;
  for (let c = 0; c < classNames.length; c++) {
    const prompts = templates.map((t) => fillTemplate(t, classNames[c]));
    const embs = await encoder.encodeText(prompts);
    dim = embs[0].length;
    if (head === null) head = new Float32Array(classNames.length * dim);
    const mean = new Float64Array(dim);
    for (const e of embs) {
      for (let j = 0; j < dim; j++) mean[j] += e[j];
    }
    let acc = 0;
    for (let j = 0; j < dim; j++) {
      mean[j] /= embs.length;
      acc += mean[j] * mean[j];
    }
    const norm = Math.sqrt(acc);
    if (norm === 0) throw new Error(`class '${classNames[c]}' embedded to a zero vector`);
    for (let j = 0; j < dim; j++) head[c * dim + j] = Math.fround(mean[j] / norm);
  }
  return { head: head!, dim };
}
