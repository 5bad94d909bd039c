export { HashEncoder, ClipEncoder, makeEncoder, hashVector } from './encoder.js';
export type { Encoder } from './encoder.js';
export { extractImageFeatures, listImageFolder } from './images.js';
export type { ImageEntry } from './images.js';
export { MAGIC, VERSION, l2NormalizeRows, readTdae, writeTdae } from './tdae.js';
export type { TdaeDataset } from './tdae.js';
export { buildTextHead, fillTemplate, loadTemplates } from './textHead.js';
export { zeroShotAccuracy } from './zeroShot.js';
export { runJob, main } from './cli.js';
export type { ExtractionJob } from './cli.js';
