/**
 * Checkpoint directory layout:
 *   config.json   model + tokenizer configuration, task flags, training args
 *   vocab.json    token -> index
 *   weights.json  named float32 buffers (base64) with shapes
 *   eval.json     evaluation report written after training (optional)
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import { ModelConfig, ScorerModel, createModel, variableRoles } from './model.js';
import { Vocab, vocabFromJson, vocabToJson } from './tokenizer.js';

export interface CheckpointMeta {
  config: ModelConfig;
  tasks: { sentence: boolean; aspects: boolean };
  seed: number;
  trainArgs: Record<string, unknown>;
}

function encodeFloat32(arr: Float32Array): string {
  return Buffer.from(arr.buffer, arr.byteOffset, arr.byteLength).toString('base64');
}

function decodeFloat32(b64: string): Float32Array {
  const buf = Buffer.from(b64, 'base64');
  return new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4);
}

export function saveCheckpoint(dir: string, model: ScorerModel, vocab: Vocab,
                               meta: CheckpointMeta): void {
  fs.mkdirSync(dir, { recursive: true });
  const weights: Record<string, { shape: number[]; data: string }> = {};
  for (const [role, v] of variableRoles(model)) {
    weights[role] = {
      shape: v.shape as number[],
      data: encodeFloat32(v.dataSync() as Float32Array),
    };
  }
  fs.writeFileSync(path.join(dir, 'config.json'),
                   JSON.stringify(meta, null, 2) + '\n');
  fs.writeFileSync(path.join(dir, 'vocab.json'),
                   JSON.stringify(vocabToJson(vocab)) + '\n');
  fs.writeFileSync(path.join(dir, 'weights.json'),
                   JSON.stringify(weights) + '\n');
}

export function loadCheckpoint(dir: string): {
  model: ScorerModel; vocab: Vocab; meta: CheckpointMeta;
} {
  const meta = JSON.parse(
    fs.readFileSync(path.join(dir, 'config.json'), 'utf-8')) as CheckpointMeta;
  const vocab = vocabFromJson(
    JSON.parse(fs.readFileSync(path.join(dir, 'vocab.json'), 'utf-8')));
  const weights = JSON.parse(
    fs.readFileSync(path.join(dir, 'weights.json'), 'utf-8')) as
    Record<string, { shape: number[]; data: string }>;
  const model = createModel(meta.config, meta.seed, undefined, meta.tasks);
  for (const [role, v] of variableRoles(model)) {
    const saved = weights[role];
    if (!saved) throw new Error(`checkpoint missing weights for ${role}`);
    v.assign(tf.tensor(decodeFloat32(saved.data), saved.shape, 'float32'));
  }
  return { model, vocab, meta };
}
