/**
 * Text encoder + heads, written against raw tensors so initialization,
 * training, and serialization stay fully deterministic.
 *
 * The encoder embeds a length-normalized token-count vector: mean token
 * embedding = counts @ E, then a relu hidden layer. Formulating the lookup
 * as a dense matmul keeps every gradient a matmul (tf.gather's gradient is
 * pathologically slow on the js and wasm backends at vocabulary scale).
 *
 * heads: sentence regression (1 unit), aspects (6 x 3 softmax).
 */

import * as tf from '@tensorflow/tfjs';
import { ASPECTS } from './protocol.js';

export interface ModelConfig {
  vocabSize: number;
  embedDim: number;
  hiddenDim: number;
  maxLen: number;
  /** fixed scale on the pooled embedding feeding the relu trunk */
  featureScale: number;
  /** fixed scale on the wide (linear) path; large values let the recipe's
   * small Adam steps reach ridge-sized effective coefficients */
  wideScale: number;
}

export interface EncoderWeights {
  embedding: tf.Variable; // [V, D]
  w1: tf.Variable;        // [D, H]
  b1: tf.Variable;        // [H]
  featMean: tf.Variable;  // [D], frozen standardization stats
  featStd: tf.Variable;   // [D]
}

export interface Heads {
  sentenceW?: tf.Variable;     // [H, 1] deep path
  sentenceWide?: tf.Variable;  // [V, 1] wide path on raw gram counts
  sentenceB?: tf.Variable;     // [1]
  aspectW?: tf.Variable;       // [H, 18]
  aspectWide?: tf.Variable;    // [V, 18]
  aspectB?: tf.Variable;       // [18]
}

export interface ScorerModel {
  config: ModelConfig;
  encoder: EncoderWeights;
  heads: Heads;
}

/** mulberry32: tiny deterministic PRNG for weight init and shuffling. */
export function rng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0; a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randMatrix(rand: () => number, rows: number, cols: number,
                           scale: number): tf.Tensor2D {
  const data = new Float32Array(rows * cols);
  for (let i = 0; i < data.length; i++) data[i] = (rand() * 2 - 1) * scale;
  return tf.tensor2d(data, [rows, cols]);
}

export function createModel(config: ModelConfig, seed: number,
                            pretrainedEmbedding?: tf.Tensor2D,
                            tasks: { sentence: boolean; aspects: boolean } =
                            { sentence: true, aspects: true },
                            freezeEmbedding = false): ScorerModel {
  const rand = rng(seed);
  const embedInit = pretrainedEmbedding
    ?? randMatrix(rand, config.vocabSize, config.embedDim, 0.3);
  const glorot = (fanIn: number, fanOut: number) =>
    Math.sqrt(6 / (fanIn + fanOut));
  // variables stay unnamed: tfjs requires globally unique names, and tests
  // build several models per process; checkpoints key weights by role
  const encoder: EncoderWeights = {
    embedding: tf.variable(embedInit, !freezeEmbedding),
    w1: tf.variable(
      randMatrix(rand, config.embedDim, config.hiddenDim,
                 glorot(config.embedDim, config.hiddenDim)), true),
    b1: tf.variable(tf.zeros([config.hiddenDim]), true),
    // standardization stats are identity until setFeatureStats installs
    // train-set values; they are persisted but never trained
    featMean: tf.variable(tf.zeros([config.embedDim]), false),
    featStd: tf.variable(tf.ones([config.embedDim]), false),
  };
  // output heads start at zero so every optimizer step moves toward signal;
  // the sentence bias starts at the scale midpoint
  const heads: Heads = {};
  if (tasks.sentence) {
    heads.sentenceW = tf.variable(tf.zeros([config.hiddenDim, 1]), true);
    heads.sentenceWide = tf.variable(tf.zeros([config.vocabSize, 1]), true);
    heads.sentenceB = tf.variable(tf.tensor1d([3.5]), true);
  }
  if (tasks.aspects) {
    heads.aspectW = tf.variable(
      tf.zeros([config.hiddenDim, ASPECTS.length * 3]), true);
    heads.aspectWide = tf.variable(
      tf.zeros([config.vocabSize, ASPECTS.length * 3]), true);
    heads.aspectB = tf.variable(tf.zeros([ASPECTS.length * 3]), true);
  }
  return { config, encoder, heads };
}

/** Standardized pooled embedding [B, D] and the relu trunk output [B, H]. */
export function encodeCounts(model: ScorerModel, counts: tf.Tensor2D):
  { wide: tf.Tensor2D; deep: tf.Tensor2D } {
  const pooled = tf.matMul(counts, model.encoder.embedding as any);
  const standardized = tf.div(tf.sub(pooled, model.encoder.featMean),
                              model.encoder.featStd) as tf.Tensor2D;
  const emb = tf.mul(standardized, model.config.featureScale);
  const deep = tf.relu(tf.add(tf.matMul(emb, model.encoder.w1 as any),
                              model.encoder.b1)) as tf.Tensor2D;
  return { wide: standardized, deep };
}

export { };

/** Install per-dimension standardization stats of (counts @ E) measured on
 * the training set. */
export function setFeatureStats(model: ScorerModel, counts: tf.Tensor2D): void {
  tf.tidy(() => {
    const pooled = tf.matMul(counts, model.encoder.embedding as any);
    const mean = tf.mean(pooled, 0);
    const variance = tf.mean(tf.square(tf.sub(pooled, mean)), 0);
    const std = tf.maximum(tf.sqrt(variance), 1e-4);
    model.encoder.featMean.assign(mean as tf.Tensor1D);
    model.encoder.featStd.assign(std as tf.Tensor1D);
  });
}

export function predictSentence(model: ScorerModel, counts: tf.Tensor2D): tf.Tensor1D {
  return tf.tidy(() => {
    const { deep } = encodeCounts(model, counts);
    const deepOut = tf.matMul(deep, model.heads.sentenceW! as any);
    const wideOut = tf.mul(tf.matMul(counts, model.heads.sentenceWide! as any),
                           model.config.wideScale);
    const out = tf.add(tf.add(deepOut, wideOut), model.heads.sentenceB!);
    return tf.squeeze(out, [1]) as tf.Tensor1D;
  });
}

/** Aspect logits reshaped to [B, 6, 3]. */
export function predictAspectLogits(model: ScorerModel,
                                    counts: tf.Tensor2D): tf.Tensor3D {
  return tf.tidy(() => {
    const { deep } = encodeCounts(model, counts);
    const deepOut = tf.matMul(deep, model.heads.aspectW! as any);
    const wideOut = tf.mul(tf.matMul(counts, model.heads.aspectWide! as any),
                           model.config.wideScale);
    const logits = tf.add(tf.add(deepOut, wideOut), model.heads.aspectB!);
    return tf.reshape(logits, [-1, ASPECTS.length, 3]) as tf.Tensor3D;
  });
}

/** Stable (role, variable) pairs; checkpoint files key weights by role. */
export function variableRoles(model: ScorerModel): Array<[string, tf.Variable]> {
  const roles: Array<[string, tf.Variable | undefined]> = [
    ['embedding', model.encoder.embedding],
    ['w1', model.encoder.w1],
    ['b1', model.encoder.b1],
    ['featMean', model.encoder.featMean],
    ['featStd', model.encoder.featStd],
    ['sentenceW', model.heads.sentenceW],
    ['sentenceWide', model.heads.sentenceWide],
    ['sentenceB', model.heads.sentenceB],
    ['aspectW', model.heads.aspectW],
    ['aspectWide', model.heads.aspectWide],
    ['aspectB', model.heads.aspectB],
  ];
  return roles.filter(([, v]) => v !== undefined) as Array<[string, tf.Variable]>;
}

export function trainableVariables(model: ScorerModel): tf.Variable[] {
  return variableRoles(model).map(([, v]) => v).filter((v) => v.trainable);
}

export function snapshotWeights(model: ScorerModel): Float32Array[] {
  return trainableVariables(model).map((v) => v.dataSync().slice() as Float32Array);
}

export function restoreWeights(model: ScorerModel, snapshot: Float32Array[]): void {
  trainableVariables(model).forEach((v, i) => {
    v.assign(tf.tensor(snapshot[i], v.shape as number[], 'float32'));
  });
}
