/**
 * Training: fine-tune the encoder with a sentence regression head and/or six
 * aspect classification heads. Sentence and aspect models train as separate
 * runs by default; --joint shares the trunk with equal loss weights.
 *
 * Recipe defaults: batch 128, Adam at 1e-4, max_len 60, 50 epochs, keep the
 * checkpoint with the lowest validation loss.
 */

import * as tf from '@tensorflow/tfjs';
import { GoldLabels } from './data.js';
import {
  ModelConfig,
  ScorerModel,
  createModel,
  predictAspectLogits,
  predictSentence,
  restoreWeights,
  rng,
  setFeatureStats,
  snapshotWeights,
  trainableVariables,
} from './model.js';
import { ASPECTS, ASPECT_LABELS } from './protocol.js';
import { Vocab, countVector } from './tokenizer.js';

export interface TrainArgs {
  freezeEmbedding: boolean;
  batchSize: number;
  learningRate: number;
  epochs: number;
  maxLen: number;
  embedDim: number;
  hiddenDim: number;
  seed: number;
  joint: boolean;
  logEvery: number;
  l2: number;
}

export const TRAIN_DEFAULTS: TrainArgs = {
  freezeEmbedding: false,
  batchSize: 128,
  learningRate: 1e-4,
  epochs: 50,
  maxLen: 60,
  embedDim: 64,
  hiddenDim: 96,
  seed: 1,
  joint: false,
  logEvery: 10,
  l2: 1e-4,
};

/** In-memory dataset: parallel arrays over usable findings. */
export interface TaskData {
  counts: Float32Array[];        // [N] x [V]
  sentenceY?: number[];          // [N]
  aspectY?: number[][];          // [N][6] class indices
  n: number;
  vocabSize: number;
}

export function buildTaskData(findingTexts: Map<string, string>,
                              gold: GoldLabels, idList: string[], vocab: Vocab,
                              maxLen: number,
                              tasks: { sentence: boolean; aspects: boolean }):
  TaskData {
  const usable = idList.filter((id) => findingTexts.has(id)
    && (!tasks.sentence || gold.sentence.has(id))
    && (!tasks.aspects || gold.aspects.has(id)));
  const counts = usable.map(
    (id) => countVector(findingTexts.get(id)!, vocab, maxLen));
  const data: TaskData = { counts, n: usable.length, vocabSize: vocab.size };
  if (tasks.sentence) {
    data.sentenceY = usable.map((id) => gold.sentence.get(id)!);
  }
  if (tasks.aspects) {
    const labelIdx = (l: string) => ASPECT_LABELS.indexOf(l as any);
    data.aspectY = usable.map(
      (id) => ASPECTS.map((a) => labelIdx(gold.aspects.get(id)![a])));
  }
  return data;
}

function batchTensors(data: TaskData, idx: number[]) {
  const V = data.vocabSize;
  const flat = new Float32Array(idx.length * V);
  idx.forEach((i, b) => flat.set(data.counts[i], b * V));
  const counts = tf.tensor2d(flat, [idx.length, V]);
  const sentenceY = data.sentenceY
    ? tf.tensor1d(idx.map((i) => data.sentenceY![i]))
    : undefined;
  const aspectY = data.aspectY
    ? tf.tensor2d(idx.map((i) => data.aspectY![i]), undefined, 'int32')
    : undefined;
  return { counts, sentenceY, aspectY };
}

function lossOn(model: ScorerModel, counts: tf.Tensor2D,
                sentenceY?: tf.Tensor1D, aspectY?: tf.Tensor2D,
                l2 = 0): tf.Scalar {
  return tf.tidy(() => {
    let loss: tf.Scalar = tf.scalar(0);
    if (l2 > 0) {
      // shrinkage on everything above the embedding, the same role the
      // ridge penalty plays for the bag-of-words baseline; the wide path is
      // penalized on its effective (scaled) coefficients
      for (const v of [model.encoder.w1, model.heads.sentenceW,
                       model.heads.aspectW]) {
        if (v) loss = tf.add(loss, tf.mul(l2, tf.sum(tf.square(v)))) as tf.Scalar;
      }
      const ws = model.config.wideScale;
      for (const v of [model.heads.sentenceWide, model.heads.aspectWide]) {
        if (v) {
          loss = tf.add(loss, tf.mul(l2 * ws * ws,
                                     tf.sum(tf.square(v)))) as tf.Scalar;
        }
      }
    }
    if (sentenceY) {
      const pred = predictSentence(model, counts);
      loss = tf.add(loss, tf.mean(tf.squaredDifference(pred, sentenceY))) as tf.Scalar;
    }
    if (aspectY) {
      const logits = predictAspectLogits(model, counts);
      const oneHot = tf.oneHot(aspectY, ASPECT_LABELS.length);
      const ce = tf.losses.softmaxCrossEntropy(
        tf.reshape(oneHot, [-1, ASPECT_LABELS.length]),
        tf.reshape(logits, [-1, ASPECT_LABELS.length]));
      loss = tf.add(loss, ce) as tf.Scalar;
    }
    return loss as tf.Scalar;
  });
}

export interface TrainResult {
  model: ScorerModel;
  bestValLoss: number;
  bestEpoch: number;
  history: Array<{ epoch: number; trainLoss: number; valLoss: number }>;
}

/** Epoch loop with seeded shuffling and lowest-validation-loss checkpointing. */
export function trainModel(config: ModelConfig, train: TaskData, val: TaskData,
                           args: TrainArgs,
                           tasks: { sentence: boolean; aspects: boolean },
                           pretrained?: tf.Tensor2D): TrainResult {
  const model = createModel(config, args.seed, pretrained, tasks,
                            args.freezeEmbedding);
  const allTrain = batchTensors(train, train.counts.map((_, i) => i));
  setFeatureStats(model, allTrain.counts);
  allTrain.counts.dispose();
  allTrain.sentenceY?.dispose();
  allTrain.aspectY?.dispose();
  const optimizer = tf.train.adam(args.learningRate);
  const rand = rng(args.seed + 101);
  const order = Array.from({ length: train.n }, (_, i) => i);
  const valBatch = batchTensors(val, val.counts.map((_, i) => i));

  let bestValLoss = Infinity;
  let bestEpoch = -1;
  let bestWeights = snapshotWeights(model);
  const history: TrainResult['history'] = [];

  for (let epoch = 0; epoch < args.epochs; epoch++) {
    for (let i = order.length - 1; i > 0; i--) {
      const j = Math.floor(rand() * (i + 1));
      [order[i], order[j]] = [order[j], order[i]];
    }
    let lossSum = 0;
    let batches = 0;
    for (let start = 0; start < order.length; start += args.batchSize) {
      const idx = order.slice(start, start + args.batchSize);
      const batch = batchTensors(train, idx);
      const loss = optimizer.minimize(
        () => lossOn(model, batch.counts, batch.sentenceY, batch.aspectY,
                     args.l2),
        true, trainableVariables(model)) as tf.Scalar;
      lossSum += loss.dataSync()[0];
      batches += 1;
      loss.dispose();
      batch.counts.dispose();
      batch.sentenceY?.dispose();
      batch.aspectY?.dispose();
    }
    const valLossT = lossOn(model, valBatch.counts, valBatch.sentenceY,
                            valBatch.aspectY);
    const valLoss = valLossT.dataSync()[0];
    valLossT.dispose();
    const trainLoss = lossSum / Math.max(batches, 1);
    history.push({ epoch, trainLoss, valLoss });
    if (valLoss < bestValLoss) {
      bestValLoss = valLoss;
      bestEpoch = epoch;
      bestWeights = snapshotWeights(model);
    }
    if ((epoch + 1) % args.logEvery === 0 || epoch === args.epochs - 1) {
      console.log(`epoch ${epoch + 1}/${args.epochs} ` +
                  `train=${trainLoss.toFixed(4)} val=${valLoss.toFixed(4)}` +
                  (bestEpoch === epoch ? ' *' : ''));
    }
  }
  valBatch.counts.dispose();
  valBatch.sentenceY?.dispose();
  valBatch.aspectY?.dispose();
  restoreWeights(model, bestWeights);
  optimizer.dispose();
  return { model, bestValLoss, bestEpoch, history };
}
