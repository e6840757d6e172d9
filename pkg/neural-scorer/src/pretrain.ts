/**
 * Embedding pretraining on the unlabeled findings corpus: CBOW with a full
 * softmax over the vocabulary (predict the center token from the mean of
 * its window). Small vocabularies keep the full softmax cheap and the
 * gradients are plain matmuls. The resulting matrix is the "base model"
 * that training fine-tunes.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import { rng, randMatrix } from './model.js';
import { Vocab, tokenize, vocabFromJson, vocabToJson } from './tokenizer.js';

export interface PretrainArgs {
  embedDim: number;
  window: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
}

export const PRETRAIN_DEFAULTS: PretrainArgs = {
  embedDim: 64,
  window: 2,
  epochs: 3,
  batchSize: 256,
  learningRate: 0.05,
  seed: 12345,
};

interface Example {
  context: number[];
  center: number;
}

function buildExamples(texts: string[], vocab: Vocab, window: number): Example[] {
  const examples: Example[] = [];
  for (const text of texts) {
    const ids = tokenize(text)
      .map((t) => vocab.index.get(t))
      .filter((id): id is number => id !== undefined);
    for (let i = 0; i < ids.length; i++) {
      const context: number[] = [];
      for (let j = i - window; j <= i + window; j++) {
        if (j !== i && j >= 0 && j < ids.length) context.push(ids[j]);
      }
      if (context.length > 0) examples.push({ context, center: ids[i] });
    }
  }
  return examples;
}

export function pretrainEmbeddings(texts: string[], vocab: Vocab,
                                   args: PretrainArgs = PRETRAIN_DEFAULTS):
  tf.Tensor2D {
  const rand = rng(args.seed);
  const examples = buildExamples(texts, vocab, args.window);
  const V = vocab.size;
  const input = tf.variable(randMatrix(rand, V, args.embedDim, 0.3), true);
  const output = tf.variable(randMatrix(rand, args.embedDim, V, 0.3), true);
  const optimizer = tf.train.adam(args.learningRate);

  const order = examples.map((_, i) => i);
  for (let epoch = 0; epoch < args.epochs; epoch++) {
    for (let i = order.length - 1; i > 0; i--) {
      const j = Math.floor(rand() * (i + 1));
      [order[i], order[j]] = [order[j], order[i]];
    }
    let lossSum = 0;
    let batches = 0;
    for (let start = 0; start < order.length; start += args.batchSize) {
      const batch = order.slice(start, start + args.batchSize)
        .map((i) => examples[i]);
      // context mean as a count-vector matmul; center as class index
      const ctxCounts = new Float32Array(batch.length * V);
      const centers = new Int32Array(batch.length);
      batch.forEach((e, b) => {
        const inc = 1.0 / e.context.length;
        for (const id of e.context) ctxCounts[b * V + id] += inc;
        centers[b] = e.center;
      });
      const x = tf.tensor2d(ctxCounts, [batch.length, V]);
      const y = tf.tensor1d(centers, 'int32');
      const loss = optimizer.minimize(() => {
        const ctx = tf.matMul(x, input);
        const logits = tf.matMul(ctx, output);
        return tf.losses.softmaxCrossEntropy(
          tf.oneHot(y, V), logits) as tf.Scalar;
      }, true, [input, output]);
      lossSum += loss!.dataSync()[0];
      batches += 1;
      loss!.dispose();
      x.dispose();
      y.dispose();
    }
    console.log(`pretrain epoch ${epoch + 1}/${args.epochs} ` +
                `loss=${(lossSum / batches).toFixed(4)}`);
  }
  const result = input.clone() as tf.Tensor2D;
  input.dispose();
  output.dispose();
  optimizer.dispose();
  return result;
}

export function saveBaseModel(dir: string, embeddings: tf.Tensor2D,
                              vocab: Vocab, args: PretrainArgs): void {
  fs.mkdirSync(dir, { recursive: true });
  const data = embeddings.dataSync() as Float32Array;
  fs.writeFileSync(path.join(dir, 'base.json'), JSON.stringify({
    shape: embeddings.shape,
    args,
    data: Buffer.from(data.buffer, data.byteOffset, data.byteLength)
      .toString('base64'),
  }) + '\n');
  fs.writeFileSync(path.join(dir, 'vocab.json'),
                   JSON.stringify(vocabToJson(vocab)) + '\n');
}

export function loadBaseModel(dir: string): { embeddings: tf.Tensor2D; vocab: Vocab } {
  const base = JSON.parse(fs.readFileSync(path.join(dir, 'base.json'), 'utf-8'));
  const vocab = vocabFromJson(
    JSON.parse(fs.readFileSync(path.join(dir, 'vocab.json'), 'utf-8')));
  const buf = Buffer.from(base.data, 'base64');
  const data = new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4);
  return { embeddings: tf.tensor2d(data, base.shape as [number, number]), vocab };
}

/**
 * Map pretrained unigram embeddings onto a task vocabulary that may include
 * bigrams: direct copy for known tokens, the mean of the constituents for
 * bigrams, seeded small-random rows otherwise.
 */
export function expandEmbeddings(base: { embeddings: tf.Tensor2D; vocab: Vocab },
                                 taskVocab: Vocab, seed: number): tf.Tensor2D {
  const dim = base.embeddings.shape[1];
  const baseData = base.embeddings.dataSync() as Float32Array;
  const rand = rng(seed + 77);
  const out = new Float32Array(taskVocab.size * dim);
  const copyRow = (srcIdx: number, dstIdx: number, scale = 1.0) => {
    for (let d = 0; d < dim; d++) {
      out[dstIdx * dim + d] += baseData[srcIdx * dim + d] * scale;
    }
  };
  copyRow(0, 0);
  copyRow(1, 1);
  for (const [gram, idx] of taskVocab.index) {
    const known = base.vocab.index.get(gram);
    if (known !== undefined) {
      copyRow(known, idx);
      continue;
    }
    const parts = gram.split('_');
    const partIdx = parts.map((p) => base.vocab.index.get(p));
    if (parts.length > 1 && partIdx.every((p) => p !== undefined)) {
      for (const p of partIdx) copyRow(p!, idx, 1.0 / parts.length);
    } else {
      for (let d = 0; d < dim; d++) {
        out[idx * dim + d] = (rand() * 2 - 1) * 0.3;
      }
    }
  }
  return tf.tensor2d(out, [taskVocab.size, dim]);
}
