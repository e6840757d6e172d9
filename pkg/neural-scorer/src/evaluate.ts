/**
 * Evaluation metrics matching the toolkit's reporting: Pearson r on the
 * full test set (test + random) and the random set alone; binary F1 per
 * (aspect, certain/uncertain) cell with the unweighted 12-cell mean.
 */

import * as tf from '@tensorflow/tfjs';
import { GoldLabels, Split, fullTestIds } from './data.js';
import { ScorerModel, predictAspectLogits, predictSentence } from './model.js';
import { ASPECTS, ASPECT_LABELS, AspectLabel, clampCertainty } from './protocol.js';
import { Vocab, countVector } from './tokenizer.js';

function countMatrix(model: ScorerModel, vocab: Vocab,
                     texts: string[]): tf.Tensor2D {
  const V = vocab.size;
  const flat = new Float32Array(texts.length * V);
  texts.forEach((t, b) => flat.set(countVector(t, vocab, model.config.maxLen), b * V));
  return tf.tensor2d(flat, [texts.length, V]);
}

export function pearsonR(xs: number[], ys: number[]): number {
  const n = xs.length;
  if (n < 2) throw new Error('pearsonR needs at least 2 points');
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let sxy = 0, sxx = 0, syy = 0;
  for (let i = 0; i < n; i++) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) ** 2;
    syy += (ys[i] - my) ** 2;
  }
  if (sxx === 0 || syy === 0) throw new Error('zero variance input');
  return sxy / Math.sqrt(sxx * syy);
}

export function binaryF1(gold: string[], pred: string[], positive: string): number {
  let tp = 0, fp = 0, fn = 0;
  for (let i = 0; i < gold.length; i++) {
    if (pred[i] === positive && gold[i] === positive) tp++;
    else if (pred[i] === positive) fp++;
    else if (gold[i] === positive) fn++;
  }
  return 2 * tp + fp + fn === 0 ? 0 : (2 * tp) / (2 * tp + fp + fn);
}

export function batchPredictSentence(model: ScorerModel, vocab: Vocab,
                                     texts: string[], batchSize = 256): number[] {
  const out: number[] = [];
  for (let i = 0; i < texts.length; i += batchSize) {
    const chunk = texts.slice(i, i + batchSize);
    const counts = countMatrix(model, vocab, chunk);
    const preds = predictSentence(model, counts);
    out.push(...(preds.dataSync() as Float32Array));
    counts.dispose();
    preds.dispose();
  }
  return out.map(clampCertainty);
}

export function batchPredictAspects(model: ScorerModel, vocab: Vocab,
                                    texts: string[], batchSize = 256):
  Array<Record<string, AspectLabel>> {
  const out: Array<Record<string, AspectLabel>> = [];
  for (let i = 0; i < texts.length; i += batchSize) {
    const chunk = texts.slice(i, i + batchSize);
    const counts = countMatrix(model, vocab, chunk);
    const logits = predictAspectLogits(model, counts);
    const argmax = tf.argMax(logits, 2);
    const flat = argmax.dataSync() as Int32Array;
    for (let b = 0; b < chunk.length; b++) {
      const labels: Record<string, AspectLabel> = {};
      ASPECTS.forEach((aspect, a) => {
        labels[aspect] = ASPECT_LABELS[flat[b * ASPECTS.length + a]];
      });
      out.push(labels);
    }
    counts.dispose();
    logits.dispose();
    argmax.dispose();
  }
  return out;
}

export interface EvalReport {
  sentence?: { r_full_test: number; r_random_set: number;
               n_full_test: number; n_random_set: number };
  aspects?: { cells: Array<{ aspect: string; label: string; f1: number }>;
              mean_f1: number };
}

export function evaluateModel(model: ScorerModel, vocab: Vocab,
                              findings: Map<string, string>, gold: GoldLabels,
                              split: Split,
                              tasks: { sentence: boolean; aspects: boolean }):
  EvalReport {
  const report: EvalReport = {};
  if (tasks.sentence) {
    const evalIds = (ids: string[]) => {
      const usable = ids.filter((id) => findings.has(id) && gold.sentence.has(id));
      const preds = batchPredictSentence(
        model, vocab, usable.map((id) => findings.get(id)!));
      const ys = usable.map((id) => gold.sentence.get(id)!);
      return { r: pearsonR(preds, ys), n: usable.length };
    };
    const full = evalIds(fullTestIds(split));
    const rand = evalIds(split.random_test);
    report.sentence = {
      r_full_test: full.r, r_random_set: rand.r,
      n_full_test: full.n, n_random_set: rand.n,
    };
  }
  if (tasks.aspects) {
    const ids = fullTestIds(split)
      .filter((id) => findings.has(id) && gold.aspects.has(id));
    const preds = batchPredictAspects(
      model, vocab, ids.map((id) => findings.get(id)!));
    const cells: Array<{ aspect: string; label: string; f1: number }> = [];
    for (const aspect of ASPECTS) {
      const g = ids.map((id) => gold.aspects.get(id)![aspect]);
      const p = preds.map((row) => row[aspect]);
      for (const label of ['certain', 'uncertain'] as const) {
        cells.push({ aspect, label, f1: binaryF1(g, p, label) });
      }
    }
    report.aspects = {
      cells,
      mean_f1: cells.reduce((a, c) => a + c.f1, 0) / cells.length,
    };
  }
  return report;
}
