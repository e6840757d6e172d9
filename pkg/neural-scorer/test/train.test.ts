/**
 * Training behavior: checkpoint round-trip, the 20-item overfit sanity
 * check, and the acceptance bands from a full recipe run on the released
 * data (batch 128, Adam 1e-4, max_len 60, 50 epochs, best-val checkpoint).
 */

import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import { fileURLToPath } from 'url';
import { beforeAll, describe, expect, it } from 'vitest';
import { initBackend } from '../src/backend.js';
import { loadCheckpoint, saveCheckpoint } from '../src/checkpoint.js';
import { createModel } from '../src/model.js';
import { expandEmbeddings, pretrainEmbeddings } from '../src/pretrain.js';
import { aggregateGold, readAnnotations, readFindings, readSplit } from '../src/data.js';
import { batchPredictSentence, evaluateModel } from '../src/evaluate.js';
import { buildVocab } from '../src/tokenizer.js';
import { TRAIN_DEFAULTS, buildTaskData, trainModel } from '../src/train.js';

const ROOT = path.join(path.dirname(fileURLToPath(import.meta.url)), '..', '..');
const RELEASED = path.join(ROOT, 'data', 'released');

beforeAll(async () => {
  await initBackend();
});

function releasedData() {
  const findings = readFindings(path.join(RELEASED, 'findings.jsonl'));
  const gold = aggregateGold(
    readAnnotations(path.join(RELEASED, 'annotations.jsonl')));
  const split = readSplit(path.join(RELEASED, 'split.json'));
  const texts = new Map(findings.map((f) => [f.finding_id, f.text]));
  return { findings, gold, split, texts };
}

describe('checkpointing', () => {
  it('save/load round-trips predictions exactly', () => {
    const vocab = buildVocab(['alpha beta gamma', 'beta gamma delta may'], 64);
    const config = { vocabSize: vocab.size, embedDim: 8, hiddenDim: 8,
                     maxLen: 60, featureScale: 1, wideScale: 400 };
    const model = createModel(config, 3);
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'ckpt-'));
    saveCheckpoint(dir, model, vocab, {
      config, tasks: { sentence: true, aspects: true }, seed: 3, trainArgs: {},
    });
    const loaded = loadCheckpoint(dir);
    const texts = ['alpha may beta', 'gamma delta'];
    const a = batchPredictSentence(model, vocab, texts);
    const b = batchPredictSentence(loaded.model, loaded.vocab, texts);
    expect(b).toEqual(a);
  });
});

describe('overfit sanity', () => {
  it('reaches near-zero training loss on a 20-item subset', () => {
    const { gold, split, texts } = releasedData();
    const vocab = buildVocab([...texts.values()], 4000);
    const subset = split.train.filter((id) => gold.sentence.has(id)).slice(0, 20);
    const data = buildTaskData(texts, gold, subset, vocab, 60,
                               { sentence: true, aspects: false });
    const config = { vocabSize: vocab.size, embedDim: 32, hiddenDim: 32,
                     maxLen: 60, featureScale: 1, wideScale: 400 };
    const result = trainModel(config, data, data,
                              { ...TRAIN_DEFAULTS, epochs: 120, seed: 5,
                                logEvery: 1000 },
                              { sentence: true, aspects: false });
    const last = result.history[result.history.length - 1];
    expect(last.trainLoss).toBeLessThan(0.1);
  }, 240_000);
});

describe('acceptance bands on the released data', () => {
  it('sentence r in [0.55, 0.72] full, >= 0.48 random; aspect mean F1 >= 0.55',
     () => {
    const { gold, split, texts } = releasedData();
    const corpus = [...texts.values()];
    const vocab = buildVocab(corpus, 8000);
    const uniVocab = buildVocab(corpus, 8000, 1);
    const pretrained = pretrainEmbeddings(corpus, uniVocab,
                                          { embedDim: 64, window: 2, epochs: 3,
                                            batchSize: 256, learningRate: 0.05,
                                            seed: 12345 });
    const expanded = expandEmbeddings(
      { embeddings: pretrained, vocab: uniVocab }, vocab, 1);
    const config = { vocabSize: vocab.size, embedDim: 64, hiddenDim: 96,
                     maxLen: 60, featureScale: 1, wideScale: 400 };

    const sentTrain = buildTaskData(texts, gold, split.train, vocab, 60,
                                    { sentence: true, aspects: false });
    const sentVal = buildTaskData(texts, gold, split.val, vocab, 60,
                                  { sentence: true, aspects: false });
    const sent = trainModel(config, sentTrain, sentVal,
                            { ...TRAIN_DEFAULTS, seed: 1, logEvery: 1000 },
                            { sentence: true, aspects: false },
                            expanded.clone());
    const sentReport = evaluateModel(sent.model, vocab, texts, gold, split,
                                     { sentence: true, aspects: false });
    expect(sentReport.sentence!.r_full_test).toBeGreaterThanOrEqual(0.55);
    expect(sentReport.sentence!.r_full_test).toBeLessThanOrEqual(0.72);
    expect(sentReport.sentence!.r_random_set).toBeGreaterThanOrEqual(0.48);

    const aspTrain = buildTaskData(texts, gold, split.train, vocab, 60,
                                   { sentence: false, aspects: true });
    const aspVal = buildTaskData(texts, gold, split.val, vocab, 60,
                                 { sentence: false, aspects: true });
    const asp = trainModel(config, aspTrain, aspVal,
                           { ...TRAIN_DEFAULTS, seed: 1, logEvery: 1000 },
                           { sentence: false, aspects: true }, expanded);
    const aspReport = evaluateModel(asp.model, vocab, texts, gold, split,
                                    { sentence: false, aspects: true });
    expect(aspReport.aspects!.mean_f1).toBeGreaterThanOrEqual(0.55);
  }, 600_000);
});
