/**
 * neural-scorer CLI.
 *
 *   pretrain  --findings F --out DIR [--embed-dim 64 --epochs 3 --seed 12345]
 *   train     --findings F --annotations F --split F --out DIR
 *             [--task sentence|aspects|joint] [--base-model DIR]
 *             [--batch-size 128 --lr 0.0001 --epochs 50 --max-len 60 --seed 1]
 *   serve     --sentence DIR --aspects DIR | --joint DIR
 *             [--transport stdio|tcp --port 8900]
 *   replicate --findings F --annotations F --split F --out DIR [--seeds 5]
 */

import * as fs from 'fs';
import * as path from 'path';
import { initBackend } from './backend.js';
import { aggregateGold, readAnnotations, readFindings, readSplit } from './data.js';
import { saveCheckpoint } from './checkpoint.js';
import { evaluateModel } from './evaluate.js';
import { PRETRAIN_DEFAULTS, expandEmbeddings, loadBaseModel, pretrainEmbeddings, saveBaseModel } from './pretrain.js';
import { CheckpointScorer, serveStream, serveTcp } from './serve.js';
import { buildVocab } from './tokenizer.js';
import { TRAIN_DEFAULTS, TrainArgs, buildTaskData, trainModel } from './train.js';

function parseArgs(argv: string[]): Record<string, string> {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    if (!argv[i].startsWith('--')) continue;
    const key = argv[i].slice(2);
    const next = argv[i + 1];
    if (next === undefined || next.startsWith('--')) {
      args[key] = 'true';
    } else {
      args[key] = next;
      i++;
    }
  }
  return args;
}

function need(args: Record<string, string>, key: string): string {
  const v = args[key];
  if (v === undefined) {
    console.error(`missing required option --${key}`);
    process.exit(2);
  }
  return v;
}

function cmdPretrain(args: Record<string, string>): void {
  const findings = readFindings(need(args, 'findings'));
  const texts = findings.map((f) => f.text);
  const vocab = buildVocab(texts, Number(args['vocab-size'] ?? 8000), 1);
  const pargs = {
    ...PRETRAIN_DEFAULTS,
    embedDim: Number(args['embed-dim'] ?? PRETRAIN_DEFAULTS.embedDim),
    epochs: Number(args['epochs'] ?? PRETRAIN_DEFAULTS.epochs),
    seed: Number(args['seed'] ?? PRETRAIN_DEFAULTS.seed),
  };
  const embeddings = pretrainEmbeddings(texts, vocab, pargs);
  saveBaseModel(need(args, 'out'), embeddings, vocab, pargs);
  console.log(`base model written to ${args['out']} ` +
              `(vocab ${vocab.size}, dim ${pargs.embedDim})`);
}

export function runTraining(args: Record<string, string>): void {
  const findings = readFindings(need(args, 'findings'));
  const gold = aggregateGold(readAnnotations(need(args, 'annotations')));
  const split = readSplit(need(args, 'split'));
  const outDir = need(args, 'out');
  const task = args['task'] ?? 'sentence';
  if (!['sentence', 'aspects', 'joint'].includes(task)) {
    console.error(`unknown --task ${task}`);
    process.exit(2);
  }
  const tasks = {
    sentence: task === 'sentence' || task === 'joint',
    aspects: task === 'aspects' || task === 'joint',
  };

  const targs: TrainArgs = {
    ...TRAIN_DEFAULTS,
    batchSize: Number(args['batch-size'] ?? TRAIN_DEFAULTS.batchSize),
    learningRate: Number(args['lr'] ?? TRAIN_DEFAULTS.learningRate),
    epochs: Number(args['epochs'] ?? TRAIN_DEFAULTS.epochs),
    maxLen: Number(args['max-len'] ?? TRAIN_DEFAULTS.maxLen),
    embedDim: Number(args['embed-dim'] ?? TRAIN_DEFAULTS.embedDim),
    hiddenDim: Number(args['hidden-dim'] ?? TRAIN_DEFAULTS.hiddenDim),
    seed: Number(args['seed'] ?? TRAIN_DEFAULTS.seed),
    joint: task === 'joint',
    logEvery: Number(args['log-every'] ?? TRAIN_DEFAULTS.logEvery),
    l2: Number(args['l2'] ?? TRAIN_DEFAULTS.l2),
    freezeEmbedding: args['freeze-embedding'] === 'true',
  };

  const texts = new Map(findings.map((f) => [f.finding_id, f.text]));
  const vocab = buildVocab(findings.map((f) => f.text),
                           Number(args['vocab-size'] ?? 8000));
  let pretrained;
  if (args['base-model']) {
    const base = loadBaseModel(args['base-model']);
    pretrained = expandEmbeddings(base, vocab, targs.seed);
    targs.embedDim = base.embeddings.shape[1];
    base.embeddings.dispose();
    console.log(`fine-tuning from base model ${args['base-model']}`);
  } else {
    console.log('no base model given: training the encoder from scratch');
  }

  const config = {
    vocabSize: vocab.size,
    embedDim: targs.embedDim,
    hiddenDim: targs.hiddenDim,
    maxLen: targs.maxLen,
    featureScale: Number(args['feature-scale'] ?? 1),
    wideScale: Number(args['wide-scale'] ?? 400),
  };
  const trainData = buildTaskData(texts, gold, split.train, vocab,
                                  targs.maxLen, tasks);
  const valData = buildTaskData(texts, gold, split.val, vocab,
                                targs.maxLen, tasks);
  console.log(`training task=${task} on ${trainData.n} findings ` +
              `(val ${valData.n}), vocab ${vocab.size}`);
  const t0 = Date.now();
  const result = trainModel(config, trainData, valData, targs, tasks, pretrained);
  const seconds = (Date.now() - t0) / 1000;
  console.log(`best val loss ${result.bestValLoss.toFixed(4)} ` +
              `at epoch ${result.bestEpoch + 1}; ${seconds.toFixed(0)}s`);

  saveCheckpoint(outDir, result.model, vocab, {
    config, tasks, seed: targs.seed,
    trainArgs: { ...targs, task },
  });
  const report = evaluateModel(result.model, vocab, texts, gold, split, tasks);
  fs.writeFileSync(path.join(outDir, 'eval.json'),
                   JSON.stringify(report, null, 2) + '\n');
  if (report.sentence) {
    console.log(`sentence r: full=${report.sentence.r_full_test.toFixed(3)} ` +
                `random=${report.sentence.r_random_set.toFixed(3)}`);
  }
  if (report.aspects) {
    console.log(`aspect mean binary-F1: ${report.aspects.mean_f1.toFixed(3)}`);
  }
}

function cmdServe(args: Record<string, string>): void {
  const scorer = args['joint']
    ? CheckpointScorer.fromJointDir(args['joint'])
    : CheckpointScorer.fromDirs(need(args, 'sentence'), need(args, 'aspects'));
  const transport = args['transport'] ?? 'stdio';
  if (transport === 'stdio') {
    void serveStream(scorer, process.stdin, process.stdout);
  } else {
    const port = Number(args['port'] ?? 8900);
    serveTcp(scorer, port, (p) => console.error(`listening on 127.0.0.1:${p}`));
  }
}

function cmdReplicate(args: Record<string, string>): void {
  // Table-1 style reporting: run N seeds, print mean +- sd
  const seeds = Number(args['seeds'] ?? 5);
  const outBase = need(args, 'out');
  const rFull: number[] = [];
  const rRandom: number[] = [];
  for (let s = 0; s < seeds; s++) {
    const dir = path.join(outBase, `seed-${s}`);
    runTraining({ ...args, out: dir, seed: String(s + 1), task: 'sentence' });
    const report = JSON.parse(
      fs.readFileSync(path.join(dir, 'eval.json'), 'utf-8'));
    rFull.push(report.sentence.r_full_test);
    rRandom.push(report.sentence.r_random_set);
  }
  const stats = (xs: number[]) => {
    const mean = xs.reduce((a, b) => a + b, 0) / xs.length;
    const sd = Math.sqrt(
      xs.reduce((a, b) => a + (b - mean) ** 2, 0) / (xs.length - 1));
    return `${mean.toFixed(3)} +- ${sd.toFixed(3)}`;
  };
  const summary = {
    seeds,
    r_full_test: stats(rFull),
    r_random_set: stats(rRandom),
    runs: rFull.map((r, i) => ({ seed: i + 1, r_full_test: r,
                                 r_random_set: rRandom[i] })),
  };
  fs.writeFileSync(path.join(outBase, 'replication.json'),
                   JSON.stringify(summary, null, 2) + '\n');
  console.log(`r on full test set: ${summary.r_full_test}`);
  console.log(`r on random set:    ${summary.r_random_set}`);
}

export async function main(argv: string[]): Promise<void> {
  const [command, ...rest] = argv;
  const args = parseArgs(rest);
  const backend = await initBackend();
  console.error(`tfjs backend: ${backend}`);
  switch (command) {
    case 'pretrain': return cmdPretrain(args);
    case 'train': return runTraining(args);
    case 'serve': return cmdServe(args);
    case 'replicate': return cmdReplicate(args);
    default:
      console.error('usage: cli.ts <pretrain|train|serve|replicate> [options]');
      process.exit(2);
  }
}

const isMain = process.argv[1] && (
  process.argv[1].endsWith('cli.ts') || process.argv[1].endsWith('cli.js'));
if (isMain) {
  main(process.argv.slice(2)).catch((err) => {
    console.error(err);
    process.exit(1);
  });
}
