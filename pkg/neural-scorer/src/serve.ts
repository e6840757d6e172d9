/**
 * Protocol endpoint: line-delimited JSON over stdio or TCP. Malformed
 * requests get an error object on the same stream and the process stays
 * alive. Inference is deterministic for a fixed checkpoint.
 */

import * as net from 'net';
import * as readline from 'readline';
import { Writable, Readable } from 'stream';
import { loadCheckpoint } from './checkpoint.js';
import { batchPredictAspects, batchPredictSentence } from './evaluate.js';
import { ScorerModel } from './model.js';
import { RequestSchema, ScoreResponse, clampCertainty } from './protocol.js';
import { Vocab } from './tokenizer.js';

export interface ServingModel {
  respond(id: string, text: string): ScoreResponse;
}

export class CheckpointScorer implements ServingModel {
  constructor(private sentenceModel: { model: ScorerModel; vocab: Vocab },
              private aspectModel: { model: ScorerModel; vocab: Vocab }) {}

  static fromDirs(sentenceDir: string, aspectDir: string): CheckpointScorer {
    const s = loadCheckpoint(sentenceDir);
    const a = loadCheckpoint(aspectDir);
    if (!s.meta.tasks.sentence) throw new Error(`${sentenceDir} has no sentence head`);
    if (!a.meta.tasks.aspects) throw new Error(`${aspectDir} has no aspect heads`);
    return new CheckpointScorer({ model: s.model, vocab: s.vocab },
                                { model: a.model, vocab: a.vocab });
  }

  /** One checkpoint carrying both heads (joint training). */
  static fromJointDir(dir: string): CheckpointScorer {
    const c = loadCheckpoint(dir);
    if (!c.meta.tasks.sentence || !c.meta.tasks.aspects) {
      throw new Error(`${dir} does not carry both heads`);
    }
    const pair = { model: c.model, vocab: c.vocab };
    return new CheckpointScorer(pair, pair);
  }

  respond(id: string, text: string): ScoreResponse {
    const value = batchPredictSentence(
      this.sentenceModel.model, this.sentenceModel.vocab, [text])[0];
    const aspects = batchPredictAspects(
      this.aspectModel.model, this.aspectModel.vocab, [text])[0];
    return {
      id,
      sentence_certainty: clampCertainty(value),
      aspects: aspects as ScoreResponse['aspects'],
    };
  }
}

export function handleLine(model: ServingModel, line: string): string {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch (err) {
    return JSON.stringify({ error: `bad request: not JSON (${(err as Error).message})` });
  }
  const request = RequestSchema.safeParse(parsed);
  if (!request.success) {
    return JSON.stringify({ error: `bad request: ${request.error.message}` });
  }
  const response = model.respond(request.data.id, request.data.text);
  return JSON.stringify(response);
}

export function serveStream(model: ServingModel, input: Readable,
                            output: Writable): Promise<void> {
  const rl = readline.createInterface({ input, crlfDelay: Infinity });
  return new Promise((resolve) => {
    rl.on('line', (line) => {
      if (!line.trim()) return;
      output.write(handleLine(model, line) + '\n');
    });
    rl.on('close', () => resolve());
  });
}

export function serveTcp(model: ServingModel, port: number,
                         onListen?: (port: number) => void): net.Server {
  const server = net.createServer((socket) => {
    const rl = readline.createInterface({ input: socket, crlfDelay: Infinity });
    rl.on('line', (line) => {
      if (!line.trim()) return;
      socket.write(handleLine(model, line) + '\n');
    });
    socket.on('error', () => socket.destroy());
  });
  server.listen(port, '127.0.0.1', () => {
    const addr = server.address() as net.AddressInfo;
    onListen?.(addr.port);
  });
  return server;
}
