/**
 * Wire-protocol conformance (acceptance: 1000-request replay with zero
 * schema violations and zero id mismatches), served by a lightweight model
 * in-process and over TCP.
 */

import { PassThrough } from 'stream';
import * as net from 'net';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { initBackend } from '../src/backend.js';
import { createModel } from '../src/model.js';
import { ResponseSchema } from '../src/protocol.js';
import { CheckpointScorer, handleLine, serveTcp } from '../src/serve.js';
import { buildVocab } from '../src/tokenizer.js';

function tinyScorer(): CheckpointScorer {
  const vocab = buildVocab(['the treatment may reduce pain',
                            'we confirmed a decisive effect',
                            'results remain unproven'], 64);
  const config = { vocabSize: vocab.size, embedDim: 8, hiddenDim: 8,
                   maxLen: 60, featureScale: 1, wideScale: 400 };
  const model = createModel(config, 7);
  const pair = { model, vocab };
  return new CheckpointScorer(pair, pair);
}

beforeAll(async () => {
  await initBackend();
});

describe('request handling', () => {
  it('answers a valid request with a schema-valid response', () => {
    const scorer = tinyScorer();
    const line = handleLine(scorer, JSON.stringify({ id: 'x1', text: 'It may work.' }));
    const parsed = ResponseSchema.parse(JSON.parse(line));
    expect(parsed.id).toBe('x1');
    expect(parsed.sentence_certainty).toBeGreaterThanOrEqual(1);
    expect(parsed.sentence_certainty).toBeLessThanOrEqual(6);
  });

  it('answers malformed requests with an error object and keeps serving', () => {
    const scorer = tinyScorer();
    const bad = handleLine(scorer, 'this is not json');
    expect(JSON.parse(bad).error).toMatch(/not JSON/);
    const missing = handleLine(scorer, JSON.stringify({ text: 'no id' }));
    expect(JSON.parse(missing).error).toBeTruthy();
    const ok = handleLine(scorer, JSON.stringify({ id: 'x', text: 'still alive' }));
    expect(ResponseSchema.parse(JSON.parse(ok)).id).toBe('x');
  });

  it('handles empty text without crashing', () => {
    const scorer = tinyScorer();
    const line = handleLine(scorer, JSON.stringify({ id: 'e', text: '' }));
    const parsed = ResponseSchema.parse(JSON.parse(line));
    expect(parsed.id).toBe('e');
  });

  it('is deterministic for a fixed model', () => {
    const scorer = tinyScorer();
    const req = JSON.stringify({ id: 'd', text: 'The effect may be decisive.' });
    expect(handleLine(scorer, req)).toBe(handleLine(scorer, req));
  });
});

describe('1000-request replay', () => {
  it('in-process: zero schema violations, zero id mismatches', () => {
    const scorer = tinyScorer();
    const ids = new Set<string>();
    for (let i = 0; i < 1000; i++) {
      const id = `replay-${i}`;
      const text = `Finding number ${i} ${i % 3 ? 'may ' : ''}matter.`;
      const line = handleLine(scorer, JSON.stringify({ id, text }));
      const parsed = ResponseSchema.parse(JSON.parse(line));
      expect(parsed.id).toBe(id);
      ids.add(parsed.id);
    }
    expect(ids.size).toBe(1000);
  }, 120_000);

  it('tcp transport round-trips', async () => {
    const scorer = tinyScorer();
    const server = serveTcp(scorer, 0);
    await new Promise((resolve) => server.once('listening', resolve));
    const port = (server.address() as net.AddressInfo).port;
    const socket = net.createConnection(port, '127.0.0.1');
    const received: string[] = [];
    const done = new Promise<void>((resolve) => {
      let buffer = '';
      socket.on('data', (chunk) => {
        buffer += chunk.toString();
        let idx;
        while ((idx = buffer.indexOf('\n')) >= 0) {
          received.push(buffer.slice(0, idx));
          buffer = buffer.slice(idx + 1);
          if (received.length === 50) {
            socket.end();
            resolve();
          }
        }
      });
    });
    for (let i = 0; i < 50; i++) {
      socket.write(JSON.stringify({ id: `t${i}`, text: `Claim ${i}.` }) + '\n');
    }
    await done;
    server.close();
    expect(received).toHaveLength(50);
    received.forEach((line, i) => {
      const parsed = ResponseSchema.parse(JSON.parse(line));
      expect(parsed.id).toBe(`t${i}`);
    });
  }, 60_000);

  it('stdio-style stream serving preserves ordering per request', async () => {
    const { serveStream } = await import('../src/serve.js');
    const scorer = tinyScorer();
    const input = new PassThrough();
    const output = new PassThrough();
    const serving = serveStream(scorer, input, output);
    const chunks: Buffer[] = [];
    output.on('data', (c) => chunks.push(c));
    for (let i = 0; i < 20; i++) {
      input.write(JSON.stringify({ id: `s${i}`, text: `Text ${i}` }) + '\n');
    }
    input.end();
    await serving;
    const lines = Buffer.concat(chunks).toString().trim().split('\n');
    expect(lines).toHaveLength(20);
    lines.forEach((line, i) => {
      expect(ResponseSchema.parse(JSON.parse(line)).id).toBe(`s${i}`);
    });
  });
});
