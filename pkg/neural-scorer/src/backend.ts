/**
 * Backend selection: the WASM backend when available (an order of magnitude
 * faster for the matmuls that dominate training), single-threaded for
 * deterministic reductions; falls back to the pure-JS cpu backend.
 */

import * as path from 'path';
import { fileURLToPath } from 'url';
import * as tf from '@tensorflow/tfjs';

let initialized = false;

export async function initBackend(): Promise<string> {
  if (initialized) return tf.getBackend();
  try {
    const wasm = await import('@tensorflow/tfjs-backend-wasm');
    const here = path.dirname(fileURLToPath(import.meta.url));
    wasm.setWasmPaths(path.join(
      here, '..', 'node_modules', '@tensorflow', 'tfjs-backend-wasm', 'dist') + path.sep);
    wasm.setThreadsCount(1);
    await tf.setBackend('wasm');
  } catch {
    await tf.setBackend('cpu');
  }
  await tf.ready();
  initialized = true;
  return tf.getBackend();
}
