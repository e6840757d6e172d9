/**
 * Tokenization and vocabulary, matching the toolkit's contract: lowercase,
 * split on any non-alphanumeric character, drop empties. Index 0 is PAD,
 * index 1 is UNK.
 */

export const PAD = 0;
export const UNK = 1;

export function tokenize(text: string): string[] {
  return text.toLowerCase().split(/[^\p{L}\p{N}]+/u).filter((t) => t.length > 0);
}

/** Tokens plus adjacent bigrams ("a_b"): multiword certainty cues carry a
 * lot of the signal. */
export function grams(tokens: string[], order = 2): string[] {
  const out = [...tokens];
  if (order >= 2) {
    for (let i = 0; i + 1 < tokens.length; i++) {
      out.push(`${tokens[i]}_${tokens[i + 1]}`);
    }
  }
  return out;
}

export interface Vocab {
  index: Map<string, number>;
  size: number;
  order: number;
}

export function buildVocab(texts: string[], maxSize = 8000, order = 2): Vocab {
  const freq = new Map<string, number>();
  for (const text of texts) {
    for (const g of grams(tokenize(text), order)) {
      freq.set(g, (freq.get(g) ?? 0) + 1);
    }
  }
  // frequency rank, ties lexicographic, deterministic
  const ranked = [...freq.entries()]
    .sort((a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : 1))
    .slice(0, maxSize - 2);
  const index = new Map<string, number>();
  ranked.forEach(([tok], i) => index.set(tok, i + 2));
  return { index, size: index.size + 2, order };
}

export function encode(text: string, vocab: Vocab, maxLen: number): number[] {
  const ids = tokenize(text).slice(0, maxLen)
    .map((t) => vocab.index.get(t) ?? UNK);
  while (ids.length < maxLen) ids.push(PAD);
  return ids;
}

/**
 * Length-normalized gram-count vector over the vocabulary (grams of the
 * first maxLen tokens; OOV unigram mass lands on UNK). The encoder consumes
 * these, so embedding gradients stay inside fast dense matmuls.
 */
export function countVector(text: string, vocab: Vocab, maxLen: number): Float32Array {
  const vec = new Float32Array(vocab.size);
  const toks = tokenize(text).slice(0, maxLen);
  if (toks.length === 0) return vec;
  const inc = 1.0 / toks.length;
  for (const g of grams(toks, vocab.order)) {
    const idx = vocab.index.get(g);
    if (idx !== undefined) {
      vec[idx] += inc;
    } else if (!g.includes('_')) {
      vec[UNK] += inc;
    }
  }
  return vec;
}

export function vocabToJson(vocab: Vocab): { order: number; index: Record<string, number> } {
  return { order: vocab.order, index: Object.fromEntries(vocab.index) };
}

export function vocabFromJson(obj: { order?: number; index: Record<string, number> }): Vocab {
  const index = new Map(Object.entries(obj.index));
  return { index, size: index.size + 2, order: obj.order ?? 2 };
}
