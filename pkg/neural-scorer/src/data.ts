/**
 * Readers for the toolkit's file interfaces: findings.jsonl,
 * annotations.jsonl, split.json. A first line with
 * "record_type": "manifest" is provenance metadata and skipped.
 */

import * as fs from 'fs';
import { ASPECTS, Aspect, AspectLabel } from './protocol.js';

export interface Finding {
  finding_id: string;
  text: string;
  source: 'news' | 'abstract';
}

export interface AnnotationRecord {
  finding_id: string;
  annotator_id: string;
  kind: 'sentence_level' | 'aspect_level' | 'bad_text';
  likert?: number;
  aspects?: Record<Aspect, AspectLabel>;
}

export interface Split {
  seed: number;
  train: string[];
  val: string[];
  test: string[];
  random_test: string[];
}

export interface GoldLabels {
  sentence: Map<string, number>;
  aspects: Map<string, Record<Aspect, AspectLabel>>;
}

function readJsonl(path: string): any[] {
  const rows: any[] = [];
  for (const line of fs.readFileSync(path, 'utf-8').split('\n')) {
    if (!line.trim()) continue;
    const obj = JSON.parse(line);
    if (obj.record_type === 'manifest') continue;
    rows.push(obj);
  }
  return rows;
}

export function readFindings(path: string): Finding[] {
  return readJsonl(path).map((o) => ({
    finding_id: o.finding_id,
    text: o.text,
    source: o.source,
  }));
}

export function readAnnotations(path: string): AnnotationRecord[] {
  return readJsonl(path) as AnnotationRecord[];
}

export function readSplit(path: string): Split {
  const obj = JSON.parse(fs.readFileSync(path, 'utf-8'));
  return {
    seed: obj.seed,
    train: obj.train,
    val: obj.val,
    test: obj.test,
    random_test: obj.random_test ?? [],
  };
}

/** Evaluation set: frozen test partition plus the random sample. */
export function fullTestIds(split: Split): string[] {
  const seen = new Set(split.test);
  return [...split.test, ...split.random_test.filter((id) => !seen.has(id))];
}

const TIE_PRIORITY: AspectLabel[] = ['uncertain', 'certain', 'not_present'];

function majority(labels: AspectLabel[]): AspectLabel {
  const counts = new Map<AspectLabel, number>();
  for (const l of labels) counts.set(l, (counts.get(l) ?? 0) + 1);
  const top = Math.max(...counts.values());
  const tied = [...counts.entries()].filter(([, c]) => c === top).map(([l]) => l);
  if (tied.length === 1) return tied[0];
  for (const preferred of TIE_PRIORITY) if (tied.includes(preferred)) return preferred;
  return tied.sort()[0];
}

/**
 * Aggregate annotator records into gold labels, mirroring the toolkit's
 * rules: mean likert for the sentence level, per-aspect majority with
 * uncertain > certain > not_present on exact ties, and exclusion of
 * findings a strict majority of annotators flagged bad_text.
 */
export function aggregateGold(records: AnnotationRecord[]): GoldLabels {
  const byFinding = new Map<string, AnnotationRecord[]>();
  for (const r of records) {
    const list = byFinding.get(r.finding_id) ?? [];
    list.push(r);
    byFinding.set(r.finding_id, list);
  }
  const sentence = new Map<string, number>();
  const aspects = new Map<string, Record<Aspect, AspectLabel>>();
  for (const [findingId, recs] of byFinding) {
    const annotators = new Set(recs.map((r) => r.annotator_id));
    const badVoters = new Set(
      recs.filter((r) => r.kind === 'bad_text').map((r) => r.annotator_id));
    if (2 * badVoters.size > annotators.size) continue;
    const likerts = recs.filter((r) => r.kind === 'sentence_level')
      .map((r) => r.likert!) as number[];
    if (likerts.length > 0) {
      sentence.set(findingId, likerts.reduce((a, b) => a + b, 0) / likerts.length);
    }
    const aspectRecs = recs.filter((r) => r.kind === 'aspect_level');
    if (aspectRecs.length > 0) {
      const gold = {} as Record<Aspect, AspectLabel>;
      for (const aspect of ASPECTS) {
        gold[aspect] = majority(aspectRecs.map((r) => r.aspects![aspect]));
      }
      aspects.set(findingId, gold);
    }
  }
  return { sentence, aspects };
}
