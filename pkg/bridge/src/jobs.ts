// One-shot scoring jobs: read a corpus TSV, compute a score per record, emit
// the JSON-lines sidecar the pipeline joins by id. Records that cannot be
// scored (an empty side) are omitted from the sidecar and counted.

import { readFileSync, writeFileSync } from 'node:fs';

import { parseCorpusTsv, sidecarFile, SentencePair } from './corpus.js';
import { cosineSimilarity, loadEmbedder } from './embedding.js';
import { loadScorer } from './logprob.js';

export type ScoreKind = 'sim' | 'logprob_src' | 'logprob_tgt';

export interface ScorerJob {
  corpusPath: string;
  kind: ScoreKind;
  model: string;
  outPath: string;
  batchSize?: number;
  strict?: boolean;
}

export interface JobReport {
  records: number;
  written: number;
  omitted: number;
  model: string;
}

function loadCorpus(job: ScorerJob): SentencePair[] {
  const raw = readFileSync(job.corpusPath, 'utf-8');
  return parseCorpusTsv(raw, job.strict ?? true).pairs;
}

export async function scoreSimilarity(job: ScorerJob): Promise<JobReport> {
  const embedder = await loadEmbedder(job.model);
  const pairs = loadCorpus(job);
  const scoreable = pairs.filter((p) => p.source.trim() !== '' && p.target.trim() !== '');
  const batchSize = job.batchSize ?? 32;

  const rows: Array<[number, Record<string, number>]> = [];
  for (let start = 0; start < scoreable.length; start += batchSize) {
    const batch = scoreable.slice(start, start + batchSize);
    const sources = await embedder.embed(batch.map((p) => p.source));
    const targets = await embedder.embed(batch.map((p) => p.target));
    batch.forEach((pair, i) => {
      rows.push([pair.id, { sim: cosineSimilarity(sources[i], targets[i]) }]);
    });
  }
  writeFileSync(job.outPath, sidecarFile(rows), 'utf-8');
  return { records: pairs.length, written: rows.length,
           omitted: pairs.length - rows.length, model: embedder.name };
}

export async function scoreLogprob(job: ScorerJob): Promise<JobReport> {
  const scorer = await loadScorer(job.model);
  const pairs = loadCorpus(job);
  const side = job.kind === 'logprob_src' ? 'source' : 'target';
  const key = job.kind;

  const rows: Array<[number, Record<string, number>]> = [];
  let omitted = 0;
  for (const pair of pairs) {
    const text = pair[side as 'source' | 'target'];
    if (text.trim() === '') {
      omitted += 1;
      continue;
    }
    rows.push([pair.id, { [key]: scorer.logProb2(text) }]);
  }
  writeFileSync(job.outPath, sidecarFile(rows), 'utf-8');
  return { records: pairs.length, written: rows.length, omitted, model: scorer.name };
}

export async function runJob(job: ScorerJob): Promise<JobReport> {
  if (job.kind === 'sim') return scoreSimilarity(job);
  return scoreLogprob(job);
}
