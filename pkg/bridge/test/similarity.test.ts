// Bridge conformance: the similarity sidecar must parse under the pipeline's
// own reader, aligned pairs must outscore deranged ones, and identical
// strings must score 1 within 1e-6.

import { execFileSync } from 'node:child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { beforeAll, describe, expect, it } from 'vitest';

import { HashNgramEmbedder, cosineSimilarity, loadEmbedder, ModelLoadError }
  from '../src/embedding.js';
import { scoreSimilarity } from '../src/jobs.js';
import { makeBitext, shuffleTargets, toTsv } from './fixtures.js';

const PAIRS = makeBitext(200, 42);

let dir: string;

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), 'bridge-sim-'));
});

function readSidecar(path: string): Map<number, number> {
  const out = new Map<number, number>();
  for (const line of readFileSync(path, 'utf-8').trim().split('\n')) {
    const row = JSON.parse(line);
    out.set(row.id, row.scores.sim);
  }
  return out;
}

describe('hash embedder', () => {
  it('is deterministic and batch-order independent', async () => {
    const embedder = new HashNgramEmbedder();
    const [a1] = await embedder.embed(['Google ведеться 2023']);
    const [b, a2] = await embedder.embed(['інший текст', 'Google ведеться 2023']);
    expect(Array.from(a1)).toEqual(Array.from(a2));
    expect(cosineSimilarity(a1, b)).toBeLessThan(1);
  });

  it('identical strings embed to cosine 1', async () => {
    const embedder = new HashNgramEmbedder();
    const [a, b] = await embedder.embed(['кіт спить 10:30', 'кіт спить 10:30']);
    expect(Math.abs(cosineSimilarity(a, b) - 1)).toBeLessThan(1e-12);
  });
});

describe('scoreSimilarity', () => {
  it('writes one parseable row per record with sim in [-1, 1]', async () => {
    const corpusPath = join(dir, 'corpus.tsv');
    const outPath = join(dir, 'sim.jsonl');
    writeFileSync(corpusPath, toTsv(PAIRS), 'utf-8');
    const report = await scoreSimilarity({
      corpusPath, kind: 'sim', model: 'hash', outPath,
    });
    expect(report.written).toBe(200);
    expect(report.omitted).toBe(0);
    const scores = readSidecar(outPath);
    expect(scores.size).toBe(200);
    for (const value of scores.values()) {
      expect(value).toBeGreaterThanOrEqual(-1);
      expect(value).toBeLessThanOrEqual(1);
    }
  });

  it('parses with zero errors under the pipeline read_scores', () => {
    // Cross-component conformance: feed the sidecar to the installed Python
    // package and let its reader validate every row.
    const script = [
      'import json, sys',
      'from dragoman.corpus import read_corpus, read_scores',
      'corpus, _ = read_corpus(sys.argv[1])',
      'attached, report = read_scores(corpus, sys.argv[2])',
      'print(json.dumps({"missing": report.missing_ids,',
      '                  "unknown": report.unknown_ids,',
      '                  "with_sim": sum(1 for p in attached',
      '                                  if "sim" in attached.scores_of(p.id))}))',
    ].join('\n');
    const stdout = execFileSync(
      'python3', ['-c', script, join(dir, 'corpus.tsv'), join(dir, 'sim.jsonl')],
      { encoding: 'utf-8' });
    const report = JSON.parse(stdout);
    expect(report.missing).toBe(0);
    expect(report.unknown).toBe(0);
    expect(report.with_sim).toBe(200);
  });

  it('aligned pairs outscore deranged pairs for >=95% of the fixture', async () => {
    const alignedPath = join(dir, 'aligned.jsonl');
    const shuffledCorpus = join(dir, 'shuffled.tsv');
    const shuffledPath = join(dir, 'shuffled.jsonl');
    writeFileSync(shuffledCorpus, toTsv(shuffleTargets(PAIRS)), 'utf-8');
    await scoreSimilarity({ corpusPath: join(dir, 'corpus.tsv'), kind: 'sim',
                            model: 'hash', outPath: alignedPath });
    await scoreSimilarity({ corpusPath: shuffledCorpus, kind: 'sim',
                            model: 'hash', outPath: shuffledPath });
    const aligned = readSidecar(alignedPath);
    const shuffled = readSidecar(shuffledPath);
    let wins = 0;
    for (const [id, sim] of aligned) {
      if (sim > (shuffled.get(id) ?? Infinity)) wins += 1;
    }
    expect(wins / aligned.size).toBeGreaterThanOrEqual(0.95);
  });

  it('identical source/target pairs score 1.0 within 1e-6', async () => {
    const corpusPath = join(dir, 'identical.tsv');
    const outPath = join(dir, 'identical.jsonl');
    const rows = PAIRS.slice(0, 20).map((p) => ({ ...p, target: p.source }));
    writeFileSync(corpusPath, toTsv(rows), 'utf-8');
    await scoreSimilarity({ corpusPath, kind: 'sim', model: 'hash', outPath });
    for (const value of readSidecar(outPath).values()) {
      expect(Math.abs(value - 1.0)).toBeLessThan(1e-6);
    }
  });

  it('omits and counts records with an empty side', async () => {
    const corpusPath = join(dir, 'gappy.tsv');
    const outPath = join(dir, 'gappy.jsonl');
    writeFileSync(corpusPath, '0\thello\tпривіт\n1\thello\t \n', 'utf-8');
    const report = await scoreSimilarity({ corpusPath, kind: 'sim', model: 'hash',
                                           outPath });
    expect(report.written).toBe(1);
    expect(report.omitted).toBe(1);
    expect(readSidecar(outPath).has(1)).toBe(false);
  });

  it('is deterministic across runs and batch sizes', async () => {
    const one = join(dir, 'run1.jsonl');
    const two = join(dir, 'run2.jsonl');
    await scoreSimilarity({ corpusPath: join(dir, 'corpus.tsv'), kind: 'sim',
                            model: 'hash', outPath: one, batchSize: 7 });
    await scoreSimilarity({ corpusPath: join(dir, 'corpus.tsv'), kind: 'sim',
                            model: 'hash', outPath: two, batchSize: 64 });
    expect(readFileSync(one, 'utf-8')).toBe(readFileSync(two, 'utf-8'));
  });
});

describe('loadEmbedder', () => {
  it('rejects unknown model ids', async () => {
    await expect(loadEmbedder('bogus')).rejects.toThrow(ModelLoadError);
  });

  it('reports a model-load failure for unavailable transformer models', async () => {
    await expect(loadEmbedder('xenova:no/such-model')).rejects.toThrow(ModelLoadError);
  });
});
