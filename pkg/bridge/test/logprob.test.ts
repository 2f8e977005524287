import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { beforeAll, describe, expect, it } from 'vitest';

import { ModelLoadError } from '../src/embedding.js';
import { CharNgramScorer, loadScorer } from '../src/logprob.js';
import { scoreLogprob } from '../src/jobs.js';
import { makeBitext, mulberry32, shuffleChars, toTsv } from './fixtures.js';

let dir: string;
const PAIRS = makeBitext(200, 77);

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), 'bridge-lp-'));
  writeFileSync(join(dir, 'mono.txt'),
                makeBitext(400, 5).map((p) => p.target).join('\n') + '\n', 'utf-8');
  writeFileSync(join(dir, 'corpus.tsv'), toTsv(PAIRS), 'utf-8');
});

describe('CharNgramScorer', () => {
  it('total log2 probability is negative and additive in length', () => {
    const scorer = new CharNgramScorer(['абвгаб', 'вгабвг'], 2);
    const short = scorer.logProb2('абв');
    const long = scorer.logProb2('абвг');
    expect(short).toBeLessThan(0);
    expect(long).toBeLessThan(short);
  });

  it('matches hand-computed additive smoothing', () => {
    // train "ab","ab" order 2: count(a->b)=2, total(a)=2, vocab {a,b}+unk.
    // P(b|a) = (2+1)/(2+3) = 3/5.
    const scorer = new CharNgramScorer(['ab', 'ab'], 2);
    const logFirst = scorer.logProb2('a');
    const logBoth = scorer.logProb2('ab');
    expect(logBoth - logFirst).toBeCloseTo(Math.log2(3 / 5), 12);
  });
});

describe('scoreLogprob', () => {
  it('natural text outscores character-shuffled text per char >=95%', async () => {
    const rand = mulberry32(99);
    const natural = PAIRS;
    const shuffled = PAIRS.map((p) => ({ ...p, target: shuffleChars(p.target, rand) }));
    const naturalPath = join(dir, 'nat.jsonl');
    const shuffledPath = join(dir, 'shuf.jsonl');
    writeFileSync(join(dir, 'nat.tsv'), toTsv(natural), 'utf-8');
    writeFileSync(join(dir, 'shuf.tsv'), toTsv(shuffled), 'utf-8');
    const model = `ngram:3:${join(dir, 'mono.txt')}`;
    await scoreLogprob({ corpusPath: join(dir, 'nat.tsv'), kind: 'logprob_tgt',
                         model, outPath: naturalPath });
    await scoreLogprob({ corpusPath: join(dir, 'shuf.tsv'), kind: 'logprob_tgt',
                         model, outPath: shuffledPath });
    const read = (path: string) => new Map<number, number>(
      readFileSync(path, 'utf-8').trim().split('\n')
        .map((line) => JSON.parse(line))
        .map((row) => [row.id, row.scores.logprob_tgt]));
    const nat = read(naturalPath);
    const shuf = read(shuffledPath);
    let wins = 0;
    for (const [id, lp] of nat) {
      // equal lengths by construction, so totals compare directly
      if (lp > (shuf.get(id) ?? -Infinity)) wins += 1;
    }
    expect(wins / nat.size).toBeGreaterThanOrEqual(0.95);
  });

  it('scores the requested side', async () => {
    const model = `ngram:3:${join(dir, 'mono.txt')}`;
    const srcPath = join(dir, 'src.jsonl');
    await scoreLogprob({ corpusPath: join(dir, 'corpus.tsv'), kind: 'logprob_src',
                         model, outPath: srcPath });
    const row = JSON.parse(readFileSync(srcPath, 'utf-8').split('\n')[0]);
    expect(Object.keys(row.scores)).toEqual(['logprob_src']);
  });

  it('omits empty texts and counts them', async () => {
    writeFileSync(join(dir, 'gappy.tsv'), '0\thello\tпривіт\n1\thello\t \n', 'utf-8');
    const report = await scoreLogprob({
      corpusPath: join(dir, 'gappy.tsv'), kind: 'logprob_tgt',
      model: `ngram:2:${join(dir, 'mono.txt')}`, outPath: join(dir, 'gappy.jsonl'),
    });
    expect(report.written).toBe(1);
    expect(report.omitted).toBe(1);
  });

  it('is deterministic across runs', async () => {
    const model = `ngram:3:${join(dir, 'mono.txt')}`;
    const one = join(dir, 'lp1.jsonl');
    const two = join(dir, 'lp2.jsonl');
    await scoreLogprob({ corpusPath: join(dir, 'corpus.tsv'), kind: 'logprob_tgt',
                         model, outPath: one });
    await scoreLogprob({ corpusPath: join(dir, 'corpus.tsv'), kind: 'logprob_tgt',
                         model, outPath: two });
    expect(readFileSync(one, 'utf-8')).toBe(readFileSync(two, 'utf-8'));
  });
});

describe('loadScorer', () => {
  it('rejects malformed and unavailable model ids', async () => {
    await expect(loadScorer('ngram:bad')).rejects.toThrow(ModelLoadError);
    await expect(loadScorer('ngram:0:file')).rejects.toThrow(ModelLoadError);
    await expect(loadScorer('ngram:3:/no/such/file')).rejects.toThrow(ModelLoadError);
    await expect(loadScorer('xenova:some/causal-lm')).rejects.toThrow(ModelLoadError);
    await expect(loadScorer('bogus')).rejects.toThrow(ModelLoadError);
  });
});
