#!/usr/bin/env node
// dragoman-bridge: emit score sidecars for a corpus TSV.
//
//   dragoman-bridge --corpus corpus.tsv --kind sim --model hash --out sim.jsonl
//   dragoman-bridge --corpus corpus.tsv --kind logprob_tgt \
//       --model ngram:3:mono.uk.txt --out lp.jsonl

import { pathToFileURL } from 'node:url';

import { runJob, ScoreKind } from './jobs.js';

const USAGE = `usage: dragoman-bridge --corpus <tsv> --kind <sim|logprob_src|logprob_tgt>
                        --model <id> --out <sidecar.jsonl>
                        [--batch-size <n>] [--no-strict]

models:
  sim:      hash | xenova:<sentence-encoder-id>
  logprob:  ngram:<order>:<monolingual-text-file> | xenova:<causal-lm-id>`;

export function parseArgs(argv: string[]): Record<string, string | boolean> {
  const out: Record<string, string | boolean> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith('--')) throw new Error(`unexpected argument '${arg}'`);
    const key = arg.slice(2);
    if (key === 'no-strict') {
      out['no-strict'] = true;
    } else {
      const value = argv[++i];
      if (value === undefined) throw new Error(`missing value for --${key}`);
      out[key] = value;
    }
  }
  return out;
}

async function main(): Promise<number> {
  let args: Record<string, string | boolean>;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(String(err));
    console.error(USAGE);
    return 2;
  }
  const corpus = args['corpus'] as string | undefined;
  const kind = args['kind'] as string | undefined;
  const model = args['model'] as string | undefined;
  const out = args['out'] as string | undefined;
  if (!corpus || !kind || !model || !out) {
    console.error(USAGE);
    return 2;
  }
  if (!['sim', 'logprob_src', 'logprob_tgt'].includes(kind)) {
    console.error(`unknown kind '${kind}'`);
    return 2;
  }
  try {
    const report = await runJob({
      corpusPath: corpus,
      kind: kind as ScoreKind,
      model,
      outPath: out,
      batchSize: args['batch-size'] ? Number(args['batch-size']) : undefined,
      strict: !args['no-strict'],
    });
    console.log(JSON.stringify(report));
    return 0;
  } catch (err) {
    console.error(JSON.stringify({ error: (err as Error).constructor.name,
                                   detail: String(err) }));
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  main().then((code) => {
    process.exitCode = code;
  });
}
