// Per-side log-probability scorers. The self-contained backend trains a
// character n-gram LM (additive smoothing, log base 2) on a monolingual
// reference file named in the model identifier; a transformers causal-LM
// backend can be plugged in the same way as for embeddings when local models
// exist. Scores are total log2 probability, so BPC = -logprob / chars
// downstream.

import { readFileSync } from 'node:fs';

import { ModelLoadError } from './embedding.js';

const BOUNDARY = '';
const UNK = '';

export interface LogProbScorer {
  readonly name: string;
  logProb2(text: string): number;
}

export class CharNgramScorer implements LogProbScorer {
  readonly name: string;
  private readonly order: number;
  private readonly addK: number;
  private readonly counts = new Map<string, number>();
  private readonly totals = new Map<string, number>();
  private readonly vocab = new Set<string>();

  constructor(trainTexts: string[], order = 3, addK = 1.0, name = 'ngram') {
    if (order < 1) throw new Error('order must be >= 1');
    if (addK <= 0) throw new Error('addK must be positive');
    this.name = name;
    this.order = order;
    this.addK = addK;
    let trained = false;
    for (const text of trainTexts) {
      if (!text) continue;
      trained = true;
      const chars = [...text].map((c) => (c === BOUNDARY || c === UNK ? UNK : c));
      chars.forEach((c) => this.vocab.add(c));
      const stream = BOUNDARY.repeat(this.order - 1) + chars.join('');
      const symbols = [...stream];
      for (let i = this.order - 1; i < symbols.length; i++) {
        const context = symbols.slice(i - this.order + 1, i).join('');
        const gram = context + symbols[i];
        this.counts.set(gram, (this.counts.get(gram) ?? 0) + 1);
        this.totals.set(context, (this.totals.get(context) ?? 0) + 1);
      }
    }
    if (!trained) throw new Error('no non-empty training text');
  }

  logProb2(text: string): number {
    if (!text) throw new Error('cannot score empty text');
    const vPrime = this.vocab.size + 1;
    const chars = [...text].map((c) =>
      this.vocab.has(c) && c !== BOUNDARY && c !== UNK ? c : UNK);
    let context = BOUNDARY.repeat(this.order - 1);
    let total = 0;
    for (const ch of chars) {
      const count = this.counts.get(context + ch) ?? 0;
      const contextTotal = this.totals.get(context) ?? 0;
      total += Math.log2((count + this.addK) / (contextTotal + this.addK * vPrime));
      if (this.order > 1) context = (context + ch).slice(-(this.order - 1));
    }
    return total;
  }
}

/**
 * Model identifiers: `ngram:<order>:<path-to-monolingual-text>` trains the
 * built-in scorer on the file's lines; `xenova:<model-id>` requires the
 * optional transformers runtime and a locally available causal LM.
 */
export async function loadScorer(modelId: string): Promise<LogProbScorer> {
  if (modelId.startsWith('ngram:')) {
    const rest = modelId.slice('ngram:'.length);
    const sep = rest.indexOf(':');
    if (sep < 1) {
      throw new ModelLoadError(`bad ngram model id '${modelId}' `
        + '(expected ngram:<order>:<train-file>)');
    }
    const order = Number(rest.slice(0, sep));
    const path = rest.slice(sep + 1);
    if (!Number.isInteger(order) || order < 1) {
      throw new ModelLoadError(`bad ngram order in '${modelId}'`);
    }
    let raw: string;
    try {
      raw = readFileSync(path, 'utf-8');
    } catch (err) {
      throw new ModelLoadError(`cannot read training file '${path}': ${err}`);
    }
    return new CharNgramScorer(raw.split('\n').filter(Boolean), order, 1.0, modelId);
  }
  if (modelId.startsWith('xenova:')) {
    throw new ModelLoadError(
      'causal-LM log probabilities need the optional transformers runtime with '
      + 'a locally available model; use ngram:<order>:<train-file> instead');
  }
  throw new ModelLoadError(`unknown logprob model '${modelId}'`);
}
