// Sentence embedding backends behind one interface. The hashed character
// n-gram backend is deterministic, dependency-free and always available; the
// transformers backend upgrades fidelity when @xenova/transformers and a
// (local) sentence-encoder model are installed.

export interface Embedder {
  readonly name: string;
  embed(texts: string[]): Promise<Float64Array[]>;
}

export class ModelLoadError extends Error {}

export function cosineSimilarity(a: Float64Array, b: Float64Array): number {
  if (a.length !== b.length) throw new Error('embedding dimensions differ');
  let dot = 0;
  let normA = 0;
  let normB = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    normA += a[i] * a[i];
    normB += b[i] * b[i];
  }
  if (normA === 0 || normB === 0) return 0;
  return dot / (Math.sqrt(normA) * Math.sqrt(normB));
}

const HASH_DIM = 512;
const NGRAM_MAX = 4;

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

/**
 * Signed feature hashing over character 1..4-grams (whitespace collapsed)
 * plus word tokens. Identical texts map to identical vectors, and shared
 * tokens (numbers, names, punctuation patterns) give aligned bitext pairs
 * their cross-script cosine signal.
 */
export class HashNgramEmbedder implements Embedder {
  readonly name = 'hash-ngram-v1';

  embed(texts: string[]): Promise<Float64Array[]> {
    return Promise.resolve(texts.map((t) => this.embedOne(t)));
  }

  embedOne(text: string): Float64Array {
    const vector = new Float64Array(HASH_DIM);
    const squeezed = text.toLowerCase().split(/\s+/).filter(Boolean);
    const joined = squeezed.join(' ');
    for (let n = 1; n <= NGRAM_MAX; n++) {
      for (let i = 0; i + n <= joined.length; i++) {
        this.bump(vector, `${n}:${joined.slice(i, i + n)}`);
      }
    }
    for (const word of squeezed) {
      this.bump(vector, `w:${word}`, 2.0);
    }
    let norm = 0;
    for (let i = 0; i < HASH_DIM; i++) norm += vector[i] * vector[i];
    if (norm > 0) {
      norm = Math.sqrt(norm);
      for (let i = 0; i < HASH_DIM; i++) vector[i] /= norm;
    }
    return vector;
  }

  private bump(vector: Float64Array, feature: string, weight = 1.0): void {
    const hash = fnv1a(feature);
    const sign = (hash & 1) === 0 ? 1 : -1;
    vector[(hash >>> 1) % HASH_DIM] += sign * weight;
  }
}

class TransformersEmbedder implements Embedder {
  readonly name: string;
  private extractor: (texts: string[], opts: object) => Promise<{ tolist(): number[][] }>;

  constructor(name: string, extractor: TransformersEmbedder['extractor']) {
    this.name = name;
    this.extractor = extractor;
  }

  async embed(texts: string[]): Promise<Float64Array[]> {
    const output = await this.extractor(texts, { pooling: 'mean', normalize: true });
    return output.tolist().map((row) => Float64Array.from(row));
  }
}

async function loadTransformersEmbedder(modelId: string): Promise<Embedder> {
  // Optional dependency: resolve by expression so the compiler does not
  // require it to be installed.
  const packageName = '@xenova/transformers';
  let pipeline;
  try {
    ({ pipeline } = await import(packageName));
  } catch {
    throw new ModelLoadError(
      '@xenova/transformers is not installed; install it (and a local model) ' +
      'to use xenova: models, or use the built-in "hash" model');
  }
  try {
    const extractor = await pipeline('feature-extraction', modelId);
    return new TransformersEmbedder(`xenova:${modelId}`, extractor);
  } catch (err) {
    throw new ModelLoadError(`failed to load embedding model '${modelId}': ${err}`);
  }
}

export async function loadEmbedder(modelId: string): Promise<Embedder> {
  if (modelId === 'hash' || modelId === 'hash-ngram-v1') {
    return new HashNgramEmbedder();
  }
  if (modelId.startsWith('xenova:')) {
    return loadTransformersEmbedder(modelId.slice('xenova:'.length));
  }
  throw new ModelLoadError(
    `unknown embedding model '${modelId}' (use "hash" or "xenova:<model-id>")`);
}
