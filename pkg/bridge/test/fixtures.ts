// Seeded synthetic bitext. Aligned pairs share anchor tokens (entities,
// numbers, times) across scripts, the way crawled parallel text does; that is
// the signal a content-overlap embedding has to pick up.

import { SentencePair } from '../src/corpus.js';

export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const LATIN_SYLLABLES = ['ta', 'ne', 'ri', 'sol', 'ma', 've', 'lo', 'den', 'cu', 'por'];
const CYRILLIC_SYLLABLES = ['та', 'не', 'рі', 'сол', 'ма', 'ве', 'ло', 'ден', 'ку', 'пор'];
const NAME_ANCHORS = ['Google', 'Kyiv', 'ABC', 'RSPCA', 'FLORES', 'Mistral', 'OPUS'];

/** Numbers, times and names; mostly high-entropy so unrelated pairs rarely collide. */
function anchorToken(rand: () => number): string {
  const roll = rand();
  if (roll < 0.5) return String(100 + Math.floor(rand() * 99900));
  if (roll < 0.8) {
    const h = Math.floor(rand() * 24);
    const m = Math.floor(rand() * 60);
    return `${h}:${String(m).padStart(2, '0')}`;
  }
  return NAME_ANCHORS[Math.floor(rand() * NAME_ANCHORS.length)];
}

function word(rand: () => number, syllables: string[]): string {
  const n = 1 + Math.floor(rand() * 3);
  let out = '';
  for (let i = 0; i < n; i++) out += syllables[Math.floor(rand() * syllables.length)];
  return out;
}

function sentence(rand: () => number, syllables: string[], anchors: string[]): string {
  const words: string[] = [];
  const n = 3 + Math.floor(rand() * 4);
  for (let i = 0; i < n; i++) words.push(word(rand, syllables));
  for (const anchor of anchors) {
    words.splice(Math.floor(rand() * (words.length + 1)), 0, anchor);
  }
  return words.join(' ');
}

export function makeBitext(n: number, seed: number): SentencePair[] {
  const rand = mulberry32(seed);
  const pairs: SentencePair[] = [];
  for (let i = 0; i < n; i++) {
    const anchors: string[] = [];
    const count = 1 + Math.floor(rand() * 3);
    for (let k = 0; k < count; k++) {
      anchors.push(anchorToken(rand));
    }
    pairs.push({
      id: i,
      source: sentence(rand, LATIN_SYLLABLES, anchors),
      target: sentence(rand, CYRILLIC_SYLLABLES, anchors),
    });
  }
  return pairs;
}

export function toTsv(pairs: SentencePair[]): string {
  return pairs.map((p) => `${p.id}\t${p.source}\t${p.target}`).join('\n') + '\n';
}

/** Derange the targets so no pair keeps its own translation. */
export function shuffleTargets(pairs: SentencePair[], offset = 7): SentencePair[] {
  return pairs.map((p, i) => ({
    id: p.id,
    source: p.source,
    target: pairs[(i + offset) % pairs.length].target,
  }));
}

export function shuffleChars(text: string, rand: () => number): string {
  const chars = [...text];
  for (let i = chars.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [chars[i], chars[j]] = [chars[j], chars[i]];
  }
  return chars.join('');
}
