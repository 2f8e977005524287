// Corpus TSV reading and score-sidecar writing, matching the pipeline's
// on-disk contracts exactly: `id<TAB>source<TAB>target` per line in, one
// `{"id": .., "scores": {..}}` JSON line per record out, UTF-8, LF endings.

export interface SentencePair {
  id: number;
  source: string;
  target: string;
}

export interface ParseReport {
  pairs: SentencePair[];
  skipped: number;
}

export function parseCorpusTsv(text: string, strict = true): ParseReport {
  const pairs: SentencePair[] = [];
  const seen = new Set<number>();
  let skipped = 0;
  const lines = text.split('\n');
  if (lines.length > 0 && lines[lines.length - 1] === '') lines.pop();
  lines.forEach((raw, index) => {
    const line = raw.replace(/\r$/, '');
    const fail = (reason: string) => {
      if (strict) throw new Error(`corpus line ${index + 1}: ${reason}`);
      skipped += 1;
    };
    const cols = line.split('\t');
    if (cols.length !== 3) return fail(`expected 3 columns, got ${cols.length}`);
    const id = Number(cols[0]);
    if (!Number.isInteger(id) || id < 0) return fail(`invalid id ${cols[0]}`);
    if (seen.has(id)) return fail(`duplicate id ${id}`);
    // Empty sides pass structural parsing; scoring jobs omit and count them.
    seen.add(id);
    pairs.push({ id, source: cols[1], target: cols[2] });
  });
  return { pairs, skipped };
}

export function sidecarLine(id: number, scores: Record<string, number>): string {
  for (const [key, value] of Object.entries(scores)) {
    if (!Number.isFinite(value)) {
      throw new Error(`non-finite value for score '${key}' of record ${id}`);
    }
  }
  return JSON.stringify({ id, scores });
}

/** Rows ordered by id, one JSON object per line, trailing newline. */
export function sidecarFile(rows: Array<[number, Record<string, number>]>): string {
  const sorted = [...rows].sort((a, b) => a[0] - b[0]);
  return sorted.map(([id, scores]) => sidecarLine(id, scores)).join('\n') + '\n';
}
