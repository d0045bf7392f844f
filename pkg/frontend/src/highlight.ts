// Splitting a text into plain/highlighted segments from the hit spans the
// API reports. Pure so it can be tested without a DOM; the renderer turns
// segments into <mark> elements 1:1.

import type { TermHitSpan } from "./types.js";

export interface Segment {
  text: string;
  hits: TermHitSpan[]; // empty = plain text
}

/** Character intervals of the hits, merged where they overlap. */
export function segmentText(
  text: string,
  hits: TermHitSpan[],
  field: "TITLE" | "ABSTRACT",
): Segment[] {
  const spans = hits
    .filter(
      (h): h is TermHitSpan & { char_start: number; char_end: number } =>
        h.field === field && h.char_start !== undefined && h.char_end !== undefined,
    )
    .filter((h) => h.char_start < h.char_end && h.char_end <= text.length)
    .sort((a, b) => a.char_start - b.char_start || a.char_end - b.char_end);

  const segments: Segment[] = [];
  let cursor = 0;
  let i = 0;
  while (i < spans.length) {
    // group hits sharing one merged interval
    let start = spans[i]!.char_start;
    let end = spans[i]!.char_end;
    const group: TermHitSpan[] = [spans[i]!];
    let j = i + 1;
    while (j < spans.length && spans[j]!.char_start < end) {
      end = Math.max(end, spans[j]!.char_end);
      group.push(spans[j]!);
      j += 1;
    }
    if (start > cursor) {
      segments.push({ text: text.slice(cursor, start), hits: [] });
    }
    segments.push({ text: text.slice(start, end), hits: group });
    cursor = end;
    i = j;
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), hits: [] });
  }
  return segments;
}

/** Every highlighted segment corresponds to at least one reported span
 * and re-concatenation restores the text exactly. */
export function segmentsCoverText(text: string, segments: Segment[]): boolean {
  return segments.map((s) => s.text).join("") === text;
}
