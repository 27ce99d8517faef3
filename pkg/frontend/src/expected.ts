// Expected-set rows for the guidance panel: two columns (value, type),
// single characters as Char and spans as Range "lo–hi".

import type { ExpectedRange, ExpectedRow } from "./types.js";

const NAMED: Record<string, string> = {
  " ": "space",
  "\t": "\\t",
  "\n": "\\n",
  "\r": "\\r",
};

/** Printable form of one character; controls and space get names. */
export function displayChar(ch: string): string {
  const named = NAMED[ch];
  if (named !== undefined) return named;
  const code = ch.codePointAt(0) ?? 0;
  if (code < 0x20 || (code >= 0x7f && code < 0xa0)) {
    return "U+" + code.toString(16).toUpperCase().padStart(4, "0");
  }
  return ch;
}

export function toRows(ranges: ExpectedRange[]): ExpectedRow[] {
  return ranges.map((range) =>
    range.lo === range.hi
      ? { value: displayChar(range.lo), type: "Char" }
      : { value: `${displayChar(range.lo)}–${displayChar(range.hi)}`, type: "Range" },
  );
}

/** True when some row admits the given character (rejection diagnostics). */
export function rowsInclude(ranges: ExpectedRange[], ch: string): boolean {
  return ranges.some((range) => range.lo <= ch && ch <= range.hi);
}
