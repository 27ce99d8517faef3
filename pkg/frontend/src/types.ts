// Wire types for the cfgen HTTP API. The client renders these verbatim;
// no grammar logic ever runs in the browser.

export interface ExpectedRange {
  lo: string;
  hi: string;
}

export type FeedStatus = "accepted" | "rejected" | "eof";

export interface Instruction {
  status: FeedStatus;
  expected: ExpectedRange[];
  accepting: boolean;
  position: number;
  frames: string[];
  emitted: string;
  text: string;
  // present on rejections only
  found?: string;
  end_allowed?: boolean;
}

export interface SessionHandle {
  session_id: string;
  grammar: string;
}

export interface ExpectedReply {
  expected: ExpectedRange[];
  accepting: boolean;
  position: number;
  text: string;
}

export interface GenerateReply {
  outputs: string[];
  stats: { chars_emitted: number; sampler_calls: number; forced_moves: number }[];
  constrained?: boolean;
}

export interface GrammarsReply {
  grammars: string[];
}

/** One row of the expected-set panel: a single character or a span. */
export interface ExpectedRow {
  value: string;
  type: "Char" | "Range";
}
