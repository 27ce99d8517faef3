import { describe, expect, it } from "vitest";

import { displayChar, rowsInclude, toRows } from "../src/expected.js";

describe("expected rows", () => {
  it("renders single characters as Char rows", () => {
    expect(toRows([{ lo: ":", hi: ":" }])).toEqual([
      { value: ":", type: "Char" },
    ]);
  });

  it("renders spans as Range rows with an en dash", () => {
    expect(toRows([{ lo: "0", hi: "9" }])).toEqual([
      { value: "0–9", type: "Range" },
    ]);
  });

  it("keeps row order from the wire", () => {
    const rows = toRows([
      { lo: "\t", hi: "\n" },
      { lo: " ", hi: " " },
      { lo: "{", hi: "{" },
    ]);
    expect(rows.map((r) => r.type)).toEqual(["Range", "Char", "Char"]);
    expect(rows[2]).toEqual({ value: "{", type: "Char" });
  });

  it("names whitespace and control characters", () => {
    expect(displayChar(" ")).toBe("space");
    expect(displayChar("\t")).toBe("\\t");
    expect(displayChar("\n")).toBe("\\n");
    expect(displayChar("\x07")).toBe("U+0007");
    expect(displayChar("é")).toBe("é");
  });

  it("checks membership against raw ranges", () => {
    const ranges = [
      { lo: "0", hi: "9" },
      { lo: ":", hi: ":" },
    ];
    expect(rowsInclude(ranges, "5")).toBe(true);
    expect(rowsInclude(ranges, ":")).toBe(true);
    expect(rowsInclude(ranges, "a")).toBe(false);
  });
});
