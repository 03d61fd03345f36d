import { describe, expect, it } from "vitest";
import { cdfAt, quantileAt, scoreToRiskViaCdf } from "../src/views/distribution";
import { distributionPayload } from "./fake";

const HIST = { edges: [0, 1, 2, 3], counts: [10, 20, 10] };

describe("histogram cdf helpers", () => {
  it("accumulates mass across bins with interpolation", () => {
    expect(cdfAt(HIST, 0)).toBe(0);
    expect(cdfAt(HIST, 1)).toBeCloseTo(0.25, 12);
    expect(cdfAt(HIST, 1.5)).toBeCloseTo(0.5, 12);
    expect(cdfAt(HIST, 3)).toBe(1);
    expect(cdfAt(HIST, 99)).toBe(1);
  });

  it("inverts through quantileAt", () => {
    for (const x of [0.2, 0.8, 1.4, 2.3, 2.9]) {
      expect(quantileAt(HIST, cdfAt(HIST, x))).toBeCloseTo(x, 10);
    }
  });

  it("handles empty histograms", () => {
    const empty = { edges: [0, 1], counts: [0] };
    expect(cdfAt(empty, 0.5)).toBe(0);
    expect(quantileAt(empty, 0.5)).toBe(0);
  });
});

describe("scoreToRiskViaCdf", () => {
  it("maps matching quantiles between the paired histograms", () => {
    const data = distributionPayload("ehr-af", 0.05);
    // fake histograms have identical mass profiles, so quantiles line up
    expect(scoreToRiskViaCdf(data, 1)).toBeCloseTo(0.1, 12);
    expect(scoreToRiskViaCdf(data, data.score.edges[0])).toBeCloseTo(data.risk.edges[0], 12);
    expect(scoreToRiskViaCdf(data, 2)).toBeCloseTo(0.2, 12);
  });

  it("is monotone in the score", () => {
    const data = distributionPayload("ehr-af", 0.05);
    let prev = -Infinity;
    for (let s = 0; s <= 2; s += 0.1) {
      const r = scoreToRiskViaCdf(data, s);
      expect(r).toBeGreaterThanOrEqual(prev);
      prev = r;
    }
  });
});
