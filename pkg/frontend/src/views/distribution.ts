import * as d3 from "d3";
import { DistributionPayload, Histogram } from "../api";
import { clear, el } from "../dom";

export interface DistributionCallbacks {
  onThreshold(risk: number): void;
  onModel(model: string): void;
}

const W = 440;
const H = 132;
const MARGIN = { top: 8, right: 14, bottom: 24, left: 44 };

function cumulative(counts: number[]): number {
  return counts.reduce((a, b) => a + b, 0);
}

/** Fraction of mass strictly below x under a histogram, interpolating inside bins. */
export function cdfAt(hist: Histogram, x: number): number {
  const { edges, counts } = hist;
  const total = cumulative(counts);
  if (total <= 0) return 0;
  if (x <= edges[0]) return 0;
  let acc = 0;
  for (let i = 0; i < counts.length; i++) {
    const lo = edges[i];
    const hi = edges[i + 1];
    if (x >= hi) {
      acc += counts[i];
      continue;
    }
    const frac = hi > lo ? (x - lo) / (hi - lo) : 1;
    return (acc + counts[i] * frac) / total;
  }
  return 1;
}

/** Value at cumulative fraction p under a histogram, interpolating inside bins. */
export function quantileAt(hist: Histogram, p: number): number {
  const { edges, counts } = hist;
  const total = cumulative(counts);
  if (total <= 0) return edges[0];
  let target = Math.min(Math.max(p, 0), 1) * total;
  for (let i = 0; i < counts.length; i++) {
    if (counts[i] <= 0) continue;
    if (target <= counts[i]) {
      return edges[i] + (edges[i + 1] - edges[i]) * (target / counts[i]);
    }
    target -= counts[i];
  }
  return edges[edges.length - 1];
}

/**
 * Candidate risk for a score-handle position.  Risk is monotone in score, so
 * the fraction of patients left of the score handle matches the fraction left
 * of the risk handle; chaining the two histogram CDFs gives a risk value to
 * send.  The displayed pair is always the server's synchronized response.
 */
export function scoreToRiskViaCdf(data: DistributionPayload, score: number): number {
  return quantileAt(data.risk, cdfAt(data.score, score));
}

/**
 * Paired score and predicted-risk histograms for one model, with a draggable
 * decision-threshold handle on each.  Dragging either handle reports a risk
 * value; both handles re-render from the server's synchronized pair.
 */
export class DistributionView {
  private root: HTMLElement;
  private header: HTMLElement;
  private plots: HTMLElement;
  private dragging = false;
  private pending: { data: DistributionPayload; models: string[]; current: string } | null = null;
  private lastSent = 0;

  constructor(container: HTMLElement, private cb: DistributionCallbacks) {
    this.root = el("div", { class: "panel distribution" });
    this.root.appendChild(el("h2", {}, "Risk Score Distribution"));
    this.header = el("div", { class: "dist-header" });
    this.root.appendChild(this.header);
    this.plots = el("div", { class: "dist-plots" });
    this.root.appendChild(this.plots);
    container.appendChild(this.root);
  }

  render(data: DistributionPayload, models: string[], current: string): void {
    if (this.dragging) {
      // rebuilding mid-drag would detach the handle under the pointer
      this.pending = { data, models, current };
      return;
    }
    this.draw(data, models, current);
  }

  private draw(data: DistributionPayload, models: string[], current: string): void {
    clear(this.header);
    const select = el("select", { class: "dist-model" });
    for (const m of models) {
      const opt = el("option", { value: m }, m);
      if (m === current) opt.selected = true;
      select.appendChild(opt);
    }
    select.addEventListener("change", () => this.cb.onModel(select.value));
    this.header.appendChild(select);
    this.header.appendChild(
      el(
        "span",
        { class: "dist-readout" },
        `n=${data.n}  threshold risk ${data.threshold.risk.toFixed(3)}` +
          ` at score ${data.threshold.score.toFixed(2)}`,
      ),
    );

    clear(this.plots);
    this.histogram(data, "score", data.threshold.score, (x) =>
      scoreToRiskViaCdf(data, x),
    );
    this.histogram(data, "risk", data.threshold.risk, (x) =>
      Math.min(Math.max(x, 0), 1),
    );
  }

  private histogram(
    data: DistributionPayload,
    kind: "score" | "risk",
    value: number,
    toRisk: (x: number) => number,
  ): void {
    const hist = data[kind];
    const innerW = W - MARGIN.left - MARGIN.right;
    const innerH = H - MARGIN.top - MARGIN.bottom;
    const svg = d3
      .select(this.plots)
      .append("svg")
      .attr("viewBox", `0 0 ${W} ${H}`)
      .attr("class", `hist hist-${kind}`);
    const g = svg
      .append("g")
      .attr("transform", `translate(${MARGIN.left},${MARGIN.top})`);

    const x = d3
      .scaleLinear()
      .domain([hist.edges[0], hist.edges[hist.edges.length - 1]])
      .range([0, innerW]);
    const y = d3
      .scaleLinear()
      .domain([0, Math.max(1, d3.max(hist.counts) ?? 1)])
      .range([innerH, 0]);

    g.selectAll("rect")
      .data(hist.counts)
      .join("rect")
      .attr("class", "bar")
      .attr("x", (_, i) => x(hist.edges[i]))
      .attr("width", (_, i) => Math.max(0, x(hist.edges[i + 1]) - x(hist.edges[i]) - 0.5))
      .attr("y", (d) => y(d))
      .attr("height", (d) => innerH - y(d));

    g.append("g")
      .attr("class", "axis")
      .attr("transform", `translate(0,${innerH})`)
      .call(d3.axisBottom(x).ticks(6) as any);
    g.append("g")
      .attr("class", "axis")
      .call(d3.axisLeft(y).ticks(3) as any);
    g.append("text")
      .attr("class", "hist-title")
      .attr("x", innerW)
      .attr("y", 12)
      .attr("text-anchor", "end")
      .text(kind === "score" ? `${data.model} score` : "predicted risk");

    const handle = g
      .append("g")
      .attr("class", "handle")
      .attr("data-kind", kind)
      .attr("data-value", String(value))
      .attr("transform", `translate(${x(value)},0)`);
    handle
      .append("line")
      .attr("y1", 0)
      .attr("y2", innerH);
    handle
      .append("rect")
      .attr("class", "grip")
      .attr("x", -6)
      .attr("y", 0)
      .attr("width", 12)
      .attr("height", innerH);

    const drag = d3
      .drag<SVGGElement, unknown>()
      .subject(() => ({ x: x(value), y: 0 }))
      .on("start", () => {
        this.dragging = true;
      })
      .on("drag", (event: any) => {
        const px = Math.min(Math.max(event.x, 0), innerW);
        handle.attr("transform", `translate(${px},0)`);
        const now = Date.now();
        if (now - this.lastSent > 120) {
          this.lastSent = now;
          this.cb.onThreshold(toRisk(x.invert(px)));
        }
      })
      .on("end", (event: any) => {
        this.dragging = false;
        const px = Math.min(Math.max(event.x, 0), innerW);
        this.cb.onThreshold(toRisk(x.invert(px)));
        if (this.pending) {
          const p = this.pending;
          this.pending = null;
          this.draw(p.data, p.models, p.current);
        }
      });
    handle.call(drag as any);
  }
}
