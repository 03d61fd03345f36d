import * as d3 from "d3";
import { ExplainPayload, PartitionInfo } from "../api";
import { GREY, shapColor, subgroupColor } from "../color";
import { clear, el } from "../dom";
import { hashJitter } from "../jitter";

export interface ExplainCallbacks {
  onModel(model: string): void;
  onClose(): void;
}

export interface ExplainOptions {
  models: string[];
  current: string;
  partition: PartitionInfo | null;
  selected: number | null;
}

const SW = 470;
const BAND = 26;
const SMARGIN = { top: 8, right: 16, bottom: 26, left: 150 };
const TW = 470;
const TH = 230;
const TMARGIN = { top: 10, right: 16, bottom: 64, left: 46 };

/**
 * Per-subgroup explanation: a beeswarm of per-patient attribution values,
 * one band per feature, plus parallel trends of normalized feature means
 * across all subgroups with the non-selected ones greyed out.
 */
export class ExplainView {
  private root: HTMLElement;
  private header: HTMLElement;
  private body: HTMLElement;

  constructor(container: HTMLElement, private cb: ExplainCallbacks) {
    this.root = el("div", { class: "panel explain" });
    this.root.appendChild(el("h2", {}, "Explanations"));
    this.header = el("div", { class: "explain-header" });
    this.root.appendChild(this.header);
    this.body = el("div", { class: "explain-body" });
    this.root.appendChild(this.body);
    container.appendChild(this.root);
  }

  render(payload: ExplainPayload | null, opts: ExplainOptions): void {
    clear(this.header);
    clear(this.body);
    if (payload == null || opts.selected == null || !opts.partition) {
      this.body.appendChild(
        el("p", { class: "hint" }, "Click a subgroup in the summary to see explanations."),
      );
      return;
    }
    const sub = opts.partition.subgroups[opts.selected];
    const color = subgroupColor(sub.color_index);

    const chip = el("span", { class: "explain-chip", "data-color": color }, sub.label);
    chip.style.backgroundColor = color;
    this.header.appendChild(chip);

    const sel = el("select", { class: "explain-model" });
    for (const m of opts.models) {
      const o = el("option", { value: m }, m);
      if (m === opts.current) o.selected = true;
      sel.appendChild(o);
    }
    sel.addEventListener("change", () => this.cb.onModel(sel.value));
    this.header.appendChild(sel);

    this.header.appendChild(
      el(
        "span",
        { class: "explain-readout" },
        `${payload.records.length} patients, reference score ${payload.reference_score.toFixed(2)}`,
      ),
    );

    const close = el("button", { class: "explain-close" }, "clear");
    close.addEventListener("click", () => this.cb.onClose());
    this.header.appendChild(close);

    this.beeswarm(payload);
    this.trends(payload, opts, color);
  }

  private beeswarm(payload: ExplainPayload): void {
    const features = payload.features;
    const innerH = features.length * BAND;
    const height = innerH + SMARGIN.top + SMARGIN.bottom;
    const innerW = SW - SMARGIN.left - SMARGIN.right;
    const svg = d3
      .select(this.body)
      .append("svg")
      .attr("viewBox", `0 0 ${SW} ${height}`)
      .attr("class", "beeswarm");
    const g = svg.append("g").attr("transform", `translate(${SMARGIN.left},${SMARGIN.top})`);

    let span = 0;
    for (const r of payload.records) {
      for (const v of r.phi) span = Math.max(span, Math.abs(v));
    }
    const x = d3.scaleLinear().domain([-span || -1, span || 1]).range([0, innerW]);

    g.append("line")
      .attr("class", "ref-line")
      .attr("x1", x(0))
      .attr("x2", x(0))
      .attr("y1", 0)
      .attr("y2", innerH);

    features.forEach((name, j) => {
      const cy = j * BAND + BAND / 2;
      g.append("text")
        .attr("class", "feature-label")
        .attr("x", -8)
        .attr("y", cy + 3)
        .attr("text-anchor", "end")
        .text(name);
      for (const r of payload.records) {
        // deterministic per-patient jitter keeps the swarm stable across renders
        g.append("circle")
          .attr("class", "swarm-dot")
          .attr("data-row", String(r.row))
          .attr("data-feature", name)
          .attr("cx", x(r.phi[j]))
          .attr("cy", cy + hashJitter(r.row, j) * BAND * 0.38)
          .attr("r", 1.8)
          .attr("fill", shapColor(r.norm[j]))
          .attr("fill-opacity", 0.85);
      }
    });

    g.append("g")
      .attr("class", "axis")
      .attr("transform", `translate(0,${innerH})`)
      .call(d3.axisBottom(x).ticks(6) as any);
    g.append("text")
      .attr("class", "axis-label")
      .attr("x", innerW / 2)
      .attr("y", innerH + 24)
      .attr("text-anchor", "middle")
      .text("contribution to score");
  }

  private trends(payload: ExplainPayload, opts: ExplainOptions, color: string): void {
    const t = payload.trends;
    if (!t || !t.features.length) return;
    const innerW = TW - TMARGIN.left - TMARGIN.right;
    const innerH = TH - TMARGIN.top - TMARGIN.bottom;
    const svg = d3
      .select(this.body)
      .append("svg")
      .attr("viewBox", `0 0 ${TW} ${TH}`)
      .attr("class", "trends");
    const g = svg.append("g").attr("transform", `translate(${TMARGIN.left},${TMARGIN.top})`);

    const x = d3.scalePoint<string>().domain(t.features).range([0, innerW]);
    const y = d3.scaleLinear().domain([0, 1]).range([innerH, 0]);

    g.append("g")
      .attr("class", "axis trend-x")
      .attr("transform", `translate(0,${innerH})`)
      .call(d3.axisBottom(x) as any)
      .selectAll("text")
      .attr("transform", "rotate(-40)")
      .attr("text-anchor", "end")
      .attr("dx", "-0.4em")
      .attr("dy", "0.4em");
    g.append("g").attr("class", "axis").call(d3.axisLeft(y).ticks(4) as any);
    g.append("text")
      .attr("class", "axis-label")
      .attr("transform", "rotate(-90)")
      .attr("x", -innerH / 2)
      .attr("y", -34)
      .attr("text-anchor", "middle")
      .text("normalized mean");

    const line = d3
      .line<number | null>()
      .defined((v) => v != null && Number.isFinite(v))
      .x((_, i) => x(t.features[i])!)
      .y((v) => y(v as number));

    const entries = Object.entries(t.subgroups);
    // draw the selected subgroup last so it sits on top of the greyed rest
    entries.sort((a, b) =>
      Number(a[0] === payload.subgroup) - Number(b[0] === payload.subgroup),
    );
    for (const [label, series] of entries) {
      const isSel = label === payload.subgroup;
      const path = g
        .append("path")
        .attr("class", "trend-line")
        .attr("data-label", label)
        .attr("d", line(series.means))
        .attr("fill", "none")
        .attr("stroke", isSel ? color : GREY)
        .attr("stroke-width", isSel ? 2.5 : 1)
        .attr("stroke-opacity", isSel ? 1 : 0.8);
      if (isSel) path.attr("data-selected", "1");
      path.append("title").text(label);
    }
  }
}
