import * as d3 from "d3";
import { ProtectedRequest, SchemaVariable, SummaryPayload, SummarySubgroup } from "../api";
import { subgroupColor } from "../color";
import { clear, el } from "../dom";
import { METRIC_LABELS, METRICS, Metric } from "../state";

export interface SummaryCallbacks {
  onSelect(index: number | null): void;
  onMetric(slot: 1 | 2, metric: Metric): void;
  onProtected(pick: ProtectedRequest | null): void;
  onPolygon(on: boolean): void;
}

export interface SummaryOptions {
  models: string[];
  metric1: Metric;
  metric2: Metric;
  polygon: boolean;
  selected: number | null;
  protectedVars: SchemaVariable[];
  pick: ProtectedRequest | null;
}

const W = 330;
const H = 225;
const MARGIN = { top: 10, right: 12, bottom: 30, left: 46 };
const IW = W - MARGIN.left - MARGIN.right;
const IH = H - MARGIN.top - MARGIN.bottom;

function padded(lo: number, hi: number): [number, number] {
  const pad = (hi - lo) * 0.12 || 0.1;
  return [lo - pad, hi + pad];
}

type SVG = d3.Selection<SVGGElement, unknown, null, undefined>;

/**
 * Subgroup summary: performance scatter, Kaplan-Meier curves and two fairness
 * panels with selectable metrics.  A toggle switches subgroup dots for
 * polygons whose vertices are the selected risk models; clicking a subgroup
 * anywhere selects it for explanation.
 */
export class SummaryView {
  private root: HTMLElement;
  private header: HTMLElement;
  private grid: HTMLElement;

  constructor(container: HTMLElement, private cb: SummaryCallbacks) {
    this.root = el("div", { class: "panel summary" });
    this.root.appendChild(el("h2", {}, "Subgroup Summary"));
    this.header = el("div", { class: "summary-header" });
    this.root.appendChild(this.header);
    this.grid = el("div", { class: "summary-grid" });
    this.root.appendChild(this.grid);
    container.appendChild(this.root);
  }

  render(payload: SummaryPayload | null, opts: SummaryOptions): void {
    this.drawHeader(opts);
    clear(this.grid);
    if (!payload || payload.subgroups.length === 0) {
      this.grid.appendChild(
        el("p", { class: "hint" }, "Summarize subgroups to populate the panels."),
      );
      return;
    }
    this.drawPerformance(payload, opts);
    this.drawKM(payload, opts);
    this.drawFairness(payload, opts, 1, opts.metric1);
    this.drawFairness(payload, opts, 2, opts.metric2);
  }

  private drawHeader(opts: SummaryOptions): void {
    clear(this.header);

    const toggleLabel = el("label", { class: "toggle" });
    const toggle = el("input", { type: "checkbox", class: "poly-toggle" });
    toggle.checked = opts.polygon;
    toggle.addEventListener("change", () => this.cb.onPolygon(toggle.checked));
    toggleLabel.appendChild(toggle);
    toggleLabel.appendChild(el("span", {}, "model polygons"));
    this.header.appendChild(toggleLabel);

    const attrSel = el("select", { class: "protected-attr" });
    attrSel.appendChild(el("option", { value: "" }, "protected: none"));
    for (const v of opts.protectedVars) {
      const o = el("option", { value: v.name }, `protected: ${v.name}`);
      if (opts.pick && opts.pick.attribute === v.name) o.selected = true;
      attrSel.appendChild(o);
    }
    this.header.appendChild(attrSel);

    const levels =
      opts.pick == null
        ? []
        : opts.protectedVars.find((v) => v.name === opts.pick!.attribute)?.levels ?? [];
    const privSel = el("select", { class: "protected-priv" });
    const unprivSel = el("select", { class: "protected-unpriv" });
    for (const lvl of levels) {
      const o1 = el("option", { value: lvl }, `privileged: ${lvl}`);
      if (opts.pick && opts.pick.privileged === lvl) o1.selected = true;
      privSel.appendChild(o1);
      const o2 = el("option", { value: lvl }, `unprivileged: ${lvl}`);
      if (opts.pick && opts.pick.unprivileged === lvl) o2.selected = true;
      unprivSel.appendChild(o2);
    }
    if (opts.pick) {
      this.header.appendChild(privSel);
      this.header.appendChild(unprivSel);
    }

    const emit = () => {
      const attr = attrSel.value;
      if (!attr) {
        this.cb.onProtected(null);
        return;
      }
      const lv = opts.protectedVars.find((v) => v.name === attr)?.levels ?? [];
      const priv =
        attr === opts.pick?.attribute ? privSel.value : lv[lv.length - 1] ?? "";
      const unpriv = attr === opts.pick?.attribute ? unprivSel.value : lv[0] ?? "";
      this.cb.onProtected({ attribute: attr, privileged: priv, unprivileged: unpriv });
    };
    attrSel.addEventListener("change", emit);
    privSel.addEventListener("change", emit);
    unprivSel.addEventListener("change", emit);
  }

  private panel(cls: string, title: string, slot?: 1 | 2, metric?: Metric): SVG {
    const box = el("div", { class: `summary-panel ${cls}` });
    const bar = el("div", { class: "panel-bar" });
    if (slot && metric) {
      const sel = el("select", { class: `metric-select metric-${slot}` });
      for (const m of METRICS) {
        const o = el("option", { value: m }, METRIC_LABELS[m]);
        if (m === metric) o.selected = true;
        sel.appendChild(o);
      }
      sel.addEventListener("change", () => this.cb.onMetric(slot, sel.value as Metric));
      bar.appendChild(sel);
    } else {
      bar.appendChild(el("span", { class: "panel-title" }, title));
    }
    box.appendChild(bar);
    this.grid.appendChild(box);
    const svg = d3
      .select(box)
      .append("svg")
      .attr("viewBox", `0 0 ${W} ${H}`)
      .attr("class", `panel-svg ${cls}`);
    return svg.append("g").attr("transform", `translate(${MARGIN.left},${MARGIN.top})`);
  }

  private clickable(sel: d3.Selection<any, any, any, any>, index: number, selected: number | null): void {
    sel.style("cursor", "pointer").on("click", () => {
      this.cb.onSelect(index === selected ? null : index);
    });
  }

  private drawPerformance(payload: SummaryPayload, opts: SummaryOptions): void {
    const g = this.panel("perf", "performance");
    const pts: { i: number; m: string; x: number; y: number }[] = [];
    payload.subgroups.forEach((sub, i) => {
      for (const m of opts.models) {
        const e = sub.models[m]?.performance;
        if (e && e.calibration_slope != null && e.c_index != null) {
          pts.push({ i, m, x: e.calibration_slope, y: e.c_index });
        }
      }
    });
    if (pts.length === 0) {
      g.append("text").attr("class", "empty").attr("x", 10).attr("y", 20).text("no estimates");
      return;
    }
    const x = d3
      .scaleLinear()
      .domain(padded(d3.min(pts, (d) => d.x)!, d3.max(pts, (d) => d.x)!))
      .range([0, IW]);
    const y = d3
      .scaleLinear()
      .domain(padded(d3.min(pts, (d) => d.y)!, d3.max(pts, (d) => d.y)!))
      .range([IH, 0]);
    this.axes(g, x, y, "calibration slope", "c-index");
    if (x.domain()[0] < 1 && x.domain()[1] > 1) {
      g.append("line")
        .attr("class", "ref-line")
        .attr("x1", x(1))
        .attr("x2", x(1))
        .attr("y1", 0)
        .attr("y2", IH);
    }

    if (opts.polygon) {
      payload.subgroups.forEach((sub, i) => {
        const mine = pts.filter((d) => d.i === i);
        if (!mine.length) return;
        const color = subgroupColor(sub.color_index);
        const poly = g
          .append("polygon")
          .attr("class", "model-poly")
          .attr("data-subgroup", String(i))
          .attr("points", mine.map((d) => `${x(d.x)},${y(d.y)}`).join(" "))
          .attr("stroke", color)
          .attr("stroke-width", i === opts.selected ? 2.5 : 1.5)
          .attr("fill", color)
          .attr("fill-opacity", i === opts.selected ? 0.25 : 0.1);
        this.clickable(poly, i, opts.selected);
        this.vertices(g, mine.map((d) => ({ m: d.m, px: x(d.x), py: y(d.y) })), i, color, opts.selected);
      });
    } else {
      for (const d of pts) {
        const dot = g
          .append("circle")
          .attr("class", "perf-dot")
          .attr("data-subgroup", String(d.i))
          .attr("data-model", d.m)
          .attr("data-slope", String(d.x))
          .attr("data-cindex", String(d.y))
          .attr("cx", x(d.x))
          .attr("cy", y(d.y))
          .attr("r", d.i === opts.selected ? 6 : 4)
          .attr("fill", subgroupColor(payload.subgroups[d.i].color_index))
          .attr("stroke", d.i === opts.selected ? "#333" : "none");
        dot.append("title").text(`${payload.subgroups[d.i].label} / ${d.m}`);
        this.clickable(dot, d.i, opts.selected);
      }
    }
  }

  private drawKM(payload: SummaryPayload, opts: SummaryOptions): void {
    const g = this.panel("km", "Kaplan-Meier survival");
    const curves = payload.subgroups
      .map((sub, i) => ({ sub, i }))
      .filter((d) => d.sub.km && d.sub.km.times.length > 0);
    if (!curves.length) {
      g.append("text").attr("class", "empty").attr("x", 10).attr("y", 20).text("no events");
      return;
    }
    const maxT = d3.max(curves, (d) => d.sub.km.times[d.sub.km.times.length - 1]) ?? 1;
    const minS = d3.min(curves, (d) => d3.min(d.sub.km.survival)) ?? 1;
    const x = d3.scaleLinear().domain([0, maxT]).range([0, IW]);
    const y = d3
      .scaleLinear()
      .domain([Math.min(minS - 0.005, 0.99), 1])
      .range([IH, 0]);
    this.axes(g, x, y, "days", "S(t)");
    const line = d3
      .line<[number, number]>()
      .x((d) => x(d[0]))
      .y((d) => y(d[1]))
      .curve(d3.curveStepAfter);
    for (const { sub, i } of curves) {
      const pts: [number, number][] = [[0, 1]];
      sub.km.times.forEach((t, j) => pts.push([t, sub.km.survival[j]]));
      const path = g
        .append("path")
        .attr("class", "km-line")
        .attr("data-subgroup", String(i))
        .attr("d", line(pts))
        .attr("fill", "none")
        .attr("stroke", subgroupColor(sub.color_index))
        .attr("stroke-width", i === opts.selected ? 2.5 : 1.5);
      path.append("title").text(sub.label);
      this.clickable(path, i, opts.selected);
    }
  }

  private fairnessValue(sub: SummarySubgroup, model: string, attr: string, metric: Metric): number | null {
    const entry = sub.models[model]?.fairness?.[attr];
    if (!entry) return null;
    const v = entry[metric];
    return v == null || !Number.isFinite(v) ? null : v;
  }

  private drawFairness(payload: SummaryPayload, opts: SummaryOptions, slot: 1 | 2, metric: Metric): void {
    const g = this.panel(`fair fair-${slot}`, METRIC_LABELS[metric], slot, metric);
    if (!opts.pick) {
      g.append("text")
        .attr("class", "empty")
        .attr("x", 10)
        .attr("y", 20)
        .text("choose a protected attribute");
      return;
    }
    const attr = opts.pick.attribute;
    const pts: { i: number; m: string; v: number }[] = [];
    payload.subgroups.forEach((sub, i) => {
      for (const m of opts.models) {
        const v = this.fairnessValue(sub, m, attr, metric);
        if (v != null) pts.push({ i, m, v });
      }
    });
    if (!pts.length) {
      const why = metric === "if_violation_rate" ? "no audit values" : "no values";
      g.append("text").attr("class", "empty").attr("x", 10).attr("y", 20).text(why);
      return;
    }
    const lo = Math.min(0, d3.min(pts, (d) => d.v)!);
    const hi = Math.max(0, d3.max(pts, (d) => d.v)!);
    const y = d3.scaleLinear().domain(padded(lo, hi)).range([IH, 0]);

    if (opts.polygon) {
      const x = d3.scalePoint<string>().domain(opts.models).range([0, IW]).padding(0.5);
      this.axes(g, null, y, "model", metric);
      g.append("g")
        .attr("class", "axis")
        .attr("transform", `translate(0,${IH})`)
        .call(d3.axisBottom(x) as any);
      this.zeroLine(g, y);
      payload.subgroups.forEach((sub, i) => {
        const mine = pts.filter((d) => d.i === i);
        if (!mine.length) return;
        const color = subgroupColor(sub.color_index);
        const polyline = g
          .append("polyline")
          .attr("class", "model-polyline")
          .attr("data-subgroup", String(i))
          .attr("points", mine.map((d) => `${x(d.m)},${y(d.v)}`).join(" "))
          .attr("stroke", color)
          .attr("stroke-width", i === opts.selected ? 2.5 : 1.5)
          .attr("fill", "none");
        this.clickable(polyline, i, opts.selected);
        this.vertices(g, mine.map((d) => ({ m: d.m, px: x(d.m)!, py: y(d.v) })), i, color, opts.selected);
      });
    } else {
      const labels = payload.subgroups.map((_, i) => String(i + 1));
      const x = d3.scalePoint<string>().domain(labels).range([0, IW]).padding(0.5);
      this.axes(g, null, y, "subgroup", metric);
      g.append("g")
        .attr("class", "axis")
        .attr("transform", `translate(0,${IH})`)
        .call(d3.axisBottom(x) as any);
      this.zeroLine(g, y);
      for (const d of pts) {
        const dot = g
          .append("circle")
          .attr("class", "fair-dot")
          .attr("data-subgroup", String(d.i))
          .attr("data-model", d.m)
          .attr("data-value", String(d.v))
          .attr("cx", x(String(d.i + 1))!)
          .attr("cy", y(d.v))
          .attr("r", d.i === opts.selected ? 6 : 4)
          .attr("fill", subgroupColor(payload.subgroups[d.i].color_index))
          .attr("stroke", d.i === opts.selected ? "#333" : "none");
        dot.append("title").text(`${payload.subgroups[d.i].label} / ${d.m}`);
        this.clickable(dot, d.i, opts.selected);
      }
    }
  }

  private vertices(
    g: SVG,
    pts: { m: string; px: number; py: number }[],
    index: number,
    color: string,
    selected: number | null,
  ): void {
    for (const p of pts) {
      const c = g
        .append("circle")
        .attr("class", "vertex")
        .attr("data-subgroup", String(index))
        .attr("data-model", p.m)
        .attr("cx", p.px)
        .attr("cy", p.py)
        .attr("r", 3)
        .attr("fill", color);
      c.append("title").text(p.m);
      this.clickable(c, index, selected);
    }
  }

  private zeroLine(g: SVG, y: d3.ScaleLinear<number, number>): void {
    const [lo, hi] = y.domain();
    if (lo < 0 && hi > 0) {
      g.append("line")
        .attr("class", "ref-line")
        .attr("x1", 0)
        .attr("x2", IW)
        .attr("y1", y(0))
        .attr("y2", y(0));
    }
  }

  private axes(
    g: SVG,
    x: d3.ScaleLinear<number, number> | null,
    y: d3.ScaleLinear<number, number>,
    xLabel: string,
    yLabel: string,
  ): void {
    if (x) {
      g.append("g")
        .attr("class", "axis")
        .attr("transform", `translate(0,${IH})`)
        .call(d3.axisBottom(x).ticks(5) as any);
    }
    g.append("g").attr("class", "axis").call(d3.axisLeft(y).ticks(5) as any);
    g.append("text")
      .attr("class", "axis-label")
      .attr("x", IW / 2)
      .attr("y", IH + 27)
      .attr("text-anchor", "middle")
      .text(xLabel);
    g.append("text")
      .attr("class", "axis-label")
      .attr("transform", "rotate(-90)")
      .attr("x", -IH / 2)
      .attr("y", -34)
      .attr("text-anchor", "middle")
      .text(yLabel);
  }
}
