import { PartitionInfo, SchemaVariable } from "../api";
import { subgroupColor } from "../color";
import { clear, el } from "../dom";

export interface BuilderCallbacks {
  onSummarize(variables: string[], bins: Record<string, number[]>): void;
  onSelect(index: number | null): void;
}

/**
 * Subgroup builder: pick stratification variables, optionally override the
 * bin edges of continuous ones, and list the resulting partition with
 * per-subgroup counts and percentages.
 */
export class BuilderView {
  private root: HTMLElement;
  private listBox: HTMLElement;
  private tableBox: HTMLElement;
  private checks = new Map<string, HTMLInputElement>();
  private binInputs = new Map<string, HTMLInputElement>();

  constructor(container: HTMLElement, private cb: BuilderCallbacks) {
    this.root = el("div", { class: "panel builder" });
    this.root.appendChild(el("h2", {}, "Subgroup Builder"));
    this.listBox = el("div", { class: "var-list" });
    this.root.appendChild(this.listBox);
    const btn = el("button", { class: "summarize" }, "Summarize Subgroups");
    btn.addEventListener("click", () => this.summarize());
    this.root.appendChild(btn);
    this.tableBox = el("div", { class: "partition" });
    this.root.appendChild(this.tableBox);
    container.appendChild(this.root);
  }

  renderSchema(schema: SchemaVariable[], picked: string[], bins: Record<string, number[]>): void {
    clear(this.listBox);
    this.checks.clear();
    this.binInputs.clear();
    for (const v of schema) {
      if (!v.roles.includes("subgroup")) continue;
      const row = el("label", { class: "var-row" });
      const check = el("input", { type: "checkbox" });
      check.checked = picked.includes(v.name);
      this.checks.set(v.name, check);
      row.appendChild(check);
      row.appendChild(el("span", { class: "var-name" }, v.name));
      if (v.kind === "continuous") {
        const edges = bins[v.name];
        const input = el("input", {
          type: "text",
          class: "bin-edges",
          placeholder: "bin edges, e.g. 40, 55, 65",
        });
        if (edges) input.value = edges.join(", ");
        // stop the wrapping label from toggling the checkbox on click
        input.addEventListener("click", (e) => e.preventDefault());
        this.binInputs.set(v.name, input);
        row.appendChild(input);
      }
      this.listBox.appendChild(row);
    }
  }

  renderPartition(partition: PartitionInfo | null, selected: number | null): void {
    clear(this.tableBox);
    if (!partition) {
      this.tableBox.appendChild(
        el("p", { class: "hint" }, "Pick variables and summarize to partition the cohort."),
      );
      return;
    }
    const table = el("table", { class: "subgroup-table" });
    const head = el("tr");
    for (const h of ["", "Subgroup", "Count", "%"]) head.appendChild(el("th", {}, h));
    table.appendChild(head);
    partition.subgroups.forEach((g, i) => {
      const tr = el("tr", {
        class: "subgroup-row" + (i === selected ? " selected" : ""),
        "data-index": String(i),
      });
      const swatchCell = el("td");
      const swatch = el("span", { class: "swatch", "data-color": subgroupColor(g.color_index) });
      swatch.style.backgroundColor = subgroupColor(g.color_index);
      swatchCell.appendChild(swatch);
      tr.appendChild(swatchCell);
      tr.appendChild(el("td", { class: "subgroup-label" }, g.label));
      tr.appendChild(el("td", { class: "num" }, String(g.count)));
      tr.appendChild(el("td", { class: "num" }, g.percent.toFixed(1)));
      tr.addEventListener("click", () => this.cb.onSelect(i === selected ? null : i));
      table.appendChild(tr);
    });
    this.tableBox.appendChild(table);
    if (partition.excluded_missing > 0) {
      this.tableBox.appendChild(
        el("p", { class: "hint" }, `${partition.excluded_missing} rows excluded for missing values`),
      );
    }
  }

  private summarize(): void {
    const variables: string[] = [];
    const bins: Record<string, number[]> = {};
    for (const [name, check] of this.checks) {
      if (!check.checked) continue;
      variables.push(name);
      const input = this.binInputs.get(name);
      if (input && input.value.trim()) {
        const edges = input.value
          .split(/[,\s:]+/)
          .filter((s) => s.length)
          .map(Number);
        if (edges.length >= 1 && edges.every(Number.isFinite)) bins[name] = edges;
      }
    }
    this.cb.onSummarize(variables, bins);
  }
}
