import {
  Api,
  ApiError,
  DistributionPayload,
  ExplainPayload,
  ModelInfo,
  PartitionInfo,
  ProtectedRequest,
  SchemaVariable,
  StaleResponse,
  SummaryPayload,
  SummaryRequest,
} from "./api";
import { clear, el } from "./dom";
import { AppState, UrlStore } from "./state";
import { BuilderView } from "./views/builder";
import { DistributionView } from "./views/distribution";
import { ExplainView } from "./views/explain";
import { SummaryView } from "./views/summary";

const AUDIT_SAMPLE_FRACTION = 0.2;

/**
 * Wires the four views to the HTTP API.  Every piece of view state lives in
 * the URL, so any configuration is shareable as a link; all numbers shown are
 * server-computed.  A threshold drag refreshes the distribution and the
 * summary together and renders both in a single pass so the handles and the
 * fairness panels never disagree.
 */
export class App {
  state: AppState;
  renderCount = 0;

  private schema: SchemaVariable[] = [];
  private models: ModelInfo[] = [];
  private hasCohort = false;
  private partition: PartitionInfo | null = null;
  private summaryData: SummaryPayload | null = null;
  private distData: DistributionPayload | null = null;
  private explainData: ExplainPayload | null = null;

  private topbar: HTMLElement;
  private cohortBox: HTMLElement;
  private statusBox: HTMLElement;
  private builder: BuilderView;
  private dist: DistributionView;
  private summary: SummaryView;
  private explain: ExplainView;

  constructor(
    root: HTMLElement,
    private api: Api = new Api(),
    private store: UrlStore = new UrlStore(),
  ) {
    this.state = this.store.get();

    this.topbar = el("header", { class: "topbar" });
    const brand = el("div", { class: "brand" });
    brand.appendChild(el("h1", {}, "rmx"));
    brand.appendChild(el("span", { class: "tagline" }, "survival risk model explorer"));
    this.topbar.appendChild(brand);
    root.appendChild(this.topbar);

    this.cohortBox = el("div", { class: "panel cohort", hidden: "" });
    root.appendChild(this.cohortBox);

    const layout = el("main", { class: "layout" });
    const left = el("aside", { class: "col left" });
    const mid = el("section", { class: "col mid" });
    const right = el("section", { class: "col right" });
    layout.appendChild(left);
    layout.appendChild(mid);
    layout.appendChild(right);
    root.appendChild(layout);

    this.statusBox = el("footer", { class: "status" });
    root.appendChild(this.statusBox);

    this.builder = new BuilderView(left, {
      onSummarize: (variables, bins) => {
        void this.summarize(variables, bins);
      },
      onSelect: (i) => {
        void this.select(i);
      },
    });
    this.dist = new DistributionView(mid, {
      onThreshold: (risk) => {
        void this.setThreshold(risk);
      },
      onModel: (m) => {
        this.state = this.store.set({ distModel: m });
        void this.guarded(async () => {
          this.distData = await this.fetchDistribution();
          this.renderAnalysis();
        });
      },
    });
    this.summary = new SummaryView(mid, {
      onSelect: (i) => {
        void this.select(i);
      },
      onMetric: (slot, metric) => {
        this.state = this.store.set(slot === 1 ? { metric1: metric } : { metric2: metric });
        this.renderAnalysis();
      },
      onProtected: (pick) => {
        void this.setProtected(pick);
      },
      onPolygon: (on) => {
        this.state = this.store.set({ polygon: on });
        this.renderAnalysis();
      },
    });
    this.explain = new ExplainView(right, {
      onModel: (m) => {
        this.state = this.store.set({ explainModel: m });
        void this.refreshExplain();
      },
      onClose: () => {
        void this.select(null);
      },
    });

    this.store.subscribe((s) => {
      this.state = s;
      void this.restore();
    });
  }

  async boot(): Promise<void> {
    try {
      this.models = await this.api.models();
    } catch (e) {
      this.fail(e);
      return;
    }
    try {
      this.schema = await this.api.schema();
      this.hasCohort = true;
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        this.renderCohortForm();
      } else {
        this.fail(e);
        return;
      }
    }
    this.renderChrome();
    this.builder.renderSchema(this.schema, this.state.variables, this.state.bins);
    await this.restore();
  }

  /** Rebuild everything the current URL state asks for. */
  private async restore(): Promise<void> {
    this.builder.renderSchema(this.schema, this.state.variables, this.state.bins);
    if (!this.hasCohort) {
      this.builder.renderPartition(null, null);
      this.renderAnalysis();
      return;
    }
    await this.guarded(async () => {
      if (this.state.variables.length) {
        this.partition = await this.api.subgroups(this.state.variables, this.state.bins);
      } else {
        this.partition = null;
      }
      this.builder.renderPartition(this.partition, this.state.selected);
      await this.refreshAnalysis();
      await this.refreshExplain();
    });
  }

  async summarize(variables: string[], bins: Record<string, number[]>): Promise<void> {
    if (!this.hasCohort) {
      this.setStatus("load a cohort first", true);
      return;
    }
    this.state = this.store.set({ variables, bins, selected: null });
    await this.guarded(async () => {
      this.partition = variables.length
        ? await this.api.subgroups(variables, bins)
        : null;
      this.builder.renderPartition(this.partition, null);
      await this.refreshAnalysis();
      await this.refreshExplain();
    });
  }

  /** Threshold drag endpoint: one state patch, both fetches in flight
   * together, then a single render of distribution and summary. */
  async setThreshold(risk: number): Promise<void> {
    const clamped = Math.min(Math.max(risk, 1e-6), 1 - 1e-6);
    this.state = this.store.set({ threshold: clamped }, { replace: true });
    await this.refreshAnalysis();
  }

  async select(index: number | null): Promise<void> {
    this.state = this.store.set({ selected: index });
    this.builder.renderPartition(this.partition, index);
    // drop the old subgroup's explanation before the new one arrives
    this.explainData = null;
    this.renderAnalysis();
    await this.refreshExplain();
  }

  private async setProtected(pick: ProtectedRequest | null): Promise<void> {
    this.state = this.store.set({ protectedPick: pick });
    await this.guarded(async () => {
      if (this.partition) this.summaryData = await this.fetchSummary();
      this.renderAnalysis();
    });
  }

  private async refreshAnalysis(): Promise<void> {
    if (!this.hasCohort) return;
    await this.guarded(async () => {
      const jobs: [Promise<DistributionPayload>, Promise<SummaryPayload | null>] = [
        this.fetchDistribution(),
        this.partition ? this.fetchSummary() : Promise.resolve(null),
      ];
      const [dist, summary] = await Promise.all(jobs);
      this.distData = dist;
      this.summaryData = summary;
      this.renderAnalysis();
    });
  }

  private renderAnalysis(): void {
    this.renderCount += 1;
    const models = this.effectiveModels();
    if (this.distData) this.dist.render(this.distData, models, this.distModel());
    this.summary.render(this.partition ? this.summaryData : null, {
      models,
      metric1: this.state.metric1,
      metric2: this.state.metric2,
      polygon: this.state.polygon,
      selected: this.state.selected,
      protectedVars: this.schema.filter((v) => v.roles.includes("protected")),
      pick: this.state.protectedPick,
    });
    this.explain.render(this.explainData, {
      models,
      current: this.explainModel(),
      partition: this.partition,
      selected: this.state.selected,
    });
  }

  private async refreshExplain(): Promise<void> {
    const sel = this.state.selected;
    if (
      sel == null ||
      !this.partition ||
      sel >= this.partition.subgroups.length
    ) {
      this.explainData = null;
      this.renderAnalysis();
      return;
    }
    await this.guarded(async () => {
      this.explainData = await this.api.explain({
        partition_id: this.partition!.partition_id,
        model: this.explainModel(),
        subgroup: sel,
        fraction: this.state.fraction,
        seed: this.state.seed,
      });
      this.renderAnalysis();
    });
  }

  private fetchDistribution(): Promise<DistributionPayload> {
    return this.api.distribution({
      model: this.distModel(),
      bins: 40,
      partition_id: this.partition?.partition_id,
      threshold_risk: this.state.threshold,
    });
  }

  private fetchSummary(): Promise<SummaryPayload> {
    const body: SummaryRequest = {
      partition_id: this.partition!.partition_id,
      models: this.effectiveModels(),
      threshold: { risk: this.state.threshold },
      protected: this.state.protectedPick ? [this.state.protectedPick] : [],
      audit: this.state.audit
        ? { sample_fraction: AUDIT_SAMPLE_FRACTION, seed: this.state.seed }
        : null,
    };
    return this.api.summary(body);
  }

  effectiveModels(): string[] {
    const known = this.models.map((m) => m.name);
    const picked = this.state.models.filter((m) => known.includes(m));
    return picked.length ? picked : known;
  }

  private distModel(): string {
    const models = this.effectiveModels();
    return this.state.distModel && models.includes(this.state.distModel)
      ? this.state.distModel
      : models[0] ?? "";
  }

  private explainModel(): string {
    const models = this.effectiveModels();
    return this.state.explainModel && models.includes(this.state.explainModel)
      ? this.state.explainModel
      : models[0] ?? "";
  }

  private renderChrome(): void {
    const old = this.topbar.querySelector(".controls");
    if (old) old.remove();
    const controls = el("div", { class: "controls" });
    const modelBox = el("span", { class: "model-picker" }, "models:");
    const effective = this.effectiveModels();
    for (const m of this.models) {
      const label = el("label", { class: "model-check" });
      const check = el("input", { type: "checkbox", "data-model": m.name });
      check.checked = effective.includes(m.name);
      check.addEventListener("change", () => {
        const picked = Array.from(
          this.topbar.querySelectorAll<HTMLInputElement>(".model-check input:checked"),
        ).map((c) => c.getAttribute("data-model")!);
        this.state = this.store.set({ models: picked });
        void this.guarded(async () => {
          await this.refreshAnalysis();
          await this.refreshExplain();
        });
      });
      label.appendChild(check);
      label.appendChild(el("span", {}, m.name));
      modelBox.appendChild(label);
    }
    controls.appendChild(modelBox);

    const auditLabel = el("label", { class: "toggle" });
    const audit = el("input", { type: "checkbox", class: "audit-toggle" });
    audit.checked = this.state.audit;
    audit.addEventListener("change", () => {
      this.state = this.store.set({ audit: audit.checked });
      void this.guarded(async () => {
        if (this.partition) this.summaryData = await this.fetchSummary();
        this.renderAnalysis();
      });
    });
    auditLabel.appendChild(audit);
    auditLabel.appendChild(el("span", {}, "individual fairness audit"));
    controls.appendChild(auditLabel);
    this.topbar.appendChild(controls);
  }

  private renderCohortForm(): void {
    this.cohortBox.hidden = false;
    clear(this.cohortBox);
    this.cohortBox.appendChild(el("h2", {}, "Load Cohort"));
    this.cohortBox.appendChild(
      el(
        "p",
        { class: "hint" },
        "No cohort is loaded. Give the server a CSV path or a synthetic cohort spec path.",
      ),
    );
    const csv = el("input", { type: "text", class: "csv-path", placeholder: "cohort CSV path on server" });
    const spec = el("input", {
      type: "text",
      class: "spec-path",
      placeholder: "synthetic spec path on server",
    });
    const schema = el("input", {
      type: "text",
      class: "schema-path",
      placeholder: "schema path (optional)",
    });
    const btn = el("button", {}, "Load");
    btn.addEventListener("click", () => {
      void this.guarded(async () => {
        const body: Record<string, string> = {};
        if (csv.value.trim()) body.csv_path = csv.value.trim();
        else if (spec.value.trim()) body.synth_spec_path = spec.value.trim();
        else {
          this.setStatus("enter a CSV path or a spec path", true);
          return;
        }
        if (schema.value.trim()) body.schema_path = schema.value.trim();
        const info = await this.api.loadCohort(body);
        this.hasCohort = true;
        this.schema = await this.api.schema();
        this.cohortBox.hidden = true;
        this.setStatus(`cohort loaded: ${info.n} patients`, false);
        this.renderChrome();
        await this.restore();
      });
    });
    for (const node of [csv, spec, schema, btn]) this.cohortBox.appendChild(node);
  }

  private setStatus(text: string, isError: boolean): void {
    this.statusBox.textContent = text;
    this.statusBox.className = isError ? "status error" : "status";
  }

  /** Run an async step, dropping superseded responses and surfacing API errors. */
  private async guarded(step: () => Promise<void>): Promise<void> {
    try {
      await step();
      this.setStatus("", false);
    } catch (e) {
      if (e instanceof StaleResponse) return;
      this.fail(e);
    }
  }

  private fail(e: unknown): void {
    if (e instanceof ApiError) {
      this.setStatus(`error ${e.status}: ${e.message}`, true);
    } else {
      this.setStatus(e instanceof Error ? e.message : String(e), true);
    }
  }
}
