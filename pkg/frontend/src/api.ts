/** Typed client for the rmx HTTP API. The UI renders server numbers only;
 * nothing in here recomputes a metric. */

export interface SchemaVariable {
  name: string;
  kind: "binary" | "categorical" | "continuous";
  units: string | null;
  roles: string[];
  levels: string[] | null;
  valid_range: [number, number] | null;
  missing_codes: (string | number)[];
}

export interface ModelInfo {
  name: string;
  c: number;
  bias: number;
  horizon_days: number;
  n_terms: number;
}

export interface CohortInfo {
  snapshot_id: string;
  n: number;
  ledger: [string, number][];
}

export interface SubgroupInfo {
  label: string;
  predicate: unknown[];
  count: number;
  percent: number;
  color_index: number;
}

export interface PartitionInfo {
  partition_id: string;
  snapshot_id: string;
  spec: unknown;
  subgroups: SubgroupInfo[];
  excluded_missing: number;
}

export interface KMData {
  times: number[];
  survival: number[];
  at_risk: number[];
  events: number[];
}

export interface PerformanceEntry {
  c_index: number | null;
  calibration_slope: number | null;
  n: number;
  events: number;
  flags: string[];
}

export interface FairnessEntry {
  spd: number | null;
  tprd: number | null;
  n_priv: number;
  n_unpriv: number;
  n_tpr_priv: number;
  n_tpr_unpriv: number;
  flags: string[];
  if_violation_rate: number | null;
  n_audited: number | null;
}

export interface SummaryModelEntry {
  performance: PerformanceEntry;
  fairness: Record<string, FairnessEntry>;
}

export interface SummarySubgroup {
  label: string;
  count: number;
  color_index: number;
  km: KMData;
  models: Record<string, SummaryModelEntry>;
}

export interface SummaryPayload {
  request: unknown;
  snapshot_id: string;
  partition_id: string;
  threshold: { risk: number; scores: Record<string, number> };
  subgroups: SummarySubgroup[];
  excluded_missing: number;
}

export interface Histogram {
  edges: number[];
  counts: number[];
}

export interface DistributionPayload {
  model: string;
  n: number;
  score: Histogram;
  risk: Histogram;
  threshold: { risk: number; score: number };
}

export interface SurvivalPayload {
  partition_id: string;
  horizon_days: number;
  subgroups: { label: string; color_index: number; count: number; km: KMData }[];
}

export interface ShapRecord {
  row: number;
  phi: number[];
  norm: number[];
}

export interface TrendsPayload {
  features: string[];
  subgroups: Record<string, { means: (number | null)[]; stds: (number | null)[] }>;
  flags: string[];
}

export interface ExplainPayload {
  features: string[];
  reference_score: number;
  records: ShapRecord[];
  flags: string[];
  trends: TrendsPayload;
  subgroup: string;
  model: string;
  fraction: number;
  seed: number;
}

export interface ProtectedRequest {
  attribute: string;
  privileged: string;
  unprivileged: string;
}

export interface SummaryRequest {
  partition_id: string;
  models: string[];
  threshold: { risk: number };
  protected: ProtectedRequest[];
  audit: Record<string, number> | null;
}

export interface CohortRequest {
  csv_path?: string;
  synth_spec_path?: string;
  schema_path?: string;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class StaleResponse extends Error {
  constructor(channel: string) {
    super(`superseded request on ${channel}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Each logical channel (summary, distribution, ...) keeps a counter; a
 * response that arrives after a newer request was issued on its channel
 * rejects with StaleResponse so the caller drops it instead of rendering
 * out-of-date numbers. */
export class Api {
  private tags = new Map<string, number>();

  constructor(
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
    private base = "",
  ) {}

  private async request<T>(channel: string, path: string, init?: RequestInit): Promise<T> {
    const tag = (this.tags.get(channel) ?? 0) + 1;
    this.tags.set(channel, tag);
    const res = await this.fetchFn(this.base + path, init);
    if (this.tags.get(channel) !== tag) throw new StaleResponse(channel);
    if (!res.ok) {
      let detail = res.statusText || `HTTP ${res.status}`;
      try {
        const body = await res.json();
        if (body && body.detail != null) {
          detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
        }
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    const out = (await res.json()) as T;
    if (this.tags.get(channel) !== tag) throw new StaleResponse(channel);
    return out;
  }

  private post<T>(channel: string, path: string, body: unknown): Promise<T> {
    return this.request<T>(channel, path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  schema(): Promise<SchemaVariable[]> {
    return this.request("schema", "/api/schema");
  }

  models(): Promise<ModelInfo[]> {
    return this.request("models", "/api/models");
  }

  loadCohort(body: CohortRequest): Promise<CohortInfo> {
    return this.post("cohort", "/api/cohort", body);
  }

  subgroups(variables: string[], bins: Record<string, number[]>): Promise<PartitionInfo> {
    return this.post("subgroups", "/api/subgroups", {
      variables,
      bins: Object.keys(bins).length ? bins : null,
    });
  }

  summary(body: SummaryRequest): Promise<SummaryPayload> {
    return this.post("summary", "/api/summary", body);
  }

  distribution(q: {
    model: string;
    bins?: number;
    partition_id?: string;
    subgroup?: number;
    threshold_risk?: number;
  }): Promise<DistributionPayload> {
    const params = new URLSearchParams({ model: q.model });
    if (q.bins != null) params.set("bins", String(q.bins));
    if (q.partition_id != null) params.set("partition_id", q.partition_id);
    if (q.subgroup != null) params.set("subgroup", String(q.subgroup));
    if (q.threshold_risk != null) params.set("threshold_risk", String(q.threshold_risk));
    return this.request("distribution", `/api/distribution?${params.toString()}`);
  }

  survival(partition_id: string, horizon_days?: number): Promise<SurvivalPayload> {
    const params = new URLSearchParams({ partition_id });
    if (horizon_days != null) params.set("horizon_days", String(horizon_days));
    return this.request("survival", `/api/survival?${params.toString()}`);
  }

  explain(body: {
    partition_id: string;
    model: string;
    subgroup: number;
    fraction: number;
    seed: number;
  }): Promise<ExplainPayload> {
    return this.post("explain", "/api/explain", body);
  }
}
