import {
  DistributionPayload,
  ExplainPayload,
  ProtectedRequest,
  SchemaVariable,
  SummaryPayload,
} from "../src/api";

export const MODELS = ["ehr-af", "charge-af", "c2hest"];

export const SUBGROUPS = [
  { label: "sex=female", predicate: [["sex", "==", "female"]], count: 9900, percent: 49.5, color_index: 0 },
  { label: "sex=male", predicate: [["sex", "==", "male"]], count: 10100, percent: 50.5, color_index: 1 },
];

export const SCHEMA: SchemaVariable[] = [
  {
    name: "age",
    kind: "continuous",
    units: "years",
    roles: ["predictor", "subgroup"],
    levels: null,
    valid_range: [0, 120],
    missing_codes: [],
  },
  {
    name: "sex",
    kind: "binary",
    units: null,
    roles: ["predictor", "subgroup", "protected"],
    levels: ["female", "male"],
    valid_range: null,
    missing_codes: [],
  },
];

/** The fake server's synchronized threshold pair: score is ten times risk. */
export function scoreAt(risk: number): number {
  return 10 * risk;
}

function round(x: number): number {
  return Math.round(x * 1e6) / 1e6;
}

export function summaryPayload(
  risk: number,
  models: string[],
  splits: ProtectedRequest[],
  audit: boolean,
): SummaryPayload {
  const subgroups = SUBGROUPS.map((g, i) => ({
    label: g.label,
    count: g.count,
    color_index: g.color_index,
    km: {
      times: [120, 360, 720],
      survival: [round(0.999 - 0.001 * i), round(0.997 - 0.001 * i), round(0.994 - 0.002 * i)],
      at_risk: [g.count, g.count - 50, g.count - 120],
      events: [8, 16, 31],
    },
    models: Object.fromEntries(
      models.map((m, j) => [
        m,
        {
          performance: {
            c_index: round(0.64 + 0.02 * j + 0.01 * i + risk),
            calibration_slope: round(1 + 0.2 * j - 0.1 * i - risk),
            n: g.count,
            events: 55,
            flags: [],
          },
          fairness: Object.fromEntries(
            splits.map((p) => [
              p.attribute,
              {
                spd: round(0.02 + 0.03 * j + 0.05 * i + risk),
                tprd: round(0.01 + 0.02 * j + 0.04 * i - risk),
                n_priv: 5000,
                n_unpriv: 4900,
                n_tpr_priv: 300,
                n_tpr_unpriv: 280,
                flags: [],
                if_violation_rate: audit ? round(0.05 + 0.01 * j + 0.02 * i) : null,
                n_audited: audit ? 400 : null,
              },
            ]),
          ),
        },
      ]),
    ),
  }));
  return {
    request: {},
    snapshot_id: "s1",
    partition_id: "p1",
    threshold: { risk, scores: Object.fromEntries(models.map((m) => [m, scoreAt(risk)])) },
    subgroups,
    excluded_missing: 0,
  };
}

export function distributionPayload(model: string, risk: number): DistributionPayload {
  return {
    model,
    n: 20000,
    score: { edges: [0, 0.5, 1, 1.5, 2], counts: [3000, 8000, 6000, 3000] },
    risk: { edges: [0, 0.05, 0.1, 0.15, 0.2], counts: [3000, 8000, 6000, 3000] },
    threshold: { risk, score: scoreAt(risk) },
  };
}

export function explainPayload(body: {
  model: string;
  subgroup: number;
  fraction: number;
  seed: number;
}): ExplainPayload {
  return {
    features: ["age", "bmi"],
    reference_score: 11.2,
    records: [0, 1, 2, 3, 4].map((r) => ({
      row: r,
      phi: [round(0.1 * r - 0.2), round(0.05 * r)],
      norm: [r / 4, 1 - r / 4],
    })),
    flags: [],
    trends: {
      features: ["age", "bmi"],
      subgroups: Object.fromEntries(
        SUBGROUPS.map((g, i) => [
          g.label,
          { means: [0.4 + 0.1 * i, 0.6 - 0.1 * i], stds: [0.1, 0.1] },
        ]),
      ),
      flags: [],
    },
    subgroup: SUBGROUPS[body.subgroup].label,
    model: body.model,
    fraction: body.fraction,
    seed: body.seed,
  };
}

export interface FakeServer {
  fetchFn: (url: string, init?: RequestInit) => Promise<Response>;
  calls: Record<string, number>;
}

export function makeServer(opts: { hasCohort?: boolean } = {}): FakeServer {
  let loaded = opts.hasCohort ?? true;
  const calls: Record<string, number> = {};
  const bump = (k: string) => {
    calls[k] = (calls[k] ?? 0) + 1;
  };
  const json = (data: unknown, status = 200): Response =>
    ({
      ok: status < 400,
      status,
      statusText: String(status),
      json: async () => data,
    }) as unknown as Response;

  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const u = new URL(url, "http://localhost");
    const body = init?.body ? JSON.parse(init.body as string) : null;
    switch (u.pathname) {
      case "/api/models":
        bump("models");
        return json(MODELS.map((name) => ({ name, c: 0.1, bias: 10, horizon_days: 1825, n_terms: 4 })));
      case "/api/schema":
        bump("schema");
        return loaded ? json(SCHEMA) : json({ detail: "no cohort loaded" }, 409);
      case "/api/cohort":
        bump("cohort");
        loaded = true;
        return json({ snapshot_id: "s1", n: 20000, ledger: [["loaded", 20000]] });
      case "/api/subgroups":
        bump("subgroups");
        return json({
          partition_id: "p1",
          snapshot_id: "s1",
          spec: { variables: body.variables, bins: body.bins },
          subgroups: SUBGROUPS,
          excluded_missing: 0,
        });
      case "/api/summary":
        bump("summary");
        return json(summaryPayload(body.threshold.risk, body.models, body.protected, body.audit != null));
      case "/api/distribution":
        bump("distribution");
        return json(
          distributionPayload(
            u.searchParams.get("model") ?? "",
            Number(u.searchParams.get("threshold_risk") ?? "0.05"),
          ),
        );
      case "/api/survival":
        bump("survival");
        return json({ partition_id: "p1", horizon_days: 1825, subgroups: [] });
      case "/api/explain":
        bump("explain");
        return json(explainPayload(body));
      default:
        return json({ detail: `no route ${u.pathname}` }, 404);
    }
  };
  return { fetchFn, calls };
}
