/** All analysis state lives in the URL query string so a walkthrough is a
 * shareable link. Decoding is forgiving: anything malformed falls back to
 * the default rather than breaking the page. */

export type Metric = "spd" | "tprd" | "if_violation_rate";

export const METRICS: Metric[] = ["spd", "tprd", "if_violation_rate"];

export const METRIC_LABELS: Record<Metric, string> = {
  spd: "statistical parity difference",
  tprd: "true positive rate difference",
  if_violation_rate: "individual fairness violation rate",
};

export interface ProtectedPick {
  attribute: string;
  privileged: string;
  unprivileged: string;
}

export interface AppState {
  variables: string[];
  bins: Record<string, number[]>;
  models: string[];
  threshold: number;
  protectedPick: ProtectedPick | null;
  metric1: Metric;
  metric2: Metric;
  polygon: boolean;
  selected: number | null;
  distModel: string | null;
  explainModel: string | null;
  fraction: number;
  seed: number;
  audit: boolean;
}

export const DEFAULT_STATE: AppState = {
  variables: [],
  bins: {},
  models: [],
  threshold: 0.05,
  protectedPick: null,
  metric1: "spd",
  metric2: "tprd",
  polygon: false,
  selected: null,
  distModel: null,
  explainModel: null,
  fraction: 0.1,
  seed: 0,
  audit: false,
};

export function encodeState(s: AppState): string {
  const p = new URLSearchParams();
  if (s.variables.length) p.set("g", s.variables.join(","));
  for (const [name, edges] of Object.entries(s.bins)) {
    p.append("b", [name, ...edges.map((e) => String(e))].join(":"));
  }
  if (s.models.length) p.set("m", s.models.join(","));
  if (s.threshold !== DEFAULT_STATE.threshold) p.set("t", String(s.threshold));
  if (s.protectedPick) {
    const pk = s.protectedPick;
    p.set("p", [pk.attribute, pk.privileged, pk.unprivileged].join(":"));
  }
  if (s.metric1 !== DEFAULT_STATE.metric1) p.set("f1", s.metric1);
  if (s.metric2 !== DEFAULT_STATE.metric2) p.set("f2", s.metric2);
  if (s.polygon) p.set("mode", "poly");
  if (s.selected != null) p.set("sel", String(s.selected));
  if (s.distModel) p.set("dm", s.distModel);
  if (s.explainModel) p.set("em", s.explainModel);
  if (s.fraction !== DEFAULT_STATE.fraction) p.set("fr", String(s.fraction));
  if (s.seed !== DEFAULT_STATE.seed) p.set("es", String(s.seed));
  if (s.audit) p.set("a", "1");
  return p.toString();
}

function parseList(value: string | null): string[] {
  if (!value) return [];
  return value.split(",").map((v) => v.trim()).filter((v) => v.length > 0);
}

function parseUnitFloat(value: string | null, fallback: number, openLeft: boolean): number {
  if (value == null) return fallback;
  const x = Number.parseFloat(value);
  if (!Number.isFinite(x)) return fallback;
  if (openLeft ? x <= 0 : x < 0) return fallback;
  if (x > 1 || (openLeft && x >= 1)) return fallback;
  return x;
}

function parseMetric(value: string | null, fallback: Metric): Metric {
  return METRICS.includes(value as Metric) ? (value as Metric) : fallback;
}

export function decodeState(search: string): AppState {
  const p = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const s: AppState = { ...DEFAULT_STATE, bins: {} };

  s.variables = parseList(p.get("g"));
  for (const spec of p.getAll("b")) {
    const parts = spec.split(":");
    if (parts.length < 3) continue;
    const edges = parts.slice(1).map((v) => Number.parseFloat(v));
    if (edges.every((e) => Number.isFinite(e))) s.bins[parts[0]] = edges;
  }
  s.models = parseList(p.get("m"));
  s.threshold = parseUnitFloat(p.get("t"), DEFAULT_STATE.threshold, true);
  const pk = p.get("p");
  if (pk) {
    const parts = pk.split(":");
    if (parts.length === 3 && parts.every((v) => v.length > 0)) {
      s.protectedPick = { attribute: parts[0], privileged: parts[1], unprivileged: parts[2] };
    }
  }
  s.metric1 = parseMetric(p.get("f1"), DEFAULT_STATE.metric1);
  s.metric2 = parseMetric(p.get("f2"), DEFAULT_STATE.metric2);
  s.polygon = p.get("mode") === "poly";
  const sel = p.get("sel");
  if (sel != null) {
    const i = Number.parseInt(sel, 10);
    if (Number.isInteger(i) && i >= 0) s.selected = i;
  }
  s.distModel = p.get("dm");
  s.explainModel = p.get("em");
  s.fraction = parseUnitFloat(p.get("fr"), DEFAULT_STATE.fraction, true);
  const seed = Number.parseInt(p.get("es") ?? "", 10);
  if (Number.isInteger(seed) && seed >= 0) s.seed = seed;
  s.audit = p.get("a") === "1";
  return s;
}

/** History-backed store; set() patches the state into the URL. The app
 * drives its own refreshes, so set() is silent and subscribers only hear
 * about back/forward navigation. */
export class UrlStore {
  private listeners: ((s: AppState) => void)[] = [];

  constructor(private win: Window = window) {
    this.win.addEventListener("popstate", () => {
      const s = this.get();
      for (const fn of this.listeners) fn(s);
    });
  }

  get(): AppState {
    return decodeState(this.win.location.search);
  }

  set(patch: Partial<AppState>, opts: { replace?: boolean } = {}): AppState {
    const next = { ...this.get(), ...patch };
    const qs = encodeState(next);
    const url = qs ? `?${qs}` : this.win.location.pathname;
    if (opts.replace) this.win.history.replaceState(null, "", url);
    else this.win.history.pushState(null, "", url);
    return next;
  }

  subscribe(fn: (s: AppState) => void): void {
    this.listeners.push(fn);
  }
}
