import { beforeEach, describe, expect, it } from "vitest";
import { Api } from "../src/api";
import { App } from "../src/app";
import { subgroupColor } from "../src/color";
import { UrlStore } from "../src/state";
import { FakeServer, MODELS, SUBGROUPS, makeServer, scoreAt, summaryPayload } from "./fake";

function mount(): HTMLElement {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}

async function bootApp(
  search: string,
  opts: { hasCohort?: boolean } = {},
): Promise<{ app: App; server: FakeServer }> {
  window.history.replaceState(null, "", search ? `/?${search}` : "/");
  const server = makeServer(opts);
  const app = new App(mount(), new Api(server.fetchFn), new UrlStore(window));
  await app.boot();
  return { app, server };
}

beforeEach(() => {
  window.history.replaceState(null, "", "/");
});

describe("threshold synchronization", () => {
  it("updates both handles and the fairness panels in one render cycle", async () => {
    const { app, server } = await bootApp("g=sex&p=sex:male:female");
    const renders = app.renderCount;
    const distCalls = server.calls.distribution ?? 0;
    const summaryCalls = server.calls.summary ?? 0;

    await app.setThreshold(0.08);

    expect(app.renderCount).toBe(renders + 1);
    expect(server.calls.distribution).toBe(distCalls + 1);
    expect(server.calls.summary).toBe(summaryCalls + 1);

    const risk = document.querySelector('.handle[data-kind="risk"]')!;
    const score = document.querySelector('.handle[data-kind="score"]')!;
    expect(risk.getAttribute("data-value")).toBe("0.08");
    expect(score.getAttribute("data-value")).toBe(String(scoreAt(0.08)));

    // every fairness value on screen matches a fresh summary at 0.08
    const fresh = summaryPayload(
      0.08,
      MODELS,
      [{ attribute: "sex", privileged: "male", unprivileged: "female" }],
      false,
    );
    const dots = document.querySelectorAll(".fair-1 .fair-dot");
    expect(dots.length).toBe(SUBGROUPS.length * MODELS.length);
    for (const dot of dots) {
      const i = Number(dot.getAttribute("data-subgroup"));
      const m = dot.getAttribute("data-model")!;
      const expected = fresh.subgroups[i].models[m].fairness.sex.spd;
      expect(Number(dot.getAttribute("data-value"))).toBe(expected);
    }
    const tprDots = document.querySelectorAll(".fair-2 .fair-dot");
    for (const dot of tprDots) {
      const i = Number(dot.getAttribute("data-subgroup"));
      const m = dot.getAttribute("data-model")!;
      const expected = fresh.subgroups[i].models[m].fairness.sex.tprd;
      expect(Number(dot.getAttribute("data-value"))).toBe(expected);
    }

    expect(window.location.search).toContain("t=0.08");
  });
});

describe("polygon mode", () => {
  it("draws one vertex per selected model", async () => {
    await bootApp("g=sex&mode=poly");
    const polys = document.querySelectorAll(".perf polygon.model-poly");
    expect(polys.length).toBe(SUBGROUPS.length);
    for (const poly of polys) {
      expect(poly.getAttribute("points")!.trim().split(/\s+/).length).toBe(3);
    }
    for (let i = 0; i < SUBGROUPS.length; i++) {
      expect(document.querySelectorAll(`.perf .vertex[data-subgroup="${i}"]`).length).toBe(3);
    }
  });

  it("narrows the polygons with the model selection", async () => {
    await bootApp("g=sex&mode=poly&m=ehr-af,charge-af");
    const polys = document.querySelectorAll(".perf polygon.model-poly");
    expect(polys.length).toBe(SUBGROUPS.length);
    for (const poly of polys) {
      expect(poly.getAttribute("points")!.trim().split(/\s+/).length).toBe(2);
    }
  });

  it("links fairness vertices across models too", async () => {
    await bootApp("g=sex&mode=poly&p=sex:male:female");
    const lines = document.querySelectorAll(".fair-1 polyline.model-polyline");
    expect(lines.length).toBe(SUBGROUPS.length);
    for (const line of lines) {
      expect(line.getAttribute("points")!.trim().split(/\s+/).length).toBe(3);
    }
  });
});

describe("subgroup color consistency", () => {
  it("uses one color per subgroup across all five views", async () => {
    const { app } = await bootApp("g=sex&p=sex:male:female");
    await app.select(1);

    const expected = subgroupColor(SUBGROUPS[1].color_index);
    const swatches = document.querySelectorAll(".subgroup-table .swatch");
    expect(swatches.length).toBe(SUBGROUPS.length);
    expect(swatches[1].getAttribute("data-color")).toBe(expected);

    const perfDot = document.querySelector('.perf-dot[data-subgroup="1"]')!;
    expect(perfDot.getAttribute("fill")).toBe(expected);

    const km = document.querySelector('.km-line[data-subgroup="1"]')!;
    expect(km.getAttribute("stroke")).toBe(expected);

    const fairDot = document.querySelector('.fair-dot[data-subgroup="1"]')!;
    expect(fairDot.getAttribute("fill")).toBe(expected);

    const chip = document.querySelector(".explain-chip")!;
    expect(chip.getAttribute("data-color")).toBe(expected);
    expect(chip.textContent).toBe(SUBGROUPS[1].label);

    const trend = document.querySelector('.trend-line[data-selected="1"]')!;
    expect(trend.getAttribute("stroke")).toBe(expected);

    // the other subgroup keeps its own color everywhere it appears
    const other = subgroupColor(SUBGROUPS[0].color_index);
    expect(swatches[0].getAttribute("data-color")).toBe(other);
    expect(document.querySelector('.km-line[data-subgroup="0"]')!.getAttribute("stroke")).toBe(other);
  });

  it("greys the non-selected subgroups in the trends panel", async () => {
    const { app } = await bootApp("g=sex");
    await app.select(0);
    const lines = document.querySelectorAll(".trend-line");
    expect(lines.length).toBe(SUBGROUPS.length);
    for (const line of lines) {
      if (line.getAttribute("data-selected") === "1") continue;
      expect(line.getAttribute("stroke")).toBe("#c8c8c8");
    }
  });
});

describe("explanations", () => {
  it("renders a jittered beeswarm dot per patient and feature", async () => {
    const { app } = await bootApp("g=sex");
    await app.select(0);
    // 5 fake patients, 2 features
    expect(document.querySelectorAll(".swarm-dot").length).toBe(10);
    const first = document.querySelector('.swarm-dot[data-row="0"]')!;
    expect(first.getAttribute("cy")).not.toBeNull();
  });

  it("clears the panel when the selection is dropped", async () => {
    const { app } = await bootApp("g=sex&sel=0");
    expect(document.querySelectorAll(".swarm-dot").length).toBe(10);
    await app.select(null);
    expect(document.querySelectorAll(".swarm-dot").length).toBe(0);
    expect(document.querySelector(".explain .hint")).not.toBeNull();
  });
});

describe("cohort gate", () => {
  it("asks for a cohort when the server has none, then proceeds", async () => {
    const { server } = await bootApp("", { hasCohort: false });
    const box = document.querySelector<HTMLElement>(".cohort")!;
    expect(box.hidden).toBe(false);

    const csv = document.querySelector<HTMLInputElement>(".csv-path")!;
    csv.value = "/data/cohort.csv";
    document.querySelector<HTMLButtonElement>(".cohort button")!.click();
    await new Promise((r) => setTimeout(r, 0));

    expect(server.calls.cohort).toBe(1);
    expect(box.hidden).toBe(true);
    expect(document.querySelectorAll(".var-row").length).toBeGreaterThan(0);
  });
});
