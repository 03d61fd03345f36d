/** One palette for the whole page, indexed by the engine's color_index so a
 * subgroup keeps its color in every view. */
export const PALETTE = [
  "#4e79a7",
  "#f28e2b",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc948",
  "#b07aa1",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
];

export function subgroupColor(colorIndex: number): string {
  const n = PALETTE.length;
  return PALETTE[((colorIndex % n) + n) % n];
}

const SHAP_STOPS: [number, number, number][] = [
  [33, 102, 172],
  [247, 247, 247],
  [178, 24, 43],
];

/** Blue through pale to red over a normalized feature value in [0, 1]. */
export function shapColor(t: number): string {
  const x = Math.min(1, Math.max(0, t));
  const seg = x < 0.5 ? 0 : 1;
  const u = (x - seg * 0.5) * 2;
  const a = SHAP_STOPS[seg];
  const b = SHAP_STOPS[seg + 1];
  const mix = (i: number) => Math.round(a[i] + (b[i] - a[i]) * u);
  return `rgb(${mix(0)}, ${mix(1)}, ${mix(2)})`;
}

export const GREY = "#c8c8c8";
