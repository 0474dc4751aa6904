// Minimal canvas strip charts for the objective and gradient-norm
// histories. The plot is a decimated view; the raw buffer stays authoritative.

import type { HistoryPoint } from "./viewstate.js";

export interface SeriesSpec {
  label: string;
  value: (p: HistoryPoint) => number | null;
  logScale: boolean;
  color: string;
}

export const PI_SERIES: SeriesSpec = {
  label: "objective",
  value: (p) => p.pi,
  logScale: false,
  color: "#c0392b",
};

export const GRAD_SERIES: SeriesSpec = {
  label: "|gradient|",
  value: (p) => (p.gradNorm > 0 ? p.gradNorm : null),
  logScale: true,
  color: "#2471a3",
};

export function drawSeries(
  canvas: HTMLCanvasElement,
  points: HistoryPoint[],
  spec: SeriesSpec,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#d5d8dc";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);

  const data: { step: number; v: number }[] = [];
  for (const p of points) {
    const raw = spec.value(p);
    if (raw === null) continue;
    data.push({ step: p.step, v: spec.logScale ? Math.log10(raw) : raw });
  }
  ctx.fillStyle = "#566573";
  ctx.font = "11px sans-serif";
  ctx.fillText(spec.label + (spec.logScale ? " (log)" : ""), 6, 13);
  if (data.length < 2) return;

  let lo = Infinity;
  let hi = -Infinity;
  for (const d of data) {
    lo = Math.min(lo, d.v);
    hi = Math.max(hi, d.v);
  }
  if (hi - lo < 1e-12) {
    lo -= 1;
    hi += 1;
  }
  const s0 = data[0].step;
  const s1 = data[data.length - 1].step;
  const sx = (step: number) => 4 + ((step - s0) / Math.max(1, s1 - s0)) * (width - 8);
  const sy = (v: number) => height - 6 - ((v - lo) / (hi - lo)) * (height - 24);

  ctx.strokeStyle = spec.color;
  ctx.lineWidth = 1.2;
  ctx.beginPath();
  data.forEach((d, i) => {
    if (i === 0) ctx.moveTo(sx(d.step), sy(d.v));
    else ctx.lineTo(sx(d.step), sy(d.v));
  });
  ctx.stroke();

  ctx.fillText(formatTick(hi, spec.logScale), width - 64, 13);
  ctx.fillText(formatTick(lo, spec.logScale), width - 64, height - 4);
}

function formatTick(v: number, log: boolean): string {
  const value = log ? Math.pow(10, v) : v;
  return value.toPrecision(3);
}
