/**
 * Chart renderers produce plain SVG/HTML markup strings. They do no
 * arithmetic on domain values beyond scaling to pixels; every displayed
 * number is the API's value verbatim (raw canonical string preserved in
 * data-raw attributes and labels).
 */

import { downsampleMinMax } from "../downsample.js";
import { num, type Decimal } from "../types.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function barChart(
  labels: string[],
  counts: number[],
  opts: { width?: number; height?: number; title?: string } = {},
): string {
  const width = opts.width ?? 420;
  const height = opts.height ?? 180;
  const pad = 28;
  const top = Math.max(...counts, 1);
  const barWidth = (width - 2 * pad) / counts.length;
  const bars = counts
    .map((count, i) => {
      const h = ((height - 2 * pad) * count) / top;
      const x = pad + i * barWidth;
      const y = height - pad - h;
      return (
        `<rect class="bar" data-count="${count}" x="${x.toFixed(1)}" y="${y.toFixed(1)}"` +
        ` width="${(barWidth * 0.82).toFixed(1)}" height="${h.toFixed(1)}"></rect>` +
        `<text class="bar-count" x="${(x + barWidth * 0.41).toFixed(1)}" y="${(y - 4).toFixed(1)}"` +
        ` text-anchor="middle">${count}</text>` +
        `<text class="bar-label" x="${(x + barWidth * 0.41).toFixed(1)}" y="${height - pad + 14}"` +
        ` text-anchor="middle">${esc(labels[i])}</text>`
      );
    })
    .join("");
  const title = opts.title ? `<title>${esc(opts.title)}</title>` : "";
  return `<svg class="bar-chart" viewBox="0 0 ${width} ${height}" role="img">${title}${bars}</svg>`;
}

export function histogramBinLabels(edges: Decimal[]): string[] {
  const labels: string[] = [];
  for (let i = 0; i + 1 < edges.length; i++) {
    const open = i + 2 === edges.length ? "]" : ")";
    labels.push(`[${num(edges[i])}, ${num(edges[i + 1])}${open}`);
  }
  return labels;
}

export function confusionTable(labels: string[], confusion: number[][]): string {
  const head = labels.map((l) => `<th scope="col">${esc(l)}</th>`).join("");
  const rows = confusion
    .map((row, i) => {
      const cells = row
        .map((count, j) => {
          const cls = i === j ? "diag" : "off";
          return `<td class="${cls}" data-count="${count}">${count}</td>`;
        })
        .join("");
      return `<tr><th scope="row">${esc(labels[i])}</th>${cells}</tr>`;
    })
    .join("");
  return (
    `<table class="confusion"><thead><tr><th></th>${head}</tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function waveformPolyline(
  samples: Decimal[],
  triggers: [number, number][],
  opts: { width?: number; height?: number } = {},
): string {
  const width = opts.width ?? 760;
  const height = opts.height ?? 160;
  const values = samples.map(num);
  const points = downsampleMinMax(values);
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi - lo || 1;
  const sx = (x: number) => (x / Math.max(values.length - 1, 1)) * width;
  const sy = (y: number) => height - ((y - lo) / span) * height;
  const path = points.map((p) => `${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`).join(" ");
  const shading = triggers
    .map(
      ([s, e]) =>
        `<rect class="trigger" data-start="${s}" data-end="${e}" x="${sx(s).toFixed(1)}" y="0"` +
        ` width="${(sx(e) - sx(s)).toFixed(1)}" height="${height}"></rect>`,
    )
    .join("");
  return (
    `<svg class="waveform" viewBox="0 0 ${width} ${height}" data-samples="${values.length}"` +
    ` data-drawn="${points.length}">${shading}` +
    `<polyline fill="none" points="${path}"></polyline></svg>`
  );
}
