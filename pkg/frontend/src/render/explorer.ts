/**
 * Explorer panels: query results, confidence histogram with review flags,
 * human-vs-machine agreement, tags by annotator. Every figure shown comes
 * straight from an API response.
 */

import { barChart, confusionTable, histogramBinLabels } from "./charts.js";
import {
  num,
  type AgreementData,
  type AnnotatorRow,
  type HistogramData,
  type ItemsPage,
} from "../types.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderHistogramPanel(data: HistogramData): string {
  const labels = histogramBinLabels(data.edges);
  const chart = barChart(labels, data.counts, { title: "tag confidence" });
  const flagged = data.flagged
    .map((id) => `<li class="flagged-item" data-item="${esc(id)}">${esc(id)}</li>`)
    .join("");
  return (
    `<section class="panel histogram-panel">` +
    `<h3>Model confidence</h3>${chart}` +
    `<details class="flagged"><summary>${data.flagged.length} below the review threshold</summary>` +
    `<ul>${flagged}</ul></details></section>`
  );
}

export function renderAgreementPanel(data: AgreementData): string {
  const raw = String(data.percent_agreement);
  const headline = `${(num(data.percent_agreement) * 100).toFixed(1)}%`;
  const kappaRaw = String(data.kappa);
  return (
    `<section class="panel agreement-panel">` +
    `<h3>Human vs machine</h3>` +
    `<p class="headline"><strong class="percent" data-raw="${esc(raw)}">${headline}</strong>` +
    ` agreement over ${data.n} items` +
    ` <span class="kappa" data-raw="${esc(kappaRaw)}">(kappa ${num(data.kappa).toFixed(3)})</span></p>` +
    confusionTable(data.labels, data.confusion) +
    `</section>`
  );
}

export function renderAnnotatorPanel(rows: AnnotatorRow[]): string {
  const chart = barChart(
    rows.map((r) => r.name),
    rows.map((r) => r.tags),
    { title: "tags by annotator" },
  );
  const legend = rows
    .map(
      (r) =>
        `<li data-author="${esc(r.author)}">${esc(r.name)} (${esc(r.seniority)}): ` +
        `<span class="count">${r.tags}</span></li>`,
    )
    .join("");
  return (
    `<section class="panel annotator-panel"><h3>Tags by annotator</h3>` +
    `${chart}<ul class="legend">${legend}</ul></section>`
  );
}

export function renderItemsTable(page: ItemsPage): string {
  if (page.items.length === 0) {
    return `<section class="panel empty-state"><p>No items match the current filter.</p></section>`;
  }
  const columns = Object.keys(page.items[0].cells);
  const head = ["item", ...columns].map((c) => `<th>${esc(c)}</th>`).join("");
  const rows = page.items
    .map((view) => {
      const cells = columns.map((c) => `<td>${esc(view.cells[c] ?? "")}</td>`).join("");
      const label = view.item.external_id ?? `#${view.item.ordinal}`;
      return `<tr data-item="${esc(view.item.id)}"><td>${esc(label)}</td>${cells}</tr>`;
    })
    .join("");
  return (
    `<section class="panel items-panel">` +
    `<p class="total">${page.total} matching items (showing ${page.items.length})</p>` +
    `<table class="items"><thead><tr>${head}</tr></thead><tbody>${rows}</tbody></table>` +
    `</section>`
  );
}
