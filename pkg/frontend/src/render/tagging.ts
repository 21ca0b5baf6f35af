/**
 * Tagging view: the item's content (waveform, photo reference, or text)
 * plus the label form. Clicking on a waveform sets the P/S pick fields.
 */

import { waveformPolyline } from "./charts.js";
import type { ItemView, SignalData } from "../types.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderSignalItem(signal: SignalData): string {
  return (
    `<section class="panel tagging-panel signal">` +
    `<h3>${esc(signal.station_id)} / ${esc(signal.channel_id)} (${esc(signal.axis)})</h3>` +
    waveformPolyline(signal.samples, signal.trigger_intervals) +
    `<div class="picks">` +
    `<label>P pick <input name="p_pick" class="p-pick" readonly></label>` +
    `<label>S pick <input name="s_pick" class="s-pick" readonly></label>` +
    `</div></section>`
  );
}

export function renderMediaItem(view: ItemView): string {
  const url = view.cells["url"] ?? view.cells["media_url"] ?? "";
  const caption = view.cells["caption"] ?? "";
  return (
    `<section class="panel tagging-panel media">` +
    `<figure><img src="${esc(url)}" alt="${esc(caption)}">` +
    `<figcaption>${esc(caption)}</figcaption></figure></section>`
  );
}

export function renderTextItem(view: ItemView): string {
  return (
    `<section class="panel tagging-panel text"><blockquote>${esc(view.text)}</blockquote></section>`
  );
}

export function renderTagForm(labels: string[]): string {
  const options = labels.map((l) => `<option value="${esc(l)}">${esc(l)}</option>`).join("");
  return (
    `<form class="tag-form">` +
    `<select name="label">${options}</select>` +
    `<button type="submit">tag</button>` +
    `<span class="form-status" role="status"></span>` +
    `</form>`
  );
}

export function renderPermissionBanner(message: string): string {
  return `<p class="banner permission">${esc(message)}</p>`;
}

export function renderStalePrompt(): string {
  return `<p class="banner stale">This item changed on the server; refresh the queue.</p>`;
}
