/** Review queue: pending tags oldest-first, verdict buttons senior-gated. */

import { num, type MemberRec, type TagRec } from "../types.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderReviewCard(tag: TagRec, reviewer: MemberRec | null): string {
  const confidence =
    tag.confidence !== undefined
      ? `<span class="confidence" data-raw="${esc(String(tag.confidence))}">` +
        `conf ${num(tag.confidence).toFixed(2)}</span>`
      : "";
  const disabled = reviewer === null ? " disabled" : "";
  return (
    `<article class="review-card" data-tag="${esc(tag.id)}" data-target="${esc(tag.target)}">` +
    `<header><span class="label">${esc(tag.label)}</span> ${confidence}` +
    `<span class="author">${esc(tag.origin)} by ${esc(tag.author)}</span></header>` +
    `<footer>` +
    `<button class="accept" data-verdict="accepted"${disabled}>accept</button>` +
    `<button class="reject" data-verdict="rejected"${disabled}>reject</button>` +
    `</footer></article>`
  );
}

export function renderReviewQueue(pending: TagRec[], reviewer: MemberRec | null, total: number): string {
  if (pending.length === 0) {
    return `<section class="panel review-panel"><p class="empty">Review queue is empty.</p></section>`;
  }
  const note =
    reviewer === null
      ? `<p class="banner">Select a team member to record verdicts.</p>`
      : "";
  const cards = pending.map((t) => renderReviewCard(t, reviewer)).join("");
  return (
    `<section class="panel review-panel"><h3>Pending review (${total})</h3>` +
    `${note}<div class="cards">${cards}</div></section>`
  );
}

/** Experiment-publication controls are senior-only; juniors see why. */
export function renderPublishControl(reviewer: MemberRec | null): string {
  if (reviewer !== null && reviewer.seniority === "senior") {
    return `<button class="publish">publish experiment</button>`;
  }
  return (
    `<button class="publish" disabled ` +
    `title="publish-level validation needs a senior member">publish experiment</button>`
  );
}
