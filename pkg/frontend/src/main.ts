/** App shell: experiment/member selectors and the three workbench views. */

import { ApiClient, ApiError } from "./api.js";
import { baseUrl } from "./config.js";
import {
  renderAgreementPanel,
  renderAnnotatorPanel,
  renderHistogramPanel,
  renderItemsTable,
} from "./render/explorer.js";
import { renderPublishControl, renderReviewQueue } from "./render/review.js";
import {
  renderMediaItem,
  renderPermissionBanner,
  renderSignalItem,
  renderStalePrompt,
  renderTagForm,
  renderTextItem,
} from "./render/tagging.js";
import {
  initialState,
  removePending,
  selectExperiment,
  selectReviewer,
  setPending,
  type ViewState,
} from "./state.js";

const api = new ApiClient(baseUrl());
let state: ViewState = initialState();

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function showError(err: unknown) {
  const box = el("errors");
  if (err instanceof ApiError) {
    if (err.code === "SENIOR_REQUIRED" || err.code === "NOT_TEAM_MEMBER") {
      box.innerHTML = renderPermissionBanner(err.message);
      return;
    }
    if (err.code === "STALE_HISTORY") {
      box.innerHTML = renderStalePrompt();
      void refreshReview();
      return;
    }
    box.innerHTML = renderPermissionBanner(`${err.code}: ${err.message}`);
    return;
  }
  box.innerHTML = renderPermissionBanner(String(err));
}

async function boot() {
  state = { ...state, experiments: await api.experiments() };
  const select = el("experiment-select") as HTMLSelectElement;
  select.innerHTML = state.experiments
    .map((e) => `<option value="${e.id}">${e.name}</option>`)
    .join("");
  select.addEventListener("change", () => void pickExperiment(select.value));
  await pickExperiment(state.experiments[0]?.id ?? "");
}

async function pickExperiment(experimentId: string) {
  state = selectExperiment(state, experimentId);
  const exp = state.currentExperiment;
  const members = el("member-select") as HTMLSelectElement;
  members.innerHTML =
    `<option value="">(viewer)</option>` +
    (exp?.team ?? [])
      .map((m) => `<option value="${m.id}">${m.name} (${m.seniority})</option>`)
      .join("");
  members.onchange = () => {
    state = selectReviewer(state, members.value);
    void refreshReview();
  };
  el("question").textContent = exp?.research_question ?? "";
  await Promise.all([refreshExplorer(), refreshReview()]);
}

async function refreshExplorer() {
  const exp = state.currentExperiment;
  if (!exp) return;
  const panels: string[] = [];
  try {
    panels.push(renderHistogramPanel(await api.histogram(exp.id)));
  } catch {
    /* not every experiment has scored tags */
  }
  try {
    const annotators = await api.tagsByAnnotator(exp.id);
    if (annotators.length >= 2) {
      const machines = annotators.filter((r) => r.seniority === "tool");
      const humans = annotators.filter((r) => r.seniority !== "tool");
      if (machines.length && humans.length) {
        panels.push(
          renderAgreementPanel(
            await api.agreement(exp.id, humans[0].author, machines[0].author),
          ),
        );
      }
      panels.push(renderAnnotatorPanel(annotators));
    }
  } catch {
    /* agreement needs overlapping vectors; skip when absent */
  }
  try {
    const page = await api.items(
      { experiment: exp.id },
      state.activeFilter ?? undefined,
      0,
      25,
    );
    panels.push(renderItemsTable(page));
  } catch (err) {
    showError(err);
  }
  el("explorer").innerHTML = panels.join("");
}

async function refreshReview() {
  const exp = state.currentExperiment;
  if (!exp) return;
  const queue = await api.reviewQueue(exp.id);
  state = setPending(state, queue.pending, queue.total);
  const host = el("review");
  host.innerHTML =
    renderReviewQueue(state.pendingReview, state.reviewer, state.pendingTotal) +
    renderPublishControl(state.reviewer);
  host.querySelectorAll<HTMLButtonElement>(".review-card button").forEach((button) => {
    button.addEventListener("click", () => void submitVerdict(button));
  });
}

async function submitVerdict(button: HTMLButtonElement) {
  const card = button.closest(".review-card") as HTMLElement;
  const tagId = card.dataset.tag!;
  const verdict = button.dataset.verdict as "accepted" | "rejected";
  if (!state.reviewer) return;
  try {
    const history = await api.history(tagId);
    await api.postValidation(tagId, state.reviewer.id, verdict, "", history.seq);
    state = removePending(state, tagId);
    card.remove();
  } catch (err) {
    showError(err);
  }
}

el("filter-form").addEventListener("submit", (event) => {
  event.preventDefault();
  const raw = (el("filter-input") as HTMLInputElement).value.trim();
  try {
    state = { ...state, activeFilter: raw ? JSON.parse(raw) : null };
    el("errors").innerHTML = "";
    void refreshExplorer();
  } catch (err) {
    showError(err);
  }
});

export async function showSignal(releaseId: string) {
  const signal = await api.signal(releaseId);
  const host = el("tagging");
  host.innerHTML = renderSignalItem(signal) + renderTagForm(["natural", "anthropogenic"]);
  const svg = host.querySelector<SVGSVGElement>("svg.waveform");
  // clicking the waveform fills the P pick, then the S pick
  svg?.addEventListener("click", (event) => {
    const box = svg.getBoundingClientRect();
    const fraction = (event.clientX - box.left) / box.width;
    const sample = Math.round(fraction * signal.samples.length);
    const p = host.querySelector<HTMLInputElement>(".p-pick")!;
    const s = host.querySelector<HTMLInputElement>(".s-pick")!;
    if (!p.value) {
      p.value = String(sample);
    } else {
      s.value = String(sample);
    }
  });
  wireTagForm(host);
}

export function showMedia(view: Parameters<typeof renderMediaItem>[0]) {
  const host = el("tagging");
  host.innerHTML = renderMediaItem(view) + renderTagForm(["political", "non-political"]);
  wireTagForm(host, view.item.id);
}

export function showText(view: Parameters<typeof renderTextItem>[0]) {
  const host = el("tagging");
  host.innerHTML = renderTextItem(view) + renderTagForm(["relevant", "irrelevant"]);
  wireTagForm(host, view.item.id);
}

function wireTagForm(host: HTMLElement, itemId?: string) {
  const form = host.querySelector<HTMLFormElement>(".tag-form");
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const target = itemId ?? state.selectedItem;
    const exp = state.currentExperiment;
    if (!target || !exp || !state.reviewer) {
      showError(new ApiError("NOT_TEAM_MEMBER", "select an item and a team member first", 0));
      return;
    }
    const label = (form.querySelector("select[name=label]") as HTMLSelectElement).value;
    api
      .postTag(target, label, state.reviewer.id, exp.id)
      .then(() => {
        (form.querySelector(".form-status") as HTMLElement).textContent = "tagged";
        return refreshReview();
      })
      .catch(showError);
  });
}

void boot().catch(showError);
