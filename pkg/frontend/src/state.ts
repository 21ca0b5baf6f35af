/** Client view state; domain data only ever lives in API responses. */

import type { ExperimentRec, MemberRec, TagRec } from "./types.js";

export interface ViewState {
  experiments: ExperimentRec[];
  currentExperiment: ExperimentRec | null;
  reviewer: MemberRec | null;
  selectedRelease: string | null;
  selectedItem: string | null;
  pendingReview: TagRec[];
  pendingTotal: number;
  activeFilter: object | null;
}

export function initialState(): ViewState {
  return {
    experiments: [],
    currentExperiment: null,
    reviewer: null,
    selectedRelease: null,
    selectedItem: null,
    pendingReview: [],
    pendingTotal: 0,
    activeFilter: null,
  };
}

export function selectExperiment(state: ViewState, experimentId: string): ViewState {
  const found = state.experiments.find((e) => e.id === experimentId) ?? null;
  return {
    ...state,
    currentExperiment: found,
    reviewer: null,
    pendingReview: [],
    pendingTotal: 0,
    selectedItem: null,
  };
}

export function selectReviewer(state: ViewState, memberId: string): ViewState {
  const reviewer =
    state.currentExperiment?.team.find((m) => m.id === memberId) ?? null;
  return { ...state, reviewer };
}

/** A submitted verdict removes its card immediately (optimistic update). */
export function removePending(state: ViewState, tagId: string): ViewState {
  const remaining = state.pendingReview.filter((t) => t.id !== tagId);
  const removed = remaining.length !== state.pendingReview.length;
  return {
    ...state,
    pendingReview: remaining,
    pendingTotal: removed ? state.pendingTotal - 1 : state.pendingTotal,
  };
}

export function setPending(state: ViewState, pending: TagRec[], total: number): ViewState {
  return { ...state, pendingReview: pending, pendingTotal: total };
}
