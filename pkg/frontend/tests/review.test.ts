/**
 * Review-queue round trip against the recorded API contract: submitting a
 * verdict makes the card disappear from the queue and show up in the
 * target's tag history, all through POST /validations.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { renderReviewQueue } from "../src/render/review.js";
import { initialState, removePending, setPending, type ViewState } from "../src/state.js";
import type { MemberRec, ReviewQueue, TagRec, ValidationRec } from "../src/types.js";
import { fixture } from "./fixtures.js";

const SENIOR: MemberRec = {
  id: "mem-senior", name: "C. Mendes", role: "senior researcher",
  seniority: "senior", responsibilities: [],
};

/** Tiny in-memory stand-in implementing the recorded API behavior. */
class FakeService {
  pending: TagRec[];
  histories = new Map<string, object[]>();
  posted: ValidationRec[] = [];

  constructor(queue: ReviewQueue) {
    this.pending = [...queue.pending];
  }

  fetch = async (url: string, init?: RequestInit) => {
    const { pathname, searchParams } = new URL(url);
    if (pathname === "/validations" && init?.method === "POST") {
      const body = JSON.parse(String(init.body));
      const history = this.histories.get(body.target) ?? [];
      if (body.expected_seq !== null && body.expected_seq !== history.length) {
        return this.respond(409, {
          status: "error",
          error: { code: "STALE_HISTORY", message: "history moved" },
        });
      }
      const record: ValidationRec = {
        id: `val-${this.posted.length + 1}`,
        target: body.target,
        validator: body.member_id,
        verdict: body.verdict,
        comment: body.comment,
        created_at: "2024-06-01T00:00:00.000000Z",
      };
      this.posted.push(record);
      this.histories.set(body.target, [...history, { ...record, entry_kind: "validation" }]);
      this.pending = this.pending.filter((t) => t.id !== body.target);
      return this.respond(201, { status: "ok", data: record });
    }
    if (pathname === "/review-queue") {
      return this.respond(200, {
        status: "ok",
        data: { total: this.pending.length, pending: this.pending },
      });
    }
    const history = pathname.match(/^\/tags\/(.+)\/history$/);
    if (history) {
      const entries = this.histories.get(history[1]) ?? [];
      return this.respond(200, { status: "ok", data: { seq: entries.length, entries } });
    }
    searchParams; // unused routes are a test bug
    return this.respond(404, {
      status: "error",
      error: { code: "UNKNOWN_RECORD", message: pathname },
    });
  };

  private respond(status: number, payload: unknown) {
    return { status, json: async () => payload };
  }
}

describe("review queue round trip", () => {
  let service: FakeService;
  let api: ApiClient;
  let state: ViewState;

  beforeEach(() => {
    service = new FakeService(fixture<ReviewQueue>("review_queue"));
    api = new ApiClient("http://test", service.fetch);
    state = initialState();
  });

  it("verdict submit removes the card and lands in tag history", async () => {
    const queue = await api.reviewQueue("exp-x");
    state = setPending(state, queue.pending, queue.total);
    const before = state.pendingReview.length;
    const target = state.pendingReview[0];

    const history = await api.history(target.id);
    await api.postValidation(target.id, SENIOR.id, "accepted", "", history.seq);
    state = removePending(state, target.id);

    expect(state.pendingReview.map((t) => t.id)).not.toContain(target.id);
    expect(state.pendingReview.length).toBe(before - 1);

    const refreshed = await api.reviewQueue("exp-x");
    expect(refreshed.pending.map((t) => t.id)).not.toContain(target.id);

    const after = await api.history(target.id);
    expect(after.seq).toBe(history.seq + 1);
    expect(after.entries.at(-1)).toMatchObject({
      entry_kind: "validation",
      verdict: "accepted",
      validator: SENIOR.id,
    });
  });

  it("stale seq surfaces as a 409 ApiError", async () => {
    const queue = await api.reviewQueue("exp-x");
    const target = queue.pending[0];
    await expect(
      api.postValidation(target.id, SENIOR.id, "accepted", "", 99),
    ).rejects.toMatchObject({ code: "STALE_HISTORY", status: 409 });
  });

  it("cards render oldest first with senior-enabled buttons", () => {
    const queue = fixture<ReviewQueue>("review_queue");
    const markup = renderReviewQueue(queue.pending, SENIOR, queue.total);
    const order = [...markup.matchAll(/data-tag="([^"]+)"/g)].map((m) => m[1]);
    expect(order).toEqual(queue.pending.map((t) => t.id));
    expect(markup).not.toContain("disabled");
  });

  it("verdict buttons are disabled until a member is selected", () => {
    const queue = fixture<ReviewQueue>("review_queue");
    const markup = renderReviewQueue(queue.pending, null, queue.total);
    expect(markup).toContain("disabled");
    expect(markup).toContain("Select a team member");
  });

  it("error envelopes become typed ApiErrors", async () => {
    const failure = api.signal("rel-not-routed").catch((err) => err);
    const err = await failure;
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
  });
});
