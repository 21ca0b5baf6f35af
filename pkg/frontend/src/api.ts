/** Thin typed client over the HTTP API; the only way the UI touches data. */

import type {
  AgreementData,
  AnnotatorRow,
  Envelope,
  ExperimentRec,
  HistogramData,
  History,
  ItemsPage,
  ReviewQueue,
  SignalData,
  TagRec,
  ValidationRec,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<{
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(
    public code: string,
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async unwrap<T>(response: { status: number; json(): Promise<unknown> }): Promise<T> {
    const body = (await response.json()) as Envelope<T>;
    if (body.status === "error" || body.error) {
      const err = body.error ?? { code: "UNKNOWN", message: "unknown error" };
      throw new ApiError(err.code, err.message, response.status);
    }
    return body.data as T;
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchImpl(this.baseUrl + path).then((r) => this.unwrap<T>(r));
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    }).then((r) => this.unwrap<T>(r));
  }

  experiments(): Promise<ExperimentRec[]> {
    return this.get("/experiments");
  }

  items(scope: { release?: string; experiment?: string }, filter?: object,
        offset = 0, limit = 100): Promise<ItemsPage> {
    const params = new URLSearchParams();
    if (scope.release) params.set("release", scope.release);
    if (scope.experiment) params.set("experiment", scope.experiment);
    if (filter) params.set("filter", JSON.stringify(filter));
    params.set("offset", String(offset));
    params.set("limit", String(limit));
    return this.get(`/items?${params}`);
  }

  postTag(itemId: string, label: string, memberId: string, experimentId: string): Promise<TagRec> {
    return this.post("/tags", {
      item_id: itemId,
      label,
      member_id: memberId,
      experiment_id: experimentId,
    });
  }

  postValidation(target: string, memberId: string, verdict: "accepted" | "rejected",
                 comment = "", expectedSeq?: number): Promise<ValidationRec> {
    return this.post("/validations", {
      target,
      member_id: memberId,
      verdict,
      comment,
      expected_seq: expectedSeq ?? null,
    });
  }

  history(target: string): Promise<History> {
    return this.get(`/tags/${target}/history`);
  }

  reviewQueue(experimentId: string, offset = 0, limit = 100): Promise<ReviewQueue> {
    return this.get(`/review-queue?experiment=${experimentId}&offset=${offset}&limit=${limit}`);
  }

  histogram(experimentId: string, author?: string): Promise<HistogramData> {
    const extra = author ? `&author=${encodeURIComponent(author)}` : "";
    return this.get(`/analytics/confidence-histogram?experiment=${experimentId}${extra}`);
  }

  agreement(experimentId: string, a: string, b: string): Promise<AgreementData> {
    return this.get(
      `/analytics/agreement?experiment=${experimentId}` +
        `&a=${encodeURIComponent(a)}&b=${encodeURIComponent(b)}`,
    );
  }

  tagsByAnnotator(experimentId: string): Promise<AnnotatorRow[]> {
    return this.get(`/analytics/tags-by-annotator?experiment=${experimentId}`);
  }

  signal(releaseId: string): Promise<SignalData> {
    return this.get(`/releases/${releaseId}/signal`);
  }
}
