/**
 * Wire types for the curation API.
 *
 * The service emits canonical JSON: every float is a 17-significant-digit
 * decimal *string*. Fields that are semantically numeric are typed as
 * `Decimal` here and parsed only for presentation (scaling, axis math);
 * the raw strings are what the UI treats as the values of record.
 */

export type Decimal = string | number;

export interface Envelope<T> {
  status: "ok" | "error";
  data?: T;
  error?: { code: string; message: string };
}

export interface MemberRec {
  id: string;
  name: string;
  role: string;
  seniority: "junior" | "senior";
  responsibilities: string[];
}

export interface ExperimentRec {
  id: string;
  name: string;
  research_question: string;
  date: string;
  team: MemberRec[];
  cycle: number;
  status: "draft" | "active" | "published";
}

export interface ItemRec {
  id: string;
  release_id: string;
  ordinal: number;
  external_id?: string;
  payload: unknown;
}

export interface ItemView {
  item: ItemRec;
  cells: Record<string, string>;
  text: string;
}

export interface ItemsPage {
  total: number;
  items: ItemView[];
}

export interface TagRec {
  id: string;
  target: string;
  label: string;
  origin: "algorithmic" | "user";
  author: string;
  experiment_id: string;
  created_at: string;
  confidence?: Decimal;
}

export interface ValidationRec {
  id: string;
  target: string;
  validator: string;
  verdict: "accepted" | "rejected";
  comment: string;
  created_at: string;
}

export interface HistoryEntry extends Partial<TagRec & ValidationRec> {
  entry_kind: "tag" | "validation";
  id: string;
  created_at: string;
}

export interface History {
  seq: number;
  entries: HistoryEntry[];
}

export interface ReviewQueue {
  total: number;
  pending: TagRec[];
}

export interface HistogramData {
  edges: Decimal[];
  counts: number[];
  flagged: string[];
}

export interface AgreementData {
  n: number;
  percent_agreement: Decimal;
  kappa: Decimal;
  labels: string[];
  confusion: number[][];
  items: string[];
}

export interface AnnotatorRow {
  author: string;
  name: string;
  seniority: string;
  tags: number;
}

export interface SignalData {
  station_id: string;
  channel_id: string;
  axis: string;
  sample_rate_hz: Decimal;
  samples: Decimal[];
  trigger_intervals: [number, number][];
}

/** Parse a canonical decimal string for geometry/scaling only. */
export function num(value: Decimal): number {
  return typeof value === "number" ? value : parseFloat(value);
}
