/**
 * Payload shapes of the /v1 API, one interface per envelope value.
 *
 * These mirror the service's JSON exactly; the UI never reshapes them.
 */

/** The six addressable document parts, in canonical order. */
export const POINTERS = [
  "title",
  "abstract",
  "caption",
  "section",
  "conclusions",
  "full-text",
] as const;

export type Pointer = (typeof POINTERS)[number];

export interface KeychainInfo {
  rendering: string;
  keywords: string[];
}

export interface PatternEntry {
  id: string;
  pattern: string;
  alternatives: string[];
  keys: string[];
  note: string | null;
}

export interface ArticleProfile {
  slac_id: string | null;
  prefix: string | null;
}

export interface ArticleInfo {
  source_id: string;
  profile: ArticleProfile;
  uploaded_at: string;
  revision: number;
}

export interface QueueRow {
  source_id: string;
  pointers: string[];
}

export interface JobOutcome {
  source_id: string;
  ok: boolean;
  keychains?: number;
  error?: string;
}

export interface JobInfo {
  job_id: string;
  status: "running" | "done";
  outcomes: JobOutcome[];
  started_at: string;
  finished_at: string | null;
}

export type RowStatus = "auto" | "confirmed" | "rejected" | "manual";

export interface ReportRow {
  keychain: string;
  keywords: string[];
  sources: string[];
  status: RowStatus;
  manual: boolean;
  hits: number;
}

export interface ReportInfo {
  source_id: string;
  apd: string;
  pointers: string[];
  gap_bound: number;
  generated_at: string;
  assigned: ReportRow[];
}
