/**
 * Typed client for the /v1 API. Every displayed value in the UI comes out of
 * one of these calls — the client performs no filtering, sorting, or
 * matching of its own.
 */

import type {
  ArticleInfo,
  ArticleProfile,
  JobInfo,
  KeychainInfo,
  PatternEntry,
  QueueRow,
  ReportInfo,
  RowStatus,
} from "./types.js";
import { filterQuery, type ListFilter } from "./filters.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** A non-2xx response; message carries the service's error text. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function fail(response: Response): Promise<never> {
  let message = `${response.status}`;
  try {
    const body = (await response.json()) as { error?: string };
    if (body.error) {
      message = body.error;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    payload?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (payload !== undefined) {
      init.body = JSON.stringify(payload);
      init.headers = { "Content-Type": "application/json" };
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      await fail(response);
    }
    return (await response.json()) as T;
  }

  private async requestText(path: string): Promise<string> {
    const response = await this.fetchFn(this.baseUrl + path, { method: "GET" });
    if (!response.ok) {
      await fail(response);
    }
    return response.text();
  }

  // -- vocabulary ----------------------------------------------------------

  async listKeywords(filter: ListFilter): Promise<string[]> {
    const data = await this.request<{ keywords: string[] }>(
      "GET",
      `/v1/keywords${filterQuery(filter)}`,
    );
    return data.keywords;
  }

  async addKeyword(text: string): Promise<string> {
    const data = await this.request<{ keyword: string }>(
      "POST",
      "/v1/keywords",
      { text },
    );
    return data.keyword;
  }

  async listKeychains(filter: ListFilter): Promise<KeychainInfo[]> {
    const data = await this.request<{ keychains: KeychainInfo[] }>(
      "GET",
      `/v1/keychains${filterQuery(filter)}`,
    );
    return data.keychains;
  }

  async addKeychain(keywords: string[]): Promise<KeychainInfo> {
    const data = await this.request<{ keychain: KeychainInfo }>(
      "POST",
      "/v1/keychains",
      { keywords },
    );
    return data.keychain;
  }

  // -- patterns --------------------------------------------------------------

  async listPatterns(filter: ListFilter): Promise<PatternEntry[]> {
    const data = await this.request<{ patterns: PatternEntry[] }>(
      "GET",
      `/v1/patterns${filterQuery(filter)}`,
    );
    return data.patterns;
  }

  async addPattern(
    pattern: string,
    keys: string[],
    note?: string,
  ): Promise<PatternEntry> {
    const data = await this.request<{ pattern: PatternEntry }>(
      "POST",
      "/v1/patterns",
      { pattern, keys, note: note || null },
    );
    return data.pattern;
  }

  async replacePattern(
    id: string,
    pattern: string,
    keys: string[],
    note?: string,
  ): Promise<PatternEntry> {
    const data = await this.request<{ pattern: PatternEntry }>(
      "PUT",
      `/v1/patterns/${encodeURIComponent(id)}`,
      { pattern, keys, note: note || null },
    );
    return data.pattern;
  }

  async deletePattern(id: string): Promise<void> {
    await this.request<{ pattern: unknown }>(
      "DELETE",
      `/v1/patterns/${encodeURIComponent(id)}`,
    );
  }

  // -- articles --------------------------------------------------------------

  async listArticles(): Promise<ArticleInfo[]> {
    const data = await this.request<{ articles: ArticleInfo[] }>(
      "GET",
      "/v1/articles",
    );
    return data.articles;
  }

  async uploadArticle(
    sourceId: string,
    texSource: string,
    profile?: Partial<ArticleProfile>,
  ): Promise<ArticleInfo> {
    const data = await this.request<{ article: ArticleInfo }>(
      "POST",
      "/v1/articles",
      { source_id: sourceId, tex_source: texSource, profile },
    );
    return data.article;
  }

  async updateProfile(
    sourceId: string,
    profile: Partial<ArticleProfile>,
  ): Promise<ArticleInfo> {
    const data = await this.request<{ article: ArticleInfo }>(
      "PATCH",
      `/v1/articles/${sourceId}`,
      { profile },
    );
    return data.article;
  }

  // -- queue and jobs ----------------------------------------------------------

  async queue(): Promise<QueueRow[]> {
    const data = await this.request<{ pending: QueueRow[] }>(
      "GET",
      "/v1/queue",
    );
    return data.pending;
  }

  async enqueue(sourceId: string, pointers: string[]): Promise<boolean> {
    const data = await this.request<{ queued: boolean }>(
      "POST",
      `/v1/queue/${sourceId}`,
      { pointers },
    );
    return data.queued;
  }

  async runQueue(): Promise<string> {
    const data = await this.request<{ job_id: string }>(
      "POST",
      "/v1/queue/run",
      {},
    );
    return data.job_id;
  }

  async job(jobId: string): Promise<JobInfo> {
    const data = await this.request<{ job: JobInfo }>(
      "GET",
      `/v1/jobs/${encodeURIComponent(jobId)}`,
    );
    return data.job;
  }

  // -- reports --------------------------------------------------------------

  async report(sourceId: string): Promise<ReportInfo> {
    const data = await this.request<{ report: ReportInfo }>(
      "GET",
      `/v1/reports/${sourceId}`,
    );
    return data.report;
  }

  /** Canonical text rendering — the downloadable file. */
  async reportText(sourceId: string, includeRejected = false): Promise<string> {
    const suffix = includeRejected ? "&include_rejected=1" : "";
    return this.requestText(`/v1/reports/${sourceId}?format=text${suffix}`);
  }

  async correctReport(
    sourceId: string,
    keychain: string,
    status: RowStatus,
  ): Promise<ReportInfo> {
    const data = await this.request<{ report: ReportInfo }>(
      "PATCH",
      `/v1/reports/${sourceId}`,
      { keychain, status },
    );
    return data.report;
  }
}
