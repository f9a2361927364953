/**
 * Application state and actions for the four managers: keywords, keychains,
 * patterns, articles. The state is plain data rendered elsewhere; every
 * action that changes what is displayed goes through the service, keeping
 * the client thin. Service errors land in `state.error` without losing any
 * in-progress edits.
 */

import { ApiClient, ApiError } from "./api.js";
import { emptyFilter, filterQuery, type ListFilter } from "./filters.js";
import {
  appendKeyword,
  emptyDraft,
  moveKeyword,
  removeAt,
  rendering,
  type Draft,
} from "./draft.js";
import { optimisticCorrection } from "./optimistic.js";
import {
  POINTERS,
  type ArticleInfo,
  type JobInfo,
  type KeychainInfo,
  type PatternEntry,
  type Pointer,
  type QueueRow,
  type ReportInfo,
  type RowStatus,
} from "./types.js";

export type ManagerName = "keywords" | "keychains" | "patterns" | "articles";

export interface PatternForm {
  /** Entry being replaced, or null when composing a new one. */
  id: string | null;
  pattern: string;
  /** Keychains as typed: renderings separated by ";". */
  keys: string;
  note: string;
}

export interface UploadForm {
  sourceId: string;
  texSource: string;
}

export interface AppState {
  manager: ManagerName;
  error: string | null;
  notice: string | null;

  keywordFilter: ListFilter;
  keywords: string[];
  newKeyword: string;

  keychainFilter: ListFilter;
  keychains: KeychainInfo[];
  draft: Draft;

  patternFilter: ListFilter;
  patterns: PatternEntry[];
  patternForm: PatternForm;

  articles: ArticleInfo[];
  upload: UploadForm;
  enqueuePointers: Pointer[];
  queue: QueueRow[];
  job: JobInfo | null;
  report: ReportInfo | null;
  reportText: string | null;
}

export function initialState(): AppState {
  return {
    manager: "keywords",
    error: null,
    notice: null,
    keywordFilter: emptyFilter(),
    keywords: [],
    newKeyword: "",
    keychainFilter: emptyFilter(),
    keychains: [],
    draft: emptyDraft(),
    patternFilter: { ...emptyFilter(), keychains: [] },
    patterns: [],
    patternForm: { id: null, pattern: "", keys: "", note: "" },
    articles: [],
    upload: { sourceId: "", texSource: "" },
    enqueuePointers: ["title", "abstract"],
    queue: [],
    job: null,
    report: null,
    reportText: null,
  };
}

const sleep = (ms: number) => new Promise((done) => setTimeout(done, ms));

export class App {
  state: AppState = initialState();

  private listeners: Array<(state: AppState) => void> = [];
  private lastQuery: Partial<Record<"keywords" | "keychains" | "patterns", string>> =
    {};

  constructor(
    private readonly api: ApiClient,
    private readonly pollInterval = 300,
  ) {}

  subscribe(listener: (state: AppState) => void): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<AppState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  /** Run a service call; an ApiError becomes the inline banner. */
  private async guard<T>(work: () => Promise<T>): Promise<T | undefined> {
    try {
      const result = await work();
      this.update({ error: null });
      return result;
    } catch (err) {
      if (err instanceof ApiError) {
        this.update({ error: err.message });
        return undefined;
      }
      throw err;
    }
  }

  async selectManager(manager: ManagerName): Promise<void> {
    this.update({ manager, notice: null });
    if (manager === "keywords") await this.refreshKeywords(true);
    if (manager === "keychains") await this.refreshKeychains(true);
    if (manager === "patterns") await this.refreshPatterns(true);
    if (manager === "articles") {
      await this.refreshArticles();
      await this.refreshQueue();
    }
  }

  // -- keyword manager -----------------------------------------------------

  /**
   * Fetch the filtered keyword list. Skipped when the effective query is
   * unchanged — in particular, typing a prefix below the two-character
   * minimum never triggers a request.
   */
  async refreshKeywords(force = false): Promise<void> {
    const query = filterQuery(this.state.keywordFilter);
    if (!force && this.lastQuery.keywords === query) {
      return;
    }
    const keywords = await this.guard(() =>
      this.api.listKeywords(this.state.keywordFilter),
    );
    if (keywords !== undefined) {
      this.lastQuery.keywords = query;
      this.update({ keywords });
    }
  }

  async setKeywordLetter(letter: string | null): Promise<void> {
    this.update({ keywordFilter: { ...this.state.keywordFilter, letter } });
    await this.refreshKeywords();
  }

  async setKeywordPrefix(prefixInput: string): Promise<void> {
    this.update({ keywordFilter: { ...this.state.keywordFilter, prefixInput } });
    await this.refreshKeywords();
  }

  setNewKeyword(text: string): void {
    this.update({ newKeyword: text });
  }

  async addKeyword(): Promise<void> {
    const added = await this.guard(() =>
      this.api.addKeyword(this.state.newKeyword),
    );
    if (added !== undefined) {
      this.update({ newKeyword: "", notice: `added keyword "${added}"` });
      await this.refreshKeywords(true);
    }
  }

  /** Clicking a keyword in the filtered list appends it to the draft chain. */
  clickKeyword(keyword: string): void {
    this.update({ draft: appendKeyword(this.state.draft, keyword) });
  }

  // -- keychain manager ------------------------------------------------------

  async refreshKeychains(force = false): Promise<void> {
    const query = filterQuery(this.state.keychainFilter);
    if (!force && this.lastQuery.keychains === query) {
      return;
    }
    const keychains = await this.guard(() =>
      this.api.listKeychains(this.state.keychainFilter),
    );
    if (keychains !== undefined) {
      this.lastQuery.keychains = query;
      this.update({ keychains });
    }
  }

  async setKeychainPrefix(prefixInput: string): Promise<void> {
    this.update({
      keychainFilter: { ...this.state.keychainFilter, prefixInput },
    });
    await this.refreshKeychains();
  }

  moveDraftKeyword(index: number, delta: number): void {
    this.update({ draft: moveKeyword(this.state.draft, index, delta) });
  }

  removeDraftKeyword(index: number): void {
    this.update({ draft: removeAt(this.state.draft, index) });
  }

  async saveDraft(): Promise<void> {
    if (this.state.draft.keywords.length === 0) {
      this.update({ error: "the draft keychain is empty" });
      return;
    }
    const saved = await this.guard(() =>
      this.api.addKeychain(this.state.draft.keywords),
    );
    if (saved !== undefined) {
      this.update({
        draft: emptyDraft(),
        notice: `saved keychain "${saved.rendering}"`,
      });
      await this.refreshKeychains(true);
    }
  }

  draftRendering(): string {
    return rendering(this.state.draft);
  }

  // -- pattern manager -------------------------------------------------------

  async refreshPatterns(force = false): Promise<void> {
    const query = filterQuery(this.state.patternFilter);
    if (!force && this.lastQuery.patterns === query) {
      return;
    }
    const patterns = await this.guard(() =>
      this.api.listPatterns(this.state.patternFilter),
    );
    if (patterns !== undefined) {
      this.lastQuery.patterns = query;
      this.update({ patterns });
    }
  }

  async setPatternPrefix(prefixInput: string): Promise<void> {
    this.update({ patternFilter: { ...this.state.patternFilter, prefixInput } });
    await this.refreshPatterns();
  }

  async togglePatternKeychain(keychain: string): Promise<void> {
    const current = this.state.patternFilter.keychains ?? [];
    const keychains = current.includes(keychain)
      ? current.filter((k) => k !== keychain)
      : [...current, keychain];
    this.update({ patternFilter: { ...this.state.patternFilter, keychains } });
    await this.refreshPatterns();
  }

  setPatternForm(patch: Partial<PatternForm>): void {
    this.update({ patternForm: { ...this.state.patternForm, ...patch } });
  }

  editPattern(id: string): void {
    const entry = this.state.patterns.find((e) => e.id === id);
    if (!entry) {
      return;
    }
    this.update({
      patternForm: {
        id: entry.id,
        pattern: entry.pattern,
        keys: entry.keys.join(" ; "),
        note: entry.note ?? "",
      },
    });
  }

  async savePattern(): Promise<void> {
    const form = this.state.patternForm;
    const keys = form.keys
      .split(";")
      .map((k) => k.trim())
      .filter((k) => k.length > 0);
    const saved = await this.guard(() =>
      form.id === null
        ? this.api.addPattern(form.pattern, keys, form.note)
        : this.api.replacePattern(form.id, form.pattern, keys, form.note),
    );
    if (saved !== undefined) {
      this.update({
        patternForm: { id: null, pattern: "", keys: "", note: "" },
        notice: `saved pattern ${saved.id}`,
      });
      await this.refreshPatterns(true);
    }
  }

  async deletePattern(id: string): Promise<void> {
    const done = await this.guard(async () => {
      await this.api.deletePattern(id);
      return true;
    });
    if (done) {
      await this.refreshPatterns(true);
    }
  }

  // -- article manager -------------------------------------------------------

  async refreshArticles(): Promise<void> {
    const articles = await this.guard(() => this.api.listArticles());
    if (articles !== undefined) {
      this.update({ articles });
    }
  }

  async refreshQueue(): Promise<void> {
    const queue = await this.guard(() => this.api.queue());
    if (queue !== undefined) {
      this.update({ queue });
    }
  }

  setUpload(patch: Partial<UploadForm>): void {
    this.update({ upload: { ...this.state.upload, ...patch } });
  }

  async uploadArticle(): Promise<void> {
    const { sourceId, texSource } = this.state.upload;
    const article = await this.guard(() =>
      this.api.uploadArticle(sourceId, texSource),
    );
    if (article !== undefined) {
      this.update({
        upload: { sourceId: "", texSource: "" },
        notice: `stored ${article.source_id} (revision ${article.revision})`,
      });
      await this.refreshArticles();
    }
  }

  async saveProfile(
    sourceId: string,
    profile: { slac_id?: string | null; prefix?: string | null },
  ): Promise<void> {
    const article = await this.guard(() =>
      this.api.updateProfile(sourceId, profile),
    );
    if (article !== undefined) {
      await this.refreshArticles();
    }
  }

  togglePointer(pointer: Pointer): void {
    const current = this.state.enqueuePointers;
    const next = current.includes(pointer)
      ? current.filter((p) => p !== pointer)
      : POINTERS.filter((p) => current.includes(p) || p === pointer);
    this.update({ enqueuePointers: next });
  }

  async enqueue(sourceId: string): Promise<void> {
    if (this.state.enqueuePointers.length === 0) {
      this.update({ error: "select at least one document part" });
      return;
    }
    const queued = await this.guard(() =>
      this.api.enqueue(sourceId, this.state.enqueuePointers),
    );
    if (queued !== undefined) {
      this.update({
        notice: queued
          ? `queued ${sourceId}`
          : `${sourceId} was already queued`,
      });
      await this.refreshQueue();
    }
  }

  /** Run the queue as a background job and poll until it finishes. */
  async runQueue(): Promise<void> {
    const jobId = await this.guard(() => this.api.runQueue());
    if (jobId === undefined) {
      return;
    }
    let job = await this.guard(() => this.api.job(jobId));
    while (job !== undefined && job.status !== "done") {
      this.update({ job });
      await sleep(this.pollInterval);
      job = await this.guard(() => this.api.job(jobId));
    }
    if (job !== undefined) {
      this.update({ job });
      await this.refreshQueue();
      await this.refreshArticles();
    }
  }

  async openReport(sourceId: string): Promise<void> {
    const report = await this.guard(() => this.api.report(sourceId));
    if (report !== undefined) {
      this.update({ report, reportText: null });
    }
  }

  /**
   * Optimistic correction: the row flips immediately, the service response
   * reconciles it, a failure rolls back. A conflict (the service no longer
   * has the row) refetches the authoritative report.
   */
  async correct(keychain: string, status: RowStatus): Promise<void> {
    const report = this.state.report;
    if (!report) {
      return;
    }
    try {
      const server = await optimisticCorrection(
        report.assigned,
        keychain,
        status,
        () => this.api.correctReport(report.source_id, keychain, status),
        (rows) => {
          if (this.state.report) {
            this.update({
              report: { ...this.state.report, assigned: rows },
              reportText: null,
            });
          }
        },
      );
      if (server) {
        this.update({ report: server, error: null });
      }
    } catch (err) {
      if (err instanceof ApiError) {
        if (err.status === 409) {
          await this.openReport(report.source_id);
        }
        // after any refetch, so the conflict stays visible
        this.update({ error: err.message });
        return;
      }
      throw err;
    }
  }

  /** Fetch the canonical report file (what the download button saves). */
  async downloadReport(): Promise<string | undefined> {
    const report = this.state.report;
    if (!report) {
      return undefined;
    }
    const text = await this.guard(() =>
      this.api.reportText(report.source_id),
    );
    if (text !== undefined) {
      this.update({ reportText: text });
    }
    return text;
  }
}
