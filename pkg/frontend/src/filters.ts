/**
 * Filter-widget state and its translation to /v1 query strings.
 *
 * The service owns the filter semantics; this module only decides what is
 * worth sending. A typed prefix shorter than two characters is withheld, so
 * keystroke one never triggers a query the service would reject.
 */

export const MIN_PREFIX_LENGTH = 2;

export interface ListFilter {
  /** Single initial letter chosen from the letter popup, or null. */
  letter: string | null;
  /** Raw content of the truncated-string field, as typed. */
  prefixInput: string;
  /** Keychain selections (pattern manager), rendered form. */
  keychains?: string[];
}

export function emptyFilter(): ListFilter {
  return { letter: null, prefixInput: "" };
}

/** The prefix that may be sent: trimmed input of at least two characters. */
export function effectivePrefix(input: string): string | null {
  const trimmed = input.trim();
  return trimmed.length >= MIN_PREFIX_LENGTH ? trimmed : null;
}

/**
 * Query string for a filter, "" when nothing is set. Letter and prefix are
 * combined — the service applies them as a logical AND.
 */
export function filterQuery(filter: ListFilter): string {
  const params: string[] = [];
  if (filter.letter) {
    params.push(`letter=${encodeURIComponent(filter.letter)}`);
  }
  const prefix = effectivePrefix(filter.prefixInput);
  if (prefix !== null) {
    params.push(`prefix=${encodeURIComponent(prefix)}`);
  }
  for (const keychain of filter.keychains ?? []) {
    params.push(`keychain=${encodeURIComponent(keychain)}`);
  }
  return params.length ? `?${params.join("&")}` : "";
}
