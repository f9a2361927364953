/**
 * The keychain composer draft: an ordered keyword list built by clicking
 * entries in the filtered keyword list, reordered with move actions, and
 * saved through the service (which owns validation).
 */

export interface Draft {
  keywords: string[];
}

export function emptyDraft(): Draft {
  return { keywords: [] };
}

export function appendKeyword(draft: Draft, keyword: string): Draft {
  return { keywords: [...draft.keywords, keyword] };
}

export function removeAt(draft: Draft, index: number): Draft {
  return { keywords: draft.keywords.filter((_, i) => i !== index) };
}

/**
 * Move the keyword at `index` by `delta` positions (negative = toward the
 * front). Out-of-range moves are clamped; order is significant, so moving a
 * keyword produces a different chain.
 */
export function moveKeyword(draft: Draft, index: number, delta: number): Draft {
  const keywords = [...draft.keywords];
  if (index < 0 || index >= keywords.length) {
    return draft;
  }
  const target = Math.min(Math.max(index + delta, 0), keywords.length - 1);
  if (target === index) {
    return draft;
  }
  const [moved] = keywords.splice(index, 1);
  keywords.splice(target, 0, moved!);
  return { keywords };
}

/** The chain as the service renders it. */
export function rendering(draft: Draft): string {
  return draft.keywords.join(", ");
}
