/**
 * Optimistic report corrections with server reconciliation.
 *
 * Curators edit rapidly over many lines, so a status change is reflected in
 * the local rows immediately; the service response then replaces the guess
 * with the authoritative report, and a failure rolls back to the snapshot.
 */

import type { ReportInfo, ReportRow, RowStatus } from "./types.js";

/**
 * Apply `status` to the row for `keychain` locally, run the mutation, then
 * reconcile with the server's rows. On failure the snapshot is restored and
 * the error re-thrown for the caller to surface.
 */
export async function optimisticCorrection(
  rows: ReportRow[],
  keychain: string,
  status: RowStatus,
  mutate: () => Promise<ReportInfo>,
  setRows: (rows: ReportRow[]) => void,
): Promise<ReportInfo | null> {
  const snapshot = rows;
  setRows(
    rows.map((row) =>
      row.keychain === keychain ? { ...row, status } : row,
    ),
  );
  try {
    const report = await mutate();
    setRows(report.assigned);
    return report;
  } catch (err) {
    setRows(snapshot);
    throw err;
  }
}
