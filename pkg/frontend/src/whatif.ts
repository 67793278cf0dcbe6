/** What-if panel model: the value-substitution heat grid.
 *
 * The service returns each row already renormalized over the candidate
 * words, so a row's probabilities sum to 1 and render as shares of 100%.
 * This module only reshapes and formats those numbers for display — the
 * probability arithmetic lives on the server.
 */

import {
  ApiClient,
  ApiError,
  SubstitutionGrid,
  SubstitutionRequest,
} from "./api.js";

export interface GridCell {
  candidate: string;
  /** Renormalized share of the row, straight from the service. */
  probability: number;
  /** Display string, e.g. "42.3%". */
  percent: string;
}

export interface GridRowView {
  label: string;
  configuration: Record<string, number>;
  cells: GridCell[];
}

export interface GridView {
  slotPosition: number;
  candidates: string[];
  rows: GridRowView[];
}

export function configurationLabel(configuration: Record<string, number>): string {
  return Object.entries(configuration)
    .map(([attribute, value]) => `${attribute} = ${value}`)
    .join(", ");
}

export function formatPercent(probability: number): string {
  return `${(probability * 100).toFixed(1)}%`;
}

export function gridView(grid: SubstitutionGrid): GridView {
  return {
    slotPosition: grid.slot_position,
    candidates: [...grid.candidates],
    rows: grid.rows.map((row) => ({
      label: configurationLabel(row.configuration),
      configuration: row.configuration,
      cells: grid.candidates.map((candidate) => ({
        candidate,
        probability: row.probabilities[candidate] ?? 0,
        percent: formatPercent(row.probabilities[candidate] ?? 0),
      })),
    })),
  };
}

/** Reorder helper for the panel's row controls: swapping two requested
 * configurations swaps the corresponding grid rows and nothing else. */
export function swapConfigurations<T>(configurations: T[], i: number, j: number): T[] {
  const out = [...configurations];
  if (i < 0 || j < 0 || i >= out.length || j >= out.length) {
    throw new RangeError(`swap indices ${i}, ${j} outside ${out.length} configurations`);
  }
  [out[i], out[j]] = [out[j], out[i]];
  return out;
}

export type StudyResult =
  | { kind: "grid"; grid: SubstitutionGrid; view: GridView }
  | { kind: "error"; message: string };

/** Run the study; a rejected candidate list (e.g. a word the model does not
 * know) comes back as an inline error message rather than a throw. */
export async function runStudy(
  client: ApiClient,
  request: SubstitutionRequest,
): Promise<StudyResult> {
  try {
    const grid = await client.substitution(request);
    return { kind: "grid", grid, view: gridView(grid) };
  } catch (err) {
    if (err instanceof ApiError) {
      return { kind: "error", message: err.message };
    }
    return { kind: "error", message: `service unreachable: ${String(err)}` };
  }
}
