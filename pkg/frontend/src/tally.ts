/** Live keystroke tally and the derived keystroke-saving metrics.
 *
 * Field names and formulas mirror the evaluation service's offline
 * simulator so a scripted replay produces byte-identical tallies:
 *
 *   KS        = (total_chars - typed_keys) / total_chars
 *   Recall    = accepted_chars / total_chars
 *   UD        = distraction_chars / accepted_chars   (undefined if none accepted)
 *   Precision = accepted / (accepted + distraction)  = 1 / (1 + UD)
 *   F1        = harmonic mean of Precision and Recall
 *
 * This is plain integer bookkeeping plus those display formulas; all word
 * probabilities stay on the server.
 */

export interface Tally {
  total_chars: number;
  typed_keys: number;
  accepted_chars: number;
  distraction_chars: number;
  accept_events: number;
}

export interface Metrics {
  ks: number;
  ud: number | null;
  precision: number | null;
  recall: number;
  f1: number;
}

export function emptyTally(): Tally {
  return {
    total_chars: 0,
    typed_keys: 0,
    accepted_chars: 0,
    distraction_chars: 0,
    accept_events: 0,
  };
}

export function addTallies(a: Tally, b: Tally): Tally {
  return {
    total_chars: a.total_chars + b.total_chars,
    typed_keys: a.typed_keys + b.typed_keys,
    accepted_chars: a.accepted_chars + b.accepted_chars,
    distraction_chars: a.distraction_chars + b.distraction_chars,
    accept_events: a.accept_events + b.accept_events,
  };
}

export function metricsFromTally(tally: Tally): Metrics {
  if (tally.total_chars === 0) {
    return { ks: 0, ud: null, precision: null, recall: 0, f1: 0 };
  }
  const ks = (tally.total_chars - tally.typed_keys) / tally.total_chars;
  const recall = tally.accepted_chars / tally.total_chars;
  if (tally.accepted_chars === 0) {
    return { ks, ud: null, precision: null, recall, f1: 0 };
  }
  const ud = tally.distraction_chars / tally.accepted_chars;
  const precision =
    tally.accepted_chars / (tally.accepted_chars + tally.distraction_chars);
  const f1 =
    precision + recall > 0 ? (2 * precision * recall) / (precision + recall) : 0;
  return { ks, ud, precision, recall, f1 };
}

/** Render a metric the way the evaluation reports do ("n/a" when undefined). */
export function formatMetric(value: number | null, digits = 4): string {
  return value === null ? "n/a" : value.toFixed(digits);
}
