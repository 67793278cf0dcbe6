/** Typing session controller: ghost completions, word-boundary prediction
 * lists, and the live keystroke tally.
 *
 * Accounting mirrors the offline typing simulator so a scripted replay of a
 * document produces the identical integer tally:
 *
 *   - every typed character and every space adds one typed key and one
 *     total char;
 *   - Tab inserts the ghost's remaining characters (accepted, also total);
 *   - a displayed ghost that is never accepted adds |word| - |prefix|
 *     distraction characters the moment it leaves the screen.
 *
 * The ghost comes from `/v1/complete` after each keystroke (debounced) and
 * the suggestion list from `/v1/predict` at word boundaries and KB edits.
 * At most one completion request is in flight; a burst of keystrokes
 * collapses to the newest prefix and responses that no longer match the
 * latest request sequence number are discarded unseen.  If the service is
 * unreachable, typing continues unaided and every key still counts.
 */

import { ApiClient, CompleteResponse, KbTuple, Suggestion } from "./api.js";
import { Metrics, Tally, emptyTally, metricsFromTally } from "./tally.js";

export interface Ghost {
  word: string;
  probability: number;
  /** Prefix length the ghost was displayed for (distraction bookkeeping). */
  prefixLen: number;
}

export interface TypingEvents {
  onGhost?(ghost: Ghost | null): void;
  onSuggestions?(items: Suggestion[]): void;
  onTally?(tally: Tally, metrics: Metrics): void;
  onStatus?(reachable: boolean): void;
  onText?(text: string): void;
}

export interface TypingOptions {
  modelId: string;
  kb?: KbTuple[];
  /** Keystroke debounce before asking for a completion; 0 disables (tests). */
  debounceMs?: number;
  /** Count the Tab press itself as a typed key (off by default). */
  countAcceptKey?: boolean;
  /** Suggestion list length for word-boundary predictions. */
  predictK?: number;
  events?: TypingEvents;
}

export class TypingController {
  readonly tally: Tally = emptyTally();

  private words: string[] = [];
  private prefix = "";
  private ghost: Ghost | null = null;
  private kb: KbTuple[];
  private suggestionItems: Suggestion[] = [];
  private reachable = true;

  private completeSeq = 0;
  private predictSeq = 0;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private pendingOp: (() => Promise<void>) | null = null;
  private pendingWaiters: Array<() => void> = [];
  private inFlight = false;

  private readonly modelId: string;
  private readonly debounceMs: number;
  private readonly countAcceptKey: boolean;
  private readonly predictK: number;
  private readonly events: TypingEvents;

  constructor(
    private readonly client: ApiClient,
    options: TypingOptions,
  ) {
    this.modelId = options.modelId;
    this.kb = [...(options.kb ?? [])];
    this.debounceMs = options.debounceMs ?? 50;
    this.countAcceptKey = options.countAcceptKey ?? false;
    this.predictK = options.predictK ?? 5;
    this.events = options.events ?? {};
  }

  /** Committed words followed by the in-progress prefix. */
  get text(): string {
    const parts = [...this.words];
    if (this.prefix) parts.push(this.prefix);
    return parts.join(" ");
  }

  get contextTokens(): string[] {
    return [...this.words];
  }

  get currentPrefix(): string {
    return this.prefix;
  }

  get currentGhost(): Ghost | null {
    return this.ghost;
  }

  get suggestions(): Suggestion[] {
    return this.suggestionItems;
  }

  get serviceReachable(): boolean {
    return this.reachable;
  }

  get metrics(): Metrics {
    return metricsFromTally(this.tally);
  }

  /** Fetch the opening suggestion list (empty context). */
  start(): Promise<void> {
    return this.refreshSuggestions();
  }

  /** One printable in-word character. */
  typeChar(ch: string): Promise<void> {
    if (ch === " ") return this.space();
    if (ch.length !== 1 || /\s/.test(ch)) {
      throw new Error(`typeChar expects a single printable character, got ${JSON.stringify(ch)}`);
    }
    this.prefix += ch;
    this.tally.typed_keys += 1;
    this.tally.total_chars += 1;
    this.emitText();
    this.emitTally();
    return this.requestGhost();
  }

  /** Undo the last in-word keystroke (client-side only; reverts its tally). */
  backspace(): Promise<void> {
    if (!this.prefix) return Promise.resolve();
    this.prefix = this.prefix.slice(0, -1);
    this.tally.typed_keys -= 1;
    this.tally.total_chars -= 1;
    this.emitText();
    this.emitTally();
    if (!this.prefix) {
      this.cancelCompletions();
      this.discardGhost();
      return Promise.resolve();
    }
    return this.requestGhost();
  }

  /** Space commits the current word and asks for the next-word list. */
  space(): Promise<void> {
    if (!this.prefix) return Promise.resolve();
    this.cancelCompletions();
    this.discardGhost();
    this.words.push(this.prefix);
    this.prefix = "";
    this.tally.typed_keys += 1;
    this.tally.total_chars += 1;
    this.emitText();
    this.emitTally();
    return this.refreshSuggestions();
  }

  /** Tab accepts the displayed ghost, inserting its remaining characters.
   * Without a ghost (or with one that no longer extends the prefix) it is
   * a no-op. */
  tab(): Promise<void> {
    const ghost = this.ghost;
    if (ghost === null || !ghost.word.startsWith(this.prefix)) {
      return Promise.resolve();
    }
    const inserted = ghost.word.length - this.prefix.length;
    this.cancelCompletions();
    this.prefix = ghost.word;
    this.ghost = null; // accepted, so never a distraction
    this.tally.accepted_chars += inserted;
    this.tally.total_chars += inserted;
    this.tally.accept_events += 1;
    if (this.countAcceptKey) this.tally.typed_keys += 1;
    this.emitGhost();
    this.emitText();
    this.emitTally();
    return Promise.resolve();
  }

  /** Escape dismisses the ghost. Purely client-side: no request is made. */
  escape(): void {
    this.cancelCompletions();
    this.discardGhost();
  }

  /** End of the session: settle the ghost and commit the trailing word
   * without a space keystroke. */
  finish(): void {
    this.cancelCompletions();
    this.discardGhost();
    if (this.prefix) {
      this.words.push(this.prefix);
      this.prefix = "";
      this.emitText();
    }
  }

  /** Replace the conditioning KB; triggers exactly one prediction refresh. */
  setKb(kb: KbTuple[]): Promise<void> {
    this.kb = [...kb];
    return this.refreshSuggestions();
  }

  getKb(): KbTuple[] {
    return [...this.kb];
  }

  // -- completion plumbing --------------------------------------------------

  private requestGhost(): Promise<void> {
    const prefix = this.prefix;
    const mySeq = ++this.completeSeq;
    return this.debounced(() => this.enqueue(() => this.fetchGhost(mySeq, prefix)));
  }

  private async fetchGhost(mySeq: number, prefix: string): Promise<void> {
    let resp: CompleteResponse;
    try {
      resp = await this.client.complete({
        model_id: this.modelId,
        context_tokens: this.words,
        kb: this.kb,
        prefix,
      });
    } catch {
      if (mySeq !== this.completeSeq) return;
      this.discardGhost();
      this.setReachable(false);
      return;
    }
    if (mySeq !== this.completeSeq) return; // stale: a newer keystroke owns the pane
    this.setReachable(true);
    this.discardGhost();
    if (resp.suggestion !== null && resp.probability !== null) {
      this.ghost = { word: resp.suggestion, probability: resp.probability, prefixLen: prefix.length };
      this.emitGhost();
    }
  }

  private async refreshSuggestions(): Promise<void> {
    const mySeq = ++this.predictSeq;
    try {
      const resp = await this.client.predict({
        model_id: this.modelId,
        context_tokens: this.words,
        kb: this.kb,
        k: this.predictK,
      });
      if (mySeq !== this.predictSeq) return;
      this.setReachable(true);
      this.suggestionItems = resp.suggestions;
    } catch {
      if (mySeq !== this.predictSeq) return;
      this.setReachable(false);
      this.suggestionItems = [];
    }
    this.events.onSuggestions?.(this.suggestionItems);
  }

  /** A displayed, never-accepted ghost leaves the screen as distraction. */
  private discardGhost(): void {
    if (this.ghost === null) return;
    this.tally.distraction_chars += this.ghost.word.length - this.ghost.prefixLen;
    this.ghost = null;
    this.emitGhost();
    this.emitTally();
  }

  /** Invalidate scheduled and in-flight completions (word moved on). */
  private cancelCompletions(): void {
    this.completeSeq += 1;
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
      this.debounceTimer = null;
    }
    this.releaseWaiters();
    this.pendingOp = null;
  }

  private debounced(op: () => Promise<void>): Promise<void> {
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
      this.debounceTimer = null;
    }
    if (this.debounceMs <= 0) return op();
    return new Promise<void>((resolve) => {
      this.pendingWaiters.push(resolve);
      this.debounceTimer = setTimeout(() => {
        this.debounceTimer = null;
        void op();
      }, this.debounceMs);
    });
  }

  /** Latest-wins queue keeping at most one completion request in flight. */
  private enqueue(op: () => Promise<void>): Promise<void> {
    return new Promise<void>((resolve) => {
      this.pendingOp = op; // an older waiting op is superseded, never sent
      this.pendingWaiters.push(resolve);
      void this.pump();
    });
  }

  private async pump(): Promise<void> {
    if (this.inFlight || this.pendingOp === null) return;
    const op = this.pendingOp;
    this.pendingOp = null;
    this.inFlight = true;
    try {
      await op();
    } finally {
      this.inFlight = false;
      if (this.pendingOp !== null) {
        void this.pump();
      } else {
        this.releaseWaiters();
      }
    }
  }

  private releaseWaiters(): void {
    const waiters = this.pendingWaiters;
    this.pendingWaiters = [];
    waiters.forEach((resolve) => resolve());
  }

  private setReachable(ok: boolean): void {
    if (this.reachable !== ok) {
      this.reachable = ok;
      this.events.onStatus?.(ok);
    }
  }

  private emitGhost(): void {
    this.events.onGhost?.(this.ghost);
  }

  private emitTally(): void {
    this.events.onTally?.(this.tally, this.metrics);
  }

  private emitText(): void {
    this.events.onText?.(this.text);
  }
}
