/** DOM wiring for the typing demo: editor pane with ghost completions, the
 * next-word list, a live tally footer, a KB editor, and the what-if panel.
 *
 * Everything here is presentation; session behaviour lives in
 * TypingController and the grid reshaping in the whatif module.
 */

import { ApiClient, KbTuple, KbValue, SubstitutionRequest, Suggestion } from "./api.js";
import { Metrics, Tally, formatMetric } from "./tally.js";
import { Ghost, TypingController } from "./typing.js";
import { GridView, runStudy, swapConfigurations } from "./whatif.js";

export interface MountOptions {
  baseUrl?: string;
  modelId?: string;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function parseKbValue(raw: string): KbValue {
  const text = raw.trim();
  if (text === "") return null;
  const num = Number(text);
  return Number.isFinite(num) ? num : text;
}

function renderSuggestions(list: HTMLOListElement, items: Suggestion[]): void {
  list.replaceChildren(
    ...items.map((s) => {
      const li = el("li");
      li.append(el("span", "word", s.word), el("span", "prob", s.probability.toFixed(4)));
      return li;
    }),
  );
}

function renderTally(node: HTMLElement, tally: Tally, metrics: Metrics): void {
  node.textContent =
    `keys ${tally.typed_keys}/${tally.total_chars}` +
    ` · accepted ${tally.accepted_chars} (${tally.accept_events}×)` +
    ` · distraction ${tally.distraction_chars}` +
    ` · KS ${formatMetric(metrics.ks)} · UD ${formatMetric(metrics.ud)}` +
    ` · P ${formatMetric(metrics.precision)} · F1 ${formatMetric(metrics.f1)}`;
}

function renderGrid(table: HTMLTableElement, view: GridView): void {
  table.replaceChildren();
  const head = table.createTHead().insertRow();
  head.append(el("th", "", "configuration"));
  for (const candidate of view.candidates) head.append(el("th", "", candidate));
  const body = table.createTBody();
  for (const row of view.rows) {
    const tr = body.insertRow();
    tr.append(el("th", "config", row.label));
    for (const cell of row.cells) {
      const td = tr.insertCell();
      td.textContent = cell.percent;
      td.style.backgroundColor = `rgba(32, 118, 212, ${cell.probability.toFixed(3)})`;
      td.title = `${cell.candidate}: ${cell.probability}`;
    }
  }
}

class KbEditor {
  readonly root: HTMLElement;
  private readonly rows: HTMLTableSectionElement;

  constructor(onApply: (kb: KbTuple[]) => void, initial: KbTuple[]) {
    this.root = el("section", "kb-editor");
    this.root.append(el("h2", "", "knowledge base"));
    const table = el("table");
    const head = table.createTHead().insertRow();
    head.append(el("th", "", "attribute"), el("th", "", "value"));
    this.rows = table.createTBody();
    for (const tuple of initial) this.addRow(tuple.attribute, tuple.value);
    if (!initial.length) this.addRow("", null);
    const addBtn = el("button", "", "add row");
    addBtn.addEventListener("click", () => this.addRow("", null));
    const applyBtn = el("button", "", "apply");
    applyBtn.addEventListener("click", () => onApply(this.read()));
    this.root.append(table, addBtn, applyBtn);
  }

  private addRow(attribute: string, value: KbValue): void {
    const tr = this.rows.insertRow();
    const attr = el("input") as HTMLInputElement;
    attr.value = attribute;
    const val = el("input") as HTMLInputElement;
    val.value = value === null ? "" : String(value);
    tr.insertCell().append(attr);
    tr.insertCell().append(val);
  }

  read(): KbTuple[] {
    const kb: KbTuple[] = [];
    for (const tr of Array.from(this.rows.rows)) {
      const [attr, val] = Array.from(tr.querySelectorAll("input"));
      const attribute = attr.value.trim();
      if (attribute) kb.push({ attribute, value: parseKbValue(val.value) });
    }
    return kb;
  }
}

class WhatIfPanel {
  readonly root: HTMLElement;
  private readonly attribute: HTMLInputElement;
  private readonly values: HTMLInputElement;
  private readonly candidates: HTMLInputElement;
  private readonly slot: HTMLInputElement;
  private readonly error: HTMLElement;
  private readonly table: HTMLTableElement;
  private lastValues: number[] = [];

  constructor(
    private readonly client: ApiClient,
    private readonly modelId: () => string,
    private readonly context: () => { text: string; kb: KbTuple[] },
  ) {
    this.root = el("section", "whatif");
    this.root.append(el("h2", "", "what-if"));
    this.attribute = this.labelled("attribute", "ef");
    this.values = this.labelled("values (comma)", "20, 45, 70");
    this.candidates = this.labelled("candidate words (comma)", "mildly, moderately, severely");
    this.slot = this.labelled("slot position", "0");
    const run = el("button", "", "run study");
    run.addEventListener("click", () => void this.run(this.parsedValues()));
    const swap = el("button", "", "swap first two rows");
    swap.addEventListener("click", () => {
      if (this.lastValues.length >= 2) void this.run(swapConfigurations(this.lastValues, 0, 1));
    });
    this.error = el("div", "error hidden");
    this.table = el("table", "grid");
    this.root.append(run, swap, this.error, this.table);
  }

  private labelled(label: string, placeholder: string): HTMLInputElement {
    const wrap = el("label");
    wrap.append(el("span", "", label));
    const input = el("input") as HTMLInputElement;
    input.placeholder = placeholder;
    wrap.append(input);
    this.root.append(wrap);
    return input;
  }

  private parsedValues(): number[] {
    return this.values.value
      .split(",")
      .map((v) => Number(v.trim()))
      .filter((v) => Number.isFinite(v));
  }

  private async run(values: number[]): Promise<void> {
    const attribute = this.attribute.value.trim();
    const candidates = this.candidates.value
      .split(",")
      .map((c) => c.trim())
      .filter(Boolean);
    const { text, kb } = this.context();
    if (!attribute || !values.length || !candidates.length || !text) {
      this.showError("attribute, values, candidates and some typed text are required");
      return;
    }
    const request: SubstitutionRequest = {
      model_id: this.modelId(),
      text,
      kb,
      value_positions: {},
      slot_position: Math.max(0, Number(this.slot.value) || 0),
      candidates,
      configurations: values.map((v) => ({ [attribute]: v })),
    };
    const result = await runStudy(this.client, request);
    if (result.kind === "error") {
      this.showError(result.message);
      return;
    }
    this.lastValues = values;
    this.error.classList.add("hidden");
    renderGrid(this.table, result.view);
  }

  private showError(message: string): void {
    this.error.textContent = message;
    this.error.classList.remove("hidden");
  }
}

export async function mount(root: HTMLElement, options: MountOptions = {}): Promise<void> {
  const client = new ApiClient(options.baseUrl ?? "");
  const models = await client.models();
  if (!models.length) throw new Error("service reports no models");
  const modelId = options.modelId ?? models[0].model_id;

  const banner = el("div", "banner hidden", "service unreachable — typing continues unaided");
  const editor = el("div", "editor");
  editor.tabIndex = 0;
  const committed = el("span", "committed");
  const ghostSpan = el("span", "ghost");
  editor.append(committed, ghostSpan);
  const hint = el(
    "div",
    "hint",
    "click the box and type · Tab accepts the ghost · Esc dismisses · Space commits a word",
  );
  const suggestions = el("ol", "suggestions");
  const tallyLine = el("div", "tally");

  const controller = new TypingController(client, {
    modelId,
    events: {
      onGhost: (ghost: Ghost | null) => {
        ghostSpan.textContent =
          ghost === null ? "" : ghost.word.slice(controller.currentPrefix.length);
      },
      onSuggestions: (items) => renderSuggestions(suggestions, items),
      onTally: (tally, metrics) => renderTally(tallyLine, tally, metrics),
      onStatus: (ok) => banner.classList.toggle("hidden", ok),
      onText: (text) => {
        committed.textContent = text;
      },
    },
  });

  editor.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.ctrlKey || event.metaKey || event.altKey) return;
    if (event.key === "Tab") {
      event.preventDefault();
      void controller.tab();
    } else if (event.key === "Escape") {
      controller.escape();
    } else if (event.key === "Backspace") {
      event.preventDefault();
      void controller.backspace();
    } else if (event.key.length === 1) {
      event.preventDefault();
      void controller.typeChar(event.key);
    }
  });

  const kbEditor = new KbEditor((kb) => void controller.setKb(kb), []);
  const whatIf = new WhatIfPanel(
    client,
    () => modelId,
    () => ({ text: controller.text, kb: controller.getKb() }),
  );

  const editorPane = el("section", "editor-pane");
  editorPane.append(editor, hint, el("h2", "", "next word"), suggestions, tallyLine);
  const sidebar = el("aside");
  sidebar.append(kbEditor.root, whatIf.root);
  const layout = el("div", "layout");
  layout.append(editorPane, sidebar);
  root.replaceChildren(banner, layout);

  renderTally(tallyLine, controller.tally, controller.metrics);
  await controller.start();
  editor.focus();
}
