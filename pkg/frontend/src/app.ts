/**
 * The repair wizard: a single-page controller over the service API.
 *
 * The page walks the user through one prompt at a time — two candidate
 * nestings side by side, chosen by click or by pressing 0/1 — then offers
 * to run the repair round, and shows the evolving grammar with a diff
 * against the previous round.  All state shown here is read back from the
 * server; the client only remembers the previous grammar text for the diff
 * and queues mutations so at most one is in flight.
 */

import { ApiClient, ApiError, PromptJson, SessionView } from "./api.js";
import { renderTree } from "./tree.js";

export interface DiffLine {
  kind: "same" | "add" | "del";
  text: string;
}

/** Line diff via longest common subsequence; inputs are small grammars. */
export function diffLines(before: string, after: string): DiffLine[] {
  const a = before.split("\n");
  const b = after.split("\n");
  const lcs: number[][] = Array.from({ length: a.length + 1 }, () =>
    new Array<number>(b.length + 1).fill(0),
  );
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      lcs[i][j] =
        a[i] === b[j]
          ? lcs[i + 1][j + 1] + 1
          : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  const out: DiffLine[] = [];
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      out.push({ kind: "same", text: a[i] });
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      out.push({ kind: "del", text: a[i] });
      i++;
    } else {
      out.push({ kind: "add", text: b[j] });
      j++;
    }
  }
  for (; i < a.length; i++) {
    out.push({ kind: "del", text: a[i] });
  }
  for (; j < b.length; j++) {
    out.push({ kind: "add", text: b[j] });
  }
  return out;
}

export class RepairApp {
  private view: SessionView | null = null;
  private prompt: PromptJson | null = null;
  private grammar = "";
  private previousGrammar: string | null = null;
  private queue: Promise<void> = Promise.resolve();
  private locked = false;
  private readonly onKeydown: (event: KeyboardEvent) => void;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
  ) {
    this.root.innerHTML = `
      <header class="topbar">
        <h1>Grammar repair</h1>
        <span id="verdict-badge" class="badge"></span>
        <span id="round-label"></span>
        <button id="reset-button" type="button">Start over</button>
      </header>
      <main>
        <section id="prompt-panel"></section>
        <section id="history-panel"></section>
        <section id="residual-panel"></section>
        <section id="grammar-panel"></section>
      </main>
      <div id="toasts"></div>`;
    this.part("reset-button").addEventListener("click", () => this.reset());
    this.onKeydown = (event: KeyboardEvent) => {
      if (event.key === "0" || event.key === "1") {
        const choice = Number(event.key) as 0 | 1;
        if (this.prompt && !this.locked) {
          this.choose(this.prompt.id, choice);
        }
      }
    };
    document.addEventListener("keydown", this.onKeydown);
  }

  /** Detach the page-level keyboard shortcut. */
  dispose(): void {
    document.removeEventListener("keydown", this.onKeydown);
  }

  /** Load the initial snapshot; returns when the first render is done. */
  init(): Promise<void> {
    return this.enqueue(() => this.refresh());
  }

  /** Resolves once every queued mutation has settled. */
  idle(): Promise<void> {
    return this.queue;
  }

  /** Queue a mutation so at most one request mutates the session at a time. */
  private enqueue(action: () => Promise<void>): Promise<void> {
    this.queue = this.queue.then(action, action);
    return this.queue;
  }

  private part(id: string): HTMLElement {
    const el = this.root.querySelector(`#${id}`);
    if (!el) {
      throw new Error(`missing element #${id}`);
    }
    return el as HTMLElement;
  }

  private async refresh(): Promise<void> {
    this.view = await this.client.getSession();
    this.grammar = await this.client.currentGrammar();
    this.prompt =
      this.view.verdict === "in-progress" ? await this.client.nextPrompt() : null;
    this.render();
  }

  choose(promptId: number, choice: 0 | 1): Promise<void> {
    return this.enqueue(async () => {
      this.locked = true;
      this.render();
      try {
        this.view = await this.client.answer(promptId, choice);
        this.prompt = await this.client.nextPrompt();
      } catch (err) {
        if (err instanceof ApiError && err.message.startsWith("no pending prompt")) {
          this.toast("that prompt was already answered");
          await this.refresh();
        } else if (err instanceof ApiError) {
          // contradiction or other rejection: keep the prompt on screen
          // with the server's explanation so the user can pick again
          this.toast(err.message);
        } else {
          this.toast(String(err));
        }
      } finally {
        this.locked = false;
        this.render();
      }
    });
  }

  runStep(): Promise<void> {
    return this.enqueue(async () => {
      this.locked = true;
      this.render();
      const before = this.grammar;
      try {
        this.view = await this.client.step();
        this.previousGrammar = before;
        this.grammar = await this.client.currentGrammar();
        this.prompt =
          this.view.verdict === "in-progress"
            ? await this.client.nextPrompt()
            : null;
      } catch (err) {
        this.toast(err instanceof ApiError ? err.message : String(err));
      } finally {
        this.locked = false;
        this.render();
      }
    });
  }

  reset(): Promise<void> {
    return this.enqueue(async () => {
      try {
        this.view = await this.client.reset();
        this.previousGrammar = null;
        await this.refresh();
      } catch (err) {
        this.toast(err instanceof ApiError ? err.message : String(err));
        this.render();
      }
    });
  }

  private toast(message: string): void {
    const item = document.createElement("div");
    item.className = "toast";
    item.textContent = message;
    this.part("toasts").appendChild(item);
    setTimeout(() => item.remove(), 6000);
  }

  private render(): void {
    if (!this.view) {
      return;
    }
    this.renderHeader(this.view);
    this.renderPrompt(this.view);
    this.renderHistory(this.view);
    this.renderResiduals(this.view);
    this.renderGrammar(this.view);
  }

  private renderHeader(view: SessionView): void {
    const badge = this.part("verdict-badge");
    badge.textContent = view.verdict;
    badge.className = `badge verdict-${view.verdict}`;
    this.part("round-label").textContent = `round ${view.round}`;
  }

  private renderPrompt(view: SessionView): void {
    const panel = this.part("prompt-panel");
    panel.innerHTML = "";
    if (this.prompt) {
      const p = this.prompt;
      const head = document.createElement("div");
      head.className = "prompt-head";
      head.innerHTML = `
        <span class="kind-badge kind-${p.kind}">${p.kind}</span>
        <span class="pair-caption">${p.pair[0]} vs ${p.pair[1]}</span>
        <span class="key-hint">press 0 or 1</span>`;
      panel.appendChild(head);
      const options = document.createElement("div");
      options.className = "options";
      p.options.forEach((tree, index) => {
        const card = document.createElement("div");
        card.className = "option";
        card.appendChild(renderTree(tree));
        const button = document.createElement("button");
        button.type = "button";
        button.className = "choose-button";
        button.dataset.choice = String(index);
        button.textContent = `Choose ${index}`;
        button.disabled = this.locked;
        button.addEventListener("click", () =>
          this.choose(p.id, index as 0 | 1),
        );
        card.appendChild(button);
        options.appendChild(card);
      });
      panel.appendChild(options);
      return;
    }
    if (view.verdict === "in-progress") {
      const button = document.createElement("button");
      button.type = "button";
      button.id = "step-button";
      button.textContent = "Run repair round";
      button.disabled = this.locked;
      button.addEventListener("click", () => this.runStep());
      panel.appendChild(button);
      return;
    }
    const done = document.createElement("div");
    done.className = "done-note";
    done.textContent =
      view.verdict === "repaired"
        ? "The grammar is conflict-free."
        : `Session finished: ${view.verdict}.`;
    panel.appendChild(done);
    const download = document.createElement("a");
    download.id = "download-button";
    download.textContent = "Download grammar";
    download.download = "repaired.cfg";
    download.href =
      "data:text/plain;charset=utf-8," + encodeURIComponent(this.grammar);
    panel.appendChild(download);
  }

  private renderHistory(view: SessionView): void {
    const panel = this.part("history-panel");
    panel.innerHTML = "<h2>Answers</h2>";
    const list = document.createElement("ul");
    for (const entry of view.history) {
      const item = document.createElement("li");
      item.className = "history-entry";
      const caption = document.createElement("span");
      caption.textContent = `[${entry.kind}] ${entry.pair[0]} vs ${entry.pair[1]} `;
      item.appendChild(caption);
      for (const option of [0, 1]) {
        const mark = document.createElement("span");
        mark.className = option === entry.choice ? "option-mark chosen" : "option-mark";
        mark.textContent = String(option);
        item.appendChild(mark);
      }
      list.appendChild(item);
    }
    panel.appendChild(list);
  }

  private renderResiduals(view: SessionView): void {
    const panel = this.part("residual-panel");
    panel.innerHTML = `<h2>Conflicts</h2>
      <div id="residual-count">${view.residual_conflicts} unresolved</div>`;
    if (view.notes.length > 0) {
      const notes = document.createElement("ul");
      notes.id = "session-notes";
      for (const note of view.notes) {
        const item = document.createElement("li");
        item.textContent = note;
        notes.appendChild(item);
      }
      panel.appendChild(notes);
    }
  }

  private renderGrammar(view: SessionView): void {
    const panel = this.part("grammar-panel");
    panel.innerHTML = "<h2>Grammar</h2>";
    if (this.previousGrammar !== null && view.round > 0) {
      const diff = document.createElement("pre");
      diff.id = "diff-panel";
      for (const line of diffLines(this.previousGrammar, this.grammar)) {
        const row = document.createElement("div");
        row.className = `diff-${line.kind}`;
        row.textContent =
          (line.kind === "add" ? "+ " : line.kind === "del" ? "- " : "  ") +
          line.text;
        diff.appendChild(row);
      }
      panel.appendChild(diff);
    }
    const text = document.createElement("pre");
    text.id = "grammar-text";
    text.textContent = this.grammar;
    panel.appendChild(text);
  }
}

/** Mount the wizard onto a page element and start it. */
export function mount(root: HTMLElement, base = ""): RepairApp {
  const app = new RepairApp(root, new ApiClient(base));
  void app.init();
  return app;
}
