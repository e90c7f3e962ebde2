/**
 * Console wiring: one party's session against a live engine.
 *
 * The session owns only a credential and a polling cursor into /journal;
 * every view re-renders from fresh API data, so the console can be reloaded
 * at any time without losing anything the API cannot reconstruct.
 */

import { ApiError, ConsoleApi, type JournalEntry } from "./api.js";
import { el, netsFromJournal, renderEvents, renderInbox, renderJournal,
  renderNetting, renderObligations } from "./views.js";
import { OBSERVATION_KINDS, SOURCES, STOP_PHRASE, validateObservation } from "./schema.js";

export interface ConsoleSession {
  party: string;
  cursor: number; // last journal seq seen
}

const TABS = ["inbox", "obligations", "events", "netting", "journal", "control"] as const;
type Tab = (typeof TABS)[number];

export class Console {
  session: ConsoleSession;
  private root: HTMLElement;
  private api: ConsoleApi;
  private panels: Record<string, HTMLElement> = {};
  private journalCache: JournalEntry[] = [];
  private obligationFilter = "";
  private optimistic = new Set<string>(); // answered locally, not yet confirmed gone
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  statusLine: HTMLElement;
  errorLine: HTMLElement;

  constructor(root: HTMLElement, api: ConsoleApi, party: string) {
    this.root = root;
    this.api = api;
    this.session = { party, cursor: 0 };
    this.statusLine = el("div", { id: "status-line" });
    this.errorLine = el("div", { id: "error-line", class: "error" });
    this.buildLayout();
  }

  private buildLayout(): void {
    const tabBar = el("div", { class: "tabbar" });
    for (const tab of TABS) {
      tabBar.append(el("button", {
        class: "tab", id: `tab-${tab}`,
        onclick: () => this.showTab(tab),
      }, tab));
    }
    this.root.append(
      el("div", { class: "topbar" },
        el("span", { class: "brand" }, "engine console"),
        el("span", { class: "party-badge", id: "party-badge" }, this.session.party),
        this.statusLine),
      this.errorLine,
      tabBar,
    );
    for (const tab of TABS) {
      const panel = el("div", { class: "panel", id: `panel-${tab}` });
      panel.style.display = tab === "inbox" ? "block" : "none";
      this.panels[tab] = panel;
      this.root.append(panel);
    }
    this.buildControlPanel();
    this.buildObservationForm();
  }

  showTab(tab: Tab): void {
    for (const name of TABS) {
      this.panels[name].style.display = name === tab ? "block" : "none";
    }
  }

  private setError(message: string): void {
    this.errorLine.textContent = message;
  }

  // -- control panel -------------------------------------------------------

  private buildControlPanel(): void {
    const panel = this.panels["control"];
    const mode = el("div", { class: "mode-badge", id: "mode-badge" }, "?");
    const confirm = el("input", {
      id: "stop-confirm", placeholder: `type "${STOP_PHRASE}" to enable stop`,
    }) as HTMLInputElement;
    const doControl = async (command: "pause" | "resume" | "stop") => {
      this.setError("");
      if (command === "stop" && confirm.value !== STOP_PHRASE) {
        this.setError(`stop requires typing "${STOP_PHRASE}"`);
        return;
      }
      try {
        await this.api.control(command);
        await this.refresh();
      } catch (error) {
        this.setError(error instanceof ApiError ? error.message : String(error));
      }
    };
    panel.append(
      el("div", { class: "toolbar" }, "Engine mode: ", mode),
      el("div", { class: "controls" },
        el("button", { id: "btn-pause", onclick: () => doControl("pause") }, "pause"),
        el("button", { id: "btn-resume", onclick: () => doControl("resume") }, "resume"),
        confirm,
        el("button", { id: "btn-stop", class: "danger", onclick: () => doControl("stop") }, "stop"),
        el("button", {
          id: "btn-step",
          onclick: async () => {
            this.setError("");
            try {
              await this.api.step();
              await this.refresh();
            } catch (error) {
              this.setError(error instanceof ApiError ? error.message : String(error));
            }
          },
        }, "run next day"),
      ),
    );
  }

  // -- observation form ----------------------------------------------------

  private buildObservationForm(): void {
    const panel = this.panels["events"];
    const form = el("div", { class: "observe-form", id: "observe-form" });
    const kind = el("select", { id: "obs-kind" }) as HTMLSelectElement;
    for (const name of OBSERVATION_KINDS) {
      kind.append(el("option", { value: name }, name));
    }
    const source = el("select", { id: "obs-source" }) as HTMLSelectElement;
    for (const name of SOURCES) {
      source.append(el("option", { value: name }, name));
    }
    const party = el("input", { id: "obs-party", placeholder: "party id" }) as HTMLInputElement;
    const amount = el("input", { id: "obs-amount", placeholder: "amount (minor units)" }) as HTMLInputElement;
    const currency = el("input", { id: "obs-currency", placeholder: "CCY" }) as HTMLInputElement;
    const transactions = el("input", {
      id: "obs-transactions", placeholder: "affected transactions, comma-separated",
    }) as HTMLInputElement;
    const errors = el("div", { class: "error", id: "obs-errors" });
    form.append(
      el("div", { class: "form-title" }, "Report an observation"),
      kind, source, party, amount, currency, transactions, errors,
      el("button", {
        id: "obs-submit",
        onclick: async () => {
          errors.textContent = "";
          const state = await this.api.state();
          const checked = validateObservation({
            kind: kind.value,
            source: source.value,
            party: party.value || undefined,
            amount: amount.value || undefined,
            currency: currency.value || undefined,
            transaction_ids: transactions.value || undefined,
          }, state.parties);
          if (!checked.ok) {
            errors.textContent = checked.errors.join("; ");
            return;
          }
          try {
            await this.api.postObservation(checked.datum!);
            await this.refresh();
          } catch (error) {
            errors.textContent = error instanceof ApiError ? error.message : String(error);
          }
        },
      }, "submit"),
    );
    panel.append(form);
    panel.append(el("div", { id: "events-table" }));
  }

  // -- data flow -----------------------------------------------------------

  async answer(requestId: string, response: string): Promise<void> {
    this.setError("");
    this.optimistic.add(requestId);
    try {
      await this.api.answer(requestId, response);
    } catch (error) {
      this.optimistic.delete(requestId);
      this.setError(error instanceof ApiError
        ? `answer rejected (${error.status}): ${error.message}`
        : String(error));
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const state = await this.api.state();
    const badge = this.root.querySelector("#mode-badge");
    if (badge) badge.textContent = state.mode;
    this.statusLine.textContent =
      `mode ${state.mode} · engine date ${state.last_step_date ?? "-"} · seq ${state.journal_seq}`;

    const fresh = await this.api.journal(this.session.cursor);
    if (fresh.entries.length) {
      this.journalCache = this.journalCache.concat(fresh.entries);
      this.session.cursor = this.journalCache[this.journalCache.length - 1].seq;
    }

    const pending = await this.api.pending(this.session.party);
    const open = new Set(pending.map((p) => p.request_id));
    for (const id of [...this.optimistic]) {
      if (!open.has(id)) this.optimistic.delete(id); // journal confirmed it
    }
    renderInbox(this.panels["inbox"], pending, this.optimistic,
      (id, response) => void this.answer(id, response));

    renderObligations(
      this.panels["obligations"],
      await this.api.obligations(this.obligationFilter || undefined),
      this.obligationFilter,
      (status) => {
        this.obligationFilter = status;
        void this.refresh();
      });

    const eventsTable = this.panels["events"].querySelector("#events-table") as HTMLElement;
    renderEvents(eventsTable, await this.api.events(), state);
    renderNetting(this.panels["netting"], netsFromJournal(this.journalCache));
    renderJournal(this.panels["journal"], this.journalCache);
  }

  /** Long-poll the inbox and refresh views; desk-scale freshness. */
  startPolling(intervalMs = 500, waitMs = 4000): void {
    const loop = async () => {
      if (this.stopped) return;
      try {
        await this.api.pending(this.session.party, waitMs);
        await this.refresh();
        this.setError("");
      } catch (error) {
        this.setError(String(error));
      }
      if (!this.stopped) {
        this.pollTimer = setTimeout(loop, intervalMs);
      }
    };
    this.pollTimer = setTimeout(loop, 0);
  }

  dispose(): void {
    this.stopped = true;
    if (this.pollTimer !== null) clearTimeout(this.pollTimer);
  }
}

export function createConsole(root: HTMLElement, api: ConsoleApi, party: string): Console {
  return new Console(root, api, party);
}
