/**
 * DOM rendering for the console views. Every view is a pure function of API
 * data: the console holds no contract state of its own, so reloading and
 * re-polling reproduces every screen.
 */

import type { EngineState, EventRow, JournalEntry, ObligationRow, PendingRequest } from "./api.js";

type Attrs = Record<string, string | boolean | ((event: Event) => void)>;

export function el(tag: string, attrs: Attrs = {}, ...children: (Node | string)[]): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

function clear(container: HTMLElement): void {
  while (container.firstChild) container.removeChild(container.firstChild);
}

export function formatMoney(currency: string, minor: string): string {
  const negative = minor.startsWith("-");
  const digits = negative ? minor.slice(1) : minor;
  const padded = digits.padStart(3, "0");
  const whole = padded.slice(0, -2).replace(/\B(?=(\d{3})+(?!\d))/g, ",");
  return `${negative ? "-" : ""}${currency} ${whole}.${padded.slice(-2)}`;
}

export function renderInbox(
  container: HTMLElement,
  requests: PendingRequest[],
  pendingIds: Set<string>,
  onAnswer: (requestId: string, response: string) => void,
): void {
  clear(container);
  if (!requests.length) {
    container.append(el("p", { class: "empty" }, "No authorizations waiting."));
    return;
  }
  for (const request of requests) {
    const card = el("div", { class: "card", "data-request-id": request.request_id });
    card.append(el("div", { class: "question" }, request.question));
    card.append(el("div", { class: "meta" },
      `${String(request.context.kind ?? "request")} · seq ${request.created_seq}`));
    const buttons = el("div", { class: "menu" });
    // only the server's closed menu is submittable; no free-form responses
    for (const choice of request.menu) {
      buttons.append(el("button", {
        class: "answer",
        "data-request-id": request.request_id,
        "data-response": choice,
        onclick: () => onAnswer(request.request_id, choice),
      }, choice));
    }
    card.append(buttons);
    if (pendingIds.has(request.request_id)) {
      card.classList.add("pending");
      card.append(el("div", { class: "meta" }, "submitted, awaiting journal"));
    }
    container.append(card);
  }
}

const OBLIGATION_STATUSES = ["", "Scheduled", "Netted", "Due", "Paid",
  "Suspended", "Deferred", "Discharged"];

export function renderObligations(
  container: HTMLElement,
  rows: ObligationRow[],
  filter: string,
  onFilter: (status: string) => void,
): void {
  clear(container);
  const select = el("select", { class: "status-filter" }) as HTMLSelectElement;
  for (const status of OBLIGATION_STATUSES) {
    const option = el("option", { value: status }, status || "all statuses") as HTMLOptionElement;
    if (status === filter) option.setAttribute("selected", "");
    select.append(option);
  }
  select.addEventListener("change", () => onFilter(select.value));
  container.append(el("div", { class: "toolbar" }, "Status: ", select));

  const table = el("table", { class: "grid" });
  table.append(el("tr", {},
    el("th", {}, "id"), el("th", {}, "origin"), el("th", {}, "payer"),
    el("th", {}, "payee"), el("th", {}, "amount"), el("th", {}, "outstanding"),
    el("th", {}, "due"), el("th", {}, "status")));
  for (const row of rows) {
    table.append(el("tr", { "data-obligation-id": row.obligation_id, class: `status-${row.status}` },
      el("td", { class: "mono" }, row.obligation_id.slice(0, 14)),
      el("td", {}, row.origin),
      el("td", {}, row.payer),
      el("td", {}, row.payee),
      el("td", { class: "num" }, formatMoney(row.currency, row.amount)),
      el("td", { class: "num" }, formatMoney(row.currency, row.outstanding)),
      el("td", {}, row.due_date),
      el("td", {}, row.status)));
  }
  container.append(table);
}

export function renderEvents(container: HTMLElement, events: EventRow[], state: EngineState): void {
  clear(container);
  if (!events.length) {
    container.append(el("p", { class: "empty" }, "No event records."));
    return;
  }
  const table = el("table", { class: "grid" });
  table.append(el("tr", {},
    el("th", {}, "id"), el("th", {}, "kind"), el("th", {}, "class"),
    el("th", {}, "affected"), el("th", {}, "status"), el("th", {}, "grace")));
  for (const record of events) {
    // countdown uses the engine's deadline and engine clock only; the grace
    // arithmetic itself is never redone client-side
    let grace = "-";
    if (record.grace_deadline) {
      grace = record.grace_deadline;
      if (state.last_step_date && record.status === "PotentialPendingGrace") {
        const remaining = Math.round(
          (Date.parse(record.grace_deadline) - Date.parse(state.last_step_date)) / 86_400_000);
        grace += ` (${remaining}d left)`;
      }
    }
    table.append(el("tr", { "data-event-id": record.event_id },
      el("td", { class: "mono" }, record.event_id),
      el("td", {}, record.kind),
      el("td", {}, record.class),
      el("td", {}, record.affected_parties.join(", ")),
      el("td", {}, record.status + (record.waived ? " (waived)" : "")),
      el("td", {}, grace)));
  }
  container.append(table);
}

export interface NetView {
  date: string;
  group: string;
  currency: string;
  payer: string | null;
  payee: string | null;
  amount: string;
  constituents: number;
}

export function netsFromJournal(entries: JournalEntry[]): NetView[] {
  const nets: NetView[] = [];
  for (const entry of entries) {
    if (entry.kind !== "settlement" || entry.payload.event !== "netted") continue;
    nets.push({
      date: entry.payload.value_date,
      group: entry.payload.group_id,
      currency: entry.payload.currency,
      payer: entry.payload.payer,
      payee: entry.payload.payee,
      amount: entry.payload.amount.amount,
      constituents: (entry.payload.constituents ?? []).length,
    });
  }
  return nets;
}

export function renderNetting(container: HTMLElement, nets: NetView[]): void {
  clear(container);
  if (!nets.length) {
    container.append(el("p", { class: "empty" }, "No netting runs yet."));
    return;
  }
  const table = el("table", { class: "grid" });
  table.append(el("tr", {},
    el("th", {}, "value date"), el("th", {}, "group"), el("th", {}, "currency"),
    el("th", {}, "payer"), el("th", {}, "payee"), el("th", {}, "net amount"),
    el("th", {}, "gross flows")));
  for (const net of nets) {
    table.append(el("tr", {},
      el("td", {}, net.date),
      el("td", { class: "mono" }, net.group),
      el("td", {}, net.currency),
      el("td", {}, net.payer ?? "(equal aggregates)"),
      el("td", {}, net.payee ?? "-"),
      el("td", { class: "num" }, formatMoney(net.currency, net.amount)),
      el("td", { class: "num" }, String(net.constituents))));
  }
  container.append(table);
}

export function renderJournal(container: HTMLElement, entries: JournalEntry[]): void {
  clear(container);
  const tail = entries.slice(-40).reverse();
  for (const entry of tail) {
    const summary = entry.payload.event ?? entry.payload.command ??
      entry.payload.outcome ?? (entry.payload.datum ? entry.payload.datum.type : entry.kind);
    container.append(el("div", { class: "journal-row", "data-seq": String(entry.seq) },
      el("span", { class: "seq" }, `#${entry.seq}`),
      el("span", { class: `kind kind-${entry.kind}` }, entry.kind),
      el("span", { class: "summary" }, String(summary)),
      el("span", { class: "digest mono" }, entry.digest.slice(0, 10))));
  }
}
