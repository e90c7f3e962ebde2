/**
 * Client-side validation of the observation ingestion schema, mirroring what
 * the engine accepts: {kind, level?, party?, amount?, currency?, source,
 * transaction_ids?}. Validation runs before submission so schema errors never
 * leave the browser.
 */

export const OBSERVATION_KINDS = [
  "FailureToPayOrDeliver",
  "CreditSupportDefault",
  "CrossDefault",
  "Bankruptcy",
  "Illegality",
  "ForceMajeure",
  "CreditEventUponMerger",
] as const;

export const LEVELS = ["Transaction", "Relationship", "ThirdParty", "Exterior"] as const;
export const SOURCES = ["Oracle", "PartyNotice", "OnPlatform"] as const;

export interface ObservationForm {
  kind: string;
  source: string;
  party?: string;
  level?: string;
  amount?: string;
  currency?: string;
  transaction_ids?: string;
  affected_both?: boolean;
}

export interface ValidationResult {
  ok: boolean;
  errors: string[];
  datum?: Record<string, unknown>;
}

export function validateObservation(form: ObservationForm, parties: string[]): ValidationResult {
  const errors: string[] = [];
  if (!form.kind) {
    errors.push("kind is required");
  }
  if (!form.source || !SOURCES.includes(form.source as any)) {
    errors.push("source must be one of " + SOURCES.join(", "));
  }
  if (form.level && !LEVELS.includes(form.level as any)) {
    errors.push("level must be one of " + LEVELS.join(", "));
  }
  if (form.party && !parties.includes(form.party) && form.kind !== "CrossDefault") {
    // third-party debtors are allowed for cross-default observations
    errors.push(`party must be one of ${parties.join(", ")}`);
  }
  if (form.kind === "CrossDefault") {
    if (!form.amount || !/^\d+$/.test(form.amount)) {
      errors.push("cross-default observations need an integer amount in minor units");
    }
    if (!form.currency || !/^[A-Z]{3}$/.test(form.currency)) {
      errors.push("cross-default observations need a 3-letter currency code");
    }
  } else if (form.amount && !/^\d+$/.test(form.amount)) {
    errors.push("amount must be an integer in minor units");
  }
  if (errors.length) {
    return { ok: false, errors };
  }
  const datum: Record<string, unknown> = { kind: form.kind, source: form.source };
  if (form.party) datum.party = form.party;
  if (form.level) datum.level = form.level;
  if (form.amount) datum.amount = form.amount;
  if (form.currency) datum.currency = form.currency;
  if (form.affected_both) datum.affected = "both";
  const transactions = (form.transaction_ids ?? "")
    .split(",")
    .map((t) => t.trim())
    .filter(Boolean);
  if (transactions.length) datum.transaction_ids = transactions;
  return { ok: true, errors: [], datum };
}

/** The confirmation phrase the control panel demands before stopping. */
export const STOP_PHRASE = "stop automatic performance";
