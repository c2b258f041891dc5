/** Pure HTML renderers: view-model in, markup string out. */

import type {
  CompanyEntry,
  ConsoleViewModel,
  EpistemicState,
  RunRecord,
  RunState,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** The service reports a queued run; analysts see it as pending. */
export function runStateLabel(state: RunState): string {
  return state === "Queued" ? "Pending" : state;
}

export const BADGE_LABELS: Record<EpistemicState, string> = {
  "registry-verified": "Registry-Verified",
  "third-party": "Third-Party Approximation",
  "not-found": "Not Found",
};

export function renderCompanyOptions(companies: CompanyEntry[]): string {
  return companies
    .map(
      (company) =>
        `<option value="${escapeHtml(company.company_id)}">` +
        `${escapeHtml(company.name)} — ${escapeHtml(company.sector)}</option>`,
    )
    .join("");
}

export function renderFormError(message: string | null): string {
  if (message === null) {
    return "";
  }
  return `<p class="form-error" role="alert">${escapeHtml(message)}</p>`;
}

export function renderRunHeader(record: RunRecord, stale: boolean): string {
  const label = runStateLabel(record.state);
  const staleFlag = stale
    ? '<span class="stale-flag">connection lost — showing the last snapshot</span>'
    : "";
  const error = record.error
    ? `<p class="run-error">${escapeHtml(record.error)}</p>`
    : "";
  return (
    `<div class="run-header">` +
    `<span class="run-state run-state--${label.toLowerCase()}">${label}</span>` +
    `<span class="run-company">${escapeHtml(record.company_id)}</span>` +
    `<span class="run-id">${escapeHtml(record.run_id)}</span>` +
    staleFlag +
    `</div>` +
    error
  );
}

/** One state-colored row per node; skipped and failed rows show why. */
export function renderStatusTable(record: RunRecord): string {
  const notes = record.node_notes ?? {};
  const rows = Object.entries(record.node_statuses)
    .map(([nodeId, state]) => {
      const note = notes[nodeId];
      const cause =
        note && (state === "Skipped" || state === "Failed")
          ? `<span class="node-note">${escapeHtml(note)}</span>`
          : "";
      return (
        `<tr class="node-row node-row--${state.toLowerCase()}">` +
        `<td class="node-id">${escapeHtml(nodeId)}</td>` +
        `<td class="node-state">${escapeHtml(state)}${cause}</td>` +
        `</tr>`
      );
    })
    .join("");
  return `<table class="node-table"><tbody>${rows}</tbody></table>`;
}

export function renderBadge(state: EpistemicState | null): string {
  if (state === null) {
    return "";
  }
  return (
    `<span class="badge badge--${state}" data-epistemic-state="${state}">` +
    `${BADGE_LABELS[state]}</span>`
  );
}

export function renderRunView(vm: ConsoleViewModel): string {
  if (vm.activeRun === null) {
    return "";
  }
  const report =
    vm.reportHtml !== null
      ? `<section class="report">${renderBadge(vm.epistemicState)}` +
        `<div class="report-body">${vm.reportHtml}</div></section>`
      : "";
  const reportError = vm.reportError
    ? `<p class="run-error">${escapeHtml(vm.reportError)}</p>`
    : "";
  return (
    renderRunHeader(vm.activeRun, vm.stale) +
    renderStatusTable(vm.activeRun) +
    reportError +
    report
  );
}
