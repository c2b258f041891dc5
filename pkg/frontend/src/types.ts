/** Wire types mirroring the service's documented HTTP API. */

export type RunState = "Queued" | "Running" | "Succeeded" | "Failed";

export type NodeState =
  | "Pending"
  | "Ready"
  | "Running"
  | "Succeeded"
  | "Failed"
  | "Skipped";

export interface CompanyEntry {
  company_id: string;
  name: string;
  sector: string;
  headquarters: string;
  has_registry_number: boolean;
}

export interface RunRecord {
  run_id: string;
  company_id: string;
  requested_by: string;
  requested_at: string;
  state: RunState;
  node_statuses: Record<string, string>;
  node_notes?: Record<string, string>;
  report_path?: string | null;
  undelivered?: boolean;
  error?: string | null;
}

/** The provenance class the report declares for its financial section. */
export type EpistemicState = "registry-verified" | "third-party" | "not-found";

/** Everything the console renders from. */
export interface ConsoleViewModel {
  companies: CompanyEntry[];
  activeRun: RunRecord | null;
  /** Sanitized report document, present once the run has succeeded. */
  reportHtml: string | null;
  /** Badge derived from the report's data-state marker. */
  epistemicState: EpistemicState | null;
  /** Set after three consecutive failed polls: the view may be outdated. */
  stale: boolean;
  /** Inline error shown on the trigger form; the form stays usable. */
  formError: string | null;
  /** Error fetching the finished report, shown in the run view. */
  reportError: string | null;
}

export function emptyViewModel(): ConsoleViewModel {
  return {
    companies: [],
    activeRun: null,
    reportHtml: null,
    epistemicState: null,
    stale: false,
    formError: null,
    reportError: null,
  };
}
