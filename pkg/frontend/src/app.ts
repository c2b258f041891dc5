/** Console controller: form submission, run polling, report loading.
 *
 * Holds the view model and calls `render` after every change; it never
 * touches the DOM itself, so the whole flow is testable against a mock or
 * live backend. All server interaction goes through the typed API client.
 */

import type { RunApi } from "./api.js";
import { DEFAULT_POLL_INTERVAL_MS, Poller } from "./poller.js";
import { extractEpistemicState, sanitizeReportHtml } from "./sanitize.js";
import { emptyViewModel, type ConsoleViewModel, type RunRecord } from "./types.js";

export interface ConsoleAppOptions {
  api: RunApi;
  render: (vm: ConsoleViewModel) => void;
  pollIntervalMs?: number;
  /** Consecutive failed polls before the view is flagged stale. */
  staleAfterMisses?: number;
}

export class ConsoleApp {
  readonly vm: ConsoleViewModel = emptyViewModel();
  private poller: Poller<RunRecord> | null = null;

  constructor(private readonly options: ConsoleAppOptions) {}

  async loadCompanies(): Promise<void> {
    try {
      this.vm.companies = await this.options.api.listCompanies();
      this.vm.formError = null;
    } catch (cause) {
      this.vm.formError = errorMessage(cause);
    }
    this.publish();
  }

  /** Returns true when the run was accepted and the run view is polling. */
  async submitTrigger(companyId: string, analystEmail: string): Promise<boolean> {
    if (!companyId.trim() || !analystEmail.trim()) {
      this.vm.formError = "Select a company and enter your email.";
      this.publish();
      return false;
    }
    let runId: string;
    try {
      runId = await this.options.api.triggerRun(companyId, analystEmail);
    } catch (cause) {
      this.vm.formError = errorMessage(cause);
      this.publish();
      return false;
    }
    this.vm.formError = null;
    this.watch(runId);
    return true;
  }

  /** Poll one run at a fixed interval until it settles. */
  watch(runId: string): void {
    this.poller?.stop();
    this.vm.activeRun = null;
    this.vm.reportHtml = null;
    this.vm.epistemicState = null;
    this.vm.reportError = null;
    this.vm.stale = false;
    this.publish();

    const staleAfter = this.options.staleAfterMisses ?? 3;
    this.poller = new Poller<RunRecord>({
      intervalMs: this.options.pollIntervalMs ?? DEFAULT_POLL_INTERVAL_MS,
      fetchSnapshot: () => this.options.api.getRun(runId),
      onSnapshot: (record) => {
        this.vm.activeRun = record;
        this.publish();
        if (record.state === "Succeeded") {
          void this.loadReport(record.run_id);
        }
      },
      onMisses: (consecutive) => {
        this.vm.stale = consecutive >= staleAfter;
        this.publish();
      },
      isTerminal: (record) =>
        record.state === "Succeeded" || record.state === "Failed",
    });
    this.poller.start();
  }

  stop(): void {
    this.poller?.stop();
  }

  private async loadReport(runId: string): Promise<void> {
    try {
      const document = await this.options.api.getReportHtml(runId);
      this.vm.reportHtml = sanitizeReportHtml(document);
      this.vm.epistemicState = extractEpistemicState(document);
      this.vm.reportError = null;
    } catch (cause) {
      this.vm.reportError = errorMessage(cause);
    }
    this.publish();
  }

  private publish(): void {
    this.options.render(this.vm);
  }
}

function errorMessage(cause: unknown): string {
  return cause instanceof Error ? cause.message : String(cause);
}
