/** Fixed-interval snapshot polling with a single in-flight request.
 *
 * The next poll is scheduled only after the previous one settles, so a slow
 * backend never stacks requests. Failed polls are counted consecutively and
 * reported, letting the view flag stale data; any success resets the count.
 */

export interface PollerOptions<T> {
  fetchSnapshot: () => Promise<T>;
  onSnapshot: (snapshot: T) => void;
  /** Called with the consecutive-miss count: n >= 1 on failure, 0 on recovery. */
  onMisses?: (consecutive: number) => void;
  isTerminal?: (snapshot: T) => boolean;
  intervalMs?: number;
}

export const DEFAULT_POLL_INTERVAL_MS = 2000;

export class Poller<T> {
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private consecutiveMisses = 0;

  constructor(private readonly options: PollerOptions<T>) {}

  /** Polls immediately, then every interval until terminal or stopped. */
  start(): void {
    this.schedule(0);
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  get misses(): number {
    return this.consecutiveMisses;
  }

  private schedule(delayMs: number): void {
    if (this.stopped) {
      return;
    }
    this.timer = setTimeout(() => {
      void this.tick();
    }, delayMs);
  }

  private async tick(): Promise<void> {
    const interval = this.options.intervalMs ?? DEFAULT_POLL_INTERVAL_MS;
    let snapshot: T;
    try {
      snapshot = await this.options.fetchSnapshot();
    } catch {
      this.consecutiveMisses += 1;
      this.options.onMisses?.(this.consecutiveMisses);
      this.schedule(interval);
      return;
    }
    if (this.consecutiveMisses > 0) {
      this.consecutiveMisses = 0;
      this.options.onMisses?.(0);
    }
    this.options.onSnapshot(snapshot);
    if (this.options.isTerminal?.(snapshot)) {
      this.stop();
      return;
    }
    this.schedule(interval);
  }
}
