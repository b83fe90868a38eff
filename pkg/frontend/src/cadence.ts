/**
 * Fixed 100 ms input cadence.
 *
 * Deadlines are start + n * period rather than "last fire + period", so
 * per-callback lateness never accumulates: spacing stays within tolerance
 * over arbitrarily long sessions as long as each fire lands inside the
 * jitter budget.
 */

export const TICK_MS = 100;
export const SPACING_TOLERANCE_MS = 20;

export class TickScheduler {
    private startMs = 0;
    private count = 0;

    constructor(readonly periodMs: number = TICK_MS) {}

    begin(nowMs: number): void {
        this.startMs = nowMs;
        this.count = 0;
    }

    /** Absolute deadline of the next tick. */
    nextDeadline(): number {
        return this.startMs + (this.count + 1) * this.periodMs;
    }

    /** Record a fire and return the delay to schedule the following one. */
    advance(nowMs: number): number {
        this.count += 1;
        return Math.max(0, this.startMs + (this.count + 1) * this.periodMs - nowMs);
    }

    get ticks(): number {
        return this.count;
    }
}

/** Gaps between consecutive timestamps. */
export function spacings(timesMs: number[]): number[] {
    const out: number[] = [];
    for (let i = 1; i < timesMs.length; i++) {
        out.push(timesMs[i] - timesMs[i - 1]);
    }
    return out;
}

/**
 * Worst |gap - period| over consecutive timestamps. Every gap sits inside
 * some 10 s window, so bounding all gaps bounds every window too. Returns 0
 * with fewer than two samples.
 */
export function maxSpacingDeviation(timesMs: number[], periodMs = TICK_MS): number {
    let worst = 0;
    for (let i = 1; i < timesMs.length; i++) {
        worst = Math.max(worst, Math.abs(timesMs[i] - timesMs[i - 1] - periodMs));
    }
    return worst;
}

/** Rolling cadence health for the HUD: spacing deviation over the last 10 s. */
export class CadenceMonitor {
    private readonly times: number[] = [];

    constructor(readonly periodMs: number = TICK_MS,
                readonly windowMs: number = 10_000) {}

    record(nowMs: number): void {
        this.times.push(nowMs);
        const cutoff = nowMs - this.windowMs;
        while (this.times.length > 2 && this.times[0] < cutoff) {
            this.times.shift();
        }
    }

    deviationMs(): number {
        return maxSpacingDeviation(this.times, this.periodMs);
    }

    withinTolerance(tolMs = SPACING_TOLERANCE_MS): boolean {
        return this.deviationMs() <= tolMs;
    }
}
