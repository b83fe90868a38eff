/**
 * Driver input: held-key tracking with a slew-rate ramp standing in for a
 * wheel, plus gamepad axis passthrough behind a deadzone.
 *
 * All state advances in update(dt) calls driven by the tick loop, so the
 * classes are plain and testable; attach() is the only DOM-facing part.
 */

export const GAMEPAD_DEADZONE = 0.05;
export const DEFAULT_SLEW_PER_S = 2.0;
export const DEFAULT_DECAY_PER_S = 4.0;

export interface AxisConfig {
    negative: string[];
    positive: string[];
    slewPerSecond: number;
    decayPerSecond: number;
}

function clamp(v: number): number {
    return Math.min(1, Math.max(-1, v));
}

/** One axis that ramps toward the held direction and decays to 0 otherwise. */
export class RampedAxis {
    private value = 0;

    constructor(private readonly cfg: AxisConfig) {}

    update(down: ReadonlySet<string>, dt: number): number {
        const neg = this.cfg.negative.some((code) => down.has(code));
        const pos = this.cfg.positive.some((code) => down.has(code));
        const target = (pos ? 1 : 0) - (neg ? 1 : 0);
        if (target !== 0) {
            this.value = clamp(this.value + target * this.cfg.slewPerSecond * dt);
        } else if (this.value !== 0) {
            const step = this.cfg.decayPerSecond * dt;
            // snap to exactly 0 instead of oscillating around it
            this.value = Math.abs(this.value) <= step
                ? 0
                : this.value - Math.sign(this.value) * step;
        }
        return this.value;
    }

    get current(): number {
        return this.value;
    }

    reset(): void {
        this.value = 0;
    }
}

export interface ControlSample {
    steer: number;
    pedal: number;
}

export class KeyboardInput {
    private readonly down = new Set<string>();
    readonly steer: RampedAxis;
    readonly pedal: RampedAxis;

    constructor(slewPerSecond = DEFAULT_SLEW_PER_S,
                decayPerSecond = DEFAULT_DECAY_PER_S) {
        this.steer = new RampedAxis({
            negative: ["ArrowRight", "KeyD"],
            positive: ["ArrowLeft", "KeyA"],
            slewPerSecond,
            decayPerSecond,
        });
        this.pedal = new RampedAxis({
            negative: ["ArrowDown", "KeyS"],
            positive: ["ArrowUp", "KeyW"],
            slewPerSecond,
            decayPerSecond,
        });
    }

    press(code: string): void {
        this.down.add(code);
    }

    release(code: string): void {
        this.down.delete(code);
    }

    /** Losing focus must not leave a key stuck down. */
    clear(): void {
        this.down.clear();
    }

    update(dt: number): ControlSample {
        return {
            steer: this.steer.update(this.down, dt),
            pedal: this.pedal.update(this.down, dt),
        };
    }

    attach(target: Window): void {
        target.addEventListener("keydown", (ev) => {
            if (!ev.repeat) {
                this.press(ev.code);
            }
        });
        target.addEventListener("keyup", (ev) => this.release(ev.code));
        target.addEventListener("blur", () => this.clear());
    }
}

export function applyDeadzone(axis: number, deadzone = GAMEPAD_DEADZONE): number {
    return Math.abs(axis) < deadzone ? 0 : clamp(axis);
}

/**
 * Read steer/pedal from a gamepad: left stick X steers (left = positive
 * steering), stick Y drives (up = forward). Returns null with no pad.
 */
export function gamepadSample(pad: Gamepad | null | undefined): ControlSample | null {
    if (!pad || pad.axes.length < 2) {
        return null;
    }
    return {
        steer: applyDeadzone(-pad.axes[0]),
        pedal: applyDeadzone(-pad.axes[1]),
    };
}
