/**
 * Wire protocol types and the view-state reducer.
 *
 * The server is the single source of truth: every pose, speed and control
 * value rendered by the client arrived in a state frame. The reducer is a
 * pure function so message handling can be tested without a socket.
 */

export interface InitMessage {
    type: "init";
    terrain_seed: number;
    assist: boolean;
    mode: "human" | "synthetic";
}

export interface InputMessage {
    type: "input";
    tick: number;
    steer: number;
    pedal: number;
}

export interface TerrainFrame {
    type: "terrain";
    version: number;
    seed: number;
    total_length: number;
    centerline: [number, number][];
    half_width: number[];
    obstacles: [number, number, number][];
}

export interface Contact {
    kind: string;
    classification: string;
    new: boolean;
}

export interface StateFrame {
    type: "state";
    tick: number;
    pose: [number, number, number];
    speed: number;
    raw_ci: [number, number];
    assisted_ci: [number, number];
    applied_ci: [number, number];
    contacts: Contact[];
    latency_ms: Record<string, number>;
    done: boolean;
}

export interface ErrorFrame {
    type: "error";
    msg: string;
}

export type ServerFrame = TerrainFrame | StateFrame | ErrorFrame;

// Trail length: 60 s of positions at 10 Hz.
export const TRAIL_CAP = 600;
// Wall flash duration after a contact, in state frames.
export const FLASH_FRAMES = 5;

export interface ViewState {
    assist: boolean;
    terrain: TerrainFrame | null;
    tick: number;
    pose: [number, number, number] | null;
    speed: number;
    trail: [number, number][];
    rawCi: [number, number];
    assistedCi: [number, number];
    appliedCi: [number, number];
    latency: Record<string, number>;
    crashes: number;
    flashFrames: number;
    done: boolean;
    error: string | null;
    closed: boolean;
}

export function initialView(assist: boolean): ViewState {
    return {
        assist,
        terrain: null,
        tick: -1,
        pose: null,
        speed: 0,
        trail: [],
        rawCi: [0, 0],
        assistedCi: [0, 0],
        appliedCi: [0, 0],
        latency: {},
        crashes: 0,
        flashFrames: 0,
        done: false,
        error: null,
        closed: false,
    };
}

function isPair(v: unknown): v is [number, number] {
    return Array.isArray(v) && v.length === 2 &&
        v.every((x) => typeof x === "number" && Number.isFinite(x));
}

/** Parse one server text frame. Throws on anything malformed. */
export function parseServerFrame(text: string): ServerFrame {
    let msg: unknown;
    try {
        msg = JSON.parse(text);
    } catch (e) {
        throw new Error(`bad JSON from server: ${e}`);
    }
    if (typeof msg !== "object" || msg === null || !("type" in msg)) {
        throw new Error("server frame has no type");
    }
    const frame = msg as Record<string, unknown>;
    switch (frame.type) {
        case "terrain": {
            if (!Array.isArray(frame.centerline) || !Array.isArray(frame.half_width) ||
                !Array.isArray(frame.obstacles) ||
                typeof frame.total_length !== "number") {
                throw new Error("malformed terrain frame");
            }
            return frame as unknown as TerrainFrame;
        }
        case "state": {
            if (typeof frame.tick !== "number" ||
                !Array.isArray(frame.pose) || frame.pose.length !== 3 ||
                typeof frame.speed !== "number" ||
                !isPair(frame.raw_ci) || !isPair(frame.assisted_ci) ||
                !isPair(frame.applied_ci) ||
                !Array.isArray(frame.contacts) ||
                typeof frame.latency_ms !== "object" || frame.latency_ms === null) {
                throw new Error("malformed state frame");
            }
            return frame as unknown as StateFrame;
        }
        case "error": {
            if (typeof frame.msg !== "string") {
                throw new Error("malformed error frame");
            }
            return frame as unknown as ErrorFrame;
        }
        default:
            throw new Error(`unknown frame type ${String(frame.type)}`);
    }
}

/** Fold one parsed frame into the view. Returns a new state, input untouched. */
export function applyFrame(view: ViewState, frame: ServerFrame): ViewState {
    switch (frame.type) {
        case "terrain":
            return { ...view, terrain: frame };
        case "state": {
            const trail = view.trail.concat([[frame.pose[0], frame.pose[1]]]);
            if (trail.length > TRAIL_CAP) {
                trail.splice(0, trail.length - TRAIL_CAP);
            }
            const hit = frame.contacts.some((c) => c.new);
            return {
                ...view,
                tick: frame.tick,
                pose: frame.pose,
                speed: frame.speed,
                trail,
                rawCi: frame.raw_ci,
                assistedCi: frame.assisted_ci,
                appliedCi: frame.applied_ci,
                latency: frame.latency_ms,
                crashes: view.crashes + (hit ? 1 : 0),
                flashFrames: hit ? FLASH_FRAMES : Math.max(0, view.flashFrames - 1),
                done: view.done || frame.done,
            };
        }
        case "error":
            return { ...view, error: frame.msg };
    }
}

/** Parse and fold; malformed text becomes a visible error, never a crash. */
export function reduceMessage(view: ViewState, text: string): ViewState {
    let frame: ServerFrame;
    try {
        frame = parseServerFrame(text);
    } catch (e) {
        return { ...view, error: e instanceof Error ? e.message : String(e) };
    }
    return applyFrame(view, frame);
}
