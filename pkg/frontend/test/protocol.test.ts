import { describe, expect, it } from "vitest";

import { applyFrame, initialView, parseServerFrame, reduceMessage, StateFrame,
         TerrainFrame, TRAIL_CAP } from "../src/protocol.js";

function terrainFrame(): TerrainFrame {
    return {
        type: "terrain",
        version: 1,
        seed: 7,
        total_length: 300,
        centerline: [[0, 0], [2, 0], [4, 0]],
        half_width: [6, 6, 6],
        obstacles: [[50, 1, 0.8]],
    };
}

function stateFrame(tick: number, over: Partial<StateFrame> = {}): StateFrame {
    return {
        type: "state",
        tick,
        pose: [tick * 1.5, 0.2, 0.01],
        speed: 8.5,
        raw_ci: [0.3, 0.9],
        assisted_ci: [0.1, 0.8],
        applied_ci: [0.14, 0.82],
        contacts: [],
        latency_ms: { total: 4.2, inference: 0.3 },
        done: false,
        ...over,
    };
}

describe("parseServerFrame", () => {
    it("round-trips the three frame kinds", () => {
        expect(parseServerFrame(JSON.stringify(terrainFrame())).type).toBe("terrain");
        expect(parseServerFrame(JSON.stringify(stateFrame(0))).type).toBe("state");
        expect(parseServerFrame('{"type":"error","msg":"nope"}').type).toBe("error");
    });

    it("rejects bad JSON", () => {
        expect(() => parseServerFrame("{oops")).toThrow(/bad JSON/);
    });

    it("rejects unknown frame types", () => {
        expect(() => parseServerFrame('{"type":"telemetry"}')).toThrow(/unknown/);
    });

    it("rejects a state frame with missing fields", () => {
        const bad = { ...stateFrame(1) } as Record<string, unknown>;
        delete bad.pose;
        expect(() => parseServerFrame(JSON.stringify(bad))).toThrow(/malformed/);
    });

    it("rejects non-numeric control pairs", () => {
        const bad = stateFrame(1, { raw_ci: ["a", 0] as unknown as [number, number] });
        expect(() => parseServerFrame(JSON.stringify(bad))).toThrow(/malformed/);
    });
});

describe("applyFrame", () => {
    it("stores the terrain", () => {
        const v = applyFrame(initialView(false), terrainFrame());
        expect(v.terrain?.centerline.length).toBe(3);
        expect(v.terrain?.total_length).toBe(300);
    });

    it("copies pose, speed and all three control pairs from a state frame", () => {
        const v = applyFrame(initialView(true), stateFrame(3));
        expect(v.tick).toBe(3);
        expect(v.pose).toEqual([4.5, 0.2, 0.01]);
        expect(v.speed).toBe(8.5);
        expect(v.rawCi).toEqual([0.3, 0.9]);
        expect(v.assistedCi).toEqual([0.1, 0.8]);
        expect(v.appliedCi).toEqual([0.14, 0.82]);
        expect(v.latency.total).toBe(4.2);
    });

    it("does not mutate the previous view", () => {
        const before = initialView(false);
        applyFrame(before, stateFrame(0));
        expect(before.tick).toBe(-1);
        expect(before.trail.length).toBe(0);
    });

    it("mirrors the assist-off contract: applied equals raw when served so", () => {
        const frame = stateFrame(0, { raw_ci: [0.4, -0.2], applied_ci: [0.4, -0.2] });
        const v = applyFrame(initialView(false), frame);
        expect(v.appliedCi).toEqual(v.rawCi);
    });

    it("grows the trail one position per state frame, capped", () => {
        let v = initialView(false);
        for (let t = 0; t < TRAIL_CAP + 5; t++) {
            v = applyFrame(v, stateFrame(t));
        }
        expect(v.trail.length).toBe(TRAIL_CAP);
        // oldest retained position belongs to tick 5
        expect(v.trail[0][0]).toBeCloseTo(5 * 1.5, 12);
    });

    it("counts one crash per frame bearing a new contact", () => {
        const hit = [
            { kind: "wall", classification: "side", new: true },
            { kind: "wall", classification: "side", new: true },
        ];
        let v = applyFrame(initialView(false), stateFrame(0, { contacts: hit }));
        expect(v.crashes).toBe(1);
        const lingering = [{ kind: "wall", classification: "side", new: false }];
        v = applyFrame(v, stateFrame(1, { contacts: lingering }));
        expect(v.crashes).toBe(1);
        v = applyFrame(v, stateFrame(2, { contacts: hit }));
        expect(v.crashes).toBe(2);
    });

    it("starts the wall flash on contact and fades it afterwards", () => {
        const hit = [{ kind: "wall", classification: "frontal", new: true }];
        let v = applyFrame(initialView(false), stateFrame(0, { contacts: hit }));
        expect(v.flashFrames).toBeGreaterThan(0);
        const flash = v.flashFrames;
        v = applyFrame(v, stateFrame(1));
        expect(v.flashFrames).toBe(flash - 1);
    });

    it("latches done once reported", () => {
        let v = applyFrame(initialView(false), stateFrame(0, { done: true }));
        v = applyFrame(v, stateFrame(1));
        expect(v.done).toBe(true);
    });

    it("surfaces error frames", () => {
        const v = applyFrame(initialView(false),
                             { type: "error", msg: "checkpoint missing" });
        expect(v.error).toBe("checkpoint missing");
    });
});

describe("reduceMessage", () => {
    it("turns malformed text into a visible error without crashing", () => {
        const before = applyFrame(initialView(false), stateFrame(2));
        const v = reduceMessage(before, "garbage{{");
        expect(v.error).toMatch(/bad JSON/);
        expect(v.pose).toEqual(before.pose);
        expect(v.tick).toBe(2);
    });

    it("applies well-formed frames", () => {
        const v = reduceMessage(initialView(false), JSON.stringify(stateFrame(9)));
        expect(v.tick).toBe(9);
        expect(v.error).toBeNull();
    });
});
