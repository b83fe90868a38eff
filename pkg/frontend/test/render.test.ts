import { describe, expect, it } from "vitest";

import { Camera, Point, VEHICLE_LENGTH_M, VEHICLE_WIDTH_M,
         wallPolylines } from "../src/render.js";

describe("wallPolylines", () => {
    it("offsets a straight centerline by the half width on both sides", () => {
        const center: Point[] = [[0, 0], [2, 0], [4, 0], [6, 0]];
        const { left, right } = wallPolylines(center, [6, 6, 6, 6]);
        for (let i = 0; i < center.length; i++) {
            expect(left[i][0]).toBeCloseTo(center[i][0], 12);
            expect(left[i][1]).toBeCloseTo(6, 12);
            expect(right[i][1]).toBeCloseTo(-6, 12);
        }
    });

    it("keeps each wall exactly half_width from a curved centerline", () => {
        const center: Point[] = [];
        for (let i = 0; i < 30; i++) {
            const s = i * 0.5;
            center.push([s, Math.sin(s * 0.4) * 3]);
        }
        const widths = center.map((_, i) => 4 + 0.05 * i);
        const { left, right } = wallPolylines(center, widths);
        for (let i = 0; i < center.length; i++) {
            const dl = Math.hypot(left[i][0] - center[i][0], left[i][1] - center[i][1]);
            const dr = Math.hypot(right[i][0] - center[i][0], right[i][1] - center[i][1]);
            expect(dl).toBeCloseTo(widths[i], 9);
            expect(dr).toBeCloseTo(widths[i], 9);
        }
    });

    it("puts the left wall on the left of travel", () => {
        // heading +x: left of travel is +y
        const { left, right } = wallPolylines([[0, 0], [10, 0]], [2, 2]);
        expect(left[0][1]).toBeGreaterThan(0);
        expect(right[0][1]).toBeLessThan(0);
    });
});

describe("Camera", () => {
    it("maps the followed point to the canvas center", () => {
        const cam = new Camera([10, 5], 960, 540, 7);
        expect(cam.toCanvas([10, 5])).toEqual([480, 270]);
    });

    it("scales meters to pixels and flips y so +y points up", () => {
        const cam = new Camera([10, 5], 960, 540, 7);
        expect(cam.toCanvas([11, 5])).toEqual([487, 270]);
        expect(cam.toCanvas([10, 6])).toEqual([480, 263]);
    });
});

describe("vehicle footprint", () => {
    it("uses the platform's true dimensions", () => {
        expect(VEHICLE_WIDTH_M).toBe(1.86);
        expect(VEHICLE_LENGTH_M).toBe(4.5);
    });
});
