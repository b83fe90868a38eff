/**
 * Top-down canvas rendering at true scale.
 *
 * World frame: x along the course, y to the left, both in meters. The
 * camera follows the vehicle; canvas y is flipped so +y points up on
 * screen. Geometry helpers are pure so they can be tested headless.
 */

import { TerrainFrame, ViewState } from "./protocol.js";

// Platform footprint, meters.
export const VEHICLE_WIDTH_M = 1.86;
export const VEHICLE_LENGTH_M = 4.5;
export const DEFAULT_SCALE_PX_PER_M = 7;

export type Point = [number, number];

/** Unit normals (left of travel) for each vertex of a polyline. */
function normals(line: Point[]): Point[] {
    const out: Point[] = [];
    for (let i = 0; i < line.length; i++) {
        const a = line[Math.max(0, i - 1)];
        const b = line[Math.min(line.length - 1, i + 1)];
        const dx = b[0] - a[0];
        const dy = b[1] - a[1];
        const len = Math.hypot(dx, dy) || 1;
        out.push([-dy / len, dx / len]);
    }
    return out;
}

export interface Walls {
    left: Point[];
    right: Point[];
}

/** Offset the centerline by +/- half_width along its normals. */
export function wallPolylines(centerline: Point[], halfWidth: number[]): Walls {
    const n = normals(centerline);
    const left: Point[] = [];
    const right: Point[] = [];
    for (let i = 0; i < centerline.length; i++) {
        const [cx, cy] = centerline[i];
        const [nx, ny] = n[i];
        const w = halfWidth[i];
        left.push([cx + nx * w, cy + ny * w]);
        right.push([cx - nx * w, cy - ny * w]);
    }
    return { left, right };
}

/** World-to-canvas transform centered on a followed point. */
export class Camera {
    constructor(public center: Point,
                readonly canvasWidth: number,
                readonly canvasHeight: number,
                readonly scale: number = DEFAULT_SCALE_PX_PER_M) {}

    toCanvas([x, y]: Point): Point {
        return [
            this.canvasWidth / 2 + (x - this.center[0]) * this.scale,
            this.canvasHeight / 2 - (y - this.center[1]) * this.scale,
        ];
    }
}

const COLORS = {
    background: "#101418",
    wall: "#8a9199",
    wallFlash: "#ff5544",
    centerline: "#2a3440",
    obstacle: "#c2703d",
    vehicle: "#58c470",
    vehicleDone: "#ffd24a",
    trail: "#3a7bd5",
    hudText: "#e8eaed",
    rawBar: "#9aa5b1",
    appliedBar: "#58c470",
    barFrame: "#39424d",
};

function drawPolyline(ctx: CanvasRenderingContext2D, cam: Camera, pts: Point[]): void {
    ctx.beginPath();
    pts.forEach((p, i) => {
        const [x, y] = cam.toCanvas(p);
        if (i === 0) {
            ctx.moveTo(x, y);
        } else {
            ctx.lineTo(x, y);
        }
    });
    ctx.stroke();
}

function drawTerrain(ctx: CanvasRenderingContext2D, cam: Camera,
                     terrain: TerrainFrame, flash: boolean): void {
    const walls = wallPolylines(terrain.centerline, terrain.half_width);
    ctx.strokeStyle = COLORS.centerline;
    ctx.setLineDash([4, 8]);
    ctx.lineWidth = 1;
    drawPolyline(ctx, cam, terrain.centerline);
    ctx.setLineDash([]);
    ctx.strokeStyle = flash ? COLORS.wallFlash : COLORS.wall;
    ctx.lineWidth = flash ? 4 : 2;
    drawPolyline(ctx, cam, walls.left);
    drawPolyline(ctx, cam, walls.right);
    ctx.fillStyle = COLORS.obstacle;
    for (const [ox, oy, r] of terrain.obstacles) {
        const [cx, cy] = cam.toCanvas([ox, oy]);
        ctx.beginPath();
        ctx.arc(cx, cy, r * cam.scale, 0, 2 * Math.PI);
        ctx.fill();
    }
}

function drawVehicle(ctx: CanvasRenderingContext2D, cam: Camera,
                     pose: [number, number, number], done: boolean): void {
    const [cx, cy] = cam.toCanvas([pose[0], pose[1]]);
    ctx.save();
    ctx.translate(cx, cy);
    // canvas y is flipped, so a +yaw (left turn) rotates clockwise on screen
    ctx.rotate(-pose[2]);
    const l = VEHICLE_LENGTH_M * cam.scale;
    const w = VEHICLE_WIDTH_M * cam.scale;
    ctx.fillStyle = done ? COLORS.vehicleDone : COLORS.vehicle;
    ctx.fillRect(-l / 2, -w / 2, l, w);
    // nose marker so heading is readable
    ctx.fillStyle = COLORS.background;
    ctx.fillRect(l / 2 - 4, -w / 6, 4, w / 3);
    ctx.restore();
}

function drawBar(ctx: CanvasRenderingContext2D, x: number, y: number,
                 width: number, value: number, color: string, label: string): void {
    const h = 10;
    ctx.strokeStyle = COLORS.barFrame;
    ctx.strokeRect(x, y, width, h);
    ctx.fillStyle = color;
    const mid = x + width / 2;
    const extent = (width / 2) * Math.min(1, Math.max(-1, value));
    ctx.fillRect(Math.min(mid, mid + extent), y + 1, Math.abs(extent), h - 2);
    ctx.fillStyle = COLORS.hudText;
    ctx.fillText(label, x + width + 8, y + h - 1);
}

function drawHud(ctx: CanvasRenderingContext2D, view: ViewState,
                 canvasWidth: number): void {
    ctx.font = "13px system-ui, sans-serif";
    ctx.fillStyle = COLORS.hudText;
    const total = view.latency["total"] ?? 0;
    ctx.fillText(`speed ${view.speed.toFixed(1)} m/s`, 12, 22);
    ctx.fillText(`latency ${total.toFixed(1)} ms`, 12, 40);
    ctx.fillText(`crashes ${view.crashes}`, 12, 58);
    ctx.fillText(`assist ${view.assist ? "on" : "off"}  tick ${view.tick}`, 12, 76);

    const barW = 120;
    const x = canvasWidth - barW - 90;
    drawBar(ctx, x, 12, barW, view.rawCi[0], COLORS.rawBar, "raw steer");
    drawBar(ctx, x, 28, barW, view.appliedCi[0], COLORS.appliedBar, "applied");
    drawBar(ctx, x, 52, barW, view.rawCi[1], COLORS.rawBar, "raw pedal");
    drawBar(ctx, x, 68, barW, view.appliedCi[1], COLORS.appliedBar, "applied");
}

function banner(ctx: CanvasRenderingContext2D, text: string, color: string,
                canvasWidth: number): void {
    ctx.font = "bold 18px system-ui, sans-serif";
    ctx.fillStyle = color;
    ctx.textAlign = "center";
    ctx.fillText(text, canvasWidth / 2, 40);
    ctx.textAlign = "left";
}

/** Draw one complete frame of server-authoritative state. */
export function renderFrame(ctx: CanvasRenderingContext2D, view: ViewState,
                            scale = DEFAULT_SCALE_PX_PER_M): void {
    const { width, height } = ctx.canvas;
    ctx.fillStyle = COLORS.background;
    ctx.fillRect(0, 0, width, height);

    const center: Point = view.pose ? [view.pose[0], view.pose[1]] : [0, 0];
    const cam = new Camera(center, width, height, scale);

    if (view.terrain) {
        drawTerrain(ctx, cam, view.terrain, view.flashFrames > 0);
    }
    if (view.trail.length > 1) {
        ctx.strokeStyle = COLORS.trail;
        ctx.lineWidth = 1;
        drawPolyline(ctx, cam, view.trail);
    }
    if (view.pose) {
        drawVehicle(ctx, cam, view.pose, view.done);
    }
    drawHud(ctx, view, width);

    if (view.error) {
        banner(ctx, `error: ${view.error}`, COLORS.wallFlash, width);
    } else if (view.done) {
        banner(ctx, "course complete", COLORS.vehicleDone, width);
    } else if (view.closed) {
        banner(ctx, "session ended", COLORS.rawBar, width);
    } else if (!view.terrain) {
        banner(ctx, "connecting...", COLORS.rawBar, width);
    }
}
