/**
 * Session entry point: URL config, websocket handshake, the 10 Hz input
 * loop, and the render loop. No physics happens here; the client only
 * samples the driver and draws what the server reports.
 */

import { CadenceMonitor, TickScheduler, TICK_MS } from "./cadence.js";
import { gamepadSample, KeyboardInput, DEFAULT_DECAY_PER_S,
         DEFAULT_SLEW_PER_S } from "./input.js";
import { initialView, InitMessage, reduceMessage, ViewState } from "./protocol.js";
import { DEFAULT_SCALE_PX_PER_M, renderFrame } from "./render.js";

interface PageConfig {
    server: string;
    seed: number;
    assist: boolean;
    mode: "human" | "synthetic";
    slew: number;
    decay: number;
    scale: number;
}

function readConfig(): PageConfig {
    const q = new URLSearchParams(window.location.search);
    const num = (key: string, fallback: number) => {
        const raw = q.get(key);
        const v = raw === null ? NaN : Number(raw);
        return Number.isFinite(v) ? v : fallback;
    };
    return {
        server: q.get("server") ?? window.location.host,
        seed: Math.trunc(num("seed", 1)),
        assist: q.get("assist") === "1" || q.get("assist") === "true",
        mode: q.get("mode") === "synthetic" ? "synthetic" : "human",
        slew: num("slew", DEFAULT_SLEW_PER_S),
        decay: num("decay", DEFAULT_DECAY_PER_S),
        scale: num("scale", DEFAULT_SCALE_PX_PER_M),
    };
}

class Session {
    view: ViewState;
    private readonly ws: WebSocket;
    private readonly scheduler = new TickScheduler(TICK_MS);
    private readonly monitor = new CadenceMonitor(TICK_MS);
    private timer: number | null = null;
    private tick = 0;

    constructor(cfg: PageConfig, private readonly keyboard: KeyboardInput) {
        this.view = initialView(cfg.assist);
        this.ws = new WebSocket(`ws://${cfg.server}/ws`);
        this.ws.onopen = () => {
            const init: InitMessage = {
                type: "init",
                terrain_seed: cfg.seed,
                assist: cfg.assist,
                mode: cfg.mode,
            };
            this.ws.send(JSON.stringify(init));
            this.startLoop();
        };
        this.ws.onmessage = (ev) => {
            this.view = reduceMessage(this.view, String(ev.data));
        };
        this.ws.onclose = () => {
            this.view = { ...this.view, closed: true };
            this.stopLoop();
        };
    }

    /** Drift-free 100 ms sampler; setTimeout against absolute deadlines. */
    private startLoop(): void {
        this.scheduler.begin(performance.now());
        const fire = () => {
            const now = performance.now();
            this.sendInput();
            this.monitor.record(now);
            const delay = this.scheduler.advance(now);
            this.timer = window.setTimeout(fire, delay);
        };
        this.timer = window.setTimeout(fire, this.scheduler.periodMs);
    }

    private stopLoop(): void {
        if (this.timer !== null) {
            window.clearTimeout(this.timer);
            this.timer = null;
        }
    }

    private sendInput(): void {
        if (this.ws.readyState !== WebSocket.OPEN || this.view.done ||
            this.view.error !== null) {
            return;
        }
        const keys = this.keyboard.update(TICK_MS / 1000);
        const pad = gamepadSample(navigator.getGamepads?.()[0]);
        const sample = pad && (pad.steer !== 0 || pad.pedal !== 0) ? pad : keys;
        this.ws.send(JSON.stringify({
            type: "input",
            tick: this.tick++,
            steer: sample.steer,
            pedal: sample.pedal,
        }));
    }

    cadenceMs(): number {
        return this.monitor.deviationMs();
    }

    close(): void {
        this.stopLoop();
        this.ws.onclose = null;
        this.ws.close();
    }
}

function start(): void {
    const canvas = document.getElementById("view") as HTMLCanvasElement;
    const ctx = canvas.getContext("2d");
    if (!ctx) {
        throw new Error("no 2d canvas context");
    }
    const toggle = document.getElementById("assist-toggle") as HTMLButtonElement;
    const cadenceLabel = document.getElementById("cadence") as HTMLElement;

    let cfg = readConfig();
    const keyboard = new KeyboardInput(cfg.slew, cfg.decay);
    keyboard.attach(window);
    let session = new Session(cfg, keyboard);

    const syncToggle = () => {
        toggle.textContent = `assist: ${cfg.assist ? "on" : "off"}`;
        toggle.classList.toggle("on", cfg.assist);
    };
    syncToggle();

    // toggling assist starts a fresh session on the same terrain
    toggle.addEventListener("click", () => {
        toggle.blur();
        cfg = { ...cfg, assist: !cfg.assist };
        const q = new URLSearchParams(window.location.search);
        q.set("assist", cfg.assist ? "1" : "0");
        history.replaceState(null, "", `?${q}`);
        session.close();
        session = new Session(cfg, keyboard);
        syncToggle();
    });

    const draw = () => {
        renderFrame(ctx, session.view, cfg.scale);
        cadenceLabel.textContent = `cadence ±${session.cadenceMs().toFixed(0)} ms`;
        requestAnimationFrame(draw);
    };
    requestAnimationFrame(draw);
}

start();
