"""WebSocket assistance endpoint and static file host.

One session per connection: the client sends an init message, receives
the terrain, then exchanges one input frame per 100 ms tick for one
state frame. All numbers travel as JSON text frames.
"""

import json
import os
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from ..model import ParamVector, load_checkpoint
from ..sim import generate_terrain, terrain_to_dict
from .session import DriveSession, LatencyAccumulator

PORT_ENV = "DRIVEDAE_PORT"
CKPT_ENV = "DRIVEDAE_CKPT"
DEFAULT_PORT = 8700
DEFAULT_LENGTH_M = 1200.0
END_MARGIN_M = 20.0
MAX_TICKS = 36000


class ProtocolError(Exception):
    pass


def _parse_init(text: str) -> dict:
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"bad JSON: {e}") from e
    if not isinstance(msg, dict) or msg.get("type") != "init":
        raise ProtocolError("first message must have type 'init'")
    if "terrain_seed" not in msg:
        raise ProtocolError("init needs terrain_seed")
    seed = msg["terrain_seed"]
    if not isinstance(seed, int):
        raise ProtocolError("terrain_seed must be an integer")
    assist = msg.get("assist", False)
    if not isinstance(assist, bool):
        raise ProtocolError("assist must be a boolean")
    mode = msg.get("mode", "human")
    if mode not in ("human", "synthetic"):
        raise ProtocolError(f"unknown mode {mode!r}")
    return {"terrain_seed": seed, "assist": assist, "mode": mode}


def _parse_input(text: str) -> dict:
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"bad JSON: {e}") from e
    if not isinstance(msg, dict) or msg.get("type") != "input":
        raise ProtocolError("expected an input message")
    try:
        tick = int(msg["tick"])
        steer = float(msg["steer"])
        pedal = float(msg["pedal"])
    except (KeyError, TypeError, ValueError) as e:
        raise ProtocolError(f"input needs numeric tick, steer, pedal: {e}") from e
    if not (np.isfinite(steer) and np.isfinite(pedal)):
        raise ProtocolError("steer and pedal must be finite")
    if abs(steer) > 1.0 or abs(pedal) > 1.0:
        raise ProtocolError("steer and pedal must lie in [-1, 1]")
    return {"tick": tick, "steer": steer, "pedal": pedal}


def _state_frame(rec, latency_ms: dict, done: bool) -> dict:
    new_event = rec.event is not None
    contacts = [
        {"kind": c.kind, "classification": c.classification, "new": new_event}
        for c in rec.contacts
    ]
    return {
        "type": "state",
        "tick": rec.tick,
        "pose": [float(rec.state.position[0]), float(rec.state.position[1]),
                 float(rec.state.yaw)],
        "speed": float(rec.state.speed),
        "raw_ci": [float(v) for v in rec.raw_ci],
        "assisted_ci": [float(v) for v in rec.assisted_ci],
        "applied_ci": [float(v) for v in rec.applied_ci],
        "contacts": contacts,
        "latency_ms": latency_ms,
        "done": done,
    }


def create_app(ckpt_path: str | None = None, static_dir: str | None = None) -> FastAPI:
    app = FastAPI()
    app.state.params = load_checkpoint(ckpt_path) if ckpt_path else None

    @app.websocket("/ws")
    async def ws_session(ws: WebSocket):
        await ws.accept()
        try:
            cfg = _parse_init(await ws.receive_text())
        except ProtocolError as e:
            await ws.send_text(json.dumps({"type": "error", "msg": str(e)}))
            await ws.close()
            return

        params: ParamVector | None = app.state.params
        if cfg["assist"] and params is None:
            await ws.send_text(json.dumps(
                {"type": "error", "msg": "no checkpoint loaded; assist unavailable"}))
            await ws.close()
            return

        terrain = generate_terrain(cfg["terrain_seed"], length_m=DEFAULT_LENGTH_M)
        session = DriveSession(terrain, params=params if cfg["assist"] else None,
                               assist=cfg["assist"])
        driver = None
        if cfg["mode"] == "synthetic":
            from ..evaluate import EVAL_NOISE
            from ..drivers import UnskilledDriver
            rng = np.random.default_rng(cfg["terrain_seed"])
            driver = UnskilledDriver(terrain, EVAL_NOISE, rng=rng)

        await ws.send_text(json.dumps(
            {"type": "terrain", **terrain_to_dict(terrain)}))

        acc = LatencyAccumulator()
        end_station = terrain.total_length - END_MARGIN_M
        prev_send_ms = 0.0
        try:
            for _ in range(MAX_TICKS):
                t_recv0 = time.perf_counter()
                text = await ws.receive_text()
                t_recv1 = time.perf_counter()
                msg = _parse_input(text)
                steer, pedal = msg["steer"], msg["pedal"]
                if driver is not None:
                    steer, pedal = driver.control(session.state)
                rec = session.tick(steer, pedal)
                done = rec.state.station >= end_station
                latency = dict(rec.stage_ms)
                latency["receive"] = (t_recv1 - t_recv0) * 1e3
                latency["send"] = prev_send_ms
                latency["total"] = sum(latency.values())
                t_send0 = time.perf_counter()
                await ws.send_text(json.dumps(_state_frame(rec, latency, done)))
                prev_send_ms = (time.perf_counter() - t_send0) * 1e3
                acc.add({**rec.stage_ms, "receive": latency["receive"],
                         "send": prev_send_ms})
                if done:
                    break
        except WebSocketDisconnect:
            return
        except ProtocolError as e:
            await ws.send_text(json.dumps({"type": "error", "msg": str(e)}))
            await ws.close()
            return
        await ws.close()

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")
    return app


def default_static_dir() -> str | None:
    """Built web client, when present."""
    here = os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(
        os.path.abspath(__file__)))))
    cand = os.path.join(here, "frontend", "dist")
    return cand if os.path.isdir(cand) else None


def serve(ckpt_path: str | None = None, port: int | None = None,
          host: str = "127.0.0.1") -> None:
    import uvicorn

    ckpt_path = ckpt_path or os.environ.get(CKPT_ENV) or None
    if port is None:
        port = int(os.environ.get(PORT_ENV, DEFAULT_PORT))
    app = create_app(ckpt_path, static_dir=default_static_dir())
    uvicorn.run(app, host=host, port=port)
