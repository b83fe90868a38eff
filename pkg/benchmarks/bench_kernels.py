"""Times the hot kernels on the numba backend and the numpy fallback.

The backend is chosen at import time from DRIVEDAE_NO_NUMBA, so each
measurement runs in its own subprocess with the flag set accordingly;
this script re-invokes itself with --measure to collect one backend's
numbers as JSON.

Run directly or via `drivedae bench`.
"""

import json
import os
import subprocess
import sys
import time


def _time(fn, repeats: int) -> float:
    fn()  # warm (and compile, on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1e3


def measure(repeats: int) -> dict:
    import numpy as np

    from drivedae import kernels
    from drivedae.model import ModelDims, init_params
    from drivedae.sim import generate_terrain
    from drivedae.sim.lidar import cast_lidar
    from drivedae.sim.world import start_state

    dims = ModelDims()
    params = init_params(dims, seed=0)
    rng = np.random.default_rng(0)
    X = rng.random((dims.k, 64, dims.m))
    targets = rng.random((64, 2))

    terrain = generate_terrain(7, length_m=1200.0)
    state = start_state(terrain, 400.0)

    out = {"backend": "numba" if kernels.USING_NUMBA else "numpy"}
    X1 = X[:, :1, :]
    out["dae_forward_b1_ms"] = _time(
        lambda: kernels.dae_forward(params.data, dims.m, dims.r, dims.h, dims.d1, X1),
        repeats)
    out["dae_forward_b64_ms"] = _time(
        lambda: kernels.dae_forward(params.data, dims.m, dims.r, dims.h, dims.d1, X),
        repeats)
    out["dae_loss_grad_b64_ms"] = _time(
        lambda: kernels.dae_loss_grad(params.data, dims.m, dims.r, dims.h, dims.d1,
                                      X, targets),
        repeats)
    out["lidar_sweep_16ch_ms"] = _time(
        lambda: cast_lidar(state, terrain, channels=16), repeats)
    out["lidar_sweep_64ch_ms"] = _time(
        lambda: cast_lidar(state, terrain, channels=64), repeats)
    return out


def _collect(no_numba: bool, repeats: int) -> dict:
    env = dict(os.environ)
    env["DRIVEDAE_NO_NUMBA"] = "1" if no_numba else "0"
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--measure", str(repeats)],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(repeats: int = 20) -> None:
    rows = [_collect(False, repeats), _collect(True, repeats)]
    keys = [k for k in rows[0] if k != "backend"]
    width = max(len(k) for k in keys)
    print(f"{'kernel':<{width}}  {rows[0]['backend']:>10}  {rows[1]['backend']:>10}  speedup")
    for k in keys:
        a, b = rows[0][k], rows[1][k]
        print(f"{k:<{width}}  {a:>8.3f}ms  {b:>8.3f}ms  {b / a:6.1f}x")


if __name__ == "__main__":
    if len(sys.argv) > 1 and sys.argv[1] == "--measure":
        print(json.dumps(measure(int(sys.argv[2]))))
    else:
        argv = [a for a in sys.argv[1:] if a != "--repeats"]
        main(int(argv[0]) if argv else 20)
