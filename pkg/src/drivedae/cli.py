"""Command-line entry points: data generation, training, evaluation,
serving, terrain export, and a kernel benchmark."""

import argparse
import sys


def _parse_seeds(text: str) -> list:
    """'1,2,3' or '100..120' (inclusive start, exclusive end)."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi)))
    return [int(s) for s in text.split(",") if s]


def _cmd_gen_data(args) -> int:
    from .drivers import generate_dataset, save_dataset

    dataset = generate_dataset(_parse_seeds(args.seeds), minutes=args.minutes)
    save_dataset(dataset, args.out)
    print(f"wrote {dataset.total_steps()} steps "
          f"({len(dataset.sessions)} sessions) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    from .drivers import load_dataset
    from .model import save_checkpoint
    from .trainer import TrainConfig, history_to_csv, train

    dataset = load_dataset(args.data)
    cfg = TrainConfig(seed=args.seed, epochs=args.epochs,
                      batch_size=args.batch, lr0=args.lr)
    params, history = train(dataset, cfg)
    save_checkpoint(params, args.out)
    history_path = args.history or args.out + ".history.csv"
    with open(history_path, "w") as f:
        f.write(history_to_csv(history))
    best = min(h.val_mse for h in history)
    print(f"trained {cfg.epochs} epochs; best val mse {best:.6f}")
    print(f"checkpoint: {args.out}\nhistory: {history_path}")
    return 0


def _cmd_eval(args) -> int:
    from .drivers import CORRELATED, WHITE, UnskilledConfig
    from .evaluate import EVAL_NOISE, EvalConfig, run_experiment
    from .model import load_checkpoint

    params = load_checkpoint(args.ckpt)
    if args.driver == "correlated":
        noise = EVAL_NOISE
    elif args.driver == "white":
        noise = UnskilledConfig(mode=WHITE, sigma_steer=EVAL_NOISE.sigma_steer,
                                sigma_pedal=EVAL_NOISE.sigma_pedal)
    else:
        print(f"unknown driver {args.driver!r}", file=sys.stderr)
        return 2
    cfg = EvalConfig(noise=noise)
    report = run_experiment(params, _parse_seeds(args.seeds), cfg)
    with open(args.report, "w") as f:
        f.write(report.to_csv())
    print(report.summary())
    print(f"report: {args.report}")
    return 0


def _cmd_serve(args) -> int:
    from .service.server import serve

    serve(ckpt_path=args.ckpt, port=args.port)
    return 0


def _cmd_terrain(args) -> int:
    from .sim import generate_terrain, save_terrain

    terrain = generate_terrain(args.seed, length_m=args.length)
    save_terrain(terrain, args.out)
    print(f"terrain seed {args.seed}: {terrain.total_length:.0f} m, "
          f"{len(terrain.obstacles)} obstacles -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    import importlib.util
    import os

    path = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(
        os.path.abspath(__file__)))), "benchmarks", "bench_kernels.py")
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(repeats=args.repeats)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="drivedae",
        description="Skip-LSTM denoising driver assistance: data, training, "
                    "evaluation, and the real-time service.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="record skilled-driver sessions")
    p.add_argument("--seeds", required=True, help="e.g. 1,2,3 or 100..110")
    p.add_argument("--minutes", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_data)

    p = sub.add_parser("train", help="train the denoiser on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--history", default=None, help="loss history CSV path")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="paired assisted/unassisted evaluation")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--seeds", required=True)
    p.add_argument("--driver", default="correlated", choices=["correlated", "white"])
    p.add_argument("--report", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("serve", help="run the WebSocket assistance service")
    p.add_argument("--ckpt", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("terrain", help="export a generated course as JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--length", type=float, default=1600.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_terrain)

    p = sub.add_parser("bench", help="time the hot kernels on both backends")
    p.add_argument("--repeats", type=int, default=20)
    p.set_defaults(fn=_cmd_bench)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
