"""Closed-loop evaluation: paired assisted/unassisted runs over seeds.

Each run drives a noisy synthetic operator through a generated course
via the assistance session. Paired runs share the terrain seed and the
operator's noise sequence, so the assistance pathway is the only thing
that differs between the two arms.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .drivers import CORRELATED, SkilledConfig, UnskilledConfig, UnskilledDriver
from .metrics import DriveLog, MetricsReport, metrics_report
from .model import ParamVector
from .service import DriveSession
from .sim import TerrainSpec, generate_terrain
from .stats import WelchResult, welch_t_test

# noise level calibrated so an unassisted synthetic operator weaves and
# crashes at rates typical of an unpracticed human teleoperator
EVAL_NOISE = UnskilledConfig(mode=CORRELATED, sigma_steer=0.15, sigma_pedal=0.5, tau=1.0)


@dataclass(frozen=True)
class EvalConfig:
    length_m: float = 1200.0
    end_margin: float = 20.0
    max_ticks: int = 6000
    start_station: float = 10.0
    noise: UnskilledConfig = EVAL_NOISE
    skilled: SkilledConfig = SkilledConfig()


def closed_loop_run(seed: int, params: ParamVector | None = None,
                    assist: bool = False, cfg: EvalConfig = EvalConfig(),
                    terrain: TerrainSpec | None = None) -> DriveLog:
    """One run; the driver noise stream depends only on the seed, so
    assist on/off runs with the same seed are exactly paired."""
    if terrain is None:
        terrain = generate_terrain(seed, length_m=cfg.length_m)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xD21]))
    driver = UnskilledDriver(terrain, cfg.noise, rng=rng, skilled=cfg.skilled)
    session = DriveSession(terrain, params=params, assist=assist,
                           start_station=cfg.start_station)
    end_station = terrain.total_length - cfg.end_margin

    cols = {name: [] for name in ("raw", "assisted", "applied", "pos", "yaw",
                                  "speed", "station", "offset", "offset_lidar")}
    events = []
    finished = False
    tick = 0
    while tick < cfg.max_ticks:
        ci = driver.control(session.state)
        rec = session.tick(ci[0], ci[1])
        cols["raw"].append(rec.raw_ci)
        cols["assisted"].append(rec.assisted_ci)
        cols["applied"].append(rec.applied_ci)
        cols["pos"].append(rec.state.position)
        cols["yaw"].append(rec.state.yaw)
        cols["speed"].append(rec.state.speed)
        cols["station"].append(rec.state.station)
        cols["offset"].append(rec.offset_true)
        cols["offset_lidar"].append(rec.offset_lidar)
        if rec.event is not None:
            events.append(rec.event)
        tick += 1
        if rec.state.station >= end_station:
            finished = True
            break

    T = tick
    return DriveLog(
        terrain_seed=seed,
        assist=assist,
        ticks=np.arange(T),
        raw_ci=np.array(cols["raw"]),
        assisted_ci=np.array(cols["assisted"]),
        applied_ci=np.array(cols["applied"]),
        position=np.array(cols["pos"]),
        yaw=np.array(cols["yaw"]),
        speed=np.array(cols["speed"]),
        station=np.array(cols["station"]),
        offset=np.array(cols["offset"]),
        offset_lidar=np.array(cols["offset_lidar"]),
        events=events,
        distance=session.world.odometer,
        finished=finished,
    )


@dataclass
class PairedResult:
    seed: int
    unassisted: MetricsReport
    assisted: MetricsReport


@dataclass
class ExperimentReport:
    pairs: list
    sdlp_test: WelchResult
    sm_test: WelchResult
    zero_test: WelchResult

    def _series(self, metric: str, arm: str) -> np.ndarray:
        return np.array([getattr(getattr(p, arm), metric) for p in self.pairs])

    def crash_totals(self) -> tuple:
        un = int(sum(p.unassisted.crashes[2] for p in self.pairs))
        ad = int(sum(p.assisted.crashes[2] for p in self.pairs))
        return un, ad

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("seed,assist,sdlp,sdlp_lidar,sm,tct,zero,"
                  "crashes_frontal,crashes_side,crashes_total\n")
        for p in self.pairs:
            for arm, rep in (("0", p.unassisted), ("1", p.assisted)):
                tct = "" if rep.tct is None else f"{rep.tct:.1f}"
                buf.write(f"{p.seed},{arm},{rep.sdlp:.6f},{rep.sdlp_lidar:.6f},"
                          f"{rep.sm:.6f},{tct},{rep.zero:.6f},"
                          f"{rep.crashes[0]},{rep.crashes[1]},{rep.crashes[2]}\n")
        return buf.getvalue()

    def summary(self) -> str:
        un_crash, ad_crash = self.crash_totals()
        lines = [
            f"paired seeds: {len(self.pairs)}",
            f"SDLP m: unassisted {self._series('sdlp', 'unassisted').mean():.3f}"
            f" vs assisted {self._series('sdlp', 'assisted').mean():.3f}"
            f"  [{self.sdlp_test}]",
            f"SM m/s: unassisted {self._series('sm', 'unassisted').mean():.3f}"
            f" vs assisted {self._series('sm', 'assisted').mean():.3f}"
            f"  [{self.sm_test}]",
            f"ZERO 1/m: unassisted {self._series('zero', 'unassisted').mean():.4f}"
            f" vs assisted {self._series('zero', 'assisted').mean():.4f}"
            f"  [{self.zero_test}]",
            f"crashes: unassisted {un_crash} vs assisted {ad_crash}",
        ]
        return "\n".join(lines)


def run_experiment(params: ParamVector, seeds, cfg: EvalConfig = EvalConfig()) -> ExperimentReport:
    """Paired assist-off/assist-on runs over the given terrain seeds."""
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError("need at least 2 seeds")
    pairs = []
    for seed in seeds:
        terrain = generate_terrain(seed, length_m=cfg.length_m)
        off = closed_loop_run(seed, params=None, assist=False, cfg=cfg, terrain=terrain)
        on = closed_loop_run(seed, params=params, assist=True, cfg=cfg, terrain=terrain)
        pairs.append(PairedResult(seed=seed,
                                  unassisted=metrics_report(off),
                                  assisted=metrics_report(on)))
    return ExperimentReport(
        pairs=pairs,
        sdlp_test=welch_t_test([p.unassisted.sdlp for p in pairs],
                               [p.assisted.sdlp for p in pairs]),
        sm_test=welch_t_test([p.unassisted.sm for p in pairs],
                             [p.assisted.sm for p in pairs]),
        zero_test=welch_t_test([p.unassisted.zero for p in pairs],
                               [p.assisted.zero for p in pairs]),
    )
