"""Synthetic drivers and dataset generation.

The skilled driver is pure pursuit on a guide path (centerline shifted
smoothly around obstacles) with an anticipatory curvature-limited speed
governor. The unskilled driver adds noise to the skilled commands: white
per tick, or mean-reverting for closed-loop use where white noise would
be filtered out by vehicle inertia.
"""

from dataclasses import dataclass, field

import numpy as np

from .preprocess import MAX_DISTANCE, downsample_channels, pointcloud_to_distance_vector
from .sim import World, cast_lidar
from .sim.terrain import TerrainSpec, generate_terrain
from .sim.vehicle import VehicleSpec, VehicleState, wrap_angle
from .sim.world import TICK_SECONDS

WHITE = "white"
CORRELATED = "correlated"


@dataclass(frozen=True)
class SkilledConfig:
    cruise_speed: float = 16.0
    lat_accel: float = 2.5       # comfort lateral acceleration, m/s^2
    comfort_decel: float = 2.0   # braking anticipation, m/s^2
    lookahead_base: float = 4.0
    lookahead_gain: float = 0.4  # seconds of travel added to the base
    lookahead_min: float = 5.0
    lookahead_max: float = 18.0
    speed_kp: float = 0.35
    avoid_window: float = 30.0   # meters of smooth swerve around obstacles
    wall_margin: float = 1.6     # guide path keeps this far from walls

    def __post_init__(self):
        if self.lookahead_min <= VehicleSpec().wheelbase:
            raise ValueError("lookahead must exceed the wheelbase")
        if self.cruise_speed > 30.0:
            raise ValueError("cruise_speed cannot exceed the 30 m/s cap")


@dataclass(frozen=True)
class UnskilledConfig:
    mode: str = WHITE
    sigma_steer: float = 0.1   # physical units, [-1, 1] command range
    sigma_pedal: float = 0.4
    tau: float = 1.0           # correlation time constant, seconds

    def __post_init__(self):
        if self.mode not in (WHITE, CORRELATED):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.sigma_steer < 0 or self.sigma_pedal < 0:
            raise ValueError("sigma values must be >= 0")
        if self.tau <= 0:
            raise ValueError("tau must be positive")


def pure_pursuit_steer(alpha: float, lookahead: float, wheelbase: float) -> float:
    """Front wheel angle aiming at a point lookahead meters away, alpha
    radians off the heading."""
    return float(np.arctan2(2.0 * wheelbase * np.sin(alpha), lookahead))


class GuidePath:
    """Centerline shifted around obstacles, with per-point curvature and a
    precomputed anticipatory speed target."""

    def __init__(self, terrain: TerrainSpec, cfg: SkilledConfig):
        frame = terrain.frame
        stations = frame.stations
        offsets = np.zeros(len(stations))
        for (cx, cy, r), s_obs in zip(terrain.obstacles, frame.obstacle_station):
            _, o = frame.nearest_station((cx, cy))
            hw_obs = frame.half_width_at(s_obs)
            # aim at the middle of the clear channel on the open side
            if o >= 0.0:
                target = (-hw_obs + (o - r)) / 2.0
            else:
                target = (hw_obs + (o + r)) / 2.0
            ds = np.abs(stations - s_obs)
            w = np.where(ds < cfg.avoid_window,
                         0.5 * (1.0 + np.cos(np.pi * ds / cfg.avoid_window)), 0.0)
            offsets += w * target
        limit = np.maximum(terrain.half_width - cfg.wall_margin, 0.5)
        self.offsets = np.clip(offsets, -limit, limit)
        self.points = terrain.centerline + self.offsets[:, None] * frame.point_normals
        self.stations = stations
        self.frame = frame

        d = np.diff(self.points, axis=0)
        headings = np.arctan2(d[:, 1], d[:, 0])
        seg = np.hypot(d[:, 0], d[:, 1])
        dh = np.abs(np.diff(headings))
        dh = np.where(dh > np.pi, 2.0 * np.pi - dh, dh)
        curvature = np.zeros(len(stations))
        curvature[1:-1] = dh / ((seg[:-1] + seg[1:]) / 2.0)
        self.curvature = curvature

        # anticipatory target speed: at each point, the tightest limit
        # reachable under comfort deceleration from any point ahead
        v_curve = np.sqrt(cfg.lat_accel / np.maximum(curvature, 1e-9))
        v_curve = np.minimum(v_curve, cfg.cruise_speed)
        v_curve[-1] = min(v_curve[-1], 3.0)  # roll gently off the end
        v_allow = v_curve.copy()
        for i in range(len(v_allow) - 2, -1, -1):
            ds = self.stations[i + 1] - self.stations[i]
            v_allow[i] = min(v_allow[i], np.sqrt(v_allow[i + 1] ** 2 + 2.0 * cfg.comfort_decel * ds))
        self.target_speed = v_allow

    def point_at(self, station: float) -> np.ndarray:
        s = np.clip(station, 0.0, self.stations[-1])
        i = min(int(np.searchsorted(self.stations, s, side="right")) - 1, len(self.stations) - 2)
        i = max(i, 0)
        t = (s - self.stations[i]) / (self.stations[i + 1] - self.stations[i])
        return self.points[i] + t * (self.points[i + 1] - self.points[i])

    def target_speed_at(self, station: float) -> float:
        i = int(np.clip(np.searchsorted(self.stations, station), 0, len(self.stations) - 1))
        return float(self.target_speed[i])


class SkilledDriver:
    """Deterministic stand-in for a skilled teleoperator."""

    def __init__(self, terrain: TerrainSpec, cfg: SkilledConfig = SkilledConfig(),
                 vehicle: VehicleSpec = VehicleSpec()):
        self.cfg = cfg
        self.vehicle = vehicle
        self.path = GuidePath(terrain, cfg)
        self.frame = terrain.frame

    def control(self, state: VehicleState) -> np.ndarray:
        cfg = self.cfg
        station, _ = self.frame.nearest_station(state.position)
        lookahead = float(np.clip(cfg.lookahead_base + cfg.lookahead_gain * state.speed,
                                  cfg.lookahead_min, cfg.lookahead_max))
        target = self.path.point_at(station + lookahead)
        to_target = target - state.position
        alpha = wrap_angle(np.arctan2(to_target[1], to_target[0]) - state.yaw)
        delta = pure_pursuit_steer(alpha, lookahead, self.vehicle.wheelbase)
        steer = float(np.clip(delta / self.vehicle.max_steer_angle, -1.0, 1.0))
        v_target = self.path.target_speed_at(station)
        pedal = float(np.clip(cfg.speed_kp * (v_target - state.speed), -1.0, 1.0))
        return np.array([steer, pedal])


class UnskilledDriver:
    """Skilled commands plus noise, clamped to the physical range."""

    def __init__(self, terrain: TerrainSpec, cfg: UnskilledConfig = UnskilledConfig(),
                 rng=None, skilled: SkilledConfig = SkilledConfig(),
                 vehicle: VehicleSpec = VehicleSpec(), dt: float = TICK_SECONDS):
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.skilled = SkilledDriver(terrain, skilled, vehicle)
        self.dt = dt
        self._noise = np.zeros(2)
        self._sigma = np.array([cfg.sigma_steer, cfg.sigma_pedal])

    def control(self, state: VehicleState) -> np.ndarray:
        base = self.skilled.control(state)
        if self.cfg.mode == WHITE:
            noise = self._sigma * self.rng.standard_normal(2)
        else:
            decay = np.exp(-self.dt / self.cfg.tau)
            kick = self._sigma * np.sqrt(1.0 - decay ** 2) * self.rng.standard_normal(2)
            self._noise = self._noise * decay + kick
            noise = self._noise
        return np.clip(base + noise, -1.0, 1.0)


def skilled_control(state: VehicleState, terrain: TerrainSpec,
                    cfg: SkilledConfig = SkilledConfig()) -> np.ndarray:
    return _cached_skilled(terrain, cfg).control(state)


_skilled_cache: dict = {}


def _cached_skilled(terrain: TerrainSpec, cfg: SkilledConfig) -> SkilledDriver:
    key = (id(terrain), cfg)
    driver = _skilled_cache.get(key)
    if driver is None or driver.frame is not terrain.frame:
        driver = SkilledDriver(terrain, cfg)
        _skilled_cache[key] = driver
    return driver


class DatasetError(Exception):
    pass


@dataclass
class Session:
    """One contiguous skilled drive on one terrain, physical units."""

    seed: int
    steer: np.ndarray      # (T,) commanded steer, [-1, 1]
    pedal: np.ndarray      # (T,)
    speed: np.ndarray      # (T,) m/s
    yaw: np.ndarray        # (T,) radians
    pitch: np.ndarray      # (T,)
    roll: np.ndarray       # (T,)
    distances: np.ndarray  # (T, 180) meters, clamped to 50

    def __len__(self):
        return len(self.steer)

    def model_inputs(self) -> np.ndarray:
        """Normalized (T, 186) rows: control ++ state ++ distances."""
        T = len(self)
        x = np.empty((T, 186))
        x[:, 0] = (np.clip(self.steer, -1.0, 1.0) + 1.0) / 2.0
        x[:, 1] = (np.clip(self.pedal, -1.0, 1.0) + 1.0) / 2.0
        x[:, 2] = np.clip(self.speed, 0.0, 30.0) / 30.0
        x[:, 3] = (self.yaw + np.pi) / (2.0 * np.pi)
        x[:, 4] = (self.pitch + np.pi) / (2.0 * np.pi)
        x[:, 5] = (self.roll + np.pi) / (2.0 * np.pi)
        x[:, 6:] = self.distances / MAX_DISTANCE
        return x


@dataclass
class DriveDataset:
    sessions: list = field(default_factory=list)

    def total_steps(self) -> int:
        return sum(len(s) for s in self.sessions)


def _record_session(terrain: TerrainSpec, ticks: int, cfg: SkilledConfig) -> Session:
    driver = SkilledDriver(terrain, cfg)
    world = World(terrain)
    cols = {name: np.zeros(ticks) for name in ("steer", "pedal", "speed", "yaw")}
    distances = np.zeros((ticks, 180))
    for t in range(ticks):
        state = world.state
        scan = cast_lidar(state, terrain, channels=16)
        ci = driver.control(state)
        cols["steer"][t] = ci[0]
        cols["pedal"][t] = ci[1]
        cols["speed"][t] = state.speed
        cols["yaw"][t] = state.yaw
        distances[t] = pointcloud_to_distance_vector(scan) * MAX_DISTANCE
        world.step(ci)
    if world.events:
        raise DatasetError(
            f"skilled driver crashed on terrain seed {terrain.seed} "
            f"(tick {world.events[0].tick}); training data must be crash-free")
    zeros = np.zeros(ticks)
    return Session(seed=terrain.seed, steer=cols["steer"], pedal=cols["pedal"],
                   speed=cols["speed"], yaw=cols["yaw"], pitch=zeros.copy(),
                   roll=zeros.copy(), distances=distances)


def generate_dataset(seeds, minutes: float, cfg: SkilledConfig = SkilledConfig()) -> DriveDataset:
    """Closed-loop skilled sessions at 10 Hz, one per seed, equal length.

    Terrains are sized so the drive never runs out of road before the
    session's tick quota, so total steps = minutes * 600 exactly.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one terrain seed")
    if len(set(seeds)) != len(seeds):
        raise ValueError("terrain seeds must be unique")
    if minutes <= 0:
        raise ValueError("minutes must be positive")
    ticks_total = int(round(minutes * 600.0))
    base = ticks_total // len(seeds)
    extra = ticks_total - base * len(seeds)
    dataset = DriveDataset()
    for i, seed in enumerate(seeds):
        ticks = base + (1 if i < extra else 0)
        # conservative length margin: the governor cannot exceed cruise speed
        length = max(500.0, ticks * TICK_SECONDS * cfg.cruise_speed * 1.1 + 200.0)
        terrain = generate_terrain(seed, length)
        dataset.sessions.append(_record_session(terrain, ticks, cfg))
    return dataset


# one step per line: session seed, tick, steer, pedal, speed, yaw, pitch,
# roll, then the 180 distances in meters
def save_dataset(dataset: DriveDataset, path) -> None:
    with open(path, "w") as f:
        for session in dataset.sessions:
            for t in range(len(session)):
                head = (f"{session.seed},{t},{session.steer[t]:.17g},{session.pedal[t]:.17g},"
                        f"{session.speed[t]:.17g},{session.yaw[t]:.17g},"
                        f"{session.pitch[t]:.17g},{session.roll[t]:.17g}")
                tail = ",".join(f"{v:.17g}" for v in session.distances[t])
                f.write(head + "," + tail + "\n")


def load_dataset(path) -> DriveDataset:
    raw = np.loadtxt(path, delimiter=",", ndmin=2)
    if raw.size == 0:
        return DriveDataset()
    if raw.shape[1] != 188:
        raise DatasetError(f"expected 188 columns, got {raw.shape[1]}")
    dataset = DriveDataset()
    _, first = np.unique(raw[:, 0], return_index=True)
    for seed in raw[np.sort(first), 0]:
        rows = raw[raw[:, 0] == seed]
        rows = rows[np.argsort(rows[:, 1])]
        dataset.sessions.append(Session(
            seed=int(seed), steer=rows[:, 2].copy(), pedal=rows[:, 3].copy(),
            speed=rows[:, 4].copy(), yaw=rows[:, 5].copy(), pitch=rows[:, 6].copy(),
            roll=rows[:, 7].copy(), distances=rows[:, 8:].copy()))
    return dataset
