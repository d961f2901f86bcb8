"""Random waypoint mobility over a bounded rectangular terrain."""

from dataclasses import dataclass, field

from .engine import US_PER_S, us


@dataclass
class Terrain:
    width: float = 1500.0
    height: float = 1500.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("terrain dimensions must be strictly positive")


@dataclass
class WaypointState:
    start: tuple          # (x, y) at leg start
    dest: tuple           # (x, y) leg destination
    speed: float          # m/s along the leg
    depart_at: int        # us
    arrive_at: int        # us
    pause_until: int = 0  # us
    scripted: list = field(default_factory=list)  # pending (x, y, speed|None)
    static: bool = False


def position_at(state, t):
    """Linear interpolation along the current leg at time t (us)."""
    if t <= state.depart_at or state.arrive_at <= state.depart_at:
        return state.start
    if t >= state.arrive_at:
        return state.dest
    frac = (t - state.depart_at) / (state.arrive_at - state.depart_at)
    x0, y0 = state.start
    x1, y1 = state.dest
    return (x0 + (x1 - x0) * frac, y0 + (y1 - y0) * frac)


class RandomWaypoint:
    """Waypoint legs with uniform destinations and uniform speeds.

    Scripted waypoint lists are consumed first; once exhausted the node
    holds its last position (a single scripted point yields a static node).
    """

    def __init__(self, terrain, speed_min=3.0, speed_max=20.0, pause_s=0.0,
                 rng=None):
        if not (0 < speed_min <= speed_max):
            raise ValueError("need 0 < speed_min <= speed_max")
        self.terrain = terrain
        self.speed_min = speed_min
        self.speed_max = speed_max
        self.pause_us = us(pause_s)
        self.rng = rng

    def initial_state(self, now, position=None, scripted=None):
        if position is None:
            position = (self.rng.uniform(0, self.terrain.width),
                        self.rng.uniform(0, self.terrain.height))
        st = WaypointState(start=position, dest=position, speed=0.0,
                           depart_at=now, arrive_at=now,
                           scripted=list(scripted or []))
        if scripted is not None and not st.scripted:
            st.static = True
        return st

    def next_leg(self, state, now):
        """Start a new leg from the node's current (arrived) position."""
        here = state.dest
        if state.scripted:
            x, y, speed = state.scripted.pop(0)
            dest = (x, y)
            if speed is None:
                speed = self.rng.uniform(self.speed_min, self.speed_max)
            if not state.scripted:
                state.static = True  # hold at last scripted point afterwards
        else:
            dest = (self.rng.uniform(0, self.terrain.width),
                    self.rng.uniform(0, self.terrain.height))
            speed = self.rng.uniform(self.speed_min, self.speed_max)
        dist = ((dest[0] - here[0]) ** 2 + (dest[1] - here[1]) ** 2) ** 0.5
        state.start = here
        state.dest = dest
        state.speed = speed
        state.depart_at = now
        state.arrive_at = now + int(round(dist / speed * US_PER_S)) if dist else now
        return state

    def advance(self, state, now):
        """Bring the leg schedule up to time now; returns current position."""
        while state.arrive_at <= now and not (state.static and not state.scripted):
            if state.pause_until == 0 and self.pause_us:
                state.pause_until = state.arrive_at + self.pause_us
            if state.pause_until > now:
                return state.dest
            depart = max(state.arrive_at, state.pause_until)
            state.pause_until = 0
            self.next_leg(state, depart)
            if state.arrive_at == state.depart_at and state.static:
                break
        return position_at(state, now)


class MobilityManager:
    """Samples every node's position on a fixed tick (default 100 ms)."""

    def __init__(self, sim, nodes, model, tick_us=100_000, end_us=None):
        self.sim = sim
        self.nodes = nodes
        self.model = model
        self.tick_us = tick_us
        self.end_us = end_us

    def start(self, fixed=None):
        fixed = fixed or {}
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            spec = fixed.get(nid)
            if spec is not None and spec.get("position") is not None:
                st = self.model.initial_state(
                    self.sim.now, position=spec["position"],
                    scripted=spec.get("waypoints", []))
            elif spec is not None and spec.get("waypoints"):
                wps = list(spec["waypoints"])
                x, y, _ = wps[0]
                st = self.model.initial_state(self.sim.now, position=(x, y),
                                              scripted=wps[1:] or [])
            else:
                st = self.model.initial_state(self.sim.now)
            node.mobility = st
            node.pos = st.start
        self._schedule_tick()

    def _schedule_tick(self):
        if self.end_us is not None and self.sim.now + self.tick_us > self.end_us:
            return
        self.sim.schedule_after(self.tick_us, self._tick,
                                kind="mobility-update")

    def _tick(self):
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            node.pos = self.model.advance(node.mobility, self.sim.now)
        self._schedule_tick()
