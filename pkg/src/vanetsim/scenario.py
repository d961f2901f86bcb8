"""Scenario files: flat key/value format, validation, resolved echo."""

import hashlib
from dataclasses import dataclass, field, fields as dc_fields

PROTOCOLS = ("aodv", "dymo", "olsr", "zrp")


class ScenarioError(Exception):
    """Validation or parse failure; message names the offending key."""


@dataclass
class ScenarioConfig:
    terrain_width_m: float = 1500.0
    terrain_height_m: float = 1500.0
    sim_time_s: float = 3000.0
    num_nodes: int = 15
    speed_min_mps: float = 3.0
    speed_max_mps: float = 20.0
    pause_s: float = 0.0
    mobility_tick_ms: float = 100.0
    protocol: str = "aodv"
    sessions: int = 5
    payload_bytes: int = 512
    interval_ms: float = 250.0
    seed: int = 1
    tx_power_dbm: float = 15.0
    max_range_m: float = 100.0
    bitrate_bps: int = 2_000_000
    frequency_hz: float = 2.4e9
    antenna_height_m: float = 1.5
    rx_threshold_dbm: float = -75.0
    phy_overhead_us: int = 192
    slot_us: int = 20
    sifs_us: int = 10
    difs_us: int = 50
    cw_min: int = 31
    cw_max: int = 1023
    rts_threshold_bytes: int = 256
    retry_limit: int = 7
    queue_depth: int = 50
    zone_radius: int = 2
    hello_interval_s: float = 2.0
    tc_interval_s: float = 5.0
    iarp_interval_s: float = 3.0
    route_lifetime_s: float = 10.0
    capacity_mah: float = 1500.0
    tx_ma: float = 280.0
    rx_ma: float = 180.0
    idle_ma: float = 1.0
    voltage_v: float = 3.0
    altitude_m: float = 1500.0          # inert scenario metadata
    weather_interval_ms: float = 100.0  # inert scenario metadata
    explicit_sessions: list = field(default_factory=list)   # (src, dst)
    positions: dict = field(default_factory=dict)           # id -> (x, y)
    waypoints: dict = field(default_factory=dict)           # id -> [(x,y,v)]

    def validate(self):
        def fail(key, why):
            raise ScenarioError("%s: %s" % (key, why))

        if self.terrain_width_m <= 0 or self.terrain_height_m <= 0:
            fail("terrain_width_m/terrain_height_m", "must be positive")
        if self.sim_time_s < 0:
            fail("sim_time_s", "must be non-negative")
        if self.num_nodes < 1:
            fail("num_nodes", "must be at least 1")
        if not (0 < self.speed_min_mps <= self.speed_max_mps):
            fail("speed_min_mps", "need 0 < speed_min_mps <= speed_max_mps")
        if self.pause_s < 0:
            fail("pause_s", "must be non-negative")
        if self.protocol not in PROTOCOLS:
            fail("protocol", "must be one of %s" % (PROTOCOLS,))
        if self.sessions < 0:
            fail("sessions", "must be non-negative")
        if self.payload_bytes <= 0:
            fail("payload_bytes", "must be positive")
        if self.interval_ms <= 0:
            fail("interval_ms", "must be positive")
        if self.bitrate_bps <= 0:
            fail("bitrate_bps", "must be positive")
        if self.max_range_m <= 0:
            fail("max_range_m", "must be positive")
        if self.difs_us != self.sifs_us + 2 * self.slot_us:
            fail("difs_us", "must equal sifs_us + 2*slot_us")
        if self.cw_min >= self.cw_max:
            fail("cw_min", "must be below cw_max")
        if self.retry_limit < 0:
            fail("retry_limit", "must be non-negative")
        if self.queue_depth < 1:
            fail("queue_depth", "must be at least 1")
        if self.zone_radius < 1:
            fail("zone_radius", "must be at least 1 (zone radius 0 is "
                 "forbidden)")
        for key in ("hello_interval_s", "tc_interval_s", "iarp_interval_s",
                    "route_lifetime_s"):
            if getattr(self, key) <= 0:
                fail(key, "must be positive")
        if self.capacity_mah <= 0:
            fail("capacity_mah", "must be positive")
        n_sessions = (len(self.explicit_sessions) if self.explicit_sessions
                      else self.sessions)
        if n_sessions > 0 and self.num_nodes < 2:
            fail("num_nodes", "sessions need at least 2 nodes")
        for src, dst in self.explicit_sessions:
            if src == dst:
                fail("session", "src and dst must differ (%d)" % src)
            for end in (src, dst):
                if not 0 <= end < self.num_nodes:
                    fail("session", "node %d out of range" % end)
        for nid in list(self.positions) + list(self.waypoints):
            if not 0 <= nid < self.num_nodes:
                fail("position/waypoints", "node %d out of range" % nid)
        for nid, (x, y) in self.positions.items():
            if not (0 <= x <= self.terrain_width_m
                    and 0 <= y <= self.terrain_height_m):
                fail("position.%d" % nid, "outside terrain")
        return self

    # -- serialization -----------------------------------------------------

    def echo(self):
        """Fully resolved flat text; reproduces the run bit-for-bit."""
        lines = []
        for f in sorted(dc_fields(self), key=lambda f: f.name):
            if f.name in ("explicit_sessions", "positions", "waypoints"):
                continue
            lines.append("%s = %s" % (f.name, getattr(self, f.name)))
        for src, dst in self.explicit_sessions:
            lines.append("session = %d,%d" % (src, dst))
        for nid in sorted(self.positions):
            x, y = self.positions[nid]
            lines.append("position.%d = %s,%s" % (nid, x, y))
        for nid in sorted(self.waypoints):
            parts = []
            for x, y, v in self.waypoints[nid]:
                parts.append("%s,%s" % (x, y) if v is None
                             else "%s,%s,%s" % (x, y, v))
            lines.append("waypoints.%d = %s" % (nid, ";".join(parts)))
        return "\n".join(lines) + "\n"

    def scenario_id(self):
        """Stable digest of everything except protocol and seed."""
        lines = [ln for ln in self.echo().splitlines()
                 if not ln.startswith(("protocol ", "seed "))]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in dc_fields(ScenarioConfig)
                if f.name not in ("explicit_sessions", "positions",
                                  "waypoints")}


def _parse_value(key, text):
    ftype = _FIELD_TYPES[key]
    try:
        if ftype in (int, "int"):
            return int(text)
        if ftype in (float, "float"):
            return float(text)
        return text
    except ValueError:
        raise ScenarioError("%s: cannot parse %r" % (key, text))


def parse_scenario(text):
    cfg = ScenarioConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError("line %d: expected key = value" % lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "session":
            try:
                src, dst = (int(v) for v in value.split(","))
            except ValueError:
                raise ScenarioError("session: expected src,dst at line %d"
                                    % lineno)
            cfg.explicit_sessions.append((src, dst))
        elif key.startswith("position."):
            nid = _node_suffix(key, "position.")
            try:
                x, y = (float(v) for v in value.split(","))
            except ValueError:
                raise ScenarioError("%s: expected x,y" % key)
            cfg.positions[nid] = (x, y)
        elif key.startswith("waypoints."):
            nid = _node_suffix(key, "waypoints.")
            cfg.waypoints[nid] = _parse_waypoints(key, value)
        elif key in _FIELD_TYPES:
            setattr(cfg, key, _parse_value(key, value))
        else:
            raise ScenarioError("unknown key %r at line %d" % (key, lineno))
    return cfg.validate()


def _node_suffix(key, prefix):
    try:
        return int(key[len(prefix):])
    except ValueError:
        raise ScenarioError("%s: node id must be an integer" % key)


def _parse_waypoints(key, value):
    out = []
    for part in value.split(";"):
        bits = [b for b in part.split(",") if b.strip()]
        if len(bits) not in (2, 3):
            raise ScenarioError("%s: expected x,y[,speed] groups" % key)
        x, y = float(bits[0]), float(bits[1])
        v = float(bits[2]) if len(bits) == 3 else None
        out.append((x, y, v))
    return out


def load_scenario(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError("cannot read scenario %s: %s" % (path, exc))
    return parse_scenario(text)
