"""Shared builders for unit and integration tests."""

import random

import pytest

from vanetsim.engine import Simulator
from vanetsim.mac import DcfMac, MacTimings
from vanetsim.metrics import MetricsLedger
from vanetsim.node import Node
from vanetsim.phy import Channel, RadioParams
from vanetsim.scenario import ScenarioConfig
from vanetsim.simulation import Simulation
from vanetsim.traffic import Battery


class StubUpper:
    """Records MAC upcalls without doing any routing."""

    def __init__(self):
        self.received = []   # (payload, prev_hop)
        self.successes = []  # (dst, packet)
        self.failures = []   # (dst, packet)

    def on_receive(self, payload, prev_hop):
        self.received.append((payload, prev_hop))

    def on_unicast_success(self, dst, packet):
        self.successes.append((dst, packet))

    def on_unicast_failure(self, dst, packet):
        self.failures.append((dst, packet))


class MacWorld:
    """A static set of nodes with DCF MACs on one channel, no routing."""

    def __init__(self, positions, timings=None, radio=None, seed=7,
                 trace=True):
        self.sim = Simulator(seed)
        if trace:
            self.sim.trace = []
        self.radio = radio or RadioParams()
        self.timings = timings or MacTimings()
        self.ledger = MetricsLedger(node_ids=list(positions), session_ids=[])
        self.nodes = {}
        self.uppers = {}
        rng = random.Random(seed)
        for nid, pos in positions.items():
            node = Node(self.sim, nid, Battery(), self.ledger)
            node.pos = pos
            self.nodes[nid] = node
        self.channel = Channel(self.sim, self.radio, self.nodes)
        for nid, node in self.nodes.items():
            node.mac = DcfMac(self.sim, node, self.channel, self.timings,
                              self.radio, rng, self.ledger.node[nid])
            upper = StubUpper()
            node.mac.upper = upper
            self.uppers[nid] = upper

    def send(self, src, dst, payload="x", payload_bytes=512):
        self.nodes[src].mac.enqueue(dst, payload, payload_bytes)

    def run(self, until_us):
        self.sim.run_until(until_us)

    def rx_records(self, node_id=None, kind=None):
        out = []
        for t in self.sim.trace:
            if t[0] != "rx":
                continue
            if node_id is not None and t[2] != node_id:
                continue
            if kind is not None and t[3] != kind:
                continue
            out.append(t)
        return out

    def tx_records(self, node_id=None, kind=None):
        out = []
        for t in self.sim.trace:
            if t[0] != "tx":
                continue
            if node_id is not None and t[2] != node_id:
                continue
            if kind is not None and t[3] != kind:
                continue
            out.append(t)
        return out


def make_static_config(positions, sessions=(), protocol="aodv", seed=1,
                       sim_time_s=30.0, **overrides):
    """Scenario with pinned node positions (static unless waypoints given)."""
    cfg = ScenarioConfig(
        num_nodes=len(positions), protocol=protocol, seed=seed,
        sim_time_s=sim_time_s, sessions=0,
        explicit_sessions=list(sessions),
        positions={i: positions[i] for i in positions},
        **overrides)
    return cfg.validate()


def run_static(positions, sessions=(), protocol="aodv", seed=1,
               sim_time_s=30.0, trace=False, **overrides):
    cfg = make_static_config(positions, sessions, protocol, seed, sim_time_s,
                             **overrides)
    simulation = Simulation(cfg, trace=trace)
    simulation.run()
    return simulation


def line_positions(n, spacing=80.0, y=100.0):
    return {i: (50.0 + i * spacing, y) for i in range(n)}


@pytest.fixture
def sim():
    return Simulator(seed=3)
