"""OLSR: proactive link state with multipoint relays and partial TC floods."""

from dataclasses import dataclass, replace

from ..engine import us
from .base import Agent, RouteEntry

HELLO_KIND = "olsr-hello"
TC_KIND = "olsr-tc"

MSG_BASE_BYTES = 12
ADDR_BYTES = 4

DEFAULT_HELLO_S = 2.0
DEFAULT_TC_S = 5.0
HOLD_FACTOR = 3
TC_TTL = 255

# Deterministic start staggering: nodes do not boot in phase, and phase
# separation keeps periodic frames from colliding by construction.
PHASE_STEP_US = 10_000


@dataclass
class Hello:
    sender: int
    sym: tuple       # symmetric neighbours
    heard: tuple     # heard (asymmetric) neighbours
    mprs: tuple      # sender's multipoint relay set


@dataclass
class TcMessage:
    orig: int
    ansn: int
    advertised: tuple  # the originator's MPR selector set
    tc_id: tuple       # (orig, emission counter) for duplicate suppression
    ttl: int


def select_mprs(coverage, degree=None):
    """Greedy two-hop cover.

    coverage maps each symmetric neighbour to the set of strict two-hop
    nodes reachable through it. Neighbours that are the sole cover for
    some node are taken first; then the neighbour covering the most
    uncovered nodes, ties broken by higher degree then lower id.
    """
    degree = degree or {}
    uncovered = set()
    for covers in coverage.values():
        uncovered |= covers
    mprs = set()
    for target in sorted(uncovered):
        owners = [n for n in coverage if target in coverage[n]]
        if len(owners) == 1:
            mprs.add(owners[0])
    for m in mprs:
        uncovered -= coverage[m]
    while uncovered:
        best = min(
            (n for n in coverage if coverage[n] & uncovered),
            key=lambda n: (-len(coverage[n] & uncovered),
                           -degree.get(n, len(coverage[n])), n))
        mprs.add(best)
        uncovered -= coverage[best]
    return mprs


class NeighborRecord:
    __slots__ = ("status", "expires", "sym_set", "mprs")

    def __init__(self):
        self.status = "heard"
        self.expires = 0
        self.sym_set = frozenset()
        self.mprs = frozenset()


class OlsrAgent(Agent):
    def __init__(self, sim, node, ledger, params=None):
        super().__init__(sim, node, ledger, params)
        self.hello_us = us(self.params.get("hello_interval_s",
                                           DEFAULT_HELLO_S))
        self.tc_us = us(self.params.get("tc_interval_s", DEFAULT_TC_S))
        self.neighbor_hold_us = HOLD_FACTOR * self.hello_us
        self.topo_hold_us = HOLD_FACTOR * self.tc_us
        self.neighbors = {}       # id -> NeighborRecord
        self.mpr_set = set()
        self.mpr_selector_set = set()
        self.topology = {}        # orig -> (ansn, advertised set, expires)
        self.ansn = 0
        self.tc_counter = 0
        self.tc_seen = set()

    def start(self):
        phase = self.node.id * PHASE_STEP_US
        self.sim.schedule_after(phase, self._hello_tick,
                                kind="timer-expiry", target=self.node.id)
        self.sim.schedule_after(phase + self.hello_us // 2, self._tc_tick,
                                kind="timer-expiry", target=self.node.id)
        self.sim.schedule_after(us(1.0), self._sweep,
                                kind="timer-expiry", target=self.node.id)

    # -- periodic emission -------------------------------------------------

    def _hello_tick(self):
        sym = tuple(sorted(n for n, r in self.neighbors.items()
                           if r.status == "symmetric"))
        heard = tuple(sorted(n for n, r in self.neighbors.items()
                             if r.status == "heard"))
        msg = Hello(self.node.id, sym, heard, tuple(sorted(self.mpr_set)))
        size = MSG_BASE_BYTES + ADDR_BYTES * (len(sym) + len(heard)
                                              + len(msg.mprs))
        self.bump("hello_sent")
        self.send_control_broadcast(HELLO_KIND, msg, size)
        self.sim.schedule_after(self.hello_us, self._hello_tick,
                                kind="timer-expiry", target=self.node.id)

    def _tc_tick(self):
        # Emitted every interval even when the selector set is empty, so the
        # periodic overhead rate is uniform across nodes.
        self.tc_counter += 1
        msg = TcMessage(self.node.id, self.ansn,
                        tuple(sorted(self.mpr_selector_set)),
                        (self.node.id, self.tc_counter), TC_TTL)
        size = MSG_BASE_BYTES + ADDR_BYTES * len(msg.advertised)
        self.bump("tc_sent")
        self.send_control_broadcast(TC_KIND, msg, size)
        self.sim.schedule_after(self.tc_us, self._tc_tick,
                                kind="timer-expiry", target=self.node.id)

    def _sweep(self):
        now = self.sim.now
        changed = False
        for nid in sorted(self.neighbors):
            if self.neighbors[nid].expires < now:
                del self.neighbors[nid]
                self.mpr_selector_set.discard(nid)
                changed = True
        for orig in sorted(self.topology):
            if self.topology[orig][2] < now:
                del self.topology[orig]
                changed = True
        if changed:
            self._recompute()
        self.sim.schedule_after(us(1.0), self._sweep,
                                kind="timer-expiry", target=self.node.id)

    # -- control plane -----------------------------------------------------

    def handle_control(self, pkt, prev_hop):
        if pkt.kind == HELLO_KIND:
            self._process_hello(pkt.payload)
        elif pkt.kind == TC_KIND:
            self._process_tc(pkt.payload, prev_hop)

    def _process_hello(self, msg):
        me = self.node.id
        rec = self.neighbors.get(msg.sender)
        if rec is None:
            rec = self.neighbors[msg.sender] = NeighborRecord()
        rec.expires = self.sim.now + self.neighbor_hold_us
        rec.sym_set = frozenset(msg.sym)
        rec.mprs = frozenset(msg.mprs)
        rec.status = ("symmetric" if me in msg.sym or me in msg.heard
                      else "heard")
        selected = me in msg.mprs
        was = msg.sender in self.mpr_selector_set
        if selected and not was:
            self.mpr_selector_set.add(msg.sender)
            self.ansn += 1
        elif was and not selected:
            self.mpr_selector_set.discard(msg.sender)
            self.ansn += 1
        self._recompute()

    def _process_tc(self, msg, prev_hop):
        if msg.orig == self.node.id:
            return
        if msg.tc_id in self.tc_seen:
            return
        self.tc_seen.add(msg.tc_id)
        if len(self.tc_seen) > 8192:
            self.tc_seen = set(sorted(self.tc_seen)[-4096:])
        current = self.topology.get(msg.orig)
        if current is not None and current[0] > msg.ansn:
            return  # stale advertised-neighbor sequence number
        self.topology[msg.orig] = (msg.ansn, frozenset(msg.advertised),
                                   self.sim.now + self.topo_hold_us)
        self._recompute()
        if prev_hop in self.mpr_selector_set and msg.ttl > 1:
            self.bump("tc_forwarded")
            fwd = replace(msg, ttl=msg.ttl - 1)
            size = MSG_BASE_BYTES + ADDR_BYTES * len(fwd.advertised)
            self.forward_control_broadcast(TC_KIND, fwd, size)

    # -- route computation -------------------------------------------------

    def _sym_neighbors(self):
        return {n for n, r in self.neighbors.items()
                if r.status == "symmetric"}

    def _recompute(self):
        me = self.node.id
        sym = self._sym_neighbors()
        coverage = {}
        degree = {}
        for n in sorted(sym):
            rec = self.neighbors[n]
            coverage[n] = {x for x in rec.sym_set if x != me and x not in sym}
            degree[n] = len(rec.sym_set)
        self.mpr_set = select_mprs(coverage, degree)
        self._compute_routes()

    def _compute_routes(self):
        me = self.node.id
        sym = self._sym_neighbors()
        adj = {}

        def add_edge(a, b):
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)

        for n in sym:
            add_edge(me, n)
            for x in self.neighbors[n].sym_set:
                if x != me:
                    add_edge(n, x)
        for orig, (_, advertised, _) in self.topology.items():
            for dest in advertised:
                add_edge(orig, dest)
        # hop-count shortest paths, lower-id first hop on ties
        table = {}
        dist = {me: 0}
        first = {me: None}
        frontier = [me]
        while frontier:
            nxt = []
            frontier.sort(key=lambda u: (first[u] if first[u] is not None
                                         else -1, u))
            for u in frontier:
                for v in sorted(adj.get(u, ())):
                    if v in dist:
                        continue
                    dist[v] = dist[u] + 1
                    first[v] = v if u == me else first[u]
                    nxt.append(v)
            frontier = nxt
        expires = self.sim.now + self.topo_hold_us
        for dest in sorted(dist):
            if dest == me:
                continue
            table[dest] = RouteEntry(dest=dest, next_hop=first[dest],
                                     seq_no=0, hop_count=dist[dest],
                                     expires_at=expires)
        self.table.entries = table

    def on_link_failure(self, neighbor):
        rec = self.neighbors.pop(neighbor, None)
        self.mpr_selector_set.discard(neighbor)
        if rec is not None:
            self._recompute()
