"""ZRP: proactive link state inside a radius-rho zone, bordercast beyond."""

from dataclasses import dataclass, replace

from ..engine import us
from .base import Agent, RouteEntry
from .reactive import ReactiveDiscoveryMixin

ADVERT_KIND = "zrp-iarp"
QUERY_KIND = "zrp-ierp-query"
REPLY_KIND = "zrp-ierp-reply"
ERROR_KIND = "zrp-ierp-error"

MSG_BASE_BYTES = 12
ADDR_BYTES = 4

DEFAULT_RADIUS = 2
DEFAULT_IARP_S = 3.0
HOLD_FACTOR = 3
MAX_BORDERCAST_STAGES = 8
PHASE_STEP_US = 10_000
DUP_CACHE_S = 15.0


@dataclass
class ZoneAdvert:
    orig: int
    sym: tuple
    heard: tuple
    seq: int
    ttl: int
    hops: int


@dataclass
class IerpQuery:
    query_id: tuple    # (orig, counter)
    orig: int
    dest: int
    route_so_far: tuple
    leg: tuple         # remaining hops to the bordercast endpoint
    stage: int


@dataclass
class IerpReply:
    query_id: tuple
    orig: int
    dest: int
    route: tuple       # full hop list orig..dest


@dataclass
class IerpError:
    dest: int
    route: tuple


class ZrpAgent(Agent, ReactiveDiscoveryMixin):
    def __init__(self, sim, node, ledger, params=None):
        super().__init__(sim, node, ledger, params)
        self.init_discovery()
        self.radius = int(self.params.get("zone_radius", DEFAULT_RADIUS))
        if self.radius < 1:
            raise ValueError("zone radius must be >= 1")
        self.iarp_us = us(self.params.get("iarp_interval_s", DEFAULT_IARP_S))
        self.hold_us = HOLD_FACTOR * self.iarp_us
        self.neighbors = {}      # id -> {"status", "expires"}
        self.link_state = {}     # orig -> (seq, sym frozenset, expires)
        self.zone_paths = {}     # dest (<= rho hops) -> full path tuple
        self.peripheral_set = set()
        self.adv_counter = 0
        self.query_counter = 0
        self.adv_seen = {}
        self.query_seen = {}

    def start(self):
        phase = self.node.id * PHASE_STEP_US
        self.sim.schedule_after(phase, self._advert_tick,
                                kind="timer-expiry", target=self.node.id)
        self.sim.schedule_after(us(1.0), self._sweep,
                                kind="timer-expiry", target=self.node.id)

    # -- IARP: intrazone link state ---------------------------------------

    def _advert_tick(self):
        sym = tuple(sorted(n for n, r in self.neighbors.items()
                           if r["status"] == "symmetric"))
        heard = tuple(sorted(n for n, r in self.neighbors.items()
                             if r["status"] == "heard"))
        self.adv_counter += 1
        # A node at distance rho-1 advertising its links reveals the nodes
        # at distance rho, so adverts only need to travel rho-1 hops.
        msg = ZoneAdvert(self.node.id, sym, heard, self.adv_counter,
                         ttl=max(1, self.radius - 1), hops=0)
        size = MSG_BASE_BYTES + ADDR_BYTES * (len(sym) + len(heard))
        self.bump("iarp_sent")
        self.send_control_broadcast(ADVERT_KIND, msg, size)
        self.sim.schedule_after(self.iarp_us, self._advert_tick,
                                kind="timer-expiry", target=self.node.id)

    def _sweep(self):
        now = self.sim.now
        changed = False
        for nid in sorted(self.neighbors):
            if self.neighbors[nid]["expires"] < now:
                del self.neighbors[nid]
                changed = True
        for orig in sorted(self.link_state):
            if self.link_state[orig][2] < now:
                del self.link_state[orig]
                changed = True
        if changed:
            self._recompute_zone()
        self.sim.schedule_after(us(1.0), self._sweep,
                                kind="timer-expiry", target=self.node.id)

    def _process_advert(self, msg, prev_hop):
        me = self.node.id
        if msg.orig == me:
            return
        if msg.hops == 0 and prev_hop == msg.orig:
            rec = self.neighbors.setdefault(
                msg.orig, {"status": "heard", "expires": 0})
            rec["expires"] = self.sim.now + self.hold_us
            rec["status"] = ("symmetric"
                             if me in msg.sym or me in msg.heard else "heard")
        key = (msg.orig, msg.seq)
        if self.adv_seen.get(key, -1) >= self.sim.now:
            return
        self.adv_seen[key] = self.sim.now + us(DUP_CACHE_S)
        current = self.link_state.get(msg.orig)
        if current is None or msg.seq >= current[0]:
            self.link_state[msg.orig] = (msg.seq, frozenset(msg.sym),
                                         self.sim.now + self.hold_us)
        self._recompute_zone()
        if msg.ttl > 1:
            fwd = replace(msg, ttl=msg.ttl - 1, hops=msg.hops + 1)
            size = MSG_BASE_BYTES + ADDR_BYTES * (len(fwd.sym)
                                                  + len(fwd.heard))
            self.bump("iarp_forwarded")
            self.forward_control_broadcast(ADVERT_KIND, fwd, size)

    def _recompute_zone(self):
        me = self.node.id
        sym = {n for n, r in self.neighbors.items()
               if r["status"] == "symmetric"}
        adj = {}

        def add_edge(a, b):
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)

        for n in sym:
            add_edge(me, n)
        for orig, (_, links, _) in self.link_state.items():
            for x in links:
                add_edge(orig, x)
        paths = {me: (me,)}
        frontier = [me]
        depth = 0
        while frontier and depth < self.radius:
            depth += 1
            nxt = []
            for u in sorted(frontier):
                for v in sorted(adj.get(u, ())):
                    if v in paths:
                        continue
                    paths[v] = paths[u] + (v,)
                    nxt.append(v)
            frontier = nxt
        del paths[me]
        self.zone_paths = paths
        self.peripheral_set = {d for d, p in paths.items()
                               if len(p) - 1 == self.radius}
        # destinations the zone now covers no longer need a query
        for dest in sorted(self.pending):
            if dest in paths:
                self.discovery_succeeded(dest)

    # -- data plane --------------------------------------------------------

    def flush_pending(self, dest):
        path = self.zone_paths.get(dest)
        if path is None:
            super().flush_pending(dest)
            return
        q = self.pending.pop(dest, None)
        if not q:
            return
        self._expire_pending(q)
        for pkt, _ in q:
            self.send_data_frame(path[1], pkt)

    def route_or_miss(self, pkt, prev_hop=None):
        path = self.zone_paths.get(pkt.dst)
        if path is not None:
            self.send_data_frame(path[1], pkt)
            return
        entry = self.table.lookup(pkt.dst, self.sim.now)
        if entry is not None:
            self.send_data_frame(entry.next_hop, pkt)
            return
        if prev_hop is None:
            self.miss_buffer_and_discover(pkt)
        else:
            self.ledger.node[self.node.id].route_drops += 1

    # -- IERP: bordercast query -------------------------------------------

    def emit_discovery(self, dest, attempt):
        self.query_counter += 1
        qid = (self.node.id, self.query_counter)
        self.bump("ierp_query_rounds")
        self._bordercast(qid, self.node.id, dest, (self.node.id,), stage=1)

    def _bordercast(self, qid, orig, dest, route_so_far, stage):
        for p in sorted(self.peripheral_set):
            if p in route_so_far:
                continue
            path = self.zone_paths[p]
            msg = IerpQuery(query_id=qid, orig=orig, dest=dest,
                            route_so_far=route_so_far, leg=tuple(path[1:]),
                            stage=stage)
            self.bump("ierp_queries_sent")
            self.send_control_unicast(
                path[1], QUERY_KIND, msg,
                MSG_BASE_BYTES + ADDR_BYTES * len(route_so_far), ttl=4)

    def _process_query(self, msg, prev_hop):
        me = self.node.id
        if me in msg.route_so_far:
            self.bump("loop_drops")
            return
        if not msg.leg or msg.leg[0] != me:
            return
        remaining = msg.leg[1:]
        if remaining:
            fwd = replace(msg, route_so_far=msg.route_so_far + (me,),
                          leg=remaining)
            self.bump("ierp_queries_relayed")
            self.send_control_unicast(
                remaining[0], QUERY_KIND, fwd,
                MSG_BASE_BYTES + ADDR_BYTES * len(fwd.route_so_far), ttl=4)
            return
        # bordercast endpoint
        if self.query_seen.get(msg.query_id, -1) >= self.sim.now:
            return
        self.query_seen[msg.query_id] = self.sim.now + us(DUP_CACHE_S)
        here = msg.route_so_far + (me,)
        self.bump("ierp_stage_seen_%d" % msg.stage)
        path = self.zone_paths.get(msg.dest)
        if path is not None:
            full = here + path[1:]
            reply = IerpReply(msg.query_id, msg.orig, msg.dest, full)
            self._install_from_route(full, msg.dest)
            self.bump("ierp_replies_sent")
            idx = full.index(me)
            if idx > 0:
                self.send_control_unicast(
                    full[idx - 1], REPLY_KIND, reply,
                    MSG_BASE_BYTES + ADDR_BYTES * len(full), ttl=4)
            return
        if msg.stage < MAX_BORDERCAST_STAGES:
            self._bordercast(msg.query_id, msg.orig, msg.dest, here,
                             msg.stage + 1)

    def _process_reply(self, msg, prev_hop):
        me = self.node.id
        if me not in msg.route:
            return
        self._install_from_route(msg.route, msg.dest)
        idx = msg.route.index(me)
        if idx == 0:
            if msg.orig == me:
                self.discovery_succeeded(msg.dest)
            return
        self.send_control_unicast(
            msg.route[idx - 1], REPLY_KIND, msg,
            MSG_BASE_BYTES + ADDR_BYTES * len(msg.route), ttl=4)

    def _install_from_route(self, route, dest):
        me = self.node.id
        idx = route.index(me)
        if idx >= len(route) - 1:
            return
        self.table.update_if_fresher(RouteEntry(
            dest=dest, next_hop=route[idx + 1], seq_no=0,
            hop_count=len(route) - 1 - idx,
            expires_at=self.sim.now + self.pending_lifetime_us,
            route=list(route)))

    # -- maintenance -------------------------------------------------------

    def on_link_failure(self, neighbor):
        if neighbor in self.neighbors:
            del self.neighbors[neighbor]
            self._recompute_zone()
        me = self.node.id
        for dest in sorted(self.table.entries):
            e = self.table.entries[dest]
            if e.valid and e.next_hop == neighbor:
                e.valid = False
                self._send_error_back(e)

    def _send_error_back(self, entry):
        me = self.node.id
        if not entry.route or me not in entry.route:
            return
        idx = entry.route.index(me)
        if idx == 0:
            return
        msg = IerpError(entry.dest, tuple(entry.route))
        self.bump("ierp_errors_sent")
        self.send_control_unicast(
            entry.route[idx - 1], ERROR_KIND, msg,
            MSG_BASE_BYTES + ADDR_BYTES * len(entry.route), ttl=4)

    def _process_error(self, msg, prev_hop):
        e = self.table.entries.get(msg.dest)
        if e is None or not e.valid:
            return
        if tuple(e.route) != msg.route:
            return
        e.valid = False
        self._send_error_back(e)

    # -- dispatch ----------------------------------------------------------

    def handle_control(self, pkt, prev_hop):
        if pkt.kind == ADVERT_KIND:
            self._process_advert(pkt.payload, prev_hop)
        elif pkt.kind == QUERY_KIND:
            self._process_query(pkt.payload, prev_hop)
        elif pkt.kind == REPLY_KIND:
            self._process_reply(pkt.payload, prev_hop)
        elif pkt.kind == ERROR_KIND:
            self._process_error(pkt.payload, prev_hop)
