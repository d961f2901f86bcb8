"""AODV: on-demand distance-vector routing with flooding discovery."""

from dataclasses import dataclass, replace

from ..engine import us
from .base import Agent, RouteEntry
from .reactive import ReactiveDiscoveryMixin

RREQ_KIND = "aodv-rreq"
RREP_KIND = "aodv-rrep"
RERR_KIND = "aodv-rerr"

RREQ_BYTES = 24
RREP_BYTES = 20
RERR_BASE_BYTES = 8
RERR_ENTRY_BYTES = 8

DEFAULT_ROUTE_LIFETIME_S = 10.0
DUP_CACHE_S = 15.0
RREQ_TTL = 35


@dataclass
class Rreq:
    rreq_id: int
    orig: int
    orig_seq: int
    dest: int
    dest_seq_known: int
    hop_count: int
    ttl: int


@dataclass
class Rrep:
    orig: int
    dest: int
    dest_seq: int
    hop_count: int


@dataclass
class Rerr:
    unreachable: tuple  # of (dest, seq) pairs


class AodvAgent(Agent, ReactiveDiscoveryMixin):
    def __init__(self, sim, node, ledger, params=None):
        super().__init__(sim, node, ledger, params)
        self.init_discovery()
        self.own_seq = 0
        self.rreq_counter = 0
        self.lifetime_us = us(self.params.get(
            "route_lifetime_s", DEFAULT_ROUTE_LIFETIME_S))
        self.dup_cache = {}  # (orig, rreq_id) -> expiry

    # -- data plane --------------------------------------------------------

    def on_route_used(self, entry):
        entry.expires_at = self.sim.now + self.lifetime_us

    def on_route_miss(self, pkt, prev_hop):
        if prev_hop is None:
            self.miss_buffer_and_discover(pkt)
        else:
            # forwarding miss: report back rather than discovering on behalf
            self.ledger.node[self.node.id].route_drops += 1
            entry = self.table.entries.get(pkt.dst)
            seq = entry.seq_no if entry is not None else 0
            self._broadcast_rerr(((pkt.dst, seq),))

    # -- discovery ---------------------------------------------------------

    def emit_discovery(self, dest, attempt):
        self.own_seq += 1
        self.rreq_counter += 1
        entry = self.table.entries.get(dest)
        dest_seq = entry.seq_no if entry is not None else 0
        msg = Rreq(rreq_id=self.rreq_counter, orig=self.node.id,
                   orig_seq=self.own_seq, dest=dest, dest_seq_known=dest_seq,
                   hop_count=0, ttl=RREQ_TTL)
        self._remember_rreq(msg.orig, msg.rreq_id)
        self.bump("rreq_sent")
        self.send_control_broadcast(RREQ_KIND, msg, RREQ_BYTES)

    # -- control plane -----------------------------------------------------

    def handle_control(self, pkt, prev_hop):
        if pkt.kind == RREQ_KIND:
            self._process_rreq(pkt.payload, prev_hop)
        elif pkt.kind == RREP_KIND:
            self._process_rrep(pkt.payload, prev_hop)
        elif pkt.kind == RERR_KIND:
            self._process_rerr(pkt.payload, prev_hop)

    def _process_rreq(self, msg, prev_hop):
        key = (msg.orig, msg.rreq_id)
        if self._is_dup(key):
            return
        self._remember_rreq(*key)
        if msg.orig == self.node.id:
            return
        self.table.update_if_fresher(RouteEntry(
            dest=msg.orig, next_hop=prev_hop, seq_no=msg.orig_seq,
            hop_count=msg.hop_count + 1,
            expires_at=self.sim.now + self.lifetime_us))
        if msg.dest == self.node.id:
            self.own_seq = max(self.own_seq, msg.dest_seq_known)
            reply = Rrep(orig=msg.orig, dest=self.node.id,
                         dest_seq=self.own_seq, hop_count=0)
            self.bump("rrep_sent")
            self.send_control_unicast(prev_hop, RREP_KIND, reply, RREP_BYTES)
            return
        cached = self.table.lookup(msg.dest, self.sim.now)
        if cached is not None and cached.seq_no >= msg.dest_seq_known:
            reply = Rrep(orig=msg.orig, dest=msg.dest,
                         dest_seq=cached.seq_no, hop_count=cached.hop_count)
            self.bump("rrep_sent")
            self.send_control_unicast(prev_hop, RREP_KIND, reply, RREP_BYTES)
            return
        if msg.ttl > 1:
            fwd = replace(msg, hop_count=msg.hop_count + 1, ttl=msg.ttl - 1)
            self.bump("rreq_forwarded")
            self.forward_control_broadcast(RREQ_KIND, fwd, RREQ_BYTES)

    def _process_rrep(self, msg, prev_hop):
        self.table.update_if_fresher(RouteEntry(
            dest=msg.dest, next_hop=prev_hop, seq_no=msg.dest_seq,
            hop_count=msg.hop_count + 1,
            expires_at=self.sim.now + self.lifetime_us))
        if msg.orig == self.node.id:
            self.discovery_succeeded(msg.dest)
            return
        back = self.table.lookup(msg.orig, self.sim.now)
        if back is None:
            self.bump("rrep_drops")
            return
        fwd = replace(msg, hop_count=msg.hop_count + 1)
        self.send_control_unicast(back.next_hop, RREP_KIND, fwd, RREP_BYTES)

    def _process_rerr(self, msg, prev_hop):
        mine = []
        for dest, seq in msg.unreachable:
            e = self.table.entries.get(dest)
            if e is not None and e.valid and e.next_hop == prev_hop:
                e.valid = False
                e.seq_no = max(e.seq_no + 1, seq)
                mine.append((dest, e.seq_no))
        if mine:
            self._broadcast_rerr(tuple(mine))

    # -- maintenance -------------------------------------------------------

    def on_link_failure(self, neighbor):
        broken = []
        for dest in sorted(self.table.entries):
            e = self.table.entries[dest]
            if e.valid and e.next_hop == neighbor:
                e.valid = False
                e.seq_no += 1
                broken.append((dest, e.seq_no))
        if broken:
            self.bump("rerr_sent")
            self._broadcast_rerr(tuple(broken))

    def _broadcast_rerr(self, unreachable):
        size = RERR_BASE_BYTES + RERR_ENTRY_BYTES * len(unreachable)
        self.send_control_broadcast(RERR_KIND, Rerr(unreachable), size)

    # -- duplicate cache ---------------------------------------------------

    def _is_dup(self, key):
        expiry = self.dup_cache.get(key)
        return expiry is not None and expiry >= self.sim.now

    def _remember_rreq(self, orig, rreq_id):
        self.dup_cache[(orig, rreq_id)] = self.sim.now + us(DUP_CACHE_S)
        if len(self.dup_cache) > 4096:
            now = self.sim.now
            self.dup_cache = {k: v for k, v in self.dup_cache.items()
                              if v >= now}
