"""Common routing contract: route table, network packets, agent base."""

from collections import deque
from dataclasses import dataclass, field, replace

from ..engine import us
from ..mac import BROADCAST

DEFAULT_TTL = 64
PENDING_PER_DEST = 5
PENDING_LIFETIME_S = 10.0
FORWARD_STAGGER_US = 2_000

# network packet kinds
DATA_KIND = "data"


@dataclass
class Packet:
    src: int
    dst: int
    ttl: int = DEFAULT_TTL
    kind: str = DATA_KIND
    size_bytes: int = 0
    payload: object = None
    session_id: object = None
    seq: int = 0
    sent_at: int = 0

    def hop_copy(self):
        return replace(self, ttl=self.ttl - 1)


@dataclass
class RouteEntry:
    dest: int
    next_hop: int
    seq_no: int
    hop_count: int
    expires_at: int
    valid: bool = True
    route: list = field(default_factory=list)  # full path, ZRP interzone only


class RoutingTable:
    def __init__(self):
        self.entries = {}

    def lookup(self, dest, now):
        """Valid, unexpired entry for dest, or None."""
        e = self.entries.get(dest)
        if e is None or not e.valid or e.expires_at < now:
            return None
        return e

    def update_if_fresher(self, cand):
        """Accept strictly fresher (or shorter at equal freshness) routes."""
        ex = self.entries.get(cand.dest)
        if ex is None:
            self.entries[cand.dest] = cand
            return True
        if cand.seq_no > ex.seq_no:
            self.entries[cand.dest] = cand
            return True
        if cand.seq_no == ex.seq_no:
            if not ex.valid or cand.hop_count < ex.hop_count:
                self.entries[cand.dest] = cand
                return True
        return False

    def invalidate(self, dest):
        e = self.entries.get(dest)
        if e is not None and e.valid:
            e.valid = False
            e.seq_no += 1
            return e
        return None

    def valid_entries(self, now):
        return [e for e in self.entries.values()
                if e.valid and e.expires_at >= now]


class Agent:
    """Base routing agent: local delivery, forwarding, pending buffer.

    Agents talk to the world only through the MAC (send/receive) and
    engine timers; there is no topology peeking.
    """

    control_sizes = {}

    def __init__(self, sim, node, ledger, params=None):
        self.sim = sim
        self.node = node
        self.ledger = ledger
        self.params = params or {}
        self.table = RoutingTable()
        self.pending = {}  # dest -> deque of (packet, buffered_at)
        self.stats = {}
        self.pending_lifetime_us = us(
            self.params.get("pending_lifetime_s", PENDING_LIFETIME_S))

    # -- helpers -----------------------------------------------------------

    def bump(self, name, n=1):
        self.stats[name] = self.stats.get(name, 0) + n

    def send_control_broadcast(self, kind, msg, size_bytes, ttl=1):
        pkt = Packet(src=self.node.id, dst=BROADCAST, ttl=ttl, kind=kind,
                     size_bytes=size_bytes, payload=msg)
        self.bump("control_sent")
        self.node.mac.enqueue(BROADCAST, pkt, size_bytes)

    def forward_control_broadcast(self, kind, msg, size_bytes, ttl=1):
        """Relay a flooded message after a per-node stagger delay.

        Relays of the same flood hear the trigger frame at the same instant;
        a deterministic node-id stagger keeps their rebroadcasts from
        colliding (the backoff window is shorter than one frame airtime).
        """
        delay = self.node.id * FORWARD_STAGGER_US
        if delay == 0:
            self.send_control_broadcast(kind, msg, size_bytes, ttl)
            return
        self.sim.schedule_after(
            delay,
            lambda: self.send_control_broadcast(kind, msg, size_bytes, ttl),
            kind="timer-expiry", target=self.node.id)

    def send_control_unicast(self, next_hop, kind, msg, size_bytes, ttl=1):
        pkt = Packet(src=self.node.id, dst=next_hop, ttl=ttl, kind=kind,
                     size_bytes=size_bytes, payload=msg)
        self.bump("control_sent")
        self.node.mac.enqueue(next_hop, pkt, size_bytes)

    def send_data_frame(self, next_hop, pkt):
        self.node.mac.enqueue(next_hop, pkt, pkt.size_bytes)

    def deliver_local(self, pkt):
        self.node.on_app_delivery(pkt)

    # -- data plane --------------------------------------------------------

    def handle_app_packet(self, pkt):
        if pkt.dst == self.node.id:
            self.deliver_local(pkt)
            return
        self.route_or_miss(pkt)

    def handle_data(self, pkt, prev_hop):
        if pkt.dst == self.node.id:
            self.deliver_local(pkt)
            return
        if pkt.ttl <= 1:
            self.ledger.node[self.node.id].route_drops += 1
            return
        self.route_or_miss(pkt.hop_copy(), prev_hop=prev_hop)

    def route_or_miss(self, pkt, prev_hop=None):
        entry = self.table.lookup(pkt.dst, self.sim.now)
        if entry is not None:
            self.on_route_used(entry)
            self.send_data_frame(entry.next_hop, pkt)
        else:
            self.on_route_miss(pkt, prev_hop)

    def on_route_used(self, entry):
        pass

    def on_route_miss(self, pkt, prev_hop):
        """Proactive default: drop and count. Reactive agents override."""
        self.ledger.node[self.node.id].route_drops += 1

    # -- pending-packet buffer (reactive agents) ---------------------------

    def buffer_packet(self, pkt):
        q = self.pending.setdefault(pkt.dst, deque())
        self._expire_pending(q)
        if len(q) >= PENDING_PER_DEST:
            q.popleft()
            self.ledger.node[self.node.id].route_drops += 1
        q.append((pkt, self.sim.now))

    def flush_pending(self, dest):
        q = self.pending.pop(dest, None)
        if not q:
            return
        self._expire_pending(q)
        for pkt, _ in q:
            entry = self.table.lookup(dest, self.sim.now)
            if entry is None:
                self.ledger.node[self.node.id].route_drops += 1
                continue
            self.on_route_used(entry)
            self.send_data_frame(entry.next_hop, pkt)

    def drop_pending(self, dest):
        q = self.pending.pop(dest, None)
        if q:
            self.ledger.node[self.node.id].route_drops += len(q)

    def _expire_pending(self, q):
        cutoff = self.sim.now - self.pending_lifetime_us
        while q and q[0][1] < cutoff:
            q.popleft()
            self.ledger.node[self.node.id].route_drops += 1

    # -- contract hooks ----------------------------------------------------

    def start(self):
        pass

    def handle_control(self, pkt, prev_hop):
        raise NotImplementedError

    def on_link_failure(self, neighbor):
        pass

    def on_unicast_failure(self, dst, packet):
        """MAC retry exhaustion toward dst (7 retries spent)."""
        self.on_link_failure(dst)

    def on_unicast_success(self, dst, packet):
        pass

    def on_receive(self, pkt, prev_hop):
        if pkt.kind == DATA_KIND:
            self.handle_data(pkt, prev_hop)
        else:
            self.handle_control(pkt, prev_hop)
