"""Packet-level discrete-event kernel.

Self-contained on purpose: no imports from the rest of the package, so the
whole module can be compiled as a C extension from this exact source (see
setup.py).  The engine module builds the input structures and unpacks the
results.

Determinism rules:
  * the clock is integer picoseconds,
  * every random choice (ECMP, flowlet rehash, Bernoulli loss) is a pure
    hash of the scenario seed and stable identifiers, never a draw from
    shared RNG state,
  * simultaneous events execute in (time, node, port, kind, serial) order.
"""

import heapq
from collections import deque

# event kinds, in tie-break order at equal (time, node, port)
K_CTRL = 0      # PFC pause/resume arriving at an egress
K_ARRIVE = 1    # packet tail arriving at a node
K_TXDONE = 2    # egress finished serializing a packet
K_RELEASE = 3   # sender paces out the next packet
K_CCTICK = 4    # congestion-control increase timer
K_RTO = 5       # retransmission timeout check
K_GROUP = 6     # dependency group released
K_SAMPLE = 7    # periodic port-state sampling
K_WATCHDOG = 8  # progress watchdog

DATA, ACK, NACK, CNP = 0, 1, 2, 3

GBN, SACK = 0, 1
CC_RATE, CC_WINDOW = 0, 1
ECMP, FLOWLET, SPRAY = 0, 1, 2

PS_PER_S = 1_000_000_000_000

_MASK = (1 << 64) - 1


class DeadlockError(Exception):
    """No forward progress while flows are incomplete."""

    def __init__(self, report):
        super().__init__("simulation deadlock: no progress while flows incomplete")
        self.report = report


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def mix(*parts):
    h = 0x243F6A8885A308D3
    for p in parts:
        h = splitmix64((h ^ p) & _MASK)
    return h


def u01(h):
    return h / 18446744073709551616.0


# ---------------------------------------------------------------------------
# pure per-mechanism rules, unit-testable in isolation

PFC_NONE, PFC_PAUSE, PFC_RESUME = 0, 1, 2


def pfc_action(occupancy, limit, headroom, xon_level, pause_sent):
    """XOFF when free space dips below the headroom reserve; XON with
    hysteresis once occupancy drains under xon_level.  Idempotent."""
    if not pause_sent:
        if limit - occupancy < headroom:
            return PFC_PAUSE
    elif occupancy < xon_level:
        return PFC_RESUME
    return PFC_NONE


RX_DELIVER, RX_NACK, RX_DUP = 0, 1, 2


def gbn_rx_action(expected, seq):
    """Go-back-n receiver rule: in-order delivers, a gap NACKs the expected
    sequence, anything older is a silent duplicate."""
    if seq == expected:
        return RX_DELIVER
    if seq > expected:
        return RX_NACK
    return RX_DUP


def sack_contains(cum, ranges, seq):
    if seq < cum:
        return True
    lo, hi = 0, len(ranges)
    while lo < hi:
        mid = (lo + hi) // 2
        if ranges[mid][1] <= seq:
            lo = mid + 1
        else:
            hi = mid
    return lo < len(ranges) and ranges[lo][0] <= seq


def sack_insert(cum, ranges, seq):
    """Insert seq into a receive-range set kept as a sorted list of [s, e).

    Returns (new_cum, advanced) where advanced is the count of sequences
    newly in order; duplicates return (cum, -1).  ``ranges`` is mutated.
    """
    if seq < cum:
        return cum, -1
    # first range whose end >= seq; list stays sorted and non-overlapping
    lo, hi = 0, len(ranges)
    while lo < hi:
        mid = (lo + hi) // 2
        if ranges[mid][1] < seq:
            lo = mid + 1
        else:
            hi = mid
    i = lo
    if i < len(ranges) and ranges[i][0] <= seq < ranges[i][1]:
        return cum, -1
    if i < len(ranges) and ranges[i][1] == seq:
        ranges[i][1] = seq + 1
        if i + 1 < len(ranges) and ranges[i + 1][0] == seq + 1:
            ranges[i][1] = ranges[i + 1][1]
            del ranges[i + 1]
    elif i < len(ranges) and ranges[i][0] == seq + 1:
        ranges[i][0] = seq
    else:
        ranges.insert(i, [seq, seq + 1])
    advanced = 0
    if ranges and ranges[0][0] == cum:
        advanced = ranges[0][1] - cum
        cum = ranges[0][1]
        del ranges[0]
    return cum, advanced


def route_choice(policy, nports, key, node, salt, now, gap_ps, flet, spray):
    """Pick an index among equal-cost egress ports.

    ecmp hashes (salt, key, node) once per flow; flowlet may rehash when the
    inter-packet gap at this node exceeds gap_ps; spray round-robins per
    (node, key).  ``flet`` and ``spray`` are caller-owned state dicts.
    """
    if policy == ECMP:
        return mix(salt, key, node) % nports
    sk = (node, key)
    if policy == SPRAY:
        c = spray.get(sk, 0)
        spray[sk] = c + 1
        return c % nports
    st = flet.get(sk)
    if st is None:
        st = [now, 0, mix(salt, key, node) % nports]
        flet[sk] = st
    elif now - st[0] >= gap_ps:
        st[1] += 1
        st[2] = mix(salt, key, node, st[1]) % nports
    st[0] = now
    return st[2]


# ---------------------------------------------------------------------------


class Pkt:
    __slots__ = ("fid", "seq", "payload", "header", "cls", "kind", "ecn",
                 "attempt", "in_pid", "ranges")

    def __init__(self, fid, seq, payload, header, cls, kind, attempt=0, ranges=None):
        self.fid = fid
        self.seq = seq
        self.payload = payload
        self.header = header
        self.cls = cls
        self.kind = kind
        self.ecn = 0
        self.attempt = attempt
        self.in_pid = -1
        self.ranges = ranges

    @property
    def wire(self):
        return self.payload + self.header


class Flow:
    __slots__ = (
        "fid", "src", "dst", "total_bytes", "cls", "group", "start_offset_ps",
        "max_rate_bps", "npkts", "full_payload", "last_payload", "header",
        # sender
        "released", "start_ps", "send_next", "next_new", "acked_cum",
        "attempts", "retxq", "retx_guard", "sacked", "rate_bps", "window_bytes",
        "logical_out", "pacing", "pace_next_ps", "retx_bytes", "first_tx_count",
        "inject_done_ps", "first_feedback_ps", "marked_epoch", "rto_deadline",
        "last_rewind_ps", "rto_count",
        # receiver
        "rcv_expected", "rcv_ranges", "delivered_bytes", "end_ps",
        "last_cnp_ps", "reorder_drops", "dup_discards", "ooo_discards",
        # network accounting
        "drops", "drop_bytes", "done", "delivery_log",
    )

    def __init__(self, fid, src, dst, total_bytes, cls, group, start_offset_ps,
                 max_rate_bps, full_payload, header):
        self.fid = fid
        self.src = src
        self.dst = dst
        self.total_bytes = total_bytes
        self.cls = cls
        self.group = group
        self.start_offset_ps = start_offset_ps
        self.max_rate_bps = max_rate_bps
        self.header = header
        self.full_payload = full_payload
        self.npkts = -(-total_bytes // full_payload)
        self.last_payload = total_bytes - (self.npkts - 1) * full_payload
        self.released = False
        self.start_ps = -1
        self.send_next = 0
        self.next_new = 0
        self.acked_cum = 0
        self.attempts = [0] * self.npkts
        self.retxq = deque()
        self.retx_guard = {}
        self.sacked = set()
        self.rate_bps = 0
        self.window_bytes = 0
        self.logical_out = 0
        self.pacing = False
        self.pace_next_ps = 0
        self.retx_bytes = 0
        self.first_tx_count = 0
        self.inject_done_ps = -1
        self.first_feedback_ps = -1
        self.marked_epoch = False
        self.rto_deadline = 0
        self.last_rewind_ps = -(1 << 60)
        self.rto_count = 0
        self.rcv_expected = 0
        self.rcv_ranges = []
        self.delivered_bytes = 0
        self.end_ps = -1
        self.last_cnp_ps = -(1 << 60)
        self.reorder_drops = 0
        self.dup_discards = 0
        self.ooo_discards = 0
        self.drops = 0
        self.drop_bytes = 0
        self.done = False
        self.delivery_log = None

    def payload_of(self, seq):
        return self.last_payload if seq == self.npkts - 1 else self.full_payload

    def wire_of(self, seq):
        return self.payload_of(seq) + self.header


class Kernel:
    """One simulation run.  Build once, call run() once."""

    def __init__(self, cfg):
        # topology
        self.node_tier = cfg["node_tier"]
        self.node_is_host = cfg["node_is_host"]
        self.port_node = cfg["port_node"]
        self.port_peer = cfg["port_peer"]
        self.port_bw = cfg["port_bw"]
        self.port_lat = cfg["port_lat"]
        self.host_port = cfg["host_port"]
        self.down_port = cfg["down_port"]      # node -> {dest host: pid}
        self.up_ports = cfg["up_ports"]        # node -> list of pids
        nports = len(self.port_node)
        # config
        self.classes = cfg["classes"]
        self.limit = cfg["limit_bytes"]
        self.headroom = cfg["headroom_bytes"]
        self.xon_level = cfg["xon_level"]
        self.pfc_on = cfg["pfc_on"]
        self.ecn_thresh = cfg["ecn_thresh"]    # -1 disables marking
        self.policy = cfg["policy"]
        self.flowlet_gap = cfg["flowlet_gap_ps"]
        self.seed = cfg["seed"]
        self.transport = cfg["transport"]      # GBN | SACK
        self.cc_mode = cfg["cc_mode"]
        self.cc_factor = cfg["cc_factor"]
        self.cc_period = cfg["cc_period_ps"]
        self.cc_step_bps = cfg["cc_step_bps"]
        self.cc_step_bytes = cfg["cc_step_bytes"]
        self.cc_min_rate = cfg["cc_min_rate_bps"]
        self.cc_min_window = cfg["cc_min_window"]
        self.init_window = cfg["init_window"]
        self.timeout_ps = cfg["timeout_ps"]
        self.nack_guard = cfg["nack_guard_ps"]
        self.cnp_epoch = cfg["cnp_epoch_ps"]
        self.ctrl_bytes = cfg["ctrl_bytes"]
        self.reorder_limit = cfg["reorder_limit"]
        self.sample_ps = cfg["sample_ps"]
        self.watchdog_ps = cfg["watchdog_ps"]
        self.horizon_ps = cfg["horizon_ps"]
        self.loss_prob = cfg["loss_prob"]      # per pid
        self.loss_seqs = cfg["loss_seqs"]      # per pid: None | set of first-attempt seqs
        self.flows = cfg["flows"]
        self.group_prereq = cfg["group_prereq"]
        self.group_compute = cfg["group_compute_ps"]
        self.group_members = cfg["group_members"]
        self.group_children = cfg["group_children"]
        self.group_left = [len(m) for m in self.group_members]
        if cfg.get("record_delivery"):
            for f in self.flows:
                f.delivery_log = []
        # per-port state
        C = self.classes
        self.ing_occ = [[0] * C for _ in range(nports)]
        self.ing_pause_sent = [0] * nports
        self.ing_drops = [[0] * C for _ in range(nports)]
        self.eg_q = [[deque() for _ in range(C)] for _ in range(nports)]
        self.eg_qbytes = [[0] * C for _ in range(nports)]
        self.eg_busy = [False] * nports
        self.eg_paused = [0] * nports
        self.eg_rr = [0] * nports
        self.eg_marks = [[0] * C for _ in range(nports)]
        self.pause_tx = [0] * nports
        # routing state
        self.flet = {}
        self.spray = {}
        # bookkeeping
        self.now = 0
        self.evheap = []
        self.evseq = 0
        self.flows_done = 0
        self.delivered_total = 0
        self.total_drops = 0
        self.pause_frames = 0
        self.resume_frames = 0
        self.peak_occ = 0
        self.tier_paused = [0, 0, 0, 0]
        self.cur_tiers = 0
        self.max_paused_tiers = 0
        self.first_pause_ps = [-1, -1, -1, -1]
        self.pause_log = []
        self.port_rows = []
        self._row_state = {}
        self._progress_mark = -1
        self.events = 0

    # -- event plumbing -----------------------------------------------------

    def _push(self, t, node, port, kind, arg):
        self.evseq += 1
        heapq.heappush(self.evheap, (t, node, port, kind, self.evseq, arg))

    # -- egress scheduling --------------------------------------------------

    def _kick(self, pid):
        if self.eg_busy[pid]:
            return
        qb = self.eg_qbytes[pid]
        paused = self.eg_paused[pid]
        C = self.classes
        start = self.eg_rr[pid]
        for off in range(1, C + 1):
            c = (start + off) % C
            if qb[c] > 0 and not (paused >> c) & 1:
                pkt = self.eg_q[pid][c].popleft()
                qb[c] -= pkt.payload + pkt.header
                self.eg_rr[pid] = c
                self.eg_busy[pid] = True
                ser = -(-(pkt.payload + pkt.header) * 8 * PS_PER_S // self.port_bw[pid])
                self._push(self.now + ser, self.port_node[pid], pid, K_TXDONE, pkt)
                return

    def _on_txdone(self, pid, pkt):
        self.eg_busy[pid] = False
        wire = pkt.payload + pkt.header
        if pkt.in_pid >= 0:
            self._ingress_release(pkt.in_pid, pkt.cls, wire)
            pkt.in_pid = -1
        f = self.flows[pkt.fid]
        if pkt.kind == DATA and pkt.attempt == 0 and pid == self.host_port[f.src]:
            f.first_tx_count += 1
            if f.first_tx_count == f.npkts:
                f.inject_done_ps = self.now
        if self._link_drops(pid, pkt):
            peer = self.port_peer[pid]
            self.ing_drops[peer][pkt.cls] += 1
            self.total_drops += 1
            f.drops += 1
            f.drop_bytes += wire
            self._emit_row(peer, pkt.cls)
        else:
            peer = self.port_peer[pid]
            self._push(self.now + self.port_lat[pid], self.port_node[peer], peer,
                       K_ARRIVE, pkt)
        self._kick(pid)

    def _link_drops(self, pid, pkt):
        if pkt.kind != DATA:
            return False
        seqs = self.loss_seqs[pid]
        if seqs is not None and pkt.attempt == 0 and pkt.seq in seqs:
            return True
        p = self.loss_prob[pid]
        if p > 0.0:
            h = mix(self.seed, 0xD0A, pid, pkt.fid, pkt.seq, pkt.attempt)
            return u01(h) < p
        return False

    # -- PFC ----------------------------------------------------------------

    def _ingress_admit(self, pid, cls, wire):
        """Returns False on overflow drop."""
        occ = self.ing_occ[pid][cls]
        if occ + wire > self.limit:
            return False
        occ += wire
        self.ing_occ[pid][cls] = occ
        if occ > self.peak_occ:
            self.peak_occ = occ
        if self.pfc_on:
            sent = (self.ing_pause_sent[pid] >> cls) & 1
            if pfc_action(occ, self.limit, self.headroom, self.xon_level, sent) == PFC_PAUSE:
                self.ing_pause_sent[pid] |= 1 << cls
                self.pause_frames += 1
                self.pause_tx[pid] += 1
                self._send_ctrl(pid, cls, 1)
                self.pause_log.append((self.now, pid, cls, 1))
                self._emit_row(pid, cls)
        return True

    def _ingress_release(self, pid, cls, wire):
        occ = self.ing_occ[pid][cls] - wire
        self.ing_occ[pid][cls] = occ
        sent = (self.ing_pause_sent[pid] >> cls) & 1
        if sent and pfc_action(occ, self.limit, self.headroom, self.xon_level, 1) == PFC_RESUME:
            self.ing_pause_sent[pid] &= ~(1 << cls)
            self.resume_frames += 1
            self._send_ctrl(pid, cls, 0)
            self.pause_log.append((self.now, pid, cls, 0))
            self._emit_row(pid, cls)

    def _send_ctrl(self, ing_pid, cls, on):
        peer = self.port_peer[ing_pid]
        self._push(self.now + self.port_lat[ing_pid], self.port_node[peer], peer,
                   K_CTRL, (cls, on))

    def _on_ctrl(self, pid, arg):
        cls, on = arg
        before = self.eg_paused[pid]
        if on:
            self.eg_paused[pid] = before | (1 << cls)
        else:
            self.eg_paused[pid] = before & ~(1 << cls)
        after = self.eg_paused[pid]
        tier = self.node_tier[self.port_node[pid]]
        if before == 0 and after != 0:
            self.tier_paused[tier] += 1
            if self.tier_paused[tier] == 1:
                self.cur_tiers += 1
                if self.cur_tiers > self.max_paused_tiers:
                    self.max_paused_tiers = self.cur_tiers
            if self.first_pause_ps[tier] < 0:
                self.first_pause_ps[tier] = self.now
        elif before != 0 and after == 0:
            self.tier_paused[tier] -= 1
            if self.tier_paused[tier] == 0:
                self.cur_tiers -= 1
        if not on:
            self._kick(pid)

    # -- forwarding ---------------------------------------------------------

    def _egress_for(self, node, pkt):
        f = self.flows[pkt.fid]
        dest = f.dst if pkt.kind == DATA else f.src
        pid = self.down_port[node].get(dest)
        if pid is not None:
            return pid
        ups = self.up_ports[node]
        n = len(ups)
        if n == 1:
            return ups[0]
        key = pkt.fid * 2 + (0 if pkt.kind == DATA else 1)
        idx = route_choice(self.policy, n, key, node, self.seed, self.now,
                           self.flowlet_gap, self.flet, self.spray)
        return ups[idx]

    def _on_arrive(self, node, pid, pkt):
        if self.node_is_host[node]:
            self._host_rx(node, pkt)
            return
        cls = pkt.cls
        wire = pkt.payload + pkt.header
        if not self._ingress_admit(pid, cls, wire):
            f = self.flows[pkt.fid]
            self.ing_drops[pid][cls] += 1
            self.total_drops += 1
            f.drops += 1
            f.drop_bytes += wire
            self._emit_row(pid, cls)
            return
        out = self._egress_for(node, pkt)
        pkt.in_pid = pid
        self.eg_q[out][cls].append(pkt)
        self.eg_qbytes[out][cls] += wire
        if (self.ecn_thresh >= 0 and pkt.kind == DATA and pkt.ecn == 0
                and self.eg_qbytes[out][cls] > self.ecn_thresh):
            pkt.ecn = 1
            self.eg_marks[out][cls] += 1
        self._kick(out)

    # -- endpoints ----------------------------------------------------------

    def _host_rx(self, node, pkt):
        f = self.flows[pkt.fid]
        kind = pkt.kind
        if kind == DATA:
            self._rx_data(f, pkt)
        elif kind == ACK:
            self._rx_ack(f, pkt)
        elif kind == NACK:
            self._rx_nack(f, pkt)
        else:
            self._rx_cnp(f)

    def _send_ctrl_pkt(self, f, kind, seq=0, ranges=None):
        # ack/nack/cnp all originate at the receiving host
        pkt = Pkt(f.fid, seq, 0, self.ctrl_bytes, f.cls, kind, ranges=ranges)
        hp = self.host_port[f.dst]
        self.eg_q[hp][f.cls].append(pkt)
        self.eg_qbytes[hp][f.cls] += pkt.header
        self._kick(hp)

    def _echo_ecn(self, f, pkt):
        if pkt.ecn and self.now - f.last_cnp_ps >= self.cnp_epoch:
            f.last_cnp_ps = self.now
            self._send_ctrl_pkt(f, CNP)

    def _rx_data(self, f, pkt):
        if self.transport == GBN:
            act = gbn_rx_action(f.rcv_expected, pkt.seq)
            if act == RX_DELIVER:
                self._deliver(f, pkt.seq, pkt.payload)
                self._echo_ecn(f, pkt)
                self._send_ctrl_pkt(f, ACK, f.rcv_expected)
            elif act == RX_NACK:
                f.ooo_discards += 1
                self._echo_ecn(f, pkt)
                self._send_ctrl_pkt(f, NACK, f.rcv_expected)
            else:
                f.dup_discards += 1
        else:
            if sack_contains(f.rcv_expected, f.rcv_ranges, pkt.seq):
                f.dup_discards += 1
                return
            if pkt.seq > f.rcv_expected:
                buffered = sum(e - s for s, e in f.rcv_ranges)
                if buffered >= self.reorder_limit:
                    # out of order with no buffer space: counted fault
                    f.reorder_drops += 1
                    return
            cum, _ = sack_insert(f.rcv_expected, f.rcv_ranges, pkt.seq)
            for seq in range(f.rcv_expected, cum):
                self._deliver(f, seq, f.payload_of(seq))
            f.rcv_expected = cum
            self._echo_ecn(f, pkt)
            ranges = tuple((s, e) for s, e in f.rcv_ranges)
            self._send_ctrl_pkt(f, ACK, cum, ranges)

    def _deliver(self, f, seq, payload):
        if self.transport == GBN:
            f.rcv_expected = seq + 1
        f.delivered_bytes += payload
        self.delivered_total += payload
        if f.delivery_log is not None:
            f.delivery_log.append(seq)
        if f.delivered_bytes >= f.total_bytes and not f.done:
            f.done = True
            f.end_ps = self.now
            self.flows_done += 1
            self._group_done(f.group)

    def _group_done(self, g):
        self.group_left[g] -= 1
        if self.group_left[g] == 0:
            for child in self.group_children[g]:
                self._push(self.now + self.group_compute[child], 0, 0, K_GROUP, child)

    def _rx_ack(self, f, pkt):
        cum = pkt.seq
        progressed = False
        if cum > f.acked_cum:
            for seq in range(f.acked_cum, cum):
                if seq in f.sacked:
                    f.sacked.discard(seq)
                else:
                    f.logical_out -= f.wire_of(seq)
                f.retx_guard.pop(seq, None)
            f.acked_cum = cum
            progressed = True
        if pkt.ranges:
            for s, e in pkt.ranges:
                for seq in range(max(s, f.acked_cum), e):
                    if seq not in f.sacked:
                        f.sacked.add(seq)
                        f.logical_out -= f.wire_of(seq)
                        progressed = True
            # every gap below the highest sacked range is a hole
            hole = f.acked_cum
            top = pkt.ranges[-1][0]
            for s, e in pkt.ranges:
                for seq in range(hole, min(s, top)):
                    self._queue_retx(f, seq)
                hole = e
        if progressed:
            f.rto_deadline = self.now + self.timeout_ps
        if f.acked_cum >= f.npkts:
            return
        self._ensure_release(f)

    def _queue_retx(self, f, seq):
        if seq < f.acked_cum or seq in f.sacked:
            return
        last = f.retx_guard.get(seq, -(1 << 60))
        if self.now - last < self.nack_guard:
            return
        f.retx_guard[seq] = self.now
        f.retxq.append(seq)

    def _rx_nack(self, f, pkt):
        seq = pkt.seq
        if seq < f.acked_cum:
            return
        if self.now - f.last_rewind_ps < self.nack_guard:
            return
        if seq < f.send_next:
            f.last_rewind_ps = self.now
            f.send_next = seq
            self._ensure_release(f)

    def _rx_cnp(self, f):
        if f.first_feedback_ps < 0:
            f.first_feedback_ps = self.now
        f.marked_epoch = True
        if self.cc_mode == CC_RATE:
            r = int(f.rate_bps * self.cc_factor)
            f.rate_bps = r if r > self.cc_min_rate else self.cc_min_rate
        else:
            w = int(f.window_bytes * self.cc_factor)
            f.window_bytes = w if w > self.cc_min_window else self.cc_min_window

    # -- sender pacing ------------------------------------------------------

    def _ensure_release(self, f):
        if f.pacing or f.done or f.acked_cum >= f.npkts:
            return
        t = f.pace_next_ps
        if t < self.now:
            t = self.now
        f.pacing = True
        self._push(t, f.src, self.host_port[f.src], K_RELEASE, f.fid)

    def _pick_seq(self, f):
        if self.transport == GBN:
            if f.send_next < f.acked_cum:
                f.send_next = f.acked_cum
            if f.send_next < f.npkts:
                seq = f.send_next
                f.send_next += 1
                return seq
            return -1
        while f.retxq:
            seq = f.retxq[0]
            if seq < f.acked_cum or seq in f.sacked:
                f.retxq.popleft()
                continue
            f.retxq.popleft()
            return seq
        if f.next_new < f.npkts:
            seq = f.next_new
            # window gate applies to first transmissions only
            if (self.cc_mode == CC_WINDOW
                    and f.logical_out + f.wire_of(seq) > f.window_bytes):
                return -1
            f.next_new += 1
            return seq
        return -1

    def _on_release(self, fid):
        f = self.flows[fid]
        f.pacing = False
        if f.done or f.acked_cum >= f.npkts:
            return
        if self.transport == GBN and self.cc_mode == CC_WINDOW:
            nxt = f.send_next if f.send_next >= f.acked_cum else f.acked_cum
            if (nxt < f.npkts and f.attempts[nxt] == 0
                    and f.logical_out + f.wire_of(nxt) > f.window_bytes):
                return
        seq = self._pick_seq(f)
        if seq < 0:
            return
        payload = f.payload_of(seq)
        attempt = f.attempts[seq]
        f.attempts[seq] = attempt + 1
        wire = payload + f.header
        if attempt > 0:
            f.retx_bytes += wire
        else:
            f.logical_out += wire
        pkt = Pkt(fid, seq, payload, f.header, f.cls, DATA, attempt)
        hp = self.host_port[f.src]
        self.eg_q[hp][f.cls].append(pkt)
        self.eg_qbytes[hp][f.cls] += wire
        self._kick(hp)
        pace = f.rate_bps
        if self.cc_mode == CC_WINDOW:
            pace = self.port_bw[hp]
        if f.max_rate_bps and pace > f.max_rate_bps:
            pace = f.max_rate_bps
        ival = -(-wire * 8 * PS_PER_S // pace)
        f.pace_next_ps = self.now + ival
        f.pacing = True
        self._push(f.pace_next_ps, f.src, hp, K_RELEASE, fid)

    def _on_cctick(self, fid):
        f = self.flows[fid]
        if f.done or f.acked_cum >= f.npkts:
            return
        if f.marked_epoch:
            f.marked_epoch = False
        else:
            if self.cc_mode == CC_RATE:
                cap = self.port_bw[self.host_port[f.src]]
                if f.max_rate_bps and f.max_rate_bps < cap:
                    cap = f.max_rate_bps
                r = f.rate_bps + self.cc_step_bps
                f.rate_bps = cap if r > cap else r
            else:
                f.window_bytes += self.cc_step_bytes
        self._push(self.now + self.cc_period, f.src, self.host_port[f.src],
                   K_CCTICK, fid)

    def _on_rto(self, fid):
        f = self.flows[fid]
        if f.done or f.acked_cum >= f.npkts:
            return
        if self.now < f.rto_deadline:
            self._push(f.rto_deadline, f.src, self.host_port[f.src], K_RTO, fid)
            return
        fired = False
        if self.transport == GBN:
            if f.send_next > f.acked_cum or f.send_next >= f.npkts:
                f.send_next = f.acked_cum
                f.last_rewind_ps = self.now
                fired = True
        else:
            high = f.next_new
            for seq in range(f.acked_cum, high):
                if seq not in f.sacked:
                    f.retx_guard[seq] = self.now
                    f.retxq.append(seq)
                    fired = True
        if fired:
            f.rto_count += 1
            self._ensure_release(f)
        f.rto_deadline = self.now + self.timeout_ps
        self._push(f.rto_deadline, f.src, self.host_port[f.src], K_RTO, fid)

    # -- groups, sampling, watchdog ----------------------------------------

    def _on_group(self, g):
        for fid in self.group_members[g]:
            f = self.flows[fid]
            f.released = True
            f.start_ps = self.now + f.start_offset_ps
            f.pace_next_ps = f.start_ps
            hp = self.host_port[f.src]
            f.rate_bps = self.port_bw[hp]
            if f.max_rate_bps and f.max_rate_bps < f.rate_bps:
                f.rate_bps = f.max_rate_bps
            f.window_bytes = self.init_window
            f.pacing = True
            self._push(f.start_ps, f.src, hp, K_RELEASE, fid)
            self._push(f.start_ps + self.cc_period, f.src, hp, K_CCTICK, fid)
            f.rto_deadline = f.start_ps + self.timeout_ps
            self._push(f.rto_deadline, f.src, hp, K_RTO, fid)

    def _emit_row(self, pid, cls):
        self.port_rows.append((
            self.now, self.port_node[pid], pid, cls,
            self.ing_occ[pid][cls],
            (self.ing_pause_sent[pid] >> cls) & 1,
            self.eg_marks[pid][cls],
            self.ing_drops[pid][cls],
        ))

    def _on_sample(self):
        C = self.classes
        for pid in range(len(self.port_node)):
            for c in range(C):
                state = (self.ing_occ[pid][c], (self.ing_pause_sent[pid] >> c) & 1,
                         self.eg_marks[pid][c], self.ing_drops[pid][c],
                         self.eg_qbytes[pid][c])
                if any(state):
                    key = (pid, c)
                    if self._row_state.get(key) != state:
                        self._row_state[key] = state
                        self._emit_row(pid, c)
        if self.flows_done < len(self.flows):
            self._push(self.now + self.sample_ps, 0, 0, K_SAMPLE, None)

    def _deadlock_report(self):
        stuck = [f.fid for f in self.flows if not f.done]
        paused = [(self.port_node[pid], pid, self.eg_paused[pid])
                  for pid in range(len(self.port_node)) if self.eg_paused[pid]]
        return {
            "time_ps": self.now,
            "incomplete_flows": stuck,
            "paused_egress_ports": paused,
            "delivered_bytes": self.delivered_total,
        }

    def _on_watchdog(self):
        if self.flows_done >= len(self.flows):
            return
        if self.delivered_total == self._progress_mark:
            raise DeadlockError(self._deadlock_report())
        self._progress_mark = self.delivered_total
        self._push(self.now + self.watchdog_ps, 0, 0, K_WATCHDOG, None)

    # -- main loop ----------------------------------------------------------

    def run(self):
        for g, pre in enumerate(self.group_prereq):
            if pre < 0:
                self._push(self.group_compute[g], 0, 0, K_GROUP, g)
        if self.sample_ps > 0:
            self._push(self.sample_ps, 0, 0, K_SAMPLE, None)
        if self.watchdog_ps > 0:
            self._progress_mark = 0
            self._push(self.watchdog_ps, 0, 0, K_WATCHDOG, None)
        heap = self.evheap
        nflows = len(self.flows)
        while heap:
            if self.flows_done >= nflows:
                break
            t, node, port, kind, _, arg = heapq.heappop(heap)
            if self.horizon_ps > 0 and t > self.horizon_ps:
                break
            self.now = t
            self.events += 1
            if kind == K_ARRIVE:
                self._on_arrive(node, port, arg)
            elif kind == K_TXDONE:
                self._on_txdone(port, arg)
            elif kind == K_RELEASE:
                self._on_release(arg)
            elif kind == K_CTRL:
                self._on_ctrl(port, arg)
            elif kind == K_CCTICK:
                self._on_cctick(arg)
            elif kind == K_RTO:
                self._on_rto(arg)
            elif kind == K_GROUP:
                self._on_group(arg)
            elif kind == K_SAMPLE:
                self._on_sample()
            else:
                self._on_watchdog()
        if self.flows_done < nflows and not self.evheap:
            raise DeadlockError(self._deadlock_report())
        return self._results()

    def _results(self):
        return {
            "flows": self.flows,
            "port_rows": self.port_rows,
            "pause_log": self.pause_log,
            "sim_time_ps": self.now,
            "events": self.events,
            "total_drops": self.total_drops,
            "pause_frames": self.pause_frames,
            "resume_frames": self.resume_frames,
            "peak_occupancy": self.peak_occ,
            "max_paused_tiers": self.max_paused_tiers,
            "first_pause_ps": self.first_pause_ps,
            "delivered_bytes": self.delivered_total,
        }
