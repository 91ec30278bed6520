"""Poisson packet arrivals and the slotted FIFO transmit schedule.

One sensing window is floor(T_s * W) symbol slots. Pilot slots (time
sharing only) preempt data; an interrupted packet resumes on the next
free slot. A packet occupies ceil(B / log2 Q) slots, never fragmented
across users, and may start at the first slot whose start time is at or
after its arrival. Unserved work carries across windows through
BufferState.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

# slot kind codes used in schedule arrays
IDLE = 0
DATA = 1
PILOT = 2


@dataclass(frozen=True)
class PacketArrival:
    t_arrival: float  # seconds, relative to window start
    n_symbols: int


@dataclass
class BufferState:
    """FIFO backlog carried between windows: the partially sent packet
    plus queued packets that have already arrived."""

    symbols_remaining: int = 0
    queue: deque = field(default_factory=deque)

    def copy(self) -> "BufferState":
        return BufferState(self.symbols_remaining, deque(self.queue))

    @property
    def backlog_symbols(self) -> int:
        return self.symbols_remaining + sum(p.n_symbols for p in self.queue)


def generate_arrivals(
    lambda_u: float, horizon_s: float, rng: np.random.Generator, n_symbols: int
) -> list[PacketArrival]:
    """Poisson arrivals in [0, horizon): i.i.d. exponential gaps, sorted."""
    if lambda_u == 0.0:
        return []
    times: list[float] = []
    t = 0.0
    batch = max(16, int(lambda_u * horizon_s * 1.5) + 8)
    while True:
        cum = t + np.cumsum(rng.exponential(1.0 / lambda_u, batch))
        inside = cum[cum < horizon_s]
        times.extend(inside.tolist())
        if cum[-1] >= horizon_s:
            break
        t = cum[-1]
    return [PacketArrival(ti, n_symbols) for ti in times]


def pilot_sectors(n_pilots: int, n_sectors: int) -> np.ndarray:
    """Sector indices (1-based) assigned to pilot slots in position order,
    cycling 1..n_sectors."""
    return 1 + np.arange(n_pilots) % n_sectors


def build_schedule(
    arrivals: list[PacketArrival],
    buffer_in: BufferState,
    n_slots: int,
    pilot_slots,
    symbol_rate: float,
) -> tuple[np.ndarray, BufferState]:
    """Fill one window's slots and evolve the buffer.

    Service order is strict FIFO: the interrupted in-service packet, then
    the carried queue, then this window's arrivals as they become
    eligible. Returns (kinds uint8 array of IDLE/DATA/PILOT codes,
    buffer_out).
    """
    pilot_slots = np.asarray(sorted(pilot_slots), dtype=np.intp)
    if pilot_slots.size:
        if np.unique(pilot_slots).size != pilot_slots.size:
            raise ValueError("pilot slots overlap")
        if pilot_slots[0] < 0 or pilot_slots[-1] >= n_slots:
            raise ValueError("pilot slot outside window")

    kinds = np.zeros(n_slots, dtype=np.uint8)
    kinds[pilot_slots] = PILOT
    if pilot_slots.size == 0:
        avail = np.arange(n_slots, dtype=np.intp)
    elif pilot_slots[-1] == pilot_slots.size - 1:
        # common case: pilots occupy the leading slots
        avail = np.arange(pilot_slots.size, n_slots, dtype=np.intp)
    else:
        avail = np.setdiff1d(np.arange(n_slots, dtype=np.intp), pilot_slots)
    n_avail = avail.size
    out = buffer_in.copy()
    cursor = 0

    def fill(count: int) -> int:
        nonlocal cursor
        take = min(count, n_avail - cursor)
        if take > 0:
            kinds[avail[cursor : cursor + take]] = DATA
            cursor += take
        return count - take

    if out.symbols_remaining:
        out.symbols_remaining = fill(out.symbols_remaining)
    while out.queue and cursor < n_avail and not out.symbols_remaining:
        out.symbols_remaining = fill(out.queue.popleft().n_symbols)

    for pkt in sorted(arrivals, key=lambda p: p.t_arrival):
        if out.symbols_remaining or cursor >= n_avail:
            out.queue.append(pkt)
            continue
        eligible = math.ceil(pkt.t_arrival * symbol_rate - 1e-9)
        cursor = max(cursor, int(np.searchsorted(avail, eligible)))
        if cursor >= n_avail:
            out.queue.append(pkt)
            continue
        out.symbols_remaining = fill(pkt.n_symbols)

    return kinds, out
