"""Discrete-event simulator of a kiosk broadcasting over short-range radio.

Devices arrive as a Poisson stream and dwell in range for an exponential
time; a periodic discovery scan queues devices that were never offered the
file; a fixed number of transfer slots serve the queue FIFO during open
hours. A prompted user rejects with probability p_reject (occupying a slot
only for a quick-dismissal fraction of a service draw); accepted transfers
occupy a full lognormal service time and fail with probability
p_fail_given_accept, which folds in both departures and radio loss.

Each run is a single-threaded loop over a priority queue keyed by
(time, sequence); identical config and seed give identical stats.
"""

from __future__ import annotations

import dataclasses
import json
import math
import random
from dataclasses import dataclass
from heapq import heappush, heappop
from typing import Iterable, Optional

from .errors import McmsError

DAY_S = 86400.0

_ENTER, _LEAVE, _SCAN, _OFFER_START, _OFFER_RESOLVE, _REQUEST = range(6)


class InvalidConfig(McmsError):
    code = "InvalidConfig"


class UnknownApp(McmsError):
    code = "UnknownApp"


class SlotBoundViolation(McmsError):
    # Internal invariant; raised (not assert) so -O cannot silence it.
    code = "SlotBoundViolation"


@dataclass(frozen=True)
class SimConfig:
    seed: int = 1
    duration_s: float = 2 * DAY_S
    open_hours_per_day: float = 9.0
    arrival_rate_per_s: float = 4.0
    dwell_mean_s: float = 45.0
    scan_period_s: float = 30.0
    slots: int = 7
    service_time_mean_s: float = 500.0
    service_time_sigma: float = 0.6
    p_reject: float = 0.556
    p_fail_given_accept: float = 0.25
    reject_occupancy_fraction: float = 0.1
    file_size_bytes: int = 350_000
    range_radius_m: float = 100.0  # annotation only, not modeled geometrically
    collect_timeline: bool = False
    collect_device_log: bool = False


@dataclass(frozen=True)
class TimelineRow:
    hour: int
    attempts: int
    successes: int
    failures: int
    rejections: int


@dataclass(frozen=True)
class DeviceRecord:
    device_id: int
    enter_time: float
    leave_time: float
    offered: bool
    outcome: str  # none | rejected | success | failed


@dataclass(frozen=True)
class SimStats:
    seed: int
    attempts: int
    successes: int
    failures: int
    rejections: int
    unique_devices_seen: int
    mean_concurrent_in_range: float
    timeline: Optional[tuple] = None
    device_log: Optional[tuple] = None


def validate_config(config: SimConfig) -> None:
    problems = []
    if config.duration_s <= 0:
        problems.append("duration_s must be positive")
    if config.open_hours_per_day <= 0 or config.open_hours_per_day > 24:
        problems.append("open_hours_per_day must be in (0, 24]")
    if config.arrival_rate_per_s < 0:
        problems.append("arrival_rate_per_s must be >= 0")
    if config.dwell_mean_s <= 0:
        problems.append("dwell_mean_s must be positive")
    if config.scan_period_s <= 0:
        problems.append("scan_period_s must be positive")
    if config.slots < 1:
        problems.append("slots must be >= 1")
    if config.service_time_mean_s <= 0:
        problems.append("service_time_mean_s must be positive")
    if config.service_time_sigma < 0:
        problems.append("service_time_sigma must be >= 0")
    for name in ("p_reject", "p_fail_given_accept", "reject_occupancy_fraction"):
        value = getattr(config, name)
        if not 0.0 <= value <= 1.0:
            problems.append(f"{name} must be in [0, 1]")
    if problems:
        raise InvalidConfig("; ".join(problems))


def _streams(seed: int):
    """Independent generators per concern, stably derived from the run seed."""
    def stream(name: str) -> random.Random:
        return random.Random(f"{seed}/{name}")
    return stream("arrival"), stream("dwell"), stream("service"), stream("outcome")


class _Run:
    def __init__(self, config: SimConfig):
        self.config = config
        self.open_s = config.open_hours_per_day * 3600.0
        self.arrival_rng, self.dwell_rng, self.service_rng, self.outcome_rng = _streams(config.seed)
        self.lognorm_mu = math.log(config.service_time_mean_s) - config.service_time_sigma ** 2 / 2.0

        self.heap: list = []
        self.seq = 0
        self.active = 0
        self.attempts = 0
        self.successes = 0
        self.failures = 0
        self.rejections = 0
        self.timeline: dict = {}

    def push(self, time: float, kind: int, payload) -> None:
        heappush(self.heap, (time, self.seq, kind, payload))
        self.seq += 1

    def within_open(self, t: float) -> bool:
        return t % DAY_S < self.open_s

    def service_draw(self) -> float:
        return self.service_rng.lognormvariate(self.lognorm_mu, self.config.service_time_sigma)

    def take_slot(self) -> None:
        self.active += 1
        if self.active > self.config.slots:
            raise SlotBoundViolation(f"{self.active} active > {self.config.slots} slots")

    def bucket(self, t: float, field: int) -> None:
        if self.config.collect_timeline:
            row = self.timeline.setdefault(int(t // 3600.0), [0, 0, 0, 0])
            row[field] += 1

    def start_offer(self, t: float, rejectable: bool) -> tuple:
        """Draw the outcome and schedule the resolve; returns (outcome, end)."""
        self.attempts += 1
        self.bucket(t, 0)
        u = self.outcome_rng.random()
        service = self.service_draw()
        if rejectable and u < self.config.p_reject:
            return "rejected", t + self.config.reject_occupancy_fraction * service
        if self.outcome_rng.random() < self.config.p_fail_given_accept:
            return "failed", t + service
        return "success", t + service

    def resolve(self, t: float, outcome: str) -> None:
        self.active -= 1
        if outcome == "success":
            self.successes += 1
            self.bucket(t, 1)
        elif outcome == "failed":
            self.failures += 1
            self.bucket(t, 2)
        else:
            self.rejections += 1
            self.bucket(t, 3)

    def finish(self, seed: int, unique: int, mean_in_range: float, device_log=None) -> SimStats:
        if self.attempts != self.successes + self.failures + self.rejections:
            raise SlotBoundViolation("outcome accounting out of balance")
        timeline = None
        if self.config.collect_timeline:
            timeline = tuple(TimelineRow(h, *counts) for h, counts in sorted(self.timeline.items()))
        return SimStats(
            seed=seed,
            attempts=self.attempts,
            successes=self.successes,
            failures=self.failures,
            rejections=self.rejections,
            unique_devices_seen=unique,
            mean_concurrent_in_range=mean_in_range,
            timeline=timeline,
            device_log=device_log,
        )


def _run_auto(config: SimConfig) -> SimStats:
    run = _Run(config)
    arrival_rng, dwell_rng = run.arrival_rng, run.dwell_rng
    duration = config.duration_s
    rate = config.arrival_rate_per_s

    in_range: dict = {}      # device id -> leave time
    queued: set = set()
    offered: set = set()
    queue: list = []         # FIFO of device ids; stale heads dropped on pop
    qhead = 0
    devices_seen = 0
    presence_total = 0.0
    enter_at: dict = {} if config.collect_device_log else None
    outcomes: dict = {} if config.collect_device_log else None

    if rate > 0:
        first = arrival_rng.expovariate(rate)
        if first <= duration:
            run.push(first, _ENTER, None)
    if config.scan_period_s <= duration:
        run.push(config.scan_period_s, _SCAN, None)

    def dispatch(t: float) -> None:
        nonlocal qhead
        if t >= duration or not run.within_open(t):
            return
        while run.active < config.slots and qhead < len(queue):
            device = queue[qhead]
            qhead += 1
            queued.discard(device)
            if in_range.get(device, 0.0) <= t:
                continue  # left range while waiting
            offered.add(device)
            run.take_slot()
            run.push(t, _OFFER_START, device)
        if qhead > 4096 and qhead * 2 > len(queue):
            del queue[:qhead]
            qhead = 0

    while run.heap:
        t, _, kind, payload = heappop(run.heap)
        if kind == _ENTER:
            devices_seen += 1
            device = devices_seen
            leave = t + dwell_rng.expovariate(1.0 / config.dwell_mean_s)
            in_range[device] = leave
            presence_total += min(leave, duration) - t
            run.push(leave, _LEAVE, device)
            if enter_at is not None:
                enter_at[device] = (t, leave)
            nxt = t + arrival_rng.expovariate(rate)
            if nxt <= duration:
                run.push(nxt, _ENTER, None)
        elif kind == _LEAVE:
            in_range.pop(payload, None)
        elif kind == _SCAN:
            for device in in_range:
                if device not in offered and device not in queued:
                    queued.add(device)
                    queue.append(device)
            dispatch(t)
            nxt = t + config.scan_period_s
            if nxt <= duration:
                run.push(nxt, _SCAN, None)
        elif kind == _OFFER_START:
            outcome, end = run.start_offer(t, rejectable=True)
            run.push(end, _OFFER_RESOLVE, (payload, outcome))
        elif kind == _OFFER_RESOLVE:
            device, outcome = payload
            run.resolve(t, outcome)
            if outcomes is not None:
                outcomes[device] = outcome
            dispatch(t)

    device_log = None
    if enter_at is not None:
        device_log = tuple(
            DeviceRecord(d, et, lt, d in offered, outcomes.get(d, "none"))
            for d, (et, lt) in sorted(enter_at.items())
        )
    return run.finish(config.seed, devices_seen, presence_total / duration, device_log)


def _run_manual(config: SimConfig, requests: Iterable, held=None) -> SimStats:
    requests = sorted(requests, key=lambda r: r[0])
    for time, app_id in requests:
        if not 0 <= time <= config.duration_s:
            raise InvalidConfig(f"request at {time} outside duration {config.duration_s}")
        if held is not None and app_id not in held:
            raise UnknownApp(app_id)

    run = _Run(config)
    waiting: list = []
    whead = 0

    def dispatch(t: float) -> None:
        nonlocal whead
        while run.active < config.slots and whead < len(waiting):
            whead += 1
            run.take_slot()
            outcome, end = run.start_offer(t, rejectable=False)
            run.push(end, _OFFER_RESOLVE, outcome)

    for time, app_id in requests:
        run.push(time, _REQUEST, app_id)
    while run.heap:
        t, _, kind, payload = heappop(run.heap)
        if kind == _REQUEST:
            waiting.append(payload)
            dispatch(t)
        elif kind == _OFFER_RESOLVE:
            run.resolve(t, payload)
            dispatch(t)

    return run.finish(config.seed, len(requests), 0.0)


def run_sim(config: SimConfig, mode: str = "auto", requests: Optional[Iterable] = None) -> SimStats:
    """Execute one scenario; `mode` is "auto" (proximity broadcast) or
    "manual_trace" (menu-driven requests, never rejected)."""
    validate_config(config)
    if mode == "auto":
        return _run_auto(config)
    if mode == "manual_trace":
        return _run_manual(config, requests or [])
    raise InvalidConfig(f"unknown mode {mode!r}")


def run_manual_trace(config: SimConfig, requests: Iterable, held=None) -> SimStats:
    """Menu-driven requests against the slot pool; `held` (when given) is the
    kiosk's app set and unknown app ids are refused."""
    validate_config(config)
    return _run_manual(config, requests, held=held)


def exhibition_preset(seed: int = 1) -> SimConfig:
    """Two 9-hour exhibition days, 7 transfer slots, 4 arrivals/s dwelling
    45 s (so 180 devices sit in range on average), service time calibrated so
    the slot pool completes about 1800 offers over the two days."""
    return SimConfig(
        seed=seed,
        duration_s=2 * DAY_S,
        open_hours_per_day=9.0,
        arrival_rate_per_s=4.0,
        dwell_mean_s=45.0,
        scan_period_s=30.0,
        slots=7,
        service_time_mean_s=500.0,
        service_time_sigma=0.6,
        p_reject=0.556,
        p_fail_given_accept=0.25,
        reject_occupancy_fraction=0.1,
        file_size_bytes=350_000,
    )


_SCENARIO_EXTRA_KEYS = {"mode", "requests"}


def load_scenario(data: bytes):
    """Parse a scenario JSON file mirroring SimConfig field names.

    Returns (config, mode, requests); unknown fields are rejected.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InvalidConfig(f"scenario is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise InvalidConfig("scenario must be a JSON object")
    known = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = set(doc) - known - _SCENARIO_EXTRA_KEYS
    if unknown:
        raise InvalidConfig(f"unknown scenario fields: {', '.join(sorted(unknown))}")
    mode = doc.pop("mode", "auto")
    raw_requests = doc.pop("requests", [])
    requests = []
    for entry in raw_requests:
        if (not isinstance(entry, (list, tuple)) or len(entry) != 2
                or not isinstance(entry[0], (int, float)) or isinstance(entry[0], bool)
                or not isinstance(entry[1], str)):
            raise InvalidConfig(f"request entries are [time, app_id] pairs, got {entry!r}")
        requests.append((float(entry[0]), entry[1]))
    try:
        config = SimConfig(**doc)
    except TypeError as e:
        raise InvalidConfig(str(e)) from None
    validate_config(config)
    if mode not in ("auto", "manual_trace"):
        raise InvalidConfig(f"unknown mode {mode!r}")
    return config, mode, requests
