"""Tick ingestion, event time, non-overlapping log-returns, and blocking.

The raw unit of input is a quote/trade record (timestamp, bid, ask, traded
price).  Records are filtered (session window, crossed quotes, non-positive
prices, mid-price jumps), then reduced to event time: the clock advances
only when the mid-price changes.  Log-returns are taken at a fixed event
lag tau without overlap, grouped into consecutive blocks of N, and each
block contributes its scale estimate sigma_j and its near-extreme distances
to the pooled statistics.

Two entry points coexist: a record-level API working on in-memory
``TickRecord`` sequences (the contract surface), and a streaming file
reader that parses CSV in batches and keeps only one day of ticks in
memory at a time (the throughput surface; 4e7 records must ingest in well
under a minute).  Both share the same filter kernel, so they cannot drift
apart.  Returns never straddle a day boundary (the event series restarts
each day) but blocks may, matching how consecutive intraday returns are
blocked across days.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numba
import numpy as np
import polars as pl

from .errors import DataError, DomainError, ParameterError
from .near_extreme import EmpiricalNearExtreme, MixtureModel

__all__ = [
    "PipelineConfig", "TickRecord", "EventSeries", "BlockedReturns",
    "FilterStats", "filter_ticks", "build_event_series", "compute_returns",
    "block_returns", "aggregate_near_extreme", "fit_mixture",
    "iter_day_series", "ingest_returns",
]

log = logging.getLogger(__name__)

_NS_PER_DAY = 86_400_000_000_000
_CSV_COLUMNS = ("timestamp", "bid", "ask", "trade_price")
_TS_FORMAT = "%Y-%m-%dT%H:%M:%S%.f"

VARIANCE_CONVENTIONS = ("zero_mean", "centered")


def _parse_time_ns(text: str) -> int:
    t = _dt.time.fromisoformat(text)
    return ((t.hour * 60 + t.minute) * 60 + t.second) * 1_000_000_000 + t.microsecond * 1000


@dataclass(frozen=True)
class PipelineConfig:
    """Filtering and estimation knobs; every filter rule can be toggled off."""

    session_start: str = "10:00:00"
    session_end: str = "15:45:00"
    jump_threshold: float = 0.10
    variance_convention: str = "zero_mean"
    filter_session: bool = True
    filter_prices: bool = True
    filter_crossed: bool = True
    filter_jumps: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.variance_convention not in VARIANCE_CONVENTIONS:
            raise ParameterError(
                f"variance_convention must be one of {VARIANCE_CONVENTIONS}, "
                f"got {self.variance_convention!r}")
        if not self.jump_threshold > 0.0:
            raise ParameterError("jump_threshold must be positive")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        _parse_time_ns(self.session_start)
        _parse_time_ns(self.session_end)

    @property
    def session_start_ns(self) -> int:
        return _parse_time_ns(self.session_start)

    @property
    def session_end_ns(self) -> int:
        return _parse_time_ns(self.session_end)

    def to_dict(self) -> dict:
        return {
            "session_start": self.session_start,
            "session_end": self.session_end,
            "jump_threshold": self.jump_threshold,
            "variance_convention": self.variance_convention,
            "filter_session": self.filter_session,
            "filter_prices": self.filter_prices,
            "filter_crossed": self.filter_crossed,
            "filter_jumps": self.filter_jumps,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_json_file(cls, path) -> "PipelineConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except FileNotFoundError as exc:
            raise DataError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"config file {path} is not valid JSON: {exc}") from exc


@dataclass(frozen=True)
class TickRecord:
    timestamp: _dt.datetime
    bid: float
    ask: float
    trade_price: float
    symbol: str = ""


@dataclass(frozen=True)
class EventSeries:
    """Mid-prices sampled each time the mid changes (consecutive mids differ)."""

    mids: np.ndarray

    @property
    def event_count(self) -> int:
        return int(self.mids.size)


@dataclass(frozen=True)
class FilterStats:
    records_in: int = 0
    records_kept: int = 0
    dropped_session: int = 0
    dropped_invalid: int = 0
    dropped_jump: int = 0
    days_skipped: int = 0

    def merged(self, other: "FilterStats") -> "FilterStats":
        return FilterStats(
            records_in=self.records_in + other.records_in,
            records_kept=self.records_kept + other.records_kept,
            dropped_session=self.dropped_session + other.dropped_session,
            dropped_invalid=self.dropped_invalid + other.dropped_invalid,
            dropped_jump=self.dropped_jump + other.dropped_jump,
            days_skipped=self.days_skipped + other.days_skipped,
        )

    def to_dict(self) -> dict:
        return {
            "records_in": self.records_in,
            "records_kept": self.records_kept,
            "dropped_session": self.dropped_session,
            "dropped_invalid": self.dropped_invalid,
            "dropped_jump": self.dropped_jump,
            "days_skipped": self.days_skipped,
        }


@numba.njit(cache=True, nogil=True)
def _keep_mask_kernel(tod_ns, bid, ask, trade, start_ns, end_ns, jump_threshold,
                      use_session, use_prices, use_crossed, use_jumps):
    n = bid.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    dropped_session = 0
    dropped_invalid = 0
    dropped_jump = 0
    last_mid = 0.0
    have_last = False
    for i in range(n):
        if use_session and (tod_ns[i] < start_ns or tod_ns[i] > end_ns):
            dropped_session += 1
            continue
        b = bid[i]
        a = ask[i]
        if use_prices and (b <= 0.0 or a <= 0.0 or trade[i] <= 0.0):
            dropped_invalid += 1
            continue
        if use_crossed and b > a:
            dropped_invalid += 1
            continue
        mid = 0.5 * (b + a)
        if use_jumps and have_last:
            rel = mid / last_mid - 1.0
            if rel < 0.0:
                rel = -rel
            if rel > jump_threshold:
                dropped_jump += 1
                continue
        last_mid = mid
        have_last = True
        keep[i] = True
    return keep, dropped_session, dropped_invalid, dropped_jump


def _filter_arrays(tod_ns: np.ndarray, bid: np.ndarray, ask: np.ndarray,
                   trade: np.ndarray, config: PipelineConfig
                   ) -> tuple[np.ndarray, FilterStats]:
    keep, d_sess, d_inv, d_jump = _keep_mask_kernel(
        tod_ns, bid, ask, trade,
        config.session_start_ns, config.session_end_ns,
        config.jump_threshold,
        config.filter_session, config.filter_prices,
        config.filter_crossed, config.filter_jumps)
    stats = FilterStats(records_in=int(bid.size), records_kept=int(keep.sum()),
                        dropped_session=int(d_sess), dropped_invalid=int(d_inv),
                        dropped_jump=int(d_jump))
    return keep, stats


def _event_mids(mids: np.ndarray) -> np.ndarray:
    """Compress consecutive equal mids: one event per mid change."""
    if mids.size == 0:
        return mids
    change = np.empty(mids.size, dtype=bool)
    change[0] = True
    np.not_equal(mids[1:], mids[:-1], out=change[1:])
    return mids[change]


def _records_to_arrays(records: Sequence[TickRecord]):
    tod = np.fromiter(
        ((((r.timestamp.hour * 60 + r.timestamp.minute) * 60 + r.timestamp.second)
          * 1_000_000_000 + r.timestamp.microsecond * 1000) for r in records),
        dtype=np.int64, count=len(records))
    bid = np.fromiter((r.bid for r in records), dtype=float, count=len(records))
    ask = np.fromiter((r.ask for r in records), dtype=float, count=len(records))
    trade = np.fromiter((r.trade_price for r in records), dtype=float,
                        count=len(records))
    return tod, bid, ask, trade


def filter_ticks(records: Sequence[TickRecord],
                 session: tuple[str, str] | None = None,
                 config: PipelineConfig | None = None
                 ) -> tuple[list[TickRecord], FilterStats]:
    """Drop records outside the session window, with bad prices, or jumping mids.

    The jump rule compares each mid against the previous *surviving* mid.
    Returns the surviving records (input order) plus per-rule drop counts.
    """
    cfg = config or PipelineConfig()
    if session is not None:
        cfg = replace(cfg, session_start=session[0], session_end=session[1])
    if not records:
        return [], FilterStats()
    records = sorted(records, key=lambda r: r.timestamp)
    tod, bid, ask, trade = _records_to_arrays(records)
    keep, stats = _filter_arrays(tod, bid, ask, trade, cfg)
    kept = [r for r, k in zip(records, keep) if k]
    if not kept:
        log.warning("all %d records filtered out; day skipped", len(records))
        stats = replace(stats, days_skipped=1)
    return kept, stats


def build_event_series(records: Sequence[TickRecord]) -> EventSeries:
    """Event-time mid series from already filtered, time-ordered records."""
    mids = np.fromiter((0.5 * (r.bid + r.ask) for r in records), dtype=float,
                       count=len(records))
    return EventSeries(mids=_event_mids(mids))


def compute_returns(series: EventSeries, lag: int) -> np.ndarray:
    """Non-overlapping log-returns at event-time lag tau.

    r_i = ln(S[(i+1) tau] / S[i tau]) for i = 0 .. floor((L-1)/tau) - 1.
    """
    if lag < 1:
        raise DomainError(f"lag must be >= 1, got {lag}")
    length = series.event_count
    count = (length - 1) // lag
    if count < 1:
        log.warning("event series of length %d too short for lag %d", length, lag)
        return np.empty(0)
    sampled = series.mids[: (count + 1) * lag : lag]
    return np.diff(np.log(sampled))


@dataclass(frozen=True)
class BlockedReturns:
    """Consecutive non-overlapping blocks of N returns with per-block scale.

    ``sigmas[j]`` is the block scale estimate (zero-mean second moment by
    default, since the model has no drift term); degenerate all-zero blocks
    are excluded and counted.  ``total_returns`` is h x N.
    """

    lag: int
    block_size: int
    returns: np.ndarray           # shape (h, N)
    sigmas: np.ndarray            # shape (h,)
    maxima: np.ndarray
    minima: np.ndarray
    dropped_tail: int
    degenerate_blocks: int
    variance_convention: str = "zero_mean"
    day_boundaries: tuple[int, ...] = ()

    @property
    def block_count(self) -> int:
        return int(self.returns.shape[0])

    @property
    def total_returns(self) -> int:
        return int(self.returns.size)

    def to_dict(self) -> dict:
        return {
            "tau": self.lag,
            "block_size": self.block_size,
            "variance_convention": self.variance_convention,
            "dropped_tail": self.dropped_tail,
            "degenerate_blocks": self.degenerate_blocks,
            "day_boundaries": list(self.day_boundaries),
            "blocks": [
                {
                    "returns": [float(x) for x in row],
                    "sigma": float(s),
                    "max": float(mx),
                    "min": float(mn),
                }
                for row, s, mx, mn in zip(self.returns, self.sigmas,
                                          self.maxima, self.minima)
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BlockedReturns":
        blocks = obj["blocks"]
        returns = np.asarray([b["returns"] for b in blocks], dtype=float)
        if returns.size == 0:
            returns = returns.reshape(0, obj["block_size"])
        return cls(
            lag=int(obj["tau"]),
            block_size=int(obj["block_size"]),
            returns=returns,
            sigmas=np.asarray([b["sigma"] for b in blocks], dtype=float),
            maxima=np.asarray([b["max"] for b in blocks], dtype=float),
            minima=np.asarray([b["min"] for b in blocks], dtype=float),
            dropped_tail=int(obj["dropped_tail"]),
            degenerate_blocks=int(obj["degenerate_blocks"]),
            variance_convention=obj.get("variance_convention", "zero_mean"),
            day_boundaries=tuple(obj.get("day_boundaries", ())),
        )


def block_returns(returns: Sequence[float], block_size: int,
                  day_boundaries: Sequence[int] | None = None,
                  config: PipelineConfig | None = None,
                  lag: int = 1) -> BlockedReturns:
    """Group consecutive returns into blocks of N and estimate each scale.

    The trailing remainder that does not fill a block is dropped (the
    aggregation needs equal-size blocks).  Blocks whose scale estimate is
    exactly zero carry no distance information and are excluded, counted in
    ``degenerate_blocks``.  Day boundaries are bookkeeping only: blocks may
    span days.
    """
    cfg = config or PipelineConfig()
    if block_size < 2:
        raise DomainError(f"block size must be >= 2, got {block_size}")
    arr = np.asarray(returns, dtype=float)
    h = arr.size // block_size
    dropped_tail = int(arr.size - h * block_size)
    if h == 0:
        log.warning("only %d returns; no complete block of %d", arr.size, block_size)
        return BlockedReturns(
            lag=lag, block_size=block_size,
            returns=np.empty((0, block_size)), sigmas=np.empty(0),
            maxima=np.empty(0), minima=np.empty(0),
            dropped_tail=dropped_tail, degenerate_blocks=0,
            variance_convention=cfg.variance_convention,
            day_boundaries=tuple(day_boundaries or ()))
    mat = arr[: h * block_size].reshape(h, block_size)
    if cfg.variance_convention == "zero_mean":
        variances = np.mean(mat * mat, axis=1)
    else:
        variances = np.var(mat, axis=1, ddof=1)
    sigmas = np.sqrt(variances)
    keep = sigmas > 0.0
    degenerate = int(h - int(keep.sum()))
    if degenerate:
        log.warning("excluded %d degenerate constant block(s)", degenerate)
    mat = mat[keep]
    return BlockedReturns(
        lag=lag, block_size=block_size, returns=mat, sigmas=sigmas[keep],
        maxima=mat.max(axis=1) if mat.size else np.empty(0),
        minima=mat.min(axis=1) if mat.size else np.empty(0),
        dropped_tail=dropped_tail, degenerate_blocks=degenerate,
        variance_convention=cfg.variance_convention,
        day_boundaries=tuple(day_boundaries or ()))


def aggregate_near_extreme(blocked: BlockedReturns, mode: str = "max"
                           ) -> EmpiricalNearExtreme:
    """Pool the N-1 per-block distances of every block, blocks weighted equally."""
    if mode not in ("max", "min"):
        raise ParameterError(f"mode must be 'max' or 'min', got {mode!r}")
    if blocked.block_count < 1:
        raise DomainError("no blocks to aggregate")
    h, n = blocked.returns.shape
    signed = blocked.returns if mode == "max" else -blocked.returns
    tops = signed.max(axis=1)
    arg = signed.argmax(axis=1)
    dist = tops[:, None] - signed
    keep = np.ones_like(dist, dtype=bool)
    keep[np.arange(h), arg] = False
    return EmpiricalNearExtreme(distances=dist[keep], block_count=h,
                                block_size=n, mode=mode)


def fit_mixture(blocked: BlockedReturns) -> MixtureModel:
    """One Gaussian component per block, scale sigma_j, order preserved."""
    if blocked.block_count < 1:
        raise DomainError("no blocks to fit")
    return MixtureModel(sigmas=tuple(float(s) for s in blocked.sigmas),
                        block_size=blocked.block_size)


# ----------------------------------------------------------------------
# streaming file ingestion


def _read_batches(path, batch_size: int) -> Iterator[pl.DataFrame]:
    try:
        reader = pl.read_csv_batched(
            str(path), batch_size=batch_size,
            schema_overrides={"timestamp": pl.Utf8, "bid": pl.Float64,
                              "ask": pl.Float64, "trade_price": pl.Float64})
    except FileNotFoundError as exc:
        raise DataError(f"input file not found: {path}") from exc
    except Exception as exc:  # malformed header etc.
        raise DataError(f"cannot read {path}: {exc}") from exc
    while True:
        batches = reader.next_batches(8)
        if not batches:
            return
        yield from batches


def _parse_batch(df: pl.DataFrame, path, row_offset: int):
    missing = [c for c in _CSV_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}")
    try:
        ts = df["timestamp"].str.to_datetime(format=_TS_FORMAT, time_unit="ns")
    except Exception:
        lenient = df["timestamp"].str.to_datetime(format=_TS_FORMAT,
                                                  time_unit="ns", strict=False)
        bad = int(lenient.is_null().arg_max() or 0)
        raise DataError(
            f"{path}:{row_offset + bad + 2}: unparseable timestamp "
            f"{df['timestamp'][bad]!r} (expected ISO-8601 with fractional seconds)")
    ns = ts.cast(pl.Int64).to_numpy()
    day = ns // _NS_PER_DAY
    tod = ns - day * _NS_PER_DAY
    return (day, tod, df["bid"].to_numpy(), df["ask"].to_numpy(),
            df["trade_price"].to_numpy())


@dataclass
class _DayBuffer:
    day: int
    chunks: list = field(default_factory=list)

    def add(self, tod, bid, ask, trade):
        self.chunks.append((tod, bid, ask, trade))

    def arrays(self):
        tods, bids, asks, trades = zip(*self.chunks)
        return (np.concatenate(tods), np.concatenate(bids),
                np.concatenate(asks), np.concatenate(trades))


def _process_day(buffer: _DayBuffer, config: PipelineConfig
                 ) -> tuple[int, EventSeries, FilterStats]:
    tod, bid, ask, trade = buffer.arrays()
    order = np.argsort(tod, kind="stable")
    if not np.array_equal(order, np.arange(tod.size)):
        tod, bid, ask, trade = tod[order], bid[order], ask[order], trade[order]
    keep, stats = _filter_arrays(tod, bid, ask, trade, config)
    mids = 0.5 * (bid[keep] + ask[keep])
    events = _event_mids(mids)
    if events.size == 0:
        log.warning("day %d: no surviving events; day skipped", buffer.day)
        stats = replace(stats, days_skipped=1)
    return buffer.day, EventSeries(mids=events), stats


def iter_day_series(paths: Iterable, config: PipelineConfig | None = None,
                    batch_size: int = 1_000_000
                    ) -> Iterator[tuple[int, EventSeries, FilterStats]]:
    """Stream (day, event series, filter stats) from tick CSV files.

    Files are consumed in the given order as one continuous stream; a day
    spanning a file boundary keeps accumulating.  Memory stays bounded by
    one day of ticks plus the parser batch.  Day processing (sort, filter,
    event compression) runs on ``config.workers`` threads; results are
    yielded in day order regardless of worker count.
    """
    cfg = config or PipelineConfig()

    def day_jobs() -> Iterator[_DayBuffer]:
        current: _DayBuffer | None = None
        for path in paths:
            row_offset = 0
            for df in _read_batches(path, batch_size):
                day, tod, bid, ask, trade = _parse_batch(df, path, row_offset)
                row_offset += df.height
                while day.size:
                    d0 = day[0]
                    if current is not None and d0 < current.day:
                        raise DataError(
                            f"{path}: out-of-order day {d0} after {current.day}; "
                            "input files must be time-ordered")
                    split = int(np.searchsorted(day, d0, side="right"))
                    if current is None:
                        current = _DayBuffer(day=int(d0))
                    elif current.day != int(d0):
                        yield current
                        current = _DayBuffer(day=int(d0))
                    current.add(tod[:split], bid[:split], ask[:split], trade[:split])
                    day, tod, bid, ask, trade = (day[split:], tod[split:],
                                                 bid[split:], ask[split:],
                                                 trade[split:])
        if current is not None:
            yield current

    if cfg.workers == 1:
        for buf in day_jobs():
            yield _process_day(buf, cfg)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            pending = []
            for buf in day_jobs():
                pending.append(pool.submit(_process_day, buf, cfg))
                # keep a bounded window so memory stays O(days in flight)
                while len(pending) > 2 * cfg.workers:
                    yield pending.pop(0).result()
            for fut in pending:
                yield fut.result()


@dataclass(frozen=True)
class IngestResult:
    returns: np.ndarray
    day_boundaries: tuple[int, ...]
    day_count: int
    event_count: int
    stats: FilterStats


def ingest_returns(paths: Iterable, lag: int,
                   config: PipelineConfig | None = None,
                   batch_size: int = 1_000_000) -> IngestResult:
    """Full streaming pass: files -> per-day event series -> pooled returns.

    The event series restarts each day, so no return straddles a day; the
    concatenated per-day returns carry day-boundary indices for bookkeeping.
    """
    if lag < 1:
        raise DomainError(f"lag must be >= 1, got {lag}")
    pieces: list[np.ndarray] = []
    boundaries: list[int] = []
    total = 0
    events = 0
    days = 0
    stats = FilterStats()
    for _day, series, day_stats in iter_day_series(paths, config, batch_size):
        stats = stats.merged(day_stats)
        days += 1
        events += series.event_count
        if series.event_count == 0:
            continue
        rets = compute_returns(series, lag)
        if rets.size:
            boundaries.append(total)
            pieces.append(rets)
            total += rets.size
    returns = np.concatenate(pieces) if pieces else np.empty(0)
    return IngestResult(returns=returns, day_boundaries=tuple(boundaries),
                        day_count=days, event_count=events, stats=stats)
