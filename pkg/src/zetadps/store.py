"""Per-instance execution history: a time-indexed relation with a bottom row."""
from __future__ import annotations

import bisect

from .errors import ArityMismatch, UnknownColumn

#: The bottom timestamp. Every relation has a row here.
BOTTOM = None


def prev_tick(t):
    """``t - 1`` in the timestamp order, with ``0 - 1`` being bottom."""
    return BOTTOM if t is BOTTOM or t <= 0 else t - 1


def time_key(t):
    return -1 if t is BOTTOM else t


class Relation:
    """Rows keyed by tick, schema ``(time, *columns)``.

    Rows are tuples of identifiers, one per column. ``insert`` is functional;
    the engine's in-place fast path uses ``put``.
    """

    __slots__ = ("schema", "initial", "_rows", "_times")

    def __init__(self, schema, initial=None, rows=None):
        self.schema = tuple(schema)
        if initial is None:
            initial = ("l_init",) * len(self.schema)
        initial = tuple(initial)
        if len(initial) != len(self.schema):
            raise ArityMismatch(f"bottom row {initial} does not fit schema {self.schema}")
        self.initial = initial
        self._rows = {}
        self._times = []
        for t, vals in (rows or {}).items():
            self.put(t, vals)

    def copy(self):
        r = Relation.__new__(Relation)
        r.schema = self.schema
        r.initial = self.initial
        r._rows = dict(self._rows)
        r._times = list(self._times)
        return r

    def put(self, t, vals):
        vals = tuple(vals)
        if len(vals) != len(self.schema):
            raise ArityMismatch(f"{len(vals)} values for schema {self.schema}")
        if t is BOTTOM:
            self.initial = vals
            return
        if t not in self._rows:
            if not self._times or t > self._times[-1]:
                self._times.append(t)
            else:
                bisect.insort(self._times, t)
        self._rows[t] = vals

    def column(self, p):
        try:
            return self.schema.index(p)
        except ValueError:
            raise UnknownColumn(f"no column {p!r} in {self.schema}") from None

    def row_at(self, t):
        """Exact row at ``t`` or None."""
        if t is BOTTOM:
            return self.initial
        return self._rows.get(t)

    def latest_row(self, t):
        """Row with the greatest timestamp <= t (the bottom row if none)."""
        if t is BOTTOM or not self._times:
            return self.initial
        i = bisect.bisect_right(self._times, t)
        return self._rows[self._times[i - 1]] if i else self.initial

    def times(self):
        return list(self._times)

    def rows(self):
        """All rows including bottom, ascending."""
        yield BOTTOM, self.initial
        for t in self._times:
            yield t, self._rows[t]

    def __len__(self):
        return len(self._times) + 1

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        return (self.schema == other.schema and self.initial == other.initial
                and self._rows == other._rows)

    def __repr__(self):
        return f"Relation({self.schema}, rows={dict(self.rows())})"


def insert(R, t, vals):
    if t is BOTTOM:
        raise ValueError("cannot insert at bottom")
    if len(vals) != len(R.schema):
        raise ArityMismatch(f"{len(vals)} values for schema {R.schema}")
    out = R.copy()
    out.put(t, vals)
    return out


def latest_at(R, p, t):
    return R.latest_row(t)[R.column(p)]


def has_record_at(R, t):
    return R.row_at(t) is not None


def timestamps_upto(R, t):
    if t is BOTTOM:
        return []
    times = R.times()
    return times[:bisect.bisect_right(times, t)]


def dump_rows(mu):
    """Tab-separated store dump, sorted by relation id then time."""
    lines = []
    for l in sorted(mu):
        R = mu[l].relation
        for t, vals in R.rows():
            cells = [l, "BOT" if t is BOTTOM else str(t)]
            cells += [f"{p}={v}" for p, v in zip(R.schema, vals)]
            lines.append("\t".join(cells))
    return "".join(line + "\n" for line in lines)
