"""No-communication window schedules announced by the platform.

A schedule lists the time windows in which agents may not share what they
have observed.  Windows are disjoint, sorted, and separated by at least one
open slot; an empty window list is the always-open (centralized) policy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ScheduleError

__all__ = ["CommSchedule"]


@dataclass(frozen=True)
class CommSchedule:
    """Blocked-communication windows ``{start, start+1, ..., start+length-1}``.

    ``windows`` holds ``(start, length)`` pairs over the slot range
    ``{0, ..., horizon_T}``.  Sharing happens at the end of every slot that is
    not inside a window (for agents whose strategy is to share at all).
    """

    horizon_T: int
    windows: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.horizon_T < 1:
            raise ScheduleError(f"horizon must be >= 1, got {self.horizon_T}")
        wins = tuple((int(s), int(d)) for s, d in self.windows)
        object.__setattr__(self, "windows", wins)
        prev_end = None
        for start, length in wins:
            if start < 0 or length < 1:
                raise ScheduleError(f"window ({start},{length}) must have start >= 0, length >= 1")
            if prev_end is not None and start <= prev_end + 1:
                # at least one open slot between consecutive windows
                raise ScheduleError(
                    f"window starting at {start} must leave an open slot after the previous window"
                )
            if start + length - 1 > self.horizon_T:
                raise ScheduleError(
                    f"window ({start},{length}) runs past the horizon {self.horizon_T}"
                )
            prev_end = start + length - 1

    @classmethod
    def centralized(cls, horizon_T: int) -> "CommSchedule":
        """The always-open policy (no blocked slots)."""
        return cls(horizon_T, ())

    @classmethod
    def one_time(cls, horizon_T: int, comm_slot: int) -> "CommSchedule":
        """Every slot blocked except ``comm_slot`` (one-time sharing)."""
        if not 1 <= comm_slot <= horizon_T - 1:
            raise ScheduleError(
                f"comm_slot must lie in [1, {horizon_T - 1}], got {comm_slot}"
            )
        return cls(
            horizon_T,
            ((0, comm_slot), (comm_slot + 1, horizon_T - comm_slot)),
        )

    @property
    def is_centralized(self) -> bool:
        return not self.windows

    def blocked(self, t: int) -> bool:
        """True if sharing is blocked at the end of slot ``t``."""
        for start, length in self.windows:
            if start <= t <= start + length - 1:
                return True
        return False

    def open_slots(self) -> list[int]:
        return [t for t in range(self.horizon_T + 1) if not self.blocked(t)]

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {
                "T": self.horizon_T,
                "windows": [{"start": s, "len": d} for s, d in self.windows],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "CommSchedule":
        try:
            obj = json.loads(text)
            wins = tuple((int(w["start"]), int(w["len"])) for w in obj["windows"])
            return cls(int(obj["T"]), wins)
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ScheduleError(f"bad schedule record: {exc}") from exc
