"""Scored time intervals, the interchange unit of all localization tracks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class TemporalSegment:
    """A ``[start_s, end_s]`` interval in seconds, optionally scored/labelled.

    ``start_s <= end_s`` is enforced at construction; degenerate point
    intervals (``start_s == end_s``) are legal.
    """

    start_s: float
    end_s: float
    score: Optional[float] = None
    label: Optional[int] = None

    def __post_init__(self):
        if self.start_s < 0:
            raise ValueError(f"segment start must be >= 0, got {self.start_s}")
        if self.start_s > self.end_s:
            raise ValueError(
                f"malformed segment: start {self.start_s} > end {self.end_s}"
            )

    @property
    def length(self) -> float:
        return self.end_s - self.start_s

    def clipped(self, duration_s: float) -> "TemporalSegment":
        """Clip the interval into ``[0, duration_s]``, keeping score/label."""
        lo = min(max(self.start_s, 0.0), duration_s)
        hi = min(max(self.end_s, 0.0), duration_s)
        return TemporalSegment(lo, hi, score=self.score, label=self.label)

    def with_score(self, score: float) -> "TemporalSegment":
        return TemporalSegment(self.start_s, self.end_s, score=score, label=self.label)
