"""Race reports and analysis results shared by both detectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .clocks import Epoch


class RaceKind(Enum):
    WRITE_WRITE = "WW"
    WRITE_READ = "WR"
    READ_WRITE = "RW"


@dataclass(frozen=True)
class RaceReport:
    kind: RaceKind
    var: int
    prior: Epoch
    current: Epoch
    line: int

    def format(self) -> str:
        return (f"RACE {self.kind.value} var={self.var} "
                f"prior={self.prior.task}@{self.prior.clock} "
                f"current={self.current.task}@{self.current.clock} line={self.line}")


@dataclass
class AnalysisResult:
    reports: list[RaceReport]
    racy_vars: set[int]
    counters: dict[str, int] = field(default_factory=dict)

    def sorted_reports(self) -> list[RaceReport]:
        return sorted(self.reports, key=lambda r: (r.line, r.prior.task))

    def format_summary(self) -> str:
        ids = ",".join(str(v) for v in sorted(self.racy_vars))
        return f"SUMMARY races={len(self.reports)} racy_vars={ids}"

    def format_lines(self, dedup: bool = False) -> list[str]:
        reports = self.sorted_reports()
        if dedup:
            seen = set()
            kept = []
            for r in reports:
                key = (r.var, frozenset((r.prior.task, r.current.task)), r.kind)
                if key not in seen:
                    seen.add(key)
                    kept.append(r)
            reports = kept
        lines = [r.format() for r in reports]
        ids = ",".join(str(v) for v in sorted(self.racy_vars))
        lines.append(f"SUMMARY races={len(reports)} racy_vars={ids}")
        return lines
