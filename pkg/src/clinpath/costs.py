from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MoveCostSchedule:
    """Alignment move costs. Silent model moves and synchronous moves are always free."""

    log_move: float = 1.0
    model_move_visible: float = 1.0

    def __post_init__(self):
        if not (self.log_move > 0 and self.model_move_visible > 0):
            raise ValueError("log and visible model move costs must be positive")

    @property
    def model_move_silent(self) -> float:
        return 0.0

    @property
    def synchronous(self) -> float:
        return 0.0


DEFAULT_COSTS = MoveCostSchedule()
