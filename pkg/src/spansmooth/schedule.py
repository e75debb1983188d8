"""Smoothing-weight trajectories over training epochs.

Three shapes: ``constant`` (fixed weight), ``two_stage`` (fixed weight for an
initial stage, then zero), and ``linear_decay`` (weight drops by a fixed
amount per epoch and clamps at zero). Epochs are 0-indexed.
"""

from __future__ import annotations

from dataclasses import dataclass

SCHEDULE_KINDS = ("constant", "two_stage", "linear_decay")


@dataclass(frozen=True)
class ScheduleConfig:
    kind: str
    epsilon0: float
    n_epochs: int
    tau: float = 0.0
    stage1_epochs: int = 0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not (0.0 <= self.epsilon0 <= 1.0):
            raise ValueError(f"epsilon0 must be in [0, 1], got {self.epsilon0!r}")
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError(f"tau must be in [0, 1], got {self.tau!r}")
        if self.n_epochs < 1:
            raise ValueError("n_epochs must be >= 1")
        if not (0 <= self.stage1_epochs <= self.n_epochs):
            raise ValueError("stage1_epochs must be in [0, n_epochs]")


def epsilon_at(config: ScheduleConfig, epoch: int) -> float:
    """Smoothing weight for a 0-indexed epoch.

    constant: epsilon0; two_stage: epsilon0 until stage1_epochs, then 0;
    linear_decay: max(0, epsilon0 - epoch * tau).
    """
    if not (0 <= epoch < config.n_epochs):
        raise ValueError(f"epoch {epoch} out of range [0, {config.n_epochs})")
    if config.kind == "constant":
        return config.epsilon0
    if config.kind == "two_stage":
        return config.epsilon0 if epoch < config.stage1_epochs else 0.0
    return max(0.0, config.epsilon0 - epoch * config.tau)


def schedule_table(config: ScheduleConfig) -> list[tuple[int, float]]:
    """(epoch, epsilon) rows for every epoch of the schedule."""
    return [(epoch, epsilon_at(config, epoch)) for epoch in range(config.n_epochs)]
