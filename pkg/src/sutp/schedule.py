"""The solution object: one assignment per unit train plus the split plans."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TrainAssignment:
    train_id: str
    big_train: str
    index: int
    start: int
    end: int
    path_id: int
    dumper: str
    conveyors: tuple[str, ...]
    stacker: str
    stockpile: str
    clearance: int
    group: int  # position of the train's group within its big train


@dataclass
class Schedule:
    trains: list[TrainAssignment]
    # per big train, one 0/1 flag per gap between consecutive unit trains
    splits: dict[str, list[int]]
    makespan: int
    status: str = "feasible"
    stats: dict = field(default_factory=dict)

    def by_id(self) -> dict[str, TrainAssignment]:
        return {t.train_id: t for t in self.trains}

    def recomputed_makespan(self) -> int:
        return max((t.end for t in self.trains), default=0)


def groups_from_splits(length: int, splits: list[int]) -> list[list[int]]:
    """Unit indices of each group given the split flags of a big train."""
    groups = [[0]]
    for i in range(1, length):
        if splits[i - 1]:
            groups.append([i])
        else:
            groups[-1].append(i)
    return groups
