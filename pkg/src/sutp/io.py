"""JSON documents for ports, instances and solutions, and the CSV exports.

Documents use camelCase keys and carry ``schemaVersion``; unknown keys are
rejected. An instance either embeds its port, names the built-in reference
port with ``"port": "reference"``, or leaves the port to the caller.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic.alias_generators import to_camel

from sutp.domain import (
    BigTrain,
    Conveyor,
    Dumper,
    Instance,
    InstanceError,
    PortError,
    PortTopology,
    Stacker,
    Stockpile,
    UnitTrain,
)
from sutp.reference_port import build_reference_port
from sutp.schedule import Schedule, TrainAssignment

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """A document does not match its schema or describes an invalid object."""


class _Doc(BaseModel):
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, extra="forbid")


class DumperDoc(_Doc):
    id: str
    train_types: list[str]
    cargo_types: list[str]
    height_classes: list[str]
    group_length: int
    clear_minutes: int
    rates: dict[str, int]


class StackerDoc(_Doc):
    id: str
    stockpiles: list[str]


class StockpileDoc(_Doc):
    id: str
    cargo_type: str
    capacity: int


class PortDoc(_Doc):
    schema_version: int = SCHEMA_VERSION
    dumpers: list[DumperDoc]
    conveyors: list[str]
    stackers: list[StackerDoc]
    stockpiles: list[StockpileDoc]
    links: list[tuple[str, str]]
    transport_minutes: int = 90
    split_minutes: int = 30


class UnitDoc(_Doc):
    load: int
    cargo_type: str
    train_type: str
    height_class: str


class BigTrainDoc(_Doc):
    id: str
    arrival: int
    units: list[UnitDoc] = Field(min_length=1, max_length=4)


class InstanceDoc(_Doc):
    schema_version: int = SCHEMA_VERSION
    horizon: Optional[int] = None
    port: Optional[Union[Literal["reference"], PortDoc]] = None
    big_trains: list[BigTrainDoc]


class TrainDoc(_Doc):
    train_id: str
    big_train: str
    index: int
    start: int
    end: int
    path_id: int
    dumper: str
    conveyors: list[str]
    stacker: str
    stockpile: str
    clearance: int
    group: int


class SplitDoc(_Doc):
    big_train: str
    flags: list[int]


class SolutionDoc(_Doc):
    schema_version: int = SCHEMA_VERSION
    makespan: int
    status: str
    trains: list[TrainDoc]
    splits: list[SplitDoc]
    stats: dict[str, Optional[int]] = Field(default_factory=dict)


# ----------------------------------------------------------------------------- conversion

def port_to_doc(port: PortTopology) -> PortDoc:
    return PortDoc(
        dumpers=[DumperDoc(id=d.id, train_types=sorted(d.train_types),
                           cargo_types=sorted(d.cargo_types),
                           height_classes=sorted(d.height_classes),
                           group_length=d.group_length, clear_minutes=d.clear_minutes,
                           rates=dict(sorted(d.rates.items())))
                 for d in port.dumpers],
        conveyors=[c.id for c in port.conveyors],
        stackers=[StackerDoc(id=s.id, stockpiles=list(s.stockpiles)) for s in port.stackers],
        stockpiles=[StockpileDoc(id=p.id, cargo_type=p.cargo_type, capacity=p.capacity)
                    for p in port.stockpiles],
        links=[tuple(link) for link in port.links],
        transport_minutes=port.transport_minutes,
        split_minutes=port.split_minutes,
    )


def port_from_doc(doc: PortDoc) -> PortTopology:
    _check_version(doc.schema_version)
    try:
        return PortTopology(
            dumpers=tuple(Dumper(d.id, frozenset(d.train_types), frozenset(d.cargo_types),
                                 frozenset(d.height_classes), d.group_length, d.clear_minutes,
                                 dict(d.rates))
                          for d in doc.dumpers),
            conveyors=tuple(Conveyor(c) for c in doc.conveyors),
            stackers=tuple(Stacker(s.id, tuple(s.stockpiles)) for s in doc.stackers),
            stockpiles=tuple(Stockpile(p.id, p.cargo_type, p.capacity) for p in doc.stockpiles),
            links=tuple(tuple(link) for link in doc.links),
            transport_minutes=doc.transport_minutes,
            split_minutes=doc.split_minutes,
        )
    except PortError as e:
        raise SchemaError(f"invalid port: {e}") from None


def instance_to_doc(instance: Instance, port: Union[str, None] = "embed") -> InstanceDoc:
    """``port`` is "embed", "reference" or None (omit the port)."""
    port_field = None
    if port == "embed":
        port_field = port_to_doc(instance.port)
    elif port == "reference":
        port_field = "reference"
    return InstanceDoc(
        horizon=instance.horizon,
        port=port_field,
        big_trains=[BigTrainDoc(id=b.id, arrival=b.arrival,
                                units=[UnitDoc(load=u.load, cargo_type=u.cargo_type,
                                               train_type=u.train_type,
                                               height_class=u.height_class)
                                       for u in b.units])
                    for b in instance.big_trains],
    )


def instance_from_doc(doc: InstanceDoc, port: PortTopology | None = None) -> Instance:
    _check_version(doc.schema_version)
    if port is None:
        if doc.port == "reference":
            port = build_reference_port()
        elif doc.port is not None:
            port = port_from_doc(doc.port)
        else:
            raise SchemaError("instance has no port; pass a port file or the reference port")
    try:
        bigs = tuple(
            BigTrain(b.id, b.arrival, tuple(UnitTrain(b.id, i, u.load, u.cargo_type,
                                                      u.train_type, u.height_class)
                                            for i, u in enumerate(b.units)))
            for b in doc.big_trains)
        if doc.horizon is None:
            return Instance(port, bigs)
        return Instance(port, bigs, doc.horizon)
    except InstanceError as e:
        raise SchemaError(f"invalid instance: {e}") from None


def solution_to_doc(schedule: Schedule) -> SolutionDoc:
    return SolutionDoc(
        makespan=schedule.makespan,
        status=schedule.status,
        trains=[TrainDoc(train_id=a.train_id, big_train=a.big_train, index=a.index,
                         start=a.start, end=a.end, path_id=a.path_id, dumper=a.dumper,
                         conveyors=list(a.conveyors), stacker=a.stacker,
                         stockpile=a.stockpile, clearance=a.clearance, group=a.group)
                for a in schedule.trains],
        splits=[SplitDoc(big_train=b, flags=list(f)) for b, f in schedule.splits.items()],
        stats=dict(schedule.stats),
    )


def solution_from_doc(doc: SolutionDoc) -> Schedule:
    _check_version(doc.schema_version)
    trains = [TrainAssignment(t.train_id, t.big_train, t.index, t.start, t.end, t.path_id,
                              t.dumper, tuple(t.conveyors), t.stacker, t.stockpile,
                              t.clearance, t.group)
              for t in doc.trains]
    return Schedule(trains, {s.big_train: list(s.flags) for s in doc.splits}, doc.makespan,
                    doc.status, dict(doc.stats))


def _check_version(version: int):
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schemaVersion {version} (expected {SCHEMA_VERSION})")


# ----------------------------------------------------------------------------- files

def dumps(doc: BaseModel) -> str:
    data = doc.model_dump(by_alias=True, mode="json", exclude_none=True)
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _parse(cls, text: str, what: str):
    try:
        return cls.model_validate_json(text)
    except ValidationError as e:
        raise SchemaError(f"malformed {what}:\n{e}") from None


def read_port(path) -> PortTopology:
    return port_from_doc(_parse(PortDoc, Path(path).read_text(), "port"))


def write_port(port: PortTopology, path) -> None:
    Path(path).write_text(dumps(port_to_doc(port)))


def read_instance(path, port: PortTopology | None = None) -> Instance:
    return instance_from_doc(_parse(InstanceDoc, Path(path).read_text(), "instance"), port)


def write_instance(instance: Instance, path, port: Union[str, None] = "embed") -> None:
    Path(path).write_text(dumps(instance_to_doc(instance, port)))


def read_solution(path) -> Schedule:
    return solution_from_doc(_parse(SolutionDoc, Path(path).read_text(), "solution"))


def write_solution(schedule: Schedule, path) -> None:
    Path(path).write_text(dumps(solution_to_doc(schedule)))


GANTT_COLUMNS = ("train_id", "big_train", "arrival", "release", "start", "end", "dumper",
                 "stacker", "stockpile", "path_id")
TRACE_COLUMNS = ("iter", "elapsed_ms", "makespan", "destroy_window")


def gantt_rows(instance: Instance, schedule: Schedule) -> list[dict]:
    port = instance.port
    rows = []
    for a in schedule.trains:
        big = instance.big_train(a.big_train)
        cuts = sum(schedule.splits.get(big.id, []))
        release = big.arrival + port.transport_minutes + port.split_minutes * cuts
        rows.append({"train_id": a.train_id, "big_train": a.big_train, "arrival": big.arrival,
                     "release": release, "start": a.start, "end": a.end, "dumper": a.dumper,
                     "stacker": a.stacker, "stockpile": a.stockpile, "path_id": a.path_id})
    return rows


def write_gantt(instance: Instance, schedule: Schedule, out) -> None:
    writer = csv.DictWriter(out, fieldnames=GANTT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(gantt_rows(instance, schedule))


def write_trace(rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in rows:
        writer.writerow([r.iteration, r.elapsed_ms, r.makespan, " ".join(map(str, r.window))])
