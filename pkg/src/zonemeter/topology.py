"""Static building topology: buildings contain AHUs, AHUs contain zones."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import InputError

SEP = "/"


@dataclass(frozen=True)
class AirProperties:
    """Specific heat capacity (kJ/(kg K)) and density (kg/m3) of air."""

    c: float = 1.006
    rho: float = 1.204

    def __post_init__(self):
        if self.c <= 0 or self.rho <= 0:
            raise InputError("air properties must be positive")

    @property
    def cp_rho(self) -> float:
        return self.c * self.rho


@dataclass(frozen=True)
class ZoneNode:
    id: str
    excluded: bool = False


@dataclass(frozen=True)
class AhuNode:
    id: str
    fan_rated_flow: float  # m3/s
    fan_rated_power: float  # kW
    zones: tuple[ZoneNode, ...] = ()


@dataclass(frozen=True)
class BuildingNode:
    id: str
    ahus: tuple[AhuNode, ...] = ()


def zone_path(building_id: str, ahu_id: str, zone_id: str) -> str:
    return SEP.join((building_id, ahu_id, zone_id))


def ahu_path(building_id: str, ahu_id: str) -> str:
    return SEP.join((building_id, ahu_id))


@dataclass(frozen=True)
class Topology:
    buildings: tuple[BuildingNode, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        bldg_ids = [b.id for b in self.buildings]
        if len(set(bldg_ids)) != len(bldg_ids):
            raise InputError("duplicate building ids")
        for b in self.buildings:
            ahu_ids = [a.id for a in b.ahus]
            if len(set(ahu_ids)) != len(ahu_ids):
                raise InputError(f"duplicate AHU ids in building {b.id}")
            for a in b.ahus:
                if a.fan_rated_flow <= 0 or a.fan_rated_power <= 0:
                    raise InputError(
                        f"AHU {b.id}{SEP}{a.id}: rated fan flow and power must be positive"
                    )
                zids = [z.id for z in a.zones]
                if len(set(zids)) != len(zids):
                    raise InputError(f"duplicate zone ids in AHU {b.id}{SEP}{a.id}")
        for ident in self.iter_ids():
            if SEP in ident:
                raise InputError(f"id may not contain {SEP!r}: {ident}")

    def iter_ids(self):
        for b in self.buildings:
            yield b.id
            for a in b.ahus:
                yield a.id
                for z in a.zones:
                    yield z.id

    def building(self, building_id: str) -> BuildingNode:
        for b in self.buildings:
            if b.id == building_id:
                return b
        raise InputError(f"unknown building: {building_id}")

    def ahu(self, building_id: str, ahu_id: str) -> AhuNode:
        for a in self.building(building_id).ahus:
            if a.id == ahu_id:
                return a
        raise InputError(f"unknown AHU: {ahu_path(building_id, ahu_id)}")

    def iter_ahus(self):
        """Yields (building, ahu) pairs in topology order."""
        for b in self.buildings:
            for a in b.ahus:
                yield b, a

    def iter_zones(self):
        """Yields (building, ahu, zone) triples in topology order."""
        for b in self.buildings:
            for a in b.ahus:
                for z in a.zones:
                    yield b, a, z

    @property
    def n_zones(self) -> int:
        return sum(len(a.zones) for _, a in self.iter_ahus())


def topology_to_dict(topo: Topology) -> dict:
    return {
        "buildings": [
            {
                "id": b.id,
                "ahus": [
                    {
                        "id": a.id,
                        "fan_rated_flow_m3s": a.fan_rated_flow,
                        "fan_rated_power_kw": a.fan_rated_power,
                        "zones": [
                            {"id": z.id, "excluded": z.excluded} for z in a.zones
                        ],
                    }
                    for a in b.ahus
                ],
            }
            for b in topo.buildings
        ]
    }


def topology_from_dict(doc: dict) -> Topology:
    try:
        buildings = tuple(
            BuildingNode(
                id=str(b["id"]),
                ahus=tuple(
                    AhuNode(
                        id=str(a["id"]),
                        fan_rated_flow=float(a["fan_rated_flow_m3s"]),
                        fan_rated_power=float(a["fan_rated_power_kw"]),
                        zones=tuple(
                            ZoneNode(id=str(z["id"]), excluded=bool(z.get("excluded", False)))
                            for z in a.get("zones", [])
                        ),
                    )
                    for a in b.get("ahus", [])
                ),
            )
            for b in doc.get("buildings", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed topology document: {exc}") from exc
    return Topology(buildings=buildings)


def load_topology(path) -> Topology:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"topology file is not valid JSON: {exc}") from exc
    return topology_from_dict(doc)
