"""Scenario files, TNTP import and results CSV.

A scenario is a JSON document (``schema_version`` 1) naming nodes by
string; ids are assigned densely in file order when loading. Road edges
carry an explicit ``omega`` or inherit the reference plane of their lane
class scaled by length. Aerial latencies may be ``"auto"``: straight-line
distance between node coordinates (km) divided by the drone speed.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .errors import ScenarioError
from .latency import REFERENCE_LENGTH_KM, LatencyPlane, aerial_latency, reference_plane, scale_plane
from .network import AerialEdge, Constants, Network, RoadEdge, validate

SCHEMA_VERSION = 1
DEFAULT_MAX_EDGES = 8
#: Mean road-edge length (km) of Sioux Falls once its lon/lat coordinates are
#: projected; planar TNTP coordinates are rescaled to match it by default.
SIOUX_FALLS_MEAN_EDGE_KM = 2.09

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "hub", "nodes", "road_edges", "demand", "constants"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "hub": {"type": "string"},
        "max_edges": {"type": "integer", "minimum": 1},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name"],
                "properties": {"name": {"type": "string"}, "x_km": _number, "y_km": _number},
                "additionalProperties": False,
            },
        },
        "demand": {"type": "object", "additionalProperties": _nonneg},
        "constants": {
            "type": "object",
            "required": ["parcels_per_truck", "truck_cost", "drone_cost", "beta", "cost_cap", "drone_speed"],
            "properties": {
                "parcels_per_truck": _positive,
                "truck_cost": _nonneg,
                "drone_cost": _nonneg,
                "beta": _positive,
                "cost_cap": _positive,
                "drone_speed": _positive,
            },
            "additionalProperties": False,
        },
        "reference_planes": {
            "type": "object",
            "propertyNames": {"enum": ["2", "3"]},
            "additionalProperties": {
                "type": "object",
                "required": ["omega", "length_km"],
                "properties": {
                    "omega": {"type": "array", "items": _positive, "minItems": 3, "maxItems": 3},
                    "length_km": _positive,
                },
            },
        },
        "nominal_flow_total": _positive,
        "road_edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to", "length_km", "lanes"],
                "properties": {
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "length_km": _positive,
                    "lanes": {"enum": [2, 3]},
                    "nominal_flow": _nonneg,
                    "capacity": _positive,
                    "flow": _nonneg,
                    "omega": {"type": "array", "items": _positive, "minItems": 3, "maxItems": 3},
                },
                "oneOf": [{"required": ["nominal_flow"]}, {"required": ["capacity", "flow"]}],
            },
        },
        "aerial_edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["to"],
                "properties": {
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "latency_hours": {"oneOf": [_positive, {"const": "auto"}]},
                },
                "additionalProperties": False,
            },
        },
    },
}


@dataclass(frozen=True)
class Scenario:
    network: Network
    max_edges: int = DEFAULT_MAX_EDGES
    description: str = ""


def _format_path(error) -> str:
    out = ""
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def parse_scenario(doc: dict, check: bool = True) -> Scenario:
    """Build a `Network` from a scenario document.

    With ``check`` the network must also pass `validate`; structural
    violations are then raised as one `ScenarioError` listing all of them.
    """
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{_format_path(e)}: {e.message}" for e in errors]
        raise ScenarioError("scenario schema violation:\n  " + "\n  ".join(lines))

    names = [n["name"] for n in doc["nodes"]]
    index = {name: i for i, name in enumerate(names)}
    if len(index) != len(names):
        raise ScenarioError("nodes: duplicate node names")

    def node(name, where):
        try:
            return index[name]
        except KeyError:
            raise ScenarioError(f"{where}: unknown node {name!r}") from None

    hub = node(doc["hub"], "hub")
    has_coords = all("x_km" in n and "y_km" in n for n in doc["nodes"])
    coords = np.array([[n["x_km"], n["y_km"]] for n in doc["nodes"]]) if has_coords and names else None
    constants = Constants(**doc["constants"])

    refs = {lanes: (reference_plane(lanes), REFERENCE_LENGTH_KM[lanes]) for lanes in (2, 3)}
    for key, ref in doc.get("reference_planes", {}).items():
        refs[int(key)] = (LatencyPlane(tuple(ref["omega"])), ref["length_km"])

    raw_edges = doc["road_edges"]
    ratio_sum = sum(e["flow"] / e["capacity"] for e in raw_edges if "capacity" in e)
    kappa = doc.get("nominal_flow_total", constants.beta) / ratio_sum if ratio_sum > 0 else 0.0

    road = []
    for i, e in enumerate(raw_edges):
        where = f"road_edges[{i}]"
        if "omega" in e:
            plane = LatencyPlane(tuple(e["omega"]))
        else:
            ref_plane, ref_len = refs[e["lanes"]]
            plane = scale_plane(ref_plane, e["length_km"], ref_len)
        nominal = e["nominal_flow"] if "nominal_flow" in e else kappa * e["flow"] / e["capacity"]
        road.append(RoadEdge(i, node(e["from"], where + ".from"), node(e["to"], where + ".to"),
                             float(e["length_km"]), int(e["lanes"]), float(nominal), plane))

    aerial = []
    for i, e in enumerate(doc.get("aerial_edges", [])):
        where = f"aerial_edges[{i}]"
        head = node(e["to"], where + ".to")
        tail = node(e.get("from", doc["hub"]), where + ".from")
        latency = e.get("latency_hours", "auto")
        if latency == "auto":
            if coords is None:
                raise ScenarioError(f"{where}.latency_hours: 'auto' needs x_km/y_km on every node")
            distance = float(np.hypot(*(coords[head] - coords[tail])))
            latency = aerial_latency(distance, constants.drone_speed)
        aerial.append(AerialEdge(i, tail, head, float(latency)))

    demand = np.zeros(len(names))
    for name, d in doc["demand"].items():
        demand[node(name, f"demand.{name}")] = d

    network = Network(names, hub, road, aerial, demand, constants, coords, doc.get("name", ""))
    violations = validate(network) if check else []
    if violations:
        raise ScenarioError("invalid network:\n  " + "\n  ".join(str(v) for v in violations))
    return Scenario(network, doc.get("max_edges", DEFAULT_MAX_EDGES), doc.get("description", ""))


def load_scenario(path, check: bool = True) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_scenario(doc, check)


def scenario_document(network: Network, max_edges: int = DEFAULT_MAX_EDGES, description: str = "") -> dict:
    """Explicit scenario document: every plane and latency written out."""
    names = network.names
    nodes = []
    for i, name in enumerate(names):
        entry = {"name": name}
        if network.coords is not None:
            entry["x_km"] = float(network.coords[i, 0])
            entry["y_km"] = float(network.coords[i, 1])
        nodes.append(entry)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": network.name,
        "description": description,
        "hub": names[network.hub],
        "max_edges": max_edges,
        "nodes": nodes,
        "demand": {names[v]: float(network.demand[v]) for v in range(network.n_nodes) if v != network.hub},
        "constants": {k: float(v) for k, v in asdict(network.constants).items()},
        "road_edges": [
            {
                "from": names[e.tail],
                "to": names[e.head],
                "length_km": e.length_km,
                "lanes": e.lanes,
                "nominal_flow": e.nominal_flow,
                "omega": list(e.plane.omega),
            }
            for e in network.road_edges
        ],
        "aerial_edges": [
            {"from": names[e.tail], "to": names[e.head], "latency_hours": e.latency}
            for e in network.aerial_edges
        ],
    }
    return doc


def dump_document(doc: dict) -> str:
    """Canonical serialisation (sorted keys, shortest round-trip floats)."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_scenario(network: Network, path, max_edges: int = DEFAULT_MAX_EDGES, description: str = "") -> None:
    Path(path).write_text(dump_document(scenario_document(network, max_edges, description)))


def _data_path(*parts):
    return resources.files("bimodal_delivery").joinpath("data", *parts)


def example_network() -> Scenario:
    """The bundled four-node example (demands and nominal flows reconstructed)."""
    return parse_scenario(json.loads(_data_path("example_network.json").read_text()))


# ---------------------------------------------------------------- TNTP ----

@dataclass(frozen=True)
class TntpLink:
    tail: int
    head: int
    capacity: float
    length: float
    free_flow_time: float


def read_tntp_net(path) -> list[TntpLink]:
    links, metadata = [], {}
    in_body = False
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not in_body:
            if line.startswith("<END OF METADATA>"):
                in_body = True
            elif line.startswith("<"):
                key, _, value = line[1:].partition(">")
                metadata[key.strip()] = value.strip()
            continue
        if not line or line.startswith("~"):
            continue
        fields = line.rstrip(";").split()
        try:
            tail, head = int(fields[0]), int(fields[1])
            capacity, length, fft = (float(v) for v in fields[2:5])
        except (ValueError, IndexError):
            raise ScenarioError(f"{path}:{lineno}: malformed link row {raw!r}") from None
        if capacity <= 0:
            raise ScenarioError(f"{path}:{lineno}: link {tail}->{head} has capacity {capacity}")
        links.append(TntpLink(tail, head, capacity, length, fft))
    if not in_body:
        raise ScenarioError(f"{path}: missing <END OF METADATA>")
    expected = metadata.get("NUMBER OF LINKS")
    if expected is not None and int(expected) != len(links):
        raise ScenarioError(f"{path}: header announces {expected} links, found {len(links)}")
    return links


def read_tntp_nodes(path) -> dict[int, tuple[float, float]]:
    coords = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        fields = raw.strip().rstrip(";").split()
        if not fields or not fields[0].lstrip("-").isdigit():
            continue  # header or blank
        try:
            coords[int(fields[0])] = (float(fields[1]), float(fields[2]))
        except (ValueError, IndexError):
            raise ScenarioError(f"{path}:{lineno}: malformed node row {raw!r}") from None
    return coords


def read_tntp_flows(path) -> dict[tuple[int, int], float]:
    flows = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        fields = raw.strip().rstrip(";").split()
        if not fields or not fields[0].isdigit():
            continue
        try:
            flows[int(fields[0]), int(fields[1])] = float(fields[2])
        except (ValueError, IndexError):
            raise ScenarioError(f"{path}:{lineno}: malformed flow row {raw!r}") from None
    return flows


@dataclass
class TntpOptions:
    hub: int = 10
    demand: float = 5000.0
    beta: float = 81_000.0
    cost_cap: float = 50_000.0
    parcels_per_truck: float = 125
    truck_cost: float = 30.0
    drone_cost: float = 0.5
    drone_speed: float = 25.0
    three_lane_capacity: float = 10_000.0
    # "degrees" (lon/lat), "planar", or "auto" (degrees when values fit lon/lat ranges)
    coordinate_units: str = "auto"
    # planar coordinates are rescaled so the mean road-edge length equals this
    mean_edge_km: float = SIOUX_FALLS_MEAN_EDGE_KM
    max_edges: int = DEFAULT_MAX_EDGES
    name: str = "Sioux Falls"
    reference_planes: Optional[dict] = field(default=None)


def _project(coords: dict, links, options: TntpOptions) -> dict:
    ids = sorted(coords)
    xy = np.array([coords[i] for i in ids])
    units = options.coordinate_units
    if units == "auto":
        units = "degrees" if np.all(np.abs(xy[:, 0]) <= 180) and np.all(np.abs(xy[:, 1]) <= 90) else "planar"
    if units == "degrees":
        lon0, lat0 = xy.mean(axis=0)
        km = np.column_stack([
            (xy[:, 0] - lon0) * 111.320 * math.cos(math.radians(lat0)),
            (xy[:, 1] - lat0) * 110.574,
        ])
    elif units == "planar":
        km = xy - xy.min(axis=0)
        pos = dict(zip(ids, km))
        mean = np.mean([np.hypot(*(pos[l.tail] - pos[l.head])) for l in links])
        km = km * (options.mean_edge_km / mean)
    else:
        raise ScenarioError(f"unknown coordinate_units {options.coordinate_units!r}")
    return {i: (float(x), float(y)) for i, (x, y) in zip(ids, km)}


def import_tntp(net_path, coords_path, flows_path, options: Optional[TntpOptions] = None) -> dict:
    """Convert TNTP network, node and flow files into a scenario document.

    Lanes: 3 where capacity exceeds ``three_lane_capacity``, else 2. Nominal
    flows are proportional to volume/capacity and normalised to sum to
    ``beta``. Lengths come from projected node coordinates; planes are
    left to the lane-class reference planes, scaled by length at load time.
    """
    options = options or TntpOptions()
    links = read_tntp_net(net_path)
    coords = read_tntp_nodes(coords_path)
    flows = read_tntp_flows(flows_path)

    node_ids = sorted(set(coords) | {l.tail for l in links} | {l.head for l in links})
    missing = [i for i in node_ids if i not in coords]
    if missing:
        raise ScenarioError(f"{coords_path}: no coordinates for nodes {missing}")
    if options.hub not in node_ids:
        raise ScenarioError(f"hub {options.hub} is not a node of the network")
    km = _project(coords, links, options)

    ratios = []
    for l in links:
        if (l.tail, l.head) not in flows:
            raise ScenarioError(f"{flows_path}: no volume for link {l.tail}->{l.head}")
        ratios.append(flows[l.tail, l.head] / l.capacity)
    kappa = options.beta / sum(ratios)

    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": options.name,
        "description": (
            f"Imported from TNTP; hub {options.hub}; lanes=3 where capacity > {options.three_lane_capacity:g}; "
            f"nominal flows = {kappa!r} * volume/capacity (sum = beta)"
        ),
        "hub": str(options.hub),
        "max_edges": options.max_edges,
        "nodes": [{"name": str(i), "x_km": km[i][0], "y_km": km[i][1]} for i in node_ids],
        "demand": {str(i): float(options.demand) for i in node_ids if i != options.hub},
        "constants": {
            "parcels_per_truck": float(options.parcels_per_truck),
            "truck_cost": float(options.truck_cost),
            "drone_cost": float(options.drone_cost),
            "beta": float(options.beta),
            "cost_cap": float(options.cost_cap),
            "drone_speed": float(options.drone_speed),
        },
        "road_edges": [
            {
                "from": str(l.tail),
                "to": str(l.head),
                "length_km": float(np.hypot(km[l.tail][0] - km[l.head][0], km[l.tail][1] - km[l.head][1])),
                "lanes": 3 if l.capacity > options.three_lane_capacity else 2,
                "nominal_flow": kappa * r,
            }
            for l, r in zip(links, ratios)
        ],
        "aerial_edges": [{"from": str(options.hub), "to": str(i), "latency_hours": "auto"}
                         for i in node_ids if i != options.hub],
    }
    if options.reference_planes:
        doc["reference_planes"] = options.reference_planes
    return doc


def sioux_falls_files() -> tuple[Path, Path, Path]:
    base = _data_path("sioux_falls")
    return (Path(str(base.joinpath("SiouxFalls_net.tntp"))),
            Path(str(base.joinpath("SiouxFalls_node.tntp"))),
            Path(str(base.joinpath("SiouxFalls_flow.tntp"))))


def sioux_falls(options: Optional[TntpOptions] = None) -> Scenario:
    """Sioux Falls scenario built from the bundled TNTP files."""
    return parse_scenario(import_tntp(*sioux_falls_files(), options))


# ------------------------------------------------------------- results ----

@dataclass
class ResultRow:
    gamma: float
    mode: str
    status: str
    objective_hours: float
    societal_latency_minutes: float
    parcel_latency_minutes: float
    operational_cost: float
    iterations: int
    edge_truck_flows: list = field(default_factory=list)
    path_flows: list = field(default_factory=list)
    drone_demands: list = field(default_factory=list)


RESULT_COLUMNS = [f.name for f in ResultRow.__dataclass_fields__.values()]
_LIST_COLUMNS = ("edge_truck_flows", "path_flows", "drone_demands")
_INT_COLUMNS = ("iterations",)
_STR_COLUMNS = ("mode", "status")


def _fmt(v):
    return repr(float(v))


def export_results(rows, path) -> None:
    """Write result rows as CSV; list columns are ``;``-joined floats."""
    rows = list(rows)
    if not rows:
        raise ValueError("no result rows to export")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            out = []
            for col in RESULT_COLUMNS:
                v = getattr(row, col)
                if col in _LIST_COLUMNS:
                    out.append(";".join(_fmt(x) for x in v))
                elif col in _STR_COLUMNS:
                    out.append(v)
                elif col in _INT_COLUMNS:
                    out.append(str(int(v)))
                else:
                    out.append(_fmt(v))
            writer.writerow(out)


def read_results(path) -> list[ResultRow]:
    out = []
    with open(path, newline="") as f:
        for rec in csv.DictReader(f):
            kwargs = {}
            for col in RESULT_COLUMNS:
                v = rec[col]
                if col in _LIST_COLUMNS:
                    kwargs[col] = [float(x) for x in v.split(";")] if v else []
                elif col in _STR_COLUMNS:
                    kwargs[col] = v
                elif col in _INT_COLUMNS:
                    kwargs[col] = int(v)
                else:
                    kwargs[col] = float(v)
            out.append(ResultRow(**kwargs))
    return out
