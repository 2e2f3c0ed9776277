"""Affine road-latency planes, least-squares fitting, and drone flight times.

A road edge's travel time is modelled as

    latency = w0 + w1 * truck_flow + w2 * (truck_flow + nominal_flow)

with all three weights strictly positive. Flows are in vehicles/hour and
latencies in hours.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSamplesError, DomainError, NonPhysicalPlaneError

#: Condition number of the (column-equilibrated) normal matrix above which
#: the sample design is treated as rank deficient.
CONDITION_LIMIT = 1e12

#: Road length (km) of the two reference roads the bundled samples describe.
REFERENCE_LENGTH_KM = {2: 0.5, 3: 2.0}


@dataclass(frozen=True)
class LatencyPlane:
    omega: tuple[float, float, float]

    def __post_init__(self):
        omega = tuple(float(w) for w in self.omega)
        if len(omega) != 3:
            raise DomainError(f"latency plane needs 3 weights, got {len(omega)}")
        if not all(np.isfinite(omega)) or min(omega) <= 0.0:
            raise DomainError(f"latency plane weights must be finite and > 0, got {omega}")
        object.__setattr__(self, "omega", omega)

    @property
    def free_flow(self):
        return self.omega[0]

    @property
    def flow_slope(self):
        """Latency increase per extra truck on the edge (w1 + w2)."""
        return self.omega[1] + self.omega[2]

    def to_json(self):
        return json.dumps({"omega": list(self.omega)})

    @classmethod
    def from_json(cls, text):
        return cls(tuple(json.loads(text)["omega"]))


@dataclass(frozen=True)
class LatencySample:
    truck_flow: float
    total_flow: float
    latency: float

    def __post_init__(self):
        if not (self.total_flow >= self.truck_flow >= 0.0):
            raise DomainError(
                f"sample needs total_flow >= truck_flow >= 0, got {self.truck_flow}, {self.total_flow}"
            )
        if not self.latency > 0.0:
            raise DomainError(f"sample latency must be > 0, got {self.latency}")


@dataclass(frozen=True)
class PlaneFit:
    plane: LatencyPlane
    rmse: float
    max_residual: float
    condition: float
    n_samples: int


def edge_latency(plane: LatencyPlane, truck_flow: float, nominal_flow: float) -> float:
    if truck_flow < 0 or nominal_flow < 0:
        raise DomainError(f"flows must be >= 0, got truck={truck_flow}, nominal={nominal_flow}")
    w0, w1, w2 = plane.omega
    return w0 + w1 * truck_flow + w2 * (truck_flow + nominal_flow)


def edge_latencies(omega: np.ndarray, truck_flow: np.ndarray, nominal_flow: np.ndarray) -> np.ndarray:
    """Vectorised `edge_latency` over an (E, 3) weight array."""
    omega = np.asarray(omega, dtype=float)
    truck_flow = np.asarray(truck_flow, dtype=float)
    nominal_flow = np.asarray(nominal_flow, dtype=float)
    return omega[:, 0] + omega[:, 1] * truck_flow + omega[:, 2] * (truck_flow + nominal_flow)


def fit_plane(samples: Sequence[LatencySample]) -> PlaneFit:
    """Ordinary least-squares plane through latency samples.

    The regressors are ``[1, truck_flow, total_flow]``; the normal equations
    are solved after scaling each column to unit norm, and a condition number
    above `CONDITION_LIMIT` is reported as degenerate input.
    """
    if len(samples) < 3:
        raise DegenerateSamplesError(f"need at least 3 samples, got {len(samples)}")
    design = np.array([[1.0, s.truck_flow, s.total_flow] for s in samples])
    target = np.array([s.latency for s in samples])

    norms = np.linalg.norm(design, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateSamplesError("degenerate samples: a regressor column is identically zero")
    scaled = design / norms
    normal = scaled.T @ scaled
    cond = np.linalg.cond(normal)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DegenerateSamplesError(
            f"degenerate samples: normal matrix condition number {cond:.3g} exceeds {CONDITION_LIMIT:.0e}"
        )
    coef = np.linalg.solve(normal, scaled.T @ target) / norms

    if np.any(coef <= 0.0):
        raise NonPhysicalPlaneError(
            f"non-physical plane {tuple(coef)}: every weight must be > 0; "
            "restrict the samples to the low truck-ratio regime where the affine model holds"
        )
    residual = design @ coef - target
    return PlaneFit(
        plane=LatencyPlane(tuple(coef)),
        rmse=float(np.sqrt(np.mean(residual**2))),
        max_residual=float(np.max(np.abs(residual))),
        condition=float(cond),
        n_samples=len(samples),
    )


def scale_plane(plane: LatencyPlane, target_length_km: float, reference_length_km: float) -> LatencyPlane:
    if target_length_km <= 0 or reference_length_km <= 0:
        raise DomainError(
            f"lengths must be > 0, got target={target_length_km}, reference={reference_length_km}"
        )
    k = target_length_km / reference_length_km
    return LatencyPlane(tuple(k * w for w in plane.omega))


def aerial_latency(distance_km: float, drone_speed: float) -> float:
    if distance_km < 0:
        raise DomainError(f"distance must be >= 0, got {distance_km}")
    if drone_speed <= 0:
        raise DomainError(f"drone speed must be > 0, got {drone_speed}")
    return distance_km / drone_speed


def read_samples(path) -> list[LatencySample]:
    """Read a ``truck_flow,total_flow,latency_hours`` CSV."""
    with open(path, newline="") as f:
        return _parse_samples(csv.DictReader(f))


def _parse_samples(rows: Iterable[dict]) -> list[LatencySample]:
    out = []
    for row in rows:
        out.append(LatencySample(float(row["truck_flow"]), float(row["total_flow"]), float(row["latency_hours"])))
    return out


def write_samples(samples: Iterable[LatencySample], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["truck_flow", "total_flow", "latency_hours"])
        for s in samples:
            writer.writerow([repr(float(s.truck_flow)), repr(float(s.total_flow)), repr(float(s.latency))])


def bundled_samples(lanes: int) -> list[LatencySample]:
    """Synthetic samples shipped with the package for a 2- or 3-lane road."""
    name = {2: "two_lane_samples.csv", 3: "three_lane_samples.csv"}[lanes]
    text = resources.files("bimodal_delivery").joinpath("data", name).read_text()
    return _parse_samples(csv.DictReader(text.splitlines()))


@lru_cache(maxsize=None)
def reference_plane(lanes: int) -> LatencyPlane:
    """Plane fitted to the bundled samples of the given lane class.

    The plane describes a road of length ``REFERENCE_LENGTH_KM[lanes]``.
    """
    if lanes not in REFERENCE_LENGTH_KM:
        raise DomainError(f"no reference plane for {lanes} lanes")
    return fit_plane(bundled_samples(lanes)).plane


def save_plane(plane: LatencyPlane, path) -> None:
    Path(path).write_text(plane.to_json() + "\n")
