"""Generate the bundled synthetic road-latency samples.

These are NOT traffic-simulator output. They imitate the qualitative regime
of a stop-heavy microsimulation: latency grows convexly with total flow, each
stopping truck adds a delay that itself grows with congestion, and the
two-lane road reacts more strongly to trucks than the three-lane road.
Truck ratios span 0.001 to 0.1 and total flow rises in steps of 10 veh/h up
to the road's maximum flow.
"""
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "bimodal_delivery" / "data"

ROADS = {
    # name: (length km, speed limit km/h, max flow veh/h, truck delay h per truck/h)
    "two_lane": (0.5, 48.28, 3000, 4.0e-5),
    "three_lane": (2.0, 80.47, 5000, 1.2e-5),
}
RATIOS = (0.001, 0.01, 0.05, 0.1)


def generate(length_km, speed, max_flow, truck_delay, rng):
    free_flow = length_km / speed
    rows = []
    for ratio in RATIOS:
        for total in np.arange(10, max_flow + 1, 10, dtype=float):
            trucks = ratio * total
            load = total / max_flow
            latency = free_flow * (1.0 + 0.3 * load**2) + truck_delay * trucks * (1.0 + 0.5 * load)
            latency *= 1.0 + rng.normal(0.0, 0.01)
            rows.append((trucks, total, latency))
    return rows


def main():
    rng = np.random.default_rng(20240611)
    for name, params in ROADS.items():
        rows = generate(*params, rng)
        with open(OUT / f"{name}_samples.csv", "w") as f:
            f.write("truck_flow,total_flow,latency_hours\n")
            for trucks, total, latency in rows:
                f.write(f"{float(trucks)!r},{float(total)!r},{float(latency)!r}\n")
        print(name, len(rows))


if __name__ == "__main__":
    main()
