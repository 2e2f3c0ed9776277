"""Fit latency planes to the bundled samples and to noisy synthetic data."""
import numpy as np

from bimodal_delivery.latency import LatencyPlane, LatencySample, bundled_samples, edge_latency, fit_plane


def main():
    for lanes in (2, 3):
        fit = fit_plane(bundled_samples(lanes))
        print(f"{lanes}-lane samples: omega {np.round(fit.plane.omega, 6)}, rmse {fit.rmse:.2e}, "
              f"condition {fit.condition:.1e}")

    truth = LatencyPlane((0.1, 0.01, 0.001))
    rng = np.random.default_rng(0)
    for noise in (0.0, 1e-4, 1e-3):
        samples = []
        for _ in range(200):
            total = rng.uniform(10, 3000)
            truck = rng.uniform(0.001, 0.1) * total
            samples.append(LatencySample(truck, total, edge_latency(truth, truck, total - truck)
                                         + rng.uniform(-noise, noise)))
        fit = fit_plane(samples)
        err = np.abs(np.array(fit.plane.omega) - truth.omega).max()
        print(f"noise {noise:.0e}: max weight error {err:.1e}, rmse {fit.rmse:.1e}")


if __name__ == "__main__":
    main()
