#!/usr/bin/env python3
"""Generate the synthetic hotel-ratings table shipped in data/.

The rating dump used for the original experiments is not redistributable,
so the repository carries a synthetic stand-in with the same summary
statistics: 825 hotels on a 10-point scale, normalized average-rating mean
0.49, a tight mainstream cluster plus a broad premium wing reaching ~9.5,
and per-hotel review counts and rating dispersions.  Regeneration is fully
deterministic.

Usage: python tools/make_hotel_ratings.py [out_csv]
"""

import csv
import sys
from pathlib import Path

import numpy as np

N_HOTELS = 825
SEED = 20240817
MEAN = 0.49
WING_MASS = 0.25      # share of hotels in the premium wing
BULK_SD = 0.015       # dispersion of the mainstream cluster
WING_LO = 0.52
WING_HI = 0.95        # nobody rates a perfect 10 on average
WING_A = 1.3
WING_B = 0.85
SCALE_MAX = 10.0


def main(out_path: str) -> None:
    rng = np.random.Generator(np.random.Philox(SEED))
    n_wing = int(round(WING_MASS * N_HOTELS))
    wing = WING_LO + (WING_HI - WING_LO) * rng.beta(WING_A, WING_B, n_wing)
    bulk_mu = (MEAN - WING_MASS * wing.mean()) / (1 - WING_MASS)
    bulk = rng.normal(bulk_mu, BULK_SD, N_HOTELS - n_wing)
    x = np.clip(np.concatenate([bulk, wing]), 0.004, 0.998)
    x = np.clip(x + (MEAN - x.mean()), 0.004, 0.998)  # pin the sample mean
    avg = np.round(x * SCALE_MAX, 2)

    # busier hotels have slightly tighter dispersion
    n_reviews = np.maximum(5, rng.lognormal(mean=4.6, sigma=0.9, size=N_HOTELS).astype(int))
    sd = np.clip(rng.normal(1.15, 0.25, N_HOTELS) - 0.05 * np.log10(n_reviews), 0.35, 2.2)
    sd = np.round(sd, 3)

    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hotel_id", "avg_rating", "rating_scale_max", "n_reviews", "rating_sd"])
        for i in range(N_HOTELS):
            w.writerow([f"H{i:04d}", f"{avg[i]:.2f}", "10", n_reviews[i], f"{sd[i]:.3f}"])
    print(f"wrote {N_HOTELS} hotels to {out_path}")


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).parent.parent / "data" / "hotel_ratings.csv")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    main(out)
