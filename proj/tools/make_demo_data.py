#!/usr/bin/env python3
"""Generate demo/survey_synthetic.csv: 519 respondents x 20 numeric features.

Three latent respondent groups drive twelve of the features; the remaining
eight are noise. A handful of extreme respondents make single-linkage
clustering produce tiny clusters. Output is deterministic for a given seed.
"""

import argparse
from pathlib import Path

import numpy as np

FEATURES = [
    "risk_perception", "prior_experience", "trust_officials", "household_size",
    "years_resident", "distance_to_coast", "home_ownership", "income_band",
    "age", "mobility_limits", "pet_count", "vehicle_access",
    "info_sources", "social_ties", "shelter_knowledge", "work_flexibility",
    "insurance", "elevation", "media_hours", "preparedness_score",
]

# Group means for the first twelve features; the rest share a common mean.
GROUP_MEANS = np.array([
    [6.5, 3.0, 5.5, 3.2, 8.0, 2.0, 0.30, 3.0, 38.0, 0.10, 1.0, 0.95],
    [3.0, 0.8, 3.5, 2.1, 22.0, 9.0, 0.80, 5.0, 61.0, 0.35, 0.6, 0.85],
    [4.8, 1.6, 6.8, 4.4, 14.0, 5.0, 0.55, 2.0, 47.0, 0.15, 2.2, 0.60],
])
GROUP_SD = np.array([0.9, 0.7, 0.8, 0.8, 4.0, 1.5, 0.15, 0.8, 7.0, 0.08, 0.6, 0.12])
GROUP_SIZES = [207, 176, 130]
N_OUTLIERS = 6


def generate(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    blocks = []
    for g, n in enumerate(GROUP_SIZES):
        signal = rng.normal(GROUP_MEANS[g], GROUP_SD, size=(n, len(GROUP_SD)))
        noise = rng.normal(5.0, 1.5, size=(n, len(FEATURES) - len(GROUP_SD)))
        blocks.append(np.hstack([signal, noise]))
    data = np.vstack(blocks)
    outliers = data[rng.choice(len(data), N_OUTLIERS, replace=False)].copy()
    outliers[:, :4] += rng.choice([-1.0, 1.0], size=(N_OUTLIERS, 4)) * 6.0
    data = np.vstack([data, outliers])
    data = data[rng.permutation(len(data))]
    return np.clip(data, 0.0, None)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--out", type=Path,
                        default=Path(__file__).resolve().parent.parent / "demo" / "survey_synthetic.csv")
    args = parser.parse_args()
    data = generate(args.seed)
    assert data.shape == (519, 20)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(args.out, data, delimiter=",", fmt="%.3f", header=",".join(FEATURES), comments="")
    print(f"wrote {args.out} ({data.shape[0]} rows x {data.shape[1]} columns)")


if __name__ == "__main__":
    main()
