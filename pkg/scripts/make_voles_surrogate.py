"""Regenerate the bundled f_voles surrogate CSV.

The original female-vole morphometry table (86 animals of two species,
age in days plus six skull measurements in 0.1 mm) is not redistributable
here, so the bundled file is a synthetic reconstruction: each species is
drawn from a two-factor model (a growth factor tied to age and a
length-versus-width shape factor) calibrated to the documented group
sizes, variable names, and measurement scales. Observation 81 is placed
in the M. ochrogaster block with its age fixed at the documented 122
days. Deterministic: rerunning reproduces the identical file.
"""

import pathlib

import numpy as np

COLUMNS = ["Species", "Age", "L2.Condylo", "L9.Inc.Foramen", "L7.Alveolar",
           "B3.Zyg", "B4.Interorbital", "H1.Skull"]

SPECIES = [
    # name, n, mean vector, growth loadings, shape loadings, residual sd
    ("M.californicus", 41,
     np.array([100.0, 272.0, 56.5, 67.0, 152.0, 37.5, 103.0]),
     np.array([18.0, 9.0, 2.6, 1.6, 5.2, 0.7, 2.4]),
     np.array([0.0, 5.0, -3.2, 2.2, -5.5, 1.2, 2.8]),
     np.array([30.0, 2.0, 1.0, 0.8, 1.8, 0.45, 1.1])),
    ("M.ochrogaster", 45,
     np.array([95.0, 240.0, 46.5, 58.5, 133.0, 32.5, 92.0]),
     np.array([16.0, 8.0, 2.4, 1.5, 4.8, 0.65, 2.2]),
     np.array([0.0, 4.5, -2.9, 2.0, -5.0, 1.1, 2.5]),
     np.array([28.0, 1.9, 0.95, 0.75, 1.7, 0.42, 1.0])),
]

PINNED_ROW = 81     # 1-based position in the written file
PINNED_AGE = 122.0


def generate(seed: int = 20240811) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    for name, count, mu, growth, shape, noise_sd in SPECIES:
        factors = rng.standard_normal((count, 2))
        noise = rng.standard_normal((count, 7)) * noise_sd
        block = mu + np.outer(factors[:, 0], growth) + np.outer(factors[:, 1], shape) + noise
        block[:, 0] = np.clip(block[:, 0], 14.0, 420.0)
        for obs in block:
            rows.append([name, round(float(obs[0]))]
                        + [round(float(v), 1) for v in obs[1:]])
    rows[PINNED_ROW - 1][1] = round(PINNED_AGE)
    return rows


def main() -> None:
    out = pathlib.Path(__file__).resolve().parents[1] / "src/cngauss/data/f_voles.csv"
    rows = generate()
    header = (
        "# f_voles: SYNTHETIC SURROGATE for the female-vole morphometry table\n"
        "# (86 animals: 41 M.californicus then 45 M.ochrogaster; Age in days,\n"
        "# six skull measurements in units of 0.1 mm). The published table is\n"
        "# not redistributable in this build environment, so these rows were\n"
        "# drawn from a per-species two-factor model calibrated to the\n"
        "# documented group sizes, variable names, and measurement scales;\n"
        "# observation 81 keeps its documented age of 122 days. Regenerate\n"
        "# with scripts/make_voles_surrogate.py (fixed seed).\n"
    )
    with out.open("w", encoding="utf-8") as fh:
        fh.write(header)
        fh.write(",".join(COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    print(f"wrote {out} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
