#!/usr/bin/env python3
"""Regenerates crates/red/data/sample_red.csv.

Synthetic two-encoder measurement campaign on one sequence, three energy
repeats per configuration. Rates fall exponentially with the quality
parameter, PSNR follows a smooth cubic, and presets trade energy against
a small PSNR bump, so the points lie on a smooth genuinely 2-D surface:
supporting points interpolate it exactly and non-supporting probes land
strictly inside the supporting hull.
"""

import math
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "red" / "data" / "sample_red.csv"

SEQUENCE = "ParkScene"

# preset -> (rate factor, psnr adder, base encode energy J for x264)
PRESETS = {
    "ultrafast": (1.25, -0.8, 40.0),
    "superfast": (1.18, -0.55, 55.0),
    "veryfast": (1.12, -0.35, 75.0),
    "faster": (1.06, -0.18, 100.0),
    "fast": (1.0, 0.0, 130.0),
    "medium": (0.95, 0.12, 170.0),
    "slow": (0.90, 0.22, 260.0),
    "slower": (0.86, 0.32, 400.0),
    "veryslow": (0.82, 0.4, 600.0),
}

SUPPORTING = [("ultrafast", "fast", "medium", "slow", "veryslow"), (18, 23, 28, 33)]
NON_SUPPORTING = [("superfast", "veryfast", "faster", "slower"), (20, 21, 25, 26, 30, 31)]

# encoder -> (rate scale, psnr adder, energy scale, mean power W)
ENCODERS = {
    "x264": (1.0, 0.0, 1.0, 28.0),
    "x265": (0.75, 0.9, 2.2, 30.0),
}

REPEAT_FACTORS = [0.998, 1.0, 1.002]

RATE_DECAY = math.log(9000.0 / 1100.0) / 15.0


def base_rate(crf: float) -> float:
    return 9000.0 * math.exp(-RATE_DECAY * (crf - 18.0))


def base_psnr(crf: float) -> float:
    x = crf - 18.0
    return 41.5 - 0.4766667 * x - 0.014 * x * x + 0.00026667 * x * x * x


def rows_for(encoder: str, preset: str, crf: int, origin: str):
    rate_scale, psnr_add, energy_scale, power = ENCODERS[encoder]
    rate_factor, preset_psnr, preset_energy = PRESETS[preset]
    rate = round(base_rate(crf) * rate_factor * rate_scale, 3)
    psnr = round(base_psnr(crf) + preset_psnr + psnr_add, 3)
    energy_enc = preset_energy * (1.0 + (33 - crf) * 0.01) * energy_scale
    idle = round(0.3 * energy_enc, 3)
    for repeat, factor in enumerate(REPEAT_FACTORS):
        total = round(energy_enc * factor + idle, 3)
        duration = round(energy_enc * factor / power, 3)
        yield (
            SEQUENCE,
            encoder,
            preset,
            crf,
            rate,
            total,
            idle,
            duration,
            psnr,
            repeat,
            origin,
        )


def main() -> None:
    lines = [
        "sequence,encoder,preset,quality,rate_kbps,energy_total_j,energy_idle_j,duration_s,psnr_db,repeat,origin"
    ]
    for encoder in ENCODERS:
        for presets, crfs, origin in (
            (*SUPPORTING, "s"),
            (*NON_SUPPORTING, "ns"),
        ):
            for preset in presets:
                for crf in crfs:
                    for row in rows_for(encoder, preset, crf, origin):
                        lines.append(",".join(str(v) for v in row))
    OUT.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines) - 1} data rows to {OUT}")


if __name__ == "__main__":
    main()
