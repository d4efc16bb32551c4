#!/usr/bin/env python3
"""Generate the deterministic synthetic GPS sample bundled under data/geolife_sample.

Sixteen stay locations on a 4x4 grid (~2.2 km spacing) are visited by six
trajectories.  Each stay emits a dense blob of points (well above the DBSCAN
min_pts threshold at eps 200 m); legs between stays emit a few widely
scattered travel points that stay below the density threshold.
"""

import math
import os
import random

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "geolife_sample")

BASE_LAT, BASE_LON = 39.98, 116.30
SPACING = 0.02  # degrees, ~2.2 km of latitude
EPOCH_DAYS = 39744  # days column base, cosmetic only


def centers():
    return [
        (BASE_LAT + (i // 4) * SPACING, BASE_LON + (i % 4) * SPACING / math.cos(math.radians(BASE_LAT)))
        for i in range(16)
    ]


def fmt_point(lat, lon, t):
    days = EPOCH_DAYS + t / 86400.0
    h, rem = divmod(t % 86400, 3600)
    m, s = divmod(rem, 60)
    day = t // 86400
    date = f"2008-10-{23 + day:02d}"
    return f"{lat:.6f},{lon:.6f},0,164,{days:.10f},{date},{h:02d}:{m:02d}:{s:02d}"


def main():
    rng = random.Random(20080101)
    cs = centers()
    os.makedirs(OUT_DIR, exist_ok=True)

    # each trajectory is a walk over the 4x4 place grid (moves of 1 grid step)
    for traj in range(6):
        lines = [
            "Geolife trajectory",
            "WGS 84",
            "Altitude is in Feet",
            "Reserved 3",
            "0,2,255,sample,0,0,2,34",
            "0",
        ]
        t = traj * 400  # stagger start times; files are independent anyway
        place = rng.randrange(16)
        for _visit in range(14):
            lat, lon = cs[place]
            for _ in range(rng.randint(14, 20)):  # dense stay blob, ~60 m jitter
                jlat = lat + rng.uniform(-0.0005, 0.0005)
                jlon = lon + rng.uniform(-0.0005, 0.0005)
                lines.append(fmt_point(jlat, jlon, t))
                t += 30
            # pick an adjacent place and emit sparse travel points
            r, c = divmod(place, 4)
            moves = [(r + dr, c + dc) for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
                     if 0 <= r + dr < 4 and 0 <= c + dc < 4]
            nr, nc = rng.choice(moves)
            nxt = nr * 4 + nc
            nlat, nlon = cs[nxt]
            for k in range(1, 3):  # 2 scattered points per leg
                f = k / 3.0
                tlat = lat + (nlat - lat) * f + rng.uniform(-0.003, 0.003)
                tlon = lon + (nlon - lon) * f + rng.uniform(-0.003, 0.003)
                lines.append(fmt_point(tlat, tlon, t))
                t += 60
            place = nxt
        name = os.path.join(OUT_DIR, f"200810{23 + traj:02d}.plt")
        with open(name, "w", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        print(f"wrote {name}: {len(lines) - 6} points")


if __name__ == "__main__":
    main()
