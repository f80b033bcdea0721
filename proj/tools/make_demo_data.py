#!/usr/bin/env python3
"""Regenerates the synthetic demo topologies under data/.

The geometry is plausible but invented: no published network data exists for
these files. Output is deterministic (fixed seed) and committed to the repo.
"""
import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data"

# MV cable, 15 kV, 10 MVA base: Zbase = 22.5 ohm
R_OHM_PER_KM = 0.161
X_OHM_PER_KM = 0.110
Z_BASE = 15.0 ** 2 / 10.0


def electric_topology(rng):
    feeders = {
        1: [(1, 2), (2, 3), (3, 4), (4, 5), (2, 6), (6, 7), (7, 8), (3, 9), (9, 10)],
        2: [(12, 11), (12, 13), (13, 14), (14, 15), (15, 16), (13, 17), (17, 18), (18, 19),
            (12, 20), (20, 21), (21, 22), (22, 23), (20, 24), (24, 25)],
        3: [(26, 27), (27, 28), (28, 29), (29, 30), (30, 31), (31, 32), (27, 33), (33, 34),
            (34, 35), (35, 36), (26, 37), (37, 38), (38, 39), (39, 40), (37, 41), (41, 42),
            (42, 43)],
    }
    rows = []
    for edges in feeders.values():
        for a, b in edges:
            km = round(rng.uniform(0.3, 1.2), 3)
            rows.append((a, b, R_OHM_PER_KM * km / Z_BASE, X_OHM_PER_KM * km / Z_BASE, km))
    return rows


def gas_topology(rng, n_nodes, injection_nodes=()):
    """Citygate at node 1 feeding node 2; a random spanning tree over the
    remaining nodes plus a few loop-closing pipes."""
    pipes = [(1, 2, 150.0, 250.0)]
    depth = {2: 0}
    for node in range(3, n_nodes + 1):
        # attach to a recent node to get elongated streets rather than a star
        lo = max(2, node - 6)
        parent = rng.randint(lo, node - 1)
        depth[node] = depth[parent] + 1
        d = 200.0 if depth[node] <= 2 else (150.0 if depth[node] <= 5 else 100.0)
        pipes.append((parent, node, round(rng.uniform(200.0, 600.0), 1), d))
    loops = max(3, n_nodes // 12)
    existing = {(min(a, b), max(a, b)) for a, b, _, _ in pipes}
    while loops:
        a, b = sorted(rng.sample(range(2, n_nodes + 1), 2))
        if (a, b) in existing or abs(depth[a] - depth[b]) > 3:
            continue
        existing.add((a, b))
        pipes.append((a, b, round(rng.uniform(250.0, 700.0), 1), 100.0))
        loops -= 1
    return pipes


def pipe_volume(length_m, diameter_mm):
    return math.pi * (diameter_mm / 2000.0) ** 2 * length_m


def write_csv(path, header, rows, fmt):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(fm.format(v) for fm, v in zip(fmt, r)) + "\n")


def main():
    rng = random.Random(20300101)
    demo = ROOT / "demo"
    write_csv(demo / "en_topology.csv", ["from", "to", "R_pu", "X_pu", "length_km"],
              electric_topology(rng), ["{}", "{}", "{:.8f}", "{:.8f}", "{}"])
    gn = gas_topology(rng, 45)
    write_csv(demo / "gn_topology.csv", ["from", "to", "length_m", "diameter_mm"], gn,
              ["{}", "{}", "{}", "{}"])
    print("demo gas volume m3:", round(sum(pipe_volume(l, d) for _, _, l, d in gn), 1))

    v = ROOT / "validation78"
    g78 = gas_topology(rng, 78)
    write_csv(v / "gn78_topology.csv", ["from", "to", "length_m", "diameter_mm"], g78,
              ["{}", "{}", "{}", "{}"])
    # constant winter-like withdrawals, ~0.45 kg/s total
    weights = {n: rng.uniform(0.5, 1.5) for n in range(3, 79)}
    total = sum(weights.values())
    withdrawals = {str(n): round(0.45 * w / total, 6) for n, w in weights.items()}
    print("validation78 gas volume m3:", round(sum(pipe_volume(l, d) for _, _, l, d in g78), 1))
    cfg = {
        "gas": {
            "topology_csv": "gn78_topology.csv",
            "citygate_node": 1,
            "citygate_pressure_barg": 4.0,
            "p_min_barg": 1.5,
            "p_max_barg": 5.0,
            "rho_std_kg_per_m3": 0.78,
            "r_gas_j_per_kgk": 518.0,
            "temperature_k": 288.0,
        },
        "withdrawals_kg_per_s": withdrawals,
        "horizon_h": 24.0,
        "step_s": 900.0,
    }
    (v / "validation.json").write_text(json.dumps(cfg, indent=2) + "\n")


if __name__ == "__main__":
    main()
