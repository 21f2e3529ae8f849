#!/usr/bin/env python3
"""Generate the synthetic 35-ACO x 17-MACO metro topology shipped in data/.

The layout is a planar metro mesh of 17 aggregation offices plus 6 transit
nodes, with 35 access offices homed onto the mesh. Link lengths follow node
coordinates; loads are drawn from a fixed-seed generator. Output is the
JSON topology format read by `telsim`.

    python3 tools/gen_synthetic_metro.py > data/metro_synthetic.json
"""
import json
import math
import random
import sys

SEED = 20240517


def main() -> None:
    rng = random.Random(SEED)

    core = []
    for i in range(17):
        core.append((f"MACO_{i + 1:02d}", "MACO",
                     rng.uniform(0.0, 11.0), rng.uniform(0.0, 7.0)))
    for i in range(6):
        core.append((f"TR_{i + 1:02d}", "TRANSIT",
                     rng.uniform(1.0, 10.0), rng.uniform(1.0, 6.0)))

    def dist(a, b):
        return math.hypot(a[2] - b[2], a[3] - b[3])

    edges = set()
    for i, a in enumerate(core):
        nearest = sorted((dist(a, b), j) for j, b in enumerate(core) if j != i)
        for _, j in nearest[:3]:
            edges.add((min(i, j), max(i, j)))

    links = []

    def add_link(a, b, length, load):
        links.append({
            "id": f"L{len(links) + 1:03d}",
            "a": a,
            "b": b,
            "length_km": round(max(length, 0.2), 3),
            "load": round(load, 3),
        })

    for i, j in sorted(edges):
        add_link(core[i][0], core[j][0], 1.15 * dist(core[i], core[j]),
                 rng.uniform(0.15, 0.7))

    nodes = [{"id": c[0], "role": c[1]} for c in core]
    for i in range(35):
        aco = f"ACO_{i + 1:02d}"
        nodes.append({"id": aco, "role": "ACO"})
        home = rng.randrange(len(core))
        add_link(aco, core[home][0], rng.uniform(0.5, 3.0),
                 rng.uniform(0.3, 0.88))

    json.dump({"name": "metro-synthetic-35x17", "nodes": nodes, "links": links},
              sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
