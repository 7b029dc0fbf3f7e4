"""Regenerates the demo path tables."""
import math

def write(name, header, rows):
    with open(name, "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join("%.12g" % v for v in r) + "\n")

# Writing stroke: circle of radius 0.15 m centred at (0.6, 0), arc-length parametrized.
r, cx, cy, n = 0.15, 0.6, 0.0, 201
length = 2.0 * math.pi * r
rows = []
for k in range(n):
    s = length * k / (n - 1)
    th = s / r - math.pi / 2
    rows.append((s, cx + r * math.cos(th), cy + r * math.sin(th)))
write("writing_path.csv", ["lambda", "x", "y"], rows)

# Joint-space sine path: q_j = sin(lambda) on [0, pi].
n = 101
rows = []
for k in range(n):
    l = math.pi * k / (n - 1)
    rows.append((l, math.sin(l), math.sin(l)))
write("sine_path.csv", ["lambda", "q1", "q2"], rows)
