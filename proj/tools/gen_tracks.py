#!/usr/bin/env python3
"""Generate the bundled race track grids.

Each track is a closed centerline built from straight and circular pieces,
rasterized into an RLGRID file: a cell is free when its center lies within
half the track width of the centerline. The script also writes
assets/tracks.meta recording the design centerline length and the number of
free cells for every track, so tests can check the loader and the centerline
extractor against numbers computed independently of the C++ code.

Usage: python3 tools/gen_tracks.py [outdir]
"""

import math
import sys
from pathlib import Path

RESOLUTION = 0.05


class Straight:
    def __init__(self, start, heading, length):
        self.start = start
        self.heading = heading
        self.length = length

    def end(self):
        x, y = self.start
        return (x + self.length * math.cos(self.heading),
                y + self.length * math.sin(self.heading)), self.heading

    def distance(self, px, py):
        x0, y0 = self.start
        dx, dy = math.cos(self.heading), math.sin(self.heading)
        t = (px - x0) * dx + (py - y0) * dy
        t = min(max(t, 0.0), self.length)
        return math.hypot(px - (x0 + t * dx), py - (y0 + t * dy))


class LeftArc:
    """Counter-clockwise arc of given radius and sweep."""

    def __init__(self, start, heading, radius, sweep):
        self.start = start
        self.heading = heading
        self.radius = radius
        self.sweep = sweep
        self.center = (start[0] - radius * math.sin(heading),
                       start[1] + radius * math.cos(heading))
        self.a0 = heading - math.pi / 2
        self.length = radius * sweep

    def end(self):
        a1 = self.a0 + self.sweep
        return (self.center[0] + self.radius * math.cos(a1),
                self.center[1] + self.radius * math.sin(a1)), self.heading + self.sweep

    def distance(self, px, py):
        cx, cy = self.center
        ang = math.atan2(py - cy, px - cx)
        rel = (ang - self.a0) % (2 * math.pi)
        if rel <= self.sweep:
            return abs(math.hypot(px - cx, py - cy) - self.radius)
        (ex, ey), _ = self.end()
        sx, sy = self.start
        return min(math.hypot(px - sx, py - sy), math.hypot(px - ex, py - ey))


def build(pieces_spec):
    pos, heading = (0.0, 0.0), 0.0
    pieces = []
    for kind, *args in pieces_spec:
        piece = Straight(pos, heading, *args) if kind == "S" else LeftArc(pos, heading, *args)
        pieces.append(piece)
        pos, heading = piece.end()
    gap = math.hypot(pos[0], pos[1])
    if gap > 1e-9:
        raise SystemExit(f"track does not close: gap {gap}")
    return pieces


TRACKS = {
    # stadium: 8 m straights, 3.5 m radius ends
    "oval": dict(width=2.2, pieces=[
        ("S", 8.0), ("A", 3.5, math.pi), ("S", 8.0), ("A", 3.5, math.pi)]),
    # two straights of different length, a wide 180 degree turn and a
    # left-hand complex of two quarter turns with different radii
    "porto": dict(width=2.0, pieces=[
        ("S", 10.0), ("A", 3.0, math.pi), ("S", 10.8),
        ("A", 2.0, math.pi / 2), ("S", 1.2), ("A", 2.8, math.pi / 2)]),
}


def rasterize(pieces, width, margin=0.5):
    half = width / 2
    xs, ys = [], []
    for p in pieces:
        n = 200
        for k in range(n + 1):
            # bounding box from dense samples
            if isinstance(p, Straight):
                t = p.length * k / n
                xs.append(p.start[0] + t * math.cos(p.heading))
                ys.append(p.start[1] + t * math.sin(p.heading))
            else:
                a = p.a0 + p.sweep * k / n
                xs.append(p.center[0] + p.radius * math.cos(a))
                ys.append(p.center[1] + p.radius * math.sin(a))
    ox = math.floor((min(xs) - half - margin) / RESOLUTION) * RESOLUTION
    oy = math.floor((min(ys) - half - margin) / RESOLUTION) * RESOLUTION
    ox, oy = round(ox, 6), round(oy, 6)
    w = int(math.ceil((max(xs) + half + margin - ox) / RESOLUTION))
    h = int(math.ceil((max(ys) + half + margin - oy) / RESOLUTION))
    rows = []
    free = 0
    for r in range(h):
        cy = oy + (r + 0.5) * RESOLUTION
        line = []
        for c in range(w):
            cx = ox + (c + 0.5) * RESOLUTION
            d = min(p.distance(cx, cy) for p in pieces)
            if d <= half:
                line.append(".")
                free += 1
            else:
                line.append("#")
        rows.append("".join(line))
    return ox, oy, w, h, rows, free


def main():
    outdir = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "assets")
    outdir.mkdir(parents=True, exist_ok=True)
    meta = ["# name design_length_m free_cells width_m"]
    for name, spec in TRACKS.items():
        pieces = build(spec["pieces"])
        length = sum(p.length for p in pieces)
        ox, oy, w, h, rows, free = rasterize(pieces, spec["width"])
        with open(outdir / f"{name}.grid", "w") as f:
            f.write("RLGRID 1\n")
            f.write(f"width {w}\nheight {h}\nresolution {RESOLUTION!r}\n")
            f.write(f"origin_x {ox!r}\norigin_y {oy!r}\n")
            for row in rows:
                f.write(row + "\n")
        # recount from the written file rather than trusting the rasterizer
        text = (outdir / f"{name}.grid").read_text().splitlines()[6:]
        counted = sum(row.count(".") for row in text)
        assert counted == free
        meta.append(f"{name} {length!r} {counted} {spec['width']!r}")
        print(f"{name}: {w}x{h} cells, design length {length:.4f} m, {counted} free cells")
    (outdir / "tracks.meta").write_text("\n".join(meta) + "\n")


if __name__ == "__main__":
    main()
