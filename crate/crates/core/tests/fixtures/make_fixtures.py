"""Writes the cube STL (ASCII and binary) and the minimal EnSight case.

Independent of the Rust code so the parsers are checked against a separate
writer. Run from this directory: python3 make_fixtures.py
"""
import struct

V = [(x, y, z) for z in (0.0, 1.0) for y in (0.0, 1.0) for x in (0.0, 1.0)]
# two outward-facing triangles per cube face, vertex indices into V
QUADS = [(0, 2, 3, 1), (4, 5, 7, 6), (0, 1, 5, 4), (2, 6, 7, 3), (0, 4, 6, 2), (1, 3, 7, 5)]
TRIS = [t for a, b, c, d in QUADS for t in ((a, b, c), (a, c, d))]


def normal(t):
    p, q, r = (V[i] for i in t)
    u = [q[k] - p[k] for k in range(3)]
    w = [r[k] - p[k] for k in range(3)]
    return (u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0])


with open("cube_ascii.stl", "w") as f:
    f.write("solid cube\n")
    for t in TRIS:
        f.write("  facet normal %g %g %g\n    outer loop\n" % normal(t))
        for i in t:
            f.write("      vertex %g %g %g\n" % V[i])
        f.write("    endloop\n  endfacet\n")
    f.write("endsolid cube\n")

with open("cube_binary.stl", "wb") as f:
    f.write(b"solid cube (binary, written by make_fixtures.py)".ljust(80, b" "))
    f.write(struct.pack("<I", len(TRIS)))
    for t in TRIS:
        f.write(struct.pack("<3f", *normal(t)))
        for i in t:
            f.write(struct.pack("<3f", *V[i]))
        f.write(struct.pack("<H", 0))

with open("cube_truncated.stl", "wb") as f:
    data = open("cube_binary.stl", "rb").read()
    f.write(data[:-20])

with open("bad_facet.stl", "w") as f:
    f.write("solid bad\n  facet normal 0 0 1\n    outer loop\n      vertex 0 0 0\n"
            "      vertex 1 0\n      vertex 0 1 0\n    endloop\n  endfacet\nendsolid bad\n")

case = """FORMAT
type: ensight gold

GEOMETRY
model: plate.geo

VARIABLE
scalar per node: 1 pressure plate.scl****
vector per element: 1 velocity plate.vel****

TIME
time set: 1
number of steps: 2
filename start number: 0
filename increment: 1
time values: 0.0 0.25
"""
geo = """plate geometry
one quad
node id assign
element id assign
part
         1
plate
coordinates
         4
 0.00000e+00
 1.00000e+00
 1.00000e+00
 0.00000e+00
 0.00000e+00
 0.00000e+00
 1.00000e+00
 1.00000e+00
 0.00000e+00
 0.00000e+00
 0.00000e+00
 0.00000e+00
quad4
         1
         1         2         3         4
"""
open("ensight/plate.case", "w").write(case)
open("ensight/plate.geo", "w").write(geo)
for step in range(2):
    vals = "".join(" %.5e\n" % (10 * step + k) for k in range(4))
    open("ensight/plate.scl%04d" % step, "w").write("pressure\npart\n         1\ncoordinates\n" + vals)
    vel = "".join(" %.5e\n" % (step + c) for c in range(3))
    open("ensight/plate.vel%04d" % step, "w").write("velocity\npart\n         1\nquad4\n" + vel)
open("ensight/binary.case", "w").write(case.replace("plate.geo", "binary.geo"))
open("ensight/binary.geo", "w").write("C Binary" + " " * 72)
open("ensight/badelem.case", "w").write(case.replace("plate.geo", "badelem.geo").split("VARIABLE")[0])
open("ensight/badelem.geo", "w").write(geo.replace("quad4", "nsided"))
open("ensight/missing.case", "w").write(case.replace("number of steps: 2", "number of steps: 3").replace("0.0 0.25", "0.0 0.25 0.5"))

# 3x3-node plate with 32 transient steps for the command-line pipeline:
# ramp = (1 + x + 2y) t + 3 and wave = (1 + x) sin(2 pi 4 t), dt = 1/32.
import math

n_steps, dt = 32, 1.0 / 32.0
nodes = [(0.5 * i, 0.5 * j) for j in range(3) for i in range(3)]
wave_case = """FORMAT
type: ensight gold

GEOMETRY
model: wave.geo

VARIABLE
scalar per node: 1 ramp wave.ramp**
scalar per node: 1 wave wave.wave**

TIME
time set: 1
number of steps: %d
filename start number: 0
filename increment: 1
time values:
""" % n_steps
for k in range(n_steps):
    wave_case += "%r\n" % (k * dt)
open("ensight/wave.case", "w").write(wave_case)

geo = "wave plate\n3x3 nodes\nnode id assign\nelement id assign\npart\n         1\nwave\ncoordinates\n%10d\n" % len(nodes)
for c in range(3):
    for x, y in nodes:
        geo += " %r\n" % ((x, y, 0.0)[c] * 1.0)
geo += "quad4\n%10d\n" % 4
for j in range(2):
    for i in range(2):
        a = 3 * j + i + 1
        geo += "%10d%10d%10d%10d\n" % (a, a + 1, a + 4, a + 3)
open("ensight/wave.geo", "w").write(geo)

for k in range(n_steps):
    t = k * dt
    ramp = "".join(" %r\n" % ((1 + x + 2 * y) * t + 3) for x, y in nodes)
    wave = "".join(" %r\n" % ((1 + x) * math.sin(2 * math.pi * 4 * t)) for x, y in nodes)
    open("ensight/wave.ramp%02d" % k, "w").write("ramp\npart\n         1\ncoordinates\n" + ramp)
    open("ensight/wave.wave%02d" % k, "w").write("wave\npart\n         1\ncoordinates\n" + wave)
